#pragma once

#include "hcsim/measurement.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace hcsim {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the release acceptance checks.  Criteria are independent entry
/// points, but the engine caches the expensive measurement pipelines so the
/// statistics checks share one run per alpha.  Every check is deterministic:
/// seeds are fixed constants.
class VerifyEngine {
 public:
  explicit VerifyEngine(std::ostream& log);

  CheckResult run_criterion(const std::string& name);
  std::vector<CheckResult> run_suite(const std::string& suite);

  static const std::vector<std::string>& criterion_names();
  static std::vector<std::string> suite_names();
  static const std::vector<std::string>& suite_criteria(const std::string& suite);

 private:
  const MeasurementRecord& measurement(Real alpha);

  CheckResult equivariance();
  CheckResult born_statistics();
  CheckResult outcome_correspondence();
  CheckResult no_crossing();
  CheckResult subensemble();
  CheckResult repeated_measurement_check();
  CheckResult oracles();
  CheckResult hygiene();

  std::ostream& log_;
  std::map<int, MeasurementRecord> measurement_cache_;
};

}  // namespace hcsim
