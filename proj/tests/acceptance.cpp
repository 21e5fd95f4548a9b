// Release gate: runs every acceptance criterion and prints one verdict line
// per criterion.  Exits nonzero if any fails.
#include "hcsim/verify.hpp"

#include <cstdio>
#include <iostream>

int main() {
  hcsim::VerifyEngine engine(std::cout);
  auto results = engine.run_suite("all");
  std::size_t passed = 0;
  for (const auto& r : results)
    if (r.pass) ++passed;
  std::printf("%zu/%zu criteria passed\n", passed, results.size());
  return passed == results.size() ? 0 : 1;
}
