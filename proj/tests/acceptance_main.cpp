#include <iostream>

#include "d2dstore/app/acceptance.hpp"
#include "d2dstore/app/golden.hpp"

int main() {
  using namespace d2dstore::app;
  AcceptanceOptions opt;
  opt.golden = D2D_GOLDEN_FILE;
  opt.progress = &std::cout;
  try {
    const auto results = run_acceptance(opt);
    int failed = 0;
    for (const auto& r : results) failed += !r.pass;
    std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
  } catch (const GoldenMissing& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
}
