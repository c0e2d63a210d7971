// End-to-end acceptance suite: one pass/fail line per criterion.
// Exit code 0 only when every criterion passes.

#include <chrono>
#include <cstdio>
#include <iostream>

#include "pplab/verify.hpp"

int main() {
  using namespace pplab;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<VerifyResult> results = run_all_verifications();

  int passed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    std::printf("[%2zu] %s  %-38s %s\n", i + 1, r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    std::fflush(stdout);
    if (r.pass) ++passed;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("ACCEPTANCE: %d/%zu passed in %.1f s\n", passed, results.size(), elapsed);
  return passed == int(results.size()) ? 0 : 1;
}
