// Acceptance binary: one line per criterion, non-zero exit if any fails.

#include "relbundle/selftest.hpp"

int main() {
  bool ok = true;
  for (const auto& c : relbundle::selftest::run_all()) {
    relbundle::selftest::print(std::cout, c);
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}
