#pragma once

// Minimal check/report helpers shared by the test programs. Each test binary
// is a plain main() that exits nonzero on the first failed section.

#include <cmath>
#include <cstdio>
#include <string>

namespace testing {

inline int g_checks = 0;
inline int g_failures = 0;

inline void check(bool ok, const std::string& what) {
    ++g_checks;
    if (!ok) {
        ++g_failures;
        std::fprintf(stderr, "FAILED: %s\n", what.c_str());
    }
}

inline void check_near(double actual, double expected, double tol, const std::string& what) {
    ++g_checks;
    if (!(std::fabs(actual - expected) <= tol)) {
        ++g_failures;
        std::fprintf(stderr, "FAILED: %s (actual %.10g, expected %.10g, tol %.3g)\n", what.c_str(),
                     actual, expected, tol);
    }
}

template <typename Fn>
void section(const char* name, Fn&& fn) {
    const int before = g_failures;
    fn();
    std::printf("%-56s %s\n", name, g_failures == before ? "ok" : "FAILED");
}

inline int report(const char* suite) {
    if (g_failures == 0) {
        std::printf("%s: all %d checks passed\n", suite, g_checks);
        return 0;
    }
    std::printf("%s: %d of %d checks FAILED\n", suite, g_failures, g_checks);
    return 1;
}

} // namespace testing
