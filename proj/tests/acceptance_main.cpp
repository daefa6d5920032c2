// Acceptance battery runner: prints one pass/fail line per criterion and
// exits nonzero when any criterion fails.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "weaklim/experiments.hpp"

int main(int argc, char** argv) {
    uint64_t seed = 20240901;
    if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);

    auto results = weaklim::run_acceptance_battery(seed, false);
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s %s  %s\n", r.pass ? "PASS" : "FAIL", r.id.c_str(), r.name.c_str());
        std::printf("        %s\n", r.detail.c_str());
        if (!r.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", int(results.size()) - failures, results.size());
    return failures == 0 ? 0 : 1;
}
