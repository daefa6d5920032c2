#pragma once

#include <string>
#include <vector>

#include "weaklim/geometry.hpp"

namespace weaklim {

// One acceptance criterion outcome, as printed by the `suite` command and
// the acceptance test binary.
struct CriterionResult {
    std::string id;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

// Runs the full acceptance battery at desk scale.
std::vector<CriterionResult> run_acceptance_battery(uint64_t seed, bool verbose = false);

// Parses, validates and executes one experiment configuration, writing all
// outputs and a manifest under `out_dir` (which must not exist yet; the
// directory appears atomically via a temp-dir rename).
// Returns the manifest JSON. Throws weaklim::Error on failure; the error
// code maps to the documented exit codes (2 config, 3 numerical, 4 io).
std::string run_experiment(const std::string& config_json, const std::string& out_dir);

uint64_t fnv1a64(const std::string& bytes);

}  // namespace weaklim
