#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "weaklim/experiments.hpp"
#include "weaklim/geometry.hpp"

using namespace weaklim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& s) const { return (path / s).string(); }
};

std::string slurp(const std::string& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("malformed configs are rejected with the config error code") {
    TempDir tmp("weaklim_cfg_test");
    try {
        run_experiment("{not json", tmp.sub("a"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
    try {
        run_experiment(R"({"command":"degree","bogus":1})", tmp.sub("b"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
    try {
        run_experiment(R"({"command":"no_such_command"})", tmp.sub("c"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
    // no partial outputs appear for failed runs
    CHECK_FALSE(fs::exists(tmp.sub("a")));
    CHECK_FALSE(fs::exists(tmp.sub("b")));
    CHECK_FALSE(fs::exists(tmp.sub("c")));
}

TEST_CASE("unknown parameter keys are rejected") {
    TempDir tmp("weaklim_badparam_test");
    try {
        run_experiment(R"({"command":"degree","params":{"fixture":"identity_sphere","oops":3}})", tmp.sub("x"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("degree command writes a manifest, a field csv and a summary") {
    TempDir tmp("weaklim_degree_test");
    std::string manifest = run_experiment(
        R"({"command":"degree","seed":7,"params":{"fixture":"identity_sphere","n":2,"refinement":4,"grid_resolution":48}})",
        tmp.sub("run"));
    CHECK(manifest.find("\"degree_at_center\": 1") != std::string::npos);
    CHECK(manifest.find("\"degree_outside\": 0") != std::string::npos);
    CHECK(fs::exists(tmp.sub("run") + "/manifest.json"));
    CHECK(fs::exists(tmp.sub("run") + "/degree_field.csv"));
    CHECK(fs::exists(tmp.sub("run") + "/degree.json"));
    // an existing output directory is an io error
    try {
        run_experiment(R"({"command":"degree","params":{}})", tmp.sub("run"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Io);
    }
}

TEST_CASE("identical config and seed reproduce numeric outputs bitwise") {
    TempDir tmp("weaklim_repro_test");
    const std::string cfg =
        R"({"command":"inv-check","seed":11,"params":{"fixture":"identity","n":2,"resolution":24,"r_max":0.35,"radii":3,"samples":60}})";
    run_experiment(cfg, tmp.sub("r1"));
    run_experiment(cfg, tmp.sub("r2"));
    CHECK(slurp(tmp.sub("r1") + "/inv_report.json") == slurp(tmp.sub("r2") + "/inv_report.json"));
    CHECK(slurp(tmp.sub("r1") + "/violations.csv") == slurp(tmp.sub("r2") + "/violations.csv"));
    // thread count must not change numeric payloads
    std::string cfg4 = cfg;
    run_experiment(R"({"command":"inv-check","seed":11,"threads":4,"params":{"fixture":"identity","n":2,"resolution":24,"r_max":0.35,"radii":3,"samples":60}})",
                   tmp.sub("r4"));
    CHECK(slurp(tmp.sub("r1") + "/inv_report.json") == slurp(tmp.sub("r4") + "/inv_report.json"));
}

TEST_CASE("lsc command reports the gap fields") {
    TempDir tmp("weaklim_lsc_test");
    std::string manifest = run_experiment(
        R"({"command":"lsc","seed":1,"params":{"alpha":0.4,"n":2,"K":2,"m_list":[1,2],"resolution":16}})",
        tmp.sub("run"));
    CHECK(manifest.find("jacobian_integrals") != std::string::npos);
    CHECK(manifest.find("truncated_value") != std::string::npos);
    CHECK(manifest.find("gap") != std::string::npos);
    CHECK(fs::exists(tmp.sub("run") + "/lsc_series.csv"));
}

TEST_CASE("cap-solve command reports the oscillation bound") {
    TempDir tmp("weaklim_cap_test");
    std::string manifest = run_experiment(
        R"({"command":"cap-solve","seed":5,"params":{"n":3,"sphere_refinement":2,"cap_radius":0.8,"p":2.0}})",
        tmp.sub("run"));
    CHECK(manifest.find("\"oscillation_pass\": true") != std::string::npos);
}

TEST_CASE("energy command honors tolerance overrides as parameters") {
    TempDir tmp("weaklim_energy_test");
    std::string manifest = run_experiment(
        R"({"command":"energy","params":{"fixture":"identity","n":2,"resolution":4},"tolerances":{"beta":3.0}})",
        tmp.sub("run"));
    CHECK(manifest.find("\"feasible\": true") != std::string::npos);
    CHECK(manifest.find("\"beta\": 3.0") != std::string::npos);  // override echoed
}
