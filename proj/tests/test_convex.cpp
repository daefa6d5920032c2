#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "weaklim/convex.hpp"
#include "weaklim/rng.hpp"

using namespace weaklim;

TEST_CASE("builtin values and flags") {
    ConvexFunctionSpec phi_i = make_builtin(BuiltinConvex::PhiIdentityish);
    CHECK(phi_i.evaluator(1.0) == doctest::Approx(2.0));

    FlagReport r1 = verify_flags(make_builtin(BuiltinConvex::PowerA, 2.0));
    CHECK(r1.derived.superlinear_at_infinity);  // t^2/t = t unbounded

    FlagReport r2 = verify_flags(make_builtin(BuiltinConvex::PhiBalanced));
    CHECK_FALSE(r2.derived.superlinear_at_infinity);  // (t+1/t)/t -> 1
    CHECK(r2.derived.blow_up_at_zero);

    // t log(e+t): superlinear by construction; the grid ratio grows but
    // logarithms cannot clear the 1e3 empirical threshold on this range
    ConvexFunctionSpec plog = make_builtin(BuiltinConvex::PlogA);
    CHECK(plog.flags.superlinear_at_infinity);
    FlagReport r3 = verify_flags(plog);
    CHECK(r3.superlinear_ratio > 5.0);
    CHECK(plog.evaluator(1e6) / 1e6 > 2.0 * plog.evaluator(1e2) / 1e2);
}

TEST_CASE("every builtin passes midpoint convexity on its grid") {
    for (auto which : {BuiltinConvex::PhiBalanced, BuiltinConvex::PhiIdentityish, BuiltinConvex::PowerA,
                       BuiltinConvex::PlogA}) {
        FlagReport rep = verify_flags(make_builtin(which));
        CHECK(rep.midpoint_convex);
        CHECK(rep.max_convexity_violation <= 1e-9);
    }
}

TEST_CASE("verify_flags on custom evaluators") {
    ConvexFunctionSpec exp_inv;
    exp_inv.name = "exp_inv";
    exp_inv.evaluator = [](double t) { return std::exp(std::min(1.0 / t, 700.0)); };
    exp_inv.grid = make_log_grid(1e-2, 1e4, 512);
    CHECK(verify_flags(exp_inv).derived.blow_up_at_zero);

    ConvexFunctionSpec linear;
    linear.name = "identity";
    linear.evaluator = [](double t) { return t; };
    linear.grid = default_grid();
    CHECK_FALSE(verify_flags(linear).derived.superlinear_at_infinity);

    // doubling constant of t + 1/t stays <= 2 on [1e-4, 1e4]
    ConvexFunctionSpec balanced;
    balanced.name = "balanced";
    balanced.evaluator = [](double t) { return t + 1.0 / t; };
    balanced.grid = make_log_grid(1e-4, 1e4, 1024);
    CHECK(verify_flags(balanced).doubling_constant <= 2.0 + 1e-9);
}

TEST_CASE("Legendre conjugate: self-conjugate pair t^2/2") {
    ConvexFunctionSpec a;
    a.name = "half_square";
    a.evaluator = [](double t) { return 0.5 * t * t; };
    a.grid = default_grid();
    ConvexFunctionSpec conj = legendre_conjugate(a);
    for (double s = 0.0; s <= 10.0; s += 0.37) {
        CHECK(std::abs(conj.evaluator(s) - 0.5 * s * s) <= 1e-6 * (1.0 + 0.5 * s * s));
    }
}

TEST_CASE("Legendre conjugate: power pair and Young inequality") {
    const double beta = 3.0;
    const double beta_conj = beta / (beta - 1.0);
    ConvexFunctionSpec a;
    a.name = "power_over_beta";
    a.evaluator = [beta](double t) { return std::pow(t, beta) / beta; };
    a.grid = default_grid();
    ConvexFunctionSpec conj = legendre_conjugate(a);
    for (double s = 0.1; s <= 8.0; s += 0.41) {
        double expect = std::pow(s, beta_conj) / beta_conj;
        CHECK(std::abs(conj.evaluator(s) - expect) <= 1e-5 * (1.0 + expect));
    }

    Rng rng(19);
    for (int trial = 0; trial < 10000; ++trial) {
        double s = std::exp(rng.uniform(-3, 3));
        double t = std::exp(rng.uniform(-3, 3));
        double lhs = s * t;
        double rhs = a.evaluator(t) + conj.evaluator(s);
        CHECK(lhs <= rhs + 1e-8 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("double conjugate returns the original on the grid interior") {
    ConvexFunctionSpec a = make_builtin(BuiltinConvex::PowerA, 2.0);
    ConvexFunctionSpec cc = legendre_conjugate(legendre_conjugate(a));
    for (double t = 1e-3; t <= 1e3; t *= 2.7) {
        double expect = a.evaluator(t);
        CHECK(std::abs(cc.evaluator(t) - expect) <= 2e-5 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("conjugate of a non-superlinear function is rejected") {
    ConvexFunctionSpec linear;
    linear.name = "identity";
    linear.evaluator = [](double t) { return t; };
    linear.grid = default_grid();
    CHECK_THROWS_AS(legendre_conjugate(linear), Error);
}

TEST_CASE("construct_b hand trace: a(t) = log t gives b = log t above 1") {
    // A(t) = t log t has a(t) = log t; psi_bar is identically 1 above 1
    ConvexFunctionSpec a;
    a.name = "t_log_t";
    a.evaluator = [](double t) { return t * std::log(t); };
    a.grid = make_log_grid(1e-3, 1e6, 2048);
    ConvexFunctionSpec phi = make_builtin(BuiltinConvex::PhiIdentityish);
    WeightFunction w = construct_b(a, phi);
    for (double t : {0.5, 0.9, 1.0}) CHECK(w.b(t) == 0.0);
    for (double t : {2.0, 10.0, 1e3, 1e5}) CHECK(std::abs(w.b(t) - std::log(t)) <= 1e-6 * std::log(t));
}

TEST_CASE("weights are monotone with b(1)=0 and subadditive") {
    ConvexFunctionSpec a = make_builtin(BuiltinConvex::PowerA, 2.0);
    ConvexFunctionSpec phi = make_builtin(BuiltinConvex::PhiIdentityish);
    WeightFunction w = construct_b(a, phi);
    CHECK(w.b(1.0) == 0.0);
    for (size_t i = 1; i < w.grid.size(); ++i) CHECK(w.b_values[i] >= w.b_values[i - 1] - 1e-12);
    // b <= a above 1 and B(t) = t b(t) nondecreasing
    for (size_t i = 1; i < w.grid.size(); ++i) {
        if (w.grid[i] > 1.0) CHECK(w.b_values[i] <= a.evaluator(w.grid[i]) / w.grid[i] + 1e-12);
        CHECK(w.B(w.grid[i]) >= w.B(w.grid[i - 1]) - 1e-12);
    }
    Rng rng(23);
    for (int trial = 0; trial < 10000; ++trial) {
        double s = std::exp(rng.uniform(-10, 10));
        double t = std::exp(rng.uniform(-10, 10));
        CHECK(w.b(s * t) <= w.b(s) + w.b(t) + 1e-9);
    }
}

TEST_CASE("construct_b rejects nonpositive a") {
    ConvexFunctionSpec bad;
    bad.name = "negative";
    bad.evaluator = [](double t) { return -t; };
    bad.grid = default_grid();
    ConvexFunctionSpec phi = make_builtin(BuiltinConvex::PhiIdentityish);
    CHECK_THROWS_AS(construct_b(bad, phi), Error);
}

TEST_CASE("spec json and weight csv exports") {
    ConvexFunctionSpec a = make_builtin(BuiltinConvex::PowerA, 2.0);
    std::string js = spec_to_json(a);
    CHECK(js.find("power_A") != std::string::npos);
    CHECK(js.find("superlinear_at_infinity\":true") != std::string::npos);

    WeightFunction w = construct_b(a, make_builtin(BuiltinConvex::PhiIdentityish));
    std::string path = "test_weight.csv";
    weight_to_csv(w, path);
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,b");
    is.close();
    std::remove(path.c_str());
}
