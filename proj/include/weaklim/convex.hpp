#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weaklim/geometry.hpp"

namespace weaklim {

enum class BuiltinConvex { PhiBalanced, PhiIdentityish, PowerA, PlogA };

struct GrowthFlags {
    bool blow_up_at_zero = false;        // lim_{t->0+} f(t) = inf
    bool superlinear_at_infinity = false;  // lim f(t)/t = inf
    bool doubling = false;               // f(2t) <= C f(t) on the grid
};

// Scalar convex function together with a log-spaced sample grid on which
// growth conditions are checked empirically.
struct ConvexFunctionSpec {
    std::string name;
    std::vector<double> params;
    std::function<double(double)> evaluator;
    std::function<double(double)> derivative;  // optional; finite differences otherwise
    bool domain_includes_zero = false;
    GrowthFlags flags;
    std::optional<double> doubling_constant;
    std::vector<double> grid;

    double operator()(double t) const { return evaluator(t); }
    double d(double t) const {
        if (derivative) return derivative(t);
        double h = 1e-7 * (1.0 + std::abs(t));
        return (evaluator(t + h) - evaluator(t - h)) / (2.0 * h);
    }
};

std::vector<double> make_log_grid(double lo, double hi, int count);

// Default numeric grid: 2048 points spanning [1e-6, 1e6].
std::vector<double> default_grid();

ConvexFunctionSpec make_builtin(BuiltinConvex which, double param = 2.0);
ConvexFunctionSpec make_builtin(const std::string& name, double param = 2.0);

struct FlagReport {
    double max_convexity_violation = 0;
    bool midpoint_convex = false;
    GrowthFlags derived;
    double doubling_constant = 0;
    double blow_up_ratio = 0;     // f(t_min) / f(1)
    double superlinear_ratio = 0;  // (f(t_max)/t_max) / (f(1)/1)
};

// Re-derives every growth flag from grid samples.
FlagReport verify_flags(const ConvexFunctionSpec& spec);

// Numerical Legendre conjugate  A*(s) = sup_t (s t - A(t)), maximized over
// the grid and refined by golden-section search. Requires A superlinear.
ConvexFunctionSpec legendre_conjugate(const ConvexFunctionSpec& a);

// Tabulated weight b with B(t) = t b(t); the equiintegrability weight.
struct WeightFunction {
    std::vector<double> grid;
    std::vector<double> b_values;
    std::string provenance;

    // Piecewise-linear in log t; exact on the tabulation nodes.
    double b(double t) const;
    double B(double t) const { return t * b(t); }
};

// Builds b from A(t) = t a(t) and phi:
//   psi_bar = a / log t on t > 1; psi = running min of psi_bar past the
//   first grid point where psi_bar <= 1 (identically 1 when that never
//   happens); b_bar = psi log t; b = suffix-inf of b_bar, then capped by
//   (A*)^{-1}(phi(1/t)) for t >= cap_threshold.
WeightFunction construct_b(const ConvexFunctionSpec& a_spec, const ConvexFunctionSpec& phi,
                           double cap_threshold = 10.0);

std::string spec_to_json(const ConvexFunctionSpec& spec);
void weight_to_csv(const WeightFunction& w, const std::string& path);

}  // namespace weaklim
