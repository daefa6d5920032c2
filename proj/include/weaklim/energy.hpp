#pragma once

#include <map>
#include <optional>

#include "weaklim/convex.hpp"
#include "weaklim/inv.hpp"
#include "weaklim/pl_map.hpp"

namespace weaklim {

enum class EnergyKind { FModel, GModel, EPolyconvex };

// Stored-energy description. FModel integrates |Df|^{n-1} + A(|cof Df|) +
// phi(J); GModel swaps the cofactor term for the distortion term
// (|Df|^n / J)^{1/(n-1)}; EPolyconvex evaluates a caller-supplied W.
struct EnergyModel {
    EnergyKind kind = EnergyKind::FModel;
    std::optional<ConvexFunctionSpec> phi;
    std::optional<ConvexFunctionSpec> A;
    double grad_exponent = 0;  // 0: use n-1
    double coercivity_constant = 1.0;

    std::function<double(const Mat&)> W;  // direct evaluation (EPolyconvex)
    // same W expressed through the minors (|F|, |cof F|, det F)
    std::function<double(double, double, double)> W_minors;
    std::vector<std::string> minors_used;  // recorded, not verified
};

EnergyModel make_f_model(ConvexFunctionSpec phi, ConvexFunctionSpec a, double grad_exponent = 0);
EnergyModel make_g_model(ConvexFunctionSpec phi, double grad_exponent = 0);
// Dirichlet-only smoke model: just |Df|^p.
EnergyModel make_dirichlet_model(double p = 2.0);
// Coercivity-tight polyconvex model: W = C(|F|^{n-1} + phi(det) + A(|cof|) - 1).
EnergyModel make_polyconvex_model(ConvexFunctionSpec phi, ConvexFunctionSpec a, double constant = 1.0);

struct EnergyReport {
    std::map<std::string, double> terms;
    double total = 0;
    bool feasible = true;  // all per-simplex Jacobians positive
    std::string quadrature = "per-simplex midpoint (exact for nodal PL maps)";

    std::string to_json() const;
};

EnergyReport energy(const PiecewiseAffineMap& map, const EnergyModel& model);
EnergyReport energy_G(const PiecewiseAffineMap& map, const ConvexFunctionSpec& phi);

struct CoercivityReport {
    int trials = 0;
    double max_violation = 0;          // of W >= C(|F|^{n-1}+phi(det)+A(|cof|)-1)
    int violations = 0;
    int det_nonpositive_mapped = 0;    // flipped-determinant probes answered with infinity
    bool infinite_on_nonpositive = true;
};

CoercivityReport coercivity_check(const std::function<double(const Mat&)>& w, double constant,
                                  const ConvexFunctionSpec& phi, const ConvexFunctionSpec& a, int dim,
                                  int trials, uint64_t seed);

struct MinimizeOptions {
    int max_iter = 500;
    double tol = 1e-10;   // relative energy decrease
    double step0 = 1e-2;
    uint64_t seed = 0;
    int inv_balls = 0;    // check_inv on this many sampled balls afterwards
    int inv_samples = 400;
};

struct MinimizeResult {
    PiecewiseAffineMap final_map;
    std::vector<double> energy_trace;
    int iterations = 0;
    int backtracks = 0;
    double jac_min = 0;
    double gradient_norm = 0;
    std::vector<InvReport> inv_reports;
};

// Projected gradient descent on the interior nodal values with Armijo
// backtracking; steps producing a nonpositive Jacobian anywhere are
// rejected, so the phi-barrier is respected exactly. Boundary nodes never
// move.
MinimizeResult minimize(const EnergyModel& model, const PiecewiseAffineMap& f0, const MinimizeOptions& opts);

// Central finite differences on sampled interior nodal coordinates against
// the analytic gradient; returns the max relative error.
double gradient_check(const EnergyModel& model, const PiecewiseAffineMap& map, int samples, double h_fd,
                      uint64_t seed = 0);

// Nodal energy gradient (zero rows on boundary vertices).
std::vector<Vec> energy_gradient(const PiecewiseAffineMap& map, const EnergyModel& model,
                                 const std::vector<char>& is_boundary);

std::vector<char> boundary_vertex_mask(const SimplicialMesh& mesh);

}  // namespace weaklim
