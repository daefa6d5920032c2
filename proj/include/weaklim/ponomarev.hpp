#pragma once

#include "weaklim/convex.hpp"
#include "weaklim/pl_map.hpp"

namespace weaklim {

// Parameters of the nested-cube scheme: source cubes shrink like
// a_k = k^-alpha (null limit set), target cubes like b_k = 1 + k^{-alpha n}
// (positive-measure limit set). The shrink factors keep every frame a
// nonempty shell; a_1 = b_0-normalization alone would collapse level 1.
struct CantorSchemeParams {
    double alpha = 0.4;
    int n = 3;
    int levels = 4;  // truncation level K
    double p_exponent = 2.0;  // recorded against the admissibility bound
    double beta = 2.0;
    double source_shrink = 0.9;
    double target_shrink = 0.45;

    double a(int k) const { return std::pow(double(k), -alpha); }
    double b(int k) const { return 1.0 + std::pow(double(k), -alpha * n); }
    double admissible_bound() const {
        return std::min(n / p_exponent, n / ((n - 1.0) * beta));
    }
    bool alpha_admissible() const { return alpha > 0 && alpha < admissible_bound(); }
};

// Homeomorphism of [0,1]^n built from sup-norm radial dilations between
// concentric cube shells; below level K the map is affine on each residual
// cube. Evaluation is exact (closed form per frame), and a nodal
// piecewise-affine sample can be produced at any resolution.
class PonomarevMap {
public:
    explicit PonomarevMap(const CantorSchemeParams& params);

    const CantorSchemeParams& params() const { return params_; }

    // Half-sides of the level-k source/target Cantor cubes (k = 0 is the
    // whole domain, half-side 1/2).
    double source_half(int k) const;
    double target_half(int k) const;
    // Scale factor of the affine map on level-k residual cubes.
    double scale(int k) const { return target_half(k) / source_half(k); }

    struct Probe {
        Vec value;
        Mat gradient;
        int level = 0;  // frame level; equals `levels` on residual cubes
        bool in_frame = false;
        Vec rel;        // offset from the containing cube center
        double rho = 0;  // sup-norm radius within the frame
    };

    Vec evaluate(const Vec& x) const;
    Mat gradient(const Vec& x) const;
    Probe probe(const Vec& x) const;

    // Tiled copy f_m: each of the m^n cells carries a scaled copy of the map.
    Vec evaluate_tiled(int m, const Vec& x) const;
    Mat gradient_tiled(int m, const Vec& x) const;

    // Measure of the union of level-K source/target Cantor cubes.
    double source_cantor_measure(int k) const;
    double target_cantor_measure(int k) const;

    // Exact integral of the Jacobian over all frames of levels 1..K (the
    // complement of the residual cubes): image volumes telescope to
    // 1 - |C_B^{(K)}|. Computed per frame for the m-tiled map.
    double jacobian_integral_exact(int m = 1) const;

    // Nodal sample of the tiled map; resolution must be divisible by m.
    PiecewiseAffineMap sample_pl(int resolution, int m = 1) const;

    // Whether x lies inside one of the level-k source Cantor cubes.
    bool in_source_cantor(const Vec& x, int k) const;

    // Simplex indices of a box mesh whose centroids lie inside the level-k
    // source Cantor cubes (the shrinking Lusin-(N) probe family).
    std::vector<int> cantor_simplices(const SimplicialMesh& mesh, int k) const;

private:
    CantorSchemeParams params_;

    struct FrameCoeffs {
        double alpha;  // lambda(rho) = (alpha rho + beta)/rho
        double beta;
        double q, h;   // outer/inner source half-sides
    };
    std::vector<FrameCoeffs> frames_;  // index k-1 for level k
};

PonomarevMap build_ponomarev(const CantorSchemeParams& params);

// m^n scaled and translated copies of the map, sampled onto a box mesh;
// identity on the outer boundary and on the tile grid lines.
PiecewiseAffineMap tile_scaled_copies(const PonomarevMap& map, int m, int resolution);

struct PonomarevEnergyReport {
    double grad_term = 0;             // integral of |Dg|^p
    double cof_term = 0;              // integral of A(|cof Dg|)
    double phi_term = 0;              // integral of phi(J_g)
    std::vector<double> grad_per_level;  // frame-level breakdown of |Dg|^p
    double series_truncated = 0;      // sum_{k<=K} k^{alpha p - n - 1}
    double observed_ratio = 0;        // grad_term / series_truncated
    int resolution = 0;
};

// Midpoint quadrature of the energy terms on an m-tiled grid with
// `resolution` cells per tile axis; requires resolution >= 2^{K+2}.
PonomarevEnergyReport energy_of_ponomarev(const PonomarevMap& map, double p, const ConvexFunctionSpec& a_spec,
                                          const ConvexFunctionSpec& phi, int resolution, int m = 1);

struct LscGapReport {
    std::vector<int> m_list;
    std::vector<double> jacobian_integrals;      // exact per-frame route
    std::vector<double> jacobian_integrals_pl;   // mesh-quadrature cross-check
    std::vector<PonomarevEnergyReport> energies;
    double truncated_value = 0;  // 1 - |C_B^{(K)}|
    double limit_value = 1.0;    // the identity limit map
    double gap = 0;
    double cantor_target_measure = 0;
};

LscGapReport lsc_gap_experiment(const CantorSchemeParams& params, const std::vector<int>& m_list,
                                int resolution);

// Radial cavitation fixture on a polytopal unit ball: nodal values
// (1+|x|) x/|x|, origin vertex sent to e_1.
PiecewiseAffineMap build_cavity_map(int n, int resolution);

// Pointwise Jacobian of the limit cavity map (the absolutely continuous
// density), for use as an independent oracle.
double cavity_analytic_jacobian(int n, const Vec& x);

}  // namespace weaklim
