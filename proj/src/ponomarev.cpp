#include "weaklim/ponomarev.hpp"

#include <cmath>

#include "weaklim/parallel.hpp"

namespace weaklim {

PonomarevMap::PonomarevMap(const CantorSchemeParams& params) : params_(params) {
    if (params.levels < 1) fail_invalid("PonomarevMap: need at least one level");
    if (params.n < 2 || params.n > kMaxDim) fail_invalid("PonomarevMap: dimension must be in [2,4]");
    if (params.source_shrink <= 0 || params.source_shrink >= 1.0)
        fail_invalid("PonomarevMap: source_shrink must be in (0,1)");
    if (params.target_shrink <= 0 || params.target_shrink * params.b(1) >= 1.0)
        fail_invalid("PonomarevMap: target_shrink must satisfy c * b_1 < 1");
    if (source_half(params.levels) < 1e-280) fail_numeric("PonomarevMap: cube half-sides underflow");

    frames_.resize(params.levels);
    for (int k = 1; k <= params.levels; ++k) {
        FrameCoeffs& fc = frames_[k - 1];
        fc.q = source_half(k - 1) / 2.0;
        fc.h = source_half(k);
        double qp = target_half(k - 1) / 2.0;
        double hp = target_half(k);
        if (fc.h >= fc.q || hp >= qp) fail_numeric("PonomarevMap: empty frame shell at level " + std::to_string(k));
        fc.alpha = (qp - hp) / (fc.q - fc.h);
        fc.beta = hp - fc.alpha * fc.h;
    }
}

double PonomarevMap::source_half(int k) const {
    if (k == 0) return 0.5;
    return params_.source_shrink * params_.a(k) * std::pow(0.5, k + 1);
}

double PonomarevMap::target_half(int k) const {
    if (k == 0) return 0.5;
    return params_.target_shrink * params_.b(k) * std::pow(0.5, k + 1);
}

PonomarevMap::Probe PonomarevMap::probe(const Vec& x) const {
    const int n = params_.n;
    Probe pr;
    Vec src(n), tgt(n);
    for (int d = 0; d < n; ++d) {
        if (x[d] < -1e-12 || x[d] > 1.0 + 1e-12) fail_invalid("PonomarevMap: point outside [0,1]^n");
        src[d] = 0.5;
        tgt[d] = 0.5;
    }
    for (int k = 1; k <= params_.levels; ++k) {
        const FrameCoeffs& fc = frames_[k - 1];
        Vec child_src = src, child_tgt = tgt;
        for (int d = 0; d < n; ++d) {
            double sgn = (x[d] >= src[d]) ? 1.0 : -1.0;
            child_src[d] += sgn * fc.q;
            child_tgt[d] += sgn * (target_half(k - 1) / 2.0);
        }
        Vec rel = x - child_src;
        double rho = rel.norm_inf();
        if (rho > fc.h) {
            // frame shell: sup-norm radial dilation lambda(rho) * rel
            double lambda = (fc.alpha * rho + fc.beta) / rho;
            pr.value = child_tgt + lambda * rel;
            pr.level = k;
            pr.in_frame = true;
            pr.rel = rel;
            pr.rho = rho;
            // Dg = lambda I + lambda'(rho) rel (x) grad rho, grad rho = sign e_i*
            int imax = 0;
            for (int d = 1; d < n; ++d)
                if (std::abs(rel[d]) > std::abs(rel[imax])) imax = d;
            double lp = -fc.beta / (rho * rho);
            double s = rel[imax] >= 0 ? 1.0 : -1.0;
            pr.gradient = Mat::identity(n) * lambda;
            for (int i = 0; i < n; ++i) pr.gradient.a[i][imax] += lp * rel[i] * s;
            return pr;
        }
        src = child_src;
        tgt = child_tgt;
    }
    double sigma = scale(params_.levels);
    pr.value = tgt + sigma * (x - src);
    pr.gradient = Mat::identity(n) * sigma;
    pr.level = params_.levels;
    pr.in_frame = false;
    pr.rel = x - src;
    pr.rho = pr.rel.norm_inf();
    return pr;
}

Vec PonomarevMap::evaluate(const Vec& x) const { return probe(x).value; }
Mat PonomarevMap::gradient(const Vec& x) const { return probe(x).gradient; }

Vec PonomarevMap::evaluate_tiled(int m, const Vec& x) const {
    const int n = params_.n;
    Vec xi(n), corner(n);
    for (int d = 0; d < n; ++d) {
        int t = std::min(m - 1, std::max(0, int(std::floor(x[d] * m))));
        corner[d] = double(t) / m;
        xi[d] = std::min(1.0, std::max(0.0, m * (x[d] - corner[d])));
    }
    Vec y = evaluate(xi);
    Vec out(n);
    for (int d = 0; d < n; ++d) out[d] = corner[d] + y[d] / m;
    return out;
}

Mat PonomarevMap::gradient_tiled(int m, const Vec& x) const {
    const int n = params_.n;
    Vec xi(n);
    for (int d = 0; d < n; ++d) {
        int t = std::min(m - 1, std::max(0, int(std::floor(x[d] * m))));
        xi[d] = std::min(1.0, std::max(0.0, m * (x[d] - double(t) / m)));
    }
    return gradient(xi);  // the 1/m and m factors cancel
}

double PonomarevMap::source_cantor_measure(int k) const {
    return std::pow(2.0, k * params_.n) * std::pow(2.0 * source_half(k), params_.n);
}

double PonomarevMap::target_cantor_measure(int k) const {
    return std::pow(2.0, k * params_.n) * std::pow(2.0 * target_half(k), params_.n);
}

double PonomarevMap::jacobian_integral_exact(int m) const {
    const int n = params_.n;
    // per frame the Jacobian integral equals the image shell volume
    double per_tile = 0;
    for (int k = 1; k <= params_.levels; ++k) {
        double qp = target_half(k - 1) / 2.0;
        double hp = target_half(k);
        double shell = std::pow(2.0 * qp, n) - std::pow(2.0 * hp, n);
        per_tile += std::pow(2.0, double(k) * n) * shell;
    }
    double total = 0;
    int tiles = 1;
    for (int d = 0; d < n; ++d) tiles *= m;
    for (int t = 0; t < tiles; ++t) total += per_tile / tiles;
    return total;
}

PiecewiseAffineMap PonomarevMap::sample_pl(int resolution, int m) const {
    if (m < 1) fail_invalid("sample_pl: m must be >= 1");
    if (resolution % m != 0) fail_invalid("sample_pl: resolution not divisible by m");
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(params_.n, resolution));
    std::vector<Vec> vals(mesh->vertex_count());
    for (int i = 0; i < mesh->vertex_count(); ++i)
        vals[i] = (m == 1) ? evaluate(mesh->vertices[i]) : evaluate_tiled(m, mesh->vertices[i]);
    return PiecewiseAffineMap(std::move(mesh), std::move(vals),
                              "ponomarev_K" + std::to_string(params_.levels) + "_m" + std::to_string(m));
}

bool PonomarevMap::in_source_cantor(const Vec& x, int k) const {
    const int n = params_.n;
    Vec src(n);
    for (int d = 0; d < n; ++d) src[d] = 0.5;
    for (int lev = 1; lev <= k; ++lev) {
        const FrameCoeffs& fc = frames_[lev - 1];
        for (int d = 0; d < n; ++d) src[d] += ((x[d] >= src[d]) ? 1.0 : -1.0) * fc.q;
        if ((x - src).norm_inf() > fc.h) return false;
    }
    return true;
}

std::vector<int> PonomarevMap::cantor_simplices(const SimplicialMesh& mesh, int k) const {
    std::vector<int> out;
    for (int s = 0; s < mesh.simplex_count(); ++s)
        if (in_source_cantor(mesh.simplex_centroid(s), k)) out.push_back(s);
    return out;
}

PonomarevMap build_ponomarev(const CantorSchemeParams& params) { return PonomarevMap(params); }

PiecewiseAffineMap tile_scaled_copies(const PonomarevMap& map, int m, int resolution) {
    return map.sample_pl(resolution, m);
}

PonomarevEnergyReport energy_of_ponomarev(const PonomarevMap& map, double p, const ConvexFunctionSpec& a_spec,
                                          const ConvexFunctionSpec& phi, int resolution, int m) {
    const CantorSchemeParams& prm = map.params();
    const int n = prm.n;
    if (resolution < (1 << (prm.levels + 2)))
        fail_invalid("energy_of_ponomarev: resolution too coarse for K (need >= 2^{K+2})");

    PonomarevEnergyReport rep;
    rep.resolution = resolution;
    rep.grad_per_level.assign(prm.levels + 1, 0.0);

    std::size_t cells_per_axis = static_cast<std::size_t>(resolution);
    std::size_t per_tile = 1;
    for (int d = 0; d < n; ++d) per_tile *= cells_per_axis;
    const double cell_vol = std::pow(1.0 / resolution, n);

    int tiles = 1;
    for (int d = 0; d < n; ++d) tiles *= m;

    // one tile at a time; per-tile quadratures see the same sample values
    // up to floating error, which is what the scaling-equality check probes
    std::vector<double> grad_level(prm.levels + 1, 0.0);
    const int chunks = 64;
    for (int tile = 0; tile < tiles; ++tile) {
        Vec corner(n);
        int rem = tile;
        for (int d = 0; d < n; ++d) {
            corner[d] = double(rem % m) / m;
            rem /= m;
        }
        struct Partial {
            double grad = 0, cof = 0, phi = 0;
            std::vector<double> per_level;
        };
        std::vector<Partial> partials(chunks);
        for (auto& pp : partials) pp.per_level.assign(prm.levels + 1, 0.0);
        parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
            for (std::size_t chunk = cb; chunk < ce; ++chunk) {
                Partial& pp = partials[chunk];
                std::size_t begin = chunk * per_tile / chunks;
                std::size_t end = (chunk + 1) * per_tile / chunks;
                for (std::size_t c = begin; c < end; ++c) {
                    Vec x(n);
                    std::size_t cr = c;
                    for (int d = 0; d < n; ++d) {
                        x[d] = corner[d] + (cr % cells_per_axis + 0.5) / (double(resolution) * m);
                        cr /= cells_per_axis;
                    }
                    Vec xi(n);
                    for (int d = 0; d < n; ++d) xi[d] = (x[d] - corner[d]) * m;
                    PonomarevMap::Probe pr = map.probe(xi);
                    int lev = pr.in_frame ? pr.level : prm.levels;
                    double gterm = std::pow(pr.gradient.frobenius(), p);
                    pp.grad += gterm;
                    pp.per_level[lev] += gterm;
                    Mat cof = cofactor_matrix(pr.gradient);
                    pp.cof += a_spec.evaluator(cof.frobenius());
                    pp.phi += phi.evaluator(det(pr.gradient));
                }
            }
        });
        double scale = cell_vol / tiles;
        for (const Partial& pp : partials) {
            rep.grad_term += pp.grad * scale;
            rep.cof_term += pp.cof * scale;
            rep.phi_term += pp.phi * scale;
            for (int k = 0; k <= prm.levels; ++k) grad_level[k] += pp.per_level[k] * scale;
        }
    }
    rep.grad_per_level = grad_level;

    for (int k = 1; k <= prm.levels; ++k)
        rep.series_truncated += std::pow(double(k), prm.alpha * p - n - 1);
    rep.observed_ratio = rep.grad_term / rep.series_truncated;
    return rep;
}

LscGapReport lsc_gap_experiment(const CantorSchemeParams& params, const std::vector<int>& m_list,
                                int resolution) {
    PonomarevMap map(params);
    LscGapReport rep;
    rep.m_list = m_list;
    rep.cantor_target_measure = map.target_cantor_measure(params.levels);
    rep.truncated_value = 1.0 - rep.cantor_target_measure;
    rep.limit_value = 1.0;

    ConvexFunctionSpec a_spec = make_builtin(BuiltinConvex::PowerA, params.beta);
    ConvexFunctionSpec phi = make_builtin(BuiltinConvex::PhiIdentityish);

    for (int m : m_list) {
        if (m < 1) fail_invalid("lsc_gap_experiment: m must be >= 1");
        rep.jacobian_integrals.push_back(map.jacobian_integral_exact(m));
        int res = resolution;
        if (res % m != 0) res = (res / m + 1) * m;  // round up to a tiled grid
        PiecewiseAffineMap pl = map.sample_pl(res, m);
        // quadrature cross-check over the complement of the residual cubes
        // (the full-domain integral is exactly 1 by the boundary identity)
        const int n = params.n;
        auto outside_cantor = [&](const Vec& x) {
            Vec xi(n);
            for (int d = 0; d < n; ++d) {
                int t = std::min(m - 1, std::max(0, int(std::floor(x[d] * m))));
                xi[d] = std::min(1.0, std::max(0.0, m * (x[d] - double(t) / m)));
            }
            return !map.in_source_cantor(xi, params.levels);
        };
        rep.jacobian_integrals_pl.push_back(pl.integrate_jacobian(outside_cantor));
        rep.energies.push_back(energy_of_ponomarev(map, params.p_exponent, a_spec, phi, resolution, m));
    }
    if (!rep.jacobian_integrals.empty()) rep.gap = rep.limit_value - rep.jacobian_integrals.front();
    return rep;
}

double cavity_analytic_jacobian(int n, const Vec& x) {
    double r = x.norm();
    if (r <= 0) return 0;
    return std::pow((1.0 + r) / r, n - 1);
}

PiecewiseAffineMap build_cavity_map(int n, int resolution) {
    if (n != 2 && n != 3) fail_invalid("build_cavity_map: n must be 2 or 3");
    SimplicialMesh box = build_box_mesh(n, resolution);
    auto mesh = std::make_shared<SimplicialMesh>(std::move(box));
    // remap the cube onto a polytopal ball: u -> u |u|_inf / |u|_2
    int center_vertex = -1;
    double center_dist = 1e9;
    for (int i = 0; i < mesh->vertex_count(); ++i) {
        Vec u(n);
        for (int d = 0; d < n; ++d) u[d] = 2.0 * mesh->vertices[i][d] - 1.0;
        double ni = u.norm_inf(), n2 = u.norm();
        Vec v = (n2 > 0) ? u * (ni / n2) : u;
        mesh->vertices[i] = v;
        if (v.norm() < center_dist) {
            center_dist = v.norm();
            center_vertex = i;
        }
    }
    // keep a vertex near (not at) the origin
    if (center_dist < 1e-12) mesh->vertices[center_vertex] = Vec::axis(n, 0, 1e-9);
    std::vector<Vec> vals(mesh->vertex_count());
    for (int i = 0; i < mesh->vertex_count(); ++i) {
        const Vec& x = mesh->vertices[i];
        double r = x.norm();
        vals[i] = x * ((1.0 + r) / r);
    }
    vals[center_vertex] = Vec::axis(n, 0, 1.0);  // the cavity apex
    return PiecewiseAffineMap(mesh, std::move(vals), "cavity");
}

}  // namespace weaklim
