#include "weaklim/energy.hpp"

#include <cmath>
#include <sstream>

#include "weaklim/rng.hpp"

namespace weaklim {

EnergyModel make_f_model(ConvexFunctionSpec phi, ConvexFunctionSpec a, double grad_exponent) {
    EnergyModel m;
    m.kind = EnergyKind::FModel;
    m.phi = std::move(phi);
    m.A = std::move(a);
    m.grad_exponent = grad_exponent;
    return m;
}

EnergyModel make_g_model(ConvexFunctionSpec phi, double grad_exponent) {
    EnergyModel m;
    m.kind = EnergyKind::GModel;
    m.phi = std::move(phi);
    m.grad_exponent = grad_exponent;
    return m;
}

EnergyModel make_dirichlet_model(double p) {
    EnergyModel m;
    m.kind = EnergyKind::FModel;
    m.grad_exponent = p;
    return m;
}

EnergyModel make_polyconvex_model(ConvexFunctionSpec phi, ConvexFunctionSpec a, double constant) {
    EnergyModel m;
    m.kind = EnergyKind::EPolyconvex;
    m.phi = phi;
    m.A = a;
    m.coercivity_constant = constant;
    m.minors_used = {"F", "cof F", "det F"};
    auto phi_c = std::make_shared<ConvexFunctionSpec>(std::move(phi));
    auto a_c = std::make_shared<ConvexFunctionSpec>(std::move(a));
    // first argument is |F|^{n-1}, already raised by the caller
    m.W_minors = [phi_c, a_c, constant](double pow_f, double norm_cof, double det_f) {
        if (det_f <= 0) return std::numeric_limits<double>::infinity();
        return constant * (pow_f + phi_c->evaluator(det_f) + a_c->evaluator(norm_cof) - 1.0);
    };
    m.W = [phi_c, a_c, constant](const Mat& f) {
        double det_f = det(f);
        if (det_f <= 0) return std::numeric_limits<double>::infinity();
        Mat cof = cofactor_matrix(f);
        return constant *
               (std::pow(f.frobenius(), f.n - 1.0) + phi_c->evaluator(det_f) + a_c->evaluator(cof.frobenius()) - 1.0);
    };
    return m;
}

namespace {

double grad_exponent_of(const EnergyModel& model, int n) {
    return model.grad_exponent > 0 ? model.grad_exponent : double(n - 1);
}

}  // namespace

std::string EnergyReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"feasible\":" << (feasible ? "true" : "false") << ",\"terms\":{";
    bool first = true;
    for (const auto& [k, v] : terms) {
        os << (first ? "" : ",") << "\"" << k << "\":" << v;
        first = false;
    }
    os << "},";
    if (feasible)
        os << "\"total\":" << total << ",";
    else
        os << "\"total\":\"infeasible\",";
    os << "\"quadrature\":\"" << quadrature << "\"}";
    return os.str();
}

EnergyReport energy(const PiecewiseAffineMap& map, const EnergyModel& model) {
    const SimplicialMesh& mesh = map.mesh();
    const int n = mesh.dim;
    const double p = grad_exponent_of(model, n);
    EnergyReport rep;
    double grad_term = 0, a_term = 0, phi_term = 0, dist_term = 0, w_term = 0;
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        double vol = mesh.simplex_volume_at(s);
        Mat f = map.simplex_gradient(s);
        double jf = det(f);
        if (jf <= 0) rep.feasible = false;
        switch (model.kind) {
            case EnergyKind::FModel: {
                grad_term += std::pow(f.frobenius(), p) * vol;
                if (model.A) a_term += model.A->evaluator(cofactor_matrix(f).frobenius()) * vol;
                if (model.phi && rep.feasible) phi_term += model.phi->evaluator(jf) * vol;
                break;
            }
            case EnergyKind::GModel: {
                grad_term += std::pow(f.frobenius(), p) * vol;
                if (rep.feasible) {
                    phi_term += model.phi->evaluator(jf) * vol;
                    dist_term += std::pow(std::pow(f.frobenius(), n) / jf, 1.0 / (n - 1.0)) * vol;
                }
                break;
            }
            case EnergyKind::EPolyconvex: {
                if (rep.feasible) w_term += model.W(f) * vol;
                break;
            }
        }
        if (!rep.feasible) break;
    }
    if (model.kind == EnergyKind::EPolyconvex) {
        rep.terms["W"] = w_term;
    } else {
        rep.terms["grad"] = grad_term;
        if (model.kind == EnergyKind::GModel) rep.terms["distortion"] = dist_term;
        if (model.A) rep.terms["cof"] = a_term;
        if (model.phi) rep.terms["phi"] = phi_term;
    }
    if (!rep.feasible) {
        rep.total = std::numeric_limits<double>::infinity();
        return rep;
    }
    for (const auto& [k, v] : rep.terms) rep.total += v;
    return rep;
}

EnergyReport energy_G(const PiecewiseAffineMap& map, const ConvexFunctionSpec& phi) {
    return energy(map, make_g_model(phi));
}

CoercivityReport coercivity_check(const std::function<double(const Mat&)>& w, double constant,
                                  const ConvexFunctionSpec& phi, const ConvexFunctionSpec& a, int dim,
                                  int trials, uint64_t seed) {
    if (trials < 1) fail_invalid("coercivity_check: trials must be >= 1");
    CoercivityReport rep;
    rep.trials = trials;
    Rng rng(seed ^ 0x636f657263ULL);
    for (int t = 0; t < trials; ++t) {
        // random positive-determinant matrix: orthogonal x diagonal x
        // orthogonal with det forced positive
        Mat f(dim);
        for (;;) {
            Mat g(dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) g.a[i][j] = 2.0 * rng.next_double() - 1.0;
            // Gram-Schmidt
            bool ok = true;
            for (int j = 0; j < dim && ok; ++j) {
                Vec c = g.col(j);
                for (int k = 0; k < j; ++k) c -= g.col(k).dot(c) * g.col(k);
                double len = c.norm();
                if (len < 1e-6) ok = false;
                else g.set_col(j, c * (1.0 / len));
            }
            if (!ok) continue;
            Mat d(dim);
            for (int i = 0; i < dim; ++i) d.a[i][i] = std::exp(rng.uniform(-2.0, 2.0));
            f = g.mul(d);
            if (det(f) < 0) {
                Vec c0 = f.col(0);
                f.set_col(0, c0 * -1.0);
            }
            if (det(f) > 1e-9) break;
        }
        double rhs = constant * (std::pow(f.frobenius(), dim - 1.0) + phi.evaluator(det(f)) +
                                 a.evaluator(cofactor_matrix(f).frobenius()) - 1.0);
        double lhs = w(f);
        double viol = rhs - lhs;
        if (viol > 1e-12 * (1.0 + std::abs(rhs))) {
            ++rep.violations;
            rep.max_violation = std::max(rep.max_violation, viol);
        }
        // flipped determinant must map to infinity
        Mat flipped = f;
        Vec c0 = flipped.col(0);
        flipped.set_col(0, c0 * -1.0);
        double w_neg = w(flipped);
        if (std::isinf(w_neg) && w_neg > 0)
            ++rep.det_nonpositive_mapped;
        else
            rep.infinite_on_nonpositive = false;
    }
    return rep;
}

std::vector<char> boundary_vertex_mask(const SimplicialMesh& mesh) {
    std::vector<char> mask(mesh.vertex_count(), 0);
    for (const Facet& f : mesh.boundary_facets)
        for (int i = 0; i < mesh.dim; ++i) mask[f.v[i]] = 1;
    return mask;
}

std::vector<Vec> energy_gradient(const PiecewiseAffineMap& map, const EnergyModel& model,
                                 const std::vector<char>& is_boundary) {
    const SimplicialMesh& mesh = map.mesh();
    const int n = mesh.dim;
    const double p = grad_exponent_of(model, n);
    std::vector<Vec> grad(mesh.vertex_count(), Vec(n));

    for (int s = 0; s < mesh.simplex_count(); ++s) {
        const auto& simp = mesh.simplices[s];
        Mat ref(n);
        for (int j = 0; j < n; ++j) ref.set_col(j, mesh.vertices[simp[j + 1]] - mesh.vertices[simp[0]]);
        Mat ref_inv = inverse(ref);
        Mat img(n);
        for (int j = 0; j < n; ++j) img.set_col(j, map.nodal_values()[simp[j + 1]] - map.nodal_values()[simp[0]]);
        Mat f = img.mul(ref_inv);
        double vol = mesh.simplex_volume_at(s);
        double jf = det(f);
        double nf = f.frobenius();
        Mat cof = cofactor_matrix(f);

        // dE/dF for this simplex
        Mat dF(n);
        switch (model.kind) {
            case EnergyKind::FModel: {
                if (nf > 0) dF += f * (p * std::pow(nf, p - 2.0));
                if (model.phi) dF += cof * model.phi->d(jf);
                if (model.A) {
                    double nc = cof.frobenius();
                    if (nc > 0) {
                        Mat dir = cof * (model.A->d(nc) / nc);
                        dF += cofactor_directional(f, dir);
                    }
                }
                break;
            }
            case EnergyKind::GModel: {
                if (nf > 0) dF += f * (p * std::pow(nf, p - 2.0));
                dF += cof * model.phi->d(jf);
                // distortion (|F|^n / J)^{1/(n-1)}
                double e = 1.0 / (n - 1.0);
                double base = std::pow(nf, n) / jf;
                double val = std::pow(base, e);
                if (nf > 0) {
                    dF += f * (val * e * n / (nf * nf));
                    dF += cof * (-val * e / jf);
                }
                break;
            }
            case EnergyKind::EPolyconvex: {
                // entrywise finite differences on W
                const double h = 1e-6 * (1.0 + f.max_abs());
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        Mat fp = f, fm = f;
                        fp.a[i][j] += h;
                        fm.a[i][j] -= h;
                        dF.a[i][j] = (model.W(fp) - model.W(fm)) / (2.0 * h);
                    }
                break;
            }
        }

        // chain rule: F = Y ref_inv, so dE/dY = dE/dF ref_inv^T, column j of
        // Y is y_{j+1} - y_0
        Mat dY = dF.mul(ref_inv.transposed());
        for (int j = 0; j < n; ++j) {
            Vec col(n);
            for (int i = 0; i < n; ++i) col[i] = dY.a[i][j] * vol;
            int vj = simp[j + 1];
            if (!is_boundary[vj]) grad[vj] += col;
            if (!is_boundary[simp[0]]) grad[simp[0]] -= col;
        }
    }
    return grad;
}

MinimizeResult minimize(const EnergyModel& model, const PiecewiseAffineMap& f0, const MinimizeOptions& opts) {
    const SimplicialMesh& mesh = f0.mesh();
    std::vector<char> boundary = boundary_vertex_mask(mesh);

    EnergyReport rep0 = energy(f0, model);
    if (!rep0.feasible) fail_invalid("minimize: infeasible initial guess (nonpositive Jacobian)");

    PiecewiseAffineMap cur = f0;
    MinimizeResult result{f0, {}, 0, 0, 0, 0, {}};
    result.energy_trace.push_back(rep0.total);

    double e_cur = rep0.total;
    double step = opts.step0;
    for (int it = 0; it < opts.max_iter; ++it) {
        std::vector<Vec> g = energy_gradient(cur, model, boundary);
        double gnorm2 = 0;
        for (const Vec& v : g) gnorm2 += v.norm2();
        result.gradient_norm = std::sqrt(gnorm2);
        if (gnorm2 == 0) break;

        double s = step;
        bool accepted = false;
        while (s >= 1e-14) {
            std::vector<Vec> trial = cur.nodal_values();
            for (size_t v = 0; v < trial.size(); ++v) trial[v] -= s * g[v];
            PiecewiseAffineMap cand(cur.mesh_ptr(), std::move(trial), cur.label());
            EnergyReport rep = energy(cand, model);
            // the Jacobian-positivity barrier: infeasible steps are rejected
            if (rep.feasible && rep.total <= e_cur - 1e-4 * s * gnorm2) {
                double decrease = (e_cur - rep.total) / (1.0 + std::abs(e_cur));
                cur = std::move(cand);
                e_cur = rep.total;
                result.energy_trace.push_back(e_cur);
                accepted = true;
                step = s * 2.0;
                ++result.iterations;
                if (decrease < opts.tol) it = opts.max_iter;  // converged
                break;
            }
            s *= 0.5;
            ++result.backtracks;
        }
        if (!accepted) {
            // a stalled search with a tiny gradient is convergence, with a
            // large one a genuine failure
            if (std::sqrt(gnorm2) * opts.step0 > 1e-6 * (1.0 + std::abs(e_cur)) && result.iterations == 0)
                fail_numeric("minimize: line search stalled (step below 1e-14)");
            break;
        }
    }

    result.final_map = cur;
    result.jac_min = cur.min_jacobian();

    if (opts.inv_balls > 0) {
        Rng rng(opts.seed ^ 0x6d696e62616c6cULL);
        Box box = mesh.bounding_box();
        const int n = mesh.dim;
        for (int b = 0; b < opts.inv_balls; ++b) {
            Vec c(n);
            for (int d = 0; d < n; ++d) c[d] = box.lo[d] + (0.3 + 0.4 * rng.next_double()) * (box.hi[d] - box.lo[d]);
            double max_r = 1e9;
            for (int d = 0; d < n; ++d) max_r = std::min({max_r, c[d] - box.lo[d], box.hi[d] - c[d]});
            BallSpec ball{c, 0.8 * max_r};
            InvOptions io;
            io.sample_count = opts.inv_samples;
            io.seed = rng.next_u64();
            result.inv_reports.push_back(check_inv(result.final_map, ball, io));
        }
    }
    return result;
}

double gradient_check(const EnergyModel& model, const PiecewiseAffineMap& map, int samples, double h_fd,
                      uint64_t seed) {
    if (h_fd < 1e-7 || h_fd > 1e-4) fail_invalid("gradient_check: h_fd must lie in [1e-7, 1e-4]");
    const SimplicialMesh& mesh = map.mesh();
    std::vector<char> boundary = boundary_vertex_mask(mesh);
    std::vector<int> interior;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (!boundary[v]) interior.push_back(v);
    if (interior.empty()) fail_invalid("gradient_check: no interior vertices");

    std::vector<Vec> g = energy_gradient(map, model, boundary);
    double gscale = 0;
    for (const Vec& v : g) gscale = std::max(gscale, v.norm_inf());

    Rng rng(seed ^ 0x67726164666400ULL);
    double max_rel = 0;
    for (int s = 0; s < samples; ++s) {
        int v = interior[rng.next_u64() % interior.size()];
        int d = static_cast<int>(rng.next_u64() % mesh.dim);
        std::vector<Vec> vals = map.nodal_values();
        vals[v][d] += h_fd;
        PiecewiseAffineMap up(map.mesh_ptr(), vals, map.label());
        vals[v][d] -= 2.0 * h_fd;
        PiecewiseAffineMap down(map.mesh_ptr(), std::move(vals), map.label());
        EnergyReport ru = energy(up, model);
        EnergyReport rd = energy(down, model);
        if (!ru.feasible || !rd.feasible) continue;  // barrier edge, skip
        double fd = (ru.total - rd.total) / (2.0 * h_fd);
        double rel = std::abs(fd - g[v][d]) / std::max(1.0, gscale);
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

}  // namespace weaklim
