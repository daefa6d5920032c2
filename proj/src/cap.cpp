#include "weaklim/cap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace weaklim {

namespace {

constexpr double kGradEps = 1e-10;

// P1 basis gradients of one surface element, as vectors in the ambient
// space tangent to the element plane.
struct ElementGeometry {
    std::vector<Vec> basis_grad;  // dim entries (= vertex count of the facet)
    double area = 0;
};

ElementGeometry element_geometry(const SimplicialMesh& cap, const Facet& fac) {
    const int n = cap.dim;          // ambient
    const int k = n - 1;            // element dimension
    ElementGeometry geo;
    Mat gram(k);
    std::vector<Vec> edges(k);
    for (int j = 0; j < k; ++j) edges[j] = cap.vertices[fac.v[j + 1]] - cap.vertices[fac.v[0]];
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) gram.a[i][j] = edges[i].dot(edges[j]);
    double g = det(gram);
    if (g <= 0) fail_numeric("cap: degenerate surface element");
    geo.area = std::sqrt(g) / factorial(k);
    Mat ginv = inverse(gram);
    geo.basis_grad.assign(n, Vec(n));
    for (int j = 0; j < k; ++j) {
        Vec gj(n);
        for (int i = 0; i < k; ++i) gj += ginv.a[i][j] * edges[i];
        geo.basis_grad[j + 1] = gj;
        geo.basis_grad[0] -= gj;
    }
    return geo;
}

struct ScalarProblem {
    const SimplicialMesh& cap;
    const std::vector<ElementGeometry>& geo;
    const std::vector<int>& dof;        // -1 for Dirichlet vertices, else dof index
    const std::vector<int>& dof_to_vertex;
};

// Conjugate gradient on the weighted stiffness; the matrix is applied
// element-wise, no explicit assembly needed at these sizes.
std::vector<double> solve_weighted(const ScalarProblem& sp, const std::vector<double>& weights,
                                   const std::vector<double>& fixed_values) {
    const int unknowns = static_cast<int>(sp.dof_to_vertex.size());
    std::vector<double> u(sp.cap.vertex_count());
    for (int v = 0; v < sp.cap.vertex_count(); ++v) u[v] = fixed_values[v];

    auto apply = [&](const std::vector<double>& x, std::vector<double>& out, bool with_fixed) {
        std::fill(out.begin(), out.end(), 0.0);
        std::vector<double> full(sp.cap.vertex_count(), 0.0);
        for (int d = 0; d < unknowns; ++d) full[sp.dof_to_vertex[d]] = x[d];
        if (with_fixed)
            for (int v = 0; v < sp.cap.vertex_count(); ++v)
                if (sp.dof[v] < 0) full[v] = fixed_values[v];
        const int n = sp.cap.dim;
        for (int e = 0; e < sp.cap.facet_count(); ++e) {
            const Facet& fac = sp.cap.boundary_facets[e];
            const ElementGeometry& g = sp.geo[e];
            Vec grad(n);
            for (int i = 0; i < n; ++i) grad += full[fac.v[i]] * g.basis_grad[i];
            double w = weights[e] * g.area;
            for (int i = 0; i < n; ++i) {
                int v = fac.v[i];
                if (sp.dof[v] < 0) continue;
                out[sp.dof[v]] += w * grad.dot(g.basis_grad[i]);
            }
        }
    };

    // rhs = -K * (dirichlet extension), unknowns zeroed
    std::vector<double> rhs(unknowns, 0.0), zero(unknowns, 0.0);
    apply(zero, rhs, true);
    for (double& r : rhs) r = -r;

    std::vector<double> x(unknowns, 0.0), r = rhs, p = rhs, kp(unknowns);
    double rr = 0;
    for (double v : r) rr += v * v;
    double rr0 = rr;
    const int max_cg = 20 * std::max(unknowns, 1) + 100;
    for (int it = 0; it < max_cg && rr > 1e-28 * (1.0 + rr0); ++it) {
        apply(p, kp, false);
        double pkp = 0;
        for (int i = 0; i < unknowns; ++i) pkp += p[i] * kp[i];
        if (pkp <= 0) break;
        double alpha = rr / pkp;
        for (int i = 0; i < unknowns; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * kp[i];
        }
        double rr_new = 0;
        for (double v : r) rr_new += v * v;
        double beta = rr_new / rr;
        rr = rr_new;
        for (int i = 0; i < unknowns; ++i) p[i] = r[i] + beta * p[i];
    }
    for (int d = 0; d < unknowns; ++d) u[sp.dof_to_vertex[d]] = x[d];
    return u;
}

}  // namespace

double cap_energy_scalar(const SimplicialMesh& cap, const std::vector<double>& u, double p) {
    double energy = 0;
    for (int e = 0; e < cap.facet_count(); ++e) {
        const Facet& fac = cap.boundary_facets[e];
        ElementGeometry g = element_geometry(cap, fac);
        Vec grad(cap.dim);
        for (int i = 0; i < cap.dim; ++i) grad += u[fac.v[i]] * g.basis_grad[i];
        energy += std::pow(grad.norm2() + kGradEps * kGradEps, p / 2.0) * g.area;
    }
    return energy;
}

double cap_energy(const CapProblem& problem, const std::vector<Vec>& nodal_values) {
    double total = 0;
    std::vector<double> u(problem.cap->vertex_count());
    for (int c = 0; c < problem.cap->dim; ++c) {
        for (int v = 0; v < problem.cap->vertex_count(); ++v) u[v] = nodal_values[v][c];
        total += cap_energy_scalar(*problem.cap, u, problem.p);
    }
    return total;
}

CapSolution solve_cap(const CapProblem& problem, double tol, int max_iter) {
    const SimplicialMesh& cap = *problem.cap;
    const int n = cap.dim;
    if (problem.p < 1.5) fail_invalid("solve_cap: p must be >= 1.5");
    if (problem.ring_vertices.size() != problem.boundary_values.size())
        fail_invalid("solve_cap: ring and boundary data sizes differ");
    if (cap.facet_count() == 0) fail_invalid("solve_cap: cap has no elements");

    std::vector<ElementGeometry> geo(cap.facet_count());
    for (int e = 0; e < cap.facet_count(); ++e) geo[e] = element_geometry(cap, cap.boundary_facets[e]);

    std::vector<int> dof(cap.vertex_count(), 0);
    for (int rv : problem.ring_vertices) dof[rv] = -1;
    std::vector<int> dof_to_vertex;
    for (int v = 0; v < cap.vertex_count(); ++v)
        if (dof[v] >= 0) {
            dof[v] = static_cast<int>(dof_to_vertex.size());
            dof_to_vertex.push_back(v);
        }
    ScalarProblem sp{cap, geo, dof, dof_to_vertex};

    CapSolution sol;
    sol.nodal_values.assign(cap.vertex_count(), Vec(n));
    sol.energy_per_coordinate.assign(n, 0.0);

    for (int c = 0; c < n; ++c) {
        std::vector<double> fixed(cap.vertex_count(), 0.0);
        double mean = 0;
        for (size_t i = 0; i < problem.ring_vertices.size(); ++i) mean += problem.boundary_values[i][c];
        if (!problem.ring_vertices.empty()) mean /= problem.ring_vertices.size();
        for (double& f : fixed) f = mean;  // start from the ring average
        for (size_t i = 0; i < problem.ring_vertices.size(); ++i)
            fixed[problem.ring_vertices[i]] = problem.boundary_values[i][c];

        std::vector<double> u = fixed;
        std::vector<double> weights(cap.facet_count(), 1.0);
        double energy = cap_energy_scalar(cap, u, problem.p);
        int it = 0;
        double rel = 0;
        bool converged = false;
        const double damping = problem.p <= 2.0 ? 1.0 : 0.7;
        while (it < max_iter) {
            if (problem.p != 2.0) {
                for (int e = 0; e < cap.facet_count(); ++e) {
                    const Facet& fac = cap.boundary_facets[e];
                    Vec grad(n);
                    for (int i = 0; i < n; ++i) grad += u[fac.v[i]] * geo[e].basis_grad[i];
                    weights[e] = std::pow(grad.norm2() + kGradEps * kGradEps, (problem.p - 2.0) / 2.0);
                }
            }
            std::vector<double> next = solve_weighted(sp, weights, fixed);
            // keep Dirichlet values bitwise
            for (size_t i = 0; i < problem.ring_vertices.size(); ++i)
                next[problem.ring_vertices[i]] = problem.boundary_values[i][c];
            if (damping < 1.0)
                for (int v = 0; v < cap.vertex_count(); ++v)
                    if (dof[v] >= 0) next[v] = (1.0 - damping) * u[v] + damping * next[v];
            double next_energy = cap_energy_scalar(cap, next, problem.p);
            rel = std::abs(energy - next_energy) / (1.0 + std::abs(energy));
            u = std::move(next);
            energy = next_energy;
            ++it;
            // at p=2 the second (identical) solve certifies the fixed point
            if (it >= 2 && rel < tol) {
                converged = true;
                break;
            }
        }
        if (!converged) fail_numeric("solve_cap: no convergence within max_iter");
        for (int v = 0; v < cap.vertex_count(); ++v) sol.nodal_values[v][c] = u[v];
        sol.energy_per_coordinate[c] = energy;
        sol.energy_total += energy;
        sol.iterations = std::max(sol.iterations, it);
        sol.residual = std::max(sol.residual, rel);
    }
    // ring values bitwise equal to the prescribed data
    for (size_t i = 0; i < problem.ring_vertices.size(); ++i)
        sol.nodal_values[problem.ring_vertices[i]] = problem.boundary_values[i];
    return sol;
}

OscillationResult oscillation_check(const CapSolution& solution, const CapProblem& problem) {
    OscillationResult res;
    for (size_t i = 0; i < solution.nodal_values.size(); ++i)
        for (size_t j = i + 1; j < solution.nodal_values.size(); ++j)
            res.lhs = std::max(res.lhs, (solution.nodal_values[i] - solution.nodal_values[j]).norm());
    double diam_ring = 0;
    for (size_t i = 0; i < problem.boundary_values.size(); ++i)
        for (size_t j = i + 1; j < problem.boundary_values.size(); ++j)
            diam_ring = std::max(diam_ring, (problem.boundary_values[i] - problem.boundary_values[j]).norm());
    res.rhs = std::sqrt(double(problem.cap->dim)) * diam_ring;
    res.pass = res.lhs <= res.rhs + 1e-9;
    return res;
}

CapProblem build_geodesic_cap(std::shared_ptr<const SimplicialMesh> sphere, int center_vertex,
                              double cap_radius, const std::vector<Vec>& data, double p) {
    const SimplicialMesh& s = *sphere;
    const int n = s.dim;
    const Vec& c = s.vertices.at(center_vertex);
    std::vector<char> in_cap(s.vertex_count(), 0);
    for (int v = 0; v < s.vertex_count(); ++v) in_cap[v] = (s.vertices[v] - c).norm() <= cap_radius;

    auto mesh = std::make_shared<SimplicialMesh>();
    mesh->dim = n;
    std::vector<int> old_to_new(s.vertex_count(), -1);
    std::vector<int> new_to_old;
    for (int e = 0; e < s.facet_count(); ++e) {
        const Facet& fac = s.boundary_facets[e];
        bool all_in = true;
        for (int i = 0; i < n; ++i) all_in = all_in && in_cap[fac.v[i]];
        if (!all_in) continue;
        Facet nf = fac;
        for (int i = 0; i < n; ++i) {
            int ov = fac.v[i];
            if (old_to_new[ov] < 0) {
                old_to_new[ov] = mesh->vertex_count();
                mesh->vertices.push_back(s.vertices[ov]);
                new_to_old.push_back(ov);
            }
            nf.v[i] = old_to_new[ov];
        }
        mesh->boundary_facets.push_back(nf);
    }
    if (mesh->facet_count() == 0) fail_invalid("build_geodesic_cap: empty cap");
    // ring vertices: cap vertices incident to an element not in the cap
    std::vector<char> is_ring(mesh->vertex_count(), 0);
    for (int e = 0; e < s.facet_count(); ++e) {
        const Facet& fac = s.boundary_facets[e];
        bool all_in = true;
        for (int i = 0; i < n; ++i) all_in = all_in && in_cap[fac.v[i]];
        if (all_in) continue;
        for (int i = 0; i < n; ++i)
            if (in_cap[fac.v[i]] && old_to_new[fac.v[i]] >= 0) is_ring[old_to_new[fac.v[i]]] = 1;
    }
    CapProblem prob;
    prob.cap = mesh;
    prob.p = p;
    for (int v = 0; v < mesh->vertex_count(); ++v)
        if (is_ring[v]) prob.ring_vertices.push_back(v);
    for (int rv : prob.ring_vertices) prob.boundary_values.push_back(data.at(new_to_old[rv]));
    if (prob.ring_vertices.empty()) fail_invalid("build_geodesic_cap: cap has no ring (covers the sphere)");
    return prob;
}

CapCover build_cap_cover(const SimplicialMesh& sphere, double cap_radius) {
    CapCover cover;
    cover.cap_radius = cap_radius;
    std::vector<char> assigned(sphere.vertex_count(), 0);
    for (int v = 0; v < sphere.vertex_count(); ++v) {
        if (assigned[v]) continue;
        std::vector<int> set;
        for (int w = v; w < sphere.vertex_count(); ++w) {
            if (assigned[w]) continue;
            if ((sphere.vertices[w] - sphere.vertices[v]).norm() <= cap_radius) {
                set.push_back(w);
                assigned[w] = 1;
            }
        }
        cover.centers.push_back(v);
        cover.parts.push_back(std::move(set));
    }
    return cover;
}

PiecewiseAffineMap replace_on_caps(const PiecewiseAffineMap& sphere_map, const CapCover& cover, double p,
                                   ReplaceReport* report, double tol, int max_iter) {
    const SimplicialMesh& sphere = sphere_map.mesh();
    const int n = sphere.dim;

    // precondition: every vertex covered, caps not too large relative to
    // the sphere radius
    std::vector<int> part_of(sphere.vertex_count(), -1);
    for (size_t j = 0; j < cover.parts.size(); ++j)
        for (int v : cover.parts[j]) part_of[v] = static_cast<int>(j);
    for (int v = 0; v < sphere.vertex_count(); ++v)
        if (part_of[v] < 0) fail_invalid("replace_on_caps: cover leaves uncovered vertices");
    Vec center(n);
    for (const Vec& v : sphere.vertices) center += v;
    center *= 1.0 / sphere.vertex_count();
    double radius = 0;
    for (const Vec& v : sphere.vertices) radius += (v - center).norm();
    radius /= sphere.vertex_count();
    if (2.0 * cover.cap_radius >= radius / (4.0 * n))
        fail_invalid("replace_on_caps: cap diameter exceeds r/(4n)");

    // seam vertices (a facet neighbor lies in a different part) carry the
    // Dirichlet data; interiors of different caps never share an element
    std::vector<char> is_seam(sphere.vertex_count(), 0);
    for (const Facet& f : sphere.boundary_facets)
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (part_of[f.v[i]] != part_of[f.v[j]]) {
                    is_seam[f.v[i]] = 1;
                    is_seam[f.v[j]] = 1;
                }

    std::vector<Vec> out_values = sphere_map.nodal_values();
    if (report) {
        report->caps = static_cast<int>(cover.parts.size());
        report->cap_energy_before.clear();
        report->cap_energy_after.clear();
    }

    for (const auto& part : cover.parts) {
        std::vector<char> is_interior(sphere.vertex_count(), 0);
        int interior_count = 0;
        for (int v : part)
            if (!is_seam[v]) {
                is_interior[v] = 1;
                ++interior_count;
            }
        if (interior_count == 0) continue;
        // local mesh: elements touching the interior set
        auto local = std::make_shared<SimplicialMesh>();
        local->dim = n;
        std::vector<int> old_to_new(sphere.vertex_count(), -1);
        std::vector<int> new_to_old;
        for (int e = 0; e < sphere.facet_count(); ++e) {
            const Facet& fac = sphere.boundary_facets[e];
            bool touches = false;
            for (int i = 0; i < n; ++i) touches = touches || is_interior[fac.v[i]];
            if (!touches) continue;
            Facet nf = fac;
            for (int i = 0; i < n; ++i) {
                int ov = fac.v[i];
                if (old_to_new[ov] < 0) {
                    old_to_new[ov] = local->vertex_count();
                    local->vertices.push_back(sphere.vertices[ov]);
                    new_to_old.push_back(ov);
                }
                nf.v[i] = old_to_new[ov];
            }
            local->boundary_facets.push_back(nf);
        }
        if (local->facet_count() == 0) continue;

        CapProblem prob;
        prob.cap = local;
        prob.p = p;
        for (int lv = 0; lv < local->vertex_count(); ++lv) {
            if (!is_interior[new_to_old[lv]]) {
                prob.ring_vertices.push_back(lv);
                prob.boundary_values.push_back(sphere_map.nodal_values()[new_to_old[lv]]);
            }
        }
        if (prob.ring_vertices.empty()) fail_invalid("replace_on_caps: a cap has no ring data");

        std::vector<Vec> before(local->vertex_count());
        for (int lv = 0; lv < local->vertex_count(); ++lv) before[lv] = sphere_map.nodal_values()[new_to_old[lv]];
        CapSolution sol = solve_cap(prob, tol, max_iter);
        if (report) {
            report->cap_energy_before.push_back(cap_energy(prob, before));
            report->cap_energy_after.push_back(cap_energy(prob, sol.nodal_values));
        }
        for (int lv = 0; lv < local->vertex_count(); ++lv)
            if (is_interior[new_to_old[lv]]) out_values[new_to_old[lv]] = sol.nodal_values[lv];
    }
    return PiecewiseAffineMap(sphere_map.mesh_ptr(), std::move(out_values), sphere_map.label() + "|cap-replaced");
}

}  // namespace weaklim
