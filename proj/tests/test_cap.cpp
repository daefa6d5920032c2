#include <doctest.h>

#include "weaklim/cap.hpp"
#include "weaklim/rng.hpp"

using namespace weaklim;

namespace {

CapProblem sample_cap(int refinement, double radius, const std::function<Vec(const Vec&)>& data_fn, double p) {
    auto sphere = std::make_shared<SimplicialMesh>(build_sphere_mesh(3, Vec(3), 1.0, refinement));
    std::vector<Vec> data(sphere->vertex_count());
    for (int v = 0; v < sphere->vertex_count(); ++v) data[v] = data_fn(sphere->vertices[v]);
    return build_geodesic_cap(sphere, 0, radius, data, p);
}

}  // namespace

TEST_CASE("constant boundary data gives a constant solution with zero energy") {
    Vec c = Vec::of3(0.3, -0.7, 0.1);
    CapProblem prob = sample_cap(3, 0.8, [&](const Vec&) { return c; }, 2.0);
    CapSolution sol = solve_cap(prob);
    for (const Vec& v : sol.nodal_values)
        for (int d = 0; d < 3; ++d) CHECK(v[d] == doctest::Approx(c[d]).epsilon(1e-10));
    CHECK(sol.energy_total <= 1e-12);
    OscillationResult osc = oscillation_check(sol, prob);
    CHECK(osc.lhs <= 1e-9);
    CHECK(osc.pass);
}

namespace {

// planar disk embedded in R^3: affine functions are exactly discrete
// harmonic there
CapProblem flat_cap(int resolution, const std::function<Vec(const Vec&)>& data_fn, double p) {
    SimplicialMesh grid = build_box_mesh(2, resolution);
    auto cap = std::make_shared<SimplicialMesh>();
    cap->dim = 3;
    for (const Vec& v : grid.vertices) cap->vertices.push_back(Vec::of3(v[0], v[1], 0.0));
    for (const auto& s : grid.simplices) {
        Facet f;
        for (int i = 0; i < 3; ++i) f.v[i] = s[i];
        f.sign = 1;
        cap->boundary_facets.push_back(f);
    }
    CapProblem prob;
    prob.cap = cap;
    prob.p = p;
    std::vector<char> ring(cap->vertex_count(), 0);
    for (const Facet& f : grid.boundary_facets)
        for (int i = 0; i < 2; ++i) ring[f.v[i]] = 1;
    for (int v = 0; v < cap->vertex_count(); ++v)
        if (ring[v]) {
            prob.ring_vertices.push_back(v);
            prob.boundary_values.push_back(data_fn(cap->vertices[v]));
        }
    return prob;
}

}  // namespace

TEST_CASE("affine boundary data solves to the affine restriction at p=2 on a flat cap") {
    Mat m = Mat::identity(3);
    m.a[0][1] = 0.4;
    m.a[2][0] = -0.2;
    auto affine = [&](const Vec& x) { return m.apply(x) + Vec::of3(0.1, 0, -0.3); };
    CapProblem prob = flat_cap(8, affine, 2.0);
    CapSolution sol = solve_cap(prob, 1e-13, 50);
    for (int v = 0; v < prob.cap->vertex_count(); ++v) {
        Vec expect = affine(prob.cap->vertices[v]);
        for (int d = 0; d < 3; ++d) CHECK(std::abs(sol.nodal_values[v][d] - expect[d]) <= 1e-8);
    }
    for (size_t i = 0; i < prob.ring_vertices.size(); ++i) {
        const Vec& got = sol.nodal_values[prob.ring_vertices[i]];
        for (int d = 0; d < 3; ++d) CHECK(got[d] == prob.boundary_values[i][d]);  // bitwise
    }
}

TEST_CASE("oscillation bound and maximum principle on random data") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        CapProblem prob = sample_cap(3, 0.8,
                                     [&](const Vec&) {
                                         return Vec::of3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                                         rng.uniform(-1, 1));
                                     },
                                     2.0);
        CapSolution sol = solve_cap(prob, 1e-12, 50);
        OscillationResult osc = oscillation_check(sol, prob);
        CHECK(osc.pass);
        // per-coordinate maximum principle at p=2
        for (int d = 0; d < 3; ++d) {
            double lo = 1e9, hi = -1e9;
            for (const Vec& bv : prob.boundary_values) {
                lo = std::min(lo, bv[d]);
                hi = std::max(hi, bv[d]);
            }
            for (const Vec& v : sol.nodal_values) {
                CHECK(v[d] >= lo - 1e-9);
                CHECK(v[d] <= hi + 1e-9);
            }
        }
    }
}

TEST_CASE("Dirichlet principle: solution beats perturbed competitors, p=2 and p=3") {
    Rng rng(43);
    for (double p : {2.0, 3.0}) {
        CapProblem prob = sample_cap(3, 0.8,
                                     [&](const Vec& x) {
                                         return Vec::of3(x[0] + 0.3 * rng.next_double(), x[1], x[2] * x[0]);
                                     },
                                     p);
        CapSolution sol = solve_cap(prob, 1e-12, 400);
        double base = cap_energy(prob, sol.nodal_values);
        for (int comp = 0; comp < 20; ++comp) {
            std::vector<Vec> trial = sol.nodal_values;
            std::vector<char> ring(prob.cap->vertex_count(), 0);
            for (int rv : prob.ring_vertices) ring[rv] = 1;
            for (int v = 0; v < prob.cap->vertex_count(); ++v) {
                if (ring[v]) continue;
                for (int d = 0; d < 3; ++d) trial[v][d] += 0.03 * (2 * rng.next_double() - 1);
            }
            CHECK(cap_energy(prob, trial) >= base - 1e-9);
        }
    }
}

TEST_CASE("p below 1.5 is rejected") {
    CapProblem prob = sample_cap(2, 0.8, [](const Vec& x) { return x; }, 1.0);
    CHECK_THROWS_AS(solve_cap(prob), Error);
}

TEST_CASE("cap cover partitions the sphere and replacement lowers energy") {
    auto sphere = std::make_shared<SimplicialMesh>(build_sphere_mesh(3, Vec(3), 1.0, 6));
    CapCover cover = build_cap_cover(*sphere, 0.035);
    std::vector<char> seen(sphere->vertex_count(), 0);
    for (const auto& set : cover.parts)
        for (int v : set) {
            CHECK_FALSE(seen[v]);  // disjoint
            seen[v] = 1;
        }
    for (char s : seen) CHECK(s);  // covering

    // high-oscillation input: noisy identity
    Rng rng(47);
    std::vector<Vec> vals = sphere->vertices;
    for (Vec& v : vals)
        for (int d = 0; d < 3; ++d) v[d] += 0.005 * (2 * rng.next_double() - 1);
    PiecewiseAffineMap noisy(sphere, std::move(vals), "noisy_sphere");

    ReplaceReport report;
    PiecewiseAffineMap replaced = replace_on_caps(noisy, cover, 2.0, &report);
    REQUIRE(report.caps > 0);
    REQUIRE_FALSE(report.cap_energy_after.empty());
    int strictly_smaller = 0;
    for (size_t j = 0; j < report.cap_energy_after.size(); ++j) {
        CHECK(report.cap_energy_after[j] <= report.cap_energy_before[j] + 1e-9);
        if (report.cap_energy_after[j] < report.cap_energy_before[j] - 1e-12) ++strictly_smaller;
    }
    CHECK(strictly_smaller > 0);  // the noise is not cap-wise harmonic

    // fixed point: seams pin the data, so a second pass reproduces the map
    ReplaceReport second;
    PiecewiseAffineMap again = replace_on_caps(replaced, cover, 2.0, &second);
    double drift = 0;
    for (int v = 0; v < sphere->vertex_count(); ++v)
        drift = std::max(drift, (again.nodal_values()[v] - replaced.nodal_values()[v]).norm());
    CHECK(drift <= 1e-12);

    // identity input moves only by the discrete flattening of curved caps,
    // which is quadratic in the cap size
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(sphere);
    PiecewiseAffineMap id_replaced = replace_on_caps(id, cover, 2.0);
    double dmax = 0;
    for (int v = 0; v < sphere->vertex_count(); ++v)
        dmax = std::max(dmax, (id_replaced.nodal_values()[v] - id.nodal_values()[v]).norm());
    CHECK(dmax <= 2.0 * cover.cap_radius * cover.cap_radius);

    // oversized caps violate the diam < r/(4n) precondition
    CapCover big = build_cap_cover(*sphere, 0.5);
    CHECK_THROWS_AS(replace_on_caps(noisy, big, 2.0), Error);
}
