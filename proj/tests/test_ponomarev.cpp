#include <doctest.h>

#include "weaklim/ponomarev.hpp"
#include "weaklim/rng.hpp"

using namespace weaklim;

namespace {

CantorSchemeParams params2d(int levels) {
    CantorSchemeParams p;
    p.alpha = 0.4;
    p.n = 2;
    p.levels = levels;
    return p;
}

}  // namespace

TEST_CASE("admissibility bound of alpha") {
    CantorSchemeParams p;
    p.alpha = 0.4;
    p.n = 3;
    p.p_exponent = 2.0;
    p.beta = 2.0;
    CHECK(p.admissible_bound() == doctest::Approx(0.75));  // min{3/2, 3/4}
    CHECK(p.alpha_admissible());
    p.alpha = 0.8;
    CHECK_FALSE(p.alpha_admissible());
}

TEST_CASE("boundary and grid-line values are exactly the identity") {
    PonomarevMap map(params2d(2));
    // domain boundary
    for (double t : {0.0, 0.25, 0.5, 0.8, 1.0}) {
        for (Vec x : {Vec::of2(t, 0.0), Vec::of2(t, 1.0), Vec::of2(0.0, t), Vec::of2(1.0, t)}) {
            Vec y = map.evaluate(x);
            CHECK(y[0] == x[0]);
            CHECK(y[1] == x[1]);
        }
    }
    // level-1 quadrant skeleton (the line x = 1/2)
    for (double t : {0.1, 0.3, 0.7}) {
        Vec y = map.evaluate(Vec::of2(0.5, t));
        CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(y[1] == doctest::Approx(t).epsilon(1e-14));
    }
    // tiled copies keep the identity on the outer boundary
    for (int m : {2, 3}) {
        Vec y = map.evaluate_tiled(m, Vec::of2(0.0, 0.37));
        CHECK(y[0] == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(y[1] == doctest::Approx(0.37).epsilon(1e-14));
    }
}

TEST_CASE("map is continuous across frame interfaces") {
    PonomarevMap map(params2d(3));
    Rng rng(3);
    // sample pairs of nearby points and check a uniform modulus
    for (int trial = 0; trial < 2000; ++trial) {
        Vec x = Vec::of2(rng.next_double(), rng.next_double());
        Vec dx = Vec::of2(1e-9 * (2 * rng.next_double() - 1), 1e-9 * (2 * rng.next_double() - 1));
        Vec x2 = x + dx;
        if (x2[0] < 0 || x2[0] > 1 || x2[1] < 0 || x2[1] > 1) continue;
        Vec y1 = map.evaluate(x);
        Vec y2 = map.evaluate(x2);
        CHECK((y1 - y2).norm() <= 1e-5);  // the scale factors stay modest at K=3
    }
}

TEST_CASE("gradient matches finite differences away from cone interfaces") {
    PonomarevMap map(params2d(3));
    Rng rng(5);
    int tested = 0;
    const double h = 1e-7;
    for (int trial = 0; trial < 2000 && tested < 100; ++trial) {
        Vec x = Vec::of2(0.02 + 0.96 * rng.next_double(), 0.02 + 0.96 * rng.next_double());
        PonomarevMap::Probe pr = map.probe(x);
        // skip shell interfaces (the frame level changes nearby) and the
        // sup-norm diagonal cone (the two coordinates tie), where only
        // one-sided derivatives exist
        bool near_interface = std::abs(std::abs(pr.rel[0]) - std::abs(pr.rel[1])) < 1e-4;
        for (double dx : {-4 * h, 4 * h})
            for (int d = 0; d < 2; ++d) {
                Vec xs = x;
                xs[d] += dx;
                PonomarevMap::Probe ps = map.probe(xs);
                if (ps.level != pr.level || ps.in_frame != pr.in_frame) near_interface = true;
            }
        if (near_interface) continue;
        ++tested;
        Mat fd(2);
        for (int d = 0; d < 2; ++d) {
            Vec xp = x, xm = x;
            xp[d] += h;
            xm[d] -= h;
            Vec yp = map.evaluate(xp), ym = map.evaluate(xm);
            for (int i = 0; i < 2; ++i) fd.a[i][d] = (yp[i] - ym[i]) / (2 * h);
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(std::abs(fd.a[i][j] - pr.gradient.a[i][j]) <= 1e-5 * (1.0 + pr.gradient.max_abs()));
    }
    CHECK(tested >= 50);
}

TEST_CASE("all probed Jacobians are positive (homeomorphism check)") {
    for (int n : {2, 3}) {
        CantorSchemeParams p;
        p.alpha = 0.4;
        p.n = n;
        p.levels = 3;
        PonomarevMap map(p);
        Rng rng(7);
        for (int trial = 0; trial < 3000; ++trial) {
            Vec x(n);
            for (int d = 0; d < n; ++d) x[d] = rng.next_double();
            CHECK(det(map.gradient(x)) > 0);
        }
    }
}

TEST_CASE("Cantor measures follow the product formula and the gap telescopes") {
    CantorSchemeParams p;
    p.alpha = 0.4;
    p.n = 3;
    p.levels = 5;
    PonomarevMap map(p);
    // source: (c a_K)^n -> 0; target: (c' b_K)^n decreasing with positive limit
    double prev_src = 1e9, prev_tgt = 1e9;
    for (int k = 1; k <= p.levels; ++k) {
        double src = map.source_cantor_measure(k);
        double tgt = map.target_cantor_measure(k);
        double src_expect = std::pow(p.source_shrink * p.a(k), p.n);
        double tgt_expect = std::pow(p.target_shrink * p.b(k), p.n);
        CHECK(src == doctest::Approx(src_expect).epsilon(1e-12));
        CHECK(tgt == doctest::Approx(tgt_expect).epsilon(1e-12));
        CHECK(src < prev_src);
        CHECK(tgt < prev_tgt);
        prev_src = src;
        prev_tgt = tgt;
    }
    CHECK(map.target_cantor_measure(p.levels) > std::pow(p.target_shrink, p.n) * 0.9);
    // exact frame integral telescopes to 1 - |C_B^K|
    CHECK(map.jacobian_integral_exact(1) ==
          doctest::Approx(1.0 - map.target_cantor_measure(p.levels)).epsilon(1e-12));
}

TEST_CASE("PL sample keeps positive Jacobians and the boundary identity") {
    CantorSchemeParams p = params2d(2);
    PonomarevMap map(p);
    PiecewiseAffineMap pl = map.sample_pl(1 << (p.levels + 2));
    CHECK(pl.min_jacobian() > 0);
    const SimplicialMesh& mesh = pl.mesh();
    for (const Facet& f : mesh.boundary_facets)
        for (int i = 0; i < 2; ++i) {
            const Vec& x = mesh.vertices[f.v[i]];
            const Vec& y = pl.nodal_values()[f.v[i]];
            CHECK(y[0] == x[0]);  // bitwise identity on the domain boundary
            CHECK(y[1] == x[1]);
        }
    CHECK_THROWS_AS(map.sample_pl(17, 2), Error);  // resolution not divisible by m
}

TEST_CASE("tiled energies equal the base energy to floating accuracy") {
    CantorSchemeParams p = params2d(2);
    p.levels = 3;
    PonomarevMap map(p);
    ConvexFunctionSpec a_spec = make_builtin(BuiltinConvex::PowerA, 2.0);
    ConvexFunctionSpec phi = make_builtin(BuiltinConvex::PhiIdentityish);
    PonomarevEnergyReport e1 = energy_of_ponomarev(map, 2.0, a_spec, phi, 64, 1);
    for (int m : {2, 3}) {
        PonomarevEnergyReport em = energy_of_ponomarev(map, 2.0, a_spec, phi, 64, m);
        CHECK(std::abs(em.grad_term - e1.grad_term) <= 1e-9 * e1.grad_term);
        CHECK(std::abs(em.cof_term - e1.cof_term) <= 1e-9 * e1.cof_term);
        CHECK(std::abs(em.phi_term - e1.phi_term) <= 1e-9 * e1.phi_term);
    }
    CHECK_THROWS_AS(energy_of_ponomarev(map, 2.0, a_spec, phi, 8, 1), Error);  // too coarse
}

TEST_CASE("observed |Dg|^p series ratio stabilizes across K") {
    ConvexFunctionSpec a_spec = make_builtin(BuiltinConvex::PowerA, 2.0);
    ConvexFunctionSpec phi = make_builtin(BuiltinConvex::PhiIdentityish);
    std::vector<double> ratios;
    for (int K : {3, 4, 5}) {
        CantorSchemeParams p;
        p.alpha = 0.4;
        p.n = 3;
        p.levels = K;
        PonomarevMap map(p);
        PonomarevEnergyReport rep = energy_of_ponomarev(map, 2.0, a_spec, phi, 1 << (K + 2), 1);
        CHECK(std::isfinite(rep.observed_ratio));
        CHECK(rep.grad_term > 0);
        CHECK(rep.phi_term > 0);
        ratios.push_back(rep.observed_ratio);
    }
    // partial sums of both series converge, so the ratio settles
    CHECK(std::abs(ratios[2] - ratios[1]) <= 0.2 * std::abs(ratios[1]));
}

TEST_CASE("lsc gap experiment: scaling exactness and the gap") {
    CantorSchemeParams p = params2d(3);
    LscGapReport rep = lsc_gap_experiment(p, {1, 2, 3}, 32);
    REQUIRE(rep.jacobian_integrals.size() == 3);
    for (double j : rep.jacobian_integrals)
        CHECK(std::abs(j - rep.jacobian_integrals[0]) <= 1e-9 * rep.jacobian_integrals[0]);
    CHECK(std::abs(rep.jacobian_integrals[0] - rep.truncated_value) <= 1e-6);
    CHECK(rep.limit_value == 1.0);
    CHECK(rep.gap > 0.0);
    CHECK(rep.gap == doctest::Approx(rep.cantor_target_measure).epsilon(1e-9));
    // the PL-mesh quadrature route (complement of the residual cubes) lands
    // near the exact value; region quantization dominates the error
    CHECK(std::abs(rep.jacobian_integrals_pl[0] - rep.truncated_value) < 0.1);
}

TEST_CASE("cavity map: values, jacobian integral, homeomorphism failure is local") {
    PiecewiseAffineMap cavity = build_cavity_map(2, 64);
    // nodal radii in (1, 2] away from the apex
    int apex = -1;
    for (int v = 0; v < cavity.mesh().vertex_count(); ++v) {
        double r = cavity.nodal_values()[v].norm();
        if (cavity.mesh().vertices[v].norm() < 1e-6) {
            apex = v;
            continue;
        }
        CHECK(r > 1.0);
        CHECK(r <= 2.0 + 1e-12);
    }
    REQUIRE(apex >= 0);
    CHECK(cavity.nodal_values()[apex][0] == 1.0);
    CHECK(cavity.nodal_values()[apex][1] == 0.0);

    // quadrature of the analytic Jacobian -> annulus area 3 pi
    double ac = 0;
    for (int s = 0; s < cavity.mesh().simplex_count(); ++s) {
        Vec c = cavity.mesh().simplex_centroid(s);
        ac += cavity_analytic_jacobian(2, c) * cavity.mesh().simplex_volume_at(s);
    }
    CHECK(std::abs(ac - 3 * M_PI) / (3 * M_PI) < 0.02);

    // the PL route carries the cavity mass on top of the annulus
    double pl = cavity.integrate_jacobian();
    CHECK(std::abs(pl - 4 * M_PI) / (4 * M_PI) < 0.02);
}
