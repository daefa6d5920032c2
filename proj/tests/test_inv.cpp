#include <doctest.h>

#include "weaklim/fixtures.hpp"
#include "weaklim/inv.hpp"
#include "weaklim/ponomarev.hpp"
#include "weaklim/rng.hpp"

using namespace weaklim;

TEST_CASE("identity map passes check_inv for every sampled radius") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 32));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    InvOptions opts;
    opts.sample_count = 400;
    opts.seed = 1;
    auto reports = check_inv_radii(id, Vec::of2(0.5, 0.5), 0.4, 8, opts);
    CHECK(reports.size() == 8);
    for (const auto& r : reports) {
        CHECK(r.passed());
        CHECK(r.inside_samples > 0);
        CHECK(r.outside_samples > 0);
    }
}

TEST_CASE("cavity map satisfies (INV) on interior balls") {
    PiecewiseAffineMap cavity = build_cavity_map(2, 64);
    InvOptions opts;
    opts.sample_count = 500;
    opts.seed = 2;
    InvReport rep = check_inv(cavity, BallSpec{Vec(2), 0.7}, opts);
    CHECK(rep.passed());
}

TEST_CASE("bubble-escape fixture is caught") {
    PiecewiseAffineMap bubble = make_bubble_escape_map(2, 32, Vec::of2(0.5, 0.5), 0.08, Vec::of2(1.0, 1.0));
    InvOptions opts;
    opts.sample_count = 2000;
    opts.seed = 3;
    InvReport rep = check_inv(bubble, BallSpec{Vec::of2(0.5, 0.5), 0.3}, opts);
    CHECK(rep.inside_violations >= 1);
    CHECK_FALSE(rep.violation_points.empty());
}

TEST_CASE("PL homeomorphisms with positive Jacobians pass check_inv") {
    for (uint64_t seed : {10u, 11u, 12u}) {
        PiecewiseAffineMap homeo = make_random_pl_homeomorphism(2, 16, 0.3, seed);
        REQUIRE(homeo.min_jacobian() > 0);
        InvOptions opts;
        opts.sample_count = 300;
        opts.seed = seed;
        InvReport rep = check_inv(homeo, BallSpec{Vec::of2(0.5, 0.5), 0.3}, opts);
        CHECK(rep.passed());
    }
}

TEST_CASE("symdiff of a map with its own reference field is tiny") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 32));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    BallSpec ball{Vec::of2(0.5, 0.5), 0.25};
    DegreeField ref = topological_image(id, ball, {192, -1, 7});
    double sd = symdiff_measure(id, ball, ref, 192);
    double cellvol = ref.cell_volume();
    // a few boundary cells at most
    CHECK(sd <= 3.0 * cellvol * ref.nonzero_cells().boundary_cell_count());
    CHECK(sd <= 0.05 * ref.nonzero_measure());
    CHECK_THROWS_AS(symdiff_measure(id, ball, ref, 64), Error);
}

TEST_CASE("symdiff of a translated disk matches the lens formula") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 48));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    BallSpec ball{Vec::of2(0.5, 0.5), 0.25};
    // reference grid wide enough to hold the translated image as well
    Box grid{Vec::of2(0.1, 0.1), Vec::of2(1.0, 0.9)};
    PiecewiseAffineMap surf = sphere_restriction(id, ball, 7);
    DegreeField ref = degree_field(surf, grid, 256);
    Vec shift = Vec::of2(0.1, 0.0);
    PiecewiseAffineMap trans = PiecewiseAffineMap::from_function(
        mesh, [&](const Vec& x) { return x + shift; }, "translate");
    double sd = symdiff_measure(trans, ball, ref, 256);
    // two disks radius R at distance d: overlap = 2R^2 acos(d/2R) - d/2 sqrt(4R^2-d^2)
    double R = 0.25, d = 0.1;
    double overlap = 2 * R * R * std::acos(d / (2 * R)) - 0.5 * d * std::sqrt(4 * R * R - d * d);
    double lens = 2 * (M_PI * R * R - overlap);
    CHECK(std::abs(sd - lens) / lens < 0.10);
}

TEST_CASE("symdiff decreases along a uniformly converging family") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 32));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    BallSpec ball{Vec::of2(0.5, 0.5), 0.3};
    DegreeField ref = topological_image(id, ball, {192, -1, 7});
    double prev = 1e9;
    for (int m : {1, 4, 16, 64, 256}) {
        PiecewiseAffineMap fm = make_converging_map(2, 32, m);
        double sd = symdiff_measure(fm, ball, ref, 192);
        CHECK(sd <= prev + 1e-3);
        prev = sd;
    }
    CHECK(prev <= 0.01 * ref.nonzero_measure());
}

TEST_CASE("lusin probe: identity stays on the diagonal") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 32));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    // shrinking centered boxes
    std::vector<std::vector<int>> subsets;
    for (double side : {0.5, 0.25, 0.125, 0.0625}) {
        std::vector<int> subset;
        for (int s = 0; s < mesh->simplex_count(); ++s) {
            Vec c = mesh->simplex_centroid(s);
            if (std::abs(c[0] - 0.5) < side / 2 && std::abs(c[1] - 0.5) < side / 2) subset.push_back(s);
        }
        subsets.push_back(subset);
    }
    ModuliCurve curve = lusin_n_probe({&id}, subsets, 512);
    CHECK_FALSE(curve.flag_raised);
    for (const auto& [src, img] : curve.pairs) {
        CHECK(img == doctest::Approx(src).epsilon(0.12));
    }
}

TEST_CASE("lusin probe flags the Ponomarev truncations") {
    // alpha near the n/p bound makes the source measures collapse within a
    // few levels, which is what the probe is built to see
    CantorSchemeParams prm;
    prm.alpha = 0.9;
    prm.n = 2;
    prm.levels = 4;
    PonomarevMap pono(prm);
    const int resolution = 2 << (prm.levels + 2);  // finer than the frames
    PiecewiseAffineMap pl = pono.sample_pl(resolution);
    std::vector<std::vector<int>> subsets;
    std::vector<double> expected_src, expected_img;
    for (int k = 1; k <= prm.levels; ++k) {
        subsets.push_back(pono.cantor_simplices(pl.mesh(), k));
        expected_src.push_back(pono.source_cantor_measure(k));
        expected_img.push_back(pono.target_cantor_measure(k));
    }
    ModuliCurve curve = lusin_n_probe({&pl}, subsets, 512);
    CHECK(curve.flag_raised);  // source shrinks, image measure stays positive
    for (size_t k = 0; k < curve.pairs.size(); ++k) {
        CHECK(curve.pairs[k].first == doctest::Approx(expected_src[k]).epsilon(0.3));
        CHECK(curve.pairs[k].second == doctest::Approx(expected_img[k]).epsilon(0.3));
    }
    // the image measure approaches |C_B| which stays bounded below
    CHECK(curve.pairs.back().second > 0.5 * expected_img.back());
}

TEST_CASE("lusin probe: bi-Lipschitz image/source ratio is bounded") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 32));
    PiecewiseAffineMap f = make_shear_map(2, 32, 0.2);
    double l = 0, linv = 0;  // Lipschitz constants of f and its inverse
    for (int s = 0; s < mesh->simplex_count(); ++s) {
        Mat g = f.simplex_gradient(s);
        l = std::max(l, g.frobenius());
        linv = std::max(linv, cofactor_matrix(g).frobenius() / det(g));
    }
    std::vector<std::vector<int>> subsets;
    for (double side : {0.4, 0.2, 0.1}) {
        std::vector<int> subset;
        for (int s = 0; s < f.mesh().simplex_count(); ++s) {
            Vec c = f.mesh().simplex_centroid(s);
            if (std::abs(c[0] - 0.5) < side / 2 && std::abs(c[1] - 0.5) < side / 2) subset.push_back(s);
        }
        subsets.push_back(subset);
    }
    ModuliCurve curve = lusin_n_probe({&f}, subsets, 512);
    for (const auto& [src, img] : curve.pairs) {
        double ratio = img / src;
        CHECK(ratio <= l * l + 0.2);
        CHECK(ratio >= 1.0 / (linv * linv) - 0.2);
    }
    CHECK_THROWS_AS(lusin_n_probe({&f}, {}, 64), Error);
}

TEST_CASE("inverse residuals: identity, affine pair, sampled inverse") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 8));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    ResidualReport self = inverse_residual(id, id, 500, 4);
    CHECK(self.max <= 1e-12);

    PiecewiseAffineMap f = PiecewiseAffineMap::from_function(
        mesh, [](const Vec& x) { return x * 2.0; }, "double");
    auto tmesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 8));
    {
        auto scaled = std::make_shared<SimplicialMesh>(*tmesh);
        for (Vec& v : scaled->vertices) v *= 2.0;
        tmesh = scaled;
    }
    PiecewiseAffineMap h = PiecewiseAffineMap::from_function(
        tmesh, [](const Vec& y) { return y * 0.5; }, "half");
    ResidualReport affine = inverse_residual(f, h, 2000, 5);
    CHECK(affine.max <= 1e-10);

    PiecewiseAffineMap homeo = make_random_pl_homeomorphism(2, 12, 0.3, 77);
    PiecewiseAffineMap inv = make_sampled_inverse(homeo, 24);
    ResidualReport r = inverse_residual(homeo, inv, 2000, 6);
    CHECK(r.max <= 2.0 * inv.max_edge_length());
    // residual symmetry on the bi-Lipschitz fixture
    ResidualReport r2 = inverse_residual(inv, homeo, 2000, 7);
    CHECK(r2.max <= 2.0 * (2.0 * homeo.max_edge_length()));
}
