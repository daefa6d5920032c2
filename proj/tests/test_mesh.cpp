#include <doctest.h>

#include <cstdio>

#include "weaklim/mesh.hpp"
#include "weaklim/pl_map.hpp"
#include "weaklim/rng.hpp"

using namespace weaklim;

TEST_CASE("box mesh counts: one square, one cube") {
    SimplicialMesh m2 = build_box_mesh(2, 1);
    CHECK(m2.vertex_count() == 4);
    CHECK(m2.simplex_count() == 2);
    SimplicialMesh m3 = build_box_mesh(3, 1);
    CHECK(m3.vertex_count() == 8);
    CHECK(m3.simplex_count() == 6);
}

TEST_CASE("box mesh is a partition of unity") {
    for (int n : {2, 3}) {
        SimplicialMesh mesh = build_box_mesh(n, 4);
        double total = 0;
        for (int s = 0; s < mesh.simplex_count(); ++s) {
            double v = mesh.simplex_volume_at(s);
            CHECK(v > 0);  // positive reference volume for every simplex
            total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
    SimplicialMesh m4 = build_box_mesh(4, 2);
    CHECK(std::abs(m4.total_volume() - 1.0) <= 1e-12);
    CHECK(m4.simplex_count() == 16 * 24);
}

TEST_CASE("discrete divergence theorem on the box boundary is exact for affine fields") {
    Rng rng(5);
    for (int n : {2, 3}) {
        SimplicialMesh mesh = build_box_mesh(n, 3);
        // u(y) = M y + b, div u = tr M
        Mat m(n);
        Vec b(n);
        for (int i = 0; i < n; ++i) {
            b[i] = rng.uniform(-1, 1);
            for (int j = 0; j < n; ++j) m.a[i][j] = rng.uniform(-1, 1);
        }
        double trace = 0;
        for (int i = 0; i < n; ++i) trace += m.a[i][i];
        double flux = 0;
        for (int f = 0; f < mesh.facet_count(); ++f) {
            Vec c = mesh.facet_centroid(f);
            flux += (m.apply(c) + b).dot(mesh.facet_area_vector(f));
        }
        CHECK(flux == doctest::Approx(trace).epsilon(1e-12));
    }
}

TEST_CASE("circle mesh perimeter converges") {
    SimplicialMesh circle = build_sphere_mesh(2, Vec::of2(0.3, -0.1), 2.0, 6);
    CHECK(circle.facet_count() == 4 << 6);
    double perimeter = circle.total_facet_measure();
    CHECK(std::abs(perimeter - 2 * M_PI * 2.0) / (2 * M_PI * 2.0) < 0.01);
}

TEST_CASE("octahedron base and sphere flux oracle") {
    SimplicialMesh oct = build_sphere_mesh(3, Vec(3), 1.5, 0);
    CHECK(oct.facet_count() == 8);
    CHECK(oct.vertex_count() == 6);

    // total outward flux of u(y) = y/n equals the enclosed volume within 1%
    // at refinement 5
    SimplicialMesh sphere = build_sphere_mesh(3, Vec(3), 1.0, 5);
    double flux = 0;
    for (int f = 0; f < sphere.facet_count(); ++f)
        flux += sphere.facet_centroid(f).dot(sphere.facet_area_vector(f)) / 3.0;
    double ball = 4.0 / 3.0 * M_PI;
    CHECK(std::abs(flux - ball) / ball < 0.01);
}

TEST_CASE("16-cell sphere in four dimensions") {
    SimplicialMesh s4 = build_sphere_mesh(4, Vec(4), 1.0, 1);
    CHECK(s4.facet_count() == 16 * 8);
    // flux of y/4 measures the enclosed polytope volume: positive,
    // below the ball volume, and growing with refinement
    auto flux_of = [](const SimplicialMesh& s) {
        double flux = 0;
        for (int f = 0; f < s.facet_count(); ++f)
            flux += s.facet_centroid(f).dot(s.facet_area_vector(f)) / 4.0;
        return flux;
    };
    double ball = M_PI * M_PI / 2.0;
    double f0 = flux_of(build_sphere_mesh(4, Vec(4), 1.0, 0));
    double f1 = flux_of(s4);
    double f2 = flux_of(build_sphere_mesh(4, Vec(4), 1.0, 2));
    CHECK(f0 > 0);
    CHECK(f1 > f0);
    CHECK(f2 > f1);
    CHECK(f2 < ball);
}

TEST_CASE("mesh text format round trip") {
    SimplicialMesh mesh = build_box_mesh(2, 3);
    std::string path = "test_mesh_roundtrip.txt";
    save_mesh(mesh, path);
    SimplicialMesh back = load_mesh(path);
    CHECK(back.dim == mesh.dim);
    CHECK(back.vertex_count() == mesh.vertex_count());
    CHECK(back.simplex_count() == mesh.simplex_count());
    CHECK(back.facet_count() == mesh.facet_count());
    for (int i = 0; i < mesh.vertex_count(); ++i)
        for (int d = 0; d < 2; ++d) CHECK(back.vertices[i][d] == mesh.vertices[i][d]);
    std::remove(path.c_str());
}

TEST_CASE("evaluate: identity, vertices, affine exactness") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 4));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    Vec p = Vec::of2(0.37, 0.61);
    Vec q = id.evaluate(p);
    CHECK(q[0] == doctest::Approx(p[0]).epsilon(1e-14));
    CHECK(q[1] == doctest::Approx(p[1]).epsilon(1e-14));

    // nodal value at a vertex
    PiecewiseAffineMap f = PiecewiseAffineMap::from_function(
        mesh, [](const Vec& x) { return Vec::of2(x[0] + 1, 2 * x[1]); }, "affine");
    Vec at_vertex = f.evaluate(mesh->vertices[7]);
    CHECK(at_vertex[0] == f.nodal_values()[7][0]);
    CHECK(at_vertex[1] == f.nodal_values()[7][1]);

    // exact for affine data: f(x) = Mx + b
    Mat m(2);
    m.a[0][0] = 1.5;
    m.a[0][1] = -0.25;
    m.a[1][0] = 0.5;
    m.a[1][1] = 2.0;
    Vec b = Vec::of2(0.1, -0.2);
    PiecewiseAffineMap g = PiecewiseAffineMap::from_function(
        mesh, [&](const Vec& x) { return m.apply(x) + b; }, "Mx+b");
    Vec x = Vec::of2(0.43, 0.17);
    Vec expect = m.apply(x) + b;
    Vec got = g.evaluate(x);
    CHECK(got[0] == doctest::Approx(expect[0]).epsilon(1e-13));
    CHECK(got[1] == doctest::Approx(expect[1]).epsilon(1e-13));

    CHECK_THROWS_AS(id.evaluate(Vec::of2(1.5, 0.5)), Error);
}

TEST_CASE("derivative: identity, diagonal, random adjugate identity") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 2));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    DerivativeSample d0 = id.derivative(0);
    CHECK(d0.jacobian == doctest::Approx(1.0));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(d0.gradient.a[i][j] == doctest::Approx(i == j ? 1.0 : 0.0));
            CHECK(d0.cofactor.a[i][j] == doctest::Approx(i == j ? 1.0 : 0.0));
        }

    PiecewiseAffineMap diag = PiecewiseAffineMap::from_function(
        mesh, [](const Vec& x) { return Vec::of2(2 * x[0], 3 * x[1]); }, "diag23");
    DerivativeSample dd = diag.derivative(1);
    CHECK(dd.jacobian == doctest::Approx(6.0));
    CHECK(dd.cofactor.a[0][0] == doctest::Approx(3.0));
    CHECK(dd.cofactor.a[1][1] == doctest::Approx(2.0));

    auto mesh3 = std::make_shared<SimplicialMesh>(build_box_mesh(3, 2));
    Rng rng(31);
    PiecewiseAffineMap rnd = PiecewiseAffineMap::from_function(
        mesh3,
        [&](const Vec& x) {
            Vec v = x;
            for (int d = 0; d < 3; ++d) v[d] += 0.1 * std::sin(3 * x[(d + 1) % 3]);
            return v;
        },
        "wavy");
    for (int s = 0; s < rnd.mesh().simplex_count(); s += 7) {
        DerivativeSample ds = rnd.derivative(s);
        Mat prod = ds.gradient.mul(ds.cofactor.transposed());
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double expect = (i == j) ? ds.jacobian : 0.0;
                CHECK(std::abs(prod.a[i][j] - expect) <= 1e-10 * (1.0 + std::abs(ds.jacobian)));
            }
    }
}

TEST_CASE("integrate_jacobian: identity, affine, empty region") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 4));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    CHECK(id.integrate_jacobian() == doctest::Approx(1.0).epsilon(1e-12));

    Mat m(2);
    m.a[0][0] = 2.0;
    m.a[0][1] = 1.0;
    m.a[1][0] = 0.0;
    m.a[1][1] = 1.5;
    PiecewiseAffineMap f = PiecewiseAffineMap::from_function(
        mesh, [&](const Vec& x) { return m.apply(x); }, "affine");
    CHECK(f.integrate_jacobian() == doctest::Approx(det(m)).epsilon(1e-12));

    double nothing = id.integrate_jacobian([](const Vec&) { return false; });
    CHECK(nothing == 0.0);
}

TEST_CASE("locator agrees with brute force on a deformed mesh") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 8));
    SimplexLocator loc(*mesh);
    Rng rng(77);
    std::vector<double> lambda;
    for (int t = 0; t < 200; ++t) {
        Vec p = Vec::of2(rng.next_double(), rng.next_double());
        int s = loc.locate(p, lambda);
        REQUIRE(s >= 0);
        // containing simplex: all barycentric coordinates nonnegative
        for (double l : lambda) CHECK(l >= -1e-12);
    }
}
