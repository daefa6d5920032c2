#include <doctest.h>

#include "weaklim/geometry.hpp"
#include "weaklim/quadrature.hpp"
#include "weaklim/rng.hpp"

using namespace weaklim;

namespace {

// brute-force signed minors, kept independent of cofactor_matrix
double minor_det2(const Mat& m, int r0, int r1, int c0, int c1) {
    return m.a[r0][c0] * m.a[r1][c1] - m.a[r0][c1] * m.a[r1][c0];
}

}  // namespace

TEST_CASE("determinants and cofactors, n=2..4") {
    Rng rng(7);
    for (int n = 2; n <= 4; ++n) {
        for (int trial = 0; trial < 50; ++trial) {
            Mat m(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m.a[i][j] = rng.uniform(-2, 2);
            Mat cof = cofactor_matrix(m);
            double d = det(m);
            // adjugate identity M cof(M)^T = det(M) I
            Mat prod = m.mul(cof.transposed());
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double expect = (i == j) ? d : 0.0;
                    CHECK(std::abs(prod.a[i][j] - expect) <= 1e-10 * (1.0 + std::abs(d)));
                }
        }
    }
}

TEST_CASE("cofactors of a 3x3 against brute-force minors") {
    Rng rng(11);
    Mat m(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m.a[i][j] = rng.uniform(-1, 1);
    Mat cof = cofactor_matrix(m);
    int rows[3][2] = {{1, 2}, {0, 2}, {0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            double expect = sign * minor_det2(m, rows[i][0], rows[i][1], rows[j][0], rows[j][1]);
            CHECK(cof.a[i][j] == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("cofactor directional derivative matches finite differences") {
    Rng rng(13);
    for (int n : {2, 3, 4}) {
        Mat m(n), dm(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                m.a[i][j] = rng.uniform(-1, 1);
                dm.a[i][j] = rng.uniform(-1, 1);
            }
        Mat analytic = cofactor_directional(m, dm);
        const double h = 1e-6;
        Mat up = m, down = m;
        up += dm * h;
        down += dm * (-h);
        Mat fd = cofactor_matrix(up);
        Mat cd = cofactor_matrix(down);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double approx = (fd.a[i][j] - cd.a[i][j]) / (2 * h);
                CHECK(std::abs(analytic.a[i][j] - approx) <= 1e-6);
            }
    }
}

TEST_CASE("linear solve and inverse") {
    Rng rng(17);
    for (int n = 2; n <= 4; ++n) {
        Mat m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m.a[i][j] = rng.uniform(-1, 1) + (i == j ? 2.0 : 0.0);
        Vec rhs(n);
        for (int d = 0; d < n; ++d) rhs[d] = rng.uniform(-1, 1);
        Vec x(n);
        REQUIRE(solve(m, rhs, x));
        Vec back = m.apply(x);
        for (int d = 0; d < n; ++d) CHECK(back[d] == doctest::Approx(rhs[d]).epsilon(1e-10));
        Mat inv = inverse(m);
        Mat id = m.mul(inv);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) CHECK(std::abs(id.a[i][j] - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("generalized cross product satisfies det([v|A]) = v . N") {
    Rng rng(23);
    for (int n : {2, 3, 4}) {
        std::vector<Vec> edges(n - 1, Vec(n));
        for (auto& e : edges)
            for (int d = 0; d < n; ++d) e[d] = rng.uniform(-1, 1);
        Vec nvec = generalized_cross(edges);
        for (int trial = 0; trial < 5; ++trial) {
            Vec v(n);
            for (int d = 0; d < n; ++d) v[d] = rng.uniform(-1, 1);
            Mat m(n);
            m.set_col(0, v);
            for (int j = 1; j < n; ++j) m.set_col(j, edges[j - 1]);
            CHECK(det(m) == doctest::Approx(v.dot(nvec)).epsilon(1e-10));
        }
        // orthogonality to the spanning edges
        for (const Vec& e : edges) CHECK(std::abs(nvec.dot(e)) < 1e-12);
    }
}

TEST_CASE("point-simplex distance") {
    // segment in the plane
    std::vector<Vec> seg = {Vec::of2(0, 0), Vec::of2(1, 0)};
    CHECK(point_simplex_distance(Vec::of2(0.5, 1.0), seg) == doctest::Approx(1.0));
    CHECK(point_simplex_distance(Vec::of2(2.0, 0.0), seg) == doctest::Approx(1.0));
    CHECK(point_simplex_distance(Vec::of2(0.25, 0.0), seg) == doctest::Approx(0.0));
    // triangle in 3-space
    std::vector<Vec> tri = {Vec::of3(0, 0, 0), Vec::of3(1, 0, 0), Vec::of3(0, 1, 0)};
    CHECK(point_simplex_distance(Vec::of3(0.2, 0.2, 0.5), tri) == doctest::Approx(0.5));
    CHECK(point_simplex_distance(Vec::of3(-1.0, -1.0, 0.0), tri) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("Grundmann-Moller rules integrate monomials exactly") {
    // degree-3 rule on the unit triangle: integral of x^a y^b over the
    // standard simplex is a! b! / (a+b+2)!
    auto exact2 = [](int a, int b) {
        return factorial(a) * factorial(b) / factorial(a + b + 2);
    };
    QuadratureRule rule = simplex_rule(2, 3);
    std::vector<Vec> tri = {Vec::of2(0, 0), Vec::of2(1, 0), Vec::of2(0, 1)};
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b) {
            double acc = 0;
            for (size_t q = 0; q < rule.weights.size(); ++q) {
                Vec p(2);
                for (int i = 0; i < 3; ++i) p += rule.bary[q][i] * tri[i];
                acc += rule.weights[q] * std::pow(p[0], a) * std::pow(p[1], b);
            }
            acc *= 0.5;  // triangle volume
            CHECK(acc == doctest::Approx(exact2(a, b)).epsilon(1e-12));
        }
    // tetrahedron, centroid rule integrates linears
    QuadratureRule c = simplex_rule(3, 1);
    CHECK(c.weights.size() == 1);
    CHECK(c.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("counter rng is stateless and splittable") {
    Rng a(42), b(42);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.at(100) == b.at(100));
    Rng s1 = a.split(1), s2 = a.split(2);
    CHECK(s1.next_u64() != s2.next_u64());
    double u = Rng(9).next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
}
