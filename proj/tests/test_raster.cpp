#include <doctest.h>

#include "weaklim/fixtures.hpp"
#include "weaklim/raster.hpp"

using namespace weaklim;

namespace {

Box unit_box(int n, double lo, double hi) {
    Box b{Vec(n), Vec(n)};
    for (int d = 0; d < n; ++d) {
        b.lo[d] = lo;
        b.hi[d] = hi;
    }
    return b;
}

}  // namespace

TEST_CASE("disk isoperimetric ratio approaches 1/(2 sqrt pi)") {
    RasterSet set(unit_box(2, -1.2, 1.2), 512);
    set.add_ball(Vec(2), 1.0);
    IsoperimetricReport rep = isoperimetric_check(set);
    double expect = 1.0 / (2.0 * std::sqrt(M_PI));
    CHECK(std::abs(rep.ratio - expect) / expect < 0.05);
    CHECK(std::abs(rep.volume - M_PI) / M_PI < 0.01);
}

TEST_CASE("single cell ratio from cell geometry") {
    RasterSet set(unit_box(2, 0, 1), 16);
    set.mark(set.find_cell(Vec::of2(0.5, 0.5)));
    IsoperimetricReport rep = isoperimetric_check(set);
    double v = set.cell_volume();
    double perim = 4.0 * set.cell_side(0) * (M_PI / 4.0);
    CHECK(rep.ratio == doctest::Approx(std::sqrt(v) / perim));
}

TEST_CASE("two disjoint balls have a smaller ratio than one") {
    RasterSet one(unit_box(2, -2, 2), 512);
    one.add_ball(Vec::of2(0, 0), 0.5);
    RasterSet two(unit_box(2, -2, 2), 512);
    two.add_ball(Vec::of2(-1, 0), 0.5);
    two.add_ball(Vec::of2(1, 0), 0.5);
    CHECK(isoperimetric_check(two).ratio <= isoperimetric_check(one).ratio);
    CHECK_THROWS_AS(isoperimetric_check(RasterSet(unit_box(2, 0, 1), 8)), Error);
}

TEST_CASE("raster measure is monotone under union") {
    RasterSet a(unit_box(2, -1, 1), 64);
    a.add_ball(Vec::of2(-0.3, 0), 0.4);
    double before = a.measure();
    RasterSet b(unit_box(2, -1, 1), 64);
    b.add_ball(Vec::of2(0.3, 0), 0.4);
    a.unite(b);
    CHECK(a.measure() >= before);
    CHECK(a.measure() >= b.measure());
}

TEST_CASE("image_measure: identity, doubling, and area-formula consistency") {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(2, 8));
    PiecewiseAffineMap id = PiecewiseAffineMap::identity(mesh);
    double m_id = image_measure(id, {}, 256);
    CHECK(std::abs(m_id - 1.0) < 0.02);

    PiecewiseAffineMap dbl = PiecewiseAffineMap::from_function(
        mesh, [](const Vec& x) { return x * 2.0; }, "double");
    double m_dbl = image_measure(dbl, {}, 256);
    CHECK(std::abs(m_dbl - 4.0) / 4.0 < 0.02);

    // area-formula consistency for an injective PL map at raster 512^2
    PiecewiseAffineMap homeo = make_random_pl_homeomorphism(2, 8, 0.3, 99);
    double quad = homeo.integrate_jacobian();
    double raster = image_measure(homeo, {}, 512);
    CHECK(std::abs(quad - raster) / quad < 0.02);
}

TEST_CASE("symmetric difference of a set with itself is empty") {
    RasterSet a(unit_box(2, -1, 1), 64);
    a.add_ball(Vec(2), 0.5);
    RasterSet b = a;
    CHECK(a.symmetric_difference_measure(b) == 0.0);
}
