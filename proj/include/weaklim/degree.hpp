#pragma once

#include <functional>
#include <string>

#include "weaklim/pl_map.hpp"
#include "weaklim/raster.hpp"

namespace weaklim {

struct BallSpec {
    Vec center;
    double radius = 0;
};

// Integer degree values of a boundary map over a target-domain grid.
// `near_boundary` marks cells within two cells of the boundary image; the
// degree is constant on every unmarked cell.
struct DegreeField {
    Box box;
    int resolution = 0;
    std::vector<int> values;
    std::vector<uint8_t> near_boundary;
    std::string source;

    int dim() const { return box.dim(); }
    std::size_t cell_count() const { return values.size(); }
    double cell_volume() const;
    Vec cell_center(std::size_t idx) const;
    std::size_t find_cell(const Vec& p) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    // Degree at a target point; 0 outside the grid. `skipped` reports
    // whether p fell in the near-boundary band.
    int value_at(const Vec& p, bool* skipped = nullptr) const;

    double nonzero_measure() const;
    RasterSet nonzero_cells() const;
    void to_csv(const std::string& path) const;
};

// Brouwer degree of the PL extension of a closed oriented surface map,
// computed by signed ray-crossing counts. `y` must keep distance 1e-9 from
// the image; closer points are perturbed deterministically (8 retries).
int degree_pl(const PiecewiseAffineMap& boundary_map, const Vec& y, uint64_t seed = 0);

// Independent n=2 oracle: total signed winding angle / 2 pi.
int winding_oracle_2d(const PiecewiseAffineMap& boundary_map, const Vec& y);

// Exact distance from y to the image of the boundary mesh.
double distance_to_image(const PiecewiseAffineMap& boundary_map, const Vec& y);

// Surface integral of (u o f) . (Lambda_{n-1} D_tau f) nu over the boundary
// mesh; approximates the integral of Deg(f,B,.) div u.
double weak_degree_integral(const PiecewiseAffineMap& boundary_map, const std::function<Vec(const Vec&)>& u,
                            int quad_order = 3);

// (Lambda_{n-1} D_tau f) nu on one facet (constant there).
Vec tangential_cofactor(const PiecewiseAffineMap& boundary_map, int facet_index);

// Degree of the boundary map at every cell center of the grid, computed by
// one ray sweep per grid row.
DegreeField degree_field(const PiecewiseAffineMap& boundary_map, const Box& target_box, int resolution,
                         uint64_t seed = 0);

struct TopologicalImageOptions {
    int grid_resolution = 256;
    int sphere_refinement = -1;  // -1: default per dimension
    uint64_t seed = 0;
};

// Grid proxy for im_T(f, B): cells where the degree of f restricted to the
// ball's sphere is nonzero.
DegreeField topological_image(const PiecewiseAffineMap& volume_map, const BallSpec& ball,
                              const TopologicalImageOptions& opts = {});

// Restriction of a volume map to the sphere of `ball` by nodal
// interpolation; falls back to the mesh's own boundary when the ball covers
// the whole domain.
PiecewiseAffineMap sphere_restriction(const PiecewiseAffineMap& volume_map, const BallSpec& ball,
                                      int refinement = -1);

// Distributional Jacobian  Det Df(testfn) = -int f_1 J(testfn, f_2,...,f_n);
// testfn must vanish on the domain boundary.
double distributional_jacobian(const PiecewiseAffineMap& map, const std::function<double(const Vec&)>& testfn,
                               const std::function<Vec(const Vec&)>& test_gradient, int quad_order = 3);

int default_sphere_refinement(int dim);

}  // namespace weaklim
