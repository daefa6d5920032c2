#pragma once

#include <array>
#include <string>
#include <vector>

#include "weaklim/geometry.hpp"

namespace weaklim {

// Oriented codimension-1 element: n vertex indices plus a sign chosen so
// that  sign * generalized_cross(v1-v0, ..., v_{n-1}-v0)  points outward.
struct Facet {
    std::array<int, kMaxDim> v{};
    int sign = 1;
};

// Simplicial mesh in R^n. Volume meshes carry (n+1)-vertex simplices and
// their boundary facets; surface meshes (spheres, caps) carry facets only.
struct SimplicialMesh {
    int dim = 0;
    std::vector<Vec> vertices;
    std::vector<std::array<int, kMaxDim + 1>> simplices;
    std::vector<Facet> boundary_facets;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int simplex_count() const { return static_cast<int>(simplices.size()); }
    int facet_count() const { return static_cast<int>(boundary_facets.size()); }

    std::vector<Vec> simplex_vertices(int s) const;
    std::vector<Vec> facet_vertices(int f) const;
    double simplex_volume_at(int s) const;
    Vec simplex_centroid(int s) const;

    // Reference measure of a facet (its (n-1)-dimensional volume).
    double facet_measure(int f) const;
    // Outward-oriented area vector; |.| equals facet_measure.
    Vec facet_area_vector(int f) const;
    Vec facet_centroid(int f) const;

    double total_volume() const;
    double total_facet_measure() const;
    Box bounding_box() const;
};

// Freudenthal/Kuhn triangulation of [0,1]^n with `resolution` cells per axis;
// every cube splits into n! positively oriented simplices.
SimplicialMesh build_box_mesh(int n, int resolution);

// Simplicial approximation of the sphere around `center`: a 4*2^r-gon for
// n=2, a subdivided octahedron for n=3, a subdivided 16-cell for n=4.
// Vertices lie on the sphere; facets are oriented outward.
SimplicialMesh build_sphere_mesh(int n, const Vec& center, double radius, int refinement);

// Recomputes boundary_facets from the volume simplices (facets incident to
// exactly one simplex, oriented outward).
void rebuild_boundary(SimplicialMesh& mesh);

void save_mesh(const SimplicialMesh& mesh, const std::string& path);
SimplicialMesh load_mesh(const std::string& path);

// Uniform-bin candidate lists for point location.
class SimplexLocator {
public:
    explicit SimplexLocator(const SimplicialMesh& mesh, int bins_per_axis = 0);

    // Returns the lowest-index simplex containing p (barycentric coords
    // >= -tol), or -1. `lambda` receives the barycentric coordinates.
    int locate(const Vec& p, std::vector<double>& lambda, double tol = 1e-12) const;

private:
    const SimplicialMesh& mesh_;
    Box box_;
    int bins_ = 1;
    std::vector<std::vector<int>> cells_;

    std::size_t cell_index(const std::array<int, kMaxDim>& c) const;
};

}  // namespace weaklim
