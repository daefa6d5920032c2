#pragma once

#include "weaklim/pl_map.hpp"

namespace weaklim {

// Coordinate-wise p-Dirichlet problem on a surface patch (topological disk):
// elements are the facets of `cap`, Dirichlet data sits on the ring.
struct CapProblem {
    std::shared_ptr<const SimplicialMesh> cap;
    std::vector<int> ring_vertices;
    std::vector<Vec> boundary_values;  // one per ring vertex, target coordinates
    double p = 2.0;                    // = n-1 in the replacement construction
};

struct CapSolution {
    std::vector<Vec> nodal_values;  // every cap vertex, ring values copied bitwise
    std::vector<double> energy_per_coordinate;
    double energy_total = 0;
    int iterations = 0;
    double residual = 0;  // relative energy change at termination
};

// Damped lagged-diffusivity iteration on the regularized Euler-Lagrange
// system (eps = 1e-10 inside the gradient norm). For p=2 this reduces to a
// single linear solve.
CapSolution solve_cap(const CapProblem& problem, double tol = 1e-10, int max_iter = 200);

// Tangential p-Dirichlet energy of given nodal values over the cap elements.
double cap_energy(const CapProblem& problem, const std::vector<Vec>& nodal_values);
double cap_energy_scalar(const SimplicialMesh& cap, const std::vector<double>& u, double p);

struct OscillationResult {
    double lhs = 0;  // diam of the solution values
    double rhs = 0;  // sqrt(n) * diam of the ring data
    bool pass = false;
};

OscillationResult oscillation_check(const CapSolution& solution, const CapProblem& problem);

// Geodesic cap around a vertex of a sphere mesh; boundary data interpolated
// from `data` at the ring vertices.
CapProblem build_geodesic_cap(std::shared_ptr<const SimplicialMesh> sphere, int center_vertex,
                              double cap_radius, const std::vector<Vec>& data, double p);

// Greedy Vitali-style partition of the sphere vertices into caps of the
// given chord radius. Vertices with a neighbor in a different part act as
// seams: they keep the input values and carry the Dirichlet data, so cap
// interiors are pairwise non-adjacent and the replacement is idempotent.
struct CapCover {
    std::vector<int> centers;
    std::vector<std::vector<int>> parts;  // disjoint, covering all vertices
    double cap_radius = 0;
};

CapCover build_cap_cover(const SimplicialMesh& sphere, double cap_radius);

struct ReplaceReport {
    std::vector<double> cap_energy_before;
    std::vector<double> cap_energy_after;
    int caps = 0;
};

// Replaces the map inside every cap by the coordinate-wise p-Dirichlet
// minimizer with the map's own values as ring data; the returned map equals
// the input outside cap interiors.
PiecewiseAffineMap replace_on_caps(const PiecewiseAffineMap& sphere_map, const CapCover& cover, double p,
                                   ReplaceReport* report = nullptr, double tol = 1e-10, int max_iter = 200);

}  // namespace weaklim
