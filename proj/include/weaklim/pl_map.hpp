#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>

#include "weaklim/mesh.hpp"

namespace weaklim {

struct DerivativeSample {
    int simplex_index = -1;
    Mat gradient;   // constant on the affine piece
    Mat cofactor;   // signed (n-1)-minors of the gradient
    double jacobian = 0;
};

// Nodal piecewise-affine map over a simplicial mesh; the discrete stand-in
// for every deformation in this library.
class PiecewiseAffineMap {
public:
    PiecewiseAffineMap(std::shared_ptr<const SimplicialMesh> mesh, std::vector<Vec> nodal_values,
                       std::string label = "");

    static PiecewiseAffineMap identity(std::shared_ptr<const SimplicialMesh> mesh, std::string label = "identity");
    static PiecewiseAffineMap from_function(std::shared_ptr<const SimplicialMesh> mesh,
                                            const std::function<Vec(const Vec&)>& fn, std::string label = "");

    const SimplicialMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const SimplicialMesh> mesh_ptr() const { return mesh_; }
    const std::vector<Vec>& nodal_values() const { return values_; }
    std::vector<Vec>& mutable_nodal_values() { return values_; }
    const std::string& label() const { return label_; }
    int dim() const { return mesh_->dim; }

    // Barycentric interpolation; points outside the mesh (beyond a 1e-12
    // snap) are an error.
    Vec evaluate(const Vec& x) const;
    bool try_evaluate(const Vec& x, Vec& out) const;

    DerivativeSample derivative(int simplex_index) const;
    // Gradient only; cheaper inner loop for energies.
    Mat simplex_gradient(int simplex_index) const;

    // Sum of jacobian * volume over simplices whose centroid satisfies
    // `region` (empty predicate means everywhere).
    double integrate_jacobian(const std::function<bool(const Vec&)>& region = {}) const;

    // Image of a point under the affine piece of simplex s.
    Vec apply_on_simplex(int s, const Vec& x) const;

    // Nodal interpolation of this volume map onto a surface mesh (sphere
    // restriction); the result's mesh is `surface`.
    PiecewiseAffineMap restrict_to_surface(std::shared_ptr<const SimplicialMesh> surface) const;

    double min_jacobian() const;
    double max_edge_length() const;

    const SimplexLocator& locator() const;

private:
    std::shared_ptr<const SimplicialMesh> mesh_;
    std::vector<Vec> values_;
    std::string label_;
    // built on first use; copies share it (it only references the mesh)
    mutable std::shared_ptr<const SimplexLocator> locator_;
};

void save_map_values(const PiecewiseAffineMap& map, const std::string& path);
PiecewiseAffineMap load_map_values(std::shared_ptr<const SimplicialMesh> mesh, const std::string& path,
                                   std::string label = "");

}  // namespace weaklim
