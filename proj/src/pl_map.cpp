#include "weaklim/pl_map.hpp"

#include <fstream>

#include "weaklim/parallel.hpp"

namespace weaklim {

PiecewiseAffineMap::PiecewiseAffineMap(std::shared_ptr<const SimplicialMesh> mesh, std::vector<Vec> nodal_values,
                                       std::string label)
    : mesh_(std::move(mesh)), values_(std::move(nodal_values)), label_(std::move(label)) {
    if (static_cast<int>(values_.size()) != mesh_->vertex_count())
        fail_invalid("PiecewiseAffineMap: nodal value count does not match vertex count");
}

PiecewiseAffineMap PiecewiseAffineMap::identity(std::shared_ptr<const SimplicialMesh> mesh, std::string label) {
    std::vector<Vec> vals = mesh->vertices;
    return PiecewiseAffineMap(std::move(mesh), std::move(vals), std::move(label));
}

PiecewiseAffineMap PiecewiseAffineMap::from_function(std::shared_ptr<const SimplicialMesh> mesh,
                                                     const std::function<Vec(const Vec&)>& fn, std::string label) {
    std::vector<Vec> vals(mesh->vertex_count());
    for (int i = 0; i < mesh->vertex_count(); ++i) vals[i] = fn(mesh->vertices[i]);
    return PiecewiseAffineMap(std::move(mesh), std::move(vals), std::move(label));
}

const SimplexLocator& PiecewiseAffineMap::locator() const {
    static std::mutex build_mutex;
    std::scoped_lock lock(build_mutex);
    if (!locator_) locator_ = std::make_shared<SimplexLocator>(*mesh_);
    return *locator_;
}

bool PiecewiseAffineMap::try_evaluate(const Vec& x, Vec& out) const {
    std::vector<double> lambda;
    int s = locator().locate(x, lambda, 1e-12);
    if (s < 0) return false;
    out = Vec(dim());
    for (int i = 0; i <= dim(); ++i) out += lambda[i] * values_[mesh_->simplices[s][i]];
    return true;
}

Vec PiecewiseAffineMap::evaluate(const Vec& x) const {
    Vec out;
    if (!try_evaluate(x, out)) fail_invalid("evaluate: point outside the mesh domain");
    return out;
}

Mat PiecewiseAffineMap::simplex_gradient(int s) const {
    const int n = dim();
    const auto& simp = mesh_->simplices[s];
    Mat ref(n), img(n);
    for (int j = 0; j < n; ++j) {
        ref.set_col(j, mesh_->vertices[simp[j + 1]] - mesh_->vertices[simp[0]]);
        img.set_col(j, values_[simp[j + 1]] - values_[simp[0]]);
    }
    double rv = det(ref);
    if (rv == 0) fail_numeric("simplex_gradient: degenerate simplex " + std::to_string(s));
    return img.mul(inverse(ref));
}

DerivativeSample PiecewiseAffineMap::derivative(int simplex_index) const {
    if (simplex_index < 0 || simplex_index >= mesh_->simplex_count())
        fail_invalid("derivative: simplex index out of range");
    DerivativeSample d;
    d.simplex_index = simplex_index;
    d.gradient = simplex_gradient(simplex_index);
    d.cofactor = cofactor_matrix(d.gradient);
    d.jacobian = det(d.gradient);
    return d;
}

double PiecewiseAffineMap::integrate_jacobian(const std::function<bool(const Vec&)>& region) const {
    const int count = mesh_->simplex_count();
    return parallel_sum(count, [&](std::size_t s) {
        int si = static_cast<int>(s);
        if (region && !region(mesh_->simplex_centroid(si))) return 0.0;
        Mat f = simplex_gradient(si);
        return det(f) * mesh_->simplex_volume_at(si);
    });
}

Vec PiecewiseAffineMap::apply_on_simplex(int s, const Vec& x) const {
    auto verts = mesh_->simplex_vertices(s);
    std::vector<double> lambda;
    if (!barycentric(verts, x, lambda)) fail_numeric("apply_on_simplex: degenerate simplex");
    Vec out(dim());
    for (int i = 0; i <= dim(); ++i) out += lambda[i] * values_[mesh_->simplices[s][i]];
    return out;
}

PiecewiseAffineMap PiecewiseAffineMap::restrict_to_surface(std::shared_ptr<const SimplicialMesh> surface) const {
    std::vector<Vec> vals(surface->vertex_count());
    for (int i = 0; i < surface->vertex_count(); ++i) vals[i] = evaluate(surface->vertices[i]);
    return PiecewiseAffineMap(std::move(surface), std::move(vals), label_ + "|sphere");
}

double PiecewiseAffineMap::min_jacobian() const {
    double mj = std::numeric_limits<double>::infinity();
    for (int s = 0; s < mesh_->simplex_count(); ++s) {
        Mat f = simplex_gradient(s);
        mj = std::min(mj, det(f));
    }
    return mj;
}

double PiecewiseAffineMap::max_edge_length() const {
    double h = 0;
    for (const auto& simp : mesh_->simplices)
        for (int i = 0; i <= mesh_->dim; ++i)
            for (int j = i + 1; j <= mesh_->dim; ++j)
                h = std::max(h, (mesh_->vertices[simp[i]] - mesh_->vertices[simp[j]]).norm());
    for (const auto& f : mesh_->boundary_facets)
        for (int i = 0; i < mesh_->dim; ++i)
            for (int j = i + 1; j < mesh_->dim; ++j)
                h = std::max(h, (mesh_->vertices[f.v[i]] - mesh_->vertices[f.v[j]]).norm());
    return h;
}

void save_map_values(const PiecewiseAffineMap& map, const std::string& path) {
    std::ofstream os(path);
    if (!os) fail_io("cannot open for writing: " + path);
    os.precision(17);
    for (const Vec& v : map.nodal_values()) {
        for (int d = 0; d < map.dim(); ++d) os << (d ? " " : "") << v[d];
        os << '\n';
    }
    if (!os.good()) fail_io("write failed: " + path);
}

PiecewiseAffineMap load_map_values(std::shared_ptr<const SimplicialMesh> mesh, const std::string& path,
                                   std::string label) {
    std::ifstream is(path);
    if (!is) fail_io("cannot open: " + path);
    std::vector<Vec> vals(mesh->vertex_count(), Vec(mesh->dim));
    for (int i = 0; i < mesh->vertex_count(); ++i)
        for (int d = 0; d < mesh->dim; ++d) is >> vals[i][d];
    if (!is) fail_io("truncated nodal-value file: " + path);
    return PiecewiseAffineMap(std::move(mesh), std::move(vals), std::move(label));
}

}  // namespace weaklim
