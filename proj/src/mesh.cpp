#include "weaklim/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace weaklim {

std::vector<Vec> SimplicialMesh::simplex_vertices(int s) const {
    std::vector<Vec> out(dim + 1);
    for (int i = 0; i <= dim; ++i) out[i] = vertices[simplices[s][i]];
    return out;
}

std::vector<Vec> SimplicialMesh::facet_vertices(int f) const {
    std::vector<Vec> out(dim);
    for (int i = 0; i < dim; ++i) out[i] = vertices[boundary_facets[f].v[i]];
    return out;
}

double SimplicialMesh::simplex_volume_at(int s) const { return simplex_volume(simplex_vertices(s)); }

Vec SimplicialMesh::simplex_centroid(int s) const {
    Vec c(dim);
    for (int i = 0; i <= dim; ++i) c += vertices[simplices[s][i]];
    return c * (1.0 / (dim + 1));
}

Vec SimplicialMesh::facet_area_vector(int f) const {
    const Facet& fac = boundary_facets[f];
    std::vector<Vec> edges(dim - 1);
    for (int i = 1; i < dim; ++i) edges[i - 1] = vertices[fac.v[i]] - vertices[fac.v[0]];
    Vec n = generalized_cross(edges);
    return n * (fac.sign / factorial(dim - 1));
}

double SimplicialMesh::facet_measure(int f) const { return facet_area_vector(f).norm(); }

Vec SimplicialMesh::facet_centroid(int f) const {
    Vec c(dim);
    for (int i = 0; i < dim; ++i) c += vertices[boundary_facets[f].v[i]];
    return c * (1.0 / dim);
}

double SimplicialMesh::total_volume() const {
    double v = 0;
    for (int s = 0; s < simplex_count(); ++s) v += simplex_volume_at(s);
    return v;
}

double SimplicialMesh::total_facet_measure() const {
    double v = 0;
    for (int f = 0; f < facet_count(); ++f) v += facet_measure(f);
    return v;
}

Box SimplicialMesh::bounding_box() const {
    Box b{vertices.at(0), vertices.at(0)};
    for (const Vec& v : vertices) b.expand(v);
    return b;
}

namespace {

int permutation_parity(const std::vector<int>& perm) {
    int inv = 0;
    for (size_t i = 0; i < perm.size(); ++i)
        for (size_t j = i + 1; j < perm.size(); ++j)
            if (perm[i] > perm[j]) ++inv;
    return inv % 2;
}

}  // namespace

SimplicialMesh build_box_mesh(int n, int resolution) {
    if (n < 2 || n > kMaxDim) fail_invalid("build_box_mesh: dimension must be in [2,4]");
    if (resolution < 1) fail_invalid("build_box_mesh: resolution must be >= 1");

    SimplicialMesh mesh;
    mesh.dim = n;
    const int m = resolution + 1;
    std::array<int, kMaxDim> stride{};
    int total = 1;
    for (int d = 0; d < n; ++d) {
        stride[d] = total;
        total *= m;
    }
    mesh.vertices.resize(total, Vec(n));
    for (int id = 0; id < total; ++id) {
        int rem = id;
        for (int d = 0; d < n; ++d) {
            mesh.vertices[id][d] = double(rem % m) / resolution;
            rem /= m;
        }
    }

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do {
        perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    int cells = 1;
    for (int d = 0; d < n; ++d) cells *= resolution;
    std::array<int, kMaxDim> cell{};
    for (int c = 0; c < cells; ++c) {
        int rem = c;
        for (int d = 0; d < n; ++d) {
            cell[d] = rem % resolution;
            rem /= resolution;
        }
        int corner = 0;
        for (int d = 0; d < n; ++d) corner += cell[d] * stride[d];
        for (const auto& p : perms) {
            std::array<int, kMaxDim + 1> simp{};
            simp[0] = corner;
            int v = corner;
            for (int k = 0; k < n; ++k) {
                v += stride[p[k]];
                simp[k + 1] = v;
            }
            // The Kuhn path simplex has orientation sign equal to the
            // permutation parity; swap two vertices to keep volumes positive.
            if (permutation_parity(p) == 1) std::swap(simp[n - 1], simp[n]);
            mesh.simplices.push_back(simp);
        }
    }
    rebuild_boundary(mesh);
    return mesh;
}

void rebuild_boundary(SimplicialMesh& mesh) {
    const int n = mesh.dim;
    mesh.boundary_facets.clear();
    // facet key (sorted vertices) -> (simplex, omitted vertex)
    std::map<std::array<int, kMaxDim>, std::pair<int, int>> once;
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        for (int omit = 0; omit <= n; ++omit) {
            std::array<int, kMaxDim> key{};
            int c = 0;
            for (int i = 0; i <= n; ++i)
                if (i != omit) key[c++] = mesh.simplices[s][i];
            std::sort(key.begin(), key.begin() + n);
            auto it = once.find(key);
            if (it == once.end())
                once.emplace(key, std::make_pair(s, omit));
            else
                it->second.first = -1;  // interior facet
        }
    }
    for (const auto& [key, owner] : once) {
        if (owner.first < 0) continue;
        Facet f;
        for (int i = 0; i < n; ++i) f.v[i] = key[i];
        // Orient outward: the normal must point away from the omitted vertex.
        const auto& simp = mesh.simplices[owner.first];
        const Vec& opposite = mesh.vertices[simp[owner.second]];
        std::vector<Vec> edges(n - 1);
        for (int i = 1; i < n; ++i) edges[i - 1] = mesh.vertices[f.v[i]] - mesh.vertices[f.v[0]];
        Vec normal = generalized_cross(edges);
        Vec center(n);
        for (int i = 0; i < n; ++i) center += mesh.vertices[f.v[i]];
        center *= 1.0 / n;
        f.sign = (normal.dot(center - opposite) >= 0) ? 1 : -1;
        mesh.boundary_facets.push_back(f);
    }
}

namespace {

struct SurfaceBuilder {
    int dim;
    Vec center;
    double radius;
    std::vector<Vec> vertices;
    std::vector<std::vector<int>> elements;  // dim vertices each
    std::map<std::pair<int, int>, int> midpoint_cache;

    int add_vertex(const Vec& v) {
        vertices.push_back(v);
        return static_cast<int>(vertices.size()) - 1;
    }

    Vec project(const Vec& v) const {
        Vec d = v - center;
        double len = d.norm();
        return center + d * (radius / len);
    }

    int midpoint(int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint_cache.find(key);
        if (it != midpoint_cache.end()) return it->second;
        Vec m = project((vertices[a] + vertices[b]) * 0.5);
        int id = add_vertex(m);
        midpoint_cache.emplace(key, id);
        return id;
    }

    void subdivide_triangles() {
        std::vector<std::vector<int>> next;
        for (const auto& t : elements) {
            int ab = midpoint(t[0], t[1]);
            int bc = midpoint(t[1], t[2]);
            int ca = midpoint(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        elements = std::move(next);
    }

    void subdivide_tets() {
        std::vector<std::vector<int>> next;
        for (const auto& t : elements) {
            int m01 = midpoint(t[0], t[1]), m02 = midpoint(t[0], t[2]), m03 = midpoint(t[0], t[3]);
            int m12 = midpoint(t[1], t[2]), m13 = midpoint(t[1], t[3]), m23 = midpoint(t[2], t[3]);
            next.push_back({t[0], m01, m02, m03});
            next.push_back({t[1], m01, m12, m13});
            next.push_back({t[2], m02, m12, m23});
            next.push_back({t[3], m03, m13, m23});
            // interior octahedron split along the m01-m23 diagonal
            next.push_back({m01, m23, m02, m03});
            next.push_back({m01, m23, m03, m13});
            next.push_back({m01, m23, m13, m12});
            next.push_back({m01, m23, m12, m02});
        }
        elements = std::move(next);
    }
};

}  // namespace

SimplicialMesh build_sphere_mesh(int n, const Vec& center, double radius, int refinement) {
    if (radius <= 0) fail_invalid("build_sphere_mesh: radius must be positive");
    if (refinement < 0) fail_invalid("build_sphere_mesh: refinement must be >= 0");
    if (n < 2 || n > kMaxDim) fail_invalid("build_sphere_mesh: dimension must be in [2,4]");

    SimplicialMesh mesh;
    mesh.dim = n;

    if (n == 2) {
        const int m = 4 << refinement;
        mesh.vertices.resize(m, Vec(2));
        for (int k = 0; k < m; ++k) {
            double th = 2.0 * M_PI * k / m;
            mesh.vertices[k][0] = center[0] + radius * std::cos(th);
            mesh.vertices[k][1] = center[1] + radius * std::sin(th);
        }
        for (int k = 0; k < m; ++k) {
            Facet f;
            f.v[0] = k;
            f.v[1] = (k + 1) % m;
            f.sign = 1;  // CCW edge cross product points outward
            mesh.boundary_facets.push_back(f);
        }
        return mesh;
    }

    SurfaceBuilder sb{n, center, radius, {}, {}, {}};
    if (n == 3) {
        for (int d = 0; d < 3; ++d)
            for (int s : {1, -1}) sb.add_vertex(center + Vec::axis(3, d, s * radius));
        // octahedron: vertex ids 0,1 = +-x; 2,3 = +-y; 4,5 = +-z
        int px = 0, mx = 1, py = 2, my = 3, pz = 4, mz = 5;
        sb.elements = {{px, py, pz}, {py, mx, pz}, {mx, my, pz}, {my, px, pz},
                       {py, px, mz}, {mx, py, mz}, {my, mx, mz}, {px, my, mz}};
        for (int r = 0; r < refinement; ++r) sb.subdivide_triangles();
    } else {
        for (int d = 0; d < 4; ++d)
            for (int s : {1, -1}) sb.add_vertex(center + Vec::axis(4, d, s * radius));
        for (int s0 = 0; s0 < 2; ++s0)
            for (int s1 = 0; s1 < 2; ++s1)
                for (int s2 = 0; s2 < 2; ++s2)
                    for (int s3 = 0; s3 < 2; ++s3)
                        sb.elements.push_back({0 + s0, 2 + s1, 4 + s2, 6 + s3});
        for (int r = 0; r < refinement; ++r) sb.subdivide_tets();
    }

    mesh.vertices = sb.vertices;
    for (const auto& el : sb.elements) {
        Facet f;
        for (int i = 0; i < n; ++i) f.v[i] = el[i];
        std::vector<Vec> edges(n - 1);
        for (int i = 1; i < n; ++i) edges[i - 1] = mesh.vertices[f.v[i]] - mesh.vertices[f.v[0]];
        Vec normal = generalized_cross(edges);
        Vec fc(n);
        for (int i = 0; i < n; ++i) fc += mesh.vertices[f.v[i]];
        fc *= 1.0 / n;
        f.sign = (normal.dot(fc - center) >= 0) ? 1 : -1;
        mesh.boundary_facets.push_back(f);
    }
    return mesh;
}

void save_mesh(const SimplicialMesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) fail_io("cannot open for writing: " + path);
    os.precision(17);
    os << mesh.dim << ' ' << mesh.vertex_count() << ' ' << mesh.simplex_count() << ' '
       << mesh.facet_count() << '\n';
    for (const Vec& v : mesh.vertices) {
        for (int d = 0; d < mesh.dim; ++d) os << (d ? " " : "") << v[d];
        os << '\n';
    }
    for (const auto& s : mesh.simplices) {
        for (int i = 0; i <= mesh.dim; ++i) os << (i ? " " : "") << s[i];
        os << '\n';
    }
    for (const Facet& f : mesh.boundary_facets) {
        for (int i = 0; i < mesh.dim; ++i) os << (i ? " " : "") << f.v[i];
        os << ' ' << f.sign << '\n';
    }
    if (!os.good()) fail_io("write failed: " + path);
}

SimplicialMesh load_mesh(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail_io("cannot open: " + path);
    SimplicialMesh mesh;
    int nv = 0, ns = 0, nf = 0;
    is >> mesh.dim >> nv >> ns >> nf;
    if (!is || mesh.dim < 2 || mesh.dim > kMaxDim) fail_io("bad mesh header: " + path);
    mesh.vertices.resize(nv, Vec(mesh.dim));
    for (int i = 0; i < nv; ++i)
        for (int d = 0; d < mesh.dim; ++d) is >> mesh.vertices[i][d];
    mesh.simplices.resize(ns);
    for (int i = 0; i < ns; ++i)
        for (int d = 0; d <= mesh.dim; ++d) is >> mesh.simplices[i][d];
    mesh.boundary_facets.resize(nf);
    for (int i = 0; i < nf; ++i) {
        for (int d = 0; d < mesh.dim; ++d) is >> mesh.boundary_facets[i].v[d];
        is >> mesh.boundary_facets[i].sign;
    }
    if (!is) fail_io("truncated mesh file: " + path);
    return mesh;
}

SimplexLocator::SimplexLocator(const SimplicialMesh& mesh, int bins_per_axis) : mesh_(mesh) {
    if (mesh.simplex_count() == 0) fail_invalid("SimplexLocator: mesh has no volume simplices");
    box_ = mesh.bounding_box();
    box_.pad(1e-12 + 1e-12 * box_.volume());
    if (bins_per_axis <= 0) {
        double per_axis = std::pow(double(mesh.simplex_count()), 1.0 / mesh.dim);
        bins_ = std::max(1, std::min(256, int(per_axis)));
    } else {
        bins_ = bins_per_axis;
    }
    std::size_t total = 1;
    for (int d = 0; d < mesh.dim; ++d) total *= bins_;
    cells_.resize(total);
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        Box sb{mesh.vertices[mesh.simplices[s][0]], mesh.vertices[mesh.simplices[s][0]]};
        for (int i = 1; i <= mesh.dim; ++i) sb.expand(mesh.vertices[mesh.simplices[s][i]]);
        std::array<int, kMaxDim> lo{}, hi{};
        for (int d = 0; d < mesh.dim; ++d) {
            double w = (box_.hi[d] - box_.lo[d]) / bins_;
            lo[d] = std::clamp(int((sb.lo[d] - box_.lo[d]) / w), 0, bins_ - 1);
            hi[d] = std::clamp(int((sb.hi[d] - box_.lo[d]) / w), 0, bins_ - 1);
        }
        std::array<int, kMaxDim> c = lo;
        for (;;) {
            cells_[cell_index(c)].push_back(s);
            int d = 0;
            while (d < mesh.dim) {
                if (++c[d] <= hi[d]) break;
                c[d] = lo[d];
                ++d;
            }
            if (d == mesh.dim) break;
        }
    }
}

std::size_t SimplexLocator::cell_index(const std::array<int, kMaxDim>& c) const {
    std::size_t idx = 0;
    for (int d = mesh_.dim - 1; d >= 0; --d) idx = idx * bins_ + c[d];
    return idx;
}

int SimplexLocator::locate(const Vec& p, std::vector<double>& lambda, double tol) const {
    if (!box_.contains(p, tol)) return -1;
    std::array<int, kMaxDim> c{};
    for (int d = 0; d < mesh_.dim; ++d) {
        double w = (box_.hi[d] - box_.lo[d]) / bins_;
        c[d] = std::clamp(int((p[d] - box_.lo[d]) / w), 0, bins_ - 1);
    }
    int best = -1;
    for (int s : cells_[cell_index(c)]) {
        if (best >= 0 && s >= best) continue;  // lowest-index tie-break
        auto verts = mesh_.simplex_vertices(s);
        if (!barycentric(verts, p, lambda)) continue;
        bool inside = true;
        for (double l : lambda)
            if (l < -tol) {
                inside = false;
                break;
            }
        if (inside) best = s;
    }
    if (best >= 0) {
        auto verts = mesh_.simplex_vertices(best);
        barycentric(verts, p, lambda);
    }
    return best;
}

}  // namespace weaklim
