#include "weaklim/degree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "weaklim/parallel.hpp"
#include "weaklim/quadrature.hpp"
#include "weaklim/rng.hpp"

namespace weaklim {

double DegreeField::cell_volume() const {
    double v = 1;
    for (int d = 0; d < dim(); ++d) v *= (box.hi[d] - box.lo[d]) / resolution;
    return v;
}

Vec DegreeField::cell_center(std::size_t idx) const {
    Vec p(dim());
    for (int d = 0; d < dim(); ++d) {
        int c = idx % resolution;
        idx /= resolution;
        p[d] = box.lo[d] + (c + 0.5) * (box.hi[d] - box.lo[d]) / resolution;
    }
    return p;
}

std::size_t DegreeField::find_cell(const Vec& p) const {
    std::size_t idx = 0;
    for (int d = dim() - 1; d >= 0; --d) {
        double t = (p[d] - box.lo[d]) / (box.hi[d] - box.lo[d]) * resolution;
        if (t < 0 || t >= resolution) return npos;
        idx = idx * resolution + static_cast<int>(t);
    }
    return idx;
}

int DegreeField::value_at(const Vec& p, bool* skipped) const {
    if (skipped) *skipped = false;
    std::size_t idx = find_cell(p);
    if (idx == npos) return 0;
    if (skipped && near_boundary[idx]) *skipped = true;
    return values[idx];
}

double DegreeField::nonzero_measure() const {
    std::size_t count = 0;
    for (int v : values) count += (v != 0);
    return count * cell_volume();
}

RasterSet DegreeField::nonzero_cells() const {
    RasterSet r(box, resolution);
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] != 0) r.mark(i);
    return r;
}

void DegreeField::to_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) fail_io("cannot open for writing: " + path);
    os.precision(17);
    os << "cell";
    for (int d = 0; d < dim(); ++d) os << ",y" << d;
    os << ",degree\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        Vec c = cell_center(i);
        os << i;
        for (int d = 0; d < dim(); ++d) os << ',' << c[d];
        os << ',' << values[i] << '\n';
    }
    if (!os.good()) fail_io("write failed: " + path);
}

namespace {

struct FacetImage {
    std::array<Vec, kMaxDim> q;
    int sign;
};

std::vector<FacetImage> facet_images(const PiecewiseAffineMap& map) {
    const SimplicialMesh& mesh = map.mesh();
    if (mesh.facet_count() == 0) fail_invalid("degree: map has no boundary facets");
    std::vector<FacetImage> out(mesh.facet_count());
    for (int f = 0; f < mesh.facet_count(); ++f) {
        const Facet& fac = mesh.boundary_facets[f];
        for (int i = 0; i < mesh.dim; ++i) out[f].q[i] = map.nodal_values()[fac.v[i]];
        out[f].sign = fac.sign;
    }
    return out;
}

// One ray cast from y in direction d over all facet images. Returns false
// on a degenerate configuration (grazing hit or parallel facet).
bool cast_ray(const std::vector<FacetImage>& facets, int n, const Vec& y, const Vec& d, int& degree) {
    degree = 0;
    const double tol = 1e-9;
    for (const FacetImage& fi : facets) {
        Mat m(n);
        for (int j = 0; j + 1 < n; ++j) m.set_col(j, fi.q[j + 1] - fi.q[0]);
        m.set_col(n - 1, d * -1.0);
        Vec rhs = y - fi.q[0];
        Vec sol(n);
        if (!solve(m, rhs, sol, 1e-14)) {
            // ray parallel to the facet plane (or degenerate facet image):
            // harmless unless y lies in that plane
            std::vector<Vec> edges(n - 1);
            double scale = 1e-300;
            for (int i = 1; i < n; ++i) {
                edges[i - 1] = fi.q[i] - fi.q[0];
                scale = std::max(scale, edges[i - 1].norm());
            }
            Vec normal = generalized_cross(edges);
            if (normal.norm() <= 1e-13 * std::pow(scale, n - 1)) continue;  // flat image facet
            if (std::abs(normal.dot(y - fi.q[0])) < 1e-9 * normal.norm() * (1.0 + scale)) return false;
            continue;
        }
        double t = sol[n - 1];
        double l0 = 1.0;
        double min_l = 1.0;
        for (int j = 0; j + 1 < n; ++j) {
            l0 -= sol[j];
            min_l = std::min(min_l, sol[j]);
        }
        min_l = std::min(min_l, l0);
        if (min_l < -tol) continue;           // misses the facet
        if (std::abs(t) < tol) return false;  // start point on the image
        if (t < 0) continue;                  // behind the ray start
        if (min_l < tol) return false;        // grazing crossing
        Mat sgn(n);
        sgn.set_col(0, d);
        for (int j = 0; j + 1 < n; ++j) sgn.set_col(j + 1, fi.q[j + 1] - fi.q[0]);
        double ds = det(sgn);
        degree += fi.sign * (ds > 0 ? 1 : -1);
    }
    return true;
}

}  // namespace

double distance_to_image(const PiecewiseAffineMap& boundary_map, const Vec& y) {
    const SimplicialMesh& mesh = boundary_map.mesh();
    const int n = mesh.dim;
    double best = std::numeric_limits<double>::infinity();
    std::vector<Vec> verts(n);
    for (int f = 0; f < mesh.facet_count(); ++f) {
        const Facet& fac = mesh.boundary_facets[f];
        // bounding-box prescreen
        Box b{boundary_map.nodal_values()[fac.v[0]], boundary_map.nodal_values()[fac.v[0]]};
        for (int i = 1; i < n; ++i) b.expand(boundary_map.nodal_values()[fac.v[i]]);
        double lb = 0;
        for (int d = 0; d < n; ++d) {
            double e = std::max({b.lo[d] - y[d], y[d] - b.hi[d], 0.0});
            lb += e * e;
        }
        if (std::sqrt(lb) >= best) continue;
        for (int i = 0; i < n; ++i) verts[i] = boundary_map.nodal_values()[fac.v[i]];
        best = std::min(best, point_simplex_distance(y, verts));
    }
    return best;
}

int degree_pl(const PiecewiseAffineMap& boundary_map, const Vec& y, uint64_t seed) {
    const int n = boundary_map.dim();
    auto facets = facet_images(boundary_map);
    Rng rng(seed ^ 0x6465675f706cULL);

    Vec yy = y;
    for (int attempt = 0; attempt < 8; ++attempt) {
        if (distance_to_image(boundary_map, yy) > 1e-9) break;
        for (int d = 0; d < n; ++d) yy[d] = y[d] + 1e-7 * (2.0 * rng.next_double() - 1.0);
        if (attempt == 7) fail_numeric("degree_pl: query point stuck on the boundary image");
    }

    for (int attempt = 0; attempt < 32; ++attempt) {
        Vec d = Vec::axis(n, 0);
        if (attempt > 0) {
            for (int k = 0; k < n; ++k) d[k] += 1e-3 * attempt * (2.0 * rng.next_double() - 1.0);
            d *= 1.0 / d.norm();
        }
        int deg = 0;
        if (cast_ray(facets, n, yy, d, deg)) return deg;
    }
    fail_numeric("degree_pl: no nondegenerate ray direction found");
}

int winding_oracle_2d(const PiecewiseAffineMap& boundary_map, const Vec& y) {
    if (boundary_map.dim() != 2) fail_invalid("winding_oracle_2d: n must be 2");
    const SimplicialMesh& mesh = boundary_map.mesh();
    double total = 0;
    for (int f = 0; f < mesh.facet_count(); ++f) {
        const Facet& fac = mesh.boundary_facets[f];
        Vec a = boundary_map.nodal_values()[fac.v[0]] - y;
        Vec b = boundary_map.nodal_values()[fac.v[1]] - y;
        if (fac.sign < 0) std::swap(a, b);
        double cross = a[0] * b[1] - a[1] * b[0];
        double dot = a.dot(b);
        if (a.norm() == 0 || b.norm() == 0) fail_numeric("winding_oracle_2d: query point on the image");
        total += std::atan2(cross, dot);
    }
    double turns = total / (2.0 * M_PI);
    double rounded = std::round(turns);
    if (std::abs(turns - rounded) > 0.01)
        fail_numeric("winding_oracle_2d: angle sum is not an integer multiple of 2 pi");
    return static_cast<int>(rounded);
}

Vec tangential_cofactor(const PiecewiseAffineMap& boundary_map, int facet_index) {
    const SimplicialMesh& mesh = boundary_map.mesh();
    const int n = mesh.dim;
    const Facet& fac = mesh.boundary_facets[facet_index];
    std::vector<Vec> edges(n - 1);
    for (int i = 1; i < n; ++i)
        edges[i - 1] = boundary_map.nodal_values()[fac.v[i]] - boundary_map.nodal_values()[fac.v[0]];
    Vec w = generalized_cross(edges) * (fac.sign / factorial(n - 1));
    double ref = mesh.facet_measure(facet_index);
    if (ref <= 0) fail_numeric("tangential_cofactor: degenerate facet");
    return w * (1.0 / ref);
}

double weak_degree_integral(const PiecewiseAffineMap& boundary_map, const std::function<Vec(const Vec&)>& u,
                            int quad_order) {
    const SimplicialMesh& mesh = boundary_map.mesh();
    const int n = mesh.dim;
    if (mesh.facet_count() == 0) fail_invalid("weak_degree_integral: no facets");

    // Orientation audit: a closed consistently oriented surface has zero
    // total reference area vector, so constant fields have zero flux.
    Vec total(n);
    double total_measure = 0;
    for (int f = 0; f < mesh.facet_count(); ++f) {
        total += mesh.facet_area_vector(f);
        total_measure += mesh.facet_measure(f);
    }
    if (total.norm() > 1e-9 * total_measure)
        fail_numeric("weak_degree_integral: inconsistent facet orientation (constant fields have nonzero flux)");

    QuadratureRule rule = simplex_rule(n - 1, quad_order);
    return parallel_sum(mesh.facet_count(), [&](std::size_t fi) {
        int f = static_cast<int>(fi);
        const Facet& fac = mesh.boundary_facets[f];
        std::vector<Vec> img(n);
        for (int i = 0; i < n; ++i) img[i] = boundary_map.nodal_values()[fac.v[i]];
        std::vector<Vec> edges(n - 1);
        for (int i = 1; i < n; ++i) edges[i - 1] = img[i] - img[0];
        // integral over the facet of (u o f) . (Lambda_{n-1} D_tau f) nu
        // against reference measure equals quadrature of u over the image
        // simplex dotted with its oriented area vector
        Vec w = generalized_cross(edges) * (fac.sign / factorial(n - 1));
        double acc = 0;
        for (size_t q = 0; q < rule.weights.size(); ++q) {
            Vec p(n);
            for (int i = 0; i < n; ++i) p += rule.bary[q][i] * img[i];
            acc += rule.weights[q] * u(p).dot(w);
        }
        return acc;
    });
}

namespace {

struct RowCrossing {
    double t;
    int sign;
    double min_lambda;
};

}  // namespace

DegreeField degree_field(const PiecewiseAffineMap& boundary_map, const Box& target_box, int resolution,
                         uint64_t seed) {
    const int n = boundary_map.dim();
    auto facets = facet_images(boundary_map);

    DegreeField field;
    field.box = target_box;
    field.resolution = resolution;
    field.source = boundary_map.label();
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= resolution;
    field.values.assign(total, 0);
    field.near_boundary.assign(total, 0);

    std::array<double, kMaxDim> side{};
    for (int d = 0; d < n; ++d) side[d] = (target_box.hi[d] - target_box.lo[d]) / resolution;

    // Bucket facets by the transverse cells their image bounding box meets;
    // the same inflated boxes feed the near-boundary mask.
    std::size_t rows = total / resolution;
    std::vector<std::vector<int>> row_facets(rows);
    for (int f = 0; f < static_cast<int>(facets.size()); ++f) {
        Box fb{facets[f].q[0], facets[f].q[0]};
        for (int i = 1; i < n; ++i) fb.expand(facets[f].q[i]);
        std::array<int, kMaxDim> lo{}, hi{};
        bool out = false;
        for (int d = 1; d < n; ++d) {
            lo[d] = std::max(0, int(std::floor((fb.lo[d] - target_box.lo[d]) / side[d])));
            hi[d] = std::min(resolution - 1, int(std::floor((fb.hi[d] - target_box.lo[d]) / side[d])));
            if (lo[d] > hi[d]) out = true;
        }
        if (!out) {
            std::array<int, kMaxDim> c = lo;
            for (;;) {
                std::size_t row = 0;
                for (int d = n - 1; d >= 1; --d) row = row * resolution + c[d];
                row_facets[row].push_back(f);
                int d = 1;
                while (d < n) {
                    if (++c[d] <= hi[d]) break;
                    c[d] = lo[d];
                    ++d;
                }
                if (d == n) break;
            }
        }
        // near-boundary mask: every cell within 2 cells of the facet box
        std::array<int, kMaxDim> mlo{}, mhi{};
        bool mout = false;
        for (int d = 0; d < n; ++d) {
            mlo[d] = std::max(0, int(std::floor((fb.lo[d] - target_box.lo[d]) / side[d])) - 2);
            mhi[d] = std::min(resolution - 1, int(std::floor((fb.hi[d] - target_box.lo[d]) / side[d])) + 2);
            if (mlo[d] > mhi[d]) mout = true;
        }
        if (mout) continue;
        std::array<int, kMaxDim> c = mlo;
        for (;;) {
            std::size_t idx = 0;
            for (int d = n - 1; d >= 0; --d) idx = idx * resolution + c[d];
            field.near_boundary[idx] = 1;
            int d = 0;
            while (d < n) {
                if (++c[d] <= mhi[d]) break;
                c[d] = mlo[d];
                ++d;
            }
            if (d == n) break;
        }
    }

    Rng base(seed ^ 0x726f777377656570ULL);
    parallel_for(rows, [&](std::size_t begin, std::size_t end) {
        std::vector<RowCrossing> crossings;
        for (std::size_t row = begin; row < end; ++row) {
            Vec y(n);
            std::size_t rem = row;
            for (int d = 1; d < n; ++d) {
                y[d] = target_box.lo[d] + (rem % resolution + 0.5) * side[d];
                rem /= resolution;
            }
            Rng rng = base.split(row);
            bool ok = false;
            for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
                Vec yy = y;
                if (attempt > 0)
                    for (int d = 1; d < n; ++d) yy[d] += side[d] * 1e-6 * attempt * (2.0 * rng.next_double() - 1.0);
                crossings.clear();
                ok = true;
                for (int f : row_facets[row]) {
                    const FacetImage& fi = facets[f];
                    Mat m(n - 1);
                    for (int j = 0; j + 1 < n; ++j)
                        for (int r = 1; r < n; ++r) m.a[r - 1][j] = fi.q[j + 1][r] - fi.q[0][r];
                    Vec rhs(n - 1);
                    for (int r = 1; r < n; ++r) rhs[r - 1] = yy[r] - fi.q[0][r];
                    double dm = det(m);
                    Vec sol(n - 1);
                    if (!solve(m, rhs, sol, 1e-14)) {
                        // line parallel to the facet image plane: dangerous only
                        // when the line lies in that plane
                        std::vector<Vec> edges(n - 1);
                        double scale = 1e-300;
                        for (int i = 1; i < n; ++i) {
                            edges[i - 1] = fi.q[i] - fi.q[0];
                            scale = std::max(scale, edges[i - 1].norm());
                        }
                        Vec normal = generalized_cross(edges);
                        if (normal.norm() <= 1e-13 * std::pow(scale, n - 1)) continue;
                        Vec p = yy;
                        p[0] = fi.q[0][0];
                        if (std::abs(normal.dot(p - fi.q[0])) < 1e-9 * normal.norm() * (1.0 + scale)) {
                            ok = false;
                            break;
                        }
                        continue;
                    }
                    double l0 = 1.0, min_l = 1.0;
                    for (int j = 0; j + 1 < n; ++j) {
                        l0 -= sol[j];
                        min_l = std::min(min_l, sol[j]);
                    }
                    min_l = std::min(min_l, l0);
                    if (min_l < -1e-12) continue;
                    if (min_l < 1e-12) {
                        ok = false;  // grazing hit: jitter the row
                        break;
                    }
                    double t = fi.q[0][0];
                    for (int j = 0; j + 1 < n; ++j) t += sol[j] * (fi.q[j + 1][0] - fi.q[0][0]);
                    crossings.push_back({t, fi.sign * (dm > 0 ? 1 : -1), min_l});
                }
            }
            if (!ok) continue;  // row left zero; boundary mask covers these cells
            std::sort(crossings.begin(), crossings.end(), [](const RowCrossing& a, const RowCrossing& b) { return a.t < b.t; });
            // degree at first-coordinate x equals the sign sum of crossings
            // beyond x (the ray exits to degree 0 at +infinity)
            int suffix = 0;
            for (const RowCrossing& c : crossings) suffix += c.sign;
            int done = 0;
            for (int cx = 0; cx < resolution; ++cx) {
                double x = target_box.lo[0] + (cx + 0.5) * side[0];
                while (done < static_cast<int>(crossings.size()) && crossings[done].t <= x) {
                    suffix -= crossings[done].sign;
                    ++done;
                }
                field.values[row * resolution + cx] = suffix;
            }
        }
    });
    return field;
}

int default_sphere_refinement(int dim) {
    switch (dim) {
        case 2:
            return 6;  // 256-gon
        case 3:
            return 3;  // 512 triangles
        default:
            return 2;
    }
}

PiecewiseAffineMap sphere_restriction(const PiecewiseAffineMap& volume_map, const BallSpec& ball,
                                      int refinement) {
    const int n = volume_map.dim();
    if (refinement < 0) refinement = default_sphere_refinement(n);
    const SimplicialMesh& mesh = volume_map.mesh();
    // When the ball encloses the whole mesh, the domain boundary is the
    // sphere: use the stored boundary facets directly.
    double max_r = 0;
    bool has_boundary = mesh.facet_count() > 0 && mesh.simplex_count() > 0;
    if (has_boundary) {
        for (const Facet& f : mesh.boundary_facets)
            for (int i = 0; i < n; ++i)
                max_r = std::max(max_r, (mesh.vertices[f.v[i]] - ball.center).norm());
    }
    if (has_boundary && ball.radius >= max_r - 1e-9) {
        auto surface = std::make_shared<SimplicialMesh>();
        surface->dim = n;
        surface->vertices = mesh.vertices;
        surface->boundary_facets = mesh.boundary_facets;
        std::vector<Vec> vals = volume_map.nodal_values();
        return PiecewiseAffineMap(surface, std::move(vals), volume_map.label() + "|domain-boundary");
    }
    auto sphere = std::make_shared<SimplicialMesh>(build_sphere_mesh(n, ball.center, ball.radius, refinement));
    return volume_map.restrict_to_surface(sphere);
}

DegreeField topological_image(const PiecewiseAffineMap& volume_map, const BallSpec& ball,
                              const TopologicalImageOptions& opts) {
    PiecewiseAffineMap surf = sphere_restriction(volume_map, ball, opts.sphere_refinement);
    Box b{surf.nodal_values().at(0), surf.nodal_values().at(0)};
    for (const Vec& v : surf.nodal_values()) b.expand(v);
    double margin = 0;
    for (int d = 0; d < b.dim(); ++d) margin = std::max(margin, (b.hi[d] - b.lo[d]) / opts.grid_resolution);
    b.pad(4 * margin);
    return degree_field(surf, b, opts.grid_resolution, opts.seed);
}

double distributional_jacobian(const PiecewiseAffineMap& map, const std::function<double(const Vec&)>& testfn,
                               const std::function<Vec(const Vec&)>& test_gradient, int quad_order) {
    const SimplicialMesh& mesh = map.mesh();
    const int n = mesh.dim;
    for (const Facet& f : mesh.boundary_facets)
        for (int i = 0; i < n; ++i)
            if (std::abs(testfn(mesh.vertices[f.v[i]])) > 1e-9)
                fail_invalid("distributional_jacobian: test function support reaches the domain boundary");

    QuadratureRule rule = simplex_rule(n, quad_order);
    return parallel_sum(mesh.simplex_count(), [&](std::size_t si) {
        int s = static_cast<int>(si);
        Mat grad = map.simplex_gradient(s);
        // J(testfn, f_2, ..., f_n) = grad(testfn) . c, where c is the first
        // row of cof(Df) (it only involves rows 2..n of Df)
        Mat cof = cofactor_matrix(grad);
        Vec c(n);
        for (int j = 0; j < n; ++j) c[j] = cof.a[0][j];
        auto verts = mesh.simplex_vertices(s);
        double vol = simplex_volume(verts);
        if (vol <= 0) return 0.0;
        double acc = 0;
        for (size_t q = 0; q < rule.weights.size(); ++q) {
            Vec x(n);
            double f1 = 0;
            for (int i = 0; i <= n; ++i) {
                x += rule.bary[q][i] * verts[i];
                f1 += rule.bary[q][i] * map.nodal_values()[mesh.simplices[s][i]][0];
            }
            acc += rule.weights[q] * (-f1) * test_gradient(x).dot(c);
        }
        return acc * vol;
    });
}

}  // namespace weaklim
