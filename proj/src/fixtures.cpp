#include "weaklim/fixtures.hpp"

#include <cmath>

#include "weaklim/rng.hpp"

namespace weaklim {

PiecewiseAffineMap make_random_circle_map(int refinement, uint64_t seed) {
    auto mesh = std::make_shared<SimplicialMesh>(build_sphere_mesh(2, Vec::of2(0, 0), 1.0, refinement));
    Rng rng(seed ^ 0x636972636c65ULL);
    const int m = mesh->vertex_count();
    std::vector<Vec> vals(m);
    // winding count between -2 and 2, plus radius and angle jitter
    int winding = static_cast<int>(rng.next_u64() % 5) - 2;
    double phase = rng.uniform(0, 2 * M_PI);
    for (int k = 0; k < m; ++k) {
        double th = 2.0 * M_PI * k / m;
        double r = 0.6 + 0.8 * rng.next_double();
        double ang = winding * th + phase + 0.25 * (2.0 * rng.next_double() - 1.0);
        vals[k] = Vec::of2(r * std::cos(ang) + 0.2 * (2.0 * rng.next_double() - 1.0),
                           r * std::sin(ang) + 0.2 * (2.0 * rng.next_double() - 1.0));
    }
    return PiecewiseAffineMap(mesh, std::move(vals), "random_circle");
}

PiecewiseAffineMap make_angle_doubling_map(int refinement) {
    auto mesh = std::make_shared<SimplicialMesh>(build_sphere_mesh(2, Vec::of2(0, 0), 1.0, refinement));
    const int m = mesh->vertex_count();
    std::vector<Vec> vals(m);
    for (int k = 0; k < m; ++k) {
        double th = 2.0 * M_PI * k / m;
        vals[k] = Vec::of2(std::cos(2 * th), std::sin(2 * th));
    }
    return PiecewiseAffineMap(mesh, std::move(vals), "angle_doubling");
}

PiecewiseAffineMap make_reflected_sphere_map(int n, int refinement) {
    auto mesh = std::make_shared<SimplicialMesh>(build_sphere_mesh(n, Vec(n), 1.0, refinement));
    std::vector<Vec> vals = mesh->vertices;
    for (Vec& v : vals) v[0] = -v[0];
    return PiecewiseAffineMap(mesh, std::move(vals), "reflected_sphere");
}

PiecewiseAffineMap make_random_pl_homeomorphism(int n, int resolution, double amplitude, uint64_t seed) {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(n, resolution));
    Rng rng(seed ^ 0x706c686f6d656fULL);
    const double h = 1.0 / resolution;
    std::vector<char> boundary(mesh->vertex_count(), 0);
    for (const Facet& f : mesh->boundary_facets)
        for (int i = 0; i < n; ++i) boundary[f.v[i]] = 1;

    double amp = amplitude * h;
    for (int shrink = 0; shrink < 12; ++shrink) {
        std::vector<Vec> vals = mesh->vertices;
        Rng r2 = rng.split(shrink);
        for (int v = 0; v < mesh->vertex_count(); ++v) {
            if (boundary[v]) continue;
            for (int d = 0; d < n; ++d) vals[v][d] += amp * (2.0 * r2.next_double() - 1.0);
        }
        PiecewiseAffineMap map(mesh, std::move(vals), "random_pl_homeo");
        if (map.min_jacobian() > 1e-6) return map;
        amp *= 0.5;
    }
    fail_numeric("make_random_pl_homeomorphism: could not keep Jacobians positive");
}

PiecewiseAffineMap make_sampled_inverse(const PiecewiseAffineMap& f, int target_resolution) {
    const SimplicialMesh& mesh = f.mesh();
    const int n = mesh.dim;
    auto target = std::make_shared<SimplicialMesh>(build_box_mesh(n, target_resolution));

    // bin the image simplices for point location in image space
    Box ibox{f.nodal_values().at(0), f.nodal_values().at(0)};
    for (const Vec& v : f.nodal_values()) ibox.expand(v);
    ibox.pad(1e-9);
    int bins = std::max(1, std::min(128, int(std::pow(double(mesh.simplex_count()), 1.0 / n))));
    std::vector<std::vector<int>> cells(std::size_t(std::pow(bins, n)));
    auto bin_index = [&](const std::array<int, kMaxDim>& c) {
        std::size_t idx = 0;
        for (int d = n - 1; d >= 0; --d) idx = idx * bins + c[d];
        return idx;
    };
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        Box sb{f.nodal_values()[mesh.simplices[s][0]], f.nodal_values()[mesh.simplices[s][0]]};
        for (int i = 1; i <= n; ++i) sb.expand(f.nodal_values()[mesh.simplices[s][i]]);
        std::array<int, kMaxDim> lo{}, hi{};
        for (int d = 0; d < n; ++d) {
            double w = (ibox.hi[d] - ibox.lo[d]) / bins;
            lo[d] = std::clamp(int((sb.lo[d] - ibox.lo[d]) / w), 0, bins - 1);
            hi[d] = std::clamp(int((sb.hi[d] - ibox.lo[d]) / w), 0, bins - 1);
        }
        std::array<int, kMaxDim> c = lo;
        for (;;) {
            cells[bin_index(c)].push_back(s);
            int d = 0;
            while (d < n) {
                if (++c[d] <= hi[d]) break;
                c[d] = lo[d];
                ++d;
            }
            if (d == n) break;
        }
    }

    std::vector<Vec> img(n + 1), src(n + 1);
    std::vector<double> lambda;
    std::vector<Vec> vals(target->vertex_count(), Vec(n));
    for (int tv = 0; tv < target->vertex_count(); ++tv) {
        const Vec& y = target->vertices[tv];
        std::array<int, kMaxDim> c{};
        for (int d = 0; d < n; ++d) {
            double w = (ibox.hi[d] - ibox.lo[d]) / bins;
            c[d] = std::clamp(int((y[d] - ibox.lo[d]) / w), 0, bins - 1);
        }
        bool found = false;
        for (int s : cells[bin_index(c)]) {
            for (int i = 0; i <= n; ++i) {
                img[i] = f.nodal_values()[mesh.simplices[s][i]];
                src[i] = mesh.vertices[mesh.simplices[s][i]];
            }
            if (!barycentric(img, y, lambda)) continue;
            bool inside = true;
            for (double l : lambda)
                if (l < -1e-9) {
                    inside = false;
                    break;
                }
            if (!inside) continue;
            Vec x(n);
            for (int i = 0; i <= n; ++i) x += lambda[i] * src[i];
            vals[tv] = x;
            found = true;
            break;
        }
        if (!found) fail_numeric("make_sampled_inverse: target vertex not covered by the image");
    }
    return PiecewiseAffineMap(target, std::move(vals), f.label() + "_inverse");
}

PiecewiseAffineMap make_bubble_escape_map(int n, int resolution, const Vec& center, double patch_radius,
                                          const Vec& offset) {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(n, resolution));
    std::vector<Vec> vals = mesh->vertices;
    for (int v = 0; v < mesh->vertex_count(); ++v) {
        double dist = (mesh->vertices[v] - center).norm();
        if (dist < patch_radius) {
            // smooth falloff keeps the escape patch away from the sphere image
            double w = 1.0 - dist / patch_radius;
            vals[v] += offset * w;
        }
    }
    return PiecewiseAffineMap(mesh, std::move(vals), "bubble_escape");
}

PiecewiseAffineMap make_shear_map(int n, int resolution, double amplitude) {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(n, resolution));
    std::vector<Vec> vals = mesh->vertices;
    for (Vec& v : vals) v[0] += amplitude * std::sin(M_PI * v[1]);
    return PiecewiseAffineMap(mesh, std::move(vals), "shear");
}

PiecewiseAffineMap make_converging_map(int n, int resolution, int m) {
    auto mesh = std::make_shared<SimplicialMesh>(build_box_mesh(n, resolution));
    std::vector<Vec> vals = mesh->vertices;
    for (Vec& v : vals) {
        double bump = 1.0;
        for (int d = 0; d < n; ++d) bump *= std::sin(M_PI * v[d]);
        for (int d = 0; d < n; ++d) v[d] += 0.2 / m * bump * std::sin(M_PI * (d + 1) * v[(d + 1) % n]);
    }
    return PiecewiseAffineMap(mesh, std::move(vals), "converging_m" + std::to_string(m));
}

}  // namespace weaklim
