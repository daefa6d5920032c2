#include "weaklim/inv.hpp"

#include <fstream>
#include <sstream>

#include "weaklim/rng.hpp"

namespace weaklim {

namespace {

int default_grid_resolution(int dim) { return dim == 2 ? 256 : 96; }

Vec sample_in_ball(Rng& rng, const BallSpec& ball) {
    const int n = ball.center.n;
    for (;;) {
        Vec p(n);
        for (int d = 0; d < n; ++d) p[d] = ball.center[d] + ball.radius * (2.0 * rng.next_double() - 1.0);
        if ((p - ball.center).norm() <= ball.radius) return p;
    }
}

}  // namespace

InvReport check_inv(const PiecewiseAffineMap& map, const BallSpec& ball, const InvOptions& opts) {
    const int n = map.dim();
    InvReport rep;
    rep.ball = ball;

    PiecewiseAffineMap surf = sphere_restriction(map, ball, opts.sphere_refinement);
    TopologicalImageOptions topts;
    topts.grid_resolution = opts.grid_resolution > 0 ? opts.grid_resolution : default_grid_resolution(n);
    topts.seed = opts.seed;
    Box b{surf.nodal_values().at(0), surf.nodal_values().at(0)};
    for (const Vec& v : surf.nodal_values()) b.expand(v);
    // pad so every image point of the volume map lands on the grid or is
    // far outside the boundary image
    Box img_box = b;
    for (const Vec& v : map.nodal_values()) img_box.expand(v);
    double margin = 0;
    for (int d = 0; d < n; ++d) margin = std::max(margin, (b.hi[d] - b.lo[d]) / topts.grid_resolution);
    img_box.pad(4 * margin);
    DegreeField field = degree_field(surf, img_box, topts.grid_resolution, opts.seed);

    Rng rng_in = Rng(opts.seed).split(1);
    Rng rng_out = Rng(opts.seed).split(2);
    Box domain = map.mesh().bounding_box();

    auto classify = [&](const Vec& x, bool expect_inside) {
        Vec fx;
        if (!map.try_evaluate(x, fx)) return;  // rejected by the domain
        bool skipped = false;
        int deg = field.value_at(fx, &skipped);
        if (skipped) {
            ++rep.skipped_near_boundary;
            return;
        }
        if (expect_inside) {
            ++rep.inside_samples;
            if (deg == 0) {
                ++rep.inside_violations;
                if (static_cast<int>(rep.violation_points.size()) < opts.max_recorded_points)
                    rep.violation_points.push_back(x);
            }
        } else {
            ++rep.outside_samples;
            if (deg != 0) {
                ++rep.outside_violations;
                if (static_cast<int>(rep.violation_points.size()) < opts.max_recorded_points)
                    rep.violation_points.push_back(x);
            }
        }
    };

    for (int s = 0; s < opts.sample_count; ++s) {
        classify(sample_in_ball(rng_in, ball), true);
        // outside samples: rejection over the domain box
        for (int attempt = 0; attempt < 64; ++attempt) {
            Vec p(n);
            for (int d = 0; d < n; ++d) p[d] = rng_out.uniform(domain.lo[d], domain.hi[d]);
            if ((p - ball.center).norm() <= ball.radius) continue;
            std::vector<double> lam;
            if (map.locator().locate(p, lam) < 0) continue;
            classify(p, false);
            break;
        }
    }
    return rep;
}

std::vector<InvReport> check_inv_radii(const PiecewiseAffineMap& map, const Vec& center, double r_max,
                                       int radii_count, const InvOptions& opts) {
    if (radii_count < 1) fail_invalid("check_inv_radii: need at least one radius");
    std::vector<InvReport> out;
    // log-spaced radii in (0, r_max], largest first
    for (int k = 0; k < radii_count; ++k) {
        double r = r_max * std::pow(0.5, double(k) / 2.0);
        BallSpec ball{center, r};
        InvOptions o = opts;
        o.seed = Rng(opts.seed).split(100 + k).next_u64();
        out.push_back(check_inv(map, ball, o));
    }
    return out;
}

std::string inv_report_json(const std::vector<InvReport>& reports) {
    std::ostringstream os;
    os.precision(17);
    os << "[";
    for (size_t i = 0; i < reports.size(); ++i) {
        const InvReport& r = reports[i];
        os << (i ? "," : "") << "{\"radius\":" << r.ball.radius << ",\"inside_samples\":" << r.inside_samples
           << ",\"outside_samples\":" << r.outside_samples << ",\"inside_violations\":" << r.inside_violations
           << ",\"outside_violations\":" << r.outside_violations
           << ",\"skipped_near_boundary\":" << r.skipped_near_boundary
           << ",\"passed\":" << (r.passed() ? "true" : "false") << "}";
    }
    os << "]";
    return os.str();
}

void violations_to_csv(const std::vector<InvReport>& reports, const std::string& path) {
    std::ofstream os(path);
    if (!os) fail_io("cannot open for writing: " + path);
    os.precision(17);
    os << "radius";
    int n = reports.empty() ? 0 : reports.front().ball.center.n;
    for (int d = 0; d < n; ++d) os << ",x" << d;
    os << '\n';
    for (const InvReport& r : reports)
        for (const Vec& p : r.violation_points) {
            os << r.ball.radius;
            for (int d = 0; d < n; ++d) os << ',' << p[d];
            os << '\n';
        }
    if (!os.good()) fail_io("write failed: " + path);
}

RasterSet rasterize_ball_image(const PiecewiseAffineMap& map, const BallSpec& ball, const Box& box,
                               int resolution) {
    RasterSet raster(box, resolution);
    const SimplicialMesh& mesh = map.mesh();
    const int n = mesh.dim;
    std::vector<Vec> img(n + 1), src(n + 1);
    std::vector<double> lambda;
    for (int s = 0; s < mesh.simplex_count(); ++s) {
        bool any_near = false;
        for (int i = 0; i <= n; ++i) {
            src[i] = mesh.vertices[mesh.simplices[s][i]];
            img[i] = map.nodal_values()[mesh.simplices[s][i]];
            if ((src[i] - ball.center).norm() <= ball.radius + 0.0) any_near = true;
        }
        if (!any_near) continue;
        Box ib{img[0], img[0]};
        for (int i = 1; i <= n; ++i) ib.expand(img[i]);
        std::array<int, kMaxDim> lo{}, hi{};
        bool empty = false;
        for (int d = 0; d < n; ++d) {
            double w = raster.cell_side(d);
            lo[d] = std::max(0, int(std::floor((ib.lo[d] - box.lo[d]) / w)) - 1);
            hi[d] = std::min(resolution - 1, int(std::ceil((ib.hi[d] - box.lo[d]) / w)) + 1);
            if (lo[d] > hi[d]) empty = true;
        }
        if (empty) continue;
        std::array<int, kMaxDim> c = lo;
        for (;;) {
            // cell center occupied when its PL preimage under this simplex
            // lies inside the ball
            std::size_t idx = 0;
            for (int d = n - 1; d >= 0; --d) idx = idx * resolution + c[d];
            if (!raster.occupied(idx)) {
                Vec y = raster.cell_center(idx);
                if (barycentric(img, y, lambda)) {
                    bool inside = true;
                    for (double l : lambda)
                        if (l < -1e-12) {
                            inside = false;
                            break;
                        }
                    if (inside) {
                        Vec x(n);
                        for (int i = 0; i <= n; ++i) x += lambda[i] * src[i];
                        if ((x - ball.center).norm() <= ball.radius) raster.mark(idx);
                    }
                }
            }
            int d = 0;
            while (d < n) {
                if (++c[d] <= hi[d]) break;
                c[d] = lo[d];
                ++d;
            }
            if (d == n) break;
        }
    }
    return raster;
}

double symdiff_measure(const PiecewiseAffineMap& map_a, const BallSpec& ball, const DegreeField& reference,
                       int raster_resolution) {
    if (raster_resolution != reference.resolution)
        fail_invalid("symdiff_measure: raster resolution does not match the reference grid");
    RasterSet image = rasterize_ball_image(map_a, ball, reference.box, reference.resolution);
    RasterSet ref = reference.nonzero_cells();
    return image.symmetric_difference_measure(ref);
}

ModuliCurve lusin_n_probe(const std::vector<const PiecewiseAffineMap*>& maps,
                          const std::vector<std::vector<int>>& nested_subsets, int raster_resolution) {
    if (nested_subsets.empty()) fail_invalid("lusin_n_probe: empty family");
    if (maps.empty() || (maps.size() != 1 && maps.size() != nested_subsets.size()))
        fail_invalid("lusin_n_probe: map family size mismatch");
    ModuliCurve curve;
    double prev_measure = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < nested_subsets.size(); ++k) {
        const PiecewiseAffineMap& map = *maps[maps.size() == 1 ? 0 : k];
        double src = 0;
        for (int s : nested_subsets[k]) src += map.mesh().simplex_volume_at(s);
        if (src >= prev_measure + 1e-15) fail_invalid("lusin_n_probe: subset measures must decrease");
        prev_measure = src;
        double img = image_measure(map, nested_subsets[k], raster_resolution);
        curve.pairs.emplace_back(src, img);
    }
    double src0 = curve.pairs.front().first, img0 = curve.pairs.front().second;
    double srcN = curve.pairs.back().first, imgN = curve.pairs.back().second;
    // raised when the source collapsed by 10x but the image retained a
    // fifth of its measure: images of shrinking sets refuse to shrink
    curve.flag_raised = (srcN < 0.1 * src0) && (imgN > 0.2 * img0);
    return curve;
}

ResidualReport inverse_residual(const PiecewiseAffineMap& f, const PiecewiseAffineMap& h, int sample_count,
                                uint64_t seed) {
    ResidualReport rep;
    Rng rng(seed);
    const int n = f.dim();
    Box domain = f.mesh().bounding_box();
    double sum = 0;
    int produced = 0;
    while (produced < sample_count) {
        Vec x(n);
        for (int d = 0; d < n; ++d) x[d] = rng.uniform(domain.lo[d], domain.hi[d]);
        Vec fx;
        if (!f.try_evaluate(x, fx)) continue;
        ++produced;
        Vec hfx;
        if (!h.try_evaluate(fx, hfx)) {
            ++rep.failed;
            continue;
        }
        double r = (hfx - x).norm();
        rep.max = std::max(rep.max, r);
        sum += r;
        ++rep.samples;
    }
    if (rep.samples > 0) rep.mean = sum / rep.samples;
    if (rep.failed > sample_count / 100)
        fail_numeric("inverse_residual: more than 1% of samples fell outside the inverse's domain");
    return rep;
}

}  // namespace weaklim
