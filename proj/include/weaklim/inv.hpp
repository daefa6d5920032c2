#pragma once

#include "weaklim/degree.hpp"

namespace weaklim {

// Sampled (INV) check for one ball: inside samples must see nonzero degree
// of f restricted to the sphere, outside samples zero degree.
struct InvReport {
    BallSpec ball;
    int inside_samples = 0;
    int outside_samples = 0;
    int inside_violations = 0;
    int outside_violations = 0;
    int skipped_near_boundary = 0;
    std::vector<Vec> violation_points;

    bool passed() const { return inside_violations == 0 && outside_violations == 0; }
};

struct InvOptions {
    int sample_count = 1000;
    uint64_t seed = 0;
    int grid_resolution = 0;     // 0: pick by dimension
    int sphere_refinement = -1;  // -1: default per dimension
    int max_recorded_points = 64;
};

InvReport check_inv(const PiecewiseAffineMap& map, const BallSpec& ball, const InvOptions& opts);

// Runs check_inv on log-spaced radii in (0, r_max); the discrete stand-in
// for "a.e. radius".
std::vector<InvReport> check_inv_radii(const PiecewiseAffineMap& map, const Vec& center, double r_max,
                                       int radii_count, const InvOptions& opts);

std::string inv_report_json(const std::vector<InvReport>& reports);
void violations_to_csv(const std::vector<InvReport>& reports, const std::string& path);

// Measure of  mapA(ball) symmetric-difference {nonzero cells of reference}.
double symdiff_measure(const PiecewiseAffineMap& map_a, const BallSpec& ball, const DegreeField& reference,
                       int raster_resolution);

// Rasterizes the image of the part of the domain inside `ball`.
RasterSet rasterize_ball_image(const PiecewiseAffineMap& map, const BallSpec& ball, const Box& box,
                               int resolution);

struct ModuliCurve {
    std::vector<std::pair<double, double>> pairs;  // (source measure, image measure)
    bool forward = true;
    bool flag_raised = false;  // image measure stayed large while source shrank
};

// Lusin (N) probe: images of a shrinking family of simplex subsets. `maps`
// holds either one map per subset or a single map reused for all of them.
ModuliCurve lusin_n_probe(const std::vector<const PiecewiseAffineMap*>& maps,
                          const std::vector<std::vector<int>>& nested_subsets, int raster_resolution);

struct ResidualReport {
    double max = 0;
    double mean = 0;
    int samples = 0;
    int failed = 0;  // f(x) outside h's domain
};

// Residuals |h(f(x)) - x| over seeded samples; swap arguments for the
// symmetric variant.
ResidualReport inverse_residual(const PiecewiseAffineMap& f, const PiecewiseAffineMap& h, int sample_count,
                                uint64_t seed);

}  // namespace weaklim
