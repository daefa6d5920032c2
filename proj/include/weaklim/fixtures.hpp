#pragma once

#include "weaklim/pl_map.hpp"

namespace weaklim {

// Deterministic test deformations shared by the unit suites, the acceptance
// battery and the CLI fixtures.

// Closed polygon map on a 4*2^refinement-gon with jittered radii/angles;
// generically a non-simple curve, which is exactly what the degree oracles
// want to disagree about.
PiecewiseAffineMap make_random_circle_map(int refinement, uint64_t seed);

// theta -> 2 theta on the circle (degree 2 at the center).
PiecewiseAffineMap make_angle_doubling_map(int refinement);

// Reflection of the identity sphere map (degree -1 at the center).
PiecewiseAffineMap make_reflected_sphere_map(int n, int refinement);

// Identity on [0,1]^n plus a random interior perturbation kept small enough
// that every Jacobian stays positive.
PiecewiseAffineMap make_random_pl_homeomorphism(int n, int resolution, double amplitude, uint64_t seed);

// Per-simplex exact inverse of `f`, sampled onto a box mesh over f's image
// (valid when f has identity boundary).
PiecewiseAffineMap make_sampled_inverse(const PiecewiseAffineMap& f, int target_resolution);

// Identity map with an interior patch of the ball B(center, patch_radius)
// displaced by `offset`: a deliberate (INV) violation.
PiecewiseAffineMap make_bubble_escape_map(int n, int resolution, const Vec& center, double patch_radius,
                                          const Vec& offset);

// Smooth 20%-style shear x -> x + amplitude sin(pi x_2) e_1.
PiecewiseAffineMap make_shear_map(int n, int resolution, double amplitude);

// f = id + (1/m) bump: converges uniformly to the identity as m grows.
PiecewiseAffineMap make_converging_map(int n, int resolution, int m);

}  // namespace weaklim
