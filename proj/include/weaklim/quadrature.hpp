#pragma once

#include <vector>

namespace weaklim {

// Quadrature nodes in barycentric coordinates over a d-simplex, with weights
// normalized to sum to 1:  integral over S of f  ~  vol(S) * sum w_q f(x_q).
struct QuadratureRule {
    std::vector<std::vector<double>> bary;
    std::vector<double> weights;
};

// Grundmann-Moller rule of degree 2s+1 on the d-simplex; `order` is the
// requested polynomial degree (rounded up to the next odd degree).
QuadratureRule simplex_rule(int simplex_dim, int order);

}  // namespace weaklim
