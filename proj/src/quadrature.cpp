#include "weaklim/quadrature.hpp"

#include <cmath>

#include "weaklim/geometry.hpp"

namespace weaklim {

namespace {

void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int v = 0; v <= total; ++v) {
        cur.push_back(v);
        compositions(total - v, parts - 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace

QuadratureRule simplex_rule(int simplex_dim, int order) {
    if (order < 1) order = 1;
    const int s = (order - 1) / 2 + ((order - 1) % 2);  // next odd degree 2s+1 >= order
    const int d = 2 * s + 1;
    const int n = simplex_dim;

    QuadratureRule rule;
    const double norm = factorial(n);  // weights below integrate the unit-volume simplex
    for (int i = 0; i <= s; ++i) {
        const double denom_base = d + n - 2 * i;
        double coeff = std::pow(2.0, -2.0 * s) * std::pow(denom_base, d) /
                       (factorial(i) * factorial(d + n - i));
        if (i % 2 == 1) coeff = -coeff;
        std::vector<std::vector<int>> ks;
        std::vector<int> cur;
        compositions(s - i, n + 1, cur, ks);
        for (const auto& k : ks) {
            std::vector<double> b(n + 1);
            for (int j = 0; j <= n; ++j) b[j] = (2.0 * k[j] + 1.0) / denom_base;
            rule.bary.push_back(std::move(b));
            rule.weights.push_back(coeff * norm);
        }
    }
    return rule;
}

}  // namespace weaklim
