#include "weaklim/geometry.hpp"

#include <algorithm>

namespace weaklim {

double factorial(int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

double det(const Mat& m) {
    switch (m.n) {
        case 1:
            return m.a[0][0];
        case 2:
            return m.a[0][0] * m.a[1][1] - m.a[0][1] * m.a[1][0];
        case 3:
            return m.a[0][0] * (m.a[1][1] * m.a[2][2] - m.a[1][2] * m.a[2][1]) -
                   m.a[0][1] * (m.a[1][0] * m.a[2][2] - m.a[1][2] * m.a[2][0]) +
                   m.a[0][2] * (m.a[1][0] * m.a[2][1] - m.a[1][1] * m.a[2][0]);
        case 4: {
            double d = 0;
            Mat minor(3);
            for (int j = 0; j < 4; ++j) {
                for (int r = 1; r < 4; ++r) {
                    int cc = 0;
                    for (int c = 0; c < 4; ++c) {
                        if (c == j) continue;
                        minor.a[r - 1][cc++] = m.a[r][c];
                    }
                }
                double term = m.a[0][j] * det(minor);
                d += (j % 2 == 0) ? term : -term;
            }
            return d;
        }
        default:
            fail_invalid("det: unsupported dimension " + std::to_string(m.n));
    }
}

static double signed_minor(const Mat& m, int drop_row, int drop_col) {
    Mat sub(m.n - 1);
    int rr = 0;
    for (int r = 0; r < m.n; ++r) {
        if (r == drop_row) continue;
        int cc = 0;
        for (int c = 0; c < m.n; ++c) {
            if (c == drop_col) continue;
            sub.a[rr][cc++] = m.a[r][c];
        }
        ++rr;
    }
    double sign = ((drop_row + drop_col) % 2 == 0) ? 1.0 : -1.0;
    return sign * det(sub);
}

Mat cofactor_matrix(const Mat& m) {
    Mat c(m.n);
    if (m.n == 1) {
        c.a[0][0] = 1.0;
        return c;
    }
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) c.a[i][j] = signed_minor(m, i, j);
    return c;
}

Mat cofactor_directional(const Mat& m, const Mat& dm) {
    const int n = m.n;
    Mat out(n);
    if (n == 2) {
        // cof is linear in the entries for n=2.
        out.a[0][0] = dm.a[1][1];
        out.a[0][1] = -dm.a[1][0];
        out.a[1][0] = -dm.a[0][1];
        out.a[1][1] = dm.a[0][0];
        return out;
    }
    // cof(M)_{ij} is the determinant of the minor M(i,j); differentiate the
    // determinant entrywise: d det(A) = <cof(A), dA>.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Mat sub(n - 1), dsub(n - 1);
            int rr = 0;
            for (int r = 0; r < n; ++r) {
                if (r == i) continue;
                int cc = 0;
                for (int c = 0; c < n; ++c) {
                    if (c == j) continue;
                    sub.a[rr][cc] = m.a[r][c];
                    dsub.a[rr][cc] = dm.a[r][c];
                    ++cc;
                }
                ++rr;
            }
            Mat cof_sub = cofactor_matrix(sub);
            double s = 0;
            for (int r = 0; r < n - 1; ++r)
                for (int c = 0; c < n - 1; ++c) s += cof_sub.a[r][c] * dsub.a[r][c];
            double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            out.a[i][j] = sign * s;
        }
    return out;
}

bool solve(const Mat& m, const Vec& rhs, Vec& out, double tol) {
    const int n = m.n;
    double aug[kMaxDim][kMaxDim + 1];
    double scale = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            aug[i][j] = m.a[i][j];
            scale = std::max(scale, std::abs(m.a[i][j]));
        }
        aug[i][n] = rhs[i];
    }
    if (scale == 0) return false;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(aug[r][c]) > std::abs(aug[piv][c])) piv = r;
        if (std::abs(aug[piv][c]) <= tol * scale) return false;
        if (piv != c)
            for (int j = 0; j <= n; ++j) std::swap(aug[piv][j], aug[c][j]);
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = aug[r][c] / aug[c][c];
            for (int j = c; j <= n; ++j) aug[r][j] -= f * aug[c][j];
        }
    }
    out = Vec(n);
    for (int i = 0; i < n; ++i) out[i] = aug[i][n] / aug[i][i];
    return true;
}

Mat inverse(const Mat& m) {
    Mat inv(m.n);
    Vec col(m.n), sol(m.n);
    for (int j = 0; j < m.n; ++j) {
        for (int i = 0; i < m.n; ++i) col[i] = (i == j) ? 1.0 : 0.0;
        if (!solve(m, col, sol)) fail_numeric("inverse: singular matrix");
        inv.set_col(j, sol);
    }
    return inv;
}

Vec generalized_cross(const std::vector<Vec>& edges) {
    const int n = static_cast<int>(edges.size()) + 1;
    Vec out(n);
    if (n == 2) {
        out[0] = edges[0][1];
        out[1] = -edges[0][0];
        return out;
    }
    // N_i = cofactor of e_i in the matrix [e_i | a_0 | ... | a_{n-2}].
    Mat m(n);
    for (size_t k = 0; k < edges.size(); ++k) m.set_col(static_cast<int>(k) + 1, edges[k]);
    for (int i = 0; i < n; ++i) {
        Vec e = Vec::axis(n, i);
        m.set_col(0, e);
        out[i] = det(m);
    }
    return out;
}

double simplex_volume(const std::vector<Vec>& verts) {
    const int n = static_cast<int>(verts.size()) - 1;
    Mat edges(n);
    for (int j = 0; j < n; ++j) edges.set_col(j, verts[j + 1] - verts[0]);
    return det(edges) / factorial(n);
}

bool barycentric(const std::vector<Vec>& verts, const Vec& p, std::vector<double>& lambda) {
    const int n = static_cast<int>(verts.size()) - 1;
    Mat edges(n);
    for (int j = 0; j < n; ++j) edges.set_col(j, verts[j + 1] - verts[0]);
    Vec rhs = p - verts[0];
    Vec sol(n);
    if (!solve(edges, rhs, sol)) return false;
    lambda.assign(n + 1, 0.0);
    double rest = 1.0;
    for (int j = 0; j < n; ++j) {
        lambda[j + 1] = sol[j];
        rest -= sol[j];
    }
    lambda[0] = rest;
    return true;
}

// Closest point on the convex hull: the minimizer lies in the relative
// interior of some face, so enumerate vertex subsets (at most 2^5 here)
// and keep projections with nonnegative barycentric weights.
double point_simplex_distance(const Vec& p, const std::vector<Vec>& verts) {
    const int m = static_cast<int>(verts.size());
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < m; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        const int k = static_cast<int>(idx.size()) - 1;
        if (k == 0) {
            best = std::min(best, (p - verts[idx[0]]).norm());
            continue;
        }
        // Solve the Gram system for affine coefficients of the projection.
        Mat g(k);
        Vec rhs(k);
        const Vec& v0 = verts[idx[0]];
        for (int i = 0; i < k; ++i) {
            Vec ei = verts[idx[i + 1]] - v0;
            rhs[i] = ei.dot(p - v0);
            for (int j = 0; j < k; ++j) g.a[i][j] = ei.dot(verts[idx[j + 1]] - v0);
        }
        Vec coef(k);
        if (!solve(g, rhs, coef)) continue;
        double l0 = 1.0;
        bool ok = true;
        for (int i = 0; i < k; ++i) {
            if (coef[i] < -1e-12) ok = false;
            l0 -= coef[i];
        }
        if (!ok || l0 < -1e-12) continue;
        Vec proj = v0;
        for (int i = 0; i < k; ++i) proj += coef[i] * (verts[idx[i + 1]] - v0);
        best = std::min(best, (p - proj).norm());
    }
    return best;
}

}  // namespace weaklim
