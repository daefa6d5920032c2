#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace weaklim {

// Supported ambient dimensions are 2..4; everything below uses a runtime
// dimension with fixed storage so vectors never allocate.
inline constexpr int kMaxDim = 4;

enum class ErrorCode { InvalidArgument = 2, Numerical = 3, Io = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); }
[[noreturn]] inline void fail_numeric(const std::string& msg) { throw Error(ErrorCode::Numerical, msg); }
[[noreturn]] inline void fail_io(const std::string& msg) { throw Error(ErrorCode::Io, msg); }

struct Vec {
    int n = 0;
    std::array<double, kMaxDim> x{};

    Vec() = default;
    explicit Vec(int dim) : n(dim) { x.fill(0.0); }
    Vec(int dim, const double* data) : n(dim) {
        x.fill(0.0);
        for (int i = 0; i < dim; ++i) x[i] = data[i];
    }
    static Vec of2(double a, double b) {
        Vec v(2);
        v.x = {a, b, 0, 0};
        return v;
    }
    static Vec of3(double a, double b, double c) {
        Vec v(3);
        v.x = {a, b, c, 0};
        return v;
    }
    static Vec axis(int dim, int i, double scale = 1.0) {
        Vec v(dim);
        v.x[i] = scale;
        return v;
    }

    double& operator[](int i) { return x[i]; }
    double operator[](int i) const { return x[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) x[i] += o.x[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) x[i] -= o.x[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) x[i] *= s;
        return *this;
    }
    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator*(double s, Vec a) { return a *= s; }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < n; ++i) s += x[i] * o.x[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    double norm_inf() const {
        double s = 0;
        for (int i = 0; i < n; ++i) s = std::max(s, std::abs(x[i]));
        return s;
    }
};

// Row-major n-by-n matrix; column j of Df holds d f / d x_j.
struct Mat {
    int n = 0;
    std::array<std::array<double, kMaxDim>, kMaxDim> a{};

    Mat() = default;
    explicit Mat(int dim) : n(dim) {
        for (auto& r : a) r.fill(0.0);
    }
    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m.a[i][i] = 1.0;
        return m;
    }
    static Mat diag(int dim, const Vec& d) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m.a[i][i] = d[i];
        return m;
    }

    double& operator()(int i, int j) { return a[i][j]; }
    double operator()(int i, int j) const { return a[i][j]; }

    Vec col(int j) const {
        Vec v(n);
        for (int i = 0; i < n; ++i) v[i] = a[i][j];
        return v;
    }
    void set_col(int j, const Vec& v) {
        for (int i = 0; i < n; ++i) a[i][j] = v[i];
    }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a[i][j] += o.a[i][j];
        return *this;
    }
    Mat& operator*=(double s) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a[i][j] *= s;
        return *this;
    }
    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator*(Mat a, double s) { return a *= s; }

    Vec apply(const Vec& v) const {
        Vec r(n);
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int j = 0; j < n; ++j) s += a[i][j] * v[j];
            r[i] = s;
        }
        return r;
    }
    Mat mul(const Mat& o) const {
        Mat r(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0;
                for (int k = 0; k < n; ++k) s += a[i][k] * o.a[k][j];
                r.a[i][j] = s;
            }
        return r;
    }
    Mat transposed() const {
        Mat r(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r.a[i][j] = a[j][i];
        return r;
    }
    double frobenius() const {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += a[i][j] * a[i][j];
        return std::sqrt(s);
    }
    double max_abs() const {
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s = std::max(s, std::abs(a[i][j]));
        return s;
    }
};

double det(const Mat& m);

// Matrix of signed (n-1)x(n-1) minors, satisfying  M * cof(M)^T = det(M) * I.
Mat cofactor_matrix(const Mat& m);

// d/dM [cof(M)]  contracted with a direction  dM; entries are the sums of
// signed (n-2)-minors. Needed by nodal energy gradients.
Mat cofactor_directional(const Mat& m, const Mat& dm);

// Solve m * x = rhs by Gaussian elimination with partial pivoting.
// Returns false when the pivot falls below `tol` times the matrix scale.
bool solve(const Mat& m, const Vec& rhs, Vec& out, double tol = 1e-13);

Mat inverse(const Mat& m);

// The vector N with det([v | a_0 | ... | a_{n-2}]) = v . N for every v.
// For n=2 this is the clockwise rotation of a_0; for n=3 the cross product.
Vec generalized_cross(const std::vector<Vec>& edges);

struct Box {
    Vec lo, hi;

    int dim() const { return lo.n; }
    double volume() const {
        double v = 1;
        for (int i = 0; i < lo.n; ++i) v *= hi[i] - lo[i];
        return v;
    }
    bool contains(const Vec& p, double tol = 0.0) const {
        for (int i = 0; i < p.n; ++i)
            if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
        return true;
    }
    void expand(const Vec& p) {
        for (int i = 0; i < p.n; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    void pad(double margin) {
        for (int i = 0; i < lo.n; ++i) {
            lo[i] -= margin;
            hi[i] += margin;
        }
    }
};

// Volume of the simplex spanned by verts (d+1 points in R^d).
double simplex_volume(const std::vector<Vec>& verts);

// Barycentric coordinates of p with respect to the simplex `verts`
// ((n+1) points). Returns false if the simplex is degenerate.
bool barycentric(const std::vector<Vec>& verts, const Vec& p, std::vector<double>& lambda);

// Euclidean distance from p to the convex hull of `verts` (any number of
// points up to kMaxDim + 1, spanning a simplex of any dimension).
double point_simplex_distance(const Vec& p, const std::vector<Vec>& verts);

double factorial(int k);

}  // namespace weaklim
