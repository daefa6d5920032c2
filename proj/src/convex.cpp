#include "weaklim/convex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace weaklim {

std::vector<double> make_log_grid(double lo, double hi, int count) {
    if (lo <= 0 || hi <= lo || count < 2) fail_invalid("make_log_grid: bad range");
    std::vector<double> g(count);
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
    return g;
}

std::vector<double> default_grid() { return make_log_grid(1e-6, 1e6, 2048); }

ConvexFunctionSpec make_builtin(BuiltinConvex which, double param) {
    ConvexFunctionSpec s;
    s.grid = default_grid();
    switch (which) {
        case BuiltinConvex::PhiBalanced:
            s.name = "phi_balanced";
            s.evaluator = [](double t) { return t + 1.0 / t - 1.0; };
            s.derivative = [](double t) { return 1.0 - 1.0 / (t * t); };
            s.flags = {true, false, true};
            break;
        case BuiltinConvex::PhiIdentityish:
            s.name = "phi_identityish";
            s.evaluator = [](double t) { return t * t + 1.0 / t; };
            s.derivative = [](double t) { return 2.0 * t - 1.0 / (t * t); };
            s.flags = {true, true, true};
            break;
        case BuiltinConvex::PowerA:
            if (param <= 1.0) fail_invalid("power_A: exponent must exceed 1");
            s.name = "power_A";
            s.params = {param};
            s.evaluator = [param](double t) { return std::pow(t, param); };
            s.derivative = [param](double t) { return param * std::pow(t, param - 1.0); };
            s.domain_includes_zero = true;
            s.flags = {false, true, true};
            break;
        case BuiltinConvex::PlogA:
            s.name = "plog_A";
            s.evaluator = [](double t) { return t * std::log(std::exp(1.0) + t); };
            s.derivative = [](double t) {
                double e = std::exp(1.0);
                return std::log(e + t) + t / (e + t);
            };
            s.domain_includes_zero = true;
            s.flags = {false, true, true};
            break;
    }
    FlagReport rep = verify_flags(s);
    s.doubling_constant = rep.doubling_constant;
    return s;
}

ConvexFunctionSpec make_builtin(const std::string& name, double param) {
    if (name == "phi_balanced") return make_builtin(BuiltinConvex::PhiBalanced, param);
    if (name == "phi_identityish") return make_builtin(BuiltinConvex::PhiIdentityish, param);
    if (name == "power_A") return make_builtin(BuiltinConvex::PowerA, param);
    if (name == "plog_A") return make_builtin(BuiltinConvex::PlogA, param);
    fail_invalid("make_builtin: unknown name " + name);
}

FlagReport verify_flags(const ConvexFunctionSpec& spec) {
    FlagReport rep;
    const auto& g = spec.grid;
    if (g.size() < 4) fail_invalid("verify_flags: grid too small");
    std::vector<double> fv(g.size());
    for (size_t i = 0; i < g.size(); ++i) {
        fv[i] = spec.evaluator(g[i]);
        if (!std::isfinite(fv[i])) fail_numeric("verify_flags: evaluator not finite at t=" + std::to_string(g[i]));
    }
    // midpoint convexity between grid neighbors at several spans
    for (size_t span : {1u, 2u, 7u, 31u}) {
        for (size_t i = 0; i + span < g.size(); i += 3) {
            double s = g[i], t = g[i + span];
            double mid = spec.evaluator(0.5 * (s + t));
            double bound = 0.5 * (fv[i] + fv[i + span]);
            double viol = (mid - bound) / (1.0 + std::abs(bound));
            rep.max_convexity_violation = std::max(rep.max_convexity_violation, viol);
        }
    }
    rep.midpoint_convex = rep.max_convexity_violation <= 1e-9;

    double f1 = spec.evaluator(1.0);
    rep.blow_up_ratio = fv.front() / std::max(f1, 1e-300);
    // the 1e-5 slack admits functions like t + 1/t whose ratio sits a
    // rounding term under the threshold at the default grid edge
    rep.derived.blow_up_at_zero = rep.blow_up_ratio > 1e6 * (1.0 - 1e-5);
    rep.superlinear_ratio = (fv.back() / g.back()) / std::max(f1, 1e-300);
    rep.derived.superlinear_at_infinity = rep.superlinear_ratio > 1e3;

    double dc = 0;
    for (size_t i = 0; i < g.size(); ++i) {
        if (2.0 * g[i] > g.back()) break;
        dc = std::max(dc, spec.evaluator(2.0 * g[i]) / fv[i]);
    }
    rep.doubling_constant = dc;
    rep.derived.doubling = std::isfinite(dc) && dc > 0;
    return rep;
}

namespace {

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
    constexpr double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return std::max(fc, fd);
}

}  // namespace

ConvexFunctionSpec legendre_conjugate(const ConvexFunctionSpec& a) {
    FlagReport rep = verify_flags(a);
    if (!rep.derived.superlinear_at_infinity)
        fail_numeric("legendre_conjugate: function is not superlinear, conjugate is infinite");

    auto grid = std::make_shared<std::vector<double>>(a.grid);
    auto eval = a.evaluator;
    ConvexFunctionSpec conj;
    conj.name = a.name + "_conjugate";
    conj.params = a.params;
    conj.grid = a.grid;
    conj.domain_includes_zero = true;
    conj.evaluator = [grid, eval](double s) {
        const auto& g = *grid;
        double best = s * g[0] - eval(g[0]);
        size_t bi = 0;
        for (size_t i = 1; i < g.size(); ++i) {
            double v = s * g[i] - eval(g[i]);
            if (v > best) {
                best = v;
                bi = i;
            }
        }
        double lo = g[bi > 0 ? bi - 1 : 0];
        double hi = g[std::min(bi + 1, g.size() - 1)];
        if (hi > lo) best = std::max(best, golden_max([&](double t) { return s * t - eval(t); }, lo, hi));
        return best;
    };
    conj.flags.superlinear_at_infinity = true;
    return conj;
}

double WeightFunction::b(double t) const {
    if (t <= 1.0) return 0.0;
    if (t <= grid.front()) return b_values.front();
    if (t >= grid.back()) return b_values.back();
    // binary search in log t; values interpolated linearly in log t
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    size_t hi = it - grid.begin();
    size_t lo = hi - 1;
    double w = (std::log(t) - std::log(grid[lo])) / (std::log(grid[hi]) - std::log(grid[lo]));
    return b_values[lo] * (1.0 - w) + b_values[hi] * w;
}

WeightFunction construct_b(const ConvexFunctionSpec& a_spec, const ConvexFunctionSpec& phi,
                           double cap_threshold) {
    const auto& g = a_spec.grid;
    if (g.size() < 16) fail_invalid("construct_b: grid too coarse");

    std::vector<double> a(g.size());
    for (size_t i = 0; i < g.size(); ++i) {
        a[i] = a_spec.evaluator(g[i]) / g[i];
        if (g[i] > 1.0 && a[i] <= 0) fail_numeric("construct_b: a(t) = A(t)/t not positive at t=" + std::to_string(g[i]));
    }

    // psi_bar, psi and b_bar live on the part of the grid above 1
    std::vector<double> bbar(g.size(), 0.0);
    size_t t0 = g.size();  // first index with psi_bar <= 1
    for (size_t i = 0; i < g.size(); ++i) {
        if (g[i] <= 1.0) continue;
        double psibar = a[i] / std::log(g[i]);
        if (psibar <= 1.0) {
            t0 = i;
            break;
        }
    }
    double running = 1.0;
    for (size_t i = 0; i < g.size(); ++i) {
        if (g[i] <= 1.0) {
            bbar[i] = 0.0;
            continue;
        }
        double psi;
        if (i < t0) {
            psi = 1.0;
        } else {
            running = std::min(running, a[i] / std::log(g[i]));
            psi = running;
        }
        bbar[i] = psi * std::log(g[i]);
    }

    // b = suffix infimum, making the weight monotone
    std::vector<double> b = bbar;
    for (size_t i = g.size() - 1; i-- > 0;) b[i] = std::min(b[i], b[i + 1]);

    // cap by (A*)^{-1}(phi(1/t)) for large t
    ConvexFunctionSpec conj = legendre_conjugate(a_spec);
    auto conj_inverse = [&conj](double u) {
        double lo = 0.0, hi = 1.0;
        while (conj.evaluator(hi) < u && hi < 1e150) hi *= 2.0;
        for (int it = 0; it < 200 && (hi - lo) > 1e-12 * (1.0 + hi); ++it) {
            double mid = 0.5 * (lo + hi);
            (conj.evaluator(mid) < u ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    for (size_t i = 0; i < g.size(); ++i) {
        if (g[i] < cap_threshold) continue;
        double cap = conj_inverse(phi.evaluator(1.0 / g[i]));
        b[i] = std::min(b[i], cap);
    }
    for (size_t i = g.size() - 1; i-- > 0;) b[i] = std::min(b[i], b[i + 1]);
    for (double& v : b) v = std::max(v, 0.0);

    WeightFunction w;
    w.grid = g;
    w.b_values = std::move(b);
    std::ostringstream prov;
    prov << "A=" << a_spec.name << " phi=" << phi.name << " cap_threshold=" << cap_threshold;
    w.provenance = prov.str();
    return w;
}

std::string spec_to_json(const ConvexFunctionSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << "{\"name\":\"" << spec.name << "\",\"params\":[";
    for (size_t i = 0; i < spec.params.size(); ++i) os << (i ? "," : "") << spec.params[i];
    os << "],\"grid_lo\":" << spec.grid.front() << ",\"grid_hi\":" << spec.grid.back()
       << ",\"grid_n\":" << spec.grid.size() << ",\"flags\":{\"blow_up_at_zero\":"
       << (spec.flags.blow_up_at_zero ? "true" : "false")
       << ",\"superlinear_at_infinity\":" << (spec.flags.superlinear_at_infinity ? "true" : "false")
       << ",\"doubling\":" << (spec.flags.doubling ? "true" : "false") << "}}";
    return os.str();
}

void weight_to_csv(const WeightFunction& w, const std::string& path) {
    std::ofstream os(path);
    if (!os) fail_io("cannot open for writing: " + path);
    os.precision(17);
    os << "t,b\n";
    for (size_t i = 0; i < w.grid.size(); ++i) os << w.grid[i] << ',' << w.b_values[i] << '\n';
    if (!os.good()) fail_io("write failed: " + path);
}

}  // namespace weaklim
