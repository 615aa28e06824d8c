#include "elastic/surface_waves.hpp"

#include <cmath>
#include <vector>

#include "elastic/coefficients.hpp"

namespace elastic {

namespace {

// Bisection down to a bracket of width tol, assuming f(lo) and f(hi) differ in sign.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
    double flo = f(lo);
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double evaluate_rayleigh(double s, const Material& m) {
    if (!(s >= 0.0 && s <= 1.0)) fail(ErrorCode::OutOfDomain, "Rayleigh variable must lie in [0, 1]");
    double r = m.cs() / m.cp();
    return (s - 2.0) * (s - 2.0) - 4.0 * std::sqrt(1.0 - s) * std::sqrt(1.0 - r * r * s);
}

RayleighResult find_rayleigh_speed(const Material& m) {
    auto f = [&](double s) { return evaluate_rayleigh(s, m); };
    // R < 0 just above 0 (R ~ -2(1 - r^2) s) and R(1) = 1.
    const int n = 2048;
    double lo = 0.0, hi = 0.0;
    double prev = f(1.0 / n);
    if (prev >= 0.0) fail(ErrorCode::RootNotBracketed, "Rayleigh function is not negative near 0");
    for (int i = 2; i <= n; ++i) {
        double s = static_cast<double>(i) / n, v = f(s);
        if (v > 0.0) {
            lo = static_cast<double>(i - 1) / n;
            hi = s;
            break;
        }
        prev = v;
    }
    if (hi == 0.0) fail(ErrorCode::RootNotBracketed, "no sign change of the Rayleigh function");
    double s0 = bisect(f, lo, hi, 1e-13);
    // Newton polish, kept inside the bracket.
    for (int it = 0; it < 4; ++it) {
        double h = 1e-7, d = (f(s0 + h) - f(s0 - h)) / (2.0 * h);
        if (d == 0.0) break;
        double next = s0 - f(s0) / d;
        if (next <= lo || next >= hi) break;
        s0 = next;
    }
    return {s0, m.cs() * std::sqrt(s0)};
}

double stoneley_function(const Material& plus, const Material& minus, double c) {
    BoundaryCovector bc{-c, 1.0};
    const double tol = 1e-15;
    auto ap = assemble_A(plus, bc, Direction::Out, Side::Plus, tol).m;
    auto am = assemble_A(minus, bc, Direction::Out, Side::Minus, tol).m;
    Eigen::Matrix4cd a;
    a << ap, -am;
    return a.determinant().real() / (c * c * c * c);
}

std::optional<StoneleyResult> find_stoneley_speed(const Material& plus, const Material& minus) {
    double cref = std::min(plus.cs(), minus.cs());
    auto f = [&](double s) { return stoneley_function(plus, minus, cref * std::sqrt(s)); };
    // Uniform grid plus a logarithmic approach to s = 1, where roots for nearly
    // equal shear speeds crowd.
    std::vector<double> grid;
    const int n = 2048;
    for (int i = 1; i < n; ++i) grid.push_back(static_cast<double>(i) / n);
    for (int k = 1; k <= 40; ++k) grid.push_back(1.0 - std::pow(10.0, -3.0 - 0.25 * k));
    double prev_s = grid.front(), prev = f(prev_s);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double s = grid[i], v = f(s);
        if ((v > 0.0) != (prev > 0.0)) {
            double root = bisect(f, prev_s, s, 1e-15);
            return StoneleyResult{root, cref * std::sqrt(root)};
        }
        prev_s = s;
        prev = v;
    }
    return std::nullopt;
}

}  // namespace elastic
