#include "elastic/kinematics.hpp"

#include <cmath>

namespace elastic {

void validate_covector(const BoundaryCovector& bc) {
    if (!(bc.tau < 0.0) || !std::isfinite(bc.tau))
        fail(ErrorCode::OutOfDomain, "covector needs tau < 0");
    if (!(bc.xi >= 0.0) || !std::isfinite(bc.xi))
        fail(ErrorCode::OutOfDomain, "covector needs |xi'| >= 0");
}

namespace {

// c^-2 tau^2 - xi^2 and the glancing test on it.
double root_argument(double c, const BoundaryCovector& bc, double tol) {
    double arg = bc.tau * bc.tau / (c * c) - bc.xi * bc.xi;
    if (std::abs(arg) < tol * (bc.tau * bc.tau + bc.xi * bc.xi))
        fail(ErrorCode::Glancing, "covector is glancing for this speed");
    return arg;
}

}  // namespace

VerticalWavenumber vertical_wavenumber(double c, const BoundaryCovector& bc, Direction dir,
                                       double tol) {
    validate_covector(bc);
    double arg = root_argument(c, bc, tol);
    if (arg < 0.0) return {cplx(0.0, std::sqrt(-arg)), WavenumberKind::Evanescent};
    double r = std::sqrt(arg);
    if (dir == Direction::Out) return {cplx(r, 0.0), WavenumberKind::PropagatingOut};
    return {cplx(-r, 0.0), WavenumberKind::PropagatingIn};
}

VerticalWavenumber vertical_wavenumber(const Material& m, const BoundaryCovector& bc,
                                       SpeedKind mode, Direction dir, double tol) {
    return vertical_wavenumber(mode == SpeedKind::P ? m.cp() : m.cs(), bc, dir, tol);
}

cplx out_root(double c, const BoundaryCovector& bc, double tol) {
    return vertical_wavenumber(c, bc, Direction::Out, tol).value;
}

const char* to_string(SideRegion r) {
    switch (r) {
        case SideRegion::Hyperbolic: return "Hyperbolic";
        case SideRegion::PGlancing: return "PGlancing";
        case SideRegion::Mixed: return "Mixed";
        case SideRegion::SGlancing: return "SGlancing";
        case SideRegion::Elliptic: return "Elliptic";
    }
    return "?";
}

const char* to_string(InterfaceCase c) {
    switch (c) {
        case InterfaceCase::HH: return "HH";
        case InterfaceCase::HM: return "HM";
        case InterfaceCase::MM: return "MM";
        case InterfaceCase::HE: return "HE";
        case InterfaceCase::ME: return "ME";
        case InterfaceCase::EE: return "EE";
    }
    return "?";
}

SideRegion classify_side(const Material& m, const BoundaryCovector& bc, double tol) {
    validate_covector(bc);
    double t2 = bc.tau * bc.tau, x2 = bc.xi * bc.xi, scale = tol * (t2 + x2);
    double ap = t2 / (m.cp() * m.cp()) - x2;
    double as = t2 / (m.cs() * m.cs()) - x2;
    if (std::abs(ap) < scale) return SideRegion::PGlancing;
    if (std::abs(as) < scale) return SideRegion::SGlancing;
    if (ap > 0.0) return SideRegion::Hyperbolic;
    if (as > 0.0) return SideRegion::Mixed;
    return SideRegion::Elliptic;
}

namespace {

int rank(SideRegion r) {
    switch (r) {
        case SideRegion::Hyperbolic: return 0;
        case SideRegion::Mixed: return 1;
        default: return 2;
    }
}

}  // namespace

InterfaceClass classify_interface(const Material& plus, const Material& minus,
                                  const BoundaryCovector& bc, double tol) {
    InterfaceClass out;
    out.plus = classify_side(plus, bc, tol);
    out.minus = classify_side(minus, bc, tol);
    auto glancing = [](SideRegion r) {
        return r == SideRegion::PGlancing || r == SideRegion::SGlancing;
    };
    if (glancing(out.plus) || glancing(out.minus))
        fail(ErrorCode::GlancingProximity, "covector is glancing on one side of the interface");
    out.near_glancing = glancing(classify_side(plus, bc, tol * 1e3)) ||
                        glancing(classify_side(minus, bc, tol * 1e3));
    int a = rank(out.plus), b = rank(out.minus);
    out.swapped = a > b;
    if (out.swapped) std::swap(a, b);
    static const InterfaceCase table[3][3] = {
        {InterfaceCase::HH, InterfaceCase::HM, InterfaceCase::HE},
        {InterfaceCase::HM, InterfaceCase::MM, InterfaceCase::ME},
        {InterfaceCase::HE, InterfaceCase::ME, InterfaceCase::EE}};
    out.kind = table[a][b];
    return out;
}

std::optional<double> snell(double theta_in, double c_in, double c_out, double tol) {
    if (!(theta_in >= 0.0) || !(theta_in < M_PI / 2))
        fail(ErrorCode::OutOfDomain, "incidence angle must lie in [0, pi/2)");
    double s = c_out / c_in * std::sin(theta_in);
    if (std::abs(1.0 - s) < tol) fail(ErrorCode::GlancingProximity, "refracted ray is grazing");
    if (s > 1.0) return std::nullopt;
    return std::asin(s);
}

std::optional<double> critical_angle(double c_in, double c_out) {
    if (c_out <= c_in) return std::nullopt;
    return std::asin(c_in / c_out);
}

}  // namespace elastic
