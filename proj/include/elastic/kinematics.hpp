#pragma once

#include <complex>
#include <optional>

#include "elastic/model.hpp"

namespace elastic {

using cplx = std::complex<double>;

inline constexpr double kGlancingTol = 1e-9;

// (tau, |xi'|) with tau < 0.
struct BoundaryCovector {
    double tau = -1.0;
    double xi = 0.0;
};

void validate_covector(const BoundaryCovector& bc);

enum class Direction { Out, In };
enum class SpeedKind { P, S };
enum class WavenumberKind { PropagatingOut, PropagatingIn, Evanescent };

struct VerticalWavenumber {
    cplx value;
    WavenumberKind kind;
    bool evanescent() const { return kind == WavenumberKind::Evanescent; }
};

VerticalWavenumber vertical_wavenumber(double c, const BoundaryCovector& bc, Direction dir,
                                       double tol = kGlancingTol);
VerticalWavenumber vertical_wavenumber(const Material& m, const BoundaryCovector& bc,
                                       SpeedKind mode, Direction dir, double tol = kGlancingTol);

// Positive root or i*kappa, the boundary-frame "out" value used for flux weights.
cplx out_root(double c, const BoundaryCovector& bc, double tol = kGlancingTol);

enum class SideRegion { Hyperbolic, PGlancing, Mixed, SGlancing, Elliptic };
enum class InterfaceCase { HH, HM, MM, HE, ME, EE };

const char* to_string(SideRegion r);
const char* to_string(InterfaceCase c);

SideRegion classify_side(const Material& m, const BoundaryCovector& bc, double tol = kGlancingTol);

struct InterfaceClass {
    InterfaceCase kind = InterfaceCase::HH;
    SideRegion plus = SideRegion::Hyperbolic;
    SideRegion minus = SideRegion::Hyperbolic;
    bool swapped = false;       // true when the plus side is the less hyperbolic one (MH -> HM)
    bool near_glancing = false; // within 1e3 * tol of a glancing set on some side
};

InterfaceClass classify_interface(const Material& plus, const Material& minus,
                                  const BoundaryCovector& bc, double tol = kGlancingTol);

// Refraction angle for the same horizontal slowness; nullopt means total reflection.
std::optional<double> snell(double theta_in, double c_in, double c_out, double tol = kGlancingTol);

// arcsin(c_in / c_out), or nullopt when c_out <= c_in.
std::optional<double> critical_angle(double c_in, double c_out);

}  // namespace elastic
