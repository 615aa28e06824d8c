#pragma once

#include <array>

#include <Eigen/Dense>

#include "elastic/kinematics.hpp"

namespace elastic {

inline constexpr double kSingularTol = 1e-8;

// Leading potential amplitudes of one wave family.
struct PotentialAmplitudes {
    cplx p{0.0, 0.0};
    cplx sv{0.0, 0.0};
    cplx sh{0.0, 0.0};
};

enum class Side { Plus, Minus };
enum class SymbolTag { Uout, Uin, Mout, Min };

struct SymbolMatrix3 {
    Eigen::Matrix3cd m;
    SymbolTag tag;
};

// Columns (P, SV); rows (u1, u3, (Nu)1, (Nu)3).
struct AMatrix {
    Eigen::Matrix<cplx, 4, 2> m;
    Side side;
    Direction dir;
};

// Dirichlet and Neumann boundary symbols acting on (SH, SV, P) potentials.
// The bc overloads work in the rotated frame xi2 = 0.
SymbolMatrix3 assemble_U(const Material& m, const BoundaryCovector& bc, Direction dir,
                         double tol = kGlancingTol);
SymbolMatrix3 assemble_M(const Material& m, const BoundaryCovector& bc, Direction dir,
                         double tol = kGlancingTol);
SymbolMatrix3 assemble_U(const Material& m, double tau, double xi1, double xi2, Direction dir,
                         double tol = kGlancingTol);
SymbolMatrix3 assemble_M(const Material& m, double tau, double xi1, double xi2, Direction dir,
                         double tol = kGlancingTol);

// Closed forms for the two determinants.
cplx det_U_closed(const Material& m, const BoundaryCovector& bc, double tol = kGlancingTol);
cplx det_M_closed(const Material& m, const BoundaryCovector& bc, double tol = kGlancingTol);

// The P-SV matching block. On the plus side "in" waves travel down (toward
// the interface) and "out" waves travel up; the minus side mirrors this.
// Evanescent columns ignore the direction and decay away from the interface.
AMatrix assemble_A(const Material& m, const BoundaryCovector& bc, Direction dir,
                   Side side = Side::Plus, double tol = kGlancingTol);

struct CauchyDeterminants {
    cplx full;       // det(A_in, A_out), 4x4
    cplx sum_block;  // rows (u1, Nu3) of (S_P, D_SV)
    cplx diff_block; // rows (u3, Nu1) of (S_SV, D_P)
};

CauchyDeterminants cauchy_determinants(const Material& m, const BoundaryCovector& bc,
                                       double tol = kGlancingTol);

struct ScatterResult {
    PotentialAmplitudes out_plus, out_minus;    // propagating outgoing channels
    PotentialAmplitudes evan_plus, evan_minus;  // evanescent channels
    // Decay rates kappa (per unit |tau|) of the evanescent channels, 0 when propagating.
    std::array<double, 3> decay_plus{0.0, 0.0, 0.0};
    std::array<double, 3> decay_minus{0.0, 0.0, 0.0};
    InterfaceClass cls;
    SideRegion region = SideRegion::Hyperbolic;  // free-surface results only
    double energy_residual = 0.0;  // relative to the incident flux
    double incident_flux = 0.0;
    double condition = 0.0;        // reported when above 1e8, else 0
};

ScatterResult solve_interface(const Material& plus, const Material& minus,
                              const BoundaryCovector& bc, const PotentialAmplitudes& in_plus,
                              const PotentialAmplitudes& in_minus, double tol = kGlancingTol);

// Medium below a traction-free surface; its waves follow the minus-side
// convention and the results land in out_minus / evan_minus.
ScatterResult solve_free_surface(const Material& m, const BoundaryCovector& bc,
                                 const PotentialAmplitudes& incoming, double tol = kGlancingTol);

enum class BvpKind { Dirichlet, Neumann };

// Data and solution are ordered (SH, SV, P) as the symbol columns.
PotentialAmplitudes solve_bvp(const Material& m, const BoundaryCovector& bc, BvpKind kind,
                              const Eigen::Vector3cd& data, double tol = kGlancingTol);

struct CauchyResult {
    PotentialAmplitudes in, out;  // evanescent amplitudes are stored in `out`
    double residual = 0.0;
};

CauchyResult solve_cauchy(const Material& m, const BoundaryCovector& bc, const Eigen::Vector3cd& f,
                          const Eigen::Vector3cd& h, double tol = kGlancingTol);

// Forward map of (in, out) amplitudes to Cauchy data (f, h) = (u, Nu) on the boundary.
std::pair<Eigen::Vector3cd, Eigen::Vector3cd> cauchy_data(const Material& m, const BoundaryCovector& bc,
                                                         const PotentialAmplitudes& in,
                                                         const PotentialAmplitudes& out,
                                                         double tol = kGlancingTol);

// Cotangent (Knott) form for a wave incident from the plus side, HH only.
ScatterResult knott_form(const Material& plus, const Material& minus, const BoundaryCovector& bc,
                         const PotentialAmplitudes& incident, double tol = kGlancingTol);

// Energy identity in cotangent form for a Knott solution.
double knott_energy_residual(const Material& plus, const Material& minus,
                             const BoundaryCovector& bc, const PotentialAmplitudes& incident,
                             const ScatterResult& r);

struct AcousticResult {
    cplx out_plus{0.0, 0.0}, out_minus{0.0, 0.0};
    bool evanescent_plus = false, evanescent_minus = false;
    double energy_residual = 0.0;
};

AcousticResult acoustic_interface(double c_plus, double c_minus, const BoundaryCovector& bc,
                                  cplx a_plus, cplx a_minus, double tol = kGlancingTol);

struct ControlResult {
    PotentialAmplitudes in, out;        // unknown side; evanescent amplitudes in `out`
    PotentialAmplitudes known_evanescent;  // byproduct evanescent amplitudes on the known side
    double det_abs = 0.0;
    double det_rel = 0.0;  // |det| over the product of row norms
};

ControlResult control_solve(const Material& plus, const Material& minus, const BoundaryCovector& bc,
                            Side known_side, const PotentialAmplitudes& known_in,
                            const PotentialAmplitudes& known_out, double tol = kGlancingTol,
                            double singular_tol = kSingularTol);

struct ChannelFlux {
    double p = 0.0, sv = 0.0, sh = 0.0;
    double total() const { return p + sv + sh; }
};

struct WaveSet {
    PotentialAmplitudes in_plus, out_plus, in_minus, out_minus;
};

struct FluxReport {
    ChannelFlux in_plus, out_plus, in_minus, out_minus;
    double incident = 0.0;
    double outgoing = 0.0;
    double residual = 0.0;  // (outgoing - incident) / incident, absolute when incident is 0
};

// Weights rho Re(xi3) for P/SV and mu Re(xi3)|xi3|^2 for SH.
FluxReport energy_flux(const Material& plus, const Material& minus, const BoundaryCovector& bc,
                       const WaveSet& waves, double tol = kGlancingTol);

}  // namespace elastic
