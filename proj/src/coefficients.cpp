#include "elastic/coefficients.hpp"

#include <cmath>
#include <vector>

namespace elastic {

namespace {

using Vec4 = Eigen::Matrix<cplx, 4, 1>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Mat2 = Eigen::Matrix<cplx, 2, 2>;
using Vec2 = Eigen::Matrix<cplx, 2, 1>;

// Matching-condition column (u1, u3, Nu1, Nu3) of a plane potential with
// vertical wavenumber kz in the physical frame (z pointing from the plus
// side into the minus side).
Vec4 pv_column(const Material& m, double tau, double xi1, cplx kz, SpeedKind mode) {
    double B = 2.0 * xi1 * xi1 - tau * tau / (m.cs() * m.cs());
    Vec4 c;
    if (mode == SpeedKind::P)
        c << xi1, kz, 2.0 * m.mu * xi1 * kz, -m.mu * B;
    else
        c << -kz, xi1, m.mu * B, 2.0 * m.mu * xi1 * kz;
    return c;
}

// (u2, Nu2) column of an SH potential.
Vec2 sh_column(const Material& m, cplx kz) {
    Vec2 c;
    c << kz, m.mu * kz * kz;
    return c;
}

double sign(Side s) { return s == Side::Plus ? 1.0 : -1.0; }

// Physical vertical wavenumber of the outgoing (or evanescent) wave for the
// boundary-frame root x (positive real or i*kappa).
cplx kz_out(Side s, cplx x) { return s == Side::Plus ? -x : x; }
cplx kz_in(Side s, cplx x) { return -kz_out(s, x); }

struct SideWaves {
    const Material* m;
    Side side;
    cplx xp, xs;
    bool p_prop, s_prop;
};

SideWaves side_waves(const Material& m, Side side, const BoundaryCovector& bc, double tol) {
    auto vp = vertical_wavenumber(m.cp(), bc, Direction::Out, tol);
    auto vs = vertical_wavenumber(m.cs(), bc, Direction::Out, tol);
    return {&m, side, vp.value, vs.value, !vp.evanescent(), !vs.evanescent()};
}

bool nonzero(cplx a) { return a != cplx(0.0, 0.0); }

template <typename M>
double row_norm_product(const M& a) {
    double prod = 1.0;
    for (int i = 0; i < a.rows(); ++i) prod *= a.row(i).norm();
    return prod;
}

void split_channels(const SideWaves& w, const PotentialAmplitudes& amps, PotentialAmplitudes& out,
                    PotentialAmplitudes& evan, std::array<double, 3>& decay) {
    (w.p_prop ? out.p : evan.p) = amps.p;
    (w.s_prop ? out.sv : evan.sv) = amps.sv;
    (w.s_prop ? out.sh : evan.sh) = amps.sh;
    decay = {w.p_prop ? 0.0 : w.xp.imag(), w.s_prop ? 0.0 : w.xs.imag(),
             w.s_prop ? 0.0 : w.xs.imag()};
}

void check_incoming(const SideWaves& w, const PotentialAmplitudes& in, const char* where) {
    if ((!w.p_prop && nonzero(in.p)) || (!w.s_prop && (nonzero(in.sv) || nonzero(in.sh))))
        fail(ErrorCode::ForbiddenIncoming,
             std::string("incoming amplitude on an evanescent channel (") + where + " side)");
}

}  // namespace

SymbolMatrix3 assemble_U(const Material& m, double tau, double xi1, double xi2, Direction dir,
                         double tol) {
    BoundaryCovector bc{tau, std::hypot(xi1, xi2)};
    cplx xs = vertical_wavenumber(m.cs(), bc, dir, tol).value;
    cplx xp = vertical_wavenumber(m.cp(), bc, dir, tol).value;
    Eigen::Matrix3cd u;
    u << 0.0, -xs, xi1,
         xs, 0.0, xi2,
         -xi2, xi1, xp;
    return {u, dir == Direction::Out ? SymbolTag::Uout : SymbolTag::Uin};
}

SymbolMatrix3 assemble_M(const Material& m, double tau, double xi1, double xi2, Direction dir,
                         double tol) {
    BoundaryCovector bc{tau, std::hypot(xi1, xi2)};
    cplx xs = vertical_wavenumber(m.cs(), bc, dir, tol).value;
    cplx xp = vertical_wavenumber(m.cp(), bc, dir, tol).value;
    double mu = m.mu, rt2 = m.rho * tau * tau, x2 = bc.xi * bc.xi;
    Eigen::Matrix3cd n;
    n << -mu * xi1 * xi2, mu * (2.0 * xi1 * xi1 + xi2 * xi2) - rt2, 2.0 * mu * xi1 * xp,
         -mu * (xi1 * xi1 + 2.0 * xi2 * xi2) + rt2, mu * xi1 * xi2, 2.0 * mu * xi2 * xp,
         -2.0 * mu * xi2 * xs, 2.0 * mu * xi1 * xs, -2.0 * mu * x2 + rt2;
    return {n, dir == Direction::Out ? SymbolTag::Mout : SymbolTag::Min};
}

SymbolMatrix3 assemble_U(const Material& m, const BoundaryCovector& bc, Direction dir, double tol) {
    return assemble_U(m, bc.tau, bc.xi, 0.0, dir, tol);
}

SymbolMatrix3 assemble_M(const Material& m, const BoundaryCovector& bc, Direction dir, double tol) {
    return assemble_M(m, bc.tau, bc.xi, 0.0, dir, tol);
}

cplx det_U_closed(const Material& m, const BoundaryCovector& bc, double tol) {
    cplx xs = out_root(m.cs(), bc, tol), xp = out_root(m.cp(), bc, tol);
    return xs * (bc.xi * bc.xi + xs * xp);
}

cplx det_M_closed(const Material& m, const BoundaryCovector& bc, double tol) {
    cplx xs = out_root(m.cs(), bc, tol), xp = out_root(m.cp(), bc, tol);
    double mu = m.mu, rho = m.rho, t2 = bc.tau * bc.tau, x2 = bc.xi * bc.xi;
    return -(mu * x2 - rho * t2) *
           (4.0 * x2 * mu * mu * (xp * xs + x2) - 4.0 * mu * rho * t2 * x2 + rho * rho * t2 * t2);
}

AMatrix assemble_A(const Material& m, const BoundaryCovector& bc, Direction dir, Side side,
                   double tol) {
    SideWaves w = side_waves(m, side, bc, tol);
    auto kz = [&](cplx x, bool prop) {
        if (!prop || dir == Direction::Out) return kz_out(side, x);
        return kz_in(side, x);
    };
    AMatrix a{{}, side, dir};
    a.m.col(0) = pv_column(m, bc.tau, bc.xi, kz(w.xp, w.p_prop), SpeedKind::P);
    a.m.col(1) = pv_column(m, bc.tau, bc.xi, kz(w.xs, w.s_prop), SpeedKind::S);
    return a;
}

CauchyDeterminants cauchy_determinants(const Material& m, const BoundaryCovector& bc, double tol) {
    auto ain = assemble_A(m, bc, Direction::In, Side::Plus, tol).m;
    auto aout = assemble_A(m, bc, Direction::Out, Side::Plus, tol).m;
    Mat4 full;
    full << ain, aout;
    Eigen::Matrix<cplx, 4, 2> s = 0.5 * (ain + aout), d = 0.5 * (aout - ain);
    Mat2 b1, b2;
    b1 << s(0, 0), d(0, 1), s(3, 0), d(3, 1);
    b2 << s(1, 1), d(1, 0), s(2, 1), d(2, 0);
    return {full.determinant(), b1.determinant(), b2.determinant()};
}

FluxReport energy_flux(const Material& plus, const Material& minus, const BoundaryCovector& bc,
                       const WaveSet& waves, double tol) {
    auto weights = [&](const Material& m) {
        cplx xp = out_root(m.cp(), bc, tol), xs = out_root(m.cs(), bc, tol);
        return std::array<double, 3>{m.rho * xp.real(), m.rho * xs.real(),
                                     m.mu * xs.real() * std::norm(xs)};
    };
    auto wp = weights(plus), wm = weights(minus);
    auto flux = [](const std::array<double, 3>& w, const PotentialAmplitudes& a) {
        return ChannelFlux{w[0] * std::norm(a.p), w[1] * std::norm(a.sv), w[2] * std::norm(a.sh)};
    };
    FluxReport r;
    r.in_plus = flux(wp, waves.in_plus);
    r.out_plus = flux(wp, waves.out_plus);
    r.in_minus = flux(wm, waves.in_minus);
    r.out_minus = flux(wm, waves.out_minus);
    r.incident = r.in_plus.total() + r.in_minus.total();
    r.outgoing = r.out_plus.total() + r.out_minus.total();
    double diff = r.outgoing - r.incident;
    r.residual = r.incident > 0.0 ? diff / r.incident : diff;
    return r;
}

ScatterResult solve_interface(const Material& plus, const Material& minus,
                              const BoundaryCovector& bc, const PotentialAmplitudes& in_plus,
                              const PotentialAmplitudes& in_minus, double tol) {
    ScatterResult r;
    r.cls = classify_interface(plus, minus, bc, tol);
    SideWaves wp = side_waves(plus, Side::Plus, bc, tol);
    SideWaves wm = side_waves(minus, Side::Minus, bc, tol);
    check_incoming(wp, in_plus, "plus");
    check_incoming(wm, in_minus, "minus");
    double tau = bc.tau, xi = bc.xi;

    Mat4 a;
    a.col(0) = pv_column(plus, tau, xi, kz_out(Side::Plus, wp.xp), SpeedKind::P);
    a.col(1) = pv_column(plus, tau, xi, kz_out(Side::Plus, wp.xs), SpeedKind::S);
    a.col(2) = -pv_column(minus, tau, xi, kz_out(Side::Minus, wm.xp), SpeedKind::P);
    a.col(3) = -pv_column(minus, tau, xi, kz_out(Side::Minus, wm.xs), SpeedKind::S);
    Vec4 rhs = Vec4::Zero();
    if (wp.p_prop) rhs -= pv_column(plus, tau, xi, kz_in(Side::Plus, wp.xp), SpeedKind::P) * in_plus.p;
    if (wp.s_prop) rhs -= pv_column(plus, tau, xi, kz_in(Side::Plus, wp.xs), SpeedKind::S) * in_plus.sv;
    if (wm.p_prop) rhs += pv_column(minus, tau, xi, kz_in(Side::Minus, wm.xp), SpeedKind::P) * in_minus.p;
    if (wm.s_prop) rhs += pv_column(minus, tau, xi, kz_in(Side::Minus, wm.xs), SpeedKind::S) * in_minus.sv;

    cplx det = a.determinant();
    if (std::abs(det) < kSingularTol * row_norm_product(a)) {
        if (r.cls.kind == InterfaceCase::EE)
            fail(ErrorCode::StoneleySingular, "interface system is singular at a Stoneley root");
        fail(ErrorCode::SingularSystem, "interface system is singular");
    }
    Eigen::PartialPivLU<Mat4> lu(a);
    Vec4 x = lu.solve(rhs);
    double rc = lu.rcond();
    if (rc > 0.0 && 1.0 / rc > 1e8) r.condition = 1.0 / rc;

    Mat2 s;
    s.col(0) = sh_column(plus, kz_out(Side::Plus, wp.xs));
    s.col(1) = -sh_column(minus, kz_out(Side::Minus, wm.xs));
    Vec2 srhs = Vec2::Zero();
    if (wp.s_prop) srhs -= sh_column(plus, kz_in(Side::Plus, wp.xs)) * in_plus.sh;
    if (wm.s_prop) srhs += sh_column(minus, kz_in(Side::Minus, wm.xs)) * in_minus.sh;
    Vec2 y = s.partialPivLu().solve(srhs);

    split_channels(wp, {x(0), x(1), y(0)}, r.out_plus, r.evan_plus, r.decay_plus);
    split_channels(wm, {x(2), x(3), y(1)}, r.out_minus, r.evan_minus, r.decay_minus);

    FluxReport f = energy_flux(plus, minus, bc, {in_plus, r.out_plus, in_minus, r.out_minus}, tol);
    r.energy_residual = f.residual;
    r.incident_flux = f.incident;
    return r;
}

ScatterResult solve_free_surface(const Material& m, const BoundaryCovector& bc,
                                 const PotentialAmplitudes& incoming, double tol) {
    ScatterResult r;
    r.region = classify_side(m, bc, tol);
    SideWaves w = side_waves(m, Side::Minus, bc, tol);
    bool any = nonzero(incoming.p) || nonzero(incoming.sv) || nonzero(incoming.sh);
    if (r.region == SideRegion::Elliptic && any)
        fail(ErrorCode::ForbiddenIncoming, "no incoming waves exist in the elliptic region");
    check_incoming(w, incoming, "surface");
    if (!any) return r;

    double tau = bc.tau, xi = bc.xi;
    Mat2 a;
    a.col(0) = pv_column(m, tau, xi, kz_out(Side::Minus, w.xp), SpeedKind::P).tail<2>();
    a.col(1) = pv_column(m, tau, xi, kz_out(Side::Minus, w.xs), SpeedKind::S).tail<2>();
    Vec2 rhs = Vec2::Zero();
    if (w.p_prop) rhs -= pv_column(m, tau, xi, kz_in(Side::Minus, w.xp), SpeedKind::P).tail<2>() * incoming.p;
    if (w.s_prop) rhs -= pv_column(m, tau, xi, kz_in(Side::Minus, w.xs), SpeedKind::S).tail<2>() * incoming.sv;
    if (std::abs(a.determinant()) < kSingularTol * row_norm_product(a))
        fail(ErrorCode::RayleighSingular, "free-surface system is singular");
    Vec2 x = a.partialPivLu().solve(rhs);

    // Traction-free SH: mu kz^2 (SH_R + SH_I) = 0.
    split_channels(w, {x(0), x(1), -incoming.sh}, r.out_minus, r.evan_minus, r.decay_minus);
    FluxReport f = energy_flux(m, m, bc, {{}, {}, incoming, r.out_minus}, tol);
    r.energy_residual = f.residual;
    r.incident_flux = f.incident;
    return r;
}

PotentialAmplitudes solve_bvp(const Material& m, const BoundaryCovector& bc, BvpKind kind,
                              const Eigen::Vector3cd& data, double tol) {
    Eigen::Matrix3cd a = kind == BvpKind::Dirichlet ? assemble_U(m, bc, Direction::Out, tol).m
                                                    : assemble_M(m, bc, Direction::Out, tol).m;
    if (std::abs(a.determinant()) < kSingularTol * row_norm_product(a)) {
        if (kind == BvpKind::Neumann && classify_side(m, bc, tol) == SideRegion::Elliptic)
            fail(ErrorCode::RayleighSingular, "Neumann symbol vanishes at the Rayleigh speed");
        fail(ErrorCode::SingularSystem, "boundary symbol is singular");
    }
    Eigen::Vector3cd w = a.partialPivLu().solve(data);
    return {w(2), w(1), w(0)};
}

namespace {

Eigen::Vector3cd to_symbol_order(const PotentialAmplitudes& a) {
    return Eigen::Vector3cd(a.sh, a.sv, a.p);
}

}  // namespace

std::pair<Eigen::Vector3cd, Eigen::Vector3cd> cauchy_data(const Material& m, const BoundaryCovector& bc,
                                                         const PotentialAmplitudes& in,
                                                         const PotentialAmplitudes& out, double tol) {
    Eigen::Vector3cd wi = to_symbol_order(in), wo = to_symbol_order(out);
    Eigen::Vector3cd f = assemble_U(m, bc, Direction::In, tol).m * wi +
                         assemble_U(m, bc, Direction::Out, tol).m * wo;
    Eigen::Vector3cd h = assemble_M(m, bc, Direction::In, tol).m * wi +
                         assemble_M(m, bc, Direction::Out, tol).m * wo;
    return {f, h};
}

CauchyResult solve_cauchy(const Material& m, const BoundaryCovector& bc, const Eigen::Vector3cd& f,
                          const Eigen::Vector3cd& h, double tol) {
    auto ui = assemble_U(m, bc, Direction::In, tol).m, uo = assemble_U(m, bc, Direction::Out, tol).m;
    auto mi = assemble_M(m, bc, Direction::In, tol).m, mo = assemble_M(m, bc, Direction::Out, tol).m;
    SideRegion region = classify_side(m, bc, tol);
    bool p_prop = region == SideRegion::Hyperbolic;
    bool s_prop = region != SideRegion::Elliptic;

    // Unknown list: (channel index in (SH, SV, P), is_in).
    std::vector<std::pair<int, bool>> unknowns;
    for (int c = 0; c < 3; ++c) {
        bool prop = c == 2 ? p_prop : s_prop;
        if (prop) unknowns.push_back({c, true});
        unknowns.push_back({c, false});
    }
    Eigen::MatrixXcd a(6, unknowns.size());
    for (std::size_t k = 0; k < unknowns.size(); ++k) {
        auto [c, is_in] = unknowns[k];
        a.block(0, k, 3, 1) = is_in ? ui.col(c) : uo.col(c);
        a.block(3, k, 3, 1) = is_in ? mi.col(c) : mo.col(c);
    }
    Eigen::VectorXcd b(6);
    b << f, h;
    Eigen::VectorXcd x = a.colPivHouseholderQr().solve(b);

    CauchyResult r;
    Eigen::Vector3cd wi = Eigen::Vector3cd::Zero(), wo = Eigen::Vector3cd::Zero();
    for (std::size_t k = 0; k < unknowns.size(); ++k) {
        auto [c, is_in] = unknowns[k];
        (is_in ? wi : wo)(c) = x(k);
    }
    r.in = {wi(2), wi(1), wi(0)};
    r.out = {wo(2), wo(1), wo(0)};
    r.residual = (a * x - b).norm();
    return r;
}

namespace {

struct KnottAngles {
    double cot_pp, cot_sp, cot_pm, cot_sm;
};

double cot(double theta) { return std::cos(theta) / std::sin(theta); }

KnottAngles knott_angles(const Material& plus, const Material& minus, const BoundaryCovector& bc,
                         double tol) {
    validate_covector(bc);
    if (!(bc.xi > 0.0)) fail(ErrorCode::DegenerateAngle, "Knott form needs xi1 != 0");
    auto cls = classify_interface(plus, minus, bc, tol);
    if (cls.kind != InterfaceCase::HH) fail(ErrorCode::OutOfDomain, "Knott form needs the HH case");
    // Angles of the P wave on the plus side, then Snell's law for the rest.
    double theta_pp = std::asin(plus.cp() * bc.xi / std::abs(bc.tau));
    auto theta_sp = snell(theta_pp, plus.cp(), plus.cs(), tol);
    auto theta_pm = snell(theta_pp, plus.cp(), minus.cp(), tol);
    auto theta_sm = snell(theta_pp, plus.cp(), minus.cs(), tol);
    if (!theta_sp || !theta_pm || !theta_sm)
        fail(ErrorCode::OutOfDomain, "Knott form needs all four waves propagating");
    if (theta_pp <= 0.0 || *theta_sp <= 0.0 || *theta_pm <= 0.0 || *theta_sm <= 0.0)
        fail(ErrorCode::DegenerateAngle, "zero angle in the Knott form");
    return {cot(theta_pp), cot(*theta_sp), cot(*theta_pm), cot(*theta_sm)};
}

}  // namespace

ScatterResult knott_form(const Material& plus, const Material& minus, const BoundaryCovector& bc,
                         const PotentialAmplitudes& incident, double tol) {
    KnottAngles k = knott_angles(plus, minus, bc, tol);
    double mp = plus.mu, mm = minus.mu;
    double qp = 1.0 - k.cot_sp * k.cot_sp, qm = 1.0 - k.cot_sm * k.cot_sm;
    // Rows (u1, u3) divided by xi1, traction rows by xi1^2.
    Mat4 a;
    a << 1.0, k.cot_sp, -1.0, k.cot_sm,
         -k.cot_pp, 1.0, -k.cot_pm, -1.0,
         -2.0 * mp * k.cot_pp, mp * qp, -2.0 * mm * k.cot_pm, -mm * qm,
         -mp * qp, -2.0 * mp * k.cot_sp, mm * qm, -2.0 * mm * k.cot_sm;
    Eigen::Matrix<cplx, 4, 2> b;
    b << 1.0, -k.cot_sp,
         k.cot_pp, 1.0,
         2.0 * mp * k.cot_pp, mp * qp,
         -mp * qp, 2.0 * mp * k.cot_sp;
    Vec4 x = a.partialPivLu().solve(-(b * Vec2(incident.p, incident.sv)));

    Mat2 s;
    s << -k.cot_sp, -k.cot_sm,
         mp * k.cot_sp * k.cot_sp, -mm * k.cot_sm * k.cot_sm;
    Vec2 srhs(-k.cot_sp * incident.sh, -mp * k.cot_sp * k.cot_sp * incident.sh);
    Vec2 y = s.partialPivLu().solve(srhs);

    ScatterResult r;
    r.cls = classify_interface(plus, minus, bc, tol);
    r.out_plus = {x(0), x(1), y(0)};
    r.out_minus = {x(2), x(3), y(1)};
    r.energy_residual = knott_energy_residual(plus, minus, bc, incident, r);
    FluxReport f = energy_flux(plus, minus, bc, {incident, r.out_plus, {}, r.out_minus}, tol);
    r.incident_flux = f.incident;
    return r;
}

double knott_energy_residual(const Material& plus, const Material& minus,
                             const BoundaryCovector& bc, const PotentialAmplitudes& incident,
                             const ScatterResult& r) {
    KnottAngles k = knott_angles(plus, minus, bc, kGlancingTol);
    double in = plus.rho * (k.cot_pp * std::norm(incident.p) + k.cot_sp * std::norm(incident.sv));
    double out = plus.rho * (k.cot_pp * std::norm(r.out_plus.p) + k.cot_sp * std::norm(r.out_plus.sv)) +
                 minus.rho * (k.cot_pm * std::norm(r.out_minus.p) + k.cot_sm * std::norm(r.out_minus.sv));
    return in > 0.0 ? (out - in) / in : out - in;
}

AcousticResult acoustic_interface(double c_plus, double c_minus, const BoundaryCovector& bc,
                                  cplx a_plus, cplx a_minus, double tol) {
    auto vp = vertical_wavenumber(c_plus, bc, Direction::Out, tol);
    auto vm = vertical_wavenumber(c_minus, bc, Direction::Out, tol);
    AcousticResult r;
    r.evanescent_plus = vp.evanescent();
    r.evanescent_minus = vm.evanescent();
    if ((r.evanescent_plus && nonzero(a_plus)) || (r.evanescent_minus && nonzero(a_minus)))
        fail(ErrorCode::ForbiddenIncoming, "incoming acoustic wave on an evanescent side");
    // Columns (pressure, normal derivative) = (1, kz).
    cplx kop = kz_out(Side::Plus, vp.value), kom = kz_out(Side::Minus, vm.value);
    Mat2 a;
    a << 1.0, -1.0, kop, -kom;
    Vec2 rhs(-a_plus + a_minus, -kz_in(Side::Plus, vp.value) * a_plus + kz_in(Side::Minus, vm.value) * a_minus);
    Vec2 x = a.partialPivLu().solve(rhs);
    r.out_plus = x(0);
    r.out_minus = x(1);
    double in = vp.value.real() * std::norm(a_plus) + vm.value.real() * std::norm(a_minus);
    double out = vp.value.real() * std::norm(r.out_plus) + vm.value.real() * std::norm(r.out_minus);
    r.energy_residual = in > 0.0 ? (out - in) / in : out - in;
    return r;
}

ControlResult control_solve(const Material& plus, const Material& minus, const BoundaryCovector& bc,
                            Side known_side, const PotentialAmplitudes& known_in,
                            const PotentialAmplitudes& known_out, double tol, double singular_tol) {
    Side unknown_side = known_side == Side::Plus ? Side::Minus : Side::Plus;
    const Material& mk = known_side == Side::Plus ? plus : minus;
    const Material& mu = known_side == Side::Plus ? minus : plus;
    SideWaves wk = side_waves(mk, known_side, bc, tol);
    SideWaves wu = side_waves(mu, unknown_side, bc, tol);
    check_incoming(wk, known_in, "known");
    double tau = bc.tau, xi = bc.xi;
    double su = sign(unknown_side), sk = sign(known_side);

    if (!wu.p_prop && !wu.s_prop)
        fail(ErrorCode::ControlImpossible, "no propagating waves on the controlling side");

    // Unknown-side columns.
    struct Col {
        int channel;  // 0 = P, 1 = SV
        bool is_in;
        bool known_side;
    };
    std::vector<Col> cols;
    for (int c = 0; c < 2; ++c) {
        bool prop = c == 0 ? wu.p_prop : wu.s_prop;
        if (prop) cols.push_back({c, true, false});
        cols.push_back({c, false, false});
    }
    int known_evanescent = (wk.p_prop ? 0 : 1) + (wk.s_prop ? 0 : 1);
    bool byproducts = false;
    if (cols.size() != 4) {
        if (cols.size() + known_evanescent != 4)
            fail(ErrorCode::ControlImpossible, "the other side cannot be controlled in this case");
        byproducts = true;
        if (!wk.p_prop) cols.push_back({0, false, true});
        if (!wk.s_prop) cols.push_back({1, false, true});
    }

    auto column = [&](const SideWaves& w, int channel, bool is_in) {
        cplx x = channel == 0 ? w.xp : w.xs;
        cplx kz = is_in ? kz_in(w.side, x) : kz_out(w.side, x);
        return pv_column(*w.m, tau, xi, kz, channel == 0 ? SpeedKind::P : SpeedKind::S);
    };

    Mat4 a;
    for (int k = 0; k < 4; ++k) {
        const Col& c = cols[k];
        a.col(k) = c.known_side ? Vec4(sk * column(wk, c.channel, false))
                                : Vec4(su * column(wu, c.channel, c.is_in));
    }
    Vec4 rhs = Vec4::Zero();
    cplx kin[2] = {known_in.p, known_in.sv}, kout[2] = {known_out.p, known_out.sv};
    for (int c = 0; c < 2; ++c) {
        bool prop = c == 0 ? wk.p_prop : wk.s_prop;
        if (prop) {
            rhs -= sk * column(wk, c, true) * kin[c];
            rhs -= sk * column(wk, c, false) * kout[c];
        } else if (!byproducts) {
            rhs -= sk * column(wk, c, false) * kout[c];
        }
    }

    ControlResult r;
    cplx det = a.determinant();
    r.det_abs = std::abs(det);
    r.det_rel = r.det_abs / row_norm_product(a);
    if (r.det_rel < singular_tol)
        fail(ErrorCode::NearSingularControl, "control determinant is below tolerance");
    Vec4 x = a.partialPivLu().solve(rhs);
    cplx* slot_in[2] = {&r.in.p, &r.in.sv};
    cplx* slot_out[2] = {&r.out.p, &r.out.sv};
    cplx* slot_known[2] = {&r.known_evanescent.p, &r.known_evanescent.sv};
    for (int k = 0; k < 4; ++k) {
        const Col& c = cols[k];
        *(c.known_side ? slot_known[c.channel] : (c.is_in ? slot_in[c.channel] : slot_out[c.channel])) = x(k);
    }

    // SH: acoustic-like 2x2 control.
    if (wu.s_prop) {
        Mat2 s;
        s.col(0) = su * sh_column(mu, kz_in(unknown_side, wu.xs));
        s.col(1) = su * sh_column(mu, kz_out(unknown_side, wu.xs));
        Vec2 srhs = Vec2::Zero();
        if (wk.s_prop) {
            srhs -= sk * sh_column(mk, kz_in(known_side, wk.xs)) * known_in.sh;
            srhs -= sk * sh_column(mk, kz_out(known_side, wk.xs)) * known_out.sh;
        } else {
            srhs -= sk * sh_column(mk, kz_out(known_side, wk.xs)) * known_out.sh;
        }
        Vec2 y = s.partialPivLu().solve(srhs);
        r.in.sh = y(0);
        r.out.sh = y(1);
    } else if (nonzero(known_in.sh) || nonzero(known_out.sh)) {
        fail(ErrorCode::ControlImpossible, "SH control needs propagating S waves on the controlling side");
    }
    return r;
}

}  // namespace elastic
