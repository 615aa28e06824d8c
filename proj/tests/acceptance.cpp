// One line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "elastic/cli.hpp"
#include "elastic/inversion.hpp"
#include "elastic/surface_waves.hpp"

using namespace elastic;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Material random_material(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.5, 3.0), r(1.45, 2.5);
    double cs = u(rng);
    return Material::from_speeds(u(rng), cs, cs * r(rng));
}

struct Outcome {
    bool pass;
    std::string detail;
};

Outcome determinants() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> xi(0.05, 2.0);
    int n = 0, regions[5] = {0, 0, 0, 0, 0};
    double worst = 0.0;
    while (n < 10000) {
        Material m = random_material(rng);
        BoundaryCovector bc{-1.0, xi(rng)};
        SideRegion r = classify_side(m, bc);
        if (r == SideRegion::PGlancing || r == SideRegion::SGlancing) continue;
        ++regions[static_cast<int>(r)];
        cplx dm = assemble_M(m, bc, Direction::Out).m.determinant(), dmc = det_M_closed(m, bc);
        cplx du = assemble_U(m, bc, Direction::Out).m.determinant(), duc = det_U_closed(m, bc);
        worst = std::max({worst, std::abs(dm - dmc) / std::abs(dmc), std::abs(du - duc) / std::abs(duc)});
        ++n;
    }
    double t = seconds_since(t0);
    bool all_regions = regions[0] > 0 && regions[2] > 0 && regions[4] > 0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "max rel err %.2e over %d configs (H %d, M %d, E %d), %.2f s", worst, n, regions[0],
                  regions[2], regions[4], t);
    return {worst < 1e-10 && all_regions && t < 5.0, buf};
}

Outcome energy() {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> xi(0.05, 2.0), a(-1.0, 1.0);
    int n = 0, cases[6] = {0, 0, 0, 0, 0, 0};
    double worst = 0.0, evan_flux = 0.0;
    while (n < 10000) {
        Material mp = random_material(rng), mm = random_material(rng);
        BoundaryCovector bc{-1.0, xi(rng)};
        InterfaceClass cls;
        try {
            cls = classify_interface(mp, mm, bc);
        } catch (const Error&) {
            continue;
        }
        if (cls.kind == InterfaceCase::EE) continue;
        PotentialAmplitudes ip{a(rng), a(rng), a(rng)}, im{a(rng), a(rng), a(rng)};
        if (cls.plus != SideRegion::Hyperbolic) ip.p = 0.0;
        if (cls.plus == SideRegion::Elliptic) ip.sv = ip.sh = 0.0;
        if (cls.minus != SideRegion::Hyperbolic) im.p = 0.0;
        if (cls.minus == SideRegion::Elliptic) im.sv = im.sh = 0.0;
        ScatterResult r;
        try {
            r = solve_interface(mp, mm, bc, ip, im);
        } catch (const Error&) {
            continue;
        }
        worst = std::max(worst, std::abs(r.energy_residual));
        auto f = energy_flux(mp, mm, bc, {{}, r.evan_plus, {}, r.evan_minus});
        evan_flux = std::max(evan_flux, std::abs(f.out_plus.total()) + std::abs(f.out_minus.total()));
        ++cases[static_cast<int>(cls.kind)];
        ++n;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "max residual %.2e over %d configs (HH %d HM %d MM %d HE %d ME %d), evanescent flux %g",
                  worst, n, cases[0], cases[1], cases[2], cases[3], cases[4], evan_flux);
    bool covered = cases[0] && cases[1] && cases[2] && cases[3] && cases[4];
    return {worst < 1e-10 && evan_flux == 0.0 && covered, buf};
}

Outcome acoustic() {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> c(0.5, 3.0), a(-1.0, 1.0), f(0.0, 1.0);
    double worst = 0.0;
    int n = 0;
    while (n < 1000) {
        double cp = c(rng), cm = c(rng);
        if (cm <= cp * 1.01) continue;
        // p between 1/cm and 1/cp: propagating above, evanescent below.
        double p = 1.0 / cm + f(rng) * (1.0 / cp - 1.0 / cm);
        BoundaryCovector bc{-1.0, p};
        if (std::abs(1.0 - p * cp) < 1e-6 || std::abs(1.0 - p * cm) < 1e-6) continue;
        cplx ai(a(rng), a(rng));
        if (std::abs(ai) < 1e-3) continue;
        auto r = acoustic_interface(cp, cm, bc, ai, 0.0);
        if (!r.evanescent_minus) return {false, "minus side not evanescent"};
        worst = std::max(worst, std::abs(std::abs(r.out_plus) - std::abs(ai)) / std::abs(ai));
        ++n;
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "max | |a_R| - |a_I| | / |a_I| = %.2e over %d configs", worst, n);
    return {worst < 1e-12, buf};
}

Outcome sh_decoupling() {
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> xi(0.05, 2.0), a(-1.0, 1.0);
    bool ok = true;
    int n = 0, fs_n = 0;
    for (int i = 0; i < 2000; ++i) {
        Material mp = random_material(rng), mm = random_material(rng);
        BoundaryCovector bc{-1.0, xi(rng)};
        try {
            auto cls = classify_interface(mp, mm, bc);
            if (cls.plus == SideRegion::Elliptic) continue;
            auto r = solve_interface(mp, mm, bc, {0.0, 0.0, a(rng)}, {});
            for (cplx v : {r.out_plus.p, r.out_plus.sv, r.out_minus.p, r.out_minus.sv, r.evan_plus.p,
                           r.evan_plus.sv, r.evan_minus.p, r.evan_minus.sv})
                ok = ok && v == 0.0;
            ++n;
        } catch (const Error&) {
            continue;
        }
        try {
            cplx in(a(rng), a(rng));
            auto f = solve_free_surface(mp, bc, {0.0, 0.0, in});
            ok = ok && f.out_minus.sh == -in && f.out_minus.p == 0.0 && f.out_minus.sv == 0.0 &&
                 f.evan_minus.p == 0.0 && f.evan_minus.sv == 0.0;
            ++fs_n;
        } catch (const Error&) {
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "%d interface and %d free-surface SH solves, P/SV exactly 0, reflection exactly -1", n,
                  fs_n);
    return {ok && n > 500 && fs_n > 500, buf};
}

Outcome knott() {
    std::mt19937_64 rng(105);
    double worst = 0.0;
    int pairs = 0, points = 0;
    while (pairs < 100) {
        Material mp = random_material(rng), mm = random_material(rng);
        double cmax = std::max({mp.cp(), mm.cp()});
        // HH range: sin(theta) < cp+ / cmax.
        double theta_max = std::asin(mp.cp() / cmax);
        bool ok = true;
        for (int k = 1; k <= 89 && ok; ++k) {
            double th = theta_max * k / 90.0;
            BoundaryCovector bc{-1.0, std::sin(th) / mp.cp()};
            try {
                if (classify_interface(mp, mm, bc).kind != InterfaceCase::HH) {
                    ok = false;
                    break;
                }
                auto kf = knott_form(mp, mm, bc, {1.0, 0.0, 0.0});
                auto s = solve_interface(mp, mm, bc, {1.0, 0.0, 0.0}, {});
                worst = std::max({worst, std::abs(kf.out_plus.p - s.out_plus.p), std::abs(kf.out_plus.sv - s.out_plus.sv),
                                  std::abs(kf.out_minus.p - s.out_minus.p), std::abs(kf.out_minus.sv - s.out_minus.sv)});
                ++points;
            } catch (const Error&) {
                ok = false;
            }
        }
        if (ok) ++pairs;
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "max componentwise diff %.2e over %d pairs, %d points", worst, pairs, points);
    return {worst < 1e-9, buf};
}

Outcome rayleigh() {
    // Independent oracle: plain bisection of R on (0, 1) started away from the trivial root.
    Material poisson = Material::from_speeds(1.0, 1.0, std::sqrt(3.0));
    double lo = 0.5, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (evaluate_rayleigh(mid, poisson) < 0.0 ? lo : hi) = mid;
    }
    double oracle = std::sqrt(0.5 * (lo + hi));
    double ratio = find_rayleigh_speed(poisson).c_R / poisson.cs();
    std::mt19937_64 rng(106);
    std::uniform_real_distribution<double> u(0.2, 4.0), r(1.01, 20.0);
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
        double cs = u(rng);
        Material m = Material::from_speeds(u(rng), cs, cs * r(rng));
        int changes = 0;
        double prev = evaluate_rayleigh(1.0 / 4000, m);
        for (int k = 2; k < 4000; ++k) {
            double v = evaluate_rayleigh(k / 4000.0, m);
            if ((v > 0) != (prev > 0)) ++changes;
            prev = v;
        }
        auto res = find_rayleigh_speed(m);
        ok = ok && changes == 1 && res.c_R > 0.0 && res.c_R < m.cs();
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "Poisson c_R/c_s = %.12f, oracle %.12f; unique root and 0 < c_R < c_s on 1000 materials: %s",
                  ratio, oracle, ok ? "yes" : "no");
    return {std::abs(ratio - oracle) < 1e-10 && ok, buf};
}

Outcome cauchy() {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> xi(0.05, 2.0);
    double worst = 0.0, homog = 0.0, degenerate = 0.0;
    int n = 0, hyp = 0;
    while (n < 2000) {
        Material m = random_material(rng);
        BoundaryCovector bc{-1.0, xi(rng)};
        SideRegion r = classify_side(m, bc);
        if (r == SideRegion::PGlancing || r == SideRegion::SGlancing) continue;
        auto d = cauchy_determinants(m, bc);
        if (r == SideRegion::Hyperbolic) {
            worst = std::max(worst, std::abs(d.full - 4.0 * d.sum_block * d.diff_block) / std::abs(d.full));
            ++hyp;
        } else {
            // Decaying channels are shared by A_in and A_out: both sides vanish.
            Eigen::Matrix<cplx, 4, 4> stack;
            stack << assemble_A(m, bc, Direction::In).m, assemble_A(m, bc, Direction::Out).m;
            double scale = std::pow(stack.norm(), 4);
            degenerate = std::max({degenerate, std::abs(d.full) / scale, std::abs(4.0 * d.sum_block * d.diff_block) / scale});
        }
        auto s = solve_cauchy(m, bc, Eigen::Vector3cd::Zero(), Eigen::Vector3cd::Zero());
        homog = std::max({homog, std::abs(s.in.p), std::abs(s.in.sv), std::abs(s.in.sh), std::abs(s.out.p),
                          std::abs(s.out.sv), std::abs(s.out.sh)});
        ++n;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "hyperbolic: max rel err of 4x4 vs product of 2x2 blocks %.2e (%d configs); other regions both sides "
                  "vanish to %.2e; homogeneous max amplitude %g",
                  worst, hyp, degenerate, homog);
    return {worst < 1e-10 && hyp > 200 && degenerate < 1e-10 && homog == 0.0, buf};
}

Outcome kinematics() {
    std::mt19937_64 rng(108);
    std::uniform_real_distribution<double> p(0.0, 0.45);
    double drift = 0.0;
    std::size_t nodes = 0;
    for (int t = 0; t < 5; ++t) {
        auto m = make_model({Material::from_speeds(2.0, 1.0, 2.0), Material::from_speeds(2.4, 1.4, 2.7),
                             Material::from_speeds(2.8, 1.9, 3.4)},
                            {1.0, 2.2}, 3.5, true);
        Ray src;
        src.p = p(rng);
        auto tree = propagate_tree(m, src, {1e3, 0.0, 5});
        for (const auto& n : tree.nodes) drift = std::max(drift, std::abs(n.ray.p - src.p));
        nodes += tree.nodes.size();
    }
    Material g = Material::from_speeds(1.0, 0.5, 1.0);
    g.cp_grad = {1.0};
    g.cs_grad = {0.5};
    auto gm = make_model({g}, {}, 10.0, true);
    Ray r;
    r.p = 0.5;
    auto ev = trace_segment(gm, r);
    double arc = 0.0;
    for (auto [x, z] : ev.path) arc = std::max(arc, std::abs(std::hypot(x - std::sqrt(3.0), z + 1.0) - 2.0));
    arc = std::max({arc, std::abs(ev.x - 2.0 * std::sqrt(3.0)), std::abs(ev.time - 2.0 * std::acosh(2.0))});
    char buf[140];
    std::snprintf(buf, sizeof buf, "slowness drift %.2e over %zu nodes in 5-generation trees, circular-arc error %.2e", drift,
                  nodes, arc);
    return {drift <= 1e-12 && arc < 1e-8, buf};
}

Outcome inverse() {
    auto t0 = Clock::now();
    auto three = make_model({Material::from_speeds(2.0, 1.0, 2.0), Material::from_speeds(2.3, 1.4, 2.6),
                             Material::from_speeds(2.6, 1.9, 3.3)},
                            {1.0, 2.5}, 4.0, true);
    auto rep = check_assumptions(three);
    bool g3 = rep.interfaces[0].g3.holds && rep.interfaces[1].g3.holds;
    auto r = layer_strip(three, synthesize_data(three, {WaveMode::P, WaveMode::SH}));
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
        acc += std::pow((recovered_speed(r, k, WaveMode::SH) - three.layers[k].cs()) / three.layers[k].cs(), 2);
        acc += std::pow((recovered_speed(r, k, WaveMode::P) - three.layers[k].cp()) / three.layers[k].cp(), 2);
    }
    double rms = std::sqrt(acc / 6.0);

    auto bad = make_model({Material::from_speeds(2.0, 1.0, 3.0), Material::from_speeds(2.4, 1.5, 2.8)}, {1.3}, 3.0, true);
    auto rb = layer_strip(bad, synthesize_data(bad, {WaveMode::P, WaveMode::SH}));
    bool refused = false;
    try {
        recovered_speed(rb, 1, WaveMode::P);
    } catch (const Error& e) {
        refused = e.code() == ErrorCode::AssumptionViolated && std::string(e.what()).find("G6") != std::string::npos;
    }
    double cs2 = recovered_speed(rb, 1, WaveMode::SH);
    double t = seconds_since(t0);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "depth err %.2e, six-speed RMS %.2e, G6 violation: c_p refused %s, c_s = %.6f (true 1.5), %.2f s",
                  r.depth_error, rms, refused ? "yes" : "no", cs2, t);
    return {g3 && r.depth_error < 0.01 && rms < 0.02 && refused && std::abs(cs2 - 1.5) < 0.02 && t < 60.0, buf};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

Outcome determinism() {
    const std::string dir = SCENARIO_DIR;
    fs::path tmp = fs::temp_directory_path() / "elastic_acceptance";
    int runs = 0, mismatches = 0;
    for (const char* sc : {"two_layer.json", "three_layer.json", "gradient.json", "single_layer.json", "g6_violation.json"}) {
        for (const char* cmd : {"coeffs", "trace", "surface", "invert", "check", "knott"}) {
            std::string outs[2], errs[2], files[2];
            int status[2];
            for (int k = 0; k < 2; ++k) {
                fs::path od = tmp / std::to_string(k);
                fs::remove_all(od);
                std::ostringstream out, err;
                status[k] = cli::run({cmd, "--scenario", dir + "/" + sc, "--out", od.string()}, out, err);
                outs[k] = out.str();
                errs[k] = err.str();
                if (fs::exists(od))
                    for (const auto& e : fs::directory_iterator(od)) files[k] += e.path().filename().string() + slurp(e.path());
            }
            ++runs;
            if (outs[0] != outs[1] || errs[0] != errs[1] || files[0] != files[1] || status[0] != status[1]) ++mismatches;
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "%d command/scenario pairs run twice, %d mismatches", runs, mismatches);
    return {mismatches == 0, buf};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"determinant closed forms", determinants},
        {"energy conservation", energy},
        {"acoustic total internal reflection", acoustic},
        {"SH decoupling and sign flip", sh_decoupling},
        {"Knott-form equivalence", knott},
        {"Rayleigh speed", rayleigh},
        {"Cauchy-system ellipticity", cauchy},
        {"ray kinematics", kinematics},
        {"inverse round trip", inverse},
        {"determinism", determinism},
    };
    int failures = 0, i = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", ++i, c.name, o.detail.c_str());
    }
    return failures;
}
