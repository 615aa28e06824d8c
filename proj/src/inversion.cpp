#include "elastic/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace elastic {

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::stringstream ss(path);
    std::string item;
    while (std::getline(ss, item, '-')) out.push_back(item);
    return out;
}

void classify(TravelTimeCurve& c) {
    auto segs = split_path(c.path);
    std::string m = to_string(c.mode);
    if (segs.size() == 1 && segs[0] == m + "1UT") {
        c.kind = BranchKind::Turning;
        return;
    }
    if (segs.size() % 2 != 0) return;
    int k = static_cast<int>(segs.size()) / 2;
    for (int i = 0; i < k; ++i) {
        if (segs[i] != fmt::format("{}{}D", m, i + 1)) return;
        if (segs[2 * k - 1 - i] != fmt::format("{}{}U", m, i + 1)) return;
    }
    c.kind = BranchKind::Reflection;
    c.reflector = k - 1;
}

double peak_amplitude(const TravelTimeCurve& c) {
    double a = 0.0;
    for (const auto& s : c.samples) a = std::max(a, std::abs(s.amp));
    return a;
}

const TravelTimeCurve* find_reflection(const std::vector<TravelTimeCurve>& curves, WaveMode mode, int k) {
    for (const auto& c : curves)
        if (c.mode == mode && c.kind == BranchKind::Reflection && c.reflector == k) return &c;
    return nullptr;
}

// Slowness at which the reflection amplitude first turns complex. Near the
// onset the phase grows like sqrt(p - p_c), which is used to interpolate.
std::optional<double> complex_onset(const TravelTimeCurve& c) {
    const auto& s = c.samples;
    auto phase = [](cplx a) { return std::atan2(std::abs(a.imag()), std::abs(a.real())); };
    for (std::size_t b = 1; b < s.size(); ++b) {
        if (std::abs(s[b].amp.imag()) <= 1e-9 * std::abs(s[b].amp)) continue;
        double lo = s[b - 1].p, pb = s[b].p;
        if (b + 1 >= s.size()) return 0.5 * (lo + pb);
        double f1 = phase(s[b].amp), f2 = phase(s[b + 1].amp);
        double d = f2 * f2 - f1 * f1;
        if (!(d > 0.0)) return 0.5 * (lo + pb);
        double pc = pb - f1 * f1 * (s[b + 1].p - pb) / d;
        return std::clamp(pc, lo, pb);
    }
    return std::nullopt;
}

Condition less(double a, double b) { return {a < b, b - a}; }

}  // namespace

std::vector<TravelTimeCurve> synthesize_data(const LayeredModel& model, const std::vector<WaveMode>& modes,
                                             const FanSpec& fan) {
    LayeredModel m = model;
    m.free_surface = false;
    int n_if = static_cast<int>(m.interfaces.size());
    StoppingPolicy policy{1e6, 0.0, std::max(0, 2 * n_if - 1)};
    std::vector<TravelTimeCurve> out;
    for (WaveMode mode : modes) {
        std::map<std::string, TravelTimeCurve> by_path;
        double pmax = fan.max_fraction / mode_speed(m, 0, mode, 0.0);
        for (int k = 0; k < fan.count; ++k) {
            Ray src;
            src.mode = mode;
            src.p = fan.count > 1 ? pmax * k / (fan.count - 1) : 0.0;
            RayTree tree = propagate_tree(m, src, policy);
            for (const Arrival& a : extract_arrivals(tree)) {
                if (!a.top) continue;
                auto& c = by_path[a.path];
                c.mode = mode;
                c.path = a.path;
                c.samples.push_back({a.p, a.offset, a.time, a.time - a.p * a.offset, a.amplitude});
            }
        }
        for (auto& [path, c] : by_path) {
            classify(c);
            out.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<StrippedLayer> strip_reflections(const std::vector<TravelTimeCurve>& curves, WaveMode mode,
                                             double sensitivity) {
    std::vector<StrippedLayer> layers;
    for (int k = 0;; ++k) {
        const TravelTimeCurve* c = find_reflection(curves, mode, k);
        if (!c || peak_amplitude(*c) < sensitivity) break;
        // tau_k - sum_{i<k} 2 h_i q_i = 2 h_k q_k, so its square is linear in p^2.
        std::vector<double> xs, ys;
        for (const auto& s : c->samples) {
            double r = s.tau;
            bool ok = true;
            for (const auto& l : layers) {
                double q2 = 1.0 / (l.speed * l.speed) - s.p * s.p;
                if (q2 <= 0.0) {
                    ok = false;
                    break;
                }
                r -= 2.0 * l.thickness * std::sqrt(q2);
            }
            if (!ok) continue;
            xs.push_back(s.p * s.p);
            ys.push_back(r * r);
        }
        if (xs.size() < 3) break;
        Eigen::MatrixXd a(xs.size(), 2);
        Eigen::VectorXd y(ys.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            a(i, 0) = 1.0;
            a(i, 1) = xs[i];
            y(i) = ys[i];
        }
        Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
        if (!(coef(1) < 0.0) || !(coef(0) > 0.0)) break;
        StrippedLayer l;
        l.thickness = 0.5 * std::sqrt(-coef(1));
        l.speed = std::sqrt(-coef(1) / coef(0));
        l.residual = std::sqrt((a * coef - y).squaredNorm() / y.size()) / (y.cwiseAbs().mean());
        layers.push_back(l);
    }
    return layers;
}

std::vector<InterfaceEstimate> detect_interfaces(const std::vector<TravelTimeCurve>& curves, double sensitivity) {
    bool any_reflection = false;
    for (const auto& c : curves)
        if (c.kind == BranchKind::Reflection) any_reflection = true;
    if (!any_reflection) return {};

    std::vector<std::vector<StrippedLayer>> per_mode;
    for (WaveMode mode : {WaveMode::P, WaveMode::SV, WaveMode::SH}) {
        auto s = strip_reflections(curves, mode, sensitivity);
        if (!s.empty()) per_mode.push_back(std::move(s));
    }
    if (per_mode.empty())
        fail(ErrorCode::NoKinkFound, "reflection branches are below the detection sensitivity");

    std::size_t n = 0;
    for (const auto& s : per_mode) n = std::max(n, s.size());
    std::vector<InterfaceEstimate> out;
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0, worst = 0.0;
        int count = 0;
        for (const auto& s : per_mode) {
            if (s.size() <= j) continue;
            double depth = 0.0;
            for (std::size_t i = 0; i <= j; ++i) depth += s[i].thickness;
            sum += depth;
            worst = std::max(worst, s[j].residual);
            ++count;
        }
        out.push_back({sum / count, 1.0 - worst});
    }
    return out;
}

SpeedProfile herglotz_invert(const TravelTimeCurve& curve) {
    std::vector<TravelTimeSample> s = curve.samples;
    if (s.empty()) fail(ErrorCode::InsufficientCoverage, "empty travel-time curve");
    std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) { return a.p < b.p; });
    if (s.back().p - s.front().p <= 1e-12 * s.back().p) return {{0.0}, {1.0 / s.back().p}};
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i].x < s[i - 1].x) || !(s[i].p > s[i - 1].p))
            fail(ErrorCode::NonMonotone, "offset is not strictly decreasing in slowness");
    // Horizontal slowness at the surface: extrapolate X(p) to zero.
    std::size_t n = s.size();
    double p0 = s[n - 1].p;
    if (n >= 2 && s[n - 1].x > 0.0)
        p0 += s[n - 1].x * (s[n - 1].p - s[n - 2].p) / (s[n - 2].x - s[n - 1].x);
    std::vector<double> ps, xs;
    for (const auto& v : s) {
        ps.push_back(v.p);
        xs.push_back(v.x);
    }
    if (p0 > ps.back()) {
        ps.push_back(p0);
        xs.push_back(0.0);
    }
    // z(u) = (1/pi) int_u^p0 X(p) / sqrt(p^2 - u^2) dp with X piecewise linear.
    SpeedProfile out;
    out.z.push_back(0.0);
    out.c.push_back(1.0 / ps.back());
    for (std::size_t i = ps.size() - 1; i-- > 0;) {
        double u = ps[i], z = 0.0;
        for (std::size_t j = i; j + 1 < ps.size(); ++j) {
            double b = (xs[j + 1] - xs[j]) / (ps[j + 1] - ps[j]), a = xs[j] - b * ps[j];
            auto f = [&](double p) { return a * std::acosh(p / u) + b * std::sqrt(std::max(0.0, p * p - u * u)); };
            z += f(ps[j + 1]) - f(ps[j]);
        }
        out.z.push_back(z / M_PI);
        out.c.push_back(1.0 / u);
    }
    return out;
}

AssumptionReport check_assumptions(const LayeredModel& model) {
    AssumptionReport r;
    r.monotone = {model.monotone, model.monotone ? 0.0 : -1.0};
    for (std::size_t j = 0; j < model.interfaces.size(); ++j) {
        Material a = model.trace_above(static_cast<int>(j)), b = model.trace_below(static_cast<int>(j));
        double sp = a.cs(), pp = a.cp(), sm = b.cs(), pm = b.cp();
        InterfaceAssumptions ia;
        ia.depth = model.interfaces[j].depth;
        ia.g3 = less(sp, sm);
        ia.g6 = less(pp, pm);
        ia.g8 = {sp < sm && sm < pp && pp < pm, std::min({sm - sp, pp - sm, pm - pp})};
        ia.g9 = {sp < pp && pp < sm && sm < pm, std::min({pp - sp, sm - pp, pm - sm})};
        ia.g10 = less(sp, pm);
        ia.degenerate = sm == pp;
        r.interfaces.push_back(ia);
    }
    for (int j = 0; j < static_cast<int>(model.layers.size()); ++j) {
        double margin = 1e300;
        double z0 = model.top(j), z1 = model.bottom(j);
        for (int k = 0; k <= 64; ++k) {
            auto [cs, cp] = material_speeds(model.layers[j], z0 + (z1 - z0) * k / 64.0);
            margin = std::min(margin, std::abs(cp - 2.0 * cs));
        }
        r.cp_not_2cs.push_back({margin > 0.0, margin});
    }
    return r;
}

nlohmann::json report_to_json(const AssumptionReport& r) {
    using nlohmann::json;
    auto cond = [](const Condition& c) { return json{{"holds", c.holds}, {"margin", c.margin}}; };
    json ifs = json::array();
    for (const auto& i : r.interfaces)
        ifs.push_back({{"depth", i.depth},
                       {"G3", cond(i.g3)},
                       {"G6", cond(i.g6)},
                       {"G8", cond(i.g8)},
                       {"G9", cond(i.g9)},
                       {"G10", cond(i.g10)},
                       {"degenerate_cs_below_eq_cp_above", i.degenerate}});
    json layers = json::array();
    for (const auto& c : r.cp_not_2cs) layers.push_back(cond(c));
    return {{"monotone", cond(r.monotone)}, {"interfaces", ifs}, {"cp_not_2cs", layers}};
}

RecoveredProfile layer_strip(const LayeredModel& truth, const std::vector<TravelTimeCurve>& data) {
    RecoveredProfile out;
    out.report = check_assumptions(truth);
    const int n = static_cast<int>(truth.layers.size());
    bool graded = std::any_of(truth.layers.begin(), truth.layers.end(), [](const Material& m) { return m.graded(); });
    auto has_mode = [&](WaveMode m) {
        return std::any_of(data.begin(), data.end(), [&](const auto& c) { return c.mode == m; });
    };
    WaveMode shear = has_mode(WaveMode::SH) ? WaveMode::SH : WaveMode::SV;

    if (graded) {
        if (n > 1) fail(ErrorCode::InsufficientCoverage, "graded layers are only inverted as a single layer");
        LayerEstimate l;
        l.top = 0.0;
        l.bottom = truth.height;
        for (const auto& c : data) {
            if (c.kind != BranchKind::Turning) continue;
            if (c.mode == WaveMode::P) l.cp_profile = herglotz_invert(c);
            else if (c.mode == shear) l.cs_profile = herglotz_invert(c);
        }
        if (l.cp_profile.z.empty() && l.cs_profile.z.empty())
            fail(ErrorCode::InsufficientCoverage, "no turning-ray branch in the data");
        auto rms = [&](const SpeedProfile& p, bool p_wave) {
            double acc = 0.0;
            for (std::size_t i = 0; i < p.z.size(); ++i) {
                auto [cs, cp] = material_speeds(truth.layers[0], p.z[i]);
                double t = p_wave ? cp : cs;
                acc += std::pow((p.c[i] - t) / t, 2);
            }
            return p.z.empty() ? 0.0 : std::sqrt(acc / p.z.size());
        };
        l.cs_error = rms(l.cs_profile, false);
        l.cp_error = rms(l.cp_profile, true);
        out.cs_rms = l.cs_error;
        out.cp_rms = l.cp_error;
        out.layers.push_back(l);
        return out;
    }
    if (n == 1) fail(ErrorCode::InsufficientCoverage, "a constant half-space gives no reflection branches");

    auto ifs = detect_interfaces(data);
    if (static_cast<int>(ifs.size()) < n - 1)
        fail(ErrorCode::InsufficientCoverage, "fewer reflection branches than interfaces");
    for (int j = 0; j < n - 1; ++j) out.interface_depths.push_back(ifs[j].depth);

    auto s_layers = strip_reflections(data, shear);
    auto p_layers = strip_reflections(data, WaveMode::P);
    double cs_acc = 0.0, cp_acc = 0.0;
    int cs_n = 0, cp_n = 0;
    for (int k = 0; k < n; ++k) {
        LayerEstimate l;
        l.top = k == 0 ? 0.0 : out.interface_depths[k - 1];
        l.bottom = k + 1 < n ? out.interface_depths[k] : truth.height;
        // Gates accumulate over every interface above the layer.
        std::string s_gate, p_gate;
        for (int j = 0; j < k; ++j) {
            const auto& ia = out.report.interfaces[j];
            if (s_gate.empty() && !ia.g3.holds) s_gate = fmt::format("G3 at interface {}", j + 1);
            if (p_gate.empty() && !ia.g3.holds) p_gate = fmt::format("G3 at interface {}", j + 1);
            if (p_gate.empty() && !ia.g6.holds) p_gate = fmt::format("G6 at interface {}", j + 1);
        }
        auto recover = [&](WaveMode mode, const std::vector<StrippedLayer>& stripped) -> double {
            if (k < static_cast<int>(stripped.size())) return stripped[k].speed;
            if (k == n - 1) {
                const TravelTimeCurve* c = find_reflection(data, mode, k - 1);
                if (c) {
                    auto pc = complex_onset(*c);
                    if (pc) return 1.0 / *pc;
                }
            }
            fail(ErrorCode::InsufficientCoverage,
                 fmt::format("no data constrains {} speed in layer {}", to_string(mode), k + 1));
        };
        if (s_gate.empty()) {
            l.cs = recover(shear, s_layers);
            l.cs_error = (*l.cs - truth.layers[k].cs()) / truth.layers[k].cs();
            cs_acc += l.cs_error * l.cs_error;
            ++cs_n;
        } else {
            l.refusals.push_back({WaveMode::SH, s_gate});
        }
        if (p_gate.empty()) {
            l.cp = recover(WaveMode::P, p_layers);
            l.cp_error = (*l.cp - truth.layers[k].cp()) / truth.layers[k].cp();
            cp_acc += l.cp_error * l.cp_error;
            ++cp_n;
        } else {
            l.refusals.push_back({WaveMode::P, p_gate});
        }
        out.layers.push_back(l);
    }
    out.cs_rms = cs_n ? std::sqrt(cs_acc / cs_n) : 0.0;
    out.cp_rms = cp_n ? std::sqrt(cp_acc / cp_n) : 0.0;
    for (int j = 0; j < n - 1; ++j) {
        double t = truth.interfaces[j].depth;
        out.depth_error = std::max(out.depth_error, std::abs(out.interface_depths[j] - t) / t);
    }
    return out;
}

double recovered_speed(const RecoveredProfile& r, int layer, WaveMode mode) {
    if (layer < 0 || layer >= static_cast<int>(r.layers.size()))
        fail(ErrorCode::OutOfDomain, "layer index out of range");
    const LayerEstimate& l = r.layers[layer];
    bool p_wave = mode == WaveMode::P;
    const auto& v = p_wave ? l.cp : l.cs;
    if (v) return *v;
    for (const Refusal& f : l.refusals)
        if ((f.mode == WaveMode::P) == p_wave)
            fail(ErrorCode::AssumptionViolated,
                 fmt::format("{} speed in layer {} refused: {} fails", p_wave ? "c_p" : "c_s", layer + 1, f.condition));
    fail(ErrorCode::InsufficientCoverage, "speed was not recovered for this layer");
}

nlohmann::json profile_to_json(const RecoveredProfile& r) {
    using nlohmann::json;
    json layers = json::array();
    for (std::size_t k = 0; k < r.layers.size(); ++k) {
        const auto& l = r.layers[k];
        json j{{"layer", k + 1}, {"top", l.top}, {"bottom", l.bottom}};
        j["cs"] = l.cs ? json(*l.cs) : json(nullptr);
        j["cp"] = l.cp ? json(*l.cp) : json(nullptr);
        j["cs_error"] = l.cs_error;
        j["cp_error"] = l.cp_error;
        if (!l.cs_profile.z.empty()) j["cs_profile"] = {{"z", l.cs_profile.z}, {"c", l.cs_profile.c}};
        if (!l.cp_profile.z.empty()) j["cp_profile"] = {{"z", l.cp_profile.z}, {"c", l.cp_profile.c}};
        json refusals = json::array();
        for (const auto& f : l.refusals)
            refusals.push_back({{"speed", f.mode == WaveMode::P ? "cp" : "cs"}, {"condition", f.condition}});
        j["refusals"] = refusals;
        layers.push_back(j);
    }
    return {{"layers", layers},
            {"interface_depths", r.interface_depths},
            {"cs_rms", r.cs_rms},
            {"cp_rms", r.cp_rms},
            {"depth_error", r.depth_error},
            {"assumptions", report_to_json(r.report)}};
}

}  // namespace elastic
