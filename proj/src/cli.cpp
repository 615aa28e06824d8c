#include "elastic/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "elastic/inversion.hpp"
#include "elastic/surface_waves.hpp"

namespace elastic::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Options {
    std::string command;
    std::string scenario;
    std::string out_dir;
    double tol = 1e-8;
    std::string sweep;
    std::string format = "csv";
};

struct Sweep {
    double start = 0.0, stop = 89.0;
    int n = 90;
    std::vector<double> values() const {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(n == 1 ? start : start + (stop - start) * i / (n - 1));
        return v;
    }
};

Sweep parse_sweep(const std::string& text) {
    Sweep s;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> s.start >> c1 >> s.stop >> c2 >> s.n) || c1 != ':' || c2 != ':' || s.n < 1 || !in.eof())
        fail(ErrorCode::InvalidScenario, "sweep must be start:stop:n with n >= 1");
    return s;
}

// Negative zero prints as 0 so that tables do not depend on the sign of cancellations.
std::string num(double v) { return fmt::format("{:.17g}", v == 0.0 ? 0.0 : v); }

WaveMode parse_mode(const std::string& s) {
    if (s == "P") return WaveMode::P;
    if (s == "SV") return WaveMode::SV;
    if (s == "SH") return WaveMode::SH;
    fail(ErrorCode::InvalidScenario, "mode must be P, SV or SH");
}

json load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::InvalidScenario, "cannot open scenario " + path);
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidScenario, e.what());
    }
}

LayeredModel scenario_model(const json& sc) { return build_model(sc.contains("model") ? sc.at("model") : sc); }

json section(const json& sc, const char* key) { return sc.contains(key) ? sc.at(key) : json::object(); }

void write_file(const Options& o, const std::string& name, const std::string& text) {
    if (o.out_dir.empty()) return;
    fs::create_directories(o.out_dir);
    std::ofstream f(fs::path(o.out_dir) / name, std::ios::binary);
    f << text;
    if (!f) fail(ErrorCode::InvalidScenario, "cannot write " + name);
}

Sweep scenario_sweep(const Options& o, const json& sec, Sweep fallback) {
    if (!o.sweep.empty()) return parse_sweep(o.sweep);
    if (sec.contains("sweep")) return parse_sweep(sec.at("sweep").get<std::string>());
    return fallback;
}

int interface_index(const LayeredModel& m, const json& sec) {
    int j = sec.value("interface", 1) - 1;
    if (j < 0 || j >= static_cast<int>(m.interfaces.size()))
        fail(ErrorCode::InvalidScenario, "scenario names no such interface");
    return j;
}

// True when the slowness lies within tol of a critical value for one of the speeds.
bool near_critical(double p, std::initializer_list<double> speeds, double tol) {
    for (double c : speeds)
        if (std::abs(1.0 - p * c * p * c) < tol) return true;
    return false;
}

std::string emit_table(const Options& o, const std::vector<std::string>& header_lines,
                       const std::vector<std::string>& columns, const std::vector<std::vector<std::string>>& rows,
                       const json& rows_json) {
    if (o.format == "json") return json{{"notes", header_lines}, {"rows", rows_json}}.dump(2) + "\n";
    std::string s;
    for (const auto& h : header_lines) s += "# " + h + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
        s += "\n";
    }
    return s;
}

std::string cmd_coeffs(const Options& o, const json& sc) {
    LayeredModel m = scenario_model(sc);
    json sec = section(sc, "coeffs");
    int j = interface_index(m, sec);
    Material above = m.trace_above(j), below = m.trace_below(j);
    WaveMode mode = parse_mode(sec.value("incident", std::string("P")));
    bool from_above = sec.value("from", std::string("above")) == "above";
    const Material& inc = from_above ? above : below;
    double c_in = mode == WaveMode::P ? inc.cp() : inc.cs();
    Sweep sw = scenario_sweep(o, sec, {0.0, 89.0, 90});

    std::vector<std::string> columns{"angle_deg", "case"};
    for (const char* side : {"refl", "trans"})
        for (const char* w : {"P", "SV", "SH"}) {
            columns.push_back(fmt::format("{}_{}_re", w, side));
            columns.push_back(fmt::format("{}_{}_im", w, side));
        }
    columns.push_back("energy_residual");

    std::vector<std::vector<std::string>> rows;
    json rows_json = json::array();
    std::vector<std::string> skipped;
    for (double deg : sw.values()) {
        double p = std::sin(deg * M_PI / 180.0) / c_in;
        if (deg < 0.0 || deg >= 90.0 ||
            near_critical(p, {above.cp(), above.cs(), below.cp(), below.cs()}, o.tol)) {
            skipped.push_back(num(deg));
            continue;
        }
        PotentialAmplitudes in;
        (mode == WaveMode::P ? in.p : mode == WaveMode::SV ? in.sv : in.sh) = 1.0;
        ScatterResult r;
        try {
            r = from_above ? solve_interface(above, below, {-1.0, p}, in, {})
                           : solve_interface(above, below, {-1.0, p}, {}, in);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::GlancingProximity && e.code() != ErrorCode::Glancing) throw;
            skipped.push_back(num(deg));
            continue;
        }
        auto total = [](const PotentialAmplitudes& a, const PotentialAmplitudes& b) {
            return PotentialAmplitudes{a.p + b.p, a.sv + b.sv, a.sh + b.sh};
        };
        PotentialAmplitudes up = total(r.out_plus, r.evan_plus), down = total(r.out_minus, r.evan_minus);
        const PotentialAmplitudes& refl = from_above ? up : down;
        const PotentialAmplitudes& trans = from_above ? down : up;
        std::vector<std::string> row{num(deg), to_string(r.cls.kind)};
        json jr{{"angle_deg", deg}, {"case", to_string(r.cls.kind)}};
        for (auto [name, a] : {std::pair{"refl", refl}, std::pair{"trans", trans}})
            for (auto [w, v] : {std::pair{"P", a.p}, std::pair{"SV", a.sv}, std::pair{"SH", a.sh}}) {
                row.push_back(num(v.real()));
                row.push_back(num(v.imag()));
                jr[fmt::format("{}_{}", w, name)] = {v.real(), v.imag()};
            }
        row.push_back(num(r.energy_residual));
        jr["energy_residual"] = r.energy_residual;
        rows.push_back(row);
        rows_json.push_back(jr);
    }
    std::vector<std::string> header{
        fmt::format("incident {} from {} at interface {}, unit potential amplitude", to_string(mode),
                    from_above ? "above" : "below", j + 1),
        "angles in degrees from the vertical in the incident medium; amplitudes are complex potential "
        "amplitudes, evanescent channels included",
        "skipped (glancing tolerance): " + (skipped.empty() ? std::string("none") : fmt::format("{}", fmt::join(skipped, " ")))};
    std::string text = emit_table(o, header, columns, rows, rows_json);
    write_file(o, o.format == "json" ? "coeffs.json" : "coeffs.csv", text);
    return text;
}

std::string cmd_knott(const Options& o, const json& sc) {
    LayeredModel m = scenario_model(sc);
    json sec = section(sc, "knott");
    int j = interface_index(m, sec);
    Material above = m.trace_above(j), below = m.trace_below(j);
    Sweep sw = scenario_sweep(o, sec, {0.0, 88.0, 89});
    std::vector<std::vector<std::string>> rows;
    json rows_json = json::array();
    std::vector<std::string> skipped;
    for (double deg : sw.values()) {
        double p = std::sin(deg * M_PI / 180.0) / above.cp();
        if (deg < 0.0 || deg >= 90.0 || near_critical(p, {above.cp(), above.cs(), below.cp(), below.cs()}, o.tol)) {
            skipped.push_back(num(deg));
            continue;
        }
        BoundaryCovector bc{-1.0, p};
        ScatterResult k, s;
        try {
            if (classify_interface(above, below, bc).kind != InterfaceCase::HH) {
                skipped.push_back(num(deg));
                continue;
            }
            k = knott_form(above, below, bc, {1.0, 0.0, 0.0});
            s = solve_interface(above, below, bc, {1.0, 0.0, 0.0}, {});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::GlancingProximity && e.code() != ErrorCode::Glancing &&
                e.code() != ErrorCode::DegenerateAngle)
                throw;
            skipped.push_back(num(deg));
            continue;
        }
        double diff = std::max({std::abs(k.out_plus.p - s.out_plus.p), std::abs(k.out_plus.sv - s.out_plus.sv),
                                std::abs(k.out_minus.p - s.out_minus.p), std::abs(k.out_minus.sv - s.out_minus.sv)});
        double kres = knott_energy_residual(above, below, bc, {1.0, 0.0, 0.0}, k);
        rows.push_back({num(deg), num(diff), num(kres), num(s.energy_residual)});
        rows_json.push_back({{"angle_deg", deg}, {"max_abs_diff", diff}, {"knott_energy_residual", kres},
                             {"energy_residual", s.energy_residual}});
    }
    std::vector<std::string> header{
        fmt::format("P incident from above at interface {}; cotangent form against the direct solve", j + 1),
        "angles in degrees; differences are absolute in potential amplitude",
        "skipped (normal incidence, non-HH or glancing): " + (skipped.empty() ? std::string("none") : fmt::format("{}", fmt::join(skipped, " ")))};
    std::string text = emit_table(o, header, {"angle_deg", "max_abs_diff", "knott_energy_residual", "energy_residual"},
                                  rows, rows_json);
    write_file(o, o.format == "json" ? "knott.json" : "knott.csv", text);
    return text;
}

std::string cmd_surface(const Options& o, const json& sc) {
    LayeredModel m = scenario_model(sc);
    std::vector<std::vector<std::string>> rows;
    json rows_json = json::array();
    for (std::size_t k = 0; k < m.layers.size(); ++k) {
        Material top = m.layers[k].at_depth(m.top(static_cast<int>(k)));
        auto r = find_rayleigh_speed(top);
        rows.push_back({"rayleigh", std::to_string(k + 1), num(r.s0), num(r.c_R), num(r.c_R / top.cs())});
        rows_json.push_back({{"kind", "rayleigh"}, {"index", k + 1}, {"s", r.s0}, {"speed", r.c_R}});
    }
    for (std::size_t j = 0; j < m.interfaces.size(); ++j) {
        Material a = m.trace_above(static_cast<int>(j)), b = m.trace_below(static_cast<int>(j));
        auto st = find_stoneley_speed(a, b);
        double cref = std::min(a.cs(), b.cs());
        if (st) {
            rows.push_back({"stoneley", std::to_string(j + 1), num(st->s_root), num(st->c_St), num(st->c_St / cref)});
            rows_json.push_back({{"kind", "stoneley"}, {"index", j + 1}, {"s", st->s_root}, {"speed", st->c_St}});
        } else {
            rows.push_back({"stoneley", std::to_string(j + 1), "", "", ""});
            rows_json.push_back({{"kind", "stoneley"}, {"index", j + 1}, {"s", nullptr}, {"speed", nullptr}});
        }
    }
    std::vector<std::string> header{
        "rayleigh rows per layer at its top; s = (c_R / c_s)^2",
        "stoneley rows per interface; s = (c_St / c_ref)^2 with c_ref the smaller shear speed; empty when no root",
        "speeds in model units"};
    std::string text = emit_table(o, header, {"kind", "index", "s", "speed", "ratio"}, rows, rows_json);
    write_file(o, o.format == "json" ? "surface.json" : "surface.csv", text);
    return text;
}

Ray scenario_source(const LayeredModel& m, const json& sec) {
    json src = sec.contains("source") ? sec.at("source") : json::object();
    Ray r;
    r.x = src.value("x", 0.0);
    r.z = src.value("z", 0.0);
    r.layer = m.layer_at(r.z);
    if (r.layer > 0 && r.z == m.top(r.layer) && src.value("direction", std::string("down")) == "up") --r.layer;
    r.mode = parse_mode(src.value("mode", std::string("P")));
    r.down = src.value("direction", std::string("down")) == "down";
    double c = mode_speed(m, r.layer, r.mode, r.z);
    if (src.contains("p")) r.p = src.at("p").get<double>();
    else r.p = std::sin(src.value("angle_deg", 0.0) * M_PI / 180.0) / c;
    return r;
}

std::string cmd_trace(const Options& o, const json& sc) {
    LayeredModel m = scenario_model(sc);
    json sec = section(sc, "trace");
    Ray src = scenario_source(m, sec);
    json pol = sec.contains("policy") ? sec.at("policy") : json::object();
    StoppingPolicy policy{pol.value("max_time", 100.0), pol.value("min_amp", 0.0), pol.value("max_generations", 4)};
    RayTree tree = propagate_tree(m, src, policy);
    std::string tree_text = tree_to_json(tree).dump(2) + "\n";
    std::string csv = arrivals_to_csv(extract_arrivals(tree));
    write_file(o, "tree.json", tree_text);
    write_file(o, "arrivals.csv", csv);
    write_file(o, "section.svg", tree_to_svg(m, tree));
    return o.format == "json" ? tree_text : csv;
}

std::string cmd_check(const Options& o, const json& sc) {
    std::string text = report_to_json(check_assumptions(scenario_model(sc))).dump(2) + "\n";
    write_file(o, "assumptions.json", text);
    return text;
}

std::string cmd_invert(const Options& o, const json& sc) {
    LayeredModel m = scenario_model(sc);
    json sec = section(sc, "invert");
    FanSpec fan;
    fan.count = sec.value("fan", fan.count);
    std::vector<WaveMode> modes;
    for (const auto& s : sec.value("modes", std::vector<std::string>{"P", "SH"})) modes.push_back(parse_mode(s));
    auto data = synthesize_data(m, modes, fan);
    RecoveredProfile r = layer_strip(m, data);
    std::string text = profile_to_json(r).dump(2) + "\n";
    std::string table = "# speeds in model units; empty cells were refused or not constant\nlayer,top,bottom,cs,cp,cs_true,cp_true\n";
    for (std::size_t k = 0; k < r.layers.size(); ++k) {
        const auto& l = r.layers[k];
        table += fmt::format("{},{},{},{},{},{},{}\n", k + 1, num(l.top), num(l.bottom), l.cs ? num(*l.cs) : "",
                             l.cp ? num(*l.cp) : "", num(m.layers[k].cs()), num(m.layers[k].cp()));
    }
    write_file(o, "recovery.json", text);
    write_file(o, "profile.csv", table);
    return text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Elastic waves at interfaces: coefficients, rays, surface waves and inversion"};
    Options o;
    app.require_subcommand(1);
    const std::pair<const char*, const char*> commands[] = {
        {"coeffs", "reflection and transmission coefficients over an angle sweep"},
        {"trace", "ray tree, arrivals and section plot from a point source"},
        {"surface", "Rayleigh speed per layer and Stoneley speed per interface"},
        {"invert", "synthesize travel times and recover the layer stack"},
        {"check", "identifiability conditions with margins"},
        {"knott", "cotangent-form coefficients and energy residual"},
    };
    for (auto [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--scenario", o.scenario, "scenario JSON file")->required();
        sub->add_option("--out", o.out_dir, "directory for output files");
        sub->add_option("--tol", o.tol, "skip sweep points within this distance of a critical angle");
        sub->add_option("--sweep", o.sweep, "angle sweep start:stop:n in degrees");
        sub->add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}));
        sub->callback([&o, name] { o.command = name; });
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    try {
        json sc = load_scenario(o.scenario);
        std::string text;
        if (o.command == "coeffs") text = cmd_coeffs(o, sc);
        else if (o.command == "knott") text = cmd_knott(o, sc);
        else if (o.command == "surface") text = cmd_surface(o, sc);
        else if (o.command == "trace") text = cmd_trace(o, sc);
        else if (o.command == "check") text = cmd_check(o, sc);
        else text = cmd_invert(o, sc);
        out << text;
        return 0;
    } catch (const Error& e) {
        err << json{{"error", to_string(e.code())}, {"message", e.what()}, {"command", o.command}}.dump() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << json{{"error", "InvalidScenario"}, {"message", e.what()}, {"command", o.command}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << json{{"error", "Internal"}, {"message", e.what()}, {"command", o.command}}.dump() << "\n";
        return 3;
    }
}

}  // namespace elastic::cli
