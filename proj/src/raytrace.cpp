#include "elastic/raytrace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <sstream>

#include <fmt/format.h>

namespace elastic {

const char* to_string(NodeStatus s) {
    switch (s) {
        case NodeStatus::Branched: return "branched";
        case NodeStatus::Arrival: return "arrival";
        case NodeStatus::Evanescent: return "evanescent";
        case NodeStatus::Glancing: return "glancing";
        case NodeStatus::Trapped: return "trapped";
        case NodeStatus::TimeCut: return "time_cut";
        case NodeStatus::AmplitudeCut: return "amplitude_cut";
        case NodeStatus::GenerationCut: return "generation_cut";
    }
    return "?";
}

namespace {

double speed_of(const Material& m, WaveMode mode, double z) {
    auto [cs, cp] = material_speeds(m, z);
    return mode == WaveMode::P ? cp : cs;
}

double slope_of(const Material& m, WaveMode mode, double z) {
    auto [gs, gp] = m.speed_gradient(z);
    return mode == WaveMode::P ? gp : gs;
}

struct State {
    double x, z, q, t;
};

std::string segment_label(WaveMode mode, int layer, bool down, bool turned) {
    return fmt::format("{}{}{}{}", to_string(mode), layer + 1, down ? "D" : "U", turned ? "T" : "");
}

}  // namespace

double mode_speed(const LayeredModel& model, int layer, WaveMode mode, double z) {
    return speed_of(model.layers[layer], mode, z);
}

RayEvent trace_segment(const LayeredModel& model, const Ray& ray, double max_time) {
    const Material& m = model.layers[ray.layer];
    const double top = model.top(ray.layer), bottom = model.bottom(ray.layer);
    if (ray.z < top || ray.z > bottom) fail(ErrorCode::OutOfDomain, "ray starts outside its layer");
    const double p = ray.p;
    double c0 = speed_of(m, ray.mode, ray.z);
    if (!(p >= 0.0) || p * c0 >= 1.0) fail(ErrorCode::OutOfDomain, "ray is not propagating at its start");

    RayEvent ev;
    auto finish = [&](double x, double z, double t, bool down) {
        ev.x = x;
        ev.z = z;
        ev.time = t;
        ev.arriving_down = down;
        if (z == top && ray.layer == 0) ev.surface = SurfaceKind::Top;
        else if (z == bottom && ray.layer + 1 == static_cast<int>(model.layers.size()))
            ev.surface = SurfaceKind::Bottom;
        else {
            ev.surface = SurfaceKind::Interface;
            ev.interface = down ? ray.layer : ray.layer - 1;
        }
        double s = std::min(1.0, p * speed_of(m, ray.mode, z));
        ev.angle = std::asin(s);
        if (std::sqrt(1.0 - s * s) < kRayGlancingCos)
            fail(ErrorCode::Glancing, "ray meets the surface within the glancing tolerance");
    };

    ev.path.emplace_back(ray.x, ray.z);
    if (!m.graded()) {
        double zt = ray.down ? bottom : top;
        double dz = std::abs(zt - ray.z);
        double cosv = std::sqrt(1.0 - p * c0 * p * c0);
        if (cosv < kRayGlancingCos) fail(ErrorCode::Glancing, "ray travels within the glancing tolerance");
        double x = ray.x + dz * p * c0 / cosv;
        ev.path.emplace_back(x, zt);
        finish(x, zt, ray.birth_time + dz / (c0 * cosv), ray.down);
        return ev;
    }

    // Hamiltonian ray equations for H = c(z)^2 (p^2 + q^2) / 2, time-parametrised.
    double cmax = 0.0;
    for (int k = 0; k <= 64; ++k) cmax = std::max(cmax, speed_of(m, ray.mode, top + (bottom - top) * k / 64.0));
    const double dt = (bottom - top) / 1024.0 / cmax;
    auto rhs = [&](const State& s) {
        double c = speed_of(m, ray.mode, s.z), dc = slope_of(m, ray.mode, s.z);
        return State{c * c * p, c * c * s.q, -c * dc * (p * p + s.q * s.q), 1.0};
    };
    auto step = [&](const State& s, double h) {
        auto shift = [](const State& a, const State& k, double f) {
            return State{a.x + f * k.x, a.z + f * k.z, a.q + f * k.q, a.t + f * k.t};
        };
        State k1 = rhs(s), k2 = rhs(shift(s, k1, h / 2)), k3 = rhs(shift(s, k2, h / 2)), k4 = rhs(shift(s, k3, h));
        return State{s.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
                     s.z + h / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z),
                     s.q + h / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q), s.t + h};
    };
    double q0 = std::sqrt(1.0 / (c0 * c0) - p * p);
    State s{ray.x, ray.z, ray.down ? q0 : -q0, ray.birth_time};
    bool turned = false;
    const long max_steps = 50'000'000;
    for (long n = 0; n < max_steps; ++n) {
        if (s.t - ray.birth_time > max_time) break;
        State next = step(s, dt);
        bool below = next.z >= bottom, above = next.z <= top;
        if (below || above) {
            double zb = below ? bottom : top;
            double lo = 0.0, hi = dt;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                State t = step(s, mid);
                bool out = below ? t.z >= zb : t.z <= zb;
                (out ? hi : lo) = mid;
            }
            State e = step(s, hi);
            if ((e.q > 0) != (s.q > 0)) turned = true;
            ev.turned = turned;
            ev.path.emplace_back(e.x, zb);
            finish(e.x, zb, e.t, below);
            return ev;
        }
        if ((next.q > 0) != (s.q > 0)) turned = true;
        s = next;
        if (n % 16 == 15) ev.path.emplace_back(s.x, s.z);
    }
    fail(ErrorCode::Trapped, "ray reached no surface within the time limit");
}

Branch branch_at_event(const LayeredModel& model, const RayEvent& event, const Ray& ray) {
    Branch b;
    if (event.surface == SurfaceKind::Bottom || (event.surface == SurfaceKind::Top && !model.free_surface))
        return b;
    BoundaryCovector bc{-1.0, ray.p};
    PotentialAmplitudes in;
    (ray.mode == WaveMode::P ? in.p : ray.mode == WaveMode::SV ? in.sv : in.sh) = ray.amplitude;

    struct Channel {
        WaveMode mode;
        bool down;
        int layer;
        const Material* m;
        cplx amp;
        double decay;
    };
    std::vector<Channel> channels;
    auto pick = [](const PotentialAmplitudes& a, WaveMode mode) {
        return mode == WaveMode::P ? a.p : mode == WaveMode::SV ? a.sv : a.sh;
    };
    auto slot = [](WaveMode mode) { return mode == WaveMode::P ? 0 : mode == WaveMode::SV ? 1 : 2; };
    const std::array<WaveMode, 2> pv{WaveMode::P, WaveMode::SV};
    bool graded = ray.kinematic_only;

    Material above, below;
    if (event.surface == SurfaceKind::Top) {
        below = model.layers[0].at_depth(0.0);
        graded = graded || model.layers[0].graded();
        ScatterResult r = solve_free_surface(below, bc, in);
        b.region = to_string(r.region);
        b.energy_residual = r.energy_residual;
        auto add = [&](WaveMode mode) {
            int k = slot(mode);
            channels.push_back({mode, true, 0, &below,
                                r.decay_minus[k] > 0 ? pick(r.evan_minus, mode) : pick(r.out_minus, mode),
                                r.decay_minus[k]});
        };
        if (ray.mode == WaveMode::SH) add(WaveMode::SH);
        else for (WaveMode mode : pv) add(mode);
    } else {
        int j = event.interface;
        above = model.trace_above(j);
        below = model.trace_below(j);
        graded = graded || model.layers[j].graded() || model.layers[j + 1].graded();
        bool from_plus = event.arriving_down;
        ScatterResult r = from_plus ? solve_interface(above, below, bc, in, {})
                                    : solve_interface(above, below, bc, {}, in);
        b.region = to_string(r.cls.kind);
        b.energy_residual = r.energy_residual;
        auto add = [&](WaveMode mode, bool plus_side) {
            int k = slot(mode);
            const auto& decay = plus_side ? r.decay_plus : r.decay_minus;
            const auto& out = plus_side ? r.out_plus : r.out_minus;
            const auto& evan = plus_side ? r.evan_plus : r.evan_minus;
            channels.push_back({mode, !plus_side, plus_side ? j : j + 1, plus_side ? &above : &below,
                                decay[k] > 0 ? pick(evan, mode) : pick(out, mode), decay[k]});
        };
        if (ray.mode == WaveMode::SH) {
            add(WaveMode::SH, from_plus);
            add(WaveMode::SH, !from_plus);
        } else {
            for (WaveMode mode : pv) add(mode, from_plus);
            for (WaveMode mode : pv) add(mode, !from_plus);
        }
    }

    for (const Channel& ch : channels) {
        if (ch.decay > 0.0) {
            b.stubs.push_back({ch.mode, ch.down, ch.layer, ch.decay, NodeStatus::Evanescent});
            continue;
        }
        double s = ray.p * (ch.mode == WaveMode::P ? ch.m->cp() : ch.m->cs());
        if (std::sqrt(std::max(0.0, 1.0 - s * s)) < kRayGlancingCos) {
            b.stubs.push_back({ch.mode, ch.down, ch.layer, 0.0, NodeStatus::Glancing});
            continue;
        }
        Ray child;
        child.x = event.x;
        child.z = event.z;
        child.p = ray.p;
        child.mode = ch.mode;
        child.down = ch.down;
        child.layer = ch.layer;
        child.birth_time = event.time;
        child.amplitude = ch.amp;
        child.kinematic_only = graded;
        b.children.push_back(child);
    }
    return b;
}

RayTree propagate_tree(const LayeredModel& model, const Ray& source, const StoppingPolicy& policy) {
    RayTree tree;
    tree.source_x = source.x;
    RayNode root;
    root.ray = source;
    tree.nodes.push_back(root);
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        // Copy: the node vector grows below.
        RayNode node = tree.nodes[id];
        RayEvent ev;
        try {
            ev = trace_segment(model, node.ray, policy.max_time);
        } catch (const Error& e) {
            tree.nodes[id].status = e.code() == ErrorCode::Trapped ? NodeStatus::Trapped : NodeStatus::Glancing;
            tree.warnings.push_back(fmt::format("node {}: {}", id, e.what()));
            continue;
        }
        std::string label = segment_label(node.ray.mode, node.ray.layer, ev.arriving_down, ev.turned);
        std::string path = node.path.empty() ? label : node.path + "-" + label;
        tree.nodes[id].path = path;
        if (ev.time > policy.max_time) {
            tree.nodes[id].status = NodeStatus::TimeCut;
            continue;
        }
        tree.nodes[id].has_event = true;
        bool outer = ev.surface != SurfaceKind::Interface;
        if (outer) tree.nodes[id].status = NodeStatus::Arrival;
        if (node.generation >= policy.max_generations) {
            if (!outer) tree.nodes[id].status = NodeStatus::GenerationCut;
            tree.nodes[id].event = std::move(ev);
            continue;
        }
        Branch br;
        try {
            br = branch_at_event(model, ev, node.ray);
        } catch (const Error& e) {
            tree.nodes[id].status = NodeStatus::Glancing;
            tree.warnings.push_back(fmt::format("node {}: {}", id, e.what()));
            tree.nodes[id].event = std::move(ev);
            continue;
        }
        ev.region = br.region;
        tree.nodes[id].event = std::move(ev);
        for (const Ray& child : br.children) {
            RayNode c;
            c.ray = child;
            c.parent = id;
            c.generation = node.generation + 1;
            c.path = path;
            int cid = static_cast<int>(tree.nodes.size());
            if (std::abs(child.amplitude) < policy.min_amp) {
                c.status = NodeStatus::AmplitudeCut;
            } else {
                queue.push_back(cid);
            }
            tree.nodes.push_back(c);
            tree.nodes[id].children.push_back(cid);
        }
        for (const auto& stub : br.stubs) {
            RayNode c;
            c.ray = node.ray;
            c.ray.mode = stub.mode;
            c.ray.down = stub.down;
            c.ray.layer = stub.layer;
            c.ray.x = tree.nodes[id].event.x;
            c.ray.z = tree.nodes[id].event.z;
            c.ray.birth_time = tree.nodes[id].event.time;
            c.ray.amplitude = 0.0;
            c.parent = id;
            c.generation = node.generation + 1;
            c.status = stub.status;
            c.decay = stub.decay;
            c.path = path + "-" + segment_label(stub.mode, stub.layer, stub.down, false) +
                     (stub.status == NodeStatus::Evanescent ? "E" : "G");
            if (stub.status == NodeStatus::Glancing)
                tree.warnings.push_back(fmt::format("node {}: {} channel near glancing", id, c.path));
            int cid = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(c);
            tree.nodes[id].children.push_back(cid);
        }
        if (!outer && br.children.empty() && br.stubs.empty())
            tree.nodes[id].status = NodeStatus::Glancing;
    }
    return tree;
}

std::vector<Arrival> extract_arrivals(const RayTree& tree) {
    std::vector<Arrival> out;
    for (const RayNode& n : tree.nodes) {
        if (!n.has_event || n.event.surface == SurfaceKind::Interface) continue;
        Arrival a;
        a.time = n.event.time;
        a.x = n.event.x;
        a.offset = n.event.x - tree.source_x;
        a.top = n.event.surface == SurfaceKind::Top;
        a.mode = n.ray.mode;
        a.amplitude = n.ray.amplitude;
        a.p = n.ray.p;
        a.angle = n.event.angle;
        a.kinematic_only = n.ray.kinematic_only;
        a.path = n.path;
        out.push_back(a);
    }
    std::stable_sort(out.begin(), out.end(), [](const Arrival& a, const Arrival& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.path < b.path;
    });
    return out;
}

nlohmann::json tree_to_json(const RayTree& tree) {
    using nlohmann::json;
    json nodes = json::array();
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const RayNode& n = tree.nodes[i];
        json j;
        j["id"] = i;
        j["parent"] = n.parent;
        j["generation"] = n.generation;
        j["mode"] = to_string(n.ray.mode);
        j["layer"] = n.ray.layer + 1;
        j["direction"] = n.ray.down ? "down" : "up";
        j["p"] = n.ray.p;
        j["birth_time"] = n.ray.birth_time;
        j["amplitude"] = {n.ray.amplitude.real(), n.ray.amplitude.imag()};
        j["kinematic_only"] = n.ray.kinematic_only;
        j["status"] = to_string(n.status);
        j["path"] = n.path;
        if (n.status == NodeStatus::Evanescent) j["decay"] = n.decay;
        if (n.has_event) {
            json e;
            e["time"] = n.event.time;
            e["point"] = {n.event.x, n.event.z};
            e["surface"] = n.event.surface == SurfaceKind::Top      ? "top"
                           : n.event.surface == SurfaceKind::Bottom ? "bottom"
                                                                    : "interface";
            if (n.event.surface == SurfaceKind::Interface) e["interface"] = n.event.interface + 1;
            e["angle"] = n.event.angle;
            if (!n.event.region.empty()) e["case"] = n.event.region;
            json poly = json::array();
            for (auto [x, z] : n.event.path) poly.push_back({x, z});
            e["polyline"] = poly;
            j["event"] = e;
        }
        j["children"] = n.children;
        nodes.push_back(j);
    }
    return json{{"nodes", nodes}, {"warnings", tree.warnings}};
}

std::string arrivals_to_csv(const std::vector<Arrival>& arrivals) {
    std::string s =
        "# time in model time units, offset in model length units; amplitudes are complex "
        "potential amplitudes relative to a unit source\n"
        "time,offset,mode,amp_re,amp_im,path\n";
    for (const Arrival& a : arrivals)
        s += fmt::format("{:.17g},{:.17g},{},{:.17g},{:.17g},{}\n", a.time, a.offset, to_string(a.mode),
                         a.amplitude.real(), a.amplitude.imag(), a.path);
    return s;
}

std::string tree_to_svg(const LayeredModel& model, const RayTree& tree) {
    double xmin = tree.source_x, xmax = tree.source_x;
    for (const RayNode& n : tree.nodes)
        for (auto [x, z] : n.event.path) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
    if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
    const double w = 800.0, h = 500.0, pad = 20.0;
    auto px = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (w - 2 * pad); };
    auto pz = [&](double z) { return pad + z / model.height * (h - 2 * pad); };
    std::ostringstream s;
    s << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\">\n", w, h);
    s << fmt::format("<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"black\"/>\n", pad,
                     pz(0.0), w - pad, pz(0.0));
    for (const Interface& i : model.interfaces)
        s << fmt::format("<line x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" stroke=\"gray\"/>\n",
                         pad, pz(i.depth), w - pad, pz(i.depth));
    for (const RayNode& n : tree.nodes) {
        if (!n.has_event) continue;
        // P solid, S dotted.
        const char* colour = n.ray.mode == WaveMode::P ? "red" : n.ray.mode == WaveMode::SV ? "blue" : "green";
        s << "<polyline fill=\"none\" stroke=\"" << colour << "\"";
        if (n.ray.mode != WaveMode::P) s << " stroke-dasharray=\"2,3\"";
        s << " points=\"";
        for (auto [x, z] : n.event.path) s << fmt::format("{:.3f},{:.3f} ", px(x), pz(z));
        s << "\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace elastic
