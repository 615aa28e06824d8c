#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "elastic/coefficients.hpp"

namespace elastic {

inline constexpr double kRayGlancingCos = 1e-4;

struct Ray {
    double x = 0.0, z = 0.0;
    double p = 0.0;  // horizontal slowness sin(theta) / c
    WaveMode mode = WaveMode::P;
    bool down = true;
    int layer = 0;
    double birth_time = 0.0;
    cplx amplitude{1.0, 0.0};
    bool kinematic_only = false;  // amplitude is not transported through graded layers
};

enum class SurfaceKind { Top, Bottom, Interface };

struct RayEvent {
    double x = 0.0, z = 0.0;
    double time = 0.0;
    SurfaceKind surface = SurfaceKind::Top;
    int interface = -1;
    bool arriving_down = true;
    double angle = 0.0;  // from the vertical, at the surface
    bool turned = false;
    std::string region;  // interface case or free-surface region, filled on branching
    std::vector<std::pair<double, double>> path;  // polyline from the ray start
};

struct StoppingPolicy {
    double max_time = 100.0;
    double min_amp = 0.0;
    int max_generations = 4;
};

enum class NodeStatus { Branched, Arrival, Evanescent, Glancing, Trapped, TimeCut, AmplitudeCut, GenerationCut };

const char* to_string(NodeStatus s);

struct RayNode {
    Ray ray;
    int parent = -1;
    int generation = 0;
    std::string path;  // e.g. "P1D-SV1U"
    NodeStatus status = NodeStatus::Branched;
    RayEvent event;         // end event; unset for stubs
    bool has_event = false;
    double decay = 0.0;     // evanescent stubs: kappa per unit |tau|
    std::vector<int> children;
};

struct Arrival {
    double time = 0.0;
    double offset = 0.0;
    double x = 0.0;
    bool top = true;
    WaveMode mode = WaveMode::P;
    cplx amplitude{0.0, 0.0};
    double p = 0.0;
    double angle = 0.0;
    bool kinematic_only = false;
    std::string path;
};

struct RayTree {
    std::vector<RayNode> nodes;
    std::vector<std::string> warnings;
    double source_x = 0.0;
};

double mode_speed(const LayeredModel& model, int layer, WaveMode mode, double z);

RayEvent trace_segment(const LayeredModel& model, const Ray& ray, double max_time = 1e6);

struct Branch {
    std::vector<Ray> children;
    struct Stub {
        WaveMode mode;
        bool down;
        int layer;
        double decay;
        NodeStatus status;
    };
    std::vector<Stub> stubs;  // evanescent or glancing channels, in canonical order
    std::string region;
    double energy_residual = 0.0;
};

// Children in canonical order: reflected P, reflected SV, transmitted P,
// transmitted SV, then SH (reflected, transmitted).
Branch branch_at_event(const LayeredModel& model, const RayEvent& event, const Ray& ray);

RayTree propagate_tree(const LayeredModel& model, const Ray& source, const StoppingPolicy& policy);

std::vector<Arrival> extract_arrivals(const RayTree& tree);

nlohmann::json tree_to_json(const RayTree& tree);
std::string arrivals_to_csv(const std::vector<Arrival>& arrivals);
std::string tree_to_svg(const LayeredModel& model, const RayTree& tree);

}  // namespace elastic
