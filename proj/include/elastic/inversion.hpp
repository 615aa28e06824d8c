#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "elastic/raytrace.hpp"

namespace elastic {

struct TravelTimeSample {
    double p = 0.0;
    double x = 0.0;    // offset
    double t = 0.0;    // travel time
    double tau = 0.0;  // t - p x
    cplx amp{0.0, 0.0};
};

enum class BranchKind { Turning, Reflection, Other };

struct TravelTimeCurve {
    WaveMode mode = WaveMode::P;
    std::string path;
    BranchKind kind = BranchKind::Other;
    int reflector = -1;  // interface index for pure-mode reflections
    std::vector<TravelTimeSample> samples;  // p increasing
};

struct FanSpec {
    int count = 400;
    double max_fraction = 0.9995;  // of 1/c at the source
};

// Rays leave the top surface downward; the top is treated as an exit so
// that surface multiples do not appear.
std::vector<TravelTimeCurve> synthesize_data(const LayeredModel& model, const std::vector<WaveMode>& modes,
                                             const FanSpec& fan = {});

struct StrippedLayer {
    double thickness = 0.0;
    double speed = 0.0;
    double residual = 0.0;  // RMS of the tau^2 fit, relative
};

// tau-p stripping of the pure-mode reflection branches of one mode, shallow to deep.
std::vector<StrippedLayer> strip_reflections(const std::vector<TravelTimeCurve>& curves, WaveMode mode,
                                             double sensitivity = 1e-6);

struct InterfaceEstimate {
    double depth = 0.0;
    double confidence = 0.0;  // 1 - worst relative fit residual
};

std::vector<InterfaceEstimate> detect_interfaces(const std::vector<TravelTimeCurve>& curves,
                                                 double sensitivity = 1e-6);

struct SpeedProfile {
    std::vector<double> z, c;
};

SpeedProfile herglotz_invert(const TravelTimeCurve& curve);

struct Condition {
    bool holds = false;
    double margin = 0.0;
};

struct InterfaceAssumptions {
    double depth = 0.0;
    Condition g3, g6, g8, g9, g10;
    bool degenerate = false;  // c_s below equals c_p above
};

struct AssumptionReport {
    Condition monotone;
    std::vector<InterfaceAssumptions> interfaces;
    std::vector<Condition> cp_not_2cs;  // per layer, margin min |c_p - 2 c_s|
};

AssumptionReport check_assumptions(const LayeredModel& model);
nlohmann::json report_to_json(const AssumptionReport& r);

struct Refusal {
    WaveMode mode;
    std::string condition;
};

struct LayerEstimate {
    double top = 0.0, bottom = 0.0;
    std::optional<double> cs, cp;  // constant layers
    SpeedProfile cs_profile, cp_profile;  // graded layers
    std::vector<Refusal> refusals;
    double cs_error = 0.0, cp_error = 0.0;  // relative to truth
};

struct RecoveredProfile {
    std::vector<LayerEstimate> layers;
    std::vector<double> interface_depths;
    double cs_rms = 0.0, cp_rms = 0.0;
    double depth_error = 0.0;  // worst relative
    AssumptionReport report;
};

// The truth model supplies the assumption gates and the error metrics only.
RecoveredProfile layer_strip(const LayeredModel& model_truth, const std::vector<TravelTimeCurve>& data);

// Throws AssumptionViolated naming the condition when the speed was refused.
double recovered_speed(const RecoveredProfile& r, int layer, WaveMode mode);

nlohmann::json profile_to_json(const RecoveredProfile& r);

}  // namespace elastic
