#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "elastic/error.hpp"

namespace elastic {

enum class WaveMode { P, SV, SH };

const char* to_string(WaveMode mode);

// One isotropic layer. Lamé parameters are the values at z_ref; graded layers
// add polynomial terms in (z - z_ref) to the speeds while rho stays constant.
struct Material {
    double rho = 1.0;
    double lam = 1.0;
    double mu = 1.0;
    std::vector<double> cs_grad;  // coefficients of (z - z_ref)^1, ^2, ...
    std::vector<double> cp_grad;
    double z_ref = 0.0;

    double cs() const;
    double cp() const;
    bool graded() const { return !cs_grad.empty() || !cp_grad.empty(); }

    // Constant material carrying the local speeds at depth z.
    Material at_depth(double z) const;
    // Derivatives of (c_s, c_p) with respect to depth.
    std::pair<double, double> speed_gradient(double z) const;

    static Material from_speeds(double rho, double cs, double cp);
};

std::pair<double, double> material_speeds(const Material& m, double depth);

void validate_material(const Material& m);

struct Interface {
    double depth = 0.0;
    int above = 0;
    int below = 1;
};

struct LayeredModel {
    std::vector<Material> layers;       // outermost first
    std::vector<Interface> interfaces;  // strictly increasing depths
    double height = 1.0;                // bottom of the last layer
    bool free_surface = true;           // outer boundary at depth 0
    bool monotone = true;

    double top(int layer) const;
    double bottom(int layer) const;
    int layer_at(double z) const;
    // Constant materials just above / below interface j.
    Material trace_above(int j) const;
    Material trace_below(int j) const;
};

LayeredModel make_model(std::vector<Material> layers, const std::vector<double>& depths,
                        double height, bool free_surface = true);

// Scenario keys: layers[] {rho, lam, mu | rho, cs, cp, cs_gradient?, cp_gradient?},
// interfaces[] {depth}, height, surface ("free" | "exit").
LayeredModel build_model(const nlohmann::json& config);

Material material_from_json(const nlohmann::json& j);

}  // namespace elastic
