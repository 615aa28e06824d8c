#pragma once

#include <optional>

#include "elastic/model.hpp"

namespace elastic {

// s = c^2 / c_s^2 on (0, 1).
struct RayleighResult {
    double s0 = 0.0;
    double c_R = 0.0;
};

// s = c^2 / c_ref^2 with c_ref = min(c_s+, c_s-).
struct StoneleyResult {
    double s_root = 0.0;
    double c_St = 0.0;
};

double evaluate_rayleigh(double s, const Material& m);
RayleighResult find_rayleigh_speed(const Material& m);

// Interface wave determinant at phase speed c < min(c_s+, c_s-), scaled by c^-4.
// Real on that range.
double stoneley_function(const Material& plus, const Material& minus, double c);
std::optional<StoneleyResult> find_stoneley_speed(const Material& plus, const Material& minus);

}  // namespace elastic
