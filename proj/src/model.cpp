#include "elastic/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace elastic {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidMaterial: return "InvalidMaterial";
        case ErrorCode::NonIncreasingDepths: return "NonIncreasingDepths";
        case ErrorCode::NoJump: return "NoJump";
        case ErrorCode::InvalidScenario: return "InvalidScenario";
        case ErrorCode::Glancing: return "Glancing";
        case ErrorCode::GlancingProximity: return "GlancingProximity";
        case ErrorCode::ForbiddenIncoming: return "ForbiddenIncoming";
        case ErrorCode::StoneleySingular: return "StoneleySingular";
        case ErrorCode::RayleighSingular: return "RayleighSingular";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::DegenerateAngle: return "DegenerateAngle";
        case ErrorCode::ControlImpossible: return "ControlImpossible";
        case ErrorCode::NearSingularControl: return "NearSingularControl";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::RootNotBracketed: return "RootNotBracketed";
        case ErrorCode::Trapped: return "Trapped";
        case ErrorCode::NoKinkFound: return "NoKinkFound";
        case ErrorCode::NonMonotone: return "NonMonotone";
        case ErrorCode::AssumptionViolated: return "AssumptionViolated";
        case ErrorCode::InsufficientCoverage: return "InsufficientCoverage";
    }
    return "Unknown";
}

const char* to_string(WaveMode mode) {
    switch (mode) {
        case WaveMode::P: return "P";
        case WaveMode::SV: return "SV";
        case WaveMode::SH: return "SH";
    }
    return "?";
}

namespace {

double poly_offset(const std::vector<double>& coeffs, double dz) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc + *it) * dz;
    return acc;
}

double poly_slope(const std::vector<double>& coeffs, double dz) {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k > 0; --k)
        acc = acc * dz + static_cast<double>(k) * coeffs[k - 1];
    return acc;
}

bool same_trace(const Material& a, const Material& b) {
    return a.rho == b.rho && a.lam == b.lam && a.mu == b.mu;
}

}  // namespace

double Material::cs() const { return std::sqrt(mu / rho); }
double Material::cp() const { return std::sqrt((lam + 2.0 * mu) / rho); }

Material Material::at_depth(double z) const {
    if (!graded()) return *this;
    auto [cs_z, cp_z] = material_speeds(*this, z);
    Material local = from_speeds(rho, cs_z, cp_z);
    local.z_ref = z;
    return local;
}

std::pair<double, double> Material::speed_gradient(double z) const {
    double dz = z - z_ref;
    return {poly_slope(cs_grad, dz), poly_slope(cp_grad, dz)};
}

Material Material::from_speeds(double rho, double cs, double cp) {
    Material m;
    m.rho = rho;
    m.mu = rho * cs * cs;
    m.lam = rho * cp * cp - 2.0 * m.mu;
    return m;
}

std::pair<double, double> material_speeds(const Material& m, double depth) {
    double dz = depth - m.z_ref;
    return {m.cs() + poly_offset(m.cs_grad, dz), m.cp() + poly_offset(m.cp_grad, dz)};
}

void validate_material(const Material& m) {
    if (!(m.rho > 0.0) || !std::isfinite(m.rho))
        fail(ErrorCode::InvalidMaterial, "density must be positive");
    if (!(m.mu > 0.0) || !std::isfinite(m.mu))
        fail(ErrorCode::InvalidMaterial, "shear modulus must be positive");
    if (!(m.lam + 2.0 * m.mu > 0.0) || !std::isfinite(m.lam))
        fail(ErrorCode::InvalidMaterial, "lam + 2 mu must be positive");
    // c_p^2 - c_s^2 = (lam + mu) / rho
    if (!(m.lam + m.mu > 0.0))
        fail(ErrorCode::InvalidMaterial, "lam + mu must be positive so that c_s < c_p");
}

double LayeredModel::top(int layer) const {
    return layer == 0 ? 0.0 : interfaces[layer - 1].depth;
}

double LayeredModel::bottom(int layer) const {
    return layer + 1 < static_cast<int>(layers.size()) ? interfaces[layer].depth : height;
}

int LayeredModel::layer_at(double z) const {
    int j = 0;
    while (j < static_cast<int>(interfaces.size()) && z >= interfaces[j].depth) ++j;
    return j;
}

Material LayeredModel::trace_above(int j) const {
    return layers[interfaces[j].above].at_depth(interfaces[j].depth);
}

Material LayeredModel::trace_below(int j) const {
    return layers[interfaces[j].below].at_depth(interfaces[j].depth);
}

LayeredModel make_model(std::vector<Material> layers, const std::vector<double>& depths,
                        double height, bool free_surface) {
    if (layers.empty()) fail(ErrorCode::InvalidMaterial, "model needs at least one layer");
    if (layers.size() != depths.size() + 1)
        fail(ErrorCode::InvalidScenario, "layer count must equal interface count + 1");
    double prev = 0.0;
    for (double d : depths) {
        if (!(d > prev)) fail(ErrorCode::NonIncreasingDepths, "interface depths must increase");
        prev = d;
    }
    if (!(height > prev)) fail(ErrorCode::NonIncreasingDepths, "height must exceed the deepest interface");

    LayeredModel model;
    model.height = height;
    model.free_surface = free_surface;
    model.layers = std::move(layers);
    for (std::size_t j = 0; j < depths.size(); ++j)
        model.interfaces.push_back({depths[j], static_cast<int>(j), static_cast<int>(j) + 1});

    const int samples = 64;
    for (int j = 0; j < static_cast<int>(model.layers.size()); ++j) {
        Material& m = model.layers[j];
        validate_material(m);
        if (m.graded()) m.z_ref = model.top(j);
        double z0 = model.top(j), z1 = model.bottom(j);
        for (int k = 0; k <= samples; ++k) {
            double z = z0 + (z1 - z0) * k / samples;
            auto [cs, cp] = material_speeds(m, z);
            if (!(cs > 0.0) || !(cp > cs)) {
                std::ostringstream msg;
                msg << "layer " << j + 1 << " violates 0 < c_s < c_p at depth " << z;
                fail(ErrorCode::InvalidMaterial, msg.str());
            }
            auto [gs, gp] = m.speed_gradient(z);
            if (gs < 0.0 || gp < 0.0) model.monotone = false;
        }
    }
    for (std::size_t j = 0; j < model.interfaces.size(); ++j) {
        if (same_trace(model.trace_above(static_cast<int>(j)), model.trace_below(static_cast<int>(j)))) {
            std::ostringstream msg;
            msg << "interface " << j + 1 << " has identical one-sided traces";
            fail(ErrorCode::NoJump, msg.str());
        }
    }
    return model;
}

namespace {

std::vector<double> gradient_terms(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) return {};
    const auto& v = j.at(key);
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) return v.get<std::vector<double>>();
    fail(ErrorCode::InvalidScenario, std::string(key) + " must be a number or an array");
}

}  // namespace

Material material_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rho"))
        fail(ErrorCode::InvalidScenario, "material needs rho");
    double rho = j.at("rho").get<double>();
    Material m;
    if (j.contains("cs") || j.contains("cp")) {
        if (!j.contains("cs") || !j.contains("cp"))
            fail(ErrorCode::InvalidScenario, "material needs both cs and cp");
        m = Material::from_speeds(rho, j.at("cs").get<double>(), j.at("cp").get<double>());
    } else {
        if (!j.contains("lam") || !j.contains("mu"))
            fail(ErrorCode::InvalidScenario, "material needs lam and mu, or cs and cp");
        m.rho = rho;
        m.lam = j.at("lam").get<double>();
        m.mu = j.at("mu").get<double>();
    }
    m.cs_grad = gradient_terms(j, "cs_gradient");
    m.cp_grad = gradient_terms(j, "cp_gradient");
    validate_material(m);
    return m;
}

LayeredModel build_model(const nlohmann::json& config) {
    try {
        if (!config.contains("layers") || !config.at("layers").is_array() ||
            config.at("layers").empty())
            fail(ErrorCode::InvalidMaterial, "scenario lists no layers");
        std::vector<Material> layers;
        for (const auto& l : config.at("layers")) layers.push_back(material_from_json(l));
        std::vector<double> depths;
        if (config.contains("interfaces"))
            for (const auto& i : config.at("interfaces")) depths.push_back(i.at("depth").get<double>());
        double deepest = depths.empty() ? 0.0 : *std::max_element(depths.begin(), depths.end());
        double height = config.value("height", deepest + 1.0);
        std::string surface = config.value("surface", std::string("free"));
        if (surface != "free" && surface != "exit")
            fail(ErrorCode::InvalidScenario, "surface must be \"free\" or \"exit\"");
        return make_model(std::move(layers), depths, height, surface == "free");
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidScenario, e.what());
    }
}

}  // namespace elastic
