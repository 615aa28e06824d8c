#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "elastic/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int status;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int status = elastic::cli::run(args, out, err);
    return {status, out.str(), err.str()};
}

std::string scenario(const std::string& name) { return std::string(SCENARIO_DIR) + "/" + name; }

int data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    int n = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        ++n;
    }
    return n;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("check reports the two-layer margins") {
    auto r = run({"check", "--scenario", scenario("two_layer.json")});
    CHECK(r.status == 0);
    auto j = json::parse(r.out);
    CHECK(j["interfaces"][0]["G3"]["holds"] == true);
    CHECK(j["interfaces"][0]["G6"]["margin"].get<double>() > 0.0);
}

TEST_CASE("coeffs sweep on an HH pair") {
    auto r = run({"coeffs", "--scenario", scenario("two_layer.json"), "--sweep", "0:89:90"});
    CHECK(r.status == 0);
    CHECK(data_rows(r.out) == 90);
    CHECK(r.out.find("# skipped (glancing tolerance): none") != std::string::npos);
    std::istringstream in(r.out);
    std::string line;
    double worst = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("angle", 0) == 0) continue;
        worst = std::max(worst, std::abs(std::stod(line.substr(line.rfind(',') + 1))));
        CHECK(line.find(",HH,") != std::string::npos);
    }
    CHECK(worst < 1e-10);

    auto js = run({"coeffs", "--scenario", scenario("two_layer.json"), "--format", "json", "--sweep", "10:20:3"});
    CHECK(json::parse(js.out)["rows"].size() == 3);
}

TEST_CASE("coeffs skips the critical neighbourhood") {
    // Grazing incidence at 90 degrees is always skipped.
    auto r = run({"coeffs", "--scenario", scenario("two_layer.json"), "--sweep", "0:90:2"});
    CHECK(r.status == 0);
    CHECK(data_rows(r.out) == 1);
    CHECK(r.out.find("# skipped (glancing tolerance): 90") != std::string::npos);
}

TEST_CASE("trace on a model without interfaces draws one polyline") {
    fs::path dir = fs::temp_directory_path() / "elastic_cli_trace";
    fs::remove_all(dir);
    auto r = run({"trace", "--scenario", scenario("single_layer.json"), "--out", dir.string()});
    CHECK(r.status == 0);
    std::string svg = slurp(dir / "section.svg");
    std::size_t n = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++n;
    CHECK(n == 1);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);  // SV drawn dotted
    CHECK(json::parse(slurp(dir / "tree.json"))["nodes"].size() == 1);
}

TEST_CASE("errors are machine readable") {
    auto r = run({"check", "--scenario", "/nonexistent/scenario.json"});
    CHECK(r.status != 0);
    auto j = json::parse(r.err);
    CHECK(j["error"] == "InvalidScenario");
    auto bad = run({"coeffs", "--scenario", scenario("single_layer.json")});
    CHECK(bad.status != 0);
    CHECK(json::parse(bad.err).contains("message"));
    auto usage = run({"coeffs"});
    CHECK(usage.status != 0);
}

TEST_CASE("invert and knott") {
    auto r = run({"invert", "--scenario", scenario("g6_violation.json")});
    CHECK(r.status == 0);
    auto j = json::parse(r.out);
    CHECK(j["layers"][1]["cp"].is_null());
    CHECK(j["layers"][1]["cs"].get<double>() == doctest::Approx(1.5).epsilon(0.01));
    auto k = run({"knott", "--scenario", scenario("two_layer.json")});
    CHECK(k.status == 0);
    CHECK(data_rows(k.out) > 10);
}

TEST_CASE("repeated runs are byte-identical") {
    for (const char* cmd : {"coeffs", "trace", "surface", "invert", "check", "knott"}) {
        auto a = run({cmd, "--scenario", scenario("two_layer.json")});
        auto b = run({cmd, "--scenario", scenario("two_layer.json")});
        CHECK(a.status == 0);
        CHECK(a.out == b.out);
    }
}
