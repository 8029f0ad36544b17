#pragma once

#include "fixcon/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fixcon {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct AnalysisOptions {
    double settling_threshold = 0.1;
    double vartheta = 0.5;
    std::optional<double> c_aggregate;
};

struct ExperimentConfig {
    std::string name;
    SimulationConfig sim;
    AnalysisOptions analysis;
    nlohmann::json raw;  // config after overrides, echoed into the sidecar
};

nlohmann::json load_config_json(const std::filesystem::path& path);

/// Applies a dotted-path override such as `sim.dt=5e-4` or
/// `gains.default.k=40`. The value is parsed as JSON when possible and
/// taken as a string otherwise. Array elements are addressed by index.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Builds the experiment from a JSON document. Throws ConfigError with the
/// offending key on schema violations.
ExperimentConfig parse_config(const nlohmann::json& config);

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Expression schema: {"terms": [{"coeff": c, "factors": [{"fn": "sin",
/// "var": 1, "scale": 1, "offset": 0, "power": 1}]}]}, or a bare number for
/// a constant.
Expression parse_expression(const nlohmann::json& j, const std::string& where);
nlohmann::json expression_to_json(const Expression& e);

/// Numbers or "a/b" fraction strings.
double parse_real(const nlohmann::json& j, const std::string& where);

}  // namespace fixcon
