#pragma once

#include "fixcon/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fixcon::testing {

inline std::string config_path(const std::string& name)
{
    return std::string(FIXCON_CONFIG_DIR) + "/" + name + ".json";
}

inline ExperimentConfig shipped(const std::string& name, const std::vector<std::string>& overrides = {})
{
    return load_config(config_path(name), overrides);
}

/// Two second-order followers pinned to a passive leader, no drift, no
/// disturbances; gains default to one.
inline nlohmann::json small_config()
{
    return nlohmann::json::parse(R"({
      "name": "small",
      "topology": {"adjacency": [[0, 0], [1, 0]], "leader_weights": [1, 0]},
      "leader": {"mode": "passive", "model": {"layers": [0, 0]}},
      "models": {"followers": [{"layers": [0, 0]}, {"layers": [0, 0]}]},
      "gains": {"default": {"k": 2}},
      "bases": {"critic_actor": {"neurons": 3, "range": [-2, 2], "width": 1}},
      "sim": {"dt": 1e-3, "horizon": 0.2},
      "initial": {"leader": [0, 0], "followers": [[0.5, 0], [-0.3, 0.1]]}
    })");
}

}  // namespace fixcon::testing
