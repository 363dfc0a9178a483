#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "alf/potential.hpp"

namespace fixtures {

inline nlohmann::json config_doc(const std::string& name) {
  std::ifstream in(std::string(ALF_CONFIG_DIR) + "/" + name + ".json");
  return nlohmann::json::parse(in);
}

inline alf::MonopoleConfig config(const std::string& name) { return alf::config_from_json(config_doc(name)); }

inline alf::MonopoleConfig make(double eps, double delta, std::vector<alf::Vec3> points,
                                std::optional<double> center = {}, std::optional<double> pair = {},
                                bool strict = true) {
  alf::MonopoleConfig::Params p;
  p.epsilon = eps;
  p.delta = delta;
  p.points = std::move(points);
  p.center_charge = center;
  p.pair_charge = pair;
  p.strict = strict;
  return alf::MonopoleConfig::create(std::move(p));
}

}  // namespace fixtures
