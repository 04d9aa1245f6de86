#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bufmanet/harness.hpp"
#include "json.hpp"

namespace bufmanet {

using nlohmann::json;

namespace {

constexpr const char* kSweepParams[] = {"n", "m", "Bs", "Br", "lambda_s", "nu", "delta"};

bool is_integer_param(const std::string& name) {
  return name == "n" || name == "m" || name == "Bs" || name == "Br" || name == "nu";
}

int get_int(const json& value, const std::string& key) {
  if (!value.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  const auto v = value.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError("'" + key + "' is out of range");
  return static_cast<int>(v);
}

double get_double(const json& value, const std::string& key) {
  if (!value.is_number()) throw ConfigError("'" + key + "' must be a number");
  return value.get<double>();
}

bool get_bool(const json& value, const std::string& key) {
  if (!value.is_boolean()) throw ConfigError("'" + key + "' must be true or false");
  return value.get<bool>();
}

std::string get_string(const json& value, const std::string& key) {
  if (!value.is_string()) throw ConfigError("'" + key + "' must be a string");
  return value.get<std::string>();
}

Sweep parse_sweep(const json& node) {
  if (!node.is_object()) throw ConfigError("'sweep' must be an object");
  Sweep sweep;
  bool have_param = false;
  bool have_values = false;
  for (const auto& [key, value] : node.items()) {
    if (key == "param") {
      sweep.param = get_string(value, "sweep.param");
      have_param = true;
    } else if (key == "values") {
      if (!value.is_array()) throw ConfigError("'sweep.values' must be an array");
      for (const auto& v : value) sweep.values.push_back(get_double(v, "sweep.values"));
      have_values = true;
    } else if (key == "density") {
      sweep.density = get_double(value, "sweep.density");
    } else {
      throw ConfigError("unknown sweep key '" + key + "'");
    }
  }
  if (!have_param) throw ConfigError("'sweep.param' is required");
  if (!have_values) throw ConfigError("'sweep.values' is required");
  return sweep;
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate();
  try {
    sim.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (!(delay_tolerance > 0.0)) throw ConfigError("delay_tolerance must be positive");
  if (!(fixed_point.tolerance > 0.0)) throw ConfigError("fp_tolerance must be positive");
  if (fixed_point.max_iterations < 1 || fixed_point.max_iterations > 10000)
    throw ConfigError("fp_max_iterations must lie in [1, 10000]");
  if (sweep) {
    bool known = false;
    for (const char* name : kSweepParams) known = known || sweep->param == name;
    if (!known) throw ConfigError("cannot sweep '" + sweep->param + "'");
    if (sweep->values.empty()) throw ConfigError("sweep value list is empty");
    if (sweep->density && sweep->param != "n")
      throw ConfigError("sweep density only applies to an n sweep");
    for (double v : sweep->values) apply_sweep_value(params, *sweep, v).validate();
  }
}

NetworkParams apply_sweep_value(const NetworkParams& params, const Sweep& sweep, double value) {
  if (!std::isfinite(value)) throw ConfigError("sweep values must be finite");
  if (is_integer_param(sweep.param) &&
      (value != std::floor(value) || std::abs(value) > std::numeric_limits<int>::max()))
    throw ConfigError("'" + sweep.param + "' sweep values must be integers");
  NetworkParams out = params;
  const int iv = static_cast<int>(value);
  if (sweep.param == "n") {
    out.n = iv;
    if (sweep.density) {
      const double d = *sweep.density;
      if (!(d > 0.0)) throw ConfigError("sweep density must be positive");
      const double side = std::round(std::sqrt(value / d));
      if (side < 1.0 || std::abs(side * side * d - value) > 1e-9)
        throw ConfigError("n = " + std::to_string(iv) + " gives a non-square cell count at density " +
                          std::to_string(d));
      out.m = static_cast<int>(side);
    }
  } else if (sweep.param == "m") {
    out.m = iv;
  } else if (sweep.param == "Bs") {
    out.source_buffer = iv;
  } else if (sweep.param == "Br") {
    out.relay_buffer = iv;
  } else if (sweep.param == "lambda_s") {
    out.lambda = value;
  } else if (sweep.param == "nu") {
    out.nu = iv;
  } else if (sweep.param == "delta") {
    out.delta = value;
  } else {
    throw ConfigError("cannot sweep '" + sweep.param + "'");
  }
  return out;
}

std::vector<NetworkParams> expand_scenarios(const ExperimentConfig& config) {
  std::vector<NetworkParams> base;
  if (config.sweep) {
    for (double v : config.sweep->values) base.push_back(apply_sweep_value(config.params, *config.sweep, v));
  } else {
    base.push_back(config.params);
  }
  if (!config.both_feedback) return base;
  std::vector<NetworkParams> out;
  for (auto p : base) {
    p.feedback = false;
    out.push_back(p);
    p.feedback = true;
    out.push_back(p);
  }
  return out;
}

ExperimentConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig c;
  for (const auto& [key, value] : root.items()) {
    if (key == "n") c.params.n = get_int(value, key);
    else if (key == "m") c.params.m = get_int(value, key);
    else if (key == "Bs") c.params.source_buffer = get_int(value, key);
    else if (key == "Br") c.params.relay_buffer = get_int(value, key);
    else if (key == "lambda_s") c.params.lambda = get_double(value, key);
    else if (key == "feedback") c.params.feedback = get_bool(value, key);
    else if (key == "mac") c.params.mac = parse_mac(get_string(value, key));
    else if (key == "nu") c.params.nu = get_int(value, key);
    else if (key == "delta") c.params.delta = get_double(value, key);
    else if (key == "mobility") c.params.mobility = parse_mobility(get_string(value, key));
    else if (key == "slots") {
      if (!value.is_number_integer()) throw ConfigError("'slots' must be an integer");
      c.sim.slots = value.get<std::int64_t>();
    } else if (key == "replications") c.sim.replications = get_int(value, key);
    else if (key == "warmup_fraction") c.sim.warmup_fraction = get_double(value, key);
    else if (key == "seed") {
      if (!value.is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
      c.sim.seed = value.get<std::uint64_t>();
    } else if (key == "threads") c.sim.threads = get_int(value, key);
    else if (key == "random_derangement") c.sim.random_derangement = get_bool(value, key);
    else if (key == "sweep") c.sweep = parse_sweep(value);
    else if (key == "tolerance") c.tolerance = get_double(value, key);
    else if (key == "delay_tolerance") c.delay_tolerance = get_double(value, key);
    else if (key == "both_feedback") c.both_feedback = get_bool(value, key);
    else if (key == "with_sim") c.with_sim = get_bool(value, key);
    else if (key == "fp_tolerance") c.fixed_point.tolerance = get_double(value, key);
    else if (key == "fp_max_iterations") c.fixed_point.max_iterations = get_int(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return config_from_json(text.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json root = {
      {"n", c.params.n},
      {"m", c.params.m},
      {"Bs", c.params.source_buffer},
      {"Br", c.params.relay_buffer},
      {"lambda_s", c.params.lambda},
      {"feedback", c.params.feedback},
      {"mac", std::string(to_string(c.params.mac))},
      {"nu", c.params.nu},
      {"delta", c.params.delta},
      {"mobility", std::string(to_string(c.params.mobility))},
      {"slots", c.sim.slots},
      {"replications", c.sim.replications},
      {"warmup_fraction", c.sim.warmup_fraction},
      {"seed", c.sim.seed},
      {"threads", c.sim.threads},
      {"random_derangement", c.sim.random_derangement},
      {"tolerance", c.tolerance},
      {"delay_tolerance", c.delay_tolerance},
      {"both_feedback", c.both_feedback},
      {"with_sim", c.with_sim},
      {"fp_tolerance", c.fixed_point.tolerance},
      {"fp_max_iterations", c.fixed_point.max_iterations},
  };
  if (c.sweep) {
    json s = {{"param", c.sweep->param}, {"values", c.sweep->values}};
    if (c.sweep->density) s["density"] = *c.sweep->density;
    root["sweep"] = s;
  }
  return root.dump(2);
}

}  // namespace bufmanet
