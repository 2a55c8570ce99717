#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "specres/experiments.hpp"

namespace specres {

using nlohmann::json;

namespace {

// Allowed keys per section; anything else is almost certainly a typo.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"", {"params", "mode", "r_max", "sweep", "sim", "menu_adjust", "grid", "output"}},
      {"params", {"lambda_c", "lambda_n", "pi_c", "kappa"}},
      {"sweep", {"variable", "from", "to", "steps"}},
      {"sim", {"n_agents", "seed", "opt_out_allowed", "threads"}},
      {"menu_adjust", {"p_c", "r_c", "p_n", "r_n"}},
      {"grid", {"T", "C", "occupancy_prob", "seed", "cost", "solve_with_kappa"}},
      {"grid.cost", {"kind", "a", "b", "max_cost"}},
      {"output", {"out", "svg"}},
  };
  return s;
}

void check_keys(const json& node, const std::string& section) {
  const auto it = schema().find(section);
  if (it == schema().end() || !node.is_object()) return;
  for (const auto& [key, value] : node.items()) {
    if (!it->second.contains(key)) {
      throw ConfigError("unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
    }
    check_keys(value, section.empty() ? key : section + "." + key);
  }
}

template <typename T>
T get(const json& node, const char* key, const std::string& section) {
  try {
    return node.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config value '" + section + "." + key + "': " + e.what());
  }
}

std::optional<double> get_optional_number(const json& node, const char* key) {
  if (!node.contains(key) || node.at(key).is_null()) return std::nullopt;
  if (!node.at(key).is_number()) throw ConfigError(std::string("config value '") + key + "' must be a number");
  return node.at(key).get<double>();
}

std::optional<std::string> get_optional_string(const json& node, const char* key) {
  if (!node.contains(key) || node.at(key).is_null()) return std::nullopt;
  if (!node.at(key).is_string()) throw ConfigError(std::string("config value '") + key + "' must be a string");
  return node.at(key).get<std::string>();
}

json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

}  // namespace

MarketParams ExperimentConfig::params() const {
  if (!(lambda_c > 0.0) || !(lambda_n > 0.0)) {
    throw ConfigError("params.lambda_c and params.lambda_n must be positive");
  }
  if (lambda_c >= lambda_n) {
    std::ostringstream os;
    os << "params.lambda_c (" << lambda_c << ") must be strictly below params.lambda_n (" << lambda_n
       << "): mission-critical applications need the higher expected utility";
    throw ConfigError(os.str());
  }
  if (!(pi_c >= 0.0 && pi_c <= 1.0)) {
    std::ostringstream os;
    os << "params.pi_c (" << pi_c << ") must be a proportion in [0, 1]";
    throw ConfigError(os.str());
  }
  if (!(kappa >= 0.0)) {
    std::ostringstream os;
    os << "params.kappa (" << kappa << ") must be a nonnegative channel cost";
    throw ConfigError(os.str());
  }
  return {lambda_c, lambda_n, pi_c, kappa};
}

json default_config_json() {
  return json{
      {"params", {{"lambda_c", 0.2}, {"lambda_n", 1.0}, {"pi_c", 0.2}, {"kappa", 0.1}}},
      {"mode", "paper"},
      {"sweep", {{"variable", "pi_c"}, {"from", 0.05}, {"to", 0.45}, {"steps", 41}}},
      {"sim", {{"n_agents", 100000}, {"seed", 1}, {"opt_out_allowed", true}, {"threads", 0}}},
      {"menu_adjust", {{"p_c", 0.0}, {"r_c", 0.0}, {"p_n", 0.0}, {"r_n", 0.0}}},
      {"grid",
       {{"T", 1000},
        {"C", 10},
        {"occupancy_prob", 0.3},
        {"seed", 1},
        {"cost", {{"kind", "constant"}, {"a", 0.1}, {"b", 0.0}}},
        {"solve_with_kappa", false}}},
      {"output", json::object()},
  };
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = parse_scalar(assignment.substr(eq + 1));
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig config_from_json(const json& user) {
  if (!user.is_object()) throw ConfigError("config root must be an object");
  check_keys(user, "");
  json doc = default_config_json();
  doc.merge_patch(user);

  ExperimentConfig cfg;
  const json& p = doc.at("params");
  cfg.lambda_c = get<double>(p, "lambda_c", "params");
  cfg.lambda_n = get<double>(p, "lambda_n", "params");
  cfg.pi_c = get<double>(p, "pi_c", "params");
  cfg.kappa = get<double>(p, "kappa", "params");

  try {
    cfg.mode = parse_solve_mode(get<std::string>(doc, "mode", "config"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  cfg.r_max = get_optional_number(doc, "r_max");

  const json& s = doc.at("sweep");
  try {
    cfg.sweep.variable = parse_sweep_variable(get<std::string>(s, "variable", "sweep"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  cfg.sweep.from = get<double>(s, "from", "sweep");
  cfg.sweep.to = get<double>(s, "to", "sweep");
  cfg.sweep.steps = get<std::uint32_t>(s, "steps", "sweep");

  if (doc.contains("sim") && !doc.at("sim").is_null()) {
    const json& m = doc.at("sim");
    SimConfig sim;
    sim.n_agents = get<std::uint64_t>(m, "n_agents", "sim");
    sim.seed = get<std::uint64_t>(m, "seed", "sim");
    sim.opt_out_allowed = get<bool>(m, "opt_out_allowed", "sim");
    sim.threads = get<unsigned>(m, "threads", "sim");
    if (sim.n_agents < 1) throw ConfigError("sim.n_agents must be at least 1");
    cfg.sim = sim;
  }

  const json& a = doc.at("menu_adjust");
  cfg.menu_adjust = {get<double>(a, "p_c", "menu_adjust"), get<double>(a, "r_c", "menu_adjust"),
                     get<double>(a, "p_n", "menu_adjust"), get<double>(a, "r_n", "menu_adjust")};

  const json& g = doc.at("grid");
  cfg.grid.horizon = get<std::uint32_t>(g, "T", "grid");
  cfg.grid.channels = get<std::uint32_t>(g, "C", "grid");
  cfg.grid.occupancy_prob = get<double>(g, "occupancy_prob", "grid");
  cfg.grid.seed = get<std::uint64_t>(g, "seed", "grid");
  cfg.grid.solve_with_kappa = get<bool>(g, "solve_with_kappa", "grid");
  const json& c = g.at("cost");
  try {
    cfg.grid.cost.kind = parse_cost_kind(get<std::string>(c, "kind", "grid.cost"));
    cfg.grid.cost.a = get<double>(c, "a", "grid.cost");
    cfg.grid.cost.b = get<double>(c, "b", "grid.cost");
    cfg.grid.cost.max_cost = get_optional_number(c, "max_cost");
    cfg.grid.cost.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid.cost: ") + e.what());
  }

  const json& o = doc.at("output");
  cfg.out_path = get_optional_string(o, "out");
  cfg.svg_path = get_optional_string(o, "svg");
  return cfg;
}

ExperimentConfig load_config(const std::optional<std::string>& path,
                             const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open config file '" + *path + "'");
    try {
      doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + *path + "': " + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace specres
