#include "gmrfdiff/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "gmrfdiff/analysis.hpp"
#include "gmrfdiff/errors.hpp"
#include "gmrfdiff/random.hpp"

namespace gmrfdiff {

using json = nlohmann::json;

namespace {

// ---- YAML to JSON -------------------------------------------------------

json scalar_to_json(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted
  if (text.empty() || text == "~" || text == "null") return nullptr;
  if (text == "true" || text == "True") return true;
  if (text == "false" || text == "False") return false;
  try {
    std::size_t used = 0;
    const long long as_int = std::stoll(text, &used);
    if (used == text.size()) return as_int;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double as_double = std::stod(text, &used);
    if (used == text.size()) return as_double;
  } catch (const std::exception&) {
  }
  return text;
}

json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return out;
    }
  }
  return nullptr;
}

// ---- strict readers -----------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path, "expected a mapping");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      fail(path + "." + key, "unknown key");
    }
  }
}

double read_double(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::size_t read_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::uint64_t read_seed(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer seed");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.get<long long>() < 0) fail(path, "seed must be non-negative");
  return static_cast<std::uint64_t>(v.get<long long>());
}

bool read_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string read_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> read_doubles(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) fail(path, "expected a number or a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_double(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Edge> read_edges(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected a list of [i, j] pairs");
  std::vector<Edge> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    if (!v[k].is_array() || v[k].size() != 2) fail(p, "expected [i, j]");
    out.push_back(Edge{read_count(v[k][0], p), read_count(v[k][1], p)});
  }
  return out;
}

template <typename Enum>
Enum read_enum(const json& v, const std::string& path, std::initializer_list<std::pair<const char*, Enum>> table) {
  const std::string name = read_string(v, path);
  for (const auto& [key, value] : table) {
    if (name == key) return value;
  }
  std::string options;
  for (const auto& [key, value] : table) options += std::string(options.empty() ? "" : ", ") + key;
  fail(path, "unknown value '" + name + "' (expected one of: " + options + ")");
}

CombinationRule read_rule(const json& v, const std::string& path) {
  return read_enum<CombinationRule>(v, path,
                                    {{"identity", CombinationRule::identity},
                                     {"uniform", CombinationRule::uniform},
                                     {"metropolis", CombinationRule::metropolis}});
}

ThresholdSpec read_threshold(const json& v, const std::string& path) {
  allow_keys(v, path, {"kind", "gamma", "beta", "epsilon"});
  ThresholdSpec t;
  if (!v.contains("kind")) fail(path + ".kind", "required");
  t.kind = read_enum<ThresholdKind>(v["kind"], path + ".kind",
                                    {{"soft", ThresholdKind::soft},
                                     {"reweighted_l1", ThresholdKind::reweighted_l1},
                                     {"garotte", ThresholdKind::garotte},
                                     {"l0", ThresholdKind::l0}});
  if (v.contains("gamma")) t.gamma = read_double(v["gamma"], path + ".gamma");
  if (v.contains("beta")) t.beta = read_double(v["beta"], path + ".beta");
  if (v.contains("epsilon")) t.epsilon = read_double(v["epsilon"], path + ".epsilon");
  try {
    t.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return t;
}

AlgorithmSpec read_algorithm(const json& v, const std::string& path) {
  allow_keys(v, path,
             {"label", "kind", "step_size", "match_rate_to", "q_rule", "w_rule", "agnostic_weights", "threshold"});
  AlgorithmSpec a;
  if (!v.contains("kind")) fail(path + ".kind", "required");
  a.kind = read_enum<AlgorithmKind>(v["kind"], path + ".kind",
                                    {{"standalone", AlgorithmKind::standalone},
                                     {"centralized", AlgorithmKind::centralized},
                                     {"atc_gmrf", AlgorithmKind::atc_gmrf},
                                     {"cta_gmrf", AlgorithmKind::cta_gmrf},
                                     {"atc_agnostic", AlgorithmKind::atc_agnostic},
                                     {"cta_agnostic", AlgorithmKind::cta_agnostic},
                                     {"acs", AlgorithmKind::acs},
                                     {"asc", AlgorithmKind::asc}});
  a.label = v.contains("label") ? read_string(v["label"], path + ".label") : to_string(a.kind);
  if (v.contains("step_size")) a.step_sizes = read_doubles(v["step_size"], path + ".step_size");
  if (v.contains("match_rate_to")) a.match_rate_to = read_string(v["match_rate_to"], path + ".match_rate_to");
  if (a.step_sizes.empty() == !a.match_rate_to.has_value()) {
    fail(path, "exactly one of step_size and match_rate_to is required");
  }
  if (v.contains("q_rule")) a.q_rule = read_rule(v["q_rule"], path + ".q_rule");
  if (v.contains("w_rule")) a.w_rule = read_rule(v["w_rule"], path + ".w_rule");
  if (v.contains("agnostic_weights")) {
    a.agnostic_weights = read_enum<AgnosticWeights>(
        v["agnostic_weights"], path + ".agnostic_weights",
        {{"diagonal", AgnosticWeights::diagonal}, {"identity", AgnosticWeights::identity}});
  }
  const bool sparse = a.kind == AlgorithmKind::acs || a.kind == AlgorithmKind::asc;
  if (sparse != v.contains("threshold")) fail(path + ".threshold", sparse ? "required for acs/asc" : "only valid for acs/asc");
  if (sparse) a.threshold = read_threshold(v["threshold"], path + ".threshold");
  return a;
}

Scenario scenario_from_json(const json& doc) {
  allow_keys(doc, "scenario",
             {"name", "seed", "runs", "iters", "steady_window", "jobs", "allow_unstable", "output", "topology", "gmrf",
              "regressors", "parameter", "algorithms", "tracking", "note"});
  Scenario s;
  if (doc.contains("name")) s.name = read_string(doc["name"], "name");
  if (doc.contains("note")) s.note = read_string(doc["note"], "note");
  if (doc.contains("seed")) s.seed = read_seed(doc["seed"], "seed");
  if (doc.contains("runs")) s.runs = read_count(doc["runs"], "runs");
  if (doc.contains("iters")) s.iters = read_count(doc["iters"], "iters");
  if (doc.contains("steady_window")) s.steady_window = read_count(doc["steady_window"], "steady_window");
  if (doc.contains("jobs")) s.jobs = read_count(doc["jobs"], "jobs");
  if (doc.contains("allow_unstable")) s.allow_unstable = read_bool(doc["allow_unstable"], "allow_unstable");
  if (doc.contains("output")) {
    s.output = read_enum<OutputKind>(doc["output"], "output",
                                     {{"curves", OutputKind::curves},
                                      {"per_node", OutputKind::per_node},
                                      {"tracking", OutputKind::tracking}});
  }

  if (!doc.contains("topology")) fail("topology", "required");
  const json& topo = doc["topology"];
  allow_keys(topo, "topology", {"generate", "positions", "comm_edges", "dep_edges"});
  if (topo.contains("generate") == topo.contains("positions")) {
    fail("topology", "give either generate or positions/comm_edges/dep_edges");
  }
  if (topo.contains("generate")) {
    const json& g = topo["generate"];
    allow_keys(g, "topology.generate", {"nodes", "radius", "side", "seed"});
    if (!g.contains("nodes") || !g.contains("radius")) fail("topology.generate", "nodes and radius are required");
    s.topology.nodes = read_count(g["nodes"], "topology.generate.nodes");
    s.topology.radius = read_double(g["radius"], "topology.generate.radius");
    if (g.contains("side")) s.topology.side = read_double(g["side"], "topology.generate.side");
    if (!(s.topology.side > 0.0) || !(s.topology.radius > 0.0)) fail("topology.generate", "side and radius must be positive");
    if (g.contains("seed")) s.topology.seed = read_seed(g["seed"], "topology.generate.seed");
  } else {
    const json& pos = topo["positions"];
    if (!pos.is_array() || pos.empty()) fail("topology.positions", "expected a non-empty list of [x, y]");
    for (std::size_t k = 0; k < pos.size(); ++k) {
      const std::string p = "topology.positions[" + std::to_string(k) + "]";
      if (!pos[k].is_array() || pos[k].size() != 2) fail(p, "expected [x, y]");
      s.topology.positions.push_back(Point{read_double(pos[k][0], p), read_double(pos[k][1], p)});
    }
    if (topo.contains("comm_edges")) s.topology.comm_edges = read_edges(topo["comm_edges"], "topology.comm_edges");
    if (topo.contains("dep_edges")) s.topology.dep_edges = read_edges(topo["dep_edges"], "topology.dep_edges");
    s.topology.nodes = s.topology.positions.size();
  }

  if (doc.contains("gmrf")) {
    const json& g = doc["gmrf"];
    allow_keys(g, "gmrf", {"sigma2", "nugget", "kappa", "covariance"});
    if (g.contains("sigma2")) s.gmrf.sigma2 = read_double(g["sigma2"], "gmrf.sigma2");
    if (g.contains("nugget")) s.gmrf.nugget = read_double(g["nugget"], "gmrf.nugget");
    if (g.contains("kappa")) s.gmrf.kappa = read_double(g["kappa"], "gmrf.kappa");
    if (g.contains("covariance")) {
      const json& c = g["covariance"];
      if (!c.is_array() || c.empty()) fail("gmrf.covariance", "expected a square list of rows");
      const auto n = static_cast<Eigen::Index>(c.size());
      Eigen::MatrixXd cov(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = read_doubles(c[static_cast<std::size_t>(i)], "gmrf.covariance");
        if (static_cast<Eigen::Index>(row.size()) != n) fail("gmrf.covariance", "matrix is not square");
        for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = row[static_cast<std::size_t>(j)];
      }
      s.covariance = cov;
    }
  }

  if (!doc.contains("regressors")) fail("regressors", "required");
  {
    const json& r = doc["regressors"];
    allow_keys(r, "regressors", {"m_dim", "powers", "power_range"});
    if (!r.contains("m_dim")) fail("regressors.m_dim", "required");
    s.regressors.m_dim = read_count(r["m_dim"], "regressors.m_dim");
    if (r.contains("powers") == r.contains("power_range")) fail("regressors", "give exactly one of powers and power_range");
    if (r.contains("powers")) s.regressors.powers = read_doubles(r["powers"], "regressors.powers");
    if (r.contains("power_range")) {
      const auto range = read_doubles(r["power_range"], "regressors.power_range");
      if (range.size() != 2 || !(range[0] > 0.0) || range[1] < range[0]) {
        fail("regressors.power_range", "expected [low, high] with 0 < low <= high");
      }
      s.regressors.power_range = std::make_pair(range[0], range[1]);
    }
  }

  if (doc.contains("parameter")) {
    const json& p = doc["parameter"];
    allow_keys(p, "parameter",
               {"kind", "theta0", "value", "support_size", "ar_coeff", "drive_mean", "drive_var", "zero_intervals"});
    if (p.contains("kind")) {
      s.parameter.kind = read_enum<ParameterKind>(p["kind"], "parameter.kind",
                                                  {{"static_dense", ParameterKind::static_dense},
                                                   {"static_sparse", ParameterKind::static_sparse},
                                                   {"ar_tracking", ParameterKind::ar_tracking}});
    }
    if (p.contains("theta0")) s.parameter.theta0 = read_doubles(p["theta0"], "parameter.theta0");
    if (p.contains("value")) s.parameter.value = read_double(p["value"], "parameter.value");
    if (p.contains("support_size")) s.parameter.support_size = read_count(p["support_size"], "parameter.support_size");
    if (p.contains("ar_coeff")) s.parameter.ar_coeff = read_double(p["ar_coeff"], "parameter.ar_coeff");
    if (p.contains("drive_mean")) s.parameter.drive_mean = read_double(p["drive_mean"], "parameter.drive_mean");
    if (p.contains("drive_var")) s.parameter.drive_var = read_double(p["drive_var"], "parameter.drive_var");
    if (p.contains("zero_intervals")) {
      const json& z = p["zero_intervals"];
      if (!z.is_array()) fail("parameter.zero_intervals", "expected a list");
      for (std::size_t k = 0; k < z.size(); ++k) {
        const std::string path = "parameter.zero_intervals[" + std::to_string(k) + "]";
        allow_keys(z[k], path, {"start", "end", "component"});
        if (!z[k].contains("start") || !z[k].contains("end") || !z[k].contains("component")) {
          fail(path, "start, end and component are required");
        }
        s.parameter.zero_intervals.push_back(ZeroInterval{read_count(z[k]["start"], path + ".start"),
                                                          read_count(z[k]["end"], path + ".end"),
                                                          read_count(z[k]["component"], path + ".component")});
      }
    }
  }

  if (!doc.contains("algorithms") || !doc["algorithms"].is_array()) fail("algorithms", "expected a list");
  for (std::size_t k = 0; k < doc["algorithms"].size(); ++k) {
    s.algorithms.push_back(read_algorithm(doc["algorithms"][k], "algorithms[" + std::to_string(k) + "]"));
  }

  if (doc.contains("tracking")) {
    const json& t = doc["tracking"];
    allow_keys(t, "tracking", {"algorithm", "node", "components"});
    if (t.contains("algorithm")) s.tracking.algorithm = read_string(t["algorithm"], "tracking.algorithm");
    if (t.contains("node")) s.tracking.node = read_count(t["node"], "tracking.node");
    if (t.contains("components")) {
      s.tracking.components.clear();
      const json& c = t["components"];
      if (!c.is_array()) fail("tracking.components", "expected a list");
      for (std::size_t k = 0; k < c.size(); ++k) s.tracking.components.push_back(read_count(c[k], "tracking.components"));
    }
  }
  s.validate();
  return s;
}

// ---- resolution helpers -------------------------------------------------

bool is_agnostic(AlgorithmKind kind) {
  return kind == AlgorithmKind::standalone || kind == AlgorithmKind::atc_agnostic ||
         kind == AlgorithmKind::cta_agnostic;
}

// rho of the mean-error recursion for the given per-node steps.
double mean_rate(const ResolvedScenario& r, const ResolvedAlgorithm& a, const Eigen::VectorXd& steps) {
  if (a.spec.kind == AlgorithmKind::centralized) return centralized_spectral_radius(a.precision, r.stats, steps(0));
  RegressorStats scalar = r.stats;
  scalar.m_dim = 1;
  const Eigen::MatrixXd d = expected_update_matrix(r.topology, a.precision, a.weights.s, scalar);
  return spectral_radius(transition_matrix(a.weights.p1, a.weights.p2, d, steps));
}

}  // namespace

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::standalone: return "standalone";
    case AlgorithmKind::centralized: return "centralized";
    case AlgorithmKind::atc_gmrf: return "atc_gmrf";
    case AlgorithmKind::cta_gmrf: return "cta_gmrf";
    case AlgorithmKind::atc_agnostic: return "atc_agnostic";
    case AlgorithmKind::cta_agnostic: return "cta_agnostic";
    case AlgorithmKind::acs: return "acs";
    case AlgorithmKind::asc: return "asc";
  }
  return "unknown";
}

std::string to_string(OutputKind kind) {
  switch (kind) {
    case OutputKind::curves: return "curves";
    case OutputKind::per_node: return "per_node";
    case OutputKind::tracking: return "tracking";
  }
  return "unknown";
}

void Scenario::validate() const {
  if (runs < 1) throw ConfigError("runs: must be at least 1");
  if (iters < 1) throw ConfigError("iters: must be at least 1");
  if (steady_window < 1 || steady_window >= iters) throw ConfigError("steady_window: must lie in [1, iters)");
  if (jobs < 1) throw ConfigError("jobs: must be at least 1");
  if (topology.nodes < 1) throw ConfigError("topology: at least one node is required");
  if (regressors.m_dim < 1) throw ConfigError("regressors.m_dim: must be at least 1");
  if (!regressors.powers.empty() && regressors.powers.size() != topology.nodes) {
    throw ConfigError("regressors.powers: one entry per node required");
  }
  if (algorithms.empty()) throw ConfigError("algorithms: at least one algorithm is required");
  std::set<std::string> labels;
  for (const auto& a : algorithms) {
    if (!labels.insert(a.label).second) throw ConfigError("algorithms: duplicate label '" + a.label + "'");
    if (a.step_sizes.size() != 1 && a.step_sizes.size() != topology.nodes && !a.match_rate_to) {
      throw ConfigError("algorithms." + a.label + ".step_size: give one value or one per node");
    }
    for (double mu : a.step_sizes) {
      if (!(mu > 0.0)) throw ConfigError("algorithms." + a.label + ".step_size: must be positive");
    }
  }
  for (const auto& a : algorithms) {
    if (a.match_rate_to) {
      const auto& ref = algorithm(*a.match_rate_to);
      if (ref.match_rate_to) throw ConfigError("algorithms." + a.label + ".match_rate_to: reference must have an explicit step");
    }
  }
  if (!tracking.algorithm.empty()) algorithm(tracking.algorithm);
  if (tracking.node >= topology.nodes) throw ConfigError("tracking.node: out of range");
  for (std::size_t c : tracking.components) {
    if (c >= regressors.m_dim) throw ConfigError("tracking.components: out of range");
  }
}

const AlgorithmSpec& Scenario::algorithm(const std::string& label) const {
  for (const auto& a : algorithms) {
    if (a.label == label) return a;
  }
  throw ConfigError("no algorithm labelled '" + label + "'");
}

Scenario parse_scenario_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

Scenario parse_scenario_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
  return scenario_from_json(yaml_to_json(root));
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return is_json ? parse_scenario_json(buffer.str()) : parse_scenario_yaml(buffer.str());
}

Eigen::VectorXd algorithm_step_bounds(const ResolvedScenario& r, const ResolvedAlgorithm& a) {
  const auto n = static_cast<Eigen::Index>(r.topology.n_nodes());
  if (a.spec.kind == AlgorithmKind::centralized) {
    double lambda = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) lambda += a.precision(i, i) * r.stats.per_node_power[static_cast<std::size_t>(i)];
    return Eigen::VectorXd::Constant(n, 2.0 / lambda);
  }
  return step_size_bounds(r.topology, a.precision, a.weights.s, r.stats);
}

ResolvedScenario resolve(const Scenario& scenario) {
  scenario.validate();
  ResolvedScenario r;
  r.scenario = scenario;
  const std::uint64_t master = scenario.seed;

  try {
    if (scenario.topology.generated()) {
      RandomStream stream = scenario.topology.seed ? RandomStream(*scenario.topology.seed)
                                                   : RandomStream(master, 0, StreamRole::topology);
      const double side = scenario.topology.side;
      const NetworkTopology unit =
          random_geometric_topology(scenario.topology.nodes, scenario.topology.radius / side, stream);
      std::vector<Point> scaled = unit.positions();
      for (Point& p : scaled) p = Point{p.x * side, p.y * side};
      r.topology = NetworkTopology::build(std::move(scaled), unit.comm_edges(), unit.dep_edges());
    } else {
      r.topology = NetworkTopology::build(scenario.topology.positions, scenario.topology.comm_edges,
                                          scenario.topology.dep_edges);
    }
    r.model = scenario.covariance ? GmrfModel::from_covariance(*scenario.covariance)
                                  : GmrfModel::build(r.topology, scenario.gmrf);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("topology/gmrf: ") + e.what());
  }
  const std::size_t n = r.topology.n_nodes();
  if (r.model.n_nodes() != n) throw ConfigError("gmrf.covariance: size does not match the node count");

  r.stats.m_dim = scenario.regressors.m_dim;
  if (!scenario.regressors.powers.empty()) {
    r.stats.per_node_power = scenario.regressors.powers;
  } else {
    RandomStream stream(master, 0, StreamRole::powers);
    const auto [lo, hi] = *scenario.regressors.power_range;
    for (std::size_t i = 0; i < n; ++i) r.stats.per_node_power.push_back(lo + (hi - lo) * stream.uniform());
  }

  const ParameterSpec& ps = scenario.parameter;
  const auto m = static_cast<Eigen::Index>(scenario.regressors.m_dim);
  r.process.kind = ps.kind;
  r.process.support_size = ps.support_size;
  r.process.sparse_value = ps.value;
  r.process.ar_coeff = ps.ar_coeff;
  r.process.drive_mean = ps.drive_mean;
  r.process.drive_var = ps.drive_var;
  r.process.zero_intervals = ps.zero_intervals;
  if (!ps.theta0.empty()) {
    if (static_cast<Eigen::Index>(ps.theta0.size()) != m) throw ConfigError("parameter.theta0: length must equal m_dim");
    r.process.theta0 = Eigen::Map<const Eigen::VectorXd>(ps.theta0.data(), m);
  } else {
    r.process.theta0 = ps.kind == ParameterKind::static_sparse ? Eigen::VectorXd::Zero(m)
                                                               : Eigen::VectorXd::Constant(m, ps.value);
  }
  try {
    r.stats.validate();
    r.process.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  // Weights and explicit steps first, rate-matched steps second.
  for (const auto& spec : scenario.algorithms) {
    ResolvedAlgorithm a;
    a.spec = spec;
    a.linear = spec.kind != AlgorithmKind::acs && spec.kind != AlgorithmKind::asc;
    if (is_agnostic(spec.kind)) {
      a.precision = spec.agnostic_weights == AgnosticWeights::diagonal
                        ? r.model.agnostic_precision()
                        : Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    } else {
      a.precision = r.model.precision();
    }
    const Eigen::MatrixXd q = adaptation_weights(r.topology, spec.q_rule);
    const Eigen::MatrixXd w = build_combination(r.topology, spec.w_rule);
    switch (spec.kind) {
      case AlgorithmKind::standalone:
      case AlgorithmKind::centralized:
        a.weights = CombinationMatrices::standalone(n);
        break;
      case AlgorithmKind::cta_gmrf:
      case AlgorithmKind::cta_agnostic:
        a.weights = CombinationMatrices::cta(q, w);
        break;
      default:
        a.weights = CombinationMatrices::atc(q, w);
        break;
    }
    if (!spec.step_sizes.empty()) {
      if (spec.step_sizes.size() == 1) {
        a.step_sizes = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), spec.step_sizes[0]);
      } else {
        a.step_sizes = Eigen::Map<const Eigen::VectorXd>(spec.step_sizes.data(), static_cast<Eigen::Index>(n));
      }
    }
    r.algorithms.push_back(std::move(a));
  }
  // Explicit steps are checked first so an unstable reference is reported as such.
  const auto check_bounds = [&](const ResolvedAlgorithm& a) {
    if (scenario.allow_unstable) return;
    const Eigen::VectorXd bounds = algorithm_step_bounds(r, a);
    for (Eigen::Index i = 0; i < bounds.size(); ++i) {
      if (a.step_sizes(i) >= bounds(i)) {
        throw Unstable("algorithm '" + a.spec.label + "': step " + std::to_string(a.step_sizes(i)) + " at node " +
                       std::to_string(i) + " is not below the mean-stability bound " + std::to_string(bounds(i)));
      }
    }
  };
  for (const auto& a : r.algorithms) {
    if (!a.spec.match_rate_to) check_bounds(a);
  }
  for (auto& a : r.algorithms) {
    if (!a.spec.match_rate_to) continue;
    const auto ref = std::find_if(r.algorithms.begin(), r.algorithms.end(),
                                  [&](const ResolvedAlgorithm& b) { return b.spec.label == *a.spec.match_rate_to; });
    const double target = mean_rate(r, *ref, ref->step_sizes);
    const auto ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    const double guess = ref->step_sizes.mean();
    try {
      const double mu = rate_matched_step([&](double step) { return mean_rate(r, a, step * ones); }, target, 1e-4, guess);
      a.step_sizes = mu * ones;
    } catch (const Error& e) {
      throw ConfigError("algorithms." + a.spec.label + ".match_rate_to: " + e.what());
    }
  }

  for (const auto& a : r.algorithms) {
    if (a.spec.match_rate_to) check_bounds(a);
  }
  return r;
}

}  // namespace gmrfdiff
