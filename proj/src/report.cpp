#include "gmrfdiff/report.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <ostream>

#include "gmrfdiff/analysis.hpp"
#include "gmrfdiff/errors.hpp"

namespace gmrfdiff {

namespace {

long long as_index(std::size_t v) { return static_cast<long long>(v); }

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::to_string(std::get<long long>(c));
}

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

bool is_linear(AlgorithmKind kind) {
  return kind != AlgorithmKind::acs && kind != AlgorithmKind::asc && kind != AlgorithmKind::centralized;
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ConfigError("unknown format '" + name + "' (expected csv or json)");
}

Table curves_table(const RunResult& result) {
  Table t{{"iter", "algorithm", "msd_db"}, {}};
  for (const auto& a : result.algorithms) {
    for (std::size_t k = 0; k < a.msd.size(); ++k) t.rows.push_back({as_index(k), a.label, to_db(a.msd[k])});
  }
  return t;
}

Table comm_table(const RunResult& result) {
  Table t{{"iter", "algorithm", "entries", "dense_entries"}, {}};
  for (const auto& a : result.algorithms) {
    for (std::size_t k = 0; k < a.comm.size(); ++k) t.rows.push_back({as_index(k), a.label, a.comm[k], a.dense_comm});
  }
  return t;
}

Table per_node_table(const ResolvedScenario& resolved, const RunResult& result) {
  Table t{{"node", "algorithm", "msd_db_sim", "msd_db_theory"}, {}};
  for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
    const AlgorithmResult& res = result.algorithms[a];
    const ResolvedAlgorithm& alg = resolved.algorithms[a];
    Eigen::VectorXd theory;
    if (is_linear(alg.spec.kind)) {
      const TheoryReport rep = analyze_strategy(resolved.topology, alg.precision, resolved.model.covariance(),
                                                alg.weights, alg.step_sizes, resolved.stats);
      if (rep.ms_stable) theory = rep.msd_per_node;
    }
    for (Eigen::Index i = 0; i < res.steady_per_node.size(); ++i) {
      const Cell th = theory.size() > 0 ? Cell{to_db(theory(i))} : Cell{std::string()};
      t.rows.push_back({static_cast<long long>(i), res.label, to_db(res.steady_per_node(i)), th});
    }
  }
  return t;
}

Table tracking_table(const RunResult& result) {
  Table t{{"iter", "component_index", "estimate", "truth"}, {}};
  if (!result.tracking) return t;
  const TrackingTrace& tr = result.tracking.value();
  for (std::size_t k = 0; k < result.iters; ++k) {
    for (std::size_t c = 0; c < tr.components.size(); ++c) {
      t.rows.push_back({as_index(k), as_index(tr.components[c]), tr.estimate[c][k], tr.truth[c][k]});
    }
  }
  return t;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
  Table t{{"axis_value", "algorithm", "msd_db"}, {}};
  for (const auto& r : rows) t.rows.push_back({r.axis_value, r.algorithm, r.msd_db});
  return t;
}

Table theory_table(const ResolvedScenario& resolved) {
  Table t{{"algorithm", "metric", "node", "value"}, {}};
  const std::string none;
  for (const auto& alg : resolved.algorithms) {
    const std::string& label = alg.spec.label;
    const Eigen::VectorXd bounds = algorithm_step_bounds(resolved, alg);
    for (Eigen::Index i = 0; i < bounds.size(); ++i) {
      t.rows.push_back({label, std::string("step_size"), static_cast<long long>(i), alg.step_sizes(i)});
      t.rows.push_back({label, std::string("step_bound"), static_cast<long long>(i), bounds(i)});
    }
    if (!is_linear(alg.spec.kind)) continue;
    const TheoryReport rep = analyze_strategy(resolved.topology, alg.precision, resolved.model.covariance(),
                                              alg.weights, alg.step_sizes, resolved.stats);
    t.rows.push_back({label, std::string("spectral_radius_h"), none, rep.spectral_radius_h});
    t.rows.push_back({label, std::string("block_max_norm_h"), none, rep.block_max_norm_h});
    t.rows.push_back({label, std::string("block_max_norm_i_minus_md"), none, rep.block_max_norm_i_minus_md});
    t.rows.push_back({label, std::string("spectral_radius_f"), none, rep.spectral_radius_f});
    t.rows.push_back({label, std::string("mean_stable"), none, static_cast<long long>(rep.mean_stable)});
    t.rows.push_back({label, std::string("ms_stable"), none, static_cast<long long>(rep.ms_stable)});
    if (!rep.ms_stable) continue;
    for (Eigen::Index i = 0; i < rep.msd_per_node.size(); ++i) {
      t.rows.push_back({label, std::string("msd_db"), static_cast<long long>(i), to_db(rep.msd_per_node(i))});
    }
    t.rows.push_back({label, std::string("msd_network_db"), none, to_db(rep.msd_network)});
  }
  return t;
}

Table primary_table(const ResolvedScenario& resolved, const RunResult& result) {
  switch (resolved.scenario.output) {
    case OutputKind::curves: return curves_table(result);
    case OutputKind::per_node: return per_node_table(resolved, result);
    case OutputKind::tracking: return tracking_table(result);
  }
  return curves_table(result);
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << csv_escape(table.header[c]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(cell_text(row[c]));
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& table) {
  nlohmann::json doc{{"columns", table.header}, {"rows", nlohmann::json::array()}};
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      const Cell& cell = row[c];
      if (const auto* d = std::get_if<double>(&cell)) {
        obj[table.header[c]] = std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(format_number(*d));
      } else if (const auto* i = std::get_if<long long>(&cell)) {
        obj[table.header[c]] = *i;
      } else {
        obj[table.header[c]] = std::get<std::string>(cell);
      }
    }
    doc["rows"].push_back(std::move(obj));
  }
  out << doc.dump(1) << '\n';
}

void write_table(std::ostream& out, const Table& table, OutputFormat format) {
  if (format == OutputFormat::csv) {
    write_csv(out, table);
  } else {
    write_json(out, table);
  }
}

void write_table_file(const std::string& path, const Table& table, OutputFormat format) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_table(out, table, format);
}

}  // namespace gmrfdiff
