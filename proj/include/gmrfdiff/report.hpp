#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "gmrfdiff/runner.hpp"
#include "gmrfdiff/scenario.hpp"

namespace gmrfdiff {

using Cell = std::variant<std::string, double, long long>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

enum class OutputFormat { csv, json };
OutputFormat parse_format(const std::string& name);

// iter,algorithm,msd_db
Table curves_table(const RunResult& result);
// iter,algorithm,entries,dense_entries
Table comm_table(const RunResult& result);
// node,algorithm,msd_db_sim,msd_db_theory (theory empty for non-linear kinds)
Table per_node_table(const ResolvedScenario& resolved, const RunResult& result);
// iter,component_index,estimate,truth
Table tracking_table(const RunResult& result);
// axis_value,algorithm,msd_db
Table sweep_table(const std::vector<SweepRow>& rows);
// algorithm,metric,node,value
Table theory_table(const ResolvedScenario& resolved);

// Table the scenario's `output` kind asks for.
Table primary_table(const ResolvedScenario& resolved, const RunResult& result);

void write_csv(std::ostream& out, const Table& table);
// {"columns": [...], "rows": [{column: value, ...}, ...]}
void write_json(std::ostream& out, const Table& table);
void write_table(std::ostream& out, const Table& table, OutputFormat format);
void write_table_file(const std::string& path, const Table& table, OutputFormat format);

}  // namespace gmrfdiff
