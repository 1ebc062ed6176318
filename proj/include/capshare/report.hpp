#pragma once

#include "capshare/erlang.hpp"
#include "capshare/simulate.hpp"
#include "capshare/tables.hpp"

namespace capshare {

struct AnalyzeOptions {
  bool run_exact = true;
  bool run_sim = false;
  std::size_t max_states = 1'000'000;
  SimParams sim;
};

// Loss probability of one configuration by every enabled method.
struct LossReport {
  ErlangBResult approx;
  std::optional<double> exact;
  std::string exact_skip_reason;  // nonempty when the exact column was skipped
  std::optional<LossEstimate> sim;
};

LossReport analyze(const SystemConfig& config, const AnalyzeOptions& options);

struct TableOptions {
  std::string format = "md";  // "md" or "csv"
  bool run_sim = true;
  SimParams sim;
  bool full_precision = false;  // print computed values at full precision
};

struct TableDocument {
  std::string filename;
  std::string content;
};

struct TablesResult {
  std::vector<TableDocument> documents;  // one per reference table
  std::string summary;                   // human-readable outcome
  int gated_cells = 0;
  int gated_failures = 0;   // gated cells outside their tolerance
  int table1_rows_simmed = 0;
  int table1_rows_covered = 0;  // Table 1 rows whose sim CI covers the exact value
  bool sim_ran = false;
  bool pass = false;
};

// Recomputes every built-in reference row, renders one report per table in
// the requested format, and evaluates the regression gate: every gated cell
// within tolerance, plus (when simulation runs) CI coverage of the exact
// value on at least 9 of the 10 Table 1 rows.
TablesResult reproduce_tables(const TableOptions& options);

// Compact one-line class list, e.g.
// "exp(d=1 lambda=1 b=0.5); erl2(d=2 lambda=1 b=0.25)"; comma-free so it can
// sit inside an unquoted CSV cell.
std::string describe_classes(const SystemConfig& config);

// Shortest round-trip decimal form of a double.
std::string format_shortest(double value);

}  // namespace capshare
