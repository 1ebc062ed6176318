#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "capshare/config_io.hpp"
#include "capshare/markov.hpp"
#include "capshare/report.hpp"

namespace {

using namespace capshare;

std::string probability(double value, bool full_precision) {
  if (full_precision) return format_shortest(value);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

int cmd_approx(const std::string& config_path, bool full_precision) {
  const SystemConfig config = load_config(config_path);
  const ErlangBResult result = approximate_loss(config);
  std::cout << "offered load A = " << format_shortest(result.load) << "\n"
            << "equivalent servers v = " << format_shortest(result.servers) << "\n"
            << "loss probability (approximate) = "
            << probability(result.blocking, full_precision) << "\n";
  return 0;
}

int cmd_exact(const std::string& config_path, bool dump, std::size_t max_states,
              bool full_precision) {
  const SystemConfig config = load_config(config_path);
  const GeneratorMatrix gen = build_state_space(config, max_states);
  if (dump) {
    dump_chain(gen, std::cout);
  }
  const auto pi = stationary_distribution(gen);
  double loss = 0.0;
  for (std::size_t s = 0; s < gen.size(); ++s) {
    if (gen.idle(gen.states[s]) == 0) loss += pi[s];
  }
  std::cout << "states = " << gen.size() << "\n"
            << "loss probability (exact) = " << probability(loss, full_precision)
            << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const SimParams& params,
                 const std::string& trace_path, bool full_precision) {
  const SystemConfig config = load_config(config_path);
  SimParams run_params = params;
  std::ofstream trace_file;
  if (!trace_path.empty()) {
    trace_file.open(trace_path);
    if (!trace_file) {
      throw FileError("cannot open trace file: " + trace_path);
    }
    run_params.trace = &trace_file;  // replication 0 only; forces serial runs
  }
  const LossEstimate estimate = run_simulation(config, run_params);
  std::cout << "loss probability (simulated) = "
            << probability(estimate.point, full_precision) << "\n"
            << "95% CI = [" << probability(estimate.ci_low, full_precision) << ", "
            << probability(estimate.ci_high, full_precision) << "]\n"
            << "replications = " << estimate.replications
            << ", counted arrivals = " << estimate.arrivals_total << "\n"
            << "time fraction blocked (diagnostic) = "
            << probability(estimate.time_average_blocked, full_precision) << "\n";
  for (std::size_t i = 0; i < estimate.per_class.size(); ++i) {
    std::cout << "class " << i << " loss fraction = "
              << probability(estimate.per_class[i], full_precision) << "\n";
  }
  return 0;
}

int cmd_tables(const TableOptions& options, const std::string& out_dir) {
  const TablesResult result = reproduce_tables(options);
  std::filesystem::create_directories(out_dir);
  for (const auto& doc : result.documents) {
    const auto path = std::filesystem::path(out_dir) / doc.filename;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw FileError("cannot write report file: " + path.string());
    }
    out << doc.content;
    std::cout << "wrote " << path.string() << "\n";
  }
  std::cout << result.summary;
  return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loss probability toolkit for multi-channel capacity-sharing systems"};
  app.require_subcommand(1);

  std::string config_path;
  bool full_precision = false;

  auto* approx = app.add_subcommand("approx", "fractional Erlang B approximation");
  approx->add_option("--config", config_path, "config JSON file")->required();
  approx->add_flag("--full-precision", full_precision, "print full precision");

  bool dump = false;
  std::size_t max_states = 1'000'000;
  auto* exact = app.add_subcommand("exact", "stationary analysis of the Markov chain");
  exact->add_option("--config", config_path, "config JSON file")->required();
  exact->add_flag("--dump-chain", dump, "print the state space and generator");
  exact->add_option("--max-states", max_states, "state count limit");
  exact->add_flag("--full-precision", full_precision, "print full precision");

  SimParams sim;
  std::string trace_path;
  bool serial = false;
  bool check_invariants = false;
  auto* simulate = app.add_subcommand("simulate", "discrete-event simulation");
  simulate->add_option("--config", config_path, "config JSON file")->required();
  simulate->add_option("--arrivals", sim.arrivals_per_replication,
                       "arrivals per replication (>= 1000)")->required();
  simulate->add_option("--replications", sim.replications, "replications (>= 2)")
      ->required();
  simulate->add_option("--seed", sim.seed, "random seed")->required();
  simulate->add_option("--warmup", sim.warmup_fraction,
                       "warm-up fraction of arrivals to discard [0,1)");
  simulate->add_option("--trace", trace_path,
                       "write an event trace of replication 0 to this file");
  simulate->add_flag("--serial", serial, "run replications on one thread");
  simulate->add_flag("--check-invariants", check_invariants,
                     "verify conservation invariants at every event");
  simulate->add_flag("--full-precision", full_precision, "print full precision");

  TableOptions tables;
  std::string out_dir = ".";
  bool skip_sim = false;
  auto* tables_cmd =
      app.add_subcommand("tables", "recompute the built-in reference tables");
  tables_cmd->add_option("--format", tables.format, "report format: md or csv")
      ->check(CLI::IsMember({"md", "csv"}));
  tables_cmd->add_flag("--skip-sim", skip_sim, "omit the simulation columns");
  tables_cmd->add_option("--out", out_dir, "output directory");
  tables_cmd->add_option("--seed", tables.sim.seed, "simulation seed");
  tables_cmd->add_option("--arrivals", tables.sim.arrivals_per_replication,
                         "arrivals per replication");
  tables_cmd->add_option("--replications", tables.sim.replications, "replications");
  tables_cmd->add_option("--warmup", tables.sim.warmup_fraction, "warm-up fraction");
  tables_cmd->add_flag("--full-precision", tables.full_precision,
                       "print computed values at full precision");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(approx)) {
      return cmd_approx(config_path, full_precision);
    }
    if (app.got_subcommand(exact)) {
      return cmd_exact(config_path, dump, max_states, full_precision);
    }
    if (app.got_subcommand(simulate)) {
      sim.parallel = !serial;
      sim.check_invariants = check_invariants;
      return cmd_simulate(config_path, sim, trace_path, full_precision);
    }
    tables.run_sim = !skip_sim;
    return cmd_tables(tables, out_dir);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
