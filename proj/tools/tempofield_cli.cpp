// tempofield: window-length sweeps for snapshot-based dynamic graph models.
//
//   tempofield ingest --input edges.txt --name Enron [--dry-run]
//   tempofield sweep run.ini
//   tempofield train --dataset enron --arch gclstm --tau 3 --checkpoint m.json
//   tempofield eval --dataset enron --tau 3 --checkpoint m.json
//   tempofield report results/
//   tempofield fixtures-check
//
// Exit codes: 0 ok, 1 failed fixture check, 2 configuration or parse error,
// 3 some sweep units failed.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tempofield/bench.hpp"
#include "tempofield/checkpoint.hpp"
#include "tempofield/config.hpp"
#include "tempofield/csv.hpp"
#include "tempofield/dataset_io.hpp"
#include "tempofield/error.hpp"
#include "tempofield/eval.hpp"
#include "tempofield/fixtures.hpp"
#include "tempofield/ingest.hpp"
#include "tempofield/report.hpp"

using namespace tempofield;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigExit = 2;

struct DatasetArgs {
  std::string name;
  std::string file;

  Dtdg load() const {
    RunConfig c;
    c.datasets = {name};
    if (!file.empty()) c.dataset_paths[name] = file;
    return load_configured_dataset(c, name);
  }
};

void add_dataset_args(CLI::App* cmd, DatasetArgs& a) {
  cmd->add_option("--dataset", a.name, "Registered name, or a label for --data")->required();
  cmd->add_option("--data", a.file, "Dataset cache file (default: $TEMPOFIELD_DATA_DIR)");
}

int cmd_ingest(const std::string& input, const std::string& name, const std::string& format,
               const std::string& rule_text, const std::string& output, bool dry_run,
               bool skip_validation) {
  const DatasetSpec* spec = find_dataset(name);
  DiscretizationRule rule;
  if (!rule_text.empty()) {
    rule = DiscretizationRule::parse(rule_text);
  } else if (spec != nullptr) {
    rule = spec->rule;
  } else {
    throw ConfigError("--rule is required for unregistered dataset " + name);
  }
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot read " + input);
  const auto events = parse_edge_list(in, ColumnLayout::parse(format));
  const Dtdg d = discretize(spec ? spec->name : name, events, rule);

  std::cout << d.name() << ": " << d.num_nodes() << " nodes, " << d.total_links() << " links, "
            << d.num_snapshots() << " snapshots (" << rule.to_string() << ")\n";
  bool valid = true;
  if (spec != nullptr) {
    const ValidationReport report = validate_against_registry(d, *spec);
    for (const auto& e : report.entries) {
      std::cout << "  " << e.field << ": expected " << e.expected << ", got " << e.actual
                << (e.pass ? "  ok" : "  MISMATCH") << '\n';
    }
    for (const auto& n : report.notes) std::cout << "  note: " << n << '\n';
    valid = report.passed();
    std::cout << "validation: " << (valid ? "passed" : "FAILED") << '\n';
  } else {
    std::cout << "validation: no registry entry for " << name << '\n';
  }
  if (!valid && !skip_validation) {
    std::cerr << "validation failed; cache not written (use --skip-validation to keep it)\n";
    return kConfigExit;
  }
  if (dry_run) return 0;

  fs::path out = output;
  if (out.empty()) {
    auto p = default_cache_path(d.name());
    if (!p) throw ConfigError("set TEMPOFIELD_DATA_DIR or pass --output");
    out = *p;
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_dataset_cache(out, d);
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& output_dir) {
  RunConfig config = load_run_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  const SweepOutcome out = run_sweep(config, &std::cerr);
  std::cout << out.cells_total << " units: " << out.cells_run << " run, " << out.cells_resumed
            << " resumed, " << out.cells_failed << " failed\n";
  for (const auto& s : out.sweeps) {
    std::cout << s.dataset << " " << arch_name(s.arch) << ": tau*=" << s.tau_star.tau.to_string()
              << " ap*=" << format_ap(s.tau_star.ap) << " ap_inf=" << format_ap(s.ap_inf)
              << " ap_1=" << format_ap(s.ap_1) << '\n';
  }
  std::cout << "results in " << config.output_dir.string() << '\n';
  return out.exit_code();
}

struct RunArgs {
  std::string arch = "gclstm";
  std::string tau = "inf";
  std::size_t seed = 0;
  std::uint64_t master_seed = 0;
  double split = 0.7;
  std::size_t epochs = TrainConfig{}.epochs;
  double lr = TrainConfig{}.learning_rate;
  std::string checkpoint;
};

int cmd_train(const DatasetArgs& data, const RunArgs& a, bool emit_loss) {
  const Dtdg d = data.load();
  ExperimentSpec spec;
  spec.arch = parse_arch(a.arch);
  spec.tau = Tau::parse(a.tau);
  spec.seed = a.seed;
  spec.master_seed = a.master_seed;
  spec.train_fraction = a.split;
  spec.hyper.max_positions = d.num_snapshots();
  spec.training.epochs = a.epochs;
  spec.training.learning_rate = a.lr;

  const SplitSpec split = chronological_split(d, spec.train_fraction);
  Rng rng(training_seed(spec, d.name()));
  ModelState model = make_model(spec.arch, d.num_nodes(), spec.hyper, rng);
  const auto losses = train(model, d, spec.tau, split, spec.training, rng);
  if (emit_loss) {
    std::cout << "epoch,loss\n";
    for (std::size_t e = 0; e < losses.size(); ++e) {
      std::cout << e << ',' << format_real(losses[e]) << '\n';
    }
  } else if (!losses.empty()) {
    std::cout << "final loss " << format_real(losses.back()) << " after " << losses.size()
              << " epochs\n";
  }
  save_checkpoint(a.checkpoint, model);
  std::cout << "wrote " << a.checkpoint << '\n';
  return 0;
}

int cmd_eval(const DatasetArgs& data, const RunArgs& a) {
  const Dtdg d = data.load();
  const ModelState model = load_checkpoint(a.checkpoint);
  if (model.num_nodes != d.num_nodes()) {
    throw ConfigError("checkpoint has " + std::to_string(model.num_nodes) + " nodes, dataset " +
                      std::to_string(d.num_nodes()));
  }
  ExperimentSpec spec;
  spec.seed = a.seed;
  spec.master_seed = a.master_seed;
  const Tau tau = Tau::parse(a.tau);
  const SplitSpec split = chronological_split(d, a.split);
  AdjacencyCache adj(d);
  const EvalResult r = rolling_evaluate(model, d, tau, split, evaluation_seed(spec, d.name()), adj);
  std::cout << "step,ap\n";
  for (const auto& s : r.per_step) {
    std::cout << s.t << ',' << (s.ap ? format_real(*s.ap) : "skipped") << '\n';
  }
  std::cout << "mean," << format_real(r.mean_ap) << '\n';
  return 0;
}

int cmd_report(const std::string& dir, bool write) {
  const Report rep = render_report_dir(dir);
  std::cout << rep.text;
  if (write) {
    write_file_atomically(fs::path(dir) / "report.txt", rep.text);
    write_file_atomically(fs::path(dir) / "report.csv", rep.csv);
  }
  return 0;
}

int cmd_fixtures(const std::string& fixture, const std::string& emit_dir) {
  const PublishedCells cells =
      load_published_cells(fixture.empty() ? default_fixture_path() : fs::path(fixture));
  const auto checks = run_fixture_checks(cells);
  std::size_t failed = 0;
  for (const auto& c : checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%s  %s: expected %.6g, got %.6g (tol %.2g)\n",
                  c.pass ? "ok  " : "FAIL", c.name.c_str(), c.expected, c.actual, c.tolerance);
    std::cout << line;
    failed += c.pass ? 0 : 1;
  }
  std::cout << checks.size() - failed << " of " << checks.size() << " checks passed\n";
  if (!emit_dir.empty()) {
    write_published_tables(cells, emit_dir);
    std::cout << "wrote published tables to " << emit_dir << '\n';
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal receptive field sweeps for discrete-time dynamic graph models"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Discretize a raw edge list into a dataset cache");
  std::string input, name, format = "src dst time", rule, output;
  bool dry_run = false, skip_validation = false;
  ingest->add_option("--input", input, "Raw edge list")->required();
  ingest->add_option("--name", name, "Dataset name (registry entries are validated)")->required();
  ingest->add_option("--format", format, "Column layout, e.g. \"src dst weight time\"");
  ingest->add_option("--rule", rule, "index | bins:K (default: registry rule)");
  ingest->add_option("--output", output, "Cache path (default: $TEMPOFIELD_DATA_DIR)");
  ingest->add_flag("--dry-run", dry_run, "Report only, write nothing");
  ingest->add_flag("--skip-validation", skip_validation, "Write the cache despite mismatches");

  auto* sweep = app.add_subcommand("sweep", "Run a configured tau sweep");
  std::string config_path, sweep_out;
  sweep->add_option("config", config_path, "INI run manifest")->required();
  sweep->add_option("--output", sweep_out, "Override output.dir");

  DatasetArgs train_data, eval_data;
  RunArgs train_args, eval_args;
  bool emit_loss = false;
  auto* train_cmd = app.add_subcommand("train", "Train one model and save a checkpoint");
  add_dataset_args(train_cmd, train_data);
  train_cmd->add_option("--arch", train_args.arch, "egcn | dysat | gclstm | stgcn | edgebank");
  train_cmd->add_option("--tau", train_args.tau, "Window length or inf");
  train_cmd->add_option("--seed", train_args.seed);
  train_cmd->add_option("--master-seed", train_args.master_seed);
  train_cmd->add_option("--split", train_args.split, "Training fraction of the snapshots");
  train_cmd->add_option("--epochs", train_args.epochs);
  train_cmd->add_option("--lr", train_args.lr);
  train_cmd->add_option("--checkpoint", train_args.checkpoint, "Output file")->required();
  train_cmd->add_flag("--emit-loss", emit_loss, "Print the per-epoch loss as CSV");

  auto* eval_cmd = app.add_subcommand("eval", "Rolling evaluation of a checkpoint");
  add_dataset_args(eval_cmd, eval_data);
  eval_cmd->add_option("--tau", eval_args.tau, "Window length or inf");
  eval_cmd->add_option("--seed", eval_args.seed, "Selects the negative sample stream");
  eval_cmd->add_option("--master-seed", eval_args.master_seed);
  eval_cmd->add_option("--split", eval_args.split);
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint)->required();

  auto* report = app.add_subcommand("report", "Render tables from a sweep output directory");
  std::string report_dir;
  bool no_write = false;
  report->add_option("dir", report_dir)->required();
  report->add_flag("--no-write", no_write, "Print only; skip report.txt and report.csv");

  auto* fixtures = app.add_subcommand("fixtures-check", "Arithmetic checks on published numbers");
  std::string fixture, emit_dir;
  fixtures->add_option("--fixture", fixture, "Published cells CSV");
  fixtures->add_option("--emit", emit_dir, "Also write them as summary/analysis CSVs here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigExit;
  }

  try {
    if (*ingest) {
      return cmd_ingest(input, name, format, rule, output, dry_run, skip_validation);
    }
    if (*sweep) return cmd_sweep(config_path, sweep_out);
    if (*train_cmd) return cmd_train(train_data, train_args, emit_loss);
    if (*eval_cmd) return cmd_eval(eval_data, eval_args);
    if (*report) return cmd_report(report_dir, !no_write);
    if (*fixtures) return cmd_fixtures(fixture, emit_dir);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const OutOfRangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
