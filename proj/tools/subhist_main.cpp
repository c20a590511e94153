// Command-line front end: build info-graphs, run simulation batches, sweep
// horizons or gaps, and check behavior configurations for assumption
// compliance. All outputs are deterministic functions of the config file.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subhist/analysis.hpp"
#include "subhist/config.hpp"
#include "subhist/engine.hpp"
#include "subhist/io.hpp"
#include "subhist/presets.hpp"

namespace {

using namespace subhist;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitContract = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::vector<std::string> formats;
  bool paired_tapes = false;
};

std::string resolve_out_dir(const CommonArgs& args, const ExperimentConfig& cfg) {
  if (!args.out_dir.empty()) return args.out_dir;
  if (const char* env = std::getenv("SUBHIST_OUT")) return env;
  return cfg.out_dir;
}

int resolve_threads(const CommonArgs& args) {
  if (args.threads > 0) return args.threads;
  if (const char* env = std::getenv("SUBHIST_THREADS")) return std::atoi(env);
  return 0;  // library default: hardware concurrency
}

std::vector<std::string> resolve_formats(const CommonArgs& args, const ExperimentConfig& cfg) {
  return args.formats.empty() ? cfg.formats : args.formats;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ContractError("cannot write output file " + path.string());
  out << content;
}

bool wants(const std::vector<std::string>& formats, const std::string& f) {
  for (const std::string& s : formats)
    if (s == f) return true;
  return false;
}

std::vector<std::uint64_t> seed_list(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.reps; ++i) seeds.push_back(cfg.seed_base + static_cast<std::uint64_t>(i));
  return seeds;
}

int cmd_simulate(const CommonArgs& args) {
  ExperimentConfig cfg = ExperimentConfig::load(args.config_path);
  const std::string digest = cfg.digest();
  const auto formats = resolve_formats(args, cfg);
  const std::filesystem::path out_dir = resolve_out_dir(args, cfg);
  BatchOptions opts;
  opts.threads = resolve_threads(args);

  std::string jsonl;
  std::vector<CsvRow> rows;
  BanditInstance instance = cfg.instance.make();
  for (const PolicyConfig& pc : cfg.policies) {
    PolicyParams params = pc.resolve(instance.horizon, instance.num_arms, cfg.behavior.n_est);
    InfoGraph graph = params.build(instance.horizon);
    opts.policy_name = params.name;
    std::vector<TraceSummary> batch = run_batch(instance, graph, cfg.behavior, seed_list(cfg), opts);
    for (const TraceSummary& s : batch) {
      if (!s.ok()) {
        std::cerr << "runtime error (seed " << s.seed << "): " << s.error << "\n";
        return kExitContract;
      }
      jsonl += trace_summary_json(s, digest, instance.digest()).dump() + "\n";
      rows.push_back({s.policy, s.horizon, instance.gap(), s.seed, s.regret, std::nullopt});
    }
  }
  if (wants(formats, "json")) write_file(out_dir / "summaries.jsonl", jsonl);
  if (wants(formats, "csv")) write_file(out_dir / "traces.csv", to_csv(rows));
  std::cout << "simulate: wrote " << rows.size() << " runs to " << out_dir.string()
            << " (config " << digest << ")\n";
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
  ExperimentConfig cfg = ExperimentConfig::load(args.config_path);
  if (cfg.t_grid.empty() && cfg.delta_grid.empty())
    throw ConfigError("sweep: config must provide sweep.t_grid or sweep.delta_grid");
  const std::string digest = cfg.digest();
  const auto formats = resolve_formats(args, cfg);
  const std::filesystem::path out_dir = resolve_out_dir(args, cfg);
  const int threads = resolve_threads(args);

  std::vector<CsvRow> rows;
  nlohmann::json result;
  result["config_digest"] = digest;
  result["tool_version"] = kToolVersion;
  nlohmann::json policies_json = nlohmann::json::array();

  // Per-seed regrets of the first policy, for paired differences.
  std::map<std::pair<std::string, std::uint64_t>, double> baseline;  // (key,seed)->regret

  for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
    const PolicyConfig& pc = cfg.policies[pi];
    nlohmann::json pj;
    if (!cfg.t_grid.empty()) {
      std::vector<double> means = cfg.instance.means;
      if (means.empty())
        means = {0.5 + cfg.instance.delta / 2.0, 0.5 - cfg.instance.delta / 2.0};
      std::string name = pc.resolve(cfg.t_grid.back(), static_cast<int>(means.size()),
                                    cfg.behavior.n_est)
                             .name;
      auto build_k = [&](Round T) {
        return pc.resolve(T, static_cast<int>(means.size()), cfg.behavior.n_est).build(T);
      };
      RegretCurve curve = regret_curve(build_k, means, cfg.t_grid, cfg.behavior, cfg.reps,
                                       cfg.seed_base, threads, cfg.instance.strict_model);
      const double delta = cfg.instance.make(cfg.t_grid.front()).gap();
      for (const CurveRow& r : curve.rows) {
        CsvRow row{name, r.horizon, delta, r.seed, r.regret, std::nullopt};
        const auto key = std::make_pair("T=" + std::to_string(r.horizon), r.seed);
        if (pi == 0)
          baseline[key] = r.regret;
        else if (args.paired_tapes)
          row.diff_vs_baseline = r.regret - baseline.at(key);
        rows.push_back(row);
      }
      pj["policy"] = name;
      pj["points"] = curve_points_json(curve.points);
      pj["exponent"] = exponent_fit_json(fit_exponent(curve.points));
    } else {
      const Round T = cfg.instance.horizon;
      PolicyParams params = pc.resolve(T, 2, cfg.behavior.n_est);
      auto build = [&](Round horizon) { return params.build(horizon); };
      GapSweep sweep =
          gap_sweep(build, T, cfg.delta_grid, cfg.behavior, cfg.reps, cfg.seed_base,
                    cfg.instance.strict_model);
      for (const GapRow& r : sweep.rows) {
        CsvRow row{params.name, T, r.delta, r.seed, r.regret, std::nullopt};
        const auto key = std::make_pair("d=" + format_double(r.delta), r.seed);
        if (pi == 0)
          baseline[key] = r.regret;
        else if (args.paired_tapes)
          row.diff_vs_baseline = r.regret - baseline.at(key);
        rows.push_back(row);
      }
      pj["policy"] = params.name;
      nlohmann::json pts = nlohmann::json::array();
      for (const GapPoint& p : sweep.points) {
        nlohmann::json e;
        e["delta"] = p.delta;
        e["mean_regret"] = p.mean_regret;
        e["se"] = p.se;
        e["reps"] = p.reps;
        pts.push_back(e);
      }
      pj["points"] = pts;
    }
    policies_json.push_back(pj);
  }
  result["policies"] = policies_json;

  if (wants(formats, "csv"))
    write_file(out_dir / "sweep.csv", to_csv(rows, args.paired_tapes));
  if (wants(formats, "json")) write_file(out_dir / "sweep.json", result.dump(2) + "\n");
  std::cout << "sweep: wrote " << rows.size() << " rows to " << out_dir.string() << " (config "
            << digest << ")\n";
  return kExitOk;
}

int cmd_graph(const CommonArgs& args, bool emit_dot, bool emit_summary, bool collapse,
              bool reduce) {
  ExperimentConfig cfg = ExperimentConfig::load(args.config_path);
  const std::filesystem::path out_dir = resolve_out_dir(args, cfg);
  BanditInstance instance = cfg.instance.make();
  PolicyParams params =
      cfg.policies.front().resolve(instance.horizon, instance.num_arms, cfg.behavior.n_est);
  InfoGraph graph = params.build(instance.horizon);
  if (!emit_dot && !emit_summary) emit_summary = true;
  if (emit_dot && !collapse && instance.horizon > 4096)
    throw ConfigError("graph: per-round DOT export above T=4096 is impractical; use --collapse");
  if (emit_dot) write_file(out_dir / "graph.dot", graph.export_dot(collapse, reduce));
  if (emit_summary) write_file(out_dir / "graph_summary.json", graph.summary_json() + "\n");
  std::cout << "graph: " << params.name << " T=" << instance.horizon << " -> "
            << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_check(const CommonArgs& args, int fuzz_rounds) {
  // Accepts either a full experiment config or a bare behavior object.
  std::ifstream in(args.config_path);
  if (!in) throw ConfigError("config: cannot open file '" + args.config_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  BehaviorConfig cfg =
      j.contains("behavior") ? parse_behavior(j.at("behavior")) : parse_behavior(j);
  ComplianceReport report = check_assumption_compliance(cfg, fuzz_rounds);
  std::cout << "check: kind=" << behavior_kind_name(cfg.kind) << " cases=" << report.cases
            << " violations=" << report.violations.size()
            << " clamped=" << report.clamp_events << "\n";
  for (std::size_t i = 0; i < report.violations.size() && i < 20; ++i) {
    const ComplianceViolation& v = report.violations[i];
    std::cout << "  violation[" << v.type << "] case=" << v.case_id << " arm=" << v.arm
              << " n=" << v.pulls << " estimate=" << format_double(v.estimate_value)
              << " empirical=" << format_double(v.empirical_mean) << "\n";
  }
  if (report.violations.size() > 20)
    std::cout << "  ... " << (report.violations.size() - 20) << " more\n";
  return report.compliant() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"order-based disclosure policy simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  bool emit_dot = false, emit_summary = false, collapse = false, reduce = false;
  int fuzz_rounds = 10000;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_option("--threads", args.threads, "worker threads (0 = all cores)");
    cmd->add_option("--format", args.formats, "output formats: csv|json|dot");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run one batch and write summaries");
  add_common(sim);
  CLI::App* sweep = app.add_subcommand("sweep", "sweep a T-grid or delta-grid");
  add_common(sweep);
  sweep->add_flag("--paired-tapes", args.paired_tapes,
                  "emit per-seed differences vs the first policy");
  CLI::App* graph = app.add_subcommand("graph", "export the info-graph");
  add_common(graph);
  graph->add_flag("--dot", emit_dot, "write DOT");
  graph->add_flag("--summary", emit_summary, "write level summary JSON");
  graph->add_flag("--collapse", collapse, "one DOT node per structural group");
  graph->add_flag("--reduce", reduce, "transitive reduction of DOT edges");
  CLI::App* check = app.add_subcommand("check", "behavior assumption compliance");
  check->add_option("--config", args.config_path, "behavior config (JSON)")->required();
  check->add_option("--fuzz", fuzz_rounds, "number of fuzz cases");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (graph->parsed()) return cmd_graph(args, emit_dot, emit_summary, collapse, reduce);
    if (check->parsed()) return cmd_check(args, fuzz_rounds);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractError& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::out_of_range& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return kExitContract;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  }
  return kExitOk;
}
