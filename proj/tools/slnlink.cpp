#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slnlink/eval.hpp"
#include "slnlink/experiments.hpp"
#include "slnlink/generator.hpp"
#include "slnlink/graph.hpp"
#include "slnlink/io.hpp"
#include "slnlink/model.hpp"
#include "slnlink/rng.hpp"
#include "slnlink/splits.hpp"
#include "slnlink/train.hpp"

namespace fs = std::filesystem;
using namespace slnlink;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsageError = 2;

std::optional<double> parse_horizon(const std::string& s) {
  if (s == "end") return std::nullopt;
  return std::stod(s);
}

std::vector<double> parse_values(const std::string& arg) {
  // Either a comma-separated list or a path to a file with one value per line.
  std::vector<double> out;
  if (fs::exists(arg)) {
    std::ifstream in(arg);
    double x;
    while (in >> x) out.push_back(x);
    return out;
  }
  std::istringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

GeneratorConfig generator_from_json_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open generator config: " + path);
  nlohmann::json j;
  in >> j;
  GeneratorConfig cfg;
  cfg.tag = j.value("tag", std::string("synthetic"));
  cfg.n_students = j.at("n_students").get<int>();
  cfg.n_threads = j.at("n_threads").get<int>();
  cfg.duration_weeks = j.at("duration_weeks").get<double>();
  cfg.activity_exponent = j.at("activity_exponent").get<double>();
  cfg.replies_per_thread_mean = j.at("replies_per_thread_mean").get<double>();
  cfg.participation_window = j.at("participation_window").get<int>();
  cfg.seed = seed;
  return cfg;
}

TemporalGraph load_dataset(const std::string& input, const std::string& manifest_path,
                           double duration, const std::string& tag) {
  if (!manifest_path.empty()) {
    DatasetManifest m = load_manifest(manifest_path);
    fs::path csv = m.path;
    if (csv.is_relative()) csv = fs::path(manifest_path).parent_path() / csv;
    return load_edge_csv(csv.string(), m);
  }
  DatasetManifest m;
  m.tag = tag.empty() ? fs::path(input).stem().string() : tag;
  m.path = input;
  m.duration_weeks = duration;
  return load_edge_csv(input, m);
}

SplitPlan plan_from_json(const TemporalGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open split file: " + path);
  nlohmann::json j;
  in >> j;
  std::optional<double> horizon;
  if (!j.at("horizon").is_string()) horizon = j["horizon"].get<double>();
  SplitRatios ratios;
  ratios.train_negative_ratio = j.value("train_negative_ratio", 1.0);
  if (j.at("eval_negative_ratio").is_string()) {
    ratios.eval_negative_ratio.reset();
  } else {
    ratios.eval_negative_ratio = j["eval_negative_ratio"].get<double>();
  }
  SplitPlan plan = make_split(g, j.at("progress").get<double>(), horizon, j.at("k").get<int>(),
                              ratios, j.at("seed").get<std::uint64_t>());
  // The plan is reconstructed deterministically; verify it matches the file.
  auto folds = j.at("folds").get<std::vector<std::vector<int>>>();
  if (folds != plan.folds) {
    throw std::runtime_error(path + ": split file does not match this dataset (stale folds?)");
  }
  return plan;
}

int cmd_generate(const std::string& preset, const std::string& config_path,
                 const std::string& out_path, std::uint64_t seed) {
  GeneratorConfig cfg = config_path.empty() ? preset_config(preset, seed)
                                            : generator_from_json_file(config_path, seed);
  TemporalGraph g = generate_synthetic_sln(cfg);
  save_edge_csv(g, out_path);

  GraphStats s = graph_stats(g);
  nlohmann::ordered_json sidecar;
  sidecar["tag"] = cfg.tag;
  sidecar["seed"] = cfg.seed;
  sidecar["nodes"] = s.num_nodes;
  sidecar["distinct_edges"] = s.distinct_edges;
  sidecar["duration_weeks"] = s.duration_weeks;
  sidecar["posts"] = s.num_events;
  sidecar["density"] = s.density;
  sidecar["degree_min"] = s.degree_min;
  sidecar["degree_median"] = s.degree_median;
  sidecar["degree_max"] = s.degree_max;
  std::ofstream side(out_path + ".stats.json");
  side << sidecar.dump(2) << "\n";

  std::cout << stats_table({&g});
  std::cerr << "wrote " << out_path << " (seed " << cfg.seed << ")\n";
  return kExitOk;
}

int cmd_stats(const std::vector<std::string>& manifests, const std::string& input,
              double duration, const std::string& tag, bool merged) {
  std::vector<TemporalGraph> graphs;
  for (const auto& mpath : manifests) {
    graphs.push_back(load_dataset("", mpath, 0.0, ""));
  }
  if (!input.empty()) graphs.push_back(load_dataset(input, "", duration, tag));
  if (graphs.empty()) throw std::runtime_error("stats: provide --input or --manifest");
  if (merged && graphs.size() >= 2) {
    graphs.push_back(merge(std::vector<TemporalGraph>(graphs.begin(), graphs.end())));
  }
  std::cout << stats_table(graphs);
  return kExitOk;
}

int cmd_split(const std::string& input, const std::string& manifest, double duration,
              const std::string& tag, double progress, const std::string& horizon, int k,
              double train_ratio, const std::string& eval_ratio, std::uint64_t seed,
              const std::string& out_path) {
  TemporalGraph g = load_dataset(input, manifest, duration, tag);
  SplitRatios ratios;
  ratios.train_negative_ratio = train_ratio;
  if (eval_ratio == "all") {
    ratios.eval_negative_ratio.reset();
  } else {
    ratios.eval_negative_ratio = std::stod(eval_ratio);
  }
  SplitPlan plan = make_split(g, progress, parse_horizon(horizon), k, ratios, seed);
  const std::string json = split_plan_json(plan);
  if (out_path.empty()) {
    std::cout << json;
  } else {
    std::ofstream out(out_path);
    out << json;
    std::cerr << "wrote " << out_path << " (" << plan.positives.size() << " positives, k=" << k
              << ")\n";
  }
  for (const auto& w : plan.warnings) std::cerr << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_train(const std::string& input, const std::string& manifest, double duration,
              const std::string& tag, const std::string& split_path, int fold,
              const TrainConfig& cfg, const ModelDims& dims, const std::string& ckpt_path,
              const std::string& loss_path) {
  TemporalGraph g = load_dataset(input, manifest, duration, tag);
  SplitPlan plan = plan_from_json(g, split_path);

  std::vector<Edge> train_positives, heldout;
  if (fold < 0) {
    train_positives = plan.positives;
  } else {
    if (fold >= plan.k()) throw std::runtime_error("fold index out of range");
    std::vector<FoldTask> tasks = fold_tasks(plan);
    train_positives = tasks[fold].train_positives;
    heldout = tasks[fold].test_positives;
  }
  TrainResult result = train_model(plan.observed, train_positives, heldout, cfg, dims);
  save_params(result.params, ckpt_path);
  if (!loss_path.empty()) save_loss_csv(result.history, loss_path);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "trained " << cfg.epochs << " epochs; final loss "
            << result.history.back().total << "; checkpoint " << ckpt_path << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& input, const std::string& manifest, double duration,
             const std::string& tag, const std::string& split_path, int fold,
             const std::string& ckpt_path, const std::string& tie, const std::string& out_path) {
  TemporalGraph g = load_dataset(input, manifest, duration, tag);
  SplitPlan plan = plan_from_json(g, split_path);
  if (fold < 0 || fold >= plan.k()) throw std::runtime_error("fold index out of range");
  ModelParams params = load_params(ckpt_path);
  std::vector<FoldTask> tasks = fold_tasks(plan);
  TiePolicy policy = tie == "strict" ? TiePolicy::kStrict : TiePolicy::kHalf;
  EvalReport report = evaluate_fold(params, plan.observed, tasks[fold], policy);
  const std::string json = eval_report_json(report);
  if (out_path.empty()) {
    std::cout << json;
  } else {
    std::ofstream out(out_path);
    out << json;
    std::cout << "fold " << fold << " auc " << report.auc << "\n";
  }
  return kExitOk;
}

int cmd_ttest(const std::string& a_arg, const std::string& b_arg, double alpha,
              const std::string& models, const std::string& dataset, const std::string& progress) {
  std::vector<double> a = parse_values(a_arg);
  std::vector<double> b = parse_values(b_arg);
  TTestResult r = welch_t_one_sided(a, b, alpha);
  std::cout << ttest_json(r);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s %-14s %-10s %-10s %s\n", models.c_str(), dataset.c_str(),
                progress.c_str(), format_pvalue(r.p_value).c_str(),
                r.reject_null ? "Reject H0" : "Fail to Reject H0");
  std::cout << buf;
  return kExitOk;
}

int cmd_gradcheck(int nodes, const std::string& dims_arg, std::uint64_t seed, double tol,
                  bool inject_fault) {
  ModelDims dims;
  if (!dims_arg.empty()) {
    std::istringstream ss(dims_arg);
    char sep;
    if (!(ss >> dims.embedding >> sep >> dims.hidden1 >> sep >> dims.hidden2)) {
      throw std::runtime_error("bad --dims, expected F,d1,d2");
    }
  }
  GradCheckReport report = grad_check(dims, nodes, seed, tol, inject_fault);
  std::cout << grad_check_summary(report);
  return report.passed ? kExitOk : kExitDomainError;
}

int cmd_experiment(const std::string& spec_path, const std::string& out_dir, bool resume,
                   int jobs) {
  ExperimentSpec spec;
  try {
    spec = parse_experiment_spec(spec_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsageError;
  }
  fs::create_directories(out_dir);
  ExperimentReport report = run_matrix(spec, (fs::path(out_dir) / "cache").string(), resume, jobs);

  std::ofstream rj(fs::path(out_dir) / "report.json");
  rj << report_json(report);
  const std::string tables = render_tables(report);
  std::ofstream rt(fs::path(out_dir) / "tables.txt");
  rt << tables;
  std::cout << tables;

  int failed = 0;
  for (const auto& c : report.cells) {
    if (!c.ok()) {
      ++failed;
      std::cerr << "warning: cell (" << c.dataset << ", " << c.progress << ", " << c.mode
                << ") failed: " << c.error << "\n";
    }
  }
  if (failed > 0) std::cerr << "warning: " << failed << " cell(s) failed; see report.json\n";
  std::cerr << "report written to " << (fs::path(out_dir) / "report.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link prediction in social learning networks: two-layer GraphSAGE with "
               "trainable node embeddings, temporal k-fold evaluation, and classroom-merging "
               "experiments"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic SLN edge CSV");
  std::string gen_preset, gen_config, gen_out = "sln.csv";
  std::uint64_t gen_seed = 42;
  gen->add_option("--preset", gen_preset, "Named preset: vs-like|ml-like|al-like|cp-like");
  gen->add_option("--config", gen_config, "Generator config JSON (alternative to --preset)");
  gen->add_option("--out", gen_out, "Output CSV path")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();

  // stats
  auto* st = app.add_subcommand("stats", "Print dataset statistics table");
  std::vector<std::string> st_manifests;
  std::string st_input, st_tag;
  double st_duration = 0.0;
  bool st_merged = false;
  st->add_option("--manifest", st_manifests, "Dataset manifest JSON (repeatable)");
  st->add_option("--input", st_input, "Edge CSV path");
  st->add_option("--duration", st_duration, "Course duration in weeks (with --input)");
  st->add_option("--tag", st_tag, "Dataset tag (with --input)");
  st->add_flag("--merged", st_merged, "Append a row for the merged graph");

  // split
  auto* sp = app.add_subcommand("split", "Build a temporal link-prediction split");
  std::string sp_input, sp_manifest, sp_tag, sp_horizon = "end", sp_eval_ratio = "1", sp_out;
  double sp_duration = 0.0, sp_progress = 0.5, sp_train_ratio = 1.0;
  int sp_k = 10;
  std::uint64_t sp_seed = 42;
  sp->add_option("--input", sp_input, "Edge CSV path");
  sp->add_option("--manifest", sp_manifest, "Dataset manifest JSON");
  sp->add_option("--duration", sp_duration, "Course duration in weeks (with --input)");
  sp->add_option("--tag", sp_tag, "Dataset tag");
  sp->add_option("--progress", sp_progress, "Observed progress fraction in (0,1)")->capture_default_str();
  sp->add_option("--horizon", sp_horizon, "Prediction horizon fraction or 'end'")->capture_default_str();
  sp->add_option("--k", sp_k, "Number of folds")->capture_default_str();
  sp->add_option("--train-negative-ratio", sp_train_ratio, "")->capture_default_str();
  sp->add_option("--eval-negative-ratio", sp_eval_ratio, "Ratio or 'all'")->capture_default_str();
  sp->add_option("--seed", sp_seed, "Split seed")->capture_default_str();
  sp->add_option("--out", sp_out, "Split JSON output path (default: stdout)");

  // train
  auto* tr = app.add_subcommand("train", "Train on a split (optionally holding out one fold)");
  std::string tr_input, tr_manifest, tr_tag, tr_split, tr_ckpt = "model.ckpt", tr_loss;
  double tr_duration = 0.0;
  int tr_fold = -1;
  TrainConfig tr_cfg;
  ModelDims tr_dims;
  tr->add_option("--input", tr_input, "Edge CSV path");
  tr->add_option("--manifest", tr_manifest, "Dataset manifest JSON");
  tr->add_option("--duration", tr_duration, "Course duration in weeks (with --input)");
  tr->add_option("--tag", tr_tag, "Dataset tag");
  tr->add_option("--split", tr_split, "Split JSON from the split subcommand")->required();
  tr->add_option("--fold", tr_fold, "Held-out fold index; -1 trains on all positives")
      ->capture_default_str();
  tr->add_option("--epochs", tr_cfg.epochs, "")->capture_default_str();
  tr->add_option("--learning-rate", tr_cfg.learning_rate, "")->capture_default_str();
  tr->add_option("--pcw", tr_cfg.pcw, "Positive class weight")->capture_default_str();
  tr->add_option("--seed", tr_cfg.seed, "Training seed")->capture_default_str();
  tr->add_option("--embedding-dim", tr_dims.embedding, "")->capture_default_str();
  tr->add_option("--hidden1", tr_dims.hidden1, "")->capture_default_str();
  tr->add_option("--hidden2", tr_dims.hidden2, "")->capture_default_str();
  bool tr_no_final_act = false;
  tr->add_flag("--no-final-activation", tr_no_final_act,
               "Drop the rectifier after the second layer");
  tr->add_option("--out", tr_ckpt, "Checkpoint output path")->capture_default_str();
  tr->add_option("--loss-csv", tr_loss, "Per-epoch loss CSV output path");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a held-out fold");
  std::string ev_input, ev_manifest, ev_tag, ev_split, ev_ckpt, ev_tie = "half", ev_out;
  double ev_duration = 0.0;
  int ev_fold = 0;
  ev->add_option("--input", ev_input, "Edge CSV path");
  ev->add_option("--manifest", ev_manifest, "Dataset manifest JSON");
  ev->add_option("--duration", ev_duration, "Course duration in weeks (with --input)");
  ev->add_option("--tag", ev_tag, "Dataset tag");
  ev->add_option("--split", ev_split, "Split JSON")->required();
  ev->add_option("--fold", ev_fold, "Fold index to evaluate")->capture_default_str();
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint path")->required();
  ev->add_option("--tie-policy", ev_tie, "half|strict")->capture_default_str();
  ev->add_option("--out", ev_out, "Report JSON output path (default: stdout)");

  // experiment
  auto* ex = app.add_subcommand("experiment", "Run the full experiment matrix from a spec file");
  std::string ex_spec, ex_out = "experiment-out";
  bool ex_resume = false;
  int ex_jobs = 1;
  ex->add_option("--spec", ex_spec, "Experiment spec JSON")->required();
  ex->add_option("--out", ex_out, "Output directory")->capture_default_str();
  ex->add_flag("--resume", ex_resume, "Reuse cached cells");
  ex->add_option("--jobs", ex_jobs, "Parallel cells")->capture_default_str();

  // ttest
  auto* tt = app.add_subcommand("ttest", "One-sided Welch t-test between two AUC samples");
  std::string tt_a, tt_b, tt_models = "IS vs CO", tt_dataset = "-", tt_progress = "-";
  double tt_alpha = 0.10;
  tt->add_option("--a", tt_a, "Candidate sample: comma-separated values or a file")->required();
  tt->add_option("--b", tt_b, "Baseline sample: comma-separated values or a file")->required();
  tt->add_option("--alpha", tt_alpha, "")->capture_default_str();
  tt->add_option("--models", tt_models, "Label for the rendered row")->capture_default_str();
  tt->add_option("--dataset", tt_dataset, "")->capture_default_str();
  tt->add_option("--progress", tt_progress, "")->capture_default_str();

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Verify analytic gradients with finite differences");
  int gc_nodes = 8;
  std::string gc_dims;
  std::uint64_t gc_seed = 1;
  double gc_tol = 1e-4;
  bool gc_fault = false;
  gc->add_option("--nodes", gc_nodes, "Graph size (max 32)")->capture_default_str();
  gc->add_option("--dims", gc_dims, "F,d1,d2 (default 16,16,16)");
  gc->add_option("--seed", gc_seed, "")->capture_default_str();
  gc->add_option("--tol", gc_tol, "Max relative error")->capture_default_str();
  gc->add_flag("--inject-fault", gc_fault, "Corrupt the W2 gradient (harness self-test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsageError;
  }

  try {
    if (gen->parsed()) {
      if (gen_preset.empty() == gen_config.empty()) {
        std::cerr << "error: generate needs exactly one of --preset or --config\n";
        return kExitUsageError;
      }
      if (!gen_preset.empty()) {
        const auto names = preset_names();
        if (std::find(names.begin(), names.end(), gen_preset) == names.end()) {
          std::cerr << "error: unknown preset '" << gen_preset << "'\n";
          return kExitUsageError;
        }
      }
      return cmd_generate(gen_preset, gen_config, gen_out, gen_seed);
    }
    if (st->parsed()) return cmd_stats(st_manifests, st_input, st_duration, st_tag, st_merged);
    if (sp->parsed()) {
      return cmd_split(sp_input, sp_manifest, sp_duration, sp_tag, sp_progress, sp_horizon, sp_k,
                       sp_train_ratio, sp_eval_ratio, sp_seed, sp_out);
    }
    if (tr->parsed()) {
      tr_dims.final_activation = !tr_no_final_act;
      return cmd_train(tr_input, tr_manifest, tr_duration, tr_tag, tr_split, tr_fold, tr_cfg,
                       tr_dims, tr_ckpt, tr_loss);
    }
    if (ev->parsed()) {
      return cmd_eval(ev_input, ev_manifest, ev_duration, ev_tag, ev_split, ev_fold, ev_ckpt,
                      ev_tie, ev_out);
    }
    if (ex->parsed()) return cmd_experiment(ex_spec, ex_out, ex_resume, ex_jobs);
    if (tt->parsed()) return cmd_ttest(tt_a, tt_b, tt_alpha, tt_models, tt_dataset, tt_progress);
    if (gc->parsed()) return cmd_gradcheck(gc_nodes, gc_dims, gc_seed, gc_tol, gc_fault);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsageError;
}
