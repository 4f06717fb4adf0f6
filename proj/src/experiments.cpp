#include "slnlink/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "slnlink/rng.hpp"

namespace slnlink {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json generator_json(const GeneratorConfig& g) {
  json j;
  j["tag"] = g.tag;
  j["n_students"] = g.n_students;
  j["n_threads"] = g.n_threads;
  j["duration_weeks"] = g.duration_weeks;
  j["activity_exponent"] = g.activity_exponent;
  j["replies_per_thread_mean"] = g.replies_per_thread_mean;
  j["participation_window"] = g.participation_window;
  j["seed"] = g.seed;
  return j;
}

json dataset_json(const DatasetSource& d) {
  if (d.generator) return json{{"generator", generator_json(*d.generator)}};
  json m;
  m["tag"] = d.manifest->tag;
  m["path"] = d.manifest->path;
  m["duration_weeks"] = d.manifest->duration_weeks;
  if (d.manifest->expected_nodes) m["expected_nodes"] = *d.manifest->expected_nodes;
  if (d.manifest->expected_events) m["expected_events"] = *d.manifest->expected_events;
  return json{{"manifest", m}};
}

json spec_json(const ExperimentSpec& spec) {
  json j;
  auto& ds = j["datasets"] = json::array();
  for (const auto& d : spec.datasets) ds.push_back(dataset_json(d));
  j["progress_points"] = spec.progress_points;
  json modes = json::array();
  if (spec.mode_iso) modes.push_back("iso");
  if (spec.mode_combined) modes.push_back("combined");
  j["modes"] = modes;
  if (!spec.combine_tags.empty()) j["combine"] = spec.combine_tags;
  j["k"] = spec.k;
  j["dims"] = {{"embedding", spec.dims.embedding},
               {"hidden1", spec.dims.hidden1},
               {"hidden2", spec.dims.hidden2},
               {"final_activation", spec.dims.final_activation}};
  j["train"] = {{"epochs", spec.train.epochs},
                {"learning_rate", spec.train.learning_rate},
                {"pcw", spec.train.pcw},
                {"train_negative_ratio", spec.train.train_negative_ratio},
                {"resample_negatives_each_epoch", spec.train.resample_negatives_each_epoch},
                {"adam_beta1", spec.train.adam_beta1},
                {"adam_beta2", spec.train.adam_beta2},
                {"adam_epsilon", spec.train.adam_epsilon}};
  if (spec.horizon) {
    j["horizon"] = *spec.horizon;
  } else {
    j["horizon"] = "end";
  }
  if (spec.ratios.eval_negative_ratio) {
    j["eval_negative_ratio"] = *spec.ratios.eval_negative_ratio;
  } else {
    j["eval_negative_ratio"] = "all";
  }
  j["tie_policy"] = spec.tie_policy == TiePolicy::kHalf ? "half" : "strict";
  j["alpha"] = spec.alpha;
  j["master_seed"] = spec.master_seed;
  return j;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double stdev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / double(v.size() - 1));
}

std::vector<Edge> offset_edges(const std::vector<Edge>& edges, int offset) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.push_back(Edge{e.u + offset, e.v + offset});
  return out;
}

}  // namespace

std::uint64_t derive_split_seed(std::uint64_t master_seed, const std::string& tag,
                                double progress) {
  return mix_seed(master_seed, fnv1a64(tag),
                  std::uint64_t(std::llround(progress * 1e6)));
}

ExperimentSpec parse_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open experiment spec: " + path);
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": spec parse error: " + e.what());
  }

  ExperimentSpec spec;
  try {
    const fs::path base = fs::path(path).parent_path();
    for (const auto& d : j.at("datasets")) {
      DatasetSource src;
      if (d.contains("preset")) {
        std::uint64_t seed = d.value("seed", std::uint64_t(42));
        src.generator = preset_config(d.at("preset").get<std::string>(), seed);
      } else if (d.contains("generator")) {
        const auto& g = d.at("generator");
        GeneratorConfig cfg;
        cfg.tag = g.at("tag").get<std::string>();
        cfg.n_students = g.at("n_students").get<int>();
        cfg.n_threads = g.at("n_threads").get<int>();
        cfg.duration_weeks = g.at("duration_weeks").get<double>();
        cfg.activity_exponent = g.at("activity_exponent").get<double>();
        cfg.replies_per_thread_mean = g.at("replies_per_thread_mean").get<double>();
        cfg.participation_window = g.at("participation_window").get<int>();
        cfg.seed = g.value("seed", std::uint64_t(42));
        src.generator = cfg;
      } else if (d.contains("manifest")) {
        fs::path mpath = d.at("manifest").get<std::string>();
        if (mpath.is_relative()) mpath = base / mpath;
        DatasetManifest m = load_manifest(mpath.string());
        fs::path csv = m.path;
        if (csv.is_relative()) csv = mpath.parent_path() / csv;
        m.path = csv.string();
        src.manifest = m;
      } else {
        throw std::runtime_error("dataset entry needs 'preset', 'generator', or 'manifest'");
      }
      spec.datasets.push_back(std::move(src));
    }
    if (spec.datasets.empty()) throw std::runtime_error("spec lists no datasets");

    if (j.contains("progress_points")) {
      spec.progress_points = j["progress_points"].get<std::vector<double>>();
    }
    if (j.contains("modes")) {
      spec.mode_iso = false;
      spec.mode_combined = false;
      for (const auto& m : j["modes"]) {
        const std::string s = m.get<std::string>();
        if (s == "iso") {
          spec.mode_iso = true;
        } else if (s == "combined") {
          spec.mode_combined = true;
        } else {
          throw std::runtime_error("unknown mode '" + s + "'");
        }
      }
    }
    if (j.contains("combine")) spec.combine_tags = j["combine"].get<std::vector<std::string>>();
    spec.k = j.value("k", 10);
    if (j.contains("dims")) {
      const auto& d = j["dims"];
      spec.dims.embedding = d.value("embedding", 16);
      spec.dims.hidden1 = d.value("hidden1", 16);
      spec.dims.hidden2 = d.value("hidden2", 16);
      spec.dims.final_activation = d.value("final_activation", true);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      spec.train.epochs = t.value("epochs", 1500);
      spec.train.learning_rate = t.value("learning_rate", 5e-4);
      spec.train.pcw = t.value("pcw", 20.0);
      spec.train.train_negative_ratio = t.value("train_negative_ratio", 1.0);
      spec.train.resample_negatives_each_epoch = t.value("resample_negatives_each_epoch", true);
    }
    spec.ratios.train_negative_ratio = spec.train.train_negative_ratio;
    if (j.contains("horizon")) {
      if (j["horizon"].is_string()) {
        if (j["horizon"].get<std::string>() != "end") {
          throw std::runtime_error("horizon must be a fraction or \"end\"");
        }
      } else {
        spec.horizon = j["horizon"].get<double>();
      }
    }
    if (j.contains("eval_negative_ratio")) {
      if (j["eval_negative_ratio"].is_string()) {
        if (j["eval_negative_ratio"].get<std::string>() != "all") {
          throw std::runtime_error("eval_negative_ratio must be a number or \"all\"");
        }
        spec.ratios.eval_negative_ratio.reset();
      } else {
        spec.ratios.eval_negative_ratio = j["eval_negative_ratio"].get<double>();
      }
    }
    if (j.contains("tie_policy")) {
      const std::string s = j["tie_policy"].get<std::string>();
      if (s == "half") {
        spec.tie_policy = TiePolicy::kHalf;
      } else if (s == "strict") {
        spec.tie_policy = TiePolicy::kStrict;
      } else {
        throw std::runtime_error("tie_policy must be 'half' or 'strict'");
      }
    }
    spec.alpha = j.value("alpha", 0.10);
    spec.master_seed = j.value("master_seed", std::uint64_t(42));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": spec error: " + e.what());
  }

  if (spec.mode_combined) {
    const auto& tags = spec.combine_tags;
    std::size_t pool = tags.empty() ? spec.datasets.size() : tags.size();
    if (pool < 2) throw std::runtime_error("combined mode requires at least 2 datasets");
  }
  return spec;
}

namespace {

TrainConfig cell_train_config(const ExperimentSpec& spec, std::uint64_t split_seed, int mode_id,
                              int fold) {
  TrainConfig cfg = spec.train;
  cfg.seed = mix_seed(split_seed, std::uint64_t(mode_id), std::uint64_t(fold));
  return cfg;
}

}  // namespace

std::vector<double> run_iso(const TemporalGraph& g, double progress, const ExperimentSpec& spec,
                            std::uint64_t split_seed) {
  SplitPlan plan = make_split(g, progress, spec.horizon, spec.k, spec.ratios, split_seed);
  std::vector<FoldTask> tasks = fold_tasks(plan);
  std::vector<double> aucs;
  aucs.reserve(tasks.size());
  for (const FoldTask& task : tasks) {
    TrainConfig cfg = cell_train_config(spec, split_seed, 1, task.fold_index);
    TrainResult trained =
        train_model(plan.observed, task.train_positives, task.test_positives, cfg, spec.dims);
    EvalReport report = evaluate_fold(trained.params, plan.observed, task, spec.tie_policy);
    aucs.push_back(report.auc);
  }
  return aucs;
}

std::vector<double> run_combined(const std::vector<const TemporalGraph*>& graphs,
                                 const TemporalGraph& merged, const std::string& target_tag,
                                 double progress, const ExperimentSpec& spec,
                                 std::uint64_t split_seed) {
  if (graphs.size() < 2) throw std::invalid_argument("combined mode requires at least 2 graphs");
  const TemporalGraph* target = nullptr;
  for (const TemporalGraph* g : graphs) {
    if (g->provenance().size() == 1 && g->provenance().front().tag == target_tag) target = g;
  }
  if (!target) throw std::invalid_argument("target '" + target_tag + "' not among merged graphs");

  // The target's split, folds, and eval negatives come from its own graph
  // with the iso seed; only the training side sees the merged graph.
  SplitPlan plan;
  try {
    plan = make_split(*target, progress, spec.horizon, spec.k, spec.ratios, split_seed);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("target '" + target_tag + "': " + e.what());
  }
  std::vector<FoldTask> tasks = fold_tasks(plan);

  const int offset = merged.provenance_of(target_tag).begin;
  std::vector<Edge> other_positives;
  for (const TemporalGraph* g : graphs) {
    const std::string& tag = g->provenance().front().tag;
    if (tag == target_tag) continue;
    const int off = merged.provenance_of(tag).begin;
    for (const Edge& e : future_positives(*g, progress, spec.horizon)) {
      other_positives.push_back(Edge{e.u + off, e.v + off});
    }
  }

  const SnapshotView merged_observed = snapshot(merged, progress);
  std::vector<double> aucs;
  aucs.reserve(tasks.size());
  for (const FoldTask& task : tasks) {
    FoldTask global;
    global.fold_index = task.fold_index;
    global.train_positives = offset_edges(task.train_positives, offset);
    global.test_positives = offset_edges(task.test_positives, offset);
    global.test_negatives = offset_edges(task.test_negatives, offset);
    if (restrict_pairs(merged, target_tag, global.test_positives).size() !=
        global.test_positives.size()) {
      throw std::logic_error("combined-mode test pairs leaked outside the target classroom");
    }

    std::vector<Edge> train_pos = other_positives;
    train_pos.insert(train_pos.end(), global.train_positives.begin(),
                     global.train_positives.end());
    TrainConfig cfg = cell_train_config(spec, split_seed, 2, task.fold_index);
    TrainResult trained =
        train_model(merged_observed, train_pos, global.test_positives, cfg, spec.dims);
    EvalReport report = evaluate_fold(trained.params, merged_observed, global, spec.tie_policy);
    aucs.push_back(report.auc);
  }
  return aucs;
}

namespace {

struct PreparedDatasets {
  std::vector<TemporalGraph> graphs;                 // one per spec dataset
  std::vector<const TemporalGraph*> combine_set;     // graphs merged in combined mode
  TemporalGraph merged;                              // valid when combine_set.size() >= 2
};

PreparedDatasets prepare_datasets(const ExperimentSpec& spec) {
  PreparedDatasets out;
  out.graphs.reserve(spec.datasets.size());
  for (const auto& d : spec.datasets) {
    if (d.generator) {
      out.graphs.push_back(generate_synthetic_sln(*d.generator));
    } else {
      out.graphs.push_back(load_edge_csv(d.manifest->path, *d.manifest));
    }
  }
  if (spec.mode_combined) {
    for (std::size_t i = 0; i < spec.datasets.size(); ++i) {
      const std::string& tag = spec.datasets[i].tag();
      if (spec.combine_tags.empty() ||
          std::find(spec.combine_tags.begin(), spec.combine_tags.end(), tag) !=
              spec.combine_tags.end()) {
        out.combine_set.push_back(&out.graphs[i]);
      }
    }
    if (out.combine_set.size() < 2) {
      throw std::runtime_error("combined mode requires at least 2 datasets in the combine set");
    }
    std::vector<TemporalGraph> to_merge;
    for (const TemporalGraph* g : out.combine_set) to_merge.push_back(*g);
    out.merged = merge(to_merge);
  }
  return out;
}

std::string cell_cache_key(const ExperimentSpec& spec, const std::string& dataset,
                           double progress, const std::string& mode, std::uint64_t split_seed) {
  json j = spec_json(spec);
  j["cell"] = {{"dataset", dataset}, {"progress", progress}, {"mode", mode},
               {"split_seed", split_seed}};
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

bool load_cached_cell(const std::string& cache_dir, CellResult& cell) {
  const fs::path path = fs::path(cache_dir) / (cell.cache_key + ".json");
  std::ifstream in(path);
  if (!in) return false;
  try {
    json j;
    in >> j;
    cell.fold_aucs = j.at("fold_aucs").get<std::vector<double>>();
    cell.error = j.value("error", std::string{});
  } catch (const nlohmann::json::exception&) {
    return false;  // unreadable cache entries are recomputed
  }
  if (!cell.fold_aucs.empty()) {
    cell.mean = mean_of(cell.fold_aucs);
    cell.stdev = stdev_of(cell.fold_aucs);
  }
  return true;
}

void store_cached_cell(const std::string& cache_dir, const CellResult& cell) {
  fs::create_directories(cache_dir);
  json j;
  j["dataset"] = cell.dataset;
  j["progress"] = cell.progress;
  j["mode"] = cell.mode;
  j["split_seed"] = cell.split_seed;
  j["fold_aucs"] = cell.fold_aucs;
  if (!cell.error.empty()) j["error"] = cell.error;
  std::ofstream out(fs::path(cache_dir) / (cell.cache_key + ".json"));
  out << j.dump(2) << "\n";
}

}  // namespace

ExperimentReport run_matrix(const ExperimentSpec& spec, const std::string& cache_dir,
                            bool resume, int jobs) {
  PreparedDatasets data = prepare_datasets(spec);

  ExperimentReport report;
  report.spec_echo_json = spec_json(spec).dump(2);

  // Lay out cells in deterministic spec order.
  for (std::size_t i = 0; i < spec.datasets.size(); ++i) {
    const std::string& tag = spec.datasets[i].tag();
    for (double progress : spec.progress_points) {
      const std::uint64_t split_seed = derive_split_seed(spec.master_seed, tag, progress);
      if (spec.mode_iso) {
        CellResult cell;
        cell.dataset = tag;
        cell.progress = progress;
        cell.mode = "iso";
        cell.split_seed = split_seed;
        cell.cache_key = cell_cache_key(spec, tag, progress, "iso", split_seed);
        report.cells.push_back(std::move(cell));
      }
      bool in_combine_set =
          spec.combine_tags.empty() ||
          std::find(spec.combine_tags.begin(), spec.combine_tags.end(), tag) !=
              spec.combine_tags.end();
      if (spec.mode_combined && in_combine_set) {
        CellResult cell;
        cell.dataset = tag;
        cell.progress = progress;
        cell.mode = "combined";
        cell.split_seed = split_seed;
        cell.cache_key = cell_cache_key(spec, tag, progress, "combined", split_seed);
        report.cells.push_back(std::move(cell));
      }
    }
  }

  auto graph_for = [&](const std::string& tag) -> const TemporalGraph& {
    for (std::size_t i = 0; i < spec.datasets.size(); ++i) {
      if (spec.datasets[i].tag() == tag) return data.graphs[i];
    }
    throw std::logic_error("dataset lookup failed for tag " + tag);
  };

  auto run_cell = [&](CellResult& cell) {
    if (resume && load_cached_cell(cache_dir, cell)) return;
    try {
      cell.fold_aucs = cell.mode == "iso"
                           ? run_iso(graph_for(cell.dataset), cell.progress, spec, cell.split_seed)
                           : run_combined(data.combine_set, data.merged, cell.dataset,
                                          cell.progress, spec, cell.split_seed);
      cell.mean = mean_of(cell.fold_aucs);
      cell.stdev = stdev_of(cell.fold_aucs);
    } catch (const std::exception& e) {
      cell.error = std::string(e.what());
    }
    store_cached_cell(cache_dir, cell);
  };

  if (jobs <= 1 || report.cells.size() <= 1) {
    for (auto& cell : report.cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= report.cells.size()) return;
        run_cell(report.cells[i]);
      }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(jobs, int(report.cells.size()));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Combined-vs-iso tests, one per (dataset, progress) with both cells.
  if (spec.mode_iso && spec.mode_combined) {
    for (std::size_t i = 0; i < spec.datasets.size(); ++i) {
      const std::string& tag = spec.datasets[i].tag();
      for (double progress : spec.progress_points) {
        const CellResult* iso = nullptr;
        const CellResult* combined = nullptr;
        for (const auto& c : report.cells) {
          if (c.dataset == tag && c.progress == progress) {
            if (c.mode == "iso") iso = &c;
            if (c.mode == "combined") combined = &c;
          }
        }
        if (!iso || !combined) continue;
        ComparisonResult cmp;
        cmp.dataset = tag;
        cmp.progress = progress;
        if (!iso->ok() || !combined->ok()) {
          cmp.error = "cell failure: " + (iso->ok() ? combined->error : iso->error);
        } else {
          try {
            // Candidate a = combined (CO), baseline b = iso (IS).
            cmp.ttest = welch_t_one_sided(combined->fold_aucs, iso->fold_aucs, spec.alpha);
          } catch (const std::exception& e) {
            cmp.error = e.what();
          }
        }
        report.comparisons.push_back(std::move(cmp));
      }
    }
  }
  return report;
}

std::string report_json(const ExperimentReport& report) {
  json j;
  j["spec"] = json::parse(report.spec_echo_json);
  auto& cells = j["cells"] = json::array();
  for (const auto& c : report.cells) {
    json cj;
    cj["dataset"] = c.dataset;
    cj["progress"] = c.progress;
    cj["mode"] = c.mode;
    if (c.ok()) {
      cj["fold_aucs"] = c.fold_aucs;
      cj["mean_auc"] = c.mean;
      cj["stdev_auc"] = c.stdev;
    } else {
      cj["error"] = c.error;
    }
    cj["split_seed"] = c.split_seed;
    cj["cache_key"] = c.cache_key;
    cells.push_back(std::move(cj));
  }
  auto& tests = j["ttests"] = json::array();
  for (const auto& t : report.comparisons) {
    json tj;
    tj["models"] = t.models;
    tj["dataset"] = t.dataset;
    tj["progress"] = t.progress;
    if (t.ok()) {
      tj["t_statistic"] = t.ttest.t_statistic;
      tj["degrees_of_freedom"] = t.ttest.degrees_of_freedom;
      tj["p_value"] = t.ttest.p_value;
      tj["alpha"] = t.ttest.alpha;
      tj["decision"] = t.ttest.reject_null ? "Reject H0" : "Fail to Reject H0";
    } else {
      tj["error"] = t.error;
    }
    tests.push_back(std::move(tj));
  }
  return j.dump(2) + "\n";
}

std::string format_pvalue(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", p);
  std::string s = buf;
  // strip exponent padding: 4.18e-01 -> 4.18e-1
  auto e = s.find('e');
  if (e != std::string::npos) {
    std::string mantissa = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    bool negative = !exp.empty() && exp[0] == '-';
    if (!exp.empty() && (exp[0] == '+' || exp[0] == '-')) exp.erase(0, 1);
    while (exp.size() > 1 && exp[0] == '0') exp.erase(0, 1);
    s = mantissa + "e" + (negative ? "-" : "") + exp;
  }
  return s;
}

std::string render_tables(const ExperimentReport& report) {
  std::ostringstream out;
  char buf[256];

  out << "AUC by dataset, progress, and training mode (mean +/- std over folds)\n";
  std::snprintf(buf, sizeof(buf), "%-14s %-10s %-20s %-20s\n", "dataset", "progress", "iso",
                "combined");
  out << buf;

  // Distinct (dataset, progress) rows in first-appearance order.
  std::vector<std::pair<std::string, double>> rows;
  for (const auto& c : report.cells) {
    std::pair<std::string, double> key{c.dataset, c.progress};
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
  }
  auto cell_text = [&](const std::string& dataset, double progress,
                       const std::string& mode) -> std::string {
    for (const auto& c : report.cells) {
      if (c.dataset == dataset && c.progress == progress && c.mode == mode) {
        if (!c.ok()) return "failed";
        char t[64];
        std::snprintf(t, sizeof(t), "%.4f +/- %.4f", c.mean, c.stdev);
        return t;
      }
    }
    return "—";
  };
  for (const auto& [dataset, progress] : rows) {
    char pct[16];
    std::snprintf(pct, sizeof(pct), "%g%%", progress * 100.0);
    std::snprintf(buf, sizeof(buf), "%-14s %-10s %-20s %-20s\n", dataset.c_str(), pct,
                  cell_text(dataset, progress, "iso").c_str(),
                  cell_text(dataset, progress, "combined").c_str());
    out << buf;
  }

  out << "\nHypothesis tests (one-sided Welch t-test)\n";
  std::snprintf(buf, sizeof(buf), "%-10s %-14s %-10s %-10s %s\n", "models", "dataset", "progress",
                "p-value", "decision");
  out << buf;
  for (const auto& t : report.comparisons) {
    char pct[16];
    std::snprintf(pct, sizeof(pct), "%g%%", t.progress * 100.0);
    if (t.ok()) {
      std::snprintf(buf, sizeof(buf), "%-10s %-14s %-10s %-10s %s\n", t.models.c_str(),
                    t.dataset.c_str(), pct, format_pvalue(t.ttest.p_value).c_str(),
                    t.ttest.reject_null ? "Reject H0" : "Fail to Reject H0");
    } else {
      std::snprintf(buf, sizeof(buf), "%-10s %-14s %-10s %-10s %s\n", t.models.c_str(),
                    t.dataset.c_str(), pct, "—", t.error.c_str());
    }
    out << buf;
  }
  return out.str();
}

}  // namespace slnlink
