#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slnlink/eval.hpp"
#include "slnlink/generator.hpp"
#include "slnlink/io.hpp"
#include "slnlink/model.hpp"
#include "slnlink/splits.hpp"
#include "slnlink/train.hpp"

// Experiment orchestration: iso (per-classroom) and combined (merged
// classrooms, evaluated per classroom) training sweeps over progress
// points, with one-sided Welch t-tests comparing the two conditions.
//
// Fold alignment: for a given (dataset, progress) the test folds are built
// from the target's own future positives with the same derived seed in
// both modes, so iso-vs-combined differences reflect training data only.

namespace slnlink {

struct DatasetSource {
  std::optional<GeneratorConfig> generator;
  std::optional<DatasetManifest> manifest;

  const std::string& tag() const { return generator ? generator->tag : manifest->tag; }
};

struct ExperimentSpec {
  std::vector<DatasetSource> datasets;
  std::vector<double> progress_points{0.25, 0.50, 0.75, 0.90};
  bool mode_iso = true;
  bool mode_combined = false;
  std::vector<std::string> combine_tags;  // datasets merged in combined mode; empty = all
  int k = 10;
  ModelDims dims;
  TrainConfig train;  // the seed field is ignored; seeds derive from master_seed
  std::optional<double> horizon;  // nullopt = end of course
  SplitRatios ratios;
  TiePolicy tie_policy = TiePolicy::kHalf;
  double alpha = 0.10;
  std::uint64_t master_seed = 42;
};

ExperimentSpec parse_experiment_spec(const std::string& path);

struct CellResult {
  std::string dataset;
  double progress = 0.0;
  std::string mode;  // "iso" or "combined"
  std::vector<double> fold_aucs;
  double mean = 0.0;
  double stdev = 0.0;
  std::uint64_t split_seed = 0;
  std::string cache_key;
  std::string error;  // non-empty when the cell failed

  bool ok() const { return error.empty(); }
};

struct ComparisonResult {
  std::string dataset;
  double progress = 0.0;
  std::string models = "IS vs CO";
  TTestResult ttest;
  std::string error;

  bool ok() const { return error.empty(); }
};

struct ExperimentReport {
  std::string spec_echo_json;  // canonical echo of the spec, for provenance
  std::vector<CellResult> cells;
  std::vector<ComparisonResult> comparisons;
};

// Seed for the (dataset, progress) split; shared between modes so their
// fold memberships coincide.
std::uint64_t derive_split_seed(std::uint64_t master_seed, const std::string& tag,
                                double progress);

// k re-trainings on a single classroom, one per fold; returns the k test AUCs.
std::vector<double> run_iso(const TemporalGraph& g, double progress, const ExperimentSpec& spec,
                            std::uint64_t split_seed);

// Trains on the merged graph (all of `graphs`) per fold, with the target's
// fold test sets carried over from its iso split; other classrooms
// contribute all of their future positives as extra supervision. Returns
// the k test AUCs on the target classroom only.
std::vector<double> run_combined(const std::vector<const TemporalGraph*>& graphs,
                                 const TemporalGraph& merged, const std::string& target_tag,
                                 double progress, const ExperimentSpec& spec,
                                 std::uint64_t split_seed);

// Executes every (dataset x progress x mode) cell, caching finished cells
// under cache_dir (keyed by a content hash of the cell descriptor) and
// attaching combined-vs-iso t-tests. Individual cell failures are recorded
// in the report without aborting the matrix.
ExperimentReport run_matrix(const ExperimentSpec& spec, const std::string& cache_dir,
                            bool resume, int jobs = 1);

std::string report_json(const ExperimentReport& report);

// Table of per-cell mean AUCs plus the hypothesis-test rows; missing
// cells render as em-dashes.
std::string render_tables(const ExperimentReport& report);

// Scientific notation with three significant digits and an unpadded
// exponent, e.g. 4.18e-1.
std::string format_pvalue(double p);

}  // namespace slnlink
