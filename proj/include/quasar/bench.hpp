#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quasar/glmtron.hpp"
#include "quasar/objectives.hpp"
#include "quasar/trace.hpp"

namespace quasar {

enum class Algo { continuized_quasar, continuized_strong, gd, hss_strong, hss_quasar, glmtron, accel_glmtron };

std::string to_string(Algo a);
/// Accepts the names printed by to_string (e.g. "continuized-strong").
Algo parse_algo(const std::string& name);
/// Randomized by the event clock or by sample selection.
bool is_stochastic(Algo a);
/// Recovery algorithms report distance to w*, the others report f-gaps.
bool is_recovery(Algo a);

/// One grid tuple. Fields an algorithm ignores are NaN; gd and glmtron use
/// step = 1/L.
struct GridPoint {
  double L = 0.0;
  double mu = 0.0;
  double rho = 0.0;
};

struct GridSpec {
  int q_lo = -2;
  int q_hi = 4;
  std::vector<double> rho_set{0.01, 0.1, 0.5};

  void validate() const;
  /// {10^q, 5 10^q} for every q in [q_lo, q_hi], ascending.
  std::vector<double> values() const;
};

/// All (L, mu, rho) with L > mu, ordered by L, then mu, then rho. Throws on an empty grid.
std::vector<GridPoint> expand_grid(const GridSpec& spec);

/// The tuples `a` actually distinguishes: continuized-quasar and hss-quasar
/// use (L, rho), gd and glmtron use L, accel-glmtron takes a single point.
std::vector<GridPoint> grid_for(Algo a, const GridSpec& spec);

enum class ScoreKind { final_gap, auc };

struct ExperimentConfig {
  LinkKind link = LinkKind::logistic;
  double alpha = 0.5;
  std::size_t n = 1000;
  std::size_t d = 50;
  /// Load the problem from <stem>.csv/.json instead of generating it.
  std::optional<std::string> problem;
  std::vector<Algo> algorithms{Algo::continuized_strong, Algo::gd, Algo::hss_strong};
  std::size_t iters_deterministic = 3000;
  std::size_t iters_stochastic = 10000;
  std::optional<std::uint64_t> grad_budget;
  std::size_t runs = 10;
  /// Runs per tuple during selection; defaults to `runs`.
  std::optional<std::size_t> selection_runs;
  std::uint64_t seed = 1;
  std::string out = "out";
  GridSpec grid;
  ScoreKind score = ScoreKind::final_gap;
  std::uint64_t record_every = 10;
  /// Target accuracy of hss-quasar.
  double eps = 1e-8;
  bool wall_time = true;
  std::optional<double> glm_mu;
  std::optional<double> glm_r2;
  std::optional<double> glm_kappa;

  void validate() const;
  std::size_t iters_for(Algo a) const;
  std::size_t selection_runs_or_default() const;

  /// Canonical key=value text; parse(to_text()) round-trips.
  std::string to_text() const;
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Hash of everything except `out`.
  std::uint64_t config_id() const;
  /// Hash of the problem-defining fields; seeds the problem and run streams so
  /// that adding an algorithm or widening the grid leaves other runs unchanged.
  std::uint64_t data_id() const;
};

/// Stream ids: the problem uses derive_stream(data_id, 0), run r uses derive_stream(data_id, r + 1).
std::uint64_t problem_stream(const ExperimentConfig& cfg);
std::uint64_t run_stream(const ExperimentConfig& cfg, std::size_t run_index);

GlmProblem experiment_problem(const ExperimentConfig& cfg);

/// Everything a single run needs besides the problem.
struct RunSpec {
  Algo algo = Algo::gd;
  GridPoint point;
  std::size_t iters = 1000;
  std::optional<std::uint64_t> grad_budget;
  double eps = 1e-8;
  std::uint64_t record_every = 1;
  bool wall_time = true;
  std::optional<GlmtronParams> glm;
};

struct RunResult {
  RunTrace trace;              // f-gap algorithms
  RecoveryTrace recovery;      // recovery algorithms
  bool diverged = false;
  std::string error;
  /// Final f-gap (or distance) and the mean over recorded rows.
  double final_metric = 0.0;
  double mean_metric = 0.0;
};

/// Draws w0 = initial_point(rng) from SeededRng(master_seed, stream), then the
/// jump schedule / sample indices from the same generator; z0 = w0.
/// Divergence and other library errors are reported in the result, not thrown.
RunResult execute_run(const GlmProblem& problem, const Objective& obj, const RunSpec& spec, std::uint64_t master_seed,
                      std::uint64_t stream);

struct GridScore {
  GridPoint point;
  double score = 0.0;
  std::size_t diverged_runs = 0;
  std::size_t runs = 0;
};

struct AlgoResult {
  Algo algo = Algo::gd;
  GridPoint best;
  double best_score = 0.0;
  std::vector<GridScore> scores;
  std::vector<RunTrace> traces;
  std::vector<RecoveryTrace> recovery;
};

struct ExperimentResult {
  ExperimentConfig cfg;
  std::vector<AlgoResult> algos;
};

/// Worker count: QUASAR_OPT_WORKERS if set (>= 1), else hardware concurrency.
std::size_t worker_count();

/// Runs fn(0..n-1) on a bounded pool. The first exception (by task index) is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Grid selection then `runs` recorded runs at the best tuple per algorithm.
/// Ties go to the earlier tuple in grid order (smaller L, mu, rho).
ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const GlmProblem& problem);

/// Pointwise mean/min/max over runs, truncated to the shortest trace.
struct AveragedRow {
  std::uint64_t k = 0;
  double grad_calls = 0.0;
  double time_s = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};
std::vector<AveragedRow> average_traces(const std::vector<RunTrace>& traces);
std::vector<AveragedRow> average_traces(const std::vector<RecoveryTrace>& traces);

inline constexpr const char* kAxes[] = {"iteration", "grad_calls", "time_s"};
std::string averaged_header(const std::string& axis, const std::string& metric);

/// Writes trace_<algo>_<axis>.csv and trace_<axis>.csv (all algorithms) for every axis,
/// recovery_<algo>_iteration.csv, runs.csv, recovery_runs.csv, grid_scores.csv,
/// summary.json and manifest.json under `dir`. Returns the file names written.
std::vector<std::string> emit_report(const ExperimentResult& result, const std::filesystem::path& dir);

/// manifest.json listing `files` and the config.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig* cfg,
                    const std::vector<std::string>& files);

}  // namespace quasar
