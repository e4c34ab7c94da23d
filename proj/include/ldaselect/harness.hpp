#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ldaselect/criteria.hpp"
#include "ldaselect/eval.hpp"
#include "ldaselect/generator.hpp"
#include "ldaselect/lda.hpp"
#include "ldaselect/sbic.hpp"

namespace ldaselect {

struct KRange {
  int k_min = 0;
  int k_max = 0;
};

// [max(2, k_true - 20), k_true + 20]; at most 41 candidates.
KRange default_k_range(int k_true);

enum class CriterionKind { cao_juan, mimno, optop, sbic };

struct Criterion {
  CriterionKind kind = CriterionKind::cao_juan;
  double optop_cutoff = 0.0;  // only for optop
  std::string label;          // e.g. "optop_0.05"
  Direction direction = Direction::minimize;
};

// Tokens: "cao_juan", "mimno", "sbic", "optop" (cutoff from config) or
// "optop:<cutoff>".
Criterion parse_criterion(const std::string& token, const CriteriaConfig& config);

struct ExperimentConfig {
  std::string dgp_ref = "mini";  // preset name or directory containing a saved model
  int replications = 500;
  std::optional<KRange> k_range;  // defaults to default_k_range(k_true)
  std::vector<std::string> criteria = {"cao_juan", "mimno", "optop:0.05", "optop:0.2", "sbic"};
  CriteriaConfig criteria_config;
  int fit_iterations = 1000;
  double fit_alpha = 0.1;
  double fit_eta = 0.01;
  SbicOptions sbic;
  std::uint64_t master_seed = 0;
  std::filesystem::path out_dir;
  int threads = 0;  // 0 = hardware concurrency
  std::function<void(int completed, int total)> progress;  // optional
};

// Strict JSON schema; unknown keys are rejected.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Hash of everything that determines row content (not replications, threads
// or paths); resuming into an output directory requires an equal digest.
std::string config_digest(const ExperimentConfig& config);

struct ReplicationRow {
  std::string dgp;
  std::string criterion;
  int replication = 0;
  int k_selected = 0;
  double score = 0.0;
  EvalScores binary;
  EvalScores weighted;
};

struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  std::optional<double> std_dev;
  std::optional<double> skewness;
};

struct EvalStat {
  double mean = 0.0;
  std::optional<double> std_dev;
};

struct EvalAggregate {
  EvalStat recall, precision, f1;
};

struct CriterionSummary {
  int count = 0;
  SummaryStats selected_k;
  std::map<int, long> histogram;  // selected K -> replication count
  EvalAggregate binary, weighted;
};

struct McSummary {
  std::string dgp;
  int completed = 0;  // replications with one row per criterion
  std::optional<KRange> k_range;
  std::map<std::string, CriterionSummary> criteria;
};

// Presets: "mini", "dgp1", "dgp2", "dgp3" (deterministic synthetic draws) or
// a directory holding a saved Dgp.
Dgp materialize_dgp(const std::string& ref);
bool is_preset_name(const std::string& ref);

// Full Monte Carlo run: per replication generates a corpus, fits every
// candidate K, scores all criteria, selects K, evaluates the selected model
// against the generating topics, and appends the rows to results.csv before
// moving on. Interrupted runs resume from the last completed replication.
McSummary run_monte_carlo(const ExperimentConfig& config);

McSummary summarize(const std::vector<ReplicationRow>& rows,
                    std::optional<KRange> k_range = std::nullopt);

std::vector<ReplicationRow> read_results_csv(const std::filesystem::path& path);

// summary.csv, eval_summary.csv, summary.json, histogram_<criterion>.csv,
// scatter_<criterion>.csv, optionally histogram_<criterion>.svg.
void write_report(const std::filesystem::path& dir, const McSummary& summary,
                  const std::vector<ReplicationRow>& rows, bool render_svg = false);

}  // namespace ldaselect
