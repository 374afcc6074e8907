#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rankanneal/annealer.hpp"
#include "rankanneal/beam.hpp"
#include "rankanneal/evaluator.hpp"

namespace rankanneal {

enum class Algo { sa, lbs };

std::string to_string(Algo algo);
Algo algo_from_string(const std::string& name);

// Shorthand setting names: neighborhood n1 (swap) / n2 (insertion) crossed
// with scheme s1 (geometric) / s2 (logarithmic) / s3 (fast).
struct Setting {
  NeighborhoodKind neighborhood;
  CoolingScheme::Kind scheme;
};

Setting parse_setting(const std::string& name);
std::string setting_name(NeighborhoodKind neighborhood,
                         CoolingScheme::Kind scheme);

struct SweepConfig {
  std::filesystem::path data_dir;
  Algo algo = Algo::sa;
  NeighborhoodKind neighborhood = NeighborhoodKind::swap;
  CoolingScheme scheme;
  int repeats = 10;
  std::vector<int> ks;  // empty -> 1..n-1; deduplicated and sorted
  EvaluatorConfig eval;

  // simulated annealing
  int accept_quota = 10;
  int max_steps_per_temp = 50;
  int progress_threshold = 25;
  double t_min = 1e-4;
  bool hill_climb = false;
  bool calibrate_t0 = false;

  // local beam search
  int beam_width = 10;
  std::size_t lbs_steps = 0;  // 0 -> match the SA budget
  bool full_expansion = false;

  // evaluation budget
  double budget_c = 2.0;
  std::size_t budget_cap = 1000;
  std::size_t budget_override = 0;  // 0 -> default_budget per k

  std::uint64_t base_seed = 0;
  int jobs = 1;
  bool resume = true;
  std::filesystem::path out;  // empty -> no files written, in-memory only
  std::filesystem::path cache_file;  // evaluator cache, loaded if present

  std::uint64_t config_hash() const;  // excludes ks/repeats so runs stay reusable
  std::string setting_label() const;
};

// One completed (k, repeat) cell; the unit of resumable persistence.
struct RunSummary {
  int k = 0;
  int repeat = 0;
  std::uint64_t seed = 0;
  std::string subset_hex;
  double guide = 0.0;
  double test_score = 0.0;
  double test_ndcg10 = 0.0;
  double test_map = 0.0;
  std::size_t evaluations = 0;
  double wall_ms = 0.0;
  std::vector<TraceRow> trace;
};

struct SweepRow {
  int k = 0;
  std::string algorithm;
  std::string neighborhood;
  std::string scheme;
  double mean_guide = 0.0;
  double stderr_guide = 0.0;
  double mean_test_ndcg10 = 0.0;
  double mean_test_map = 0.0;
  std::string best_subset_hex;
  double mean_wall_ms = 0.0;  // volatile; kept out of the deterministic CSV
  int repeats = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<RunSummary> runs;  // ordered by (k, repeat)
  std::size_t resumed = 0;
  double total_wall_ms = 0.0;
};

// Runs the full grid of (k, repeat) cells with per-cell seeds derived from
// the base seed. When cfg.out is set, also writes the results CSV, a timing
// sidecar, and appends completed runs to "<out>.runs.jsonl" as they finish;
// cells already present in that store are not rerun.
SweepResult run_sweep(const SweepConfig& cfg);

// Deterministic columns only; rerunning an identical config reproduces this
// byte for byte.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
// Wall-clock companion (k, setting, mean_wall_ms, repeats).
void write_timing_csv(const std::vector<SweepRow>& rows, std::ostream& out);

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);
std::vector<RunSummary> read_run_store(const std::filesystem::path& path,
                                       std::uint64_t dataset_hash,
                                       std::uint64_t config_hash);

struct SweepTable {
  std::string label;
  std::vector<SweepRow> rows;
  double total_wall_ms = 0.0;
};

// Wide mean-score grid (k x setting), a long-form table, and per-setting
// wall-clock totals. All inputs must cover the same k values.
struct CompareResult {
  std::string wide_csv;
  std::string long_csv;
  std::string timing_csv;
};

CompareResult compare_settings(const std::vector<SweepTable>& tables);

// "1..45" or "4,8,16,32"; values must be >= 1.
std::vector<int> parse_k_list(const std::string& text);

}  // namespace rankanneal
