#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rankanneal/evaluator.hpp"
#include "rankanneal/subset.hpp"

namespace rankanneal {

// Temperature schedule. Geometric multiplies by alpha per update; the
// logarithmic and fast rules map the update count directly to a temperature.
struct CoolingScheme {
  enum class Kind { geometric, logarithmic, fast };

  Kind kind = Kind::fast;
  double t0 = 0.05;  // initial temperature
  double alpha = 0.9;
  int log_offset = 10;
};

std::string to_string(CoolingScheme::Kind kind);
CoolingScheme::Kind scheme_from_string(const std::string& name);

// Temperature after t updates: geometric t0*alpha^t, logarithmic
// t0/ln(t + offset) (natural log), fast t0/(1+t).
double temperature_at(const CoolingScheme& scheme, int t);

// Acceptance probability exp(delta_e / temperature) for delta_e <= 0.
double metropolis(double delta_e, double temperature);

struct AnnealerConfig {
  CoolingScheme scheme;
  NeighborhoodKind neighborhood = NeighborhoodKind::swap;
  std::size_t budget = 0;        // total evaluator calls; must be >= 1
  int accept_quota = 10;         // accepted moves that trigger a cool-down
  int max_steps_per_temp = 50;   // step cap per temperature
  int progress_threshold = 25;   // stagnant iterations before restarting; 0 disables
  double t_min = 1e-4;
  std::uint64_t seed = 0;
  bool hill_climb = false;   // short-circuits metropolis to 0
  bool calibrate_t0 = false; // sample transitions to pick t0 (consumes budget)
};

struct TraceRow {
  std::size_t iteration = 0;
  double temperature = 0.0;
  double current_score = 0.0;
  double best_score = 0.0;
  bool accepted = false;
  bool restarted = false;
  // Acceptance internals for non-improving moves; improving moves bypass
  // metropolis and keep the defaults. Not part of the CSV export.
  double accept_prob = 1.0;
  double uniform_draw = 0.0;
};

struct RunRecord {
  FeatureSubset best_subset;
  double best_guide_score = 0.0;
  double best_test_score = 0.0;
  double best_test_ndcg10 = 0.0;
  double best_test_map = 0.0;
  std::vector<TraceRow> trace;
  std::size_t evaluations_used = 0;
  double wall_ms = 0.0;
};

// Simulated annealing over fixed-size feature subsets: one random neighbor
// per iteration, metropolis acceptance of non-improving moves, adaptive
// temperature length (accept_quota or max_steps_per_temp, whichever first),
// and a stagnation-triggered restart from the best state seen.
RunRecord anneal(std::size_t k, const Evaluator& evaluator,
                 const AnnealerConfig& cfg);

// min(ceil(c * k * (n-k)), hard_cap): evaluation budget proportional to the
// swap neighborhood size.
std::size_t default_budget(std::size_t n, std::size_t k, double c = 2.0,
                           std::size_t hard_cap = 1000);

// CSV columns: iteration,T,current,best,accepted,restarted
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

}  // namespace rankanneal
