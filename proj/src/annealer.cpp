#include "rankanneal/annealer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rankanneal/util.hpp"

namespace rankanneal {

std::string to_string(CoolingScheme::Kind kind) {
  switch (kind) {
    case CoolingScheme::Kind::geometric: return "geometric";
    case CoolingScheme::Kind::logarithmic: return "logarithmic";
    case CoolingScheme::Kind::fast: return "fast";
  }
  return "?";
}

CoolingScheme::Kind scheme_from_string(const std::string& name) {
  if (name == "geometric" || name == "s1") return CoolingScheme::Kind::geometric;
  if (name == "logarithmic" || name == "s2")
    return CoolingScheme::Kind::logarithmic;
  if (name == "fast" || name == "s3") return CoolingScheme::Kind::fast;
  throw std::invalid_argument("unknown cooling scheme: " + name);
}

double temperature_at(const CoolingScheme& scheme, int t) {
  if (t < 0) throw std::invalid_argument("schedule step must be >= 0");
  if (scheme.t0 <= 0) throw std::invalid_argument("t0 must be positive");
  switch (scheme.kind) {
    case CoolingScheme::Kind::geometric:
      if (scheme.alpha <= 0.0 || scheme.alpha > 1.0)
        throw std::invalid_argument("alpha must be in (0,1]");
      return scheme.t0 * std::pow(scheme.alpha, t);
    case CoolingScheme::Kind::logarithmic:
      if (t + scheme.log_offset < 2)
        throw std::invalid_argument("logarithmic schedule needs t + offset >= 2");
      return scheme.t0 / std::log(static_cast<double>(t + scheme.log_offset));
    case CoolingScheme::Kind::fast:
      return scheme.t0 / (1.0 + static_cast<double>(t));
  }
  throw std::logic_error("unreachable");
}

double metropolis(double delta_e, double temperature) {
  if (temperature <= 0.0)
    throw std::invalid_argument("metropolis needs a positive temperature");
  return std::exp(delta_e / temperature);
}

std::size_t default_budget(std::size_t n, std::size_t k, double c,
                           std::size_t hard_cap) {
  if (k < 1 || k >= n)
    throw std::invalid_argument("default_budget needs 1 <= k <= n-1");
  const double raw = std::ceil(c * static_cast<double>(k * (n - k)));
  const auto budget = static_cast<std::size_t>(raw);
  return std::min(std::max<std::size_t>(budget, 1), hard_cap);
}

namespace {

// Samples random transitions and picks t0 so the median worsening move is
// accepted with probability 0.8. Falls back to the configured t0 when no
// worsening move shows up.
double calibrated_t0(std::size_t k, const Evaluator& evaluator, SplitRng rng,
                     NeighborhoodKind kind, double fallback,
                     std::size_t& evals) {
  std::vector<double> drops;
  for (int s = 0; s < 20; ++s) {
    const FeatureSubset state = random_subset(evaluator.n_features(), k, rng);
    const FeatureSubset next = neighbor(state, kind, rng);
    const double a = evaluator.evaluate(state).guide_score;
    const double b = evaluator.evaluate(next).guide_score;
    evals += 2;
    if (b < a) drops.push_back(a - b);
  }
  if (drops.empty()) return fallback;
  std::sort(drops.begin(), drops.end());
  const double median = drops[drops.size() / 2];
  return median / -std::log(0.8);
}

}  // namespace

RunRecord anneal(std::size_t k, const Evaluator& evaluator,
                 const AnnealerConfig& cfg) {
  const std::size_t n = evaluator.n_features();
  if (k < 1 || k >= n)
    throw std::invalid_argument("anneal needs 1 <= k <= n-1");
  if (cfg.budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (cfg.accept_quota < 1 || cfg.max_steps_per_temp < 1)
    throw std::invalid_argument("temperature-length parameters must be >= 1");
  if (cfg.scheme.t0 <= cfg.t_min)
    throw std::invalid_argument("t_min must be below t0");

  const auto start = std::chrono::steady_clock::now();
  SplitRng rng(cfg.seed);

  RunRecord record;
  CoolingScheme scheme = cfg.scheme;
  if (cfg.calibrate_t0) {
    scheme.t0 = calibrated_t0(k, evaluator, rng.split(0x7ca1), cfg.neighborhood,
                              scheme.t0, record.evaluations_used);
  }

  FeatureSubset current = random_subset(n, k, rng);
  ScoreCard current_card = evaluator.evaluate(current);
  record.evaluations_used += 1;
  double current_score = current_card.guide_score;

  record.best_subset = current;
  record.best_guide_score = current_score;
  record.best_test_score = current_card.test_score;
  record.best_test_ndcg10 = current_card.test_ndcg10;
  record.best_test_map = current_card.test_map;

  int updates_applied = 0;
  double temp = temperature_at(scheme, 0);
  int accepted_since_update = 0;
  int steps_at_temp = 0;
  int stagnation = 0;
  std::size_t iteration = 0;

  while (record.evaluations_used < cfg.budget) {
    if (!cfg.hill_climb && temp <= cfg.t_min) break;

    const FeatureSubset next = neighbor(current, cfg.neighborhood, rng);
    const ScoreCard next_card = evaluator.evaluate(next);
    record.evaluations_used += 1;
    const double delta_e = next_card.guide_score - current_score;

    bool accepted = false;
    bool best_improved = false;
    double accept_prob = 1.0;
    double uniform_draw = 0.0;
    if (delta_e > 0.0) {
      accepted = true;
      if (next_card.guide_score > record.best_guide_score) {
        record.best_subset = next;
        record.best_guide_score = next_card.guide_score;
        record.best_test_score = next_card.test_score;
        record.best_test_ndcg10 = next_card.test_ndcg10;
        record.best_test_map = next_card.test_map;
        best_improved = true;
      }
    } else {
      // No draw when the move cannot be accepted; hill-climb mode then
      // consumes the same stream as a plain greedy walk.
      accept_prob = cfg.hill_climb ? 0.0 : metropolis(delta_e, temp);
      uniform_draw = accept_prob > 0.0 ? rng.uniform() : 1.0;
      accepted = accept_prob > uniform_draw;
    }
    if (accepted) {
      current = next;
      current_score = next_card.guide_score;
      ++accepted_since_update;
    }
    ++steps_at_temp;
    stagnation = best_improved ? 0 : stagnation + 1;

    bool restarted = false;
    if (cfg.progress_threshold > 0 && stagnation >= cfg.progress_threshold) {
      current = record.best_subset;
      current_score = record.best_guide_score;
      stagnation = 0;
      restarted = true;
    }

    record.trace.push_back({iteration, temp, current_score,
                            record.best_guide_score, accepted, restarted,
                            accept_prob, uniform_draw});

    if (accepted_since_update >= cfg.accept_quota ||
        steps_at_temp >= cfg.max_steps_per_temp) {
      ++updates_applied;
      temp = temperature_at(scheme, updates_applied);
      accepted_since_update = 0;
      steps_at_temp = 0;
    }
    ++iteration;
  }

  record.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return record;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
  out << "iteration,T,current,best,accepted,restarted\n";
  for (const auto& row : trace) {
    out << row.iteration << ',' << fmt_double(row.temperature) << ','
        << fmt_double(row.current_score) << ',' << fmt_double(row.best_score)
        << ',' << (row.accepted ? 1 : 0) << ',' << (row.restarted ? 1 : 0)
        << '\n';
  }
}

}  // namespace rankanneal
