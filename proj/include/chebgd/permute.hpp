#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "chebgd/errors.hpp"
#include "chebgd/schedule.hpp"

namespace chebgd {
namespace permute {

inline bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

/// Affine index permutation pi(0) = c, pi(t+1) = a*pi(t) + b (mod T).
/// Full-cycle over {0..T-1} when T = 2^s, b is odd and a = 1 (mod 4).
struct AffinePermutation {
  std::size_t a = 1;
  std::size_t b = 1;
  std::size_t c = 0;
  std::size_t T = 1;
  std::vector<std::size_t> sequence;
};

inline AffinePermutation affine_permutation(std::size_t a, std::size_t b,
                                            std::size_t c, std::size_t T) {
  if (!is_power_of_two(T) || T < 2)
    throw InvalidParams("T must be a power of two (>= 2)");
  if (a < 1 || a > T - 1 || a % 4 != 1)
    throw InvalidParams("a must satisfy 1 <= a <= T-1 and a = 1 (mod 4)");
  if (b < 1 || b > T - 1 || b % 2 != 1)
    throw InvalidParams("b must be odd with 1 <= b <= T-1");
  if (c > T - 1) throw InvalidParams("c must satisfy 0 <= c <= T-1");

  AffinePermutation p{a, b, c, T, {}};
  p.sequence.reserve(T);
  std::vector<char> seen(T, 0);
  std::size_t cur = c;
  for (std::size_t t = 0; t < T; ++t) {
    if (seen[cur]) throw InvalidParams("affine map does not generate a permutation");
    seen[cur] = 1;
    p.sequence.push_back(cur);
    cur = (a * cur + b) % T;
  }
  return p;
}

inline std::vector<double> apply_permutation(const std::vector<double>& steps,
                                             const AffinePermutation& p) {
  if (steps.size() != p.T) throw DimensionMismatch("permutation length mismatch");
  std::vector<double> out(steps.size());
  for (std::size_t t = 0; t < steps.size(); ++t) out[t] = steps[p.sequence[t]];
  return out;
}

/// Worst interval bound over all prefixes of an ordered schedule; measures the
/// transient blowup an ordering can produce before the period completes.
inline double temporal_spectral_radius(const sched::StepSchedule& schedule,
                                       double lambda_min, double lambda_max) {
  sched::validate_schedule(schedule);
  double worst = 0.0;
  for (std::size_t t = 1; t <= schedule.steps.size(); ++t)
    worst = std::max(worst, sched::rho_upper_interval_prefix(
                                schedule.steps, t, lambda_min, lambda_max));
  return worst;
}

struct SearchResult {
  AffinePermutation permutation;
  sched::StepSchedule schedule;  // origin=Permuted
  double objective = 0.0;        // temporal spectral radius of the ordering
};

/// Exhaustive scan of admissible (a, b, c) triples minimizing the temporal
/// spectral radius of the permuted Chebyshev steps. Ties break toward the
/// lexicographically smallest triple. c = 0 is admitted since pi(0) = c is an
/// index.
inline SearchResult permutation_search(double lambda_min, double lambda_max,
                                       std::size_t T) {
  if (!is_power_of_two(T)) throw InvalidParams("T must be a power of two");
  sched::StepSchedule natural = sched::chebyshev_steps(T, lambda_min, lambda_max);
  if (T == 1) {
    SearchResult r;
    r.permutation = AffinePermutation{1, 1, 0, 1, {0}};
    r.schedule = natural;
    r.schedule.origin = sched::Origin::Permuted;
    r.objective = temporal_spectral_radius(natural, lambda_min, lambda_max);
    return r;
  }

  SearchResult best;
  best.objective = std::numeric_limits<double>::infinity();
  sched::StepSchedule candidate = natural;
  candidate.origin = sched::Origin::Permuted;
  for (std::size_t a = 1; a <= T - 1; a += 4) {
    for (std::size_t b = 1; b <= T - 1; b += 2) {
      for (std::size_t c = 0; c <= T - 1; ++c) {
        AffinePermutation p = affine_permutation(a, b, c, T);
        candidate.steps = apply_permutation(natural.steps, p);
        const double obj =
            temporal_spectral_radius(candidate, lambda_min, lambda_max);
        if (obj < best.objective) {
          best.objective = obj;
          best.permutation = p;
          best.schedule = candidate;
        }
      }
    }
  }
  return best;
}

namespace detail {

/// Assignment of candidate steps to target positions minimizing
/// sum_j (d_j - steps[sigma(j)])^2, by depth-first search with partial-cost
/// pruning. Seeded with the rank-matching assignment so pruning bites
/// immediately.
class AssignmentSearch {
 public:
  AssignmentSearch(const std::vector<double>& d, const std::vector<double>& steps)
      : d_(d), steps_(steps), used_(steps.size(), 0), chosen_(steps.size(), 0) {
    // rank matching as the initial incumbent
    std::vector<std::size_t> dr(d.size()), sr(steps.size());
    std::iota(dr.begin(), dr.end(), 0);
    std::iota(sr.begin(), sr.end(), 0);
    std::sort(dr.begin(), dr.end(), [&](auto i, auto j) { return d[i] < d[j]; });
    std::sort(sr.begin(), sr.end(),
              [&](auto i, auto j) { return steps[i] < steps[j]; });
    best_assign_.resize(d.size());
    double cost = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      best_assign_[dr[k]] = sr[k];
      const double diff = d[dr[k]] - steps[sr[k]];
      cost += diff * diff;
    }
    best_cost_ = cost;
  }

  std::vector<std::size_t> run() {
    dfs(0, 0.0);
    return best_assign_;
  }

 private:
  void dfs(std::size_t j, double cost) {
    if (cost >= best_cost_) return;
    if (j == d_.size()) {
      best_cost_ = cost;
      best_assign_.assign(chosen_.begin(), chosen_.end());
      return;
    }
    for (std::size_t s = 0; s < steps_.size(); ++s) {
      if (used_[s]) continue;
      const double diff = d_[j] - steps_[s];
      used_[s] = 1;
      chosen_[j] = s;
      dfs(j + 1, cost + diff * diff);
      used_[s] = 0;
    }
  }

  const std::vector<double>& d_;
  const std::vector<double>& steps_;
  std::vector<char> used_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> best_assign_;
  double best_cost_ = std::numeric_limits<double>::infinity();
};

}  // namespace detail

constexpr std::size_t kEmulateMaxLength = 12;

/// Emulation of incremental training: grow the schedule one step per
/// generation, each time choosing the permutation of the fresh Chebyshev
/// steps closest (Euclidean) to the previous ordering with the new
/// initializer appended.
inline sched::StepSchedule emulate_incremental(double lambda_min, double lambda_max,
                                               std::size_t T, double init_value) {
  if (T < 1) throw InvalidParams("T must be >= 1");
  if (T > kEmulateMaxLength)
    throw SizeLimitExceeded("emulate_incremental caps the exhaustive search at T = " +
                            std::to_string(kEmulateMaxLength));
  std::vector<double> current = {sched::optimal_constant_step(lambda_min, lambda_max)};
  for (std::size_t t = 2; t <= T; ++t) {
    std::vector<double> d = current;
    d.push_back(init_value);
    const std::vector<double> steps =
        sched::chebyshev_steps(t, lambda_min, lambda_max).steps;
    detail::AssignmentSearch search(d, steps);
    const std::vector<std::size_t> assign = search.run();
    current.resize(t);
    for (std::size_t j = 0; j < t; ++j) current[j] = steps[assign[j]];
  }
  sched::StepSchedule s;
  s.steps = std::move(current);
  s.lambda_min = lambda_min;
  s.lambda_max = lambda_max;
  s.origin = sched::Origin::Permuted;
  return s;
}

}  // namespace permute
}  // namespace chebgd
