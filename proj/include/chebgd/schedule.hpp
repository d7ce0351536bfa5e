#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chebgd/errors.hpp"
#include "chebgd/linalg.hpp"
#include "chebgd/rng.hpp"

namespace chebgd {
namespace sched {

enum class Origin { Chebyshev, ConstantOptimal, Learned, Permuted, Custom };

inline std::string to_string(Origin o) {
  switch (o) {
    case Origin::Chebyshev: return "Chebyshev";
    case Origin::ConstantOptimal: return "ConstantOptimal";
    case Origin::Learned: return "Learned";
    case Origin::Permuted: return "Permuted";
    case Origin::Custom: return "Custom";
  }
  return "Custom";
}

inline Origin origin_from_string(const std::string& s) {
  if (s == "Chebyshev") return Origin::Chebyshev;
  if (s == "ConstantOptimal") return Origin::ConstantOptimal;
  if (s == "Learned") return Origin::Learned;
  if (s == "Permuted") return Origin::Permuted;
  if (s == "Custom") return Origin::Custom;
  throw ParseError("unknown schedule origin '" + s + "'");
}

/// Ordered finite step-size sequence together with the eigenvalue bounds
/// it was built for.
struct StepSchedule {
  std::vector<double> steps;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  Origin origin = Origin::Custom;

  std::size_t length() const { return steps.size(); }
};

inline void validate_schedule(const StepSchedule& s) {
  if (s.steps.empty()) throw ScheduleEmpty("schedule has no steps");
  for (double g : s.steps)
    if (!(g > 0.0)) throw InvalidParams("all steps must be positive");
}

/// Optimal constant step 2/(lambda_min + lambda_max).
inline double optimal_constant_step(double lambda_min, double lambda_max) {
  if (!(lambda_min > 0.0) || lambda_max < lambda_min)
    throw InvalidParams("need 0 < lambda_min <= lambda_max");
  return 2.0 / (lambda_min + lambda_max);
}

/// Chebyshev steps of length T for eigenvalue bounds [lambda_min, lambda_max].
///
/// Reciprocals are the Chebyshev points z_t = c + h*cos((2t+1)pi/(2T)) with
/// c = (l1+ln)/2, h = (ln-l1)/2, emitted in the natural order t = 0..T-1
/// (gamma ascending). The symmetric pair z_t, z_{T-1-t} is built from one
/// cosine evaluation so that z_t + z_{T-1-t} = l1 + ln holds exactly.
inline StepSchedule chebyshev_steps(std::size_t T, double lambda_min,
                                    double lambda_max) {
  if (T < 1) throw InvalidParams("schedule length must be >= 1");
  if (!(lambda_min > 0.0) || !(lambda_min < lambda_max))
    throw DegenerateSpectrum("chebyshev steps need 0 < lambda_min < lambda_max");
  const double c = 0.5 * (lambda_max + lambda_min);
  const double h = 0.5 * (lambda_max - lambda_min);
  std::vector<double> z(T, c);
  for (std::size_t t = 0; 2 * t + 1 < T; ++t) {
    const double ct = std::cos((2.0 * t + 1.0) * 3.14159265358979323846 / (2.0 * T));
    z[t] = c + h * ct;
    z[T - 1 - t] = c - h * ct;
  }
  StepSchedule s;
  s.steps.resize(T);
  for (std::size_t t = 0; t < T; ++t) s.steps[t] = 1.0 / z[t];
  s.lambda_min = lambda_min;
  s.lambda_max = lambda_max;
  s.origin = Origin::Chebyshev;
  return s;
}

inline StepSchedule constant_schedule(std::size_t T, double gamma, double lambda_min,
                                      double lambda_max,
                                      Origin origin = Origin::ConstantOptimal) {
  if (T < 1) throw InvalidParams("schedule length must be >= 1");
  if (!(gamma > 0.0)) throw InvalidParams("step must be positive");
  return StepSchedule{std::vector<double>(T, gamma), lambda_min, lambda_max, origin};
}

/// Spectral radius of the T-step iteration map on a finite spectrum:
/// max_i |prod_t (1 - gamma_t * lambda_i)|. Invariant under step order.
inline double spectral_radius(const StepSchedule& schedule,
                              const linalg::Spectrum& spectrum) {
  validate_schedule(schedule);
  double best = 0.0;
  for (double lam : spectrum.eigenvalues()) {
    double p = 1.0;
    for (double g : schedule.steps) p *= (1.0 - g * lam);
    best = std::max(best, std::abs(p));
  }
  return best;
}

namespace detail {

inline double abs_product(const std::vector<double>& gammas, std::size_t count,
                          double lam) {
  double p = 1.0;
  for (std::size_t t = 0; t < count; ++t) p *= (1.0 - gammas[t] * lam);
  return std::abs(p);
}

/// Golden-section maximization of f on [lo, hi] (assumed unimodal there).
template <typename F>
double golden_max(F&& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 70 && (b - a) > 1e-10 * (hi - lo) + 1e-300; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return std::max(f1, f2);
}

/// Grid of 4096 points over [lo, hi] plus golden-section refinement of the
/// best bracket. |prod (1-gamma*lam)| is a degree-T polynomial, so at desk
/// scale (T <= 64) the grid isolates the global ripple and refinement
/// finishes the job; no root finding needed.
inline double interval_max_abs_product(const std::vector<double>& gammas,
                                       std::size_t count, double lo, double hi) {
  constexpr std::size_t kGrid = 4096;
  double best = 0.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double lam = lo + (hi - lo) * static_cast<double>(i) /
                                static_cast<double>(kGrid - 1);
    const double v = abs_product(gammas, count, lam);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double step = (hi - lo) / static_cast<double>(kGrid - 1);
  const double blo = std::max(lo, lo + step * (static_cast<double>(best_i) - 1.0));
  const double bhi = std::min(hi, lo + step * (static_cast<double>(best_i) + 1.0));
  const double refined = golden_max(
      [&](double lam) { return abs_product(gammas, count, lam); }, blo, bhi);
  return std::max(best, refined);
}

}  // namespace detail

/// Interval bound of the leading `count` steps of an ordered step list;
/// the temporal-radius computation maximizes this over prefixes.
inline double rho_upper_interval_prefix(const std::vector<double>& steps,
                                        std::size_t count, double lambda_min,
                                        double lambda_max) {
  if (count < 1 || count > steps.size())
    throw InvalidParams("prefix length out of range");
  if (!(lambda_min > 0.0) || !(lambda_min < lambda_max))
    throw DegenerateSpectrum("interval bound needs 0 < lambda_min < lambda_max");
  return detail::interval_max_abs_product(steps, count, lambda_min, lambda_max);
}

/// Upper bound of the spectral radius over the whole interval
/// [lambda_min, lambda_max]: max_lambda |prod_t (1 - gamma_t lambda)|.
inline double rho_upper_interval(const StepSchedule& schedule, double lambda_min,
                                 double lambda_max) {
  validate_schedule(schedule);
  return rho_upper_interval_prefix(schedule.steps, schedule.steps.size(), lambda_min,
                                   lambda_max);
}

/// Closed form of the interval bound for Chebyshev schedules:
/// { [ ((sqrt(k)+1)/(sqrt(k)-1))^T + ((sqrt(k)-1)/(sqrt(k)+1))^T ] / 2 }^-1.
/// Evaluated through exp/log so large T*log(ratio) cannot overflow.
inline double cheb_upper_closed_form(std::size_t T, double kappa) {
  if (T < 1) throw InvalidParams("T must be >= 1");
  if (!(kappa > 1.0)) throw InvalidParams("kappa must exceed 1");
  const double sk = std::sqrt(kappa);
  const double log_w = std::log((sk + 1.0) / (sk - 1.0));
  const double u = std::exp(-static_cast<double>(T) * log_w);
  return 2.0 * u / (1.0 + u * u);
}

/// Per-iteration convergence rate bound of cyclic Chebyshev schedules.
inline double rate_chgd_upper(std::size_t T, double kappa) {
  return std::pow(cheb_upper_closed_form(T, kappa), 1.0 / static_cast<double>(T));
}

/// Per-iteration rate of the optimal constant step, (kappa-1)/(kappa+1).
inline double rate_constant(double kappa) {
  if (!(kappa > 1.0)) throw InvalidParams("kappa must exceed 1");
  return (kappa - 1.0) / (kappa + 1.0);
}

/// First-order lower bound (sqrt(kappa)-1)/(sqrt(kappa)+1).
inline double rate_lower_bound(double kappa) {
  if (!(kappa > 1.0)) throw InvalidParams("kappa must exceed 1");
  const double sk = std::sqrt(kappa);
  return (sk - 1.0) / (sk + 1.0);
}

struct MseBound {
  double lhs = 0.0;  // spectral radius
  double rhs = 0.0;  // C * sqrt(n * empirical_mse)
  bool holds = false;
};

/// Checks rho <= C*sqrt(n*MSE). For the unit-mean unit-variance Gaussian
/// initializer the matching constant is C = 1/sqrt(2); C stays a parameter
/// because it depends on the initializer distribution.
inline MseBound mse_bound_check(const StepSchedule& schedule,
                                const linalg::Spectrum& spectrum,
                                double empirical_mse, double C) {
  if (empirical_mse < 0.0) throw InvalidParams("empirical_mse must be >= 0");
  if (!(C > 0.0)) throw InvalidParams("C must be positive");
  MseBound r;
  r.lhs = spectral_radius(schedule, spectrum);
  r.rhs = C * std::sqrt(static_cast<double>(spectrum.eigenvalues().size()) *
                        empirical_mse);
  r.holds = r.lhs <= r.rhs;
  return r;
}

/// Random-competitor check of the minimax property: no coefficient vector
/// alpha in (0, 2/lambda_min)^T may push the interval bound below the
/// Chebyshev closed form (up to the grid tolerance).
inline bool minimax_competitor_test(std::size_t T, double lambda_min,
                                    double lambda_max, int trials,
                                    std::uint64_t seed) {
  if (trials < 1) throw InvalidParams("trials must be >= 1");
  constexpr double kGridTol = 1e-6;
  const double target = cheb_upper_closed_form(T, lambda_max / lambda_min);
  Rng rng(seed);
  StepSchedule competitor;
  competitor.lambda_min = lambda_min;
  competitor.lambda_max = lambda_max;
  competitor.origin = Origin::Custom;
  competitor.steps.resize(T);
  for (int k = 0; k < trials; ++k) {
    for (auto& g : competitor.steps) g = rng.uniform(0.0, 2.0 / lambda_min);
    for (auto& g : competitor.steps)
      if (g <= 0.0) g = 1e-12;
    if (rho_upper_interval(competitor, lambda_min, lambda_max) < target - kGridTol)
      return false;
  }
  return true;
}

/// Radius, interval bound, closed-form bound (Chebyshev schedules only) and
/// the per-iteration rate of one schedule on one spectrum.
struct SpectralSummary {
  double rho = 0.0;
  double rho_upper_interval = 0.0;
  std::optional<double> rho_upper_closed;
  double rate_per_iteration = 0.0;
};

inline SpectralSummary analyze_schedule(const StepSchedule& schedule,
                                        const linalg::Spectrum& spectrum) {
  SpectralSummary s;
  s.rho = spectral_radius(schedule, spectrum);
  s.rho_upper_interval =
      rho_upper_interval(schedule, schedule.lambda_min, schedule.lambda_max);
  if (schedule.origin == Origin::Chebyshev)
    s.rho_upper_closed = cheb_upper_closed_form(
        schedule.length(), schedule.lambda_max / schedule.lambda_min);
  s.rate_per_iteration =
      std::pow(s.rho, 1.0 / static_cast<double>(schedule.length()));
  return s;
}

// -- schedule file format -------------------------------------------------------
//
// First line: `T lambda_min lambda_max origin`; then one step per line with 17
// significant digits. Lines starting with '#' are comments and are ignored on
// read; writers may append them (the permutation sidecar uses this).

inline void write_schedule_file(const std::string& path, const StepSchedule& s,
                                const std::vector<std::string>& trailing_comments = {}) {
  validate_schedule(s);
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path + " for writing");
  out << s.steps.size() << ' ' << linalg::format_double(s.lambda_min) << ' '
      << linalg::format_double(s.lambda_max) << ' ' << to_string(s.origin) << '\n';
  for (double g : s.steps) out << linalg::format_double(g) << '\n';
  for (const auto& c : trailing_comments) out << "# " << c << '\n';
  if (!out) throw IOError("write failed for " + path);
}

inline StepSchedule read_schedule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path);
  std::string line;
  auto next_content_line = [&](std::string& dst) -> bool {
    while (std::getline(in, line)) {
      std::size_t i = line.find_first_not_of(" \t\r");
      if (i == std::string::npos || line[i] == '#') continue;
      dst = line;
      return true;
    }
    return false;
  };
  std::string header;
  if (!next_content_line(header)) throw ParseError(path + ": missing header line");
  std::istringstream hs(header);
  std::size_t T = 0;
  StepSchedule s;
  std::string origin;
  if (!(hs >> T >> s.lambda_min >> s.lambda_max >> origin))
    throw ParseError(path + ": malformed header line");
  s.origin = origin_from_string(origin);
  s.steps.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::string row;
    if (!next_content_line(row))
      throw ParseError(path + ": expected " + std::to_string(T) + " steps, got " +
                       std::to_string(t));
    std::istringstream rs(row);
    double g = 0.0;
    if (!(rs >> g)) throw ParseError(path + ": bad step on line for t=" + std::to_string(t));
    s.steps.push_back(g);
  }
  validate_schedule(s);
  return s;
}

}  // namespace sched
}  // namespace chebgd
