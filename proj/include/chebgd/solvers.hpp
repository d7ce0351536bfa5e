#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "chebgd/errors.hpp"
#include "chebgd/linalg.hpp"
#include "chebgd/schedule.hpp"

namespace chebgd {
namespace solver {

enum class Algorithm { GDConstant, CHGD, DUGD, Momentum, ChebSemi };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::GDConstant: return "GDConstant";
    case Algorithm::CHGD: return "CHGD";
    case Algorithm::DUGD: return "DUGD";
    case Algorithm::Momentum: return "Momentum";
    case Algorithm::ChebSemi: return "ChebSemi";
  }
  return "GDConstant";
}

struct TraceRecord {
  long t = 0;
  double mse = 0.0;
};

/// Per-iteration error record of one solver run. When `iterates` is kept the
/// trace can be re-measured against a different reference afterwards.
struct SolverTrace {
  Algorithm algorithm = Algorithm::GDConstant;
  std::vector<TraceRecord> records;
  std::optional<long> schedule_period;
  std::vector<Vector> iterates;  // aligned with records when retained
};

struct RunOptions {
  long stride = 1;             // record every stride-th iteration (plus t=0 and the end)
  bool record_iterates = false;
  Vector reference;            // x_opt used for the MSE; zero vector when empty
};

namespace detail {

inline double mse_between(const Vector& x, const Vector& ref) {
  double s = 0.0;
  if (ref.empty()) {
    for (double v : x) s += v * v;
  } else {
    if (ref.size() != x.size())
      throw DimensionMismatch("reference vector has wrong dimension");
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - ref[i];
      s += d * d;
    }
  }
  return s / static_cast<double>(x.size());
}

struct TraceSink {
  SolverTrace trace;
  const RunOptions* opts;
  long total;

  void record(long t, const Vector& x) {
    if (t != 0 && t != total && opts->stride > 1 && t % opts->stride != 0) return;
    trace.records.push_back({t, mse_between(x, opts->reference)});
    if (opts->record_iterates) trace.iterates.push_back(x);
  }
};

}  // namespace detail

/// Gradient descent x <- x - gamma_t (A x - b) with a scheduled step size.
/// With cyclic=true the schedule repeats with period T; otherwise
/// total_iters must not exceed the schedule length.
inline SolverTrace run_gd(const linalg::QuadraticProblem& problem,
                          const sched::StepSchedule& schedule, const Vector& x0,
                          long total_iters, bool cyclic, RunOptions opts = {}) {
  if (schedule.steps.empty()) throw ScheduleEmpty("run_gd: schedule has no steps");
  if (total_iters < 0) throw InvalidParams("total_iters must be >= 0");
  const long T = static_cast<long>(schedule.steps.size());
  if (!cyclic && total_iters > T)
    throw InvalidParams("non-cyclic run cannot exceed the schedule length");
  if (x0.size() != problem.dim()) throw DimensionMismatch("x0 has wrong dimension");

  detail::TraceSink sink{{}, &opts, total_iters};
  sink.trace.algorithm = schedule.steps.size() == 1 ||
                                 schedule.origin == sched::Origin::ConstantOptimal
                             ? Algorithm::GDConstant
                             : Algorithm::CHGD;
  if (schedule.origin == sched::Origin::Learned) sink.trace.algorithm = Algorithm::DUGD;
  sink.trace.schedule_period = T;

  Vector x = x0;
  sink.record(0, x);
  const Vector& b = problem.target();
  for (long t = 0; t < total_iters; ++t) {
    Vector ax = problem.apply(x);
    const double g = schedule.steps[static_cast<std::size_t>(t % T)];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= g * (ax[i] - b[i]);
    sink.record(t + 1, x);
  }
  return sink.trace;
}

/// Heavy-ball and Chebyshev semi-iterative coefficients for one spectrum:
/// gamma_prime = 4/(sqrt(l1)+sqrt(ln))^2 and beta = ((sqrt(k)-1)/(sqrt(k)+1))^2
/// drive the momentum method; xi and cheb_base_step drive the semi-iteration.
///
/// The semi-iteration accelerates the optimally damped Richardson sweep
/// x <- x - gamma* (A x - b), whose iteration matrix I - gamma* A has spectral
/// radius (kappa-1)/(kappa+1) =: xi. This choice attains the first-order
/// lower-bound rate (sqrt(k)-1)/(sqrt(k)+1).
struct BaselineParams {
  double gamma_prime = 0.0;
  double beta = 0.0;
  double xi = 0.0;
  double cheb_base_step = 0.0;

  static BaselineParams for_bounds(double lambda_min, double lambda_max) {
    if (!(lambda_min > 0.0) || lambda_max < lambda_min)
      throw InvalidParams("need 0 < lambda_min <= lambda_max");
    const double kappa = lambda_max / lambda_min;
    const double sk = std::sqrt(kappa);
    BaselineParams p;
    const double s = std::sqrt(lambda_min) + std::sqrt(lambda_max);
    p.gamma_prime = 4.0 / (s * s);
    p.beta = ((sk - 1.0) / (sk + 1.0)) * ((sk - 1.0) / (sk + 1.0));
    p.xi = (kappa - 1.0) / (kappa + 1.0);
    p.cheb_base_step = 2.0 / (lambda_min + lambda_max);
    return p;
  }
};

/// Momentum (heavy ball) method with x^(-1) = 0:
/// x^(t+1) = x^(t) - gamma'(A x^(t) - b) + beta (x^(t) - x^(t-1)).
inline SolverTrace run_momentum(const linalg::QuadraticProblem& problem,
                                const BaselineParams& params, const Vector& x0,
                                long total_iters, RunOptions opts = {}) {
  if (total_iters < 0) throw InvalidParams("total_iters must be >= 0");
  if (x0.size() != problem.dim()) throw DimensionMismatch("x0 has wrong dimension");
  detail::TraceSink sink{{}, &opts, total_iters};
  sink.trace.algorithm = Algorithm::Momentum;

  Vector x = x0;
  Vector x_prev(problem.dim(), 0.0);
  sink.record(0, x);
  const Vector& b = problem.target();
  for (long t = 0; t < total_iters; ++t) {
    Vector ax = problem.apply(x);
    Vector xn(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      xn[i] = x[i] - params.gamma_prime * (ax[i] - b[i]) +
              params.beta * (x[i] - x_prev[i]);
    x_prev.swap(x);
    x.swap(xn);
    sink.record(t + 1, x);
  }
  return sink.trace;
}

/// Coefficient sequence gamma'_1..gamma'_count of the Chebyshev
/// semi-iteration: gamma'_1 = 1, gamma'_2 = 2/(2-xi^2),
/// gamma'_{t+1} = 4/(4 - xi^2 gamma'_t). Monotone, converging to
/// 2/(1+sqrt(1-xi^2)).
inline std::vector<double> cheb_semi_gamma_sequence(double xi, std::size_t count) {
  if (!(xi >= 0.0) || xi >= 1.0) throw InvalidParams("xi must lie in [0, 1)");
  std::vector<double> g;
  g.reserve(count);
  double cur = 1.0;
  for (std::size_t k = 1; k <= count; ++k) {
    if (k == 2) cur = 2.0 / (2.0 - xi * xi);
    else if (k > 2) cur = 4.0 / (4.0 - xi * xi * cur);
    g.push_back(cur);
  }
  return g;
}

/// Chebyshev semi-iterative method with x^(-1) = 0:
/// x^(t+1) = gamma'_{t+1} (x^(t) - s (A x^(t) - b)) + (1 - gamma'_{t+1}) x^(t-1),
/// where s is params.cheb_base_step. gamma'_1 drives the very first update.
inline SolverTrace run_cheb_semi(const linalg::QuadraticProblem& problem,
                                 const BaselineParams& params, const Vector& x0,
                                 long total_iters, RunOptions opts = {}) {
  if (total_iters < 0) throw InvalidParams("total_iters must be >= 0");
  if (x0.size() != problem.dim()) throw DimensionMismatch("x0 has wrong dimension");
  detail::TraceSink sink{{}, &opts, total_iters};
  sink.trace.algorithm = Algorithm::ChebSemi;

  const double xi = params.xi;
  const double s = params.cheb_base_step;
  Vector x = x0;
  Vector x_prev(problem.dim(), 0.0);
  sink.record(0, x);
  const Vector& b = problem.target();
  double gamma = 1.0;
  for (long t = 0; t < total_iters; ++t) {
    if (t == 1) gamma = 2.0 / (2.0 - xi * xi);
    else if (t > 1) gamma = 4.0 / (4.0 - xi * xi * gamma);
    Vector ax = problem.apply(x);
    Vector xn(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      xn[i] = gamma * (x[i] - s * (ax[i] - b[i])) + (1.0 - gamma) * x_prev[i];
    x_prev.swap(x);
    x.swap(xn);
    sink.record(t + 1, x);
  }
  return sink.trace;
}

/// Re-measures a trace against a different reference solution. The trace must
/// have been produced with record_iterates=true (unless it is empty).
inline SolverTrace mse_against(const SolverTrace& trace, const Vector& reference) {
  SolverTrace out = trace;
  if (trace.records.empty()) return out;
  if (trace.iterates.size() != trace.records.size())
    throw InvalidParams("mse_against needs a trace with retained iterates");
  for (std::size_t i = 0; i < out.records.size(); ++i)
    out.records[i].mse = detail::mse_between(trace.iterates[i], reference);
  return out;
}

/// CSV emission: header `algorithm,t,mse`, one row per record, 17 significant
/// digits. `comment` (when nonempty) becomes a first-line `#` comment.
inline void write_trace_csv(const std::string& path,
                            const std::vector<SolverTrace>& traces,
                            const std::string& comment = {}) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path + " for writing");
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "algorithm,t,mse\n";
  for (const auto& tr : traces)
    for (const auto& rec : tr.records)
      out << to_string(tr.algorithm) << ',' << rec.t << ','
          << linalg::format_double(rec.mse) << '\n';
  if (!out) throw IOError("write failed for " + path);
}

}  // namespace solver
}  // namespace chebgd
