#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "chebgd/errors.hpp"
#include "chebgd/linalg.hpp"
#include "chebgd/rng.hpp"
#include "chebgd/schedule.hpp"

namespace chebgd {
namespace dugd {

/// Distribution of the initial error vector x^(0) - x_opt used for training
/// samples. `unit_mean_gaussian` is i.i.d. N(1,1); `zero_start` trains from
/// x^(0)=0 against i.i.d. N(0,1) solutions, whose error vector is N(0,1).
enum class InitDistribution { unit_mean_gaussian, zero_start };

struct TrainConfig {
  std::size_t T_max = 1;
  int minibatches_per_generation = 500;
  std::size_t batch_size = 200;
  double learning_rate = 0.002;
  double init_gamma = 0.3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 1;
  InitDistribution init_distribution = InitDistribution::unit_mean_gaussian;
  std::size_t heldout_samples = 10000;

  void validate() const {
    if (T_max < 1 || minibatches_per_generation < 0 || batch_size < 1)
      throw InvalidParams("train config counts must be positive");
    if (!(learning_rate > 0.0)) throw InvalidParams("learning_rate must be positive");
  }
};

/// Trainable step parameters plus Adam accumulators. The accumulators and the
/// step counter restart at each generation boundary, matching an optimizer
/// re-created for the grown parameter vector. Single-owner mutable state; the
/// generator that feeds minibatches lives inside so a (config, seed) pair
/// replays bit-identically.
struct TrainState {
  std::vector<double> gammas;
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  long adam_steps = 0;
  int generation = 0;
  std::vector<std::pair<int, double>> loss_history;  // (generation, held-out loss)
  Rng rng{1};
};

inline TrainState init_train_state(const TrainConfig& config) {
  config.validate();
  TrainState s;
  s.rng = Rng(config.seed);
  return s;
}

namespace detail {

/// C = X * A for row-major X (batch x n) and symmetric A (n x n).
inline linalg::Matrix mul_rows(const linalg::Matrix& x, const linalg::Matrix& a) {
  linalg::Matrix c(x.rows, a.cols);
  for (std::size_t s = 0; s < x.rows; ++s) {
    const double* xr = &x.data[s * x.cols];
    double* cr = &c.data[s * c.cols];
    for (std::size_t k = 0; k < x.cols; ++k) {
      const double v = xr[k];
      const double* ar = &a.data[k * a.cols];
      for (std::size_t j = 0; j < a.cols; ++j) cr[j] += v * ar[j];
    }
  }
  return c;
}

inline double mean_row_mse(const linalg::Matrix& x) {
  double s = 0.0;
  for (double v : x.data) s += v * v;
  return s / (static_cast<double>(x.rows) * static_cast<double>(x.cols));
}

}  // namespace detail

/// Samples a batch of initial error vectors, one per row.
inline linalg::Matrix sample_batch(Rng& rng, std::size_t batch, std::size_t n,
                                   InitDistribution dist) {
  const double mean = dist == InitDistribution::unit_mean_gaussian ? 1.0 : 0.0;
  linalg::Matrix x(batch, n);
  for (auto& v : x.data) v = rng.gaussian(mean, 1.0);
  return x;
}

/// Forward pass of the unrolled recursion x^(t+1) = (I - gamma_t A) x^(t)
/// over a batch; keeps every iterate and every A x^(t) for the backward pass.
struct Unrolled {
  std::vector<linalg::Matrix> xs;   // length T+1
  std::vector<linalg::Matrix> axs;  // length T
};

inline Unrolled forward_unrolled(const linalg::QuadraticProblem& problem,
                                 const std::vector<double>& gammas,
                                 linalg::Matrix x0_batch) {
  if (gammas.empty()) throw InvalidParams("forward_unrolled needs at least one step");
  if (x0_batch.cols != problem.dim())
    throw ShapeMismatch("batch columns do not match problem dimension");
  Unrolled u;
  u.xs.reserve(gammas.size() + 1);
  u.axs.reserve(gammas.size());
  u.xs.push_back(std::move(x0_batch));
  for (double g : gammas) {
    const linalg::Matrix& x = u.xs.back();
    linalg::Matrix ax = detail::mul_rows(x, problem.matrix_a());
    linalg::Matrix xn(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i)
      xn.data[i] = x.data[i] - g * ax.data[i];
    u.axs.push_back(std::move(ax));
    u.xs.push_back(std::move(xn));
  }
  return u;
}

/// Batch-mean MSE loss ||x - ref||^2 / n of the final iterates.
inline double loss_mse(const linalg::Matrix& outputs, const Vector& reference = {}) {
  if (reference.empty()) return detail::mean_row_mse(outputs);
  if (reference.size() != outputs.cols)
    throw ShapeMismatch("reference length does not match output columns");
  double s = 0.0;
  for (std::size_t r = 0; r < outputs.rows; ++r) {
    const double* row = &outputs.data[r * outputs.cols];
    for (std::size_t j = 0; j < outputs.cols; ++j) {
      const double d = row[j] - reference[j];
      s += d * d;
    }
  }
  return s / (static_cast<double>(outputs.rows) * static_cast<double>(outputs.cols));
}

/// Exact reverse-mode gradient of the batch MSE loss with respect to each
/// step size: dL/dgamma_t = -(2/(n B)) sum_batch <back^(t+1), A x^(t)>, with
/// the adjoint back-propagated through the remaining (I - gamma_s A) factors.
inline std::vector<double> grad_gammas_from(const linalg::QuadraticProblem& problem,
                                            const std::vector<double>& gammas,
                                            const Unrolled& u) {
  const std::size_t T = gammas.size();
  if (u.xs.size() != T + 1 || u.axs.size() != T)
    throw ShapeMismatch("unrolled intermediates do not match gamma count");
  const double n = static_cast<double>(problem.dim());
  const double batch = static_cast<double>(u.xs.front().rows);
  std::vector<double> grad(T, 0.0);

  linalg::Matrix gbar = u.xs.back();  // unscaled adjoint of x^(T)
  for (std::size_t t = T; t-- > 0;) {
    double acc = 0.0;
    const linalg::Matrix& ax = u.axs[t];
    for (std::size_t i = 0; i < gbar.data.size(); ++i) acc += gbar.data[i] * ax.data[i];
    grad[t] = -2.0 / (n * batch) * acc;
    if (t > 0) {
      linalg::Matrix agbar = detail::mul_rows(gbar, problem.matrix_a());
      for (std::size_t i = 0; i < gbar.data.size(); ++i)
        gbar.data[i] -= gammas[t] * agbar.data[i];
    }
  }
  return grad;
}

inline std::vector<double> grad_gammas(const linalg::QuadraticProblem& problem,
                                       const std::vector<double>& gammas,
                                       linalg::Matrix x0_batch) {
  Unrolled u = forward_unrolled(problem, gammas, std::move(x0_batch));
  return grad_gammas_from(problem, gammas, u);
}

/// One Adam update with bias correction over the current parameter vector.
inline void adam_step(TrainState& state, const std::vector<double>& grad,
                      const TrainConfig& config) {
  if (grad.size() != state.gammas.size())
    throw ShapeMismatch("gradient length does not match parameter count");
  state.adam_steps += 1;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.adam_steps));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.adam_steps));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    state.adam_m[i] = b1 * state.adam_m[i] + (1.0 - b1) * grad[i];
    state.adam_v[i] = b2 * state.adam_v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = state.adam_m[i] / c1;
    const double vhat = state.adam_v[i] / c2;
    state.gammas[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_eps);
  }
}

/// Held-out generalization loss over fresh samples, evaluated in chunks.
inline double heldout_loss(const linalg::QuadraticProblem& problem,
                           const std::vector<double>& gammas, Rng& rng,
                           std::size_t samples, InitDistribution dist) {
  const std::size_t chunk = 256;
  double acc = 0.0;
  std::size_t done = 0;
  while (done < samples) {
    const std::size_t b = std::min(chunk, samples - done);
    linalg::Matrix x = sample_batch(rng, b, problem.dim(), dist);
    for (double g : gammas) {
      linalg::Matrix ax = detail::mul_rows(x, problem.matrix_a());
      for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] -= g * ax.data[i];
    }
    double s = 0.0;
    for (double v : x.data) s += v * v;
    acc += s;
    done += b;
  }
  return acc / (static_cast<double>(samples) * static_cast<double>(problem.dim()));
}

/// Appends a freshly initialized step parameter and restarts the optimizer
/// accumulators for the new generation.
inline void begin_generation(TrainState& state, const TrainConfig& config) {
  state.gammas.push_back(config.init_gamma);
  state.adam_m.assign(state.gammas.size(), 0.0);
  state.adam_v.assign(state.gammas.size(), 0.0);
  state.adam_steps = 0;
  state.generation += 1;
}

/// Runs one generation of minibatch training: config.minibatches_per_generation
/// Adam steps over fresh i.i.d. minibatches, then records the held-out loss.
inline void train_generation(const linalg::QuadraticProblem& problem,
                             TrainState& state, const TrainConfig& config) {
  config.validate();
  if (state.gammas.empty())
    throw InvalidParams("train_generation needs at least one parameter");
  for (int mb = 0; mb < config.minibatches_per_generation; ++mb) {
    linalg::Matrix x0 =
        sample_batch(state.rng, config.batch_size, problem.dim(),
                     config.init_distribution);
    std::vector<double> g = grad_gammas(problem, state.gammas, std::move(x0));
    adam_step(state, g, config);
  }
  const double loss = heldout_loss(problem, state.gammas, state.rng,
                                   config.heldout_samples, config.init_distribution);
  state.loss_history.emplace_back(state.generation, loss);
}

struct IncrementalResult {
  TrainState state;
  std::vector<sched::StepSchedule> per_generation;  // origin=Learned
  std::vector<double> heldout_losses;               // aligned with per_generation
};

/// Incremental training: one generation per unrolled depth 1..T_max, each new
/// parameter warm-started from init_gamma while earlier parameters carry over.
inline IncrementalResult incremental_train(const linalg::QuadraticProblem& problem,
                                           const TrainConfig& config) {
  config.validate();
  IncrementalResult result;
  result.state = init_train_state(config);
  for (std::size_t g = 1; g <= config.T_max; ++g) {
    begin_generation(result.state, config);
    train_generation(problem, result.state, config);
    sched::StepSchedule s;
    s.steps = result.state.gammas;
    s.origin = sched::Origin::Learned;
    result.per_generation.push_back(std::move(s));
    result.heldout_losses.push_back(result.state.loss_history.back().second);
  }
  return result;
}

}  // namespace dugd
}  // namespace chebgd
