#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chebgd/dataset.hpp"
#include "chebgd/dugd.hpp"
#include "chebgd/errors.hpp"
#include "chebgd/linalg.hpp"
#include "chebgd/permute.hpp"
#include "chebgd/plotdata.hpp"
#include "chebgd/schedule.hpp"
#include "chebgd/solvers.hpp"

namespace chebgd {
namespace cli {

// -- eigenvalue bound estimation ------------------------------------------------

enum class EigMode { automatic, jacobi, power };

struct EigBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool exact = false;  // true when a full decomposition produced the bounds

  double kappa() const { return lambda_max / lambda_min; }
};

/// Spectrum bounds via Jacobi for small problems, power iteration otherwise.
inline EigBounds estimate_bounds(const linalg::QuadraticProblem& problem,
                                 EigMode mode = EigMode::automatic,
                                 std::uint64_t seed = 1) {
  const bool use_jacobi =
      mode == EigMode::jacobi || (mode == EigMode::automatic && problem.dim() <= 512);
  if (use_jacobi) {
    auto r = linalg::jacobi_eigenvalues(problem);
    return {r.spectrum.lambda_min(), r.spectrum.lambda_max(), true};
  }
  linalg::PowerOptions opts;
  opts.seed = seed;
  const double lmax = linalg::power_method_max(problem, opts);
  const double lmin = linalg::power_method_min(problem, lmax, opts);
  return {lmin, lmax, false};
}

// -- steps ------------------------------------------------------------------------

struct StepsArgs {
  std::size_t T = 8;
  double lambda_min = 1.0;
  double lambda_max = 9.0;
  bool permute = false;
  std::string out = "steps.txt";
};

struct StepsResult {
  sched::StepSchedule schedule;
  std::optional<permute::SearchResult> search;
  std::vector<std::string> warnings;
};

inline std::string steps_provenance(const StepsArgs& a) {
  std::ostringstream s;
  s << "chebgd steps T=" << a.T << " lambda_min=" << linalg::format_double(a.lambda_min)
    << " lambda_max=" << linalg::format_double(a.lambda_max)
    << " permute=" << (a.permute ? 1 : 0);
  return s.str();
}

/// Emits Chebyshev steps in natural order, or in searched-permutation order
/// when requested and T is a power of two.
inline StepsResult cmd_steps(const StepsArgs& args) {
  StepsResult result;
  std::vector<std::string> trailing = {steps_provenance(args)};
  if (args.permute && !permute::is_power_of_two(args.T)) {
    result.warnings.push_back("permutation search needs T = 2^s; emitting natural order");
    result.schedule = sched::chebyshev_steps(args.T, args.lambda_min, args.lambda_max);
  } else if (args.permute) {
    result.search =
        permute::permutation_search(args.lambda_min, args.lambda_max, args.T);
    result.schedule = result.search->schedule;
    std::ostringstream side;
    side << "permutation a=" << result.search->permutation.a
         << " b=" << result.search->permutation.b
         << " c=" << result.search->permutation.c
         << " objective=" << linalg::format_double(result.search->objective);
    trailing.push_back(side.str());
  } else {
    result.schedule = sched::chebyshev_steps(args.T, args.lambda_min, args.lambda_max);
  }
  sched::write_schedule_file(args.out, result.schedule, trailing);
  return result;
}

// -- bench -------------------------------------------------------------------------

struct BenchArgs {
  std::size_t n = 300;
  std::size_t m = 1200;
  std::uint64_t seed = 1;
  std::string matrix_file;  // when set, read the problem instead of generating
  std::size_t T = 15;
  long iters = 150;
  std::size_t samples = 100;
  std::vector<std::string> algos = {"gd", "chgd", "mom", "chsemi"};
  std::string schedule_file;  // learned schedule driving the dugd algo
  EigMode eig = EigMode::automatic;
  std::string out = "bench.csv";
  std::string plot;
};

struct BenchResult {
  EigBounds bounds;
  std::vector<solver::SolverTrace> traces;   // per-iteration mean MSE per algorithm
  std::vector<PlotSeries> rate_lines;
  std::string rates_csv;
};

inline std::string bench_provenance(const BenchArgs& a) {
  std::ostringstream s;
  s << "chebgd bench n=" << a.n << " m=" << a.m << " seed=" << a.seed
    << " T=" << a.T << " iters=" << a.iters << " samples=" << a.samples << " algos=";
  for (std::size_t i = 0; i < a.algos.size(); ++i) s << (i ? "+" : "") << a.algos[i];
  if (!a.matrix_file.empty()) s << " matrix=" << a.matrix_file;
  if (!a.schedule_file.empty()) s << " schedule=" << a.schedule_file;
  return s.str();
}

namespace detail {

/// Runs one solver over every shared sample and averages the MSE records in a
/// fixed order so reruns are byte-identical.
inline solver::SolverTrace mean_trace(
    const std::function<solver::SolverTrace(const Vector&)>& runner,
    const std::vector<Vector>& x0s) {
  solver::SolverTrace mean;
  bool first = true;
  for (const auto& x0 : x0s) {
    solver::SolverTrace t = runner(x0);
    if (first) {
      mean = t;
      first = false;
    } else {
      if (t.records.size() != mean.records.size())
        throw Error("sample traces disagree in length");
      for (std::size_t i = 0; i < t.records.size(); ++i)
        mean.records[i].mse += t.records[i].mse;
    }
  }
  if (!x0s.empty())
    for (auto& r : mean.records) r.mse /= static_cast<double>(x0s.size());
  return mean;
}

inline void write_series_csv(const std::string& path,
                             const std::vector<PlotSeries>& series,
                             const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path + " for writing");
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "series,t,mse\n";
  for (const auto& s : series)
    for (const auto& [t, v] : s.points)
      out << s.name << ',' << static_cast<long>(t) << ','
          << linalg::format_double(v) << '\n';
  if (!out) throw IOError("write failed for " + path);
}

inline PlotSeries trace_series(const solver::SolverTrace& t) {
  PlotSeries s;
  s.name = solver::to_string(t.algorithm);
  for (const auto& r : t.records) s.points.emplace_back(static_cast<double>(r.t), r.mse);
  return s;
}

}  // namespace detail

/// Benchmarks the selected algorithms on shared initial points and emits the
/// mean-MSE traces plus the theoretical slope lines.
inline BenchResult cmd_bench(const BenchArgs& args) {
  if (args.iters < 0 || args.T < 1) throw InvalidParams("bench needs iters >= 0, T >= 1");
  linalg::QuadraticProblem problem =
      args.matrix_file.empty()
          ? linalg::generate_gaussian_problem(args.n, args.m, args.seed)
          : linalg::read_matrix_file(args.matrix_file);

  BenchResult result;
  result.bounds = estimate_bounds(problem, args.eig, args.seed);
  const double l1 = result.bounds.lambda_min;
  const double ln = result.bounds.lambda_max;
  const double kappa = result.bounds.kappa();

  // shared initial points, unit-mean unit-variance entries
  Rng x0_rng(args.seed + 0x9E3779B97F4A7C15ULL);
  std::vector<Vector> x0s(args.samples, Vector(problem.dim()));
  for (auto& v : x0s)
    for (auto& x : v) x = x0_rng.gaussian(1.0, 1.0);

  for (const auto& name : args.algos) {
    if (name == "gd") {
      auto s = sched::constant_schedule(1, sched::optimal_constant_step(l1, ln), l1, ln);
      result.traces.push_back(detail::mean_trace(
          [&](const Vector& x0) { return solver::run_gd(problem, s, x0, args.iters, true); },
          x0s));
    } else if (name == "chgd") {
      auto s = sched::chebyshev_steps(args.T, l1, ln);
      result.traces.push_back(detail::mean_trace(
          [&](const Vector& x0) { return solver::run_gd(problem, s, x0, args.iters, true); },
          x0s));
    } else if (name == "dugd") {
      if (args.schedule_file.empty())
        throw InvalidParams("dugd benchmark needs --schedule <file>");
      sched::StepSchedule s = sched::read_schedule_file(args.schedule_file);
      s.origin = sched::Origin::Learned;
      result.traces.push_back(detail::mean_trace(
          [&](const Vector& x0) { return solver::run_gd(problem, s, x0, args.iters, true); },
          x0s));
    } else if (name == "mom") {
      auto p = solver::BaselineParams::for_bounds(l1, ln);
      result.traces.push_back(detail::mean_trace(
          [&](const Vector& x0) { return solver::run_momentum(problem, p, x0, args.iters); },
          x0s));
    } else if (name == "chsemi") {
      auto p = solver::BaselineParams::for_bounds(l1, ln);
      result.traces.push_back(detail::mean_trace(
          [&](const Vector& x0) { return solver::run_cheb_semi(problem, p, x0, args.iters); },
          x0s));
    } else {
      throw InvalidParams("unknown algorithm '" + name + "'");
    }
  }

  // theoretical slope lines, anchored at the mean initial MSE
  const double mse0 =
      result.traces.empty() || result.traces.front().records.empty()
          ? 1.0
          : result.traces.front().records.front().mse;
  struct RateLine {
    const char* name;
    double rate;
  };
  const RateLine lines[] = {
      {"RateCHGD", sched::rate_chgd_upper(args.T, kappa)},
      {"RateConstant", sched::rate_constant(kappa)},
  };
  for (const auto& ln_def : lines) {
    PlotSeries s;
    s.name = ln_def.name;
    for (long t = 0; t <= args.iters; ++t)
      s.points.emplace_back(static_cast<double>(t),
                            mse0 * std::pow(ln_def.rate, 2.0 * static_cast<double>(t)));
    result.rate_lines.push_back(std::move(s));
  }

  const std::string comment = bench_provenance(args);
  solver::write_trace_csv(args.out, result.traces, comment);
  result.rates_csv = args.out + ".rates.csv";
  detail::write_series_csv(result.rates_csv, result.rate_lines, comment);
  if (!args.plot.empty()) {
    std::vector<PlotSeries> blocks;
    for (const auto& t : result.traces) blocks.push_back(detail::trace_series(t));
    for (const auto& s : result.rate_lines) blocks.push_back(s);
    emit_plot_data(args.plot, blocks);
  }
  return result;
}

// -- train -------------------------------------------------------------------------

struct TrainArgs {
  std::size_t n = 100;
  std::size_t m = 400;
  std::uint64_t seed = 1;
  dugd::TrainConfig config;
  std::string out_prefix = "dugd";
};

struct TrainResult {
  dugd::IncrementalResult training;
  std::vector<double> eigenvalues;
  std::vector<double> radii;                // spectral radius per generation
  std::vector<std::string> schedule_files;  // one per generation
  std::string loss_csv;
  std::string comparison_csv;  // sorted learned steps vs Chebyshev steps
};

inline std::string train_provenance(const TrainArgs& a) {
  std::ostringstream s;
  s << "chebgd train n=" << a.n << " m=" << a.m << " seed=" << a.seed
    << " T_max=" << a.config.T_max << " minibatches=" << a.config.minibatches_per_generation
    << " batch=" << a.config.batch_size
    << " lr=" << linalg::format_double(a.config.learning_rate)
    << " init=" << linalg::format_double(a.config.init_gamma)
    << " train_seed=" << a.config.seed;
  return s.str();
}

/// Incremental DUGD training plus per-generation schedule/loss/radius export.
inline TrainResult cmd_train(const TrainArgs& args) {
  linalg::QuadraticProblem problem =
      linalg::generate_gaussian_problem(args.n, args.m, args.seed);
  auto jac = linalg::jacobi_eigenvalues(problem);

  TrainResult result;
  result.eigenvalues = jac.spectrum.eigenvalues();
  result.training = dugd::incremental_train(problem, args.config);

  std::ofstream loss(args.out_prefix + "_loss.csv");
  if (!loss) throw IOError("cannot open " + args.out_prefix + "_loss.csv");
  loss << "# " << train_provenance(args) << '\n';
  loss << "generation,T,loss,spectral_radius\n";
  for (std::size_t g = 0; g < result.training.per_generation.size(); ++g) {
    sched::StepSchedule& s = result.training.per_generation[g];
    s.lambda_min = jac.spectrum.lambda_min();
    s.lambda_max = jac.spectrum.lambda_max();
    const double rho = sched::spectral_radius(s, jac.spectrum);
    result.radii.push_back(rho);
    const std::string file =
        args.out_prefix + "_gen" + std::to_string(g + 1) + ".steps";
    sched::write_schedule_file(file, s, {train_provenance(args)});
    result.schedule_files.push_back(file);
    loss << (g + 1) << ',' << s.steps.size() << ','
         << linalg::format_double(result.training.heldout_losses[g]) << ','
         << linalg::format_double(rho) << '\n';
  }
  result.loss_csv = args.out_prefix + "_loss.csv";
  if (!loss) throw IOError("write failed for the loss CSV");

  // sorted final steps against the Chebyshev steps for the realized bounds
  result.comparison_csv = args.out_prefix + "_steps_vs_chebyshev.csv";
  {
    auto cheb = sched::chebyshev_steps(result.training.per_generation.back().length(),
                                       jac.spectrum.lambda_min(),
                                       jac.spectrum.lambda_max());
    auto learned = result.training.per_generation.back().steps;
    std::sort(learned.begin(), learned.end());
    std::ofstream cmp(result.comparison_csv);
    if (!cmp) throw IOError("cannot open " + result.comparison_csv);
    cmp << "# " << train_provenance(args) << '\n';
    cmp << "index,learned_sorted,chebyshev\n";
    for (std::size_t i = 0; i < learned.size(); ++i)
      cmp << i << ',' << linalg::format_double(learned[i]) << ','
          << linalg::format_double(cheb.steps[i]) << '\n';
  }
  return result;
}

// -- ridge -------------------------------------------------------------------------

struct RidgeArgs {
  std::string data;
  data::LoadOptions load;
  bool standardize = false;
  double eta = 1.0;
  std::size_t T = 32;
  long iters = 4000;
  double mse_target = 1e-8;
  std::uint64_t seed = 1;
  bool permute = true;
  std::string out = "ridge.csv";
  std::string plot;
};

struct RidgeResult {
  std::size_t n = 0;
  std::size_t m = 0;
  double lambda_max_est = 0.0;
  double lambda_min_est = 0.0;
  double kappa_est = 0.0;
  Vector reference;  // dense-solve ridge estimator
  std::vector<solver::SolverTrace> traces;
  std::vector<long> iters_to_target;  // aligned with traces; -1 when unreached
  std::vector<std::string> preprocessing_log;
};

inline std::string ridge_provenance(const RidgeArgs& a) {
  std::ostringstream s;
  s << "chebgd ridge data=" << a.data << " eta=" << linalg::format_double(a.eta)
    << " T=" << a.T << " iters=" << a.iters << " seed=" << a.seed
    << " permute=" << (a.permute ? 1 : 0) << " standardize=" << (a.standardize ? 1 : 0);
  return s.str();
}

/// Ridge regression via scheduled GD: power-method spectrum bounds, permuted
/// Chebyshev schedule, and MSE traces against the dense-solve estimator.
inline RidgeResult cmd_ridge(const RidgeArgs& args) {
  if (!(args.eta > 0.0)) throw InvalidParams("ridge needs eta > 0");
  data::Dataset ds = data::load_dataset(args.data, args.load);
  if (args.standardize) data::standardize_features(ds);

  Vector b = linalg::matvec_transposed(ds.h, ds.y);
  linalg::QuadraticProblem problem =
      linalg::QuadraticProblem::from_gram_factor(ds.h, args.eta, b);

  RidgeResult result;
  result.n = ds.n();
  result.m = ds.m();
  result.preprocessing_log = ds.log;

  // bounds through the power method only: O(n^2) per iteration, no
  // decomposition on the solve path
  linalg::PowerOptions popts;
  popts.seed = args.seed;
  result.lambda_max_est = linalg::power_method_max(problem, popts);
  result.lambda_min_est = linalg::power_method_min(problem, result.lambda_max_est, popts);
  result.kappa_est = result.lambda_max_est / result.lambda_min_est;

  result.reference = linalg::cholesky_solve(problem.matrix_a(), b);

  solver::RunOptions ropts;
  ropts.reference = result.reference;
  const Vector x0(problem.dim(), 0.0);
  const double l1 = result.lambda_min_est;
  const double ln = result.lambda_max_est;

  {
    auto s = sched::constant_schedule(1, sched::optimal_constant_step(l1, ln), l1, ln);
    result.traces.push_back(solver::run_gd(problem, s, x0, args.iters, true, ropts));
  }
  {
    sched::StepSchedule s =
        args.permute && permute::is_power_of_two(args.T)
            ? permute::permutation_search(l1, ln, args.T).schedule
            : sched::chebyshev_steps(args.T, l1, ln);
    result.traces.push_back(solver::run_gd(problem, s, x0, args.iters, true, ropts));
  }
  {
    auto p = solver::BaselineParams::for_bounds(l1, ln);
    result.traces.push_back(solver::run_momentum(problem, p, x0, args.iters, ropts));
  }

  for (const auto& t : result.traces) {
    long hit = -1;
    for (const auto& r : t.records)
      if (r.mse <= args.mse_target) {
        hit = r.t;
        break;
      }
    result.iters_to_target.push_back(hit);
  }

  const std::string comment = ridge_provenance(args);
  solver::write_trace_csv(args.out, result.traces, comment);

  std::ofstream summary(args.out + ".summary.txt");
  if (!summary) throw IOError("cannot open the ridge summary for writing");
  summary << "# " << comment << '\n';
  summary << "n " << result.n << "\nm " << result.m << '\n';
  summary << "lambda_max_est " << linalg::format_double(result.lambda_max_est) << '\n';
  summary << "lambda_min_est " << linalg::format_double(result.lambda_min_est) << '\n';
  summary << "kappa_est " << linalg::format_double(result.kappa_est) << '\n';
  for (std::size_t i = 0; i < result.traces.size(); ++i)
    summary << "iters_to_" << linalg::format_double(args.mse_target) << ' '
            << solver::to_string(result.traces[i].algorithm) << ' '
            << result.iters_to_target[i] << '\n';
  for (const auto& line : result.preprocessing_log) summary << "# " << line << '\n';

  if (!args.plot.empty()) {
    std::vector<PlotSeries> blocks;
    for (const auto& t : result.traces) blocks.push_back(detail::trace_series(t));
    emit_plot_data(args.plot, blocks);
  }
  return result;
}

// -- eig --------------------------------------------------------------------------

struct EigArgs {
  std::size_t n = 100;
  std::size_t m = 400;
  std::uint64_t seed = 1;
  std::string matrix_file;
  double tol = 1e-10;
  bool exact = false;  // also run the Jacobi decomposition
  std::string out;     // when empty the CLI prints to stdout
};

struct EigResult {
  double lambda_max_est = 0.0;
  double lambda_min_est = 0.0;
  std::optional<double> lambda_max_exact;
  std::optional<double> lambda_min_exact;

  double kappa_est() const { return lambda_max_est / lambda_min_est; }
};

inline EigResult cmd_eig(const EigArgs& args) {
  linalg::QuadraticProblem problem =
      args.matrix_file.empty()
          ? linalg::generate_gaussian_problem(args.n, args.m, args.seed)
          : linalg::read_matrix_file(args.matrix_file);
  linalg::PowerOptions popts;
  popts.tol = args.tol;
  popts.seed = args.seed;
  EigResult r;
  r.lambda_max_est = linalg::power_method_max(problem, popts);
  r.lambda_min_est = linalg::power_method_min(problem, r.lambda_max_est, popts);
  if (args.exact) {
    auto jac = linalg::jacobi_eigenvalues(problem);
    r.lambda_max_exact = jac.spectrum.lambda_max();
    r.lambda_min_exact = jac.spectrum.lambda_min();
  }
  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) throw IOError("cannot open " + args.out + " for writing");
    out << "lambda_min " << linalg::format_double(r.lambda_min_est) << '\n'
        << "lambda_max " << linalg::format_double(r.lambda_max_est) << '\n'
        << "kappa " << linalg::format_double(r.kappa_est()) << '\n';
    if (r.lambda_min_exact)
      out << "lambda_min_exact " << linalg::format_double(*r.lambda_min_exact) << '\n'
          << "lambda_max_exact " << linalg::format_double(*r.lambda_max_exact) << '\n';
  }
  return r;
}

}  // namespace cli
}  // namespace chebgd
