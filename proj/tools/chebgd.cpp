// Command-line front end: schedule generation, convergence benchmarks,
// deep-unfolded training, eigenvalue estimation and ridge regression on CSV
// data. Exit codes: 0 success, 2 config error, 3 data error, 4 numerical
// failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chebgd/commands.hpp"

namespace {

using namespace chebgd;

int run(CLI::App& app, int argc, char** argv) {
  app.set_config("--config", "", "read options from a key = value file");
  app.require_subcommand(1);

  // steps ------------------------------------------------------------------
  auto* steps = app.add_subcommand("steps", "emit a Chebyshev step schedule");
  cli::StepsArgs sa;
  steps->add_option("--T", sa.T, "schedule length")->check(CLI::PositiveNumber);
  steps->add_option("--lambda-min", sa.lambda_min, "smallest eigenvalue bound");
  steps->add_option("--lambda-max", sa.lambda_max, "largest eigenvalue bound");
  steps->add_flag("--permute", sa.permute, "apply the affine permutation search");
  steps->add_option("--out", sa.out, "output schedule file");

  // bench ------------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "benchmark solvers on a random problem");
  cli::BenchArgs ba;
  std::string bench_algos = "gd,chgd,mom,chsemi";
  std::string bench_eig = "auto";
  bench->add_option("--n", ba.n, "problem dimension");
  bench->add_option("--m", ba.m, "rows of the Gram factor");
  bench->add_option("--seed", ba.seed, "problem seed");
  bench->add_option("--matrix", ba.matrix_file, "matrix file instead of generation");
  bench->add_option("--T", ba.T, "schedule period");
  bench->add_option("--iters", ba.iters, "iterations per run");
  bench->add_option("--samples", ba.samples, "number of shared initial points");
  bench->add_option("--algos", bench_algos, "comma list: gd,chgd,dugd,mom,chsemi");
  bench->add_option("--schedule", ba.schedule_file, "learned schedule for dugd");
  bench->add_option("--eig", bench_eig, "bound estimation: auto|jacobi|power");
  bench->add_option("--out", ba.out, "trace CSV path");
  bench->add_option("--plot", ba.plot, "gnuplot data path");

  // train ------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "incremental deep-unfolded training");
  cli::TrainArgs ta;
  train->add_option("--n", ta.n, "problem dimension");
  train->add_option("--m", ta.m, "rows of the Gram factor");
  train->add_option("--seed", ta.seed, "problem seed");
  train->add_option("--T", ta.config.T_max, "final unrolled depth");
  train->add_option("--minibatches", ta.config.minibatches_per_generation,
                    "minibatches per generation");
  train->add_option("--batch", ta.config.batch_size, "minibatch size");
  train->add_option("--lr", ta.config.learning_rate, "Adam learning rate");
  train->add_option("--init-gamma", ta.config.init_gamma, "initial step value");
  train->add_option("--train-seed", ta.config.seed, "minibatch sampling seed");
  train->add_option("--heldout", ta.config.heldout_samples,
                    "held-out samples per generation");
  std::string train_init_dist = "unit-mean";
  train->add_option("--init-dist", train_init_dist,
                    "initial-point distribution: unit-mean|zero-start");
  train->add_option("--out", ta.out_prefix, "output file prefix");

  // ridge ------------------------------------------------------------------
  auto* ridge = app.add_subcommand("ridge", "ridge regression on a CSV dataset");
  cli::RidgeArgs ra;
  bool ridge_drop_rows = false;
  bool ridge_no_permute = false;
  ridge->add_option("--data", ra.data, "CSV file")->required();
  ridge->add_option("--response-column", ra.load.response_column,
                    "'last', 0-based index, or header name");
  ridge->add_option("--missing-marker", ra.load.missing_marker, "missing-value token");
  ridge->add_flag("--drop-rows", ridge_drop_rows,
                  "drop rows with missing values instead of columns");
  ridge->add_flag("--standardize", ra.standardize, "z-score the feature columns");
  ridge->add_option("--eta", ra.eta, "ridge regularization")->required();
  ridge->add_option("--T", ra.T, "Chebyshev schedule period");
  ridge->add_option("--iters", ra.iters, "iteration budget");
  ridge->add_option("--target", ra.mse_target, "reference-MSE threshold to report");
  ridge->add_option("--seed", ra.seed, "power-method seed");
  ridge->add_flag("--no-permute", ridge_no_permute, "use the natural step order");
  ridge->add_option("--out", ra.out, "trace CSV path");
  ridge->add_option("--plot", ra.plot, "gnuplot data path");

  // eig --------------------------------------------------------------------
  auto* eig = app.add_subcommand("eig", "power-method eigenvalue estimates");
  cli::EigArgs ea;
  eig->add_option("--n", ea.n, "problem dimension");
  eig->add_option("--m", ea.m, "rows of the Gram factor");
  eig->add_option("--seed", ea.seed, "problem / start vector seed");
  eig->add_option("--matrix", ea.matrix_file, "matrix file instead of generation");
  eig->add_option("--tol", ea.tol, "Rayleigh-quotient tolerance");
  eig->add_flag("--exact", ea.exact, "also run the Jacobi decomposition");
  eig->add_option("--out", ea.out, "write estimates to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (steps->parsed()) {
    cli::StepsResult r = cli::cmd_steps(sa);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << sa.out << " (" << r.schedule.steps.size() << " steps)\n";
    return 0;
  }
  if (bench->parsed()) {
    ba.algos.clear();
    std::stringstream ss(bench_algos);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) ba.algos.push_back(tok);
    if (bench_eig == "jacobi") ba.eig = cli::EigMode::jacobi;
    else if (bench_eig == "power") ba.eig = cli::EigMode::power;
    else if (bench_eig == "auto") ba.eig = cli::EigMode::automatic;
    else throw InvalidParams("--eig must be auto, jacobi or power");
    cli::BenchResult r = cli::cmd_bench(ba);
    std::cout << "wrote " << ba.out << " and " << r.rates_csv << " (lambda in ["
              << r.bounds.lambda_min << ", " << r.bounds.lambda_max << "])\n";
    return 0;
  }
  if (train->parsed()) {
    if (train_init_dist == "zero-start")
      ta.config.init_distribution = dugd::InitDistribution::zero_start;
    else if (train_init_dist != "unit-mean")
      throw InvalidParams("--init-dist must be unit-mean or zero-start");
    cli::TrainResult r = cli::cmd_train(ta);
    std::cout << "wrote " << r.loss_csv << " and " << r.schedule_files.size()
              << " schedule files\n";
    return 0;
  }
  if (ridge->parsed()) {
    ra.load.policy = ridge_drop_rows ? data::MissingPolicy::drop_rows
                                     : data::MissingPolicy::drop_columns;
    ra.permute = !ridge_no_permute;
    cli::RidgeResult r = cli::cmd_ridge(ra);
    std::cout << "ridge (n, m) = (" << r.n << ", " << r.m << "), kappa_est = "
              << r.kappa_est << "; wrote " << ra.out << '\n';
    return 0;
  }
  if (eig->parsed()) {
    cli::EigResult r = cli::cmd_eig(ea);
    std::cout << "lambda_min " << linalg::format_double(r.lambda_min_est) << '\n'
              << "lambda_max " << linalg::format_double(r.lambda_max_est) << '\n'
              << "kappa " << linalg::format_double(r.kappa_est()) << '\n';
    if (r.lambda_min_exact)
      std::cout << "lambda_min_exact " << linalg::format_double(*r.lambda_min_exact)
                << '\n'
                << "lambda_max_exact " << linalg::format_double(*r.lambda_max_exact)
                << '\n';
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chebyshev step schedules and deep-unfolded gradient descent"};
  try {
    return run(app, argc, argv);
  } catch (const chebgd::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const chebgd::EmptyAfterCleaning& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const chebgd::IOError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const chebgd::NonConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const chebgd::DegenerateShift& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const chebgd::SingularSystem& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 4;
  } catch (const chebgd::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (...) {
    std::cerr << "error: unknown failure\n";
    return 2;
  }
}
