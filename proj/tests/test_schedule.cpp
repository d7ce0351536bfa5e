#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "chebgd/linalg.hpp"
#include "chebgd/rng.hpp"
#include "chebgd/schedule.hpp"
#include "test_support.hpp"

using namespace chebgd;
using namespace chebgd::sched;
using Catch::Approx;

TEST_CASE("chebyshev steps: length one is the optimal constant step") {
  auto s = chebyshev_steps(1, 1.0, 9.0);
  REQUIRE(s.steps.size() == 1);
  CHECK(s.steps[0] == Approx(0.2).epsilon(1e-15));
  CHECK(s.origin == Origin::Chebyshev);
}

TEST_CASE("chebyshev steps: T=7 on [1,9] hits the frozen Chebyshev points") {
  // z_t = 5 + 4 cos((2t+1)pi/14), evaluated independently at high precision
  const double z_ref[7] = {8.8997116487272944281, 8.1273259298721192348,
                           6.7355349564702324819, 5.0,
                           3.2644650435297675181, 1.8726740701278807652,
                           1.1002883512727055719};
  auto s = chebyshev_steps(7, 1.0, 9.0);
  REQUIRE(s.steps.size() == 7);
  for (int t = 0; t < 7; ++t)
    CHECK(1.0 / s.steps[t] == Approx(z_ref[t]).epsilon(1e-14));
}

TEST_CASE("chebyshev steps: T=2 on [1,9] matches the exact radicals") {
  auto s = chebyshev_steps(2, 1.0, 9.0);
  CHECK(s.steps[0] == Approx(0.12773958089728293544).epsilon(1e-15));
  CHECK(s.steps[1] == Approx(0.46049571322036412339).epsilon(1e-15));
}

TEST_CASE("chebyshev steps: reciprocal symmetry up to T=64") {
  for (std::size_t T : {2, 3, 5, 8, 16, 33, 64}) {
    auto s = chebyshev_steps(T, 0.37, 1234.5);
    const double sum_ref = 0.37 + 1234.5;
    for (std::size_t t = 0; t < T; ++t) {
      const double z = 1.0 / s.steps[t];
      CHECK(std::abs(z + 1.0 / s.steps[T - 1 - t] - sum_ref) <= 1e-12 * sum_ref);
      CHECK(z > 0.37);  // reciprocals stay strictly inside the interval
      CHECK(z < 1234.5);
    }
    CHECK(std::is_sorted(s.steps.begin(), s.steps.end()));
  }
}

TEST_CASE("degenerate spectra are rejected") {
  CHECK_THROWS_AS(chebyshev_steps(4, 9.0, 9.0), DegenerateSpectrum);
  CHECK_THROWS_AS(chebyshev_steps(4, 9.0, 1.0), DegenerateSpectrum);
  CHECK_THROWS_AS(chebyshev_steps(4, 0.0, 1.0), DegenerateSpectrum);
}

TEST_CASE("optimal constant step") {
  CHECK(optimal_constant_step(1.0, 9.0) == Approx(0.2).epsilon(1e-16));
  CHECK(optimal_constant_step(4.0, 4.0) == Approx(0.25).epsilon(1e-16));
  CHECK(optimal_constant_step(1.0, 3.0) == Approx(0.5).epsilon(1e-16));
}

TEST_CASE("spectral radius on finite spectra") {
  linalg::Spectrum two_pt({1.0, 9.0});
  auto constant6 = constant_schedule(6, 0.2, 1.0, 9.0);
  CHECK(spectral_radius(constant6, two_pt) == Approx(std::pow(0.8, 6)).epsilon(1e-14));

  // annihilation: a step equal to 1/lambda for every eigenvalue
  StepSchedule kill{{1.0, 1.0 / 3.0}, 1.0, 3.0, Origin::Custom};
  CHECK(spectral_radius(kill, linalg::Spectrum({1.0, 3.0})) == 0.0);

  // endpoints-only spectrum reproduces the closed-form bound
  auto cheb6 = chebyshev_steps(6, 1.0, 9.0);
  CHECK(spectral_radius(cheb6, two_pt) ==
        Approx(cheb_upper_closed_form(6, 9.0)).epsilon(1e-12));
}

TEST_CASE("spectral radius and interval bound are order invariant") {
  Rng rng(5);
  std::vector<double> eigs;
  for (int i = 0; i < 12; ++i) eigs.push_back(rng.uniform(0.5, 7.5));
  std::sort(eigs.begin(), eigs.end());
  linalg::Spectrum spec(eigs);

  StepSchedule a{{}, 0.5, 7.5, Origin::Custom};
  for (int i = 0; i < 9; ++i) a.steps.push_back(rng.uniform(0.01, 1.2));
  StepSchedule b = a;
  std::reverse(b.steps.begin(), b.steps.end());
  std::swap(b.steps[2], b.steps[5]);

  CHECK(spectral_radius(a, spec) == Approx(spectral_radius(b, spec)).epsilon(1e-12));
  CHECK(rho_upper_interval(a, 0.5, 7.5) ==
        Approx(rho_upper_interval(b, 0.5, 7.5)).epsilon(1e-12));
}

TEST_CASE("interval bound: grid matches the closed form for Chebyshev steps") {
  auto cheb6 = chebyshev_steps(6, 1.0, 9.0);
  const double closed = 128.0 / 4097.0;
  CHECK(rho_upper_interval(cheb6, 1.0, 9.0) == Approx(closed).margin(1e-6));
}

TEST_CASE("interval bound: analytic single-step cases") {
  auto opt1 = constant_schedule(1, optimal_constant_step(1.0, 9.0), 1.0, 9.0);
  CHECK(rho_upper_interval(opt1, 1.0, 9.0) == Approx(0.8).epsilon(1e-10));

  auto inv_max = constant_schedule(1, 1.0 / 9.0, 1.0, 9.0, Origin::Custom);
  CHECK(rho_upper_interval(inv_max, 1.0, 9.0) == Approx(8.0 / 9.0).epsilon(1e-10));
}

TEST_CASE("interval bound dominates finite-spectrum radii") {
  Rng rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const double l1 = rng.uniform(0.1, 1.0);
    const double ln = l1 * rng.uniform(1.5, 40.0);
    StepSchedule s{{}, l1, ln, Origin::Custom};
    const std::size_t T = 1 + (rng.next_u64() % 10);
    for (std::size_t t = 0; t < T; ++t) s.steps.push_back(rng.uniform(0.01, 1.5 / l1));
    std::vector<double> eigs;
    for (int i = 0; i < 16; ++i) eigs.push_back(rng.uniform(l1, ln));
    std::sort(eigs.begin(), eigs.end());
    CHECK(rho_upper_interval(s, l1, ln) >=
          spectral_radius(s, linalg::Spectrum(eigs)) - 1e-12);
  }
}

TEST_CASE("Chebyshev radius on contained spectra never exceeds the closed form") {
  Rng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const double l1 = rng.uniform(0.2, 2.0);
    const double ln = l1 * rng.uniform(1.2, 200.0);
    const std::size_t T = 1 + rng.next_u64() % 16;
    auto cheb = chebyshev_steps(T, l1, ln);
    std::vector<double> eigs = {l1, ln};
    for (int i = 0; i < 20; ++i) eigs.push_back(rng.uniform(l1, ln));
    std::sort(eigs.begin(), eigs.end());
    CHECK(spectral_radius(cheb, linalg::Spectrum(eigs)) <=
          cheb_upper_closed_form(T, ln / l1) * (1.0 + 1e-12));
  }
}

TEST_CASE("closed-form Chebyshev bound") {
  CHECK(cheb_upper_closed_form(6, 9.0) == Approx(128.0 / 4097.0).epsilon(1e-15));
  // matches the constant-step radius at T=1
  for (double kappa : {1.5, 3.0, 9.0, 250.0})
    CHECK(cheb_upper_closed_form(1, kappa) ==
          Approx(rate_constant(kappa)).epsilon(1e-13));
  // finite spectra at this kappa realize radii near 0.029, below the bound
  CHECK(cheb_upper_closed_form(6, 9.0) >= 0.029);
  // log-domain evaluation stays finite where the naive power overflows
  const double tiny = cheb_upper_closed_form(64, 1e8);
  CHECK(tiny > 0.0);
  CHECK(std::isfinite(tiny));
  // agrees with the naive formula where that formula is safe
  for (double kappa : {2.0, 9.0, 100.0}) {
    for (std::size_t T : {2, 5, 8}) {
      const double w = (std::sqrt(kappa) + 1.0) / (std::sqrt(kappa) - 1.0);
      const double naive = 1.0 / (0.5 * (std::pow(w, double(T)) + std::pow(w, -double(T))));
      CHECK(cheb_upper_closed_form(T, kappa) == Approx(naive).epsilon(1e-13));
    }
  }
}

TEST_CASE("convergence rates and their ordering") {
  CHECK(rate_lower_bound(9.0) == Approx(0.5).epsilon(1e-15));
  CHECK(rate_constant(9.0) == Approx(0.8).epsilon(1e-15));
  CHECK(rate_chgd_upper(6, 9.0) == Approx(0.56120819085755415689).epsilon(1e-13));

  Rng rng(29);
  for (int rep = 0; rep < 200; ++rep) {
    const double kappa = std::exp(rng.uniform(std::log(1.01), std::log(1e4)));
    const std::size_t T = 1 + (rng.next_u64() % 32);
    const double low = rate_lower_bound(kappa);
    const double mid = rate_chgd_upper(T, kappa);
    const double high = rate_constant(kappa);
    CHECK(low <= mid + 1e-14);
    CHECK(mid <= high + 1e-14);
    if (T == 1) CHECK(mid == Approx(high).epsilon(1e-12));
    else CHECK(mid < high);
  }
}

TEST_CASE("rate bound is nonincreasing in the schedule length") {
  for (double kappa : {1.2, 9.0, 88.0, 5000.0}) {
    double prev = rate_constant(kappa) + 1e-15;
    for (std::size_t T = 1; T <= 32; ++T) {
      const double cur = rate_chgd_upper(T, kappa);
      CHECK(cur <= prev + 1e-13);
      prev = cur;
    }
  }
}

TEST_CASE("Chebyshev bound beats the constant-step radius strictly") {
  Rng rng(31);
  for (int rep = 0; rep < 500; ++rep) {
    const double kappa = std::exp(rng.uniform(std::log(1.01), std::log(1e4)));
    const std::size_t T = 2 + (rng.next_u64() % 31);
    CHECK(cheb_upper_closed_form(T, kappa) <
          std::pow(rate_constant(kappa), static_cast<double>(T)));
  }
}

TEST_CASE("mse bound check") {
  StepSchedule kill{{1.0, 1.0 / 3.0}, 1.0, 3.0, Origin::Custom};
  linalg::Spectrum spec({1.0, 3.0});
  auto r0 = mse_bound_check(kill, spec, 0.0, 1.0 / std::sqrt(2.0));
  CHECK(r0.lhs == 0.0);
  CHECK(r0.holds);
  auto r1 = mse_bound_check(kill, spec, 0.5, 1.0 / std::sqrt(2.0));
  CHECK(r1.rhs == Approx(std::sqrt(2.0 * 0.5 / 2.0)).epsilon(1e-12));
  CHECK(r1.holds);
  CHECK_THROWS_AS(mse_bound_check(kill, spec, -1.0, 1.0), InvalidParams);
}

TEST_CASE("minimax: random competitors never beat the Chebyshev bound") {
  CHECK(minimax_competitor_test(1, 1.0, 9.0, 200, 3));
  CHECK(minimax_competitor_test(3, 1.0, 9.0, 1000, 4));
  CHECK(minimax_competitor_test(5, 0.5, 50.0, 300, 5));
}

TEST_CASE("minimax: T=1 constant step attains the bound exactly") {
  auto opt1 = constant_schedule(1, 0.2, 1.0, 9.0);
  CHECK(rho_upper_interval(opt1, 1.0, 9.0) ==
        Approx(cheb_upper_closed_form(1, 9.0)).epsilon(1e-10));
}

TEST_CASE("minimax: permuted Chebyshev steps tie the natural order") {
  auto nat = chebyshev_steps(6, 1.0, 9.0);
  StepSchedule perm = nat;
  std::reverse(perm.steps.begin(), perm.steps.end());
  CHECK(rho_upper_interval(perm, 1.0, 9.0) ==
        Approx(rho_upper_interval(nat, 1.0, 9.0)).epsilon(1e-12));
}

TEST_CASE("schedule analysis bundles radius, bounds and rate") {
  auto cheb = chebyshev_steps(6, 1.0, 9.0);
  linalg::Spectrum spec({1.0, 2.0, 5.0, 9.0});
  auto s = analyze_schedule(cheb, spec);
  CHECK(s.rho <= s.rho_upper_interval + 1e-12);
  REQUIRE(s.rho_upper_closed.has_value());
  CHECK(*s.rho_upper_closed == Approx(s.rho_upper_interval).margin(1e-6));
  CHECK(s.rate_per_iteration == Approx(std::pow(s.rho, 1.0 / 6.0)).epsilon(1e-12));

  auto c = constant_schedule(4, 0.2, 1.0, 9.0);
  CHECK_FALSE(analyze_schedule(c, spec).rho_upper_closed.has_value());
}

TEST_CASE("schedule files round-trip byte-exactly and skip comments") {
  auto s = chebyshev_steps(7, 1.0, 9.0);
  const std::string path = testsup::tmp_path("sched.txt");
  write_schedule_file(path, s, {"provenance line", "second comment"});
  auto r = read_schedule_file(path);
  CHECK(r.steps == s.steps);
  CHECK(r.lambda_min == s.lambda_min);
  CHECK(r.lambda_max == s.lambda_max);
  CHECK(r.origin == s.origin);

  const std::string path2 = testsup::tmp_path("sched_rewrite.txt");
  write_schedule_file(path2, r, {"provenance line", "second comment"});
  CHECK(testsup::read_file(path) == testsup::read_file(path2));
}

TEST_CASE("schedule file errors") {
  const std::string path = testsup::tmp_path("sched_bad.txt");
  {
    std::ofstream out(path);
    out << "3 1 9 Chebyshev\n0.2\n";  // two steps missing
  }
  CHECK_THROWS_AS(read_schedule_file(path), ParseError);
  {
    std::ofstream out(path);
    out << "1 1 9 NotAnOrigin\n0.2\n";
  }
  CHECK_THROWS_AS(read_schedule_file(path), ParseError);
}
