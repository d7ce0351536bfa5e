#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "chebgd/permute.hpp"
#include "chebgd/rng.hpp"
#include "chebgd/schedule.hpp"
#include "test_support.hpp"

using namespace chebgd;
using namespace chebgd::permute;
using Catch::Approx;

TEST_CASE("affine permutation: successor map and explicit sequence") {
  auto p = affine_permutation(1, 1, 0, 4);
  CHECK(p.sequence == std::vector<std::size_t>{0, 1, 2, 3});

  auto q = affine_permutation(1, 9, 7, 16);
  CHECK(q.sequence.front() == 7);
  std::set<std::size_t> seen(q.sequence.begin(), q.sequence.end());
  CHECK(seen.size() == 16);
  for (std::size_t t = 0; t + 1 < 16; ++t)
    CHECK(q.sequence[t + 1] == (q.sequence[t] * 1 + 9) % 16);
}

TEST_CASE("affine permutation: parameter validation") {
  CHECK_THROWS_AS(affine_permutation(2, 1, 0, 8), InvalidParams);   // a even
  CHECK_THROWS_AS(affine_permutation(3, 1, 0, 8), InvalidParams);   // a = 3 (mod 4)
  CHECK_THROWS_AS(affine_permutation(1, 2, 0, 8), InvalidParams);   // b even
  CHECK_THROWS_AS(affine_permutation(1, 1, 8, 8), InvalidParams);   // c out of range
  CHECK_THROWS_AS(affine_permutation(1, 1, 0, 12), InvalidParams);  // T not 2^s
}

TEST_CASE("every admissible triple is a bijection for T in {2,4,8,16,32}") {
  for (std::size_t T : {2, 4, 8, 16, 32}) {
    for (std::size_t a = 1; a <= T - 1; a += 4)
      for (std::size_t b = 1; b <= T - 1; b += 2)
        for (std::size_t c = 0; c <= T - 1; ++c) {
          auto p = affine_permutation(a, b, c, T);
          std::set<std::size_t> seen(p.sequence.begin(), p.sequence.end());
          CHECK(seen.size() == T);
        }
  }
}

TEST_CASE("temporal spectral radius: single step and final-prefix inclusion") {
  auto s1 = sched::chebyshev_steps(1, 1.0, 9.0);
  CHECK(temporal_spectral_radius(s1, 1.0, 9.0) ==
        Approx(sched::rho_upper_interval(s1, 1.0, 9.0)).epsilon(1e-12));

  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    sched::StepSchedule s{{}, 1.0, 9.0, sched::Origin::Custom};
    const std::size_t T = 2 + rng.next_u64() % 9;
    for (std::size_t t = 0; t < T; ++t) s.steps.push_back(rng.uniform(0.05, 1.5));
    CHECK(temporal_spectral_radius(s, 1.0, 9.0) >=
          sched::rho_upper_interval(s, 1.0, 9.0) - 1e-12);
  }
}

TEST_CASE("step-descending order blows up at large kappa; step-ascending stays tame") {
  // (n,m)=(500,800)-scale asymptotic interval
  const double r = 800.0 / 500.0;
  const double l1 = (1.0 - std::sqrt(r)) * (1.0 - std::sqrt(r));
  const double ln = (1.0 + std::sqrt(r)) * (1.0 + std::sqrt(r));
  auto asc = sched::chebyshev_steps(16, l1, ln);  // natural order: gamma ascending
  auto desc = asc;
  std::reverse(desc.steps.begin(), desc.steps.end());

  const double t_asc = temporal_spectral_radius(asc, l1, ln);
  const double t_desc = temporal_spectral_radius(desc, l1, ln);
  CHECK(t_desc > 1e5);      // transient blowup of the big-steps-first order
  CHECK(t_asc < 1.05);      // small steps damp the top modes before the big steps
  CHECK(t_desc > 10.0 * t_asc);
}

TEST_CASE("permutation search: T=2 enumerates both orders") {
  auto r = permutation_search(1.0, 9.0, 2);
  CHECK(r.permutation.a == 1);
  CHECK(r.permutation.b == 1);
  auto nat = sched::chebyshev_steps(2, 1.0, 9.0);
  auto rev = nat;
  std::reverse(rev.steps.begin(), rev.steps.end());
  const double obj_nat = temporal_spectral_radius(nat, 1.0, 9.0);
  const double obj_rev = temporal_spectral_radius(rev, 1.0, 9.0);
  CHECK(r.objective == Approx(std::min(obj_nat, obj_rev)).epsilon(1e-12));
  CHECK(r.schedule.origin == sched::Origin::Permuted);
}

TEST_CASE("permutation search beats both monotone orders") {
  for (double kappa : {4.0, 16.0}) {
    const std::size_t T = kappa == 4.0 ? 8 : 16;
    auto res = permutation_search(1.0, kappa, T);
    auto nat = sched::chebyshev_steps(T, 1.0, kappa);
    auto rev = nat;
    std::reverse(rev.steps.begin(), rev.steps.end());
    CHECK(res.objective <= temporal_spectral_radius(nat, 1.0, kappa) + 1e-12);
    CHECK(res.objective <= temporal_spectral_radius(rev, 1.0, kappa) + 1e-12);
  }
}

TEST_CASE("permutation search rejects non-power-of-two lengths") {
  CHECK_THROWS_AS(permutation_search(1.0, 9.0, 12), InvalidParams);
}

TEST_CASE("search reproduces the reference triples' objectives") {
  // kappa=16, T=16 -> (1,9,7); kappa=4, T=8 -> (1,5,3)
  {
    auto res = permutation_search(1.0, 16.0, 16);
    auto nat = sched::chebyshev_steps(16, 1.0, 16.0);
    auto ref = nat;
    ref.steps = apply_permutation(nat.steps, affine_permutation(1, 9, 7, 16));
    CHECK(res.objective <= temporal_spectral_radius(ref, 1.0, 16.0) + 1e-9);
  }
  {
    auto res = permutation_search(1.0, 4.0, 8);
    auto nat = sched::chebyshev_steps(8, 1.0, 4.0);
    auto ref = nat;
    ref.steps = apply_permutation(nat.steps, affine_permutation(1, 5, 3, 8));
    CHECK(res.objective <= temporal_spectral_radius(ref, 1.0, 4.0) + 1e-9);
  }
}

TEST_CASE("emulation: length one is the optimal constant step") {
  auto s = emulate_incremental(1.0, 9.0, 1, 0.3);
  REQUIRE(s.steps.size() == 1);
  CHECK(s.steps[0] == Approx(0.2).epsilon(1e-15));
}

TEST_CASE("emulation: T=2 picks the distance-minimizing order") {
  // d = (0.2, 0.3); orders (0.1277.., 0.4605..) vs (0.4605.., 0.1277..):
  // squared distances 0.03095 vs 0.09749, so the ascending order wins
  auto s = emulate_incremental(1.0, 9.0, 2, 0.3);
  CHECK(s.steps[0] == Approx(0.12773958089728293544).epsilon(1e-14));
  CHECK(s.steps[1] == Approx(0.46049571322036412339).epsilon(1e-14));
}

TEST_CASE("emulation output is a permutation of the Chebyshev steps") {
  for (std::size_t T : {3, 5, 8, 11}) {
    auto s = emulate_incremental(1.0, 9.0, T, 0.3);
    auto nat = sched::chebyshev_steps(T, 1.0, 9.0);
    auto a = s.steps, b = nat.steps;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(a[i] == Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("emulation at T=11 produces a zig-zag, not a monotone ramp") {
  auto s = emulate_incremental(1.0, 9.0, 11, 0.3);
  int sign_changes = 0;
  for (std::size_t t = 2; t < s.steps.size(); ++t) {
    const double d0 = s.steps[t - 1] - s.steps[t - 2];
    const double d1 = s.steps[t] - s.steps[t - 1];
    if (d0 * d1 < 0.0) ++sign_changes;
  }
  CHECK(sign_changes >= 4);
}

TEST_CASE("emulation enforces the exhaustive-search cap") {
  CHECK_THROWS_AS(emulate_incremental(1.0, 9.0, 13, 0.3), SizeLimitExceeded);
}

TEST_CASE("assignment search agrees with rank matching on random inputs") {
  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t T = 2 + rng.next_u64() % 7;
    std::vector<double> d(T), steps(T);
    for (auto& v : d) v = rng.uniform(0.0, 1.0);
    for (auto& v : steps) v = rng.uniform(0.0, 1.0);
    detail::AssignmentSearch search(d, steps);
    auto assign = search.run();

    // oracle: sort both and pair ranks
    std::vector<std::size_t> dr(T), sr(T);
    for (std::size_t i = 0; i < T; ++i) dr[i] = sr[i] = i;
    std::sort(dr.begin(), dr.end(), [&](auto i, auto j) { return d[i] < d[j]; });
    std::sort(sr.begin(), sr.end(), [&](auto i, auto j) { return steps[i] < steps[j]; });
    double expect = 0.0, got = 0.0;
    for (std::size_t k = 0; k < T; ++k) {
      const double diff = d[dr[k]] - steps[sr[k]];
      expect += diff * diff;
    }
    for (std::size_t j = 0; j < T; ++j) {
      const double diff = d[j] - steps[assign[j]];
      got += diff * diff;
    }
    CHECK(got == Approx(expect).epsilon(1e-12));
  }
}
