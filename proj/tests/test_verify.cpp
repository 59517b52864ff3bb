#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "lowrank/errors.hpp"
#include "lowrank/kernels.hpp"
#include "lowrank/sampling.hpp"
#include "lowrank/verify.hpp"

using namespace lowrank;

namespace {

SnapshotMatrix family_snapshots(const std::string& name, std::size_t m, std::size_t n) {
  return materialize(builtin_family(name), uniform_grid(0.0, 1.0, m),
                     uniform_grid(0.0, 1.0, n));
}

const std::vector<DecayMethod> kAllMethods = {
    DecayMethod::pod, DecayMethod::aca_global, DecayMethod::aca_partial,
    DecayMethod::eim_inf, DecayMethod::eim_2};

// Column order inside DecayRow::errors for kAllMethods.
constexpr std::size_t kPod = 0;
constexpr std::size_t kAcaGlobal = 1;
constexpr std::size_t kAcaPartial = 2;
constexpr std::size_t kEimInf = 3;
constexpr std::size_t kEim2 = 4;

}  // namespace

TEST_CASE("n-width oracle is exact on identity families") {
  const DenseMatrix id = DenseMatrix::identity(6);

  // With grid measure equal to the snapshot count the scaled matrix is the
  // identity itself, so every achievable floor equals one.
  const SnapshotMatrix weighted(id, uniform_grid(0.0, 36.0, 6),
                                uniform_grid(0.0, 36.0, 6));
  REQUIRE(weighted.weight == doctest::Approx(6.0));
  for (std::size_t q = 0; q < 6; ++q) {
    CHECK(nwidth_oracle(weighted, q) == 1.0);
  }

  // On the unit grid the same matrix is scaled by sqrt(weight / N) = 1/6.
  const SnapshotMatrix unit(id, uniform_grid(0.0, 1.0, 6), uniform_grid(0.0, 1.0, 6));
  for (std::size_t q = 0; q < 6; ++q) {
    CHECK(nwidth_oracle(unit, q) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  }
}

TEST_CASE("n-width oracle vanishes beyond the exact rank") {
  const SnapshotMatrix s = random_low_rank(10, 8, 3, 0.0, 77);
  CHECK(nwidth_oracle(s, 2) == doctest::Approx(1.096e-01).epsilon(1e-3));
  for (std::size_t q : {std::size_t{3}, std::size_t{5}, std::size_t{7}}) {
    CHECK(nwidth_oracle(s, q) <= 1e-12);
  }
}

TEST_CASE("n-width floors of the analytic family decay geometrically") {
  const SnapshotMatrix s = family_snapshots("analytic", 20, 20);

  const std::vector<double> expected = {5.352662e-02, 2.721165e-03, 1.311292e-04,
                                        6.095024e-06, 2.731300e-07, 1.174082e-08,
                                        4.807725e-10};
  for (std::size_t q = 1; q <= expected.size(); ++q) {
    CHECK(nwidth_oracle(s, q) == doctest::Approx(expected[q - 1]).epsilon(1e-5));
  }

  // Strictly decreasing with a uniform ratio well below one down to the
  // round-off region near 1e-15.
  double prev = nwidth_oracle(s, 1);
  for (std::size_t q = 2; q <= 11; ++q) {
    const double f = nwidth_oracle(s, q);
    CHECK(f < prev);
    CHECK(f / prev < 0.06);
    prev = f;
  }
}

TEST_CASE("n-width oracle rejects out-of-range ranks") {
  const SnapshotMatrix s = random_low_rank(6, 4, 2, 0.0, 1);
  CHECK_THROWS_AS((void)nwidth_oracle(s, 4), contract_error);
  CHECK_THROWS_AS((void)nwidth_oracle(s, 9), contract_error);
  CHECK_NOTHROW((void)nwidth_oracle(s, 3));
}

TEST_CASE("decay method names round-trip") {
  for (DecayMethod m : kAllMethods) {
    CHECK(decay_method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS((void)decay_method_from_string("bogus"), contract_error);
}

TEST_CASE("decay report exhausts a noiseless rank-3 family at rank 3") {
  const SnapshotMatrix s = random_low_rank(10, 8, 3, 0.0, 77);
  const DecayReport rep = decay_report(s, kAllMethods, 4);

  REQUIRE(rep.rows.size() == 4);
  REQUIRE(rep.methods == kAllMethods);
  CHECK(rep.rows[2].q == 3);
  CHECK(rep.rows[2].floor <= 1e-12);
  for (double err : rep.rows[2].errors) CHECK(err <= 1e-10);
  for (double err : rep.rows[3].errors) CHECK(err <= 1e-10);
}

TEST_CASE("mean-square error columns never beat the spectral floor") {
  const std::vector<SnapshotMatrix> instances = {
      family_snapshots("analytic", 20, 20), family_snapshots("cauchy", 15, 15),
      random_low_rank(12, 10, 4, 1e-3, 5)};
  const std::vector<std::size_t> q_maxes = {10, 8, 8};

  for (std::size_t k = 0; k < instances.size(); ++k) {
    const DecayReport rep = decay_report(instances[k], kAllMethods, q_maxes[k]);
    for (const DecayRow& row : rep.rows) {
      if (!(row.floor > 0.0)) continue;
      CHECK(row.errors[kPod] >= (1.0 - 1e-8) * row.floor);
      CHECK(row.errors[kEim2] >= (1.0 - 1e-8) * row.floor);
    }
  }
}

TEST_CASE("cauchy decay report reproduces the audited table") {
  const SnapshotMatrix s = family_snapshots("cauchy", 15, 15);
  const DecayReport rep = decay_report(s, kAllMethods, 8);
  REQUIRE(rep.rows.size() == 8);

  const std::vector<double> floor = {1.514176e-02, 3.301369e-04, 6.665676e-06,
                                     1.255962e-07, 2.186588e-09, 3.465573e-11,
                                     4.913082e-13, 6.095492e-15};
  const std::vector<double> pod = {1.514536e-02, 3.302042e-04, 6.666860e-06,
                                   1.256152e-07, 2.186863e-09, 3.465922e-11,
                                   3.465922e-11, 3.465922e-11};
  const std::vector<double> aca_global = {8.333333e-02, 3.068883e-03, 4.195236e-05,
                                          2.164756e-06, 1.701383e-08, 6.728181e-10,
                                          1.313639e-11, 3.915393e-14};
  const std::vector<double> aca_partial = {8.333333e-02, 7.919103e-03, 8.225617e-05,
                                           5.271940e-06, 4.391713e-08, 7.030787e-10,
                                           1.708038e-11, 2.580390e-13};
  const std::vector<double> eim_2 = {6.285950e-02, 2.053183e-03, 2.694223e-05,
                                     8.246956e-07, 9.621917e-09, 2.987435e-10,
                                     5.690804e-12, 1.947948e-14};

  for (std::size_t r = 0; r < 8; ++r) {
    CAPTURE(r);
    CHECK(rep.rows[r].q == r + 1);
    CHECK(rep.rows[r].floor == doctest::Approx(floor[r]).epsilon(1e-5));
    CHECK(rep.rows[r].errors[kPod] == doctest::Approx(pod[r]).epsilon(1e-5));
    CHECK(rep.rows[r].errors[kAcaGlobal] ==
          doctest::Approx(aca_global[r]).epsilon(1e-5));
    CHECK(rep.rows[r].errors[kAcaPartial] ==
          doctest::Approx(aca_partial[r]).epsilon(1e-5));
    CHECK(rep.rows[r].errors[kEim2] == doctest::Approx(eim_2[r]).epsilon(1e-5));
    // Global cross pivoting and sup-norm interpolation walk identical
    // residuals, so their error columns coincide bitwise.
    CHECK(rep.rows[r].errors[kEimInf] == rep.rows[r].errors[kAcaGlobal]);
  }

  // The projection basis saturates at the numerical rank of the family, so
  // the mean-square column goes flat once the spectrum is exhausted.
  CHECK(rep.rows[6].errors[kPod] == rep.rows[5].errors[kPod]);
  CHECK(rep.rows[7].errors[kPod] == rep.rows[5].errors[kPod]);

  // Every method decays geometrically while meaningfully above round-off.
  for (std::size_t col = 0; col < kAllMethods.size(); ++col) {
    for (std::size_t r = 1; r < 8; ++r) {
      const double prev = rep.rows[r - 1].errors[col];
      const double curr = rep.rows[r].errors[col];
      if (prev <= 1e-10) continue;
      if (col == kPod && curr == prev) continue;  // saturated tail
      CHECK(curr / prev < 0.15);
    }
  }
}

TEST_CASE("analytic decay report reaches 1e-8 for every method by rank 10") {
  const SnapshotMatrix s = family_snapshots("analytic", 20, 20);
  const DecayReport rep = decay_report(s, kAllMethods, 10);
  REQUIRE(rep.rows.size() == 10);

  for (double err : rep.rows[9].errors) CHECK(err <= 1e-8);

  const DecayRow& last = rep.rows[9];
  CHECK(last.errors[kPod] == doctest::Approx(4.811326e-10).epsilon(1e-5));
  CHECK(last.errors[kAcaGlobal] == doctest::Approx(1.753933e-13).epsilon(1e-5));
  CHECK(last.errors[kAcaPartial] == doctest::Approx(3.846316e-12).epsilon(1e-5));
  CHECK(last.errors[kEim2] == doctest::Approx(8.322969e-14).epsilon(1e-5));

  // Projection saturates once the basis hits the numerical rank (7 here).
  CHECK(rep.rows[7].errors[kPod] == rep.rows[6].errors[kPod]);
  CHECK(rep.rows[8].errors[kPod] == rep.rows[6].errors[kPod]);
  CHECK(rep.rows[9].errors[kPod] == rep.rows[6].errors[kPod]);
}

TEST_CASE("decay report rejects invalid requests") {
  const SnapshotMatrix s = random_low_rank(6, 4, 2, 0.0, 9);
  CHECK_THROWS_AS((void)decay_report(s, kAllMethods, 0), contract_error);
  CHECK_THROWS_AS((void)decay_report(s, kAllMethods, 4), contract_error);
  CHECK_THROWS_AS((void)decay_report(s, {}, 2), contract_error);
}

TEST_CASE("equivalence report passes on the randomized corpus") {
  for (unsigned seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed * 7919ull);
    const std::size_t rank = 1 + static_cast<std::size_t>(rng() % 6);
    const SnapshotMatrix s = random_low_rank(12, 10, rank, 1e-3, seed);
    const EquivalenceReport rep = check_equivalence_aca_eim(s, 12);
    CAPTURE(seed);
    CHECK(rep.passed);
    CHECK(rep.failures.empty());
    CHECK(rep.steps > 0);
    CHECK(rep.max_coefficient_gap <= 1e-10);
    CHECK(rep.max_interpolant_gap <= 1e-10);
  }
}

TEST_CASE("equivalence on a rank-1 family stops after one identical step") {
  const SnapshotMatrix s = random_low_rank(7, 5, 1, 0.0, 3);
  const EquivalenceReport rep = check_equivalence_aca_eim(s, 4);
  CHECK(rep.passed);
  CHECK(rep.steps == 1);
}

TEST_CASE("equivalence holds under a tied pivot maximum") {
  // |2| appears twice in the first remainder; both constructions must take
  // the lowest-index cell and stay in lockstep afterwards.
  DenseMatrix tie(2, 2, 0.0);
  tie(0, 0) = 2.0;
  tie(0, 1) = -2.0;
  tie(1, 0) = 1.0;
  tie(1, 1) = 0.5;
  const SnapshotMatrix s(tie, uniform_grid(0.0, 1.0, 2), uniform_grid(0.0, 1.0, 2));

  const EquivalenceReport rep = check_equivalence_aca_eim(s, 2);
  CHECK(rep.passed);
  CHECK(rep.steps == 2);
}

TEST_CASE("equivalence report flags an identically zero family") {
  const DenseMatrix zero(4, 3, 0.0);
  const SnapshotMatrix s(zero, uniform_grid(0.0, 1.0, 4), uniform_grid(0.0, 1.0, 3));
  const EquivalenceReport rep = check_equivalence_aca_eim(s, 2);
  CHECK(!rep.passed);
  REQUIRE(rep.failures.size() == 1);
  CHECK(rep.failures.front() == "input matrix is identically zero");
}
