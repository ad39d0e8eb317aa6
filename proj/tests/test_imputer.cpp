#include <catch2/catch_amalgamated.hpp>

#include "coadvise/imputer.hpp"
#include "coadvise/rng.hpp"

using namespace coadvise;

namespace {

BinaryTrial base_trial(Eigen::Index n, Eigen::Index p, Rng& rng) {
  BinaryTrial t;
  t.A.resize(n);
  t.Y.resize(n);
  t.Y_observed = BoolVec::Constant(n, 1);
  t.X.resize(n, p);
  t.X_observed = BoolMat::Constant(n, p, 1);
  for (Eigen::Index j = 0; j < p; ++j)
    t.covariate_names.push_back("x" + std::to_string(j + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    t.A[i] = static_cast<int>(i % 2);
    for (Eigen::Index j = 0; j < p; ++j) t.X(i, j) = rng.normal();
    t.Y[i] = t.X(i, 0) + rng.normal();
  }
  return t;
}

}  // namespace

TEST_CASE("complete-case on complete data is the identity") {
  Rng rng(301);
  const BinaryTrial t = base_trial(10, 2, rng);
  const ImputedTrial out = impute_cc(t);
  CHECK(out.trial.n_rows() == 10);
  CHECK(out.dropped_rows.empty());
  CHECK(out.trial.X == t.X);
  CHECK((out.row_weights.array() == 1.0).all());
}

TEST_CASE("complete-case drops exactly the incomplete rows") {
  Rng rng(303);
  BinaryTrial t = base_trial(10, 2, rng);
  t.X_observed(4, 1) = 0;
  const ImputedTrial out = impute_cc(t);
  CHECK(out.trial.n_rows() == 9);
  REQUIRE(out.dropped_rows.size() == 1);
  CHECK(out.dropped_rows[0] == 4);
  CHECK(out.trial.fully_observed());
}

TEST_CASE("complete-case errors when an arm is exhausted") {
  Rng rng(305);
  BinaryTrial t = base_trial(10, 1, rng);
  for (Eigen::Index i = 0; i < 10; ++i)
    if (t.A[i] == 1) t.Y_observed[i] = 0;
  CHECK_THROWS_WITH(impute_cc(t), Catch::Matchers::ContainsSubstring("arm exhausted: 1"));
}

TEST_CASE("complete-case is idempotent") {
  Rng rng(307);
  BinaryTrial t = base_trial(14, 3, rng);
  t.X_observed(2, 0) = 0;
  t.Y_observed[9] = 0;
  const ImputedTrial once = impute_cc(t);
  const ImputedTrial twice = impute_cc(once.trial);
  CHECK(twice.trial.n_rows() == once.trial.n_rows());
  CHECK(twice.dropped_rows.empty());
  CHECK(twice.trial.X == once.trial.X);
}

TEST_CASE("chained imputation is the identity on complete data") {
  Rng rng(311);
  const BinaryTrial t = base_trial(12, 2, rng);
  const ImputedTrial a = impute_chained(t, 10, 1);
  const ImputedTrial b = impute_chained(t, 10, 999);
  CHECK(a.trial.X == t.X);
  CHECK(a.trial.Y == t.Y);
  CHECK(b.trial.X == t.X);
}

TEST_CASE("chained imputation exploits exact collinearity") {
  Rng rng(313);
  const Eigen::Index n = 40;
  BinaryTrial t = base_trial(n, 2, rng);
  t.X.col(0) = t.X.col(1);  // x1 == x2 exactly
  for (Eigen::Index i = 0; i < n; ++i) t.Y[i] = t.X(i, 1) + 0.3 * rng.normal();
  t.X_observed(7, 0) = 0;
  t.X(7, 0) = 0.0;
  const ImputedTrial out = impute_chained(t, 10, 42);
  CHECK(std::fabs(out.trial.X(7, 0) - t.X(7, 1)) <= 1e-6);
}

TEST_CASE("chained imputation is seed-deterministic and respects observed cells") {
  Rng rng(317);
  BinaryTrial t = base_trial(30, 3, rng);
  t.X_observed(3, 0) = 0;
  t.X_observed(11, 2) = 0;
  t.Y_observed[5] = 0;
  const ImputedTrial a = impute_chained(t, 10, 77);
  const ImputedTrial b = impute_chained(t, 10, 77);
  CHECK(a.trial.X == b.trial.X);
  CHECK(a.trial.Y == b.trial.Y);
  for (Eigen::Index i = 0; i < 30; ++i) {
    if (t.Y_observed[i]) CHECK(a.trial.Y[i] == t.Y[i]);
    for (Eigen::Index j = 0; j < 3; ++j)
      if (t.X_observed(i, j)) CHECK(a.trial.X(i, j) == t.X(i, j));
  }
  const ImputedTrial c = impute_chained(t, 10, 78);
  CHECK(a.trial.X != c.trial.X);  // a different seed draws different noise
}

TEST_CASE("chained imputation keeps two-valued columns on their levels") {
  Rng rng(319);
  BinaryTrial t = base_trial(40, 2, rng);
  for (Eigen::Index i = 0; i < 40; ++i) t.X(i, 1) = rng.bernoulli(0.4) ? 3.0 : -1.0;
  t.X_observed(5, 1) = 0;
  t.X_observed(20, 1) = 0;
  const ImputedTrial out = impute_chained(t, 10, 5);
  for (const Eigen::Index i : {Eigen::Index(5), Eigen::Index(20)}) {
    const double v = out.trial.X(i, 1);
    CHECK((v == 3.0 || v == -1.0));
  }
}

TEST_CASE("ipw with no missing outcomes is the identity") {
  Rng rng(323);
  const BinaryTrial t = base_trial(16, 2, rng);
  const ImputedTrial out = ipw_missing_outcome(t);
  CHECK(out.trial.n_rows() == 16);
  CHECK((out.row_weights.array() == 1.0).all());
  CHECK(out.dropped_rows.empty());
}

TEST_CASE("ipw under MCAR halving recovers weight 2", "[slow]") {
  Rng rng(327);
  const Eigen::Index n = 2000;
  BinaryTrial t = base_trial(n, 3, rng);
  for (Eigen::Index i = 0; i < n; ++i)
    if (rng.bernoulli(0.5)) t.Y_observed[i] = 0;
  const ImputedTrial out = ipw_missing_outcome(t);
  CHECK(out.trial.n_rows() == n - static_cast<Eigen::Index>(out.dropped_rows.size()));
  const double mean_w = out.row_weights.mean();
  CHECK(mean_w >= 1.8);
  CHECK(mean_w <= 2.2);
  CHECK(out.row_weights.minCoeff() >= 1.0);
}

TEST_CASE("ipw clamps extreme weights at 100") {
  Rng rng(12345);
  const Eigen::Index n = 500;
  BinaryTrial t;
  t.A.resize(n);
  t.Y.resize(n);
  t.Y_observed = BoolVec::Constant(n, 1);
  t.X.resize(n, 1);
  t.X_observed = BoolMat::Constant(n, 1, 1);
  t.covariate_names = {"x1"};
  for (Eigen::Index i = 0; i < n; ++i) {
    t.A[i] = static_cast<int>(i % 2);
    t.X(i, 0) = rng.normal();
    t.Y[i] = t.X(i, 0) + rng.normal();
    const double p_obs = 1.0 / (1.0 + std::exp(1.0 + 2.0 * t.X(i, 0)));
    if (!rng.bernoulli(p_obs)) t.Y_observed[i] = 0;
  }
  // an observed row deep in the rarely-observed region
  t.X(0, 0) = 4.0;
  t.Y_observed[0] = 1;
  const ImputedTrial out = ipw_missing_outcome(t);
  CHECK(out.weight_clamped);
  CHECK(out.row_weights.maxCoeff() == 100.0);
  CHECK(out.row_weights.minCoeff() >= 1.0);
}

TEST_CASE("ipw rejects missing covariates") {
  Rng rng(331);
  BinaryTrial t = base_trial(12, 2, rng);
  t.X_observed(3, 0) = 0;
  CHECK_THROWS_AS(ipw_missing_outcome(t), DataError);
}

TEST_CASE("missInd appends indicators and fills") {
  Rng rng(337);
  BinaryTrial t = base_trial(8, 2, rng);
  t.X_observed(2, 0) = 0;
  t.X_observed(5, 0) = 0;
  const ImputedTrial out = impute_miss_ind(t, 0.0);
  REQUIRE(out.added_columns.size() == 1);
  CHECK(out.added_columns[0] == "x1__miss");
  CHECK(out.trial.n_covariates() == 3);
  for (Eigen::Index i = 0; i < 8; ++i) {
    const bool missed = i == 2 || i == 5;
    CHECK(out.trial.X(i, 2) == (missed ? 1.0 : 0.0));
    if (missed) CHECK(out.trial.X(i, 0) == 0.0);
  }
}

TEST_CASE("missInd with nothing missing adds nothing") {
  Rng rng(341);
  const BinaryTrial t = base_trial(8, 2, rng);
  const ImputedTrial out = impute_miss_ind(t, 0.0);
  CHECK(out.added_columns.empty());
  CHECK(out.trial.X == t.X);
}

TEST_CASE("missInd rejects a missing outcome") {
  Rng rng(347);
  BinaryTrial t = base_trial(8, 2, rng);
  t.Y_observed[1] = 0;
  CHECK_THROWS_AS(impute_miss_ind(t, 0.0), DataError);
}

TEST_CASE("every method returns a fully observed trial") {
  Rng rng(349);
  BinaryTrial t = base_trial(40, 3, rng);
  t.X_observed(3, 1) = 0;
  t.X_observed(17, 0) = 0;
  CHECK(impute_cc(t).trial.fully_observed());
  CHECK(impute_chained(t, 5, 1).trial.fully_observed());
  CHECK(impute_miss_ind(t, 0.0).trial.fully_observed());
  BinaryTrial ty = base_trial(40, 3, rng);
  ty.Y_observed[4] = 0;
  CHECK(ipw_missing_outcome(ty).trial.fully_observed());
}

TEST_CASE("missForest is rejected with a deviation message") {
  CHECK_THROWS_WITH(parse_imputation_method("missForest"),
                    Catch::Matchers::ContainsSubstring("chained-equations"));
  CHECK(parse_imputation_method("mice") == ImputationMethod::chained);
}
