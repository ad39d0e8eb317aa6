#include <catch2/catch_amalgamated.hpp>

#include "coadvise/rng.hpp"
#include "coadvise/selector.hpp"

using namespace coadvise;

namespace {

BinaryTrial make_trial(const Mat& X, const Vec& y, const Eigen::VectorXi& A) {
  BinaryTrial t;
  t.A = A;
  t.Y = y;
  t.Y_observed = BoolVec::Constant(y.size(), 1);
  t.X = X;
  t.X_observed = BoolMat::Constant(X.rows(), X.cols(), 1);
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    t.covariate_names.push_back("x" + std::to_string(j + 1));
  return t;
}

Eigen::VectorXi alternating(Eigen::Index n) {
  Eigen::VectorXi a(n);
  for (Eigen::Index i = 0; i < n; ++i) a[i] = static_cast<int>(i % 2);
  return a;
}

}  // namespace

TEST_CASE("method none selects the full pool") {
  Rng rng(61);
  Mat X(40, 55);
  Vec y(40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 55; ++j) X(i, j) = rng.normal();
    y[i] = rng.normal();
  }
  SelectionSpec spec;
  spec.method = SelectionMethod::none;
  const auto res = select(spec, make_trial(X, y, alternating(40)));
  CHECK(res.pooled.size() == 55);
  CHECK(res.per_arm[0] == res.pooled);
  CHECK(res.per_arm[1] == res.pooled);
}

TEST_CASE("corr_k picks the strongest covariates") {
  Rng rng(67);
  const int n = 60;
  Mat X(n, 2);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = rng.normal();
    X(i, 0) = y[i];           // copy of the outcome
    X(i, 1) = rng.normal();   // noise
  }
  const auto idx = select_corr_k(X, y, 1);
  REQUIRE(idx.size() == 1);
  CHECK(idx[0] == 0);
  CHECK(select_corr_k(X, y, 2).size() == 2);
}

TEST_CASE("corr_k ties break to the lower column index") {
  Vec y(4);
  y << 1, 2, 3, 4;
  Mat X(4, 2);
  X.col(0) = -y;  // |corr| = 1
  X.col(1) = y;   // |corr| = 1
  const auto idx = select_corr_k(X, y, 1);
  REQUIRE(idx.size() == 1);
  CHECK(idx[0] == 0);
}

TEST_CASE("corr_k clamps k to the pool size") {
  Vec y(5);
  y << 1, 2, 3, 4, 5;
  Mat X(5, 1);
  X.col(0) = y;
  bool clamped = false;
  const auto idx = select_corr_k(X, y, 10, &clamped);
  CHECK(idx.size() == 1);
  CHECK(clamped);
}

TEST_CASE("corr_xi threshold is strict") {
  // built so that corr(x, y) is exactly 0.5 in floating point
  Vec x(4), y(4);
  x << 1, 0, -1, 0;
  y << 1, 0, 0, -1;
  Mat X(4, 1);
  X.col(0) = x;
  CHECK(pearson_corr(x, y) == 0.5);
  CHECK(select_corr_xi(X, y, 0.5).empty());
  CHECK(select_corr_xi(X, y, 0.49).size() == 1);
}

TEST_CASE("corr_xi extremes") {
  Rng rng(71);
  const int n = 80;
  Mat X(n, 3);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = rng.normal();
    X(i, 0) = y[i];
    X(i, 1) = rng.normal();
    X(i, 2) = rng.normal();
  }
  const auto all_noise = select_corr_xi(X.rightCols(2), y, 0.999);
  CHECK(all_noise.empty());
  const auto with_copy = select_corr_xi(X, y, 0.25);
  CHECK(std::find(with_copy.begin(), with_copy.end(), 0) != with_copy.end());
}

TEST_CASE("pre_test selects arm-imbalanced covariates") {
  const int n = 60;
  Eigen::VectorXi A = alternating(n);
  Rng rng(73);
  Mat X(n, 2);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = A[i] + 0.01 * rng.normal();  // covariate tracking the arm
    X(i, 1) = rng.normal();
    y[i] = rng.normal();
  }
  const auto idx = select_pretest(X, A, 0.05);
  CHECK(std::find(idx.begin(), idx.end(), 0) != idx.end());

  const auto all = select_pretest(X, A, 1.0);
  CHECK(all.size() == 2);
}

TEST_CASE("pre_test size is near the nominal level", "[slow]") {
  // identically distributed covariate: selection rate ~ alpha = 5%
  int hits = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    Rng rng(9000 + r);
    const int n = 100;
    Eigen::VectorXi A(n);
    Mat X(n, 1);
    for (int i = 0; i < n; ++i) {
      A[i] = rng.bernoulli(0.5) ? 1 : 0;
      X(i, 0) = rng.normal();
    }
    if ((A.array() == 1).count() < 2 || (A.array() == 0).count() < 2) continue;
    if (!select_pretest(X, A, 0.05).empty()) ++hits;
  }
  const double rate = 100.0 * hits / reps;
  CHECK(rate >= 3.0);
  CHECK(rate <= 7.0);
}

TEST_CASE("select dispatch: pooled and per-arm sets") {
  Rng rng(79);
  const int n = 120;
  Eigen::VectorXi A = alternating(n);
  Mat X(n, 4);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 4; ++j) X(i, j) = rng.normal();
    y[i] = 3 * X(i, 1) + 0.3 * rng.normal();
  }
  SelectionSpec spec;
  spec.method = SelectionMethod::lasso;
  spec.seed = 99;
  const auto res = select(spec, make_trial(X, y, A));
  CHECK(std::find(res.pooled.begin(), res.pooled.end(), 1) != res.pooled.end());
  CHECK(std::find(res.per_arm[0].begin(), res.per_arm[0].end(), 1) != res.per_arm[0].end());
  CHECK(std::find(res.per_arm[1].begin(), res.per_arm[1].end(), 1) != res.per_arm[1].end());
  for (const auto& set : {res.pooled, res.per_arm[0], res.per_arm[1]}) {
    CHECK(std::is_sorted(set.begin(), set.end()));
    CHECK(set.size() <= 4);
  }
}

TEST_CASE("per-arm selection depends only on that arm's rows") {
  Rng rng(83);
  const int n = 100;
  Eigen::VectorXi A = alternating(n);
  Mat X(n, 3);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
    y[i] = 2 * X(i, 0) + 0.2 * rng.normal();
  }
  SelectionSpec spec;
  spec.method = SelectionMethod::lasso;
  spec.seed = 5;
  const auto base = select(spec, make_trial(X, y, A));
  Vec y2 = y;
  for (int i = 0; i < n; ++i)
    if (A[i] == 0) y2[i] = rng.normal() * 10;  // scramble the other arm
  const auto mutated = select(spec, make_trial(X, y2, A));
  CHECK(base.per_arm[1] == mutated.per_arm[1]);
}

TEST_CASE("column permutation permutes the selected indices") {
  Rng rng(89);
  const int n = 90;
  Eigen::VectorXi A = alternating(n);
  Mat X(n, 3);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
    y[i] = 4 * X(i, 2) + 0.1 * rng.normal();
  }
  SelectionSpec spec;
  spec.method = SelectionMethod::corr_k;
  spec.k = 1;
  const auto base = select(spec, make_trial(X, y, A));
  Mat Xp(n, 3);
  Xp.col(0) = X.col(2);
  Xp.col(1) = X.col(0);
  Xp.col(2) = X.col(1);
  const auto perm = select(spec, make_trial(Xp, y, A));
  REQUIRE(base.pooled.size() == 1);
  REQUIRE(perm.pooled.size() == 1);
  CHECK(base.pooled[0] == 2);
  CHECK(perm.pooled[0] == 0);
}

TEST_CASE("select rejects missing cells and small arms") {
  Rng rng(97);
  Mat X(10, 2);
  Vec y(10);
  for (int i = 0; i < 10; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
    y[i] = rng.normal();
  }
  BinaryTrial t = make_trial(X, y, alternating(10));
  t.X_observed(3, 1) = 0;
  SelectionSpec spec;
  spec.method = SelectionMethod::corr_k;
  CHECK_THROWS_AS(select(spec, t), DataError);

  // one row in arm 1
  BinaryTrial t2 = make_trial(X, y, alternating(10));
  for (int i = 0; i < 10; ++i) t2.A[i] = i == 0 ? 1 : 0;
  SelectionSpec lspec;
  lspec.method = SelectionMethod::lasso;
  CHECK_THROWS_AS(select(lspec, t2), DataError);
}

TEST_CASE("selection JSON export lists names per set") {
  Rng rng(201);
  Mat X(30, 3);
  Vec y(30);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
    y[i] = X(i, 0);
  }
  SelectionSpec spec;
  spec.method = SelectionMethod::corr_k;
  spec.k = 1;
  const BinaryTrial t = make_trial(X, y, alternating(30));
  const auto res = select(spec, t);
  const auto j = selection_to_json(res, t.covariate_names);
  CHECK(j["method"] == "corr_k");
  CHECK(j["pooled"].size() == 1);
  CHECK(j["pooled"][0] == "x1");
}
