#include <catch2/catch_amalgamated.hpp>

#include "coadvise/rng.hpp"
#include "coadvise/stats.hpp"

using namespace coadvise;

namespace {
Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("pearson correlation basics") {
  const Vec x = make_vec({1, 2, 3});
  CHECK(pearson_corr(x, x) == Catch::Approx(1.0));
  CHECK(pearson_corr(x, (-x).eval()) == Catch::Approx(-1.0));
  // moments by hand: Sxy = 3, Sxx = 2, Syy = 14/3
  const Vec y = make_vec({1, 2, 4});
  CHECK(pearson_corr(x, y) == Catch::Approx(0.9819805060619657).epsilon(1e-12));
  CHECK_THROWS_AS(pearson_corr(make_vec({1, 1, 1}), y), std::invalid_argument);
}

TEST_CASE("pearson correlation is invariant to positive affine maps") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(30), y(30);
    for (int i = 0; i < 30; ++i) {
      x[i] = rng.normal();
      y[i] = 0.5 * x[i] + rng.normal();
    }
    const double r = pearson_corr(x, y);
    const Vec x2 = (2.5 * x.array() - 7.0).matrix();
    const Vec y2 = (0.3 * y.array() + 11.0).matrix();
    CHECK(pearson_corr(x2, y) == Catch::Approx(r).margin(1e-12));
    CHECK(pearson_corr(x, y2) == Catch::Approx(r).margin(1e-12));
  }
}

TEST_CASE("welch t-test") {
  SECTION("identical groups") {
    const Vec g = make_vec({1, 2, 3, 4});
    const auto r = welch_t_test(g, g);
    CHECK(r.t == Catch::Approx(0.0).margin(1e-15));
    CHECK(r.p == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("two far-apart pairs") {
    const auto r = welch_t_test(make_vec({0, 1}), make_vec({10, 11}));
    CHECK(r.t == Catch::Approx(-14.14213562373095).epsilon(1e-12));
    CHECK(r.df == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(r.p == Catch::Approx(0.004962809790010865).epsilon(1e-9));
    CHECK(r.p < 0.01);
  }
  SECTION("group too small") {
    CHECK_THROWS_AS(welch_t_test(make_vec({1}), make_vec({2, 3})), std::invalid_argument);
  }
  SECTION("swap invariance of the p-value") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      Vec a(7), b(9);
      for (int i = 0; i < 7; ++i) a[i] = rng.normal();
      for (int i = 0; i < 9; ++i) b[i] = 2 + rng.normal();
      const auto r1 = welch_t_test(a, b);
      const auto r2 = welch_t_test(b, a);
      CHECK(r1.p == Catch::Approx(r2.p).margin(1e-14));
      CHECK(r1.t == Catch::Approx(-r2.t).margin(1e-14));
    }
  }
  SECTION("zero variance in both groups") {
    CHECK_THROWS_AS(welch_t_test(make_vec({1, 1}), make_vec({2, 2})),
                    std::invalid_argument);
  }
}

TEST_CASE("normal cdf and quantile") {
  CHECK(normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(normal_quantile(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
  for (double p : {0.001, 0.1, 0.3, 0.77, 0.9999})
    CHECK(normal_cdf(normal_quantile(p)) == Catch::Approx(p).epsilon(1e-10));
}

TEST_CASE("student t cdf against reference values") {
  CHECK(student_t_cdf(-14.142135623730951, 2) ==
        Catch::Approx(0.0024814048950054317).epsilon(1e-10));
  CHECK(student_t_cdf(1.7, 7.3) == Catch::Approx(0.9344173158234566).epsilon(1e-10));
  CHECK(student_t_cdf(0.5, 1) == Catch::Approx(0.6475836176504333).epsilon(1e-10));
  CHECK(student_t_cdf(-2.2, 10) == Catch::Approx(0.02622053422467658).epsilon(1e-10));
  CHECK(student_t_cdf(1.96, 499) == Catch::Approx(0.9747240485579494).epsilon(1e-10));
  CHECK(student_t_cdf(0.3, 0.5) == Catch::Approx(0.5775704239347546).epsilon(1e-10));
}

TEST_CASE("weighted moments reduce to unweighted under unit weights") {
  Rng rng(11);
  Vec x(25), y(25);
  for (int i = 0; i < 25; ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  const Vec w = Vec::Ones(25);
  CHECK(weighted_mean(x, w) == Catch::Approx(x.mean()).margin(1e-14));
  CHECK(weighted_variance(x, w) == Catch::Approx(sample_variance(x)).epsilon(1e-12));
  CHECK(weighted_covariance(x, y, w) ==
        Catch::Approx(sample_covariance(x, y)).epsilon(1e-12));
  CHECK(effective_sample_size(w) == Catch::Approx(25.0).epsilon(1e-14));
}
