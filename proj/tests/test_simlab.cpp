#include <catch2/catch_amalgamated.hpp>

#include "coadvise/simlab.hpp"
#include "coadvise/stats.hpp"

using namespace coadvise;

TEST_CASE("covariate generator moments", "[slow]") {
  Rng rng(1001);
  Mat X, V;
  gen_covariates(100000, rng, X, V);
  CHECK(pearson_corr(X.col(0), X.col(1)) >= 0.79);
  CHECK(pearson_corr(X.col(0), X.col(1)) <= 0.81);
  CHECK(X.col(4).mean() >= -0.02);
  CHECK(X.col(4).mean() <= 0.02);
  CHECK(X.col(2).mean() == Catch::Approx(0.0).margin(0.02));
  // V has mean 1 and the prescribed correlation structure
  CHECK(V.col(0).mean() == Catch::Approx(1.0).margin(0.02));
  CHECK(pearson_corr(V.col(0), V.col(1)) ==
        Catch::Approx(dgp::sigma_v()(0, 1)).margin(0.02));
}

TEST_CASE("sigma_v is a correlation matrix") {
  const Mat& s = dgp::sigma_v();
  REQUIRE(s.rows() == 50);
  for (int i = 0; i < 50; ++i) CHECK(s(i, i) == 1.0);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_NOTHROW(cholesky_with_jitter(s));
}

TEST_CASE("forcing a null effect makes the potential outcomes equal") {
  DgpSpec spec;
  spec.outcome = OutcomeType::continuous;
  Rng rng(1003);
  Mat X, V;
  gen_covariates(200, rng, X, V);
  Vec y0, y1;
  const Vec zero = Vec::Zero(200);
  gen_potential_outcomes(X, spec, rng, y0, y1, &zero);
  CHECK((y1 - y0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("binary outcomes are 0/1") {
  DgpSpec spec;
  spec.outcome = OutcomeType::binary;
  Rng rng(1007);
  Mat X, V;
  gen_covariates(500, rng, X, V);
  Vec y0, y1;
  gen_potential_outcomes(X, spec, rng, y0, y1);
  for (int i = 0; i < 500; ++i) {
    CHECK((y0[i] == 0.0 || y0[i] == 1.0));
    CHECK((y1[i] == 0.0 || y1[i] == 1.0));
  }
}

TEST_CASE("oracle hits the closed-form targets of the stated models", "[slow]") {
  // continuous linear, additive reading: tau = c1 exactly
  DgpSpec add;
  add.delta_form = DeltaForm::linear;
  add.linear_delta_reading = LinearDeltaReading::additive;
  const OracleEstimate oa = true_ate_oracle(add, 200000, 5);
  CHECK(oa.tau == Catch::Approx(8.15).margin(0.05));

  // as-written reading: E[X'b1] = 0, so tau = 0
  DgpSpec asw;
  asw.linear_delta_reading = LinearDeltaReading::as_written;
  const OracleEstimate ow = true_ate_oracle(asw, 200000, 5);
  CHECK(ow.tau == Catch::Approx(0.0).margin(0.25));

  // continuous nonlinear: tau = 6.8 + 2 Im[(1-2i)^{-1/2}] = 7.5031551685
  DgpSpec nl;
  nl.delta_form = DeltaForm::nonlinear;
  const OracleEstimate on = true_ate_oracle(nl, 200000, 5);
  CHECK(on.tau == Catch::Approx(7.5031551685082859).margin(0.06));

  // binary arms, frozen from an independent large-sample evaluation
  DgpSpec bl;
  bl.outcome = OutcomeType::binary;
  const OracleEstimate ob = true_ate_oracle(bl, 200000, 5);
  CHECK(ob.tau >= 0.0070);
  CHECK(ob.tau <= 0.0102);

  DgpSpec bn;
  bn.outcome = OutcomeType::binary;
  bn.delta_form = DeltaForm::nonlinear;
  const OracleEstimate obn = true_ate_oracle(bn, 200000, 5);
  CHECK(obn.tau >= 0.0505);
  CHECK(obn.tau <= 0.0552);
}

TEST_CASE("oracle reports its monte carlo uncertainty") {
  DgpSpec spec;
  spec.linear_delta_reading = LinearDeltaReading::additive;
  const OracleEstimate o = true_ate_oracle(spec, 20000, 4);
  CHECK(o.mc_se > 0.0);
  CHECK(o.mc_se < 0.1);
  CHECK(o.reps == 4);
}

namespace {
std::vector<MethodSpec> tiny_methods() {
  MethodSpec simple;
  simple.label = "simple";
  simple.estimator = EstimatorKind::simple;
  MethodSpec aipw_x;
  aipw_x.label = "none:aipw:x";
  aipw_x.selection.method = SelectionMethod::none;
  aipw_x.estimator = EstimatorKind::aipw;
  aipw_x.pool = PoolKind::x_only;
  return {simple, aipw_x};
}
}  // namespace

TEST_CASE("monte carlo report shape and determinism") {
  DgpSpec spec;
  spec.n = 80;
  spec.linear_delta_reading = LinearDeltaReading::additive;
  const auto methods = tiny_methods();
  const SimulationReport r1 = run_monte_carlo(spec, methods, 6, 42, 8.15, 1);
  REQUIRE(r1.methods.size() == 2);
  for (const auto& m : r1.methods) CHECK(m.tau.size() == 6);

  const SimulationReport r2 = run_monte_carlo(spec, methods, 6, 42, 8.15, 1);
  CHECK(report_to_json(r1).dump() == report_to_json(r2).dump());

  const SimulationReport r3 = run_monte_carlo(spec, methods, 6, 42, 8.15, 3);
  CHECK(report_to_json(r1).dump() == report_to_json(r3).dump());

  const SimulationReport r4 = run_monte_carlo(spec, methods, 6, 43, 8.15, 1);
  CHECK(report_to_json(r1).dump() != report_to_json(r4).dump());
}

TEST_CASE("monte carlo with M = 1 records one sample per method") {
  DgpSpec spec;
  spec.n = 60;
  const SimulationReport r = run_monte_carlo(spec, tiny_methods(), 1, 7, 0.0, 1);
  for (const auto& m : r.methods) CHECK(m.tau.size() == 1);
}

TEST_CASE("theorem 1 condition checks") {
  Vec m(4);
  m << 1.0, -2.0, 0.5, -0.1;
  CHECK(check_theorem1_condition2(m, m).sign_match_fraction == 1.0);
  CHECK(check_theorem1_condition2(m, m).magnitude_bound_fraction == 1.0);

  const Vec flipped = -m;
  CHECK(check_theorem1_condition2(flipped, m).sign_match_fraction == 0.0);
  CHECK(check_theorem1_condition2(flipped, m).magnitude_bound_fraction == 1.0);

  Vec pos(3);
  pos << 1.0, 2.0, 0.5;
  const Vec inflated = 2.5 * pos;
  CHECK(check_theorem1_condition2(inflated, pos).sign_match_fraction == 1.0);
  CHECK(check_theorem1_condition2(inflated, pos).magnitude_bound_fraction == 0.0);

  Vec z(2);
  z << 0.0, 1.0;
  Vec z2(2);
  z2 << 0.0, 2.0;
  CHECK(check_theorem1_condition2(z, z2).sign_match_fraction == 1.0);
}

TEST_CASE("logistic bias bound") {
  CHECK(std::isinf(logistic_bias_bound(0.5)));
  CHECK(logistic_bias_bound(0.1) == Catch::Approx(0.1125).epsilon(1e-12));
  for (const double g : {0.05, 0.2, 0.35, 0.49})
    CHECK(logistic_bias_bound(g) == Catch::Approx(logistic_bias_bound(1.0 - g)).epsilon(1e-12));
  CHECK_THROWS_AS(logistic_bias_bound(0.0), std::invalid_argument);
  CHECK_THROWS_AS(logistic_bias_bound(1.2), std::invalid_argument);
}

TEST_CASE("variance gap oracle: null augmentation gives zero gap") {
  DgpSpec spec;
  spec.linear_delta_reading = LinearDeltaReading::additive;
  Rng rng(1011);
  const auto zero = [](const Eigen::RowVectorXd&) { return 0.0; };
  const auto g = variance_gap_oracle(spec, zero, zero, 50000, rng);
  CHECK(g.gap == Catch::Approx(0.0).margin(1e-12));
  CHECK(g.gap_raw_moments == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("variance gap oracle: correct linear models match closed forms", "[slow]") {
  // additive linear DGP: m0 = 50 + 20 X'b0, m1 = m0 + 8.15 + X'b1
  // V(X'b0) = 7.45, V(X'b1) = 49.05, Cov(X'b0, X'b1) = 18.75 by hand, so
  //   gap (centered + cross)  = V(m0 + m1)            = 13469.05
  //   raw-moment integrand    = E[m1^2] + E[m0^2]     = 12640.4725
  DgpSpec spec;
  spec.linear_delta_reading = LinearDeltaReading::additive;
  Rng rng(1013);
  const auto m0 = [&spec](const Eigen::RowVectorXd& x) {
    return dgp::true_mean_row(x, 0, spec);
  };
  const auto m1 = [&spec](const Eigen::RowVectorXd& x) {
    return dgp::true_mean_row(x, 1, spec);
  };
  const auto g = variance_gap_oracle(spec, m0, m1, 2000000, rng);
  CHECK(g.gap == Catch::Approx(13469.05).margin(3 * g.gap_mc_se + 60.0));
  CHECK(g.gap_raw_moments ==
        Catch::Approx(12640.4725).margin(3 * g.gap_raw_moments_mc_se + 60.0));
}

TEST_CASE("simple estimator coverage stays in the 93-97 band on every DGP", "[slow]") {
  std::vector<DgpSpec> specs(4);
  specs[0].outcome = OutcomeType::continuous;
  specs[0].delta_form = DeltaForm::linear;
  specs[1].outcome = OutcomeType::continuous;
  specs[1].delta_form = DeltaForm::nonlinear;
  specs[2].outcome = OutcomeType::binary;
  specs[2].delta_form = DeltaForm::linear;
  specs[3].outcome = OutcomeType::binary;
  specs[3].delta_form = DeltaForm::nonlinear;

  MethodSpec simple;
  simple.label = "simple";
  simple.estimator = EstimatorKind::simple;

  for (auto& spec : specs) {
    spec.n = 500;
    const OracleEstimate oracle = true_ate_oracle(spec, 200000, 5);
    const SimulationReport rep =
        run_monte_carlo(spec, {simple}, 500, 20260811, oracle.tau, 2);
    INFO("outcome=" << (spec.outcome == OutcomeType::binary ? "binary" : "continuous")
                    << " delta="
                    << (spec.delta_form == DeltaForm::linear ? "linear" : "nonlinear"));
    CHECK(rep.methods[0].cp_pct >= 93.0);
    CHECK(rep.methods[0].cp_pct <= 97.0);
  }
}

TEST_CASE("efficiency direction under linear working models", "[slow]") {
  DgpSpec spec;
  spec.n = 500;
  spec.linear_delta_reading = LinearDeltaReading::additive;
  MethodSpec simple;
  simple.label = "simple";
  simple.estimator = EstimatorKind::simple;
  MethodSpec aipw_x;
  aipw_x.label = "aipw";
  aipw_x.selection.method = SelectionMethod::none;
  aipw_x.estimator = EstimatorKind::aipw;
  aipw_x.pool = PoolKind::x_only;
  const OracleEstimate oracle = true_ate_oracle(spec, 200000, 5);
  const SimulationReport rep =
      run_monte_carlo(spec, {simple, aipw_x}, 400, 99, oracle.tau, 2);
  const double gap =
      spec.n * (rep.methods[0].emp_var - rep.methods[1].emp_var);
  CHECK(gap > 0.0);
}

TEST_CASE("csv summaries contain one line per method") {
  DgpSpec spec;
  spec.n = 60;
  const SimulationReport r = run_monte_carlo(spec, tiny_methods(), 3, 5, 0.0, 1);
  const std::string csv = report_to_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 methods
  const std::string reps = replications_to_csv(r);
  CHECK(std::count(reps.begin(), reps.end(), '\n') == 7);  // header + 2*3
}
