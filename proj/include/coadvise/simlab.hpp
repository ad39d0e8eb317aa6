#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "coadvise/dataset.hpp"
#include "coadvise/estimators.hpp"
#include "coadvise/rng.hpp"
#include "coadvise/selector.hpp"

namespace coadvise {

enum class OutcomeType { continuous, binary };
enum class DeltaForm { linear, nonlinear };

// The linear treatment-effect form c1 * X'b1 has mean zero over the
// covariate law, so its population ATE is 0 rather than the nominal c1.
// Both readings are kept; `additive` uses c1 + X'b1.
enum class LinearDeltaReading { as_written, additive };

struct DgpSpec {
  OutcomeType outcome = OutcomeType::continuous;
  DeltaForm delta_form = DeltaForm::linear;
  Eigen::Index n = 500;
  std::uint64_t seed = 4399;
  LinearDeltaReading linear_delta_reading = LinearDeltaReading::as_written;

  void validate() const {
    if (n < 4) throw ConfigError("DgpSpec: n must be >= 4");
  }
  double c1() const { return outcome == OutcomeType::continuous ? 8.15 : 10.0; }
  static constexpr double c2 = 1.0;
};

namespace dgp {

inline const Eigen::VectorXd& beta0() {
  static const Eigen::VectorXd b = Eigen::VectorXd::Ones(5);
  return b;
}

inline const Eigen::VectorXd& beta1() {
  static const Eigen::VectorXd b = [] {
    Eigen::VectorXd v(5);
    v << 2, 2, 3, 3, 3;
    return v;
  }();
  return b;
}

// Sigma_V = column correlation matrix of B, B = row ramp 0.10..0.59 + 2 I.
inline const Mat& sigma_v() {
  static const Mat s = [] {
    constexpr int d = 50;
    Mat B(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        B(i, j) = 0.10 + 0.01 * i + (i == j ? 2.0 : 0.0);
    Eigen::RowVectorXd mu = B.colwise().mean();
    Mat Bc = B.rowwise() - mu;
    Mat cov = Bc.transpose() * Bc / (d - 1);
    Mat corr(d, d);
    for (int i = 0; i < d; ++i) {
      corr(i, i) = 1.0;
      for (int j = 0; j < i; ++j) {
        const double c = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
        corr(i, j) = c;
        corr(j, i) = c;
      }
    }
    return corr;
  }();
  return s;
}

inline const Mat& chol_v() {
  static const Mat L = cholesky_with_jitter(sigma_v());
  return L;
}

inline double delta_row(const Eigen::RowVectorXd& x, const DgpSpec& spec) {
  if (spec.delta_form == DeltaForm::linear) {
    const double xb1 = x.dot(beta1());
    return spec.linear_delta_reading == LinearDeltaReading::as_written
               ? spec.c1() * xb1
               : spec.c1() + xb1;
  }
  Eigen::RowVectorXd w(5);
  w << x[0] * x[0], std::sin(x[1] * x[1]), x[2] * x[3], x[3] * x[4], x[4] * x[4];
  return DgpSpec::c2 * w.dot(beta1());
}

// true conditional mean of Y(a) given X
inline double true_mean_row(const Eigen::RowVectorXd& x, int a, const DgpSpec& spec) {
  const double base = 20.0 * x.dot(beta0());
  const double d = delta_row(x, spec);
  if (spec.outcome == OutcomeType::continuous) return 50.0 + base + a * d;
  const double eta = base + a * (3.0 + d);
  return 1.0 / (1.0 + std::exp(-eta));
}

}  // namespace dgp

// (X1,X2) bivariate normal with correlation 0.8; X3 standard normal; X4
// Student t(10); X5 = Bin(10, 0.2) - 2; V 50-dim normal with mean 1 and
// covariance Sigma_V. Row-wise draw order is fixed for reproducibility.
inline void gen_covariates(Eigen::Index n, Rng& rng, Mat& X, Mat& V) {
  X.resize(n, 5);
  V.resize(n, 50);
  const Mat& L = dgp::chol_v();
  Eigen::VectorXd z(50);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z1 = rng.normal(), z2 = rng.normal();
    X(i, 0) = z1;
    X(i, 1) = 0.8 * z1 + 0.6 * z2;
    X(i, 2) = rng.normal();
    X(i, 3) = rng.student_t(10);
    X(i, 4) = rng.binomial(10, 0.2) - 2.0;
    for (int j = 0; j < 50; ++j) z[j] = rng.normal();
    V.row(i) = (Eigen::VectorXd::Ones(50) + L * z).transpose();
  }
}

// Continuous outcomes share one noise draw across the two potential
// outcomes; binary outcomes draw the two Bernoullis independently.
inline void gen_potential_outcomes(const Mat& X, const DgpSpec& spec, Rng& rng, Vec& Y0,
                                   Vec& Y1, const Vec* delta_override = nullptr) {
  if (X.cols() != 5) throw std::invalid_argument("gen_potential_outcomes: X must have 5 columns");
  const Eigen::Index n = X.rows();
  Y0.resize(n);
  Y1.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double base = 20.0 * X.row(i).dot(dgp::beta0());
    const double d = delta_override ? (*delta_override)[i] : dgp::delta_row(X.row(i), spec);
    if (spec.outcome == OutcomeType::continuous) {
      const double eps = rng.normal();
      Y0[i] = 50.0 + base + eps;
      Y1[i] = 50.0 + base + d + eps;
    } else {
      const double e0 = 1.0 / (1.0 + std::exp(-base));
      const double e1 = 1.0 / (1.0 + std::exp(-(base + 3.0 + d)));
      Y0[i] = rng.bernoulli(e0) ? 1.0 : 0.0;
      Y1[i] = rng.bernoulli(e1) ? 1.0 : 0.0;
    }
  }
}

struct OracleEstimate {
  double tau = 0.0;
  double mc_se = 0.0;
  Eigen::Index n_big = 0;
  int reps = 0;
};

// Super-population ATE: grand mean of Y(1) - Y(0) across `reps` independent
// datasets of size n_big, with the Monte Carlo SE across datasets.
inline OracleEstimate true_ate_oracle(const DgpSpec& spec, Eigen::Index n_big, int reps) {
  spec.validate();
  if (n_big < 1 || reps < 1) throw ConfigError("true_ate_oracle: n_big and reps must be >= 1");
  constexpr std::uint64_t kOracleSalt = 0x0AC1EULL;
  std::vector<double> rep_means(static_cast<std::size_t>(reps));
  constexpr Eigen::Index block = 1 << 16;
  for (int r = 0; r < reps; ++r) {
    Rng rng = Rng::stream(derive_seed(spec.seed, kOracleSalt), static_cast<std::uint64_t>(r));
    double sum = 0.0;
    Eigen::Index done = 0;
    Mat X, Vn;
    Vec y0, y1;
    while (done < n_big) {
      const Eigen::Index m = std::min(block, n_big - done);
      X.resize(m, 5);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double z1 = rng.normal(), z2 = rng.normal();
        X(i, 0) = z1;
        X(i, 1) = 0.8 * z1 + 0.6 * z2;
        X(i, 2) = rng.normal();
        X(i, 3) = rng.student_t(10);
        X(i, 4) = rng.binomial(10, 0.2) - 2.0;
      }
      gen_potential_outcomes(X, spec, rng, y0, y1);
      sum += (y1 - y0).sum();
      done += m;
    }
    rep_means[static_cast<std::size_t>(r)] = sum / static_cast<double>(n_big);
  }
  OracleEstimate out;
  out.n_big = n_big;
  out.reps = reps;
  double m = 0.0;
  for (const double v : rep_means) m += v;
  m /= reps;
  out.tau = m;
  if (reps > 1) {
    double ss = 0.0;
    for (const double v : rep_means) ss += (v - m) * (v - m);
    out.mc_se = std::sqrt(ss / (reps - 1) / reps);
  }
  return out;
}

// ---- Monte Carlo study -----------------------------------------------------

enum class PoolKind { x_and_v, x_only };

struct MethodSpec {
  std::string label;
  SelectionSpec selection;
  EstimatorKind estimator = EstimatorKind::simple;
  LinkFamily link1{Link::identity}, link0{Link::identity};
  PoolKind pool = PoolKind::x_and_v;
};

struct MethodReport {
  std::string label;
  std::vector<double> tau;         // one per replication (NaN on failure)
  std::vector<std::uint8_t> se_ok;
  std::vector<std::uint8_t> covered;
  std::vector<std::uint8_t> rejected;
  double cp_pct = 0.0;
  double power_pct = 0.0;
  double na_rate_pct = 0.0;
  double bias_mean = 0.0;
  double bias_median = 0.0;
  double emp_var = 0.0;
  double emp_sd = 0.0;
};

struct SimulationReport {
  DgpSpec spec;
  double oracle_tau = 0.0;
  std::uint64_t master_seed = 0;
  int M = 0;
  std::vector<MethodReport> methods;
};

namespace detail {

struct RepRecord {
  double tau = std::numeric_limits<double>::quiet_NaN();
  std::uint8_t se_ok = 0, covered = 0, rejected = 0;
};

inline AteEstimate run_method_once(const MethodSpec& m, const BinaryTrial& trial,
                                   std::uint64_t sel_seed) {
  if (m.estimator == EstimatorKind::simple)
    return simple_estimator(trial.A, trial.Y);

  SelectionSpec sel = m.selection;
  sel.seed = sel_seed;
  const SelectionResult s = select(sel, trial);

  const auto subset = [&](const std::vector<Eigen::Index>& idx) {
    Mat Xs(trial.n_rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Xs.col(static_cast<Eigen::Index>(k)) = trial.X.col(idx[k]);
    return Xs;
  };

  switch (m.estimator) {
    case EstimatorKind::ancova:
      return ancova(trial.A, trial.Y, subset(s.pooled));
    case EstimatorKind::anhecova:
      return anhecova(trial.A, trial.Y, subset(s.pooled));
    case EstimatorKind::aipw:
      return aipw(trial.A, trial.Y, subset(s.per_arm[1]), subset(s.per_arm[0]), m.link1,
                  m.link0)
          .estimate;
    default:
      break;
  }
  throw ConfigError("run_method_once: unknown estimator");
}

}  // namespace detail

// M replications, each on an independent stream derived from
// (master_seed, r). Replication slots are preallocated so aggregation is
// identical for any worker count.
inline SimulationReport run_monte_carlo(const DgpSpec& spec,
                                        const std::vector<MethodSpec>& methods, int M,
                                        std::uint64_t master_seed, double oracle_tau,
                                        int n_workers = 1) {
  spec.validate();
  if (M < 1) throw ConfigError("run_monte_carlo: M must be >= 1");
  const std::size_t nm = methods.size();

  std::vector<std::vector<detail::RepRecord>> slots(
      nm, std::vector<detail::RepRecord>(static_cast<std::size_t>(M)));

  static const std::vector<std::string> pool_names = [] {
    std::vector<std::string> v;
    for (int j = 1; j <= 5; ++j) v.push_back("x" + std::to_string(j));
    for (int j = 1; j <= 50; ++j) v.push_back("v" + std::to_string(j));
    return v;
  }();

  const auto run_rep = [&](int r) {
    Rng rng = Rng::stream(master_seed, static_cast<std::uint64_t>(r));
    Mat X, V;
    gen_covariates(spec.n, rng, X, V);
    Vec y0, y1;
    gen_potential_outcomes(X, spec, rng, y0, y1);
    Eigen::VectorXi A(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) A[i] = rng.bernoulli(0.5) ? 1 : 0;
    Vec Y(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) Y[i] = A[i] ? y1[i] : y0[i];

    BinaryTrial full;  // X and V
    full.A = A;
    full.Y = Y;
    full.Y_observed = BoolVec::Constant(spec.n, 1);
    full.X.resize(spec.n, 55);
    full.X.leftCols(5) = X;
    full.X.rightCols(50) = V;
    full.X_observed = BoolMat::Constant(spec.n, 55, 1);
    full.covariate_names = pool_names;

    BinaryTrial xonly;
    xonly.A = A;
    xonly.Y = Y;
    xonly.Y_observed = full.Y_observed;
    xonly.X = X;
    xonly.X_observed = BoolMat::Constant(spec.n, 5, 1);
    xonly.covariate_names = {pool_names.begin(), pool_names.begin() + 5};

    for (std::size_t m = 0; m < nm; ++m) {
      detail::RepRecord rec;
      try {
        const BinaryTrial& trial = methods[m].pool == PoolKind::x_only ? xonly : full;
        const std::uint64_t sel_seed =
            derive_seed(derive_seed(master_seed, static_cast<std::uint64_t>(r)),
                        0x5E1ULL + m);
        const AteEstimate e = detail::run_method_once(methods[m], trial, sel_seed);
        rec.tau = e.tau_hat;
        if (e.se) {
          rec.se_ok = 1;
          rec.covered = (*e.ci_low <= oracle_tau && oracle_tau <= *e.ci_high) ? 1 : 0;
          rec.rejected = (*e.p_value <= 0.05) ? 1 : 0;
        }
      } catch (const std::exception&) {
        // replication-level failure recorded as NA
      }
      slots[m][static_cast<std::size_t>(r)] = rec;
    }
  };

  if (n_workers <= 1) {
    for (int r = 0; r < M; ++r) run_rep(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < n_workers; ++t)
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < M; r = next.fetch_add(1)) run_rep(r);
      });
    for (auto& th : pool) th.join();
  }

  SimulationReport rep;
  rep.spec = spec;
  rep.oracle_tau = oracle_tau;
  rep.master_seed = master_seed;
  rep.M = M;
  for (std::size_t m = 0; m < nm; ++m) {
    MethodReport mr;
    mr.label = methods[m].label;
    mr.tau.reserve(static_cast<std::size_t>(M));
    int n_cov = 0, n_rej = 0, n_na = 0;
    std::vector<double> finite;
    for (const auto& rec : slots[m]) {
      mr.tau.push_back(rec.tau);
      mr.se_ok.push_back(rec.se_ok);
      mr.covered.push_back(rec.covered);
      mr.rejected.push_back(rec.rejected);
      if (!rec.se_ok) ++n_na;
      n_cov += rec.covered;
      n_rej += rec.rejected;
      if (std::isfinite(rec.tau)) finite.push_back(rec.tau);
    }
    mr.cp_pct = 100.0 * n_cov / M;
    mr.power_pct = 100.0 * n_rej / M;
    mr.na_rate_pct = 100.0 * n_na / M;
    if (!finite.empty()) {
      double s = 0.0;
      for (const double v : finite) s += v;
      const double mean_tau = s / static_cast<double>(finite.size());
      mr.bias_mean = mean_tau - oracle_tau;
      std::vector<double> sorted = finite;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t h = sorted.size() / 2;
      mr.bias_median = (sorted.size() % 2 ? sorted[h]
                                          : 0.5 * (sorted[h - 1] + sorted[h])) -
                       oracle_tau;
      if (finite.size() > 1) {
        double ss = 0.0;
        for (const double v : finite) ss += (v - mean_tau) * (v - mean_tau);
        mr.emp_var = ss / static_cast<double>(finite.size() - 1);
        mr.emp_sd = std::sqrt(mr.emp_var);
      }
    }
    rep.methods.push_back(std::move(mr));
  }
  return rep;
}

// ---- diagnostics for the efficiency-gain theory ----------------------------

struct Theorem1Check {
  double sign_match_fraction = 0.0;
  double magnitude_bound_fraction = 0.0;
};

// (a) sign of the fitted mean matches the true conditional mean (zero
// matches zero); (b) |fitted| <= 2 |true|.
inline Theorem1Check check_theorem1_condition2(const Vec& fit_means,
                                               const Vec& true_means) {
  if (fit_means.size() != true_means.size())
    throw std::invalid_argument("check_theorem1_condition2: size mismatch");
  const Eigen::Index n = fit_means.size();
  if (n == 0) throw std::invalid_argument("check_theorem1_condition2: empty input");
  Eigen::Index sign_ok = 0, mag_ok = 0;
  const auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sgn(fit_means[i]) == sgn(true_means[i])) ++sign_ok;
    if (std::fabs(fit_means[i]) <= 2.0 * std::fabs(true_means[i])) ++mag_ok;
  }
  Theorem1Check c;
  c.sign_match_fraction = static_cast<double>(sign_ok) / static_cast<double>(n);
  c.magnitude_bound_fraction = static_cast<double>(mag_ok) / static_cast<double>(n);
  return c;
}

// Absolute-bias bound g(1-g)/|1-2g| for logistic working models; infinite
// at g = 1/2.
inline double logistic_bias_bound(double g) {
  if (!(g > 0.0 && g < 1.0))
    throw std::invalid_argument("logistic_bias_bound: g must be in (0,1)");
  if (g == 0.5) return std::numeric_limits<double>::infinity();
  return g * (1.0 - g) / std::fabs(1.0 - 2.0 * g);
}

struct VarianceGapEstimate {
  // V_simple - V_aipw of the implemented (arm-proportion) estimators
  double gap = 0.0;
  double gap_mc_se = 0.0;
  // the raw-moment integrand (1-pi)/pi E{g1(2m1-g1)} + pi/(1-pi) E{g0(2m0-g0)}
  double gap_raw_moments = 0.0;
  double gap_raw_moments_mc_se = 0.0;
};

// Monte Carlo evaluation over fresh covariate draws, pi = 1/2. `gap` is the
// exact asymptotic-variance difference of the estimators as implemented,
//   sum_a Cov(g_a, 2 m_a - g_a) + 2[Cov(m1,g0) + Cov(m0,g1) - Cov(g1,g0)],
// which is what N (Var_simple - Var_aipw) from run_monte_carlo converges to.
// `gap_raw_moments` evaluates the same integrands with uncentered moments
// and no cross-arm term; the two coincide only in special cases, so both
// are reported. Batch means provide the MC standard errors.
inline VarianceGapEstimate variance_gap_oracle(
    const DgpSpec& spec, const std::function<double(const Eigen::RowVectorXd&)>& g0,
    const std::function<double(const Eigen::RowVectorXd&)>& g1, Eigen::Index n_mc,
    Rng& rng) {
  spec.validate();
  constexpr int kBatches = 50;
  const Eigen::Index per_batch = std::max<Eigen::Index>(n_mc / kBatches, 16);
  std::vector<double> batch_gap(kBatches), batch_raw(kBatches);

  Eigen::RowVectorXd x(5);
  for (int b = 0; b < kBatches; ++b) {
    double s_m0 = 0, s_m1 = 0, s_g0 = 0, s_g1 = 0;
    double s_m0m0 = 0, s_m1m1 = 0, s_g0g0 = 0, s_g1g1 = 0;
    double s_m1g1 = 0, s_m0g0 = 0, s_m1g0 = 0, s_m0g1 = 0, s_g1g0 = 0;
    for (Eigen::Index i = 0; i < per_batch; ++i) {
      const double z1 = rng.normal(), z2 = rng.normal();
      x[0] = z1;
      x[1] = 0.8 * z1 + 0.6 * z2;
      x[2] = rng.normal();
      x[3] = rng.student_t(10);
      x[4] = rng.binomial(10, 0.2) - 2.0;
      const double m0 = dgp::true_mean_row(x, 0, spec);
      const double m1 = dgp::true_mean_row(x, 1, spec);
      const double v0 = g0(x), v1 = g1(x);
      s_m0 += m0; s_m1 += m1; s_g0 += v0; s_g1 += v1;
      s_m0m0 += m0 * m0; s_m1m1 += m1 * m1;
      s_g0g0 += v0 * v0; s_g1g1 += v1 * v1;
      s_m1g1 += m1 * v1; s_m0g0 += m0 * v0;
      s_m1g0 += m1 * v0; s_m0g1 += m0 * v1;
      s_g1g0 += v1 * v0;
    }
    const double n = static_cast<double>(per_batch);
    const auto cov = [&](double sxy, double sx, double sy) {
      return sxy / n - (sx / n) * (sy / n);
    };
    const double cov_g1_m1 = cov(s_m1g1, s_g1, s_m1);
    const double cov_g0_m0 = cov(s_m0g0, s_g0, s_m0);
    const double var_g1 = cov(s_g1g1, s_g1, s_g1);
    const double var_g0 = cov(s_g0g0, s_g0, s_g0);
    const double cov_m1_g0 = cov(s_m1g0, s_m1, s_g0);
    const double cov_m0_g1 = cov(s_m0g1, s_m0, s_g1);
    const double cov_g1_g0 = cov(s_g1g0, s_g1, s_g0);
    // pi = 1/2: both prefactors are 1
    batch_gap[b] = (2.0 * cov_g1_m1 - var_g1) + (2.0 * cov_g0_m0 - var_g0) +
                   2.0 * (cov_m1_g0 + cov_m0_g1 - cov_g1_g0);
    batch_raw[b] = (2.0 * s_m1g1 - s_g1g1) / n + (2.0 * s_m0g0 - s_g0g0) / n;
  }

  VarianceGapEstimate out;
  const auto mean_se = [&](const std::vector<double>& v, double& m, double& se) {
    m = 0.0;
    for (const double b : v) m += b;
    m /= v.size();
    double ss = 0.0;
    for (const double b : v) ss += (b - m) * (b - m);
    se = std::sqrt(ss / (v.size() - 1) / v.size());
  };
  mean_se(batch_gap, out.gap, out.gap_mc_se);
  mean_se(batch_raw, out.gap_raw_moments, out.gap_raw_moments_mc_se);
  return out;
}

// Convenience adapter: evaluate a fitted GLM on the 5-column covariate row.
inline std::function<double(const Eigen::RowVectorXd&)> predictor_from_fit(
    const GlmFit& fit) {
  return [fit](const Eigen::RowVectorXd& x) {
    double eta = fit.beta[0];
    for (Eigen::Index j = 0; j + 1 < fit.beta.size(); ++j) eta += fit.beta[j + 1] * x[j];
    return fit.link.mean(eta);
  };
}

// ---- report serialization ---------------------------------------------------

inline nlohmann::json report_to_json(const SimulationReport& rep) {
  nlohmann::json j;
  j["outcome"] = rep.spec.outcome == OutcomeType::continuous ? "continuous" : "binary";
  j["delta"] = rep.spec.delta_form == DeltaForm::linear ? "linear" : "nonlinear";
  j["linear_delta_reading"] =
      rep.spec.linear_delta_reading == LinearDeltaReading::as_written ? "as_written"
                                                                      : "additive";
  j["n"] = rep.spec.n;
  j["M"] = rep.M;
  j["master_seed"] = rep.master_seed;
  j["oracle_tau"] = rep.oracle_tau;
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : rep.methods) {
    nlohmann::json mj;
    mj["label"] = m.label;
    mj["cp_pct"] = m.cp_pct;
    mj["power_pct"] = m.power_pct;
    mj["na_rate_pct"] = m.na_rate_pct;
    mj["bias_mean"] = m.bias_mean;
    mj["bias_median"] = m.bias_median;
    mj["emp_sd"] = m.emp_sd;
    mj["emp_var"] = m.emp_var;
    nlohmann::json taus = nlohmann::json::array();
    for (const double t : m.tau) {
      if (std::isfinite(t))
        taus.push_back(t);
      else
        taus.push_back(nullptr);
    }
    mj["tau"] = taus;
    methods.push_back(std::move(mj));
  }
  j["methods"] = methods;
  return j;
}

inline std::string report_to_csv(const SimulationReport& rep) {
  std::string out =
      "method,bias_mean,bias_median,emp_sd,cp_pct,power_pct,na_rate_pct\n";
  char buf[256];
  for (const auto& m : rep.methods) {
    std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  m.label.c_str(), m.bias_mean, m.bias_median, m.emp_sd, m.cp_pct,
                  m.power_pct, m.na_rate_pct);
    out += buf;
  }
  return out;
}

inline std::string replications_to_csv(const SimulationReport& rep) {
  std::string out = "rep,method,tau,se_available,covered,rejected\n";
  char buf[256];
  for (std::size_t m = 0; m < rep.methods.size(); ++m) {
    const auto& mr = rep.methods[m];
    for (std::size_t r = 0; r < mr.tau.size(); ++r) {
      if (std::isfinite(mr.tau[r]))
        std::snprintf(buf, sizeof(buf), "%zu,%s,%.17g,%d,%d,%d\n", r, mr.label.c_str(),
                      mr.tau[r], static_cast<int>(mr.se_ok[r]),
                      static_cast<int>(mr.covered[r]), static_cast<int>(mr.rejected[r]));
      else
        std::snprintf(buf, sizeof(buf), "%zu,%s,NA,%d,%d,%d\n", r, mr.label.c_str(),
                      static_cast<int>(mr.se_ok[r]), static_cast<int>(mr.covered[r]),
                      static_cast<int>(mr.rejected[r]));
      out += buf;
    }
  }
  return out;
}

}  // namespace coadvise
