#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coadvise/errors.hpp"
#include "coadvise/glm.hpp"
#include "coadvise/stats.hpp"

namespace coadvise {

enum class EstimatorKind { simple, ancova, anhecova, aipw };

inline std::string estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::simple: return "Simple";
    case EstimatorKind::ancova: return "ANCOVA";
    case EstimatorKind::anhecova: return "ANHECOVA";
    case EstimatorKind::aipw: return "AIPW";
  }
  return "?";
}

struct Diagnostics {
  bool rank_deficient = false;
  bool negative_variance = false;
  bool glm_nonconverged = false;
  bool insufficient_data = false;

  bool any() const {
    return rank_deficient || negative_variance || glm_nonconverged || insufficient_data;
  }
};

// Point estimate with Wald interval; se (and then ci/p) may be unavailable,
// in which case at least one diagnostic flag explains why.
struct AteEstimate {
  EstimatorKind method = EstimatorKind::simple;
  double tau_hat = 0.0;
  std::optional<double> se;
  std::optional<double> ci_low, ci_high;
  std::optional<double> p_value;
  double conf_level = 0.95;
  Diagnostics diag;
};

struct PotentialMeans {
  Vec theta;  // estimated mean outcome per arm
  Mat sigma;  // covariance estimate of theta-hat (V-hat / N)
  bool negative_diag = false;
};

namespace detail {

inline void finalize_wald(AteEstimate& e, double variance) {
  if (!std::isfinite(variance) || variance < 0.0) {
    e.diag.negative_variance = true;
    e.se.reset();
    return;
  }
  const double se = std::sqrt(variance);
  const double z = normal_quantile(0.5 + 0.5 * e.conf_level);
  e.se = se;
  e.ci_low = e.tau_hat - z * se;
  e.ci_high = e.tau_hat + z * se;
  if (se > 0.0)
    e.p_value = two_sided_p_from_z(e.tau_hat / se);
  else
    e.p_value = e.tau_hat == 0.0 ? 1.0 : 0.0;
}

struct ArmView {
  Vec y;
  Vec w;
  Eigen::Index n = 0;
};

inline ArmView arm_view(const Eigen::VectorXi& A, const Vec& Y, const Vec& w, int a) {
  ArmView v;
  v.n = (A.array() == a).count();
  v.y.resize(v.n);
  v.w.resize(v.n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < A.size(); ++i)
    if (A[i] == a) {
      v.y[k] = Y[i];
      v.w[k] = w[i];
      ++k;
    }
  return v;
}

}  // namespace detail

// Difference of (weighted) arm means with the Neyman variance
// S1^2/N1 + S0^2/N0; weighted runs use Kish effective sample sizes.
inline AteEstimate simple_estimator(const Eigen::VectorXi& A, const Vec& Y,
                                    const std::optional<Vec>& row_weights = std::nullopt,
                                    double conf_level = 0.95) {
  if (A.size() != Y.size()) throw std::invalid_argument("simple_estimator: size mismatch");
  const Vec w = row_weights ? *row_weights : Vec::Ones(Y.size());
  const auto a1 = detail::arm_view(A, Y, w, 1);
  const auto a0 = detail::arm_view(A, Y, w, 0);
  if (a1.n == 0 || a0.n == 0) throw DataError("simple_estimator: empty arm");
  if (a1.w.sum() <= 0.0 || a0.w.sum() <= 0.0)
    throw DataError("simple_estimator: zero weighted arm total");

  AteEstimate e;
  e.method = EstimatorKind::simple;
  e.conf_level = conf_level;
  e.tau_hat = weighted_mean(a1.y, a1.w) - weighted_mean(a0.y, a0.w);
  if (a1.n < 2 || a0.n < 2) {
    e.diag.insufficient_data = true;
    return e;
  }
  const double neff1 = effective_sample_size(a1.w);
  const double neff0 = effective_sample_size(a0.w);
  if (neff1 <= 1.0 || neff0 <= 1.0) {
    e.diag.insufficient_data = true;
    return e;
  }
  const double v1 = weighted_variance(a1.y, a1.w);
  const double v0 = weighted_variance(a0.y, a0.w);
  detail::finalize_wald(e, v1 / neff1 + v0 / neff0);
  return e;
}

namespace detail {

// Huber-White covariance (V'WV)^-1 V'W diag(e^2) W V (V'WV)^-1 of a
// (weighted) least-squares fit; returns the requested diagonal entry.
struct SandwichFit {
  Vec beta;
  bool rank_deficient = false;
  std::optional<double> var_entry;
};

inline SandwichFit wls_sandwich(const Mat& V, const Vec& y, const Vec& w,
                                Eigen::Index entry) {
  SandwichFit out;
  const Vec s = w.array().sqrt();
  Mat Vw = V;
  Vw.array().colwise() *= s.array();
  Vec yw = y.array() * s.array();
  out.beta = solve_min_norm(Vw, yw, &out.rank_deficient);
  if (out.rank_deficient) return out;

  const Vec resid = y - V * out.beta;
  const Mat bread = Vw.transpose() * Vw;  // V'WV
  Eigen::LDLT<Mat> ldlt(bread);
  if (ldlt.info() != Eigen::Success) {
    out.rank_deficient = true;
    return out;
  }
  const Mat bread_inv = ldlt.solve(Mat::Identity(V.cols(), V.cols()));
  const Vec m = (w.array() * resid.array()).square();  // (w_i e_i)^2
  const Mat meat = V.transpose() * m.asDiagonal() * V;
  const Mat cov = bread_inv * meat * bread_inv;
  const double v = cov(entry, entry);
  if (std::isfinite(v))
    out.var_entry = v;
  else
    out.rank_deficient = true;
  return out;
}

inline Mat weighted_col_cov(const Mat& X, const Vec& w) {
  const Eigen::Index p = X.cols();
  const double sw = w.sum();
  const double neff = effective_sample_size(w);
  Eigen::RowVectorXd mu = (w.transpose() * X) / sw;
  Mat Xc = X.rowwise() - mu;
  Mat S = Xc.transpose() * (w.asDiagonal() * Xc) / sw;
  return S * (neff / (neff - 1.0));
}

}  // namespace detail

// ANCOVA: OLS of Y on (1, A, X); tau is the A coefficient, variance from the
// HW sandwich. A rank-deficient bread ends with tau reported and se NA.
inline AteEstimate ancova(const Eigen::VectorXi& A, const Vec& Y, const Mat& X_sel,
                          const std::optional<Vec>& row_weights = std::nullopt,
                          double conf_level = 0.95) {
  const Eigen::Index n = Y.size();
  if ((A.array() == 1).count() == 0 || (A.array() == 0).count() == 0)
    throw DataError("ancova: empty arm");
  const Vec w = row_weights ? *row_weights : Vec::Ones(n);
  Mat V(n, 2 + X_sel.cols());
  V.col(0).setOnes();
  V.col(1) = A.cast<double>();
  if (X_sel.cols() > 0) V.rightCols(X_sel.cols()) = X_sel;

  const auto fit = detail::wls_sandwich(V, Y, w, 1);
  AteEstimate e;
  e.method = EstimatorKind::ancova;
  e.conf_level = conf_level;
  e.tau_hat = fit.beta[1];
  e.diag.rank_deficient = fit.rank_deficient;
  if (fit.var_entry)
    detail::finalize_wald(e, *fit.var_entry);
  return e;
}

// ANHECOVA: OLS of Y on (1, A, X, A(X - Xbar)); the sandwich gains the
// super-population correction (a1-a0)' S_X^2 (a1-a0) / N from the per-arm
// regressions of Y on (1, X).
inline AteEstimate anhecova(const Eigen::VectorXi& A, const Vec& Y, const Mat& X_sel,
                            const std::optional<Vec>& row_weights = std::nullopt,
                            double conf_level = 0.95) {
  const Eigen::Index n = Y.size();
  const Eigen::Index p = X_sel.cols();
  const Eigen::Index n1 = (A.array() == 1).count();
  const Eigen::Index n0 = n - n1;
  if (n1 < 2 || n0 < 2) throw DataError("anhecova: both arms need >= 2 rows");
  const Vec w = row_weights ? *row_weights : Vec::Ones(n);

  AteEstimate e;
  e.method = EstimatorKind::anhecova;
  e.conf_level = conf_level;

  if (p == 0) {
    // no adjustment: plain two-group regression
    Mat V(n, 2);
    V.col(0).setOnes();
    V.col(1) = A.cast<double>();
    const auto fit = detail::wls_sandwich(V, Y, w, 1);
    e.tau_hat = fit.beta[1];
    e.diag.rank_deficient = fit.rank_deficient;
    if (fit.var_entry) detail::finalize_wald(e, *fit.var_entry);
    return e;
  }

  const double sw = w.sum();
  Eigen::RowVectorXd xbar = (w.transpose() * X_sel) / sw;
  Mat V(n, 2 + 2 * p);
  V.col(0).setOnes();
  V.col(1) = A.cast<double>();
  V.middleCols(2, p) = X_sel;
  V.rightCols(p) = (X_sel.rowwise() - xbar).array().colwise() * A.cast<double>().array();

  const auto fit = detail::wls_sandwich(V, Y, w, 1);
  e.tau_hat = fit.beta[1];
  e.diag.rank_deficient = fit.rank_deficient;
  if (!fit.var_entry) return e;

  // per-arm slope estimates for the correction term
  Vec alpha_diff(p);
  {
    Mat Xa[2];
    Vec ya[2], wa[2];
    for (int a = 0; a <= 1; ++a) {
      const Eigen::Index na = a == 1 ? n1 : n0;
      Xa[a].resize(na, p + 1);
      ya[a].resize(na);
      wa[a].resize(na);
      Eigen::Index k = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (A[i] == a) {
          Xa[a](k, 0) = 1.0;
          Xa[a].row(k).tail(p) = X_sel.row(i);
          ya[a][k] = Y[i];
          wa[a][k] = w[i];
          ++k;
        }
    }
    GlmFit f1 = ols_fit(Xa[1], ya[1], wa[1]);
    GlmFit f0 = ols_fit(Xa[0], ya[0], wa[0]);
    if (f1.rank_deficient || f0.rank_deficient) {
      e.diag.rank_deficient = true;
      return e;
    }
    alpha_diff = f1.beta.tail(p) - f0.beta.tail(p);
  }
  const Mat sx2 = detail::weighted_col_cov(X_sel, w);
  const double neff = effective_sample_size(w);
  const double correction = alpha_diff.dot(sx2 * alpha_diff) / neff;
  detail::finalize_wald(e, *fit.var_entry + correction);
  return e;
}

// ---- AIPW ----------------------------------------------------------------

namespace detail {

struct WeightedArmMoments {
  double sw = 0.0;       // sum of weights in the arm
  double neff = 0.0;     // effective n in the arm
};

// Sample moments for the AIPW variance. Within-arm variances/covariances use
// only that arm's rows; variances of model predictions use all rows.
struct AipwMoments {
  Vec theta;
  Mat vhat;   // asymptotic covariance of sqrt(N)(theta-hat - theta)
  bool ok = true;
};

inline double wvar(const Vec& x, const Vec& w) { return weighted_variance(x, w); }
inline double wcov(const Vec& x, const Vec& y, const Vec& w) {
  return weighted_covariance(x, y, w);
}

// arm: per-row arm index in 0..K-1; mu: n x K matrix of model predictions.
inline AipwMoments aipw_moments(const Eigen::VectorXi& arm, const Vec& Y, const Mat& mu,
                                const Vec& w) {
  const Eigen::Index n = Y.size();
  const Eigen::Index K = mu.cols();
  AipwMoments m;
  m.theta.resize(K);
  m.vhat.resize(K, K);

  const double sw_total = w.sum();
  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(K));
  for (Eigen::Index i = 0; i < n; ++i)
    rows[static_cast<std::size_t>(arm[i])].push_back(i);

  std::vector<Vec> ya(static_cast<std::size_t>(K)), waw(static_cast<std::size_t>(K));
  std::vector<Mat> mua(static_cast<std::size_t>(K));  // mu restricted to arm rows
  for (Eigen::Index a = 0; a < K; ++a) {
    const auto& r = rows[static_cast<std::size_t>(a)];
    if (r.size() < 2) {
      m.ok = false;
      return m;
    }
    ya[a].resize(static_cast<Eigen::Index>(r.size()));
    waw[a].resize(static_cast<Eigen::Index>(r.size()));
    mua[a].resize(static_cast<Eigen::Index>(r.size()), K);
    for (std::size_t i = 0; i < r.size(); ++i) {
      ya[a][static_cast<Eigen::Index>(i)] = Y[r[i]];
      waw[a][static_cast<Eigen::Index>(i)] = w[r[i]];
      mua[a].row(static_cast<Eigen::Index>(i)) = mu.row(r[i]);
    }
  }

  for (Eigen::Index a = 0; a < K; ++a) {
    const double sw_a = waw[a].sum();
    // theta_a = (1/N_a) sum_{arm a} w (Y - mu_a) + (1/N) sum_all w mu_a
    const double aug = (waw[a].array() * (ya[a] - mua[a].col(a)).array()).sum() / sw_a;
    const double pred = (w.array() * mu.col(a).array()).sum() / sw_total;
    m.theta[a] = aug + pred;
  }

  const double neff_total = effective_sample_size(w);
  // Residual-form sample moments: with d_a = Y - mu_a on arm-a rows,
  //   v_aa = (N/N_a) s^2_{N_a}(d_a) + 2 cov_{N_a}(d_a, mu_a) + s^2_N(mu_a)
  //   v_ab = cov_{N_a}(d_a, mu_b) + cov_{N_b}(d_b, mu_a) + cov_N(mu_a, mu_b).
  // Identical to the raw pairing in the population (expand Cov(Y_a, .) =
  // Cov(d_a, .) + Cov(mu_a, .)), but the model-level spread cancels inside
  // each term instead of across terms, which keeps the contrast variance
  // positive at realistic sample sizes.
  std::vector<Vec> da(static_cast<std::size_t>(K));
  for (Eigen::Index a = 0; a < K; ++a) da[a] = ya[a] - mua[a].col(a);
  for (Eigen::Index a = 0; a < K; ++a) {
    const double neff_a = effective_sample_size(waw[a]);
    if (neff_a <= 1.0) {
      m.ok = false;
      return m;
    }
    m.vhat(a, a) = (neff_total / neff_a) * wvar(da[a], waw[a]) +
                   2.0 * wcov(da[a], mua[a].col(a), waw[a]) + wvar(mu.col(a), w);
    for (Eigen::Index b = 0; b < a; ++b) {
      const double v = wcov(da[a], mua[a].col(b), waw[a]) +
                       wcov(da[b], mua[b].col(a), waw[b]) +
                       wcov(mu.col(a), mu.col(b), w);
      m.vhat(a, b) = v;
      m.vhat(b, a) = v;
    }
  }
  return m;
}

}  // namespace detail

struct AipwResult {
  AteEstimate estimate;
  PotentialMeans means;
  GlmFit fit1, fit0;
};

// Core of the AIPW estimator given per-arm model predictions for every row.
// mu columns are indexed by arm. Exposed separately so that externally
// fitted or degenerate models can be plugged in.
inline AipwResult aipw_from_predictions(const Eigen::VectorXi& A, const Vec& Y,
                                        const Vec& mu0, const Vec& mu1,
                                        const std::optional<Vec>& row_weights = std::nullopt,
                                        double conf_level = 0.95) {
  const Eigen::Index n = Y.size();
  const Vec w = row_weights ? *row_weights : Vec::Ones(n);
  Mat mu(n, 2);
  mu.col(0) = mu0;
  mu.col(1) = mu1;
  const auto m = detail::aipw_moments(A, Y, mu, w);

  AipwResult r;
  r.estimate.method = EstimatorKind::aipw;
  r.estimate.conf_level = conf_level;
  if (!m.ok) {
    // arm means still defined when each arm is nonempty
    const auto a1 = detail::arm_view(A, Y, w, 1);
    const auto a0 = detail::arm_view(A, Y, w, 0);
    if (a1.n == 0 || a0.n == 0) throw DataError("aipw: empty arm");
    r.estimate.tau_hat = weighted_mean(a1.y, a1.w) - weighted_mean(a0.y, a0.w);
    r.estimate.diag.insufficient_data = true;
    return r;
  }

  const double neff_total = effective_sample_size(w);
  r.means.theta = m.theta;
  r.means.sigma = m.vhat / neff_total;
  if (r.means.sigma(0, 0) < 0.0 || r.means.sigma(1, 1) < 0.0)
    r.means.negative_diag = true;

  r.estimate.tau_hat = m.theta[1] - m.theta[0];
  const double var_tau = (m.vhat(1, 1) - 2.0 * m.vhat(1, 0) + m.vhat(0, 0)) / neff_total;
  if (var_tau <= 0.0) {
    r.estimate.diag.negative_variance = true;
    return r;
  }
  detail::finalize_wald(r.estimate, var_tau);
  return r;
}

// AIPW with per-arm GLM working models refit on the selected covariates.
inline AipwResult aipw(const Eigen::VectorXi& A, const Vec& Y, const Mat& X_sel_arm1,
                       const Mat& X_sel_arm0, LinkFamily link1, LinkFamily link0,
                       const std::optional<Vec>& row_weights = std::nullopt,
                       double conf_level = 0.95) {
  const Eigen::Index n = Y.size();
  const Eigen::Index n1 = (A.array() == 1).count();
  const Eigen::Index n0 = n - n1;
  if (n1 == 0 || n0 == 0) throw DataError("aipw: empty arm");
  const Vec w = row_weights ? *row_weights : Vec::Ones(n);

  bool small_arm = false;
  GlmFit fits[2];
  Vec mu[2];
  const Mat* Xsel[2] = {&X_sel_arm0, &X_sel_arm1};
  const LinkFamily links[2] = {link0, link1};
  for (int a = 0; a <= 1; ++a) {
    const Eigen::Index na = a == 1 ? n1 : n0;
    const Eigen::Index pa = Xsel[a]->cols();
    if (na < pa + 1) small_arm = true;
    Mat D(na, pa + 1);
    Vec ya(na), wa(na);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (A[i] == a) {
        D(k, 0) = 1.0;
        if (pa > 0) D.row(k).tail(pa) = Xsel[a]->row(i);
        ya[k] = Y[i];
        wa[k] = w[i];
        ++k;
      }
    fits[a] = irls_fit(D, ya, links[a], wa);
    Mat Dall(n, pa + 1);
    Dall.col(0).setOnes();
    if (pa > 0) Dall.rightCols(pa) = *Xsel[a];
    mu[a] = predict_mean(fits[a], Dall);
  }

  AipwResult r = aipw_from_predictions(A, Y, mu[0], mu[1], w, conf_level);
  r.fit0 = fits[0];
  r.fit1 = fits[1];
  if (fits[0].rank_deficient || fits[1].rank_deficient || small_arm)
    r.estimate.diag.rank_deficient = true;
  if (!fits[0].converged || !fits[1].converged) {
    r.estimate.diag.glm_nonconverged = true;
    r.estimate.se.reset();
    r.estimate.ci_low.reset();
    r.estimate.ci_high.reset();
    r.estimate.p_value.reset();
  }
  return r;
}

struct MultiArmResult {
  PotentialMeans means;
  std::vector<GlmFit> fits;
  bool glm_nonconverged = false;
  bool rank_deficient = false;

  // pairwise contrast theta_a - theta_b from the stored covariance
  AteEstimate contrast(Eigen::Index a, Eigen::Index b, double conf_level = 0.95) const {
    AteEstimate e;
    e.method = EstimatorKind::aipw;
    e.conf_level = conf_level;
    if (a == b) {
      e.tau_hat = 0.0;
      detail::finalize_wald(e, 0.0);
      return e;
    }
    e.tau_hat = means.theta[a] - means.theta[b];
    e.diag.glm_nonconverged = glm_nonconverged;
    e.diag.rank_deficient = rank_deficient;
    if (glm_nonconverged) return e;
    const double var = means.sigma(a, a) - 2.0 * means.sigma(a, b) + means.sigma(b, b);
    if (var <= 0.0) {
      e.diag.negative_variance = true;
      return e;
    }
    detail::finalize_wald(e, var);
    return e;
  }
};

// K-arm potential means: theta-hat and the full covariance matrix, using the
// same per-arm working-model construction as the binary AIPW.
inline MultiArmResult potential_means_multiarm(
    const Eigen::VectorXi& arm, const Vec& Y, const std::vector<Mat>& X_sel_per_arm,
    const std::vector<LinkFamily>& links,
    const std::optional<Vec>& row_weights = std::nullopt) {
  const Eigen::Index n = Y.size();
  const Eigen::Index K = static_cast<Eigen::Index>(X_sel_per_arm.size());
  if (K < 2) throw std::invalid_argument("potential_means_multiarm: need K >= 2 arms");
  if (static_cast<Eigen::Index>(links.size()) != K)
    throw std::invalid_argument("potential_means_multiarm: one link per arm");
  if (arm.minCoeff() < 0 || arm.maxCoeff() >= K)
    throw std::invalid_argument("potential_means_multiarm: arm label out of range");
  const Vec w = row_weights ? *row_weights : Vec::Ones(n);

  MultiArmResult r;
  r.fits.resize(static_cast<std::size_t>(K));
  Mat mu(n, K);
  for (Eigen::Index a = 0; a < K; ++a) {
    const Eigen::Index na = (arm.array() == static_cast<int>(a)).count();
    if (na < 2) throw DataError("potential_means_multiarm: arm too small");
    const Eigen::Index pa = X_sel_per_arm[static_cast<std::size_t>(a)].cols();
    Mat D(na, pa + 1);
    Vec ya(na), wa(na);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (arm[i] == static_cast<int>(a)) {
        D(k, 0) = 1.0;
        if (pa > 0) D.row(k).tail(pa) = X_sel_per_arm[static_cast<std::size_t>(a)].row(i);
        ya[k] = Y[i];
        wa[k] = w[i];
        ++k;
      }
    auto& fit = r.fits[static_cast<std::size_t>(a)];
    fit = irls_fit(D, ya, links[static_cast<std::size_t>(a)], wa);
    if (!fit.converged) r.glm_nonconverged = true;
    if (fit.rank_deficient || na < pa + 1) r.rank_deficient = true;
    Mat Dall(n, pa + 1);
    Dall.col(0).setOnes();
    if (pa > 0) Dall.rightCols(pa) = X_sel_per_arm[static_cast<std::size_t>(a)];
    mu.col(a) = predict_mean(fit, Dall);
  }

  const auto m = detail::aipw_moments(arm, Y, mu, w);
  if (!m.ok) throw DataError("potential_means_multiarm: arm too small");
  r.means.theta = m.theta;
  r.means.sigma = m.vhat / effective_sample_size(w);
  for (Eigen::Index a = 0; a < K; ++a)
    if (r.means.sigma(a, a) < 0.0) r.means.negative_diag = true;
  return r;
}

// ---- rendering ------------------------------------------------------------

inline nlohmann::json estimate_to_json(const AteEstimate& e) {
  nlohmann::json j;
  j["method"] = estimator_name(e.method);
  j["tau"] = e.tau_hat;
  const auto put = [&](const char* key, const std::optional<double>& v) {
    if (v)
      j[key] = *v;
    else
      j[key] = nullptr;
  };
  put("se", e.se);
  put("ci.lwr", e.ci_low);
  put("ci.upr", e.ci_high);
  put("p", e.p_value);
  j["conf.level"] = e.conf_level;
  nlohmann::json d;
  d["rank_deficient"] = e.diag.rank_deficient;
  d["negative_variance"] = e.diag.negative_variance;
  d["glm_nonconverged"] = e.diag.glm_nonconverged;
  d["insufficient_data"] = e.diag.insufficient_data;
  j["diagnostics"] = d;
  return j;
}

inline std::string render_estimates_table(const std::vector<AteEstimate>& es) {
  const auto num = [](const std::optional<double>& v) -> std::string {
    if (!v) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", *v);
    return buf;
  };
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"method", "tau", "se", "ci.lwr", "ci.upr", "p"});
  for (const auto& e : es)
    rows.push_back({estimator_name(e.method), num(std::optional<double>(e.tau_hat)),
                    num(e.se), num(e.ci_low), num(e.ci_high), num(e.p_value)});
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      out += r[c];
      if (c + 1 < r.size()) out.append(width[c] - r[c].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

}  // namespace coadvise
