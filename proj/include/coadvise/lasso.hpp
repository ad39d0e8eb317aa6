#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "coadvise/glm.hpp"
#include "coadvise/rng.hpp"
#include "coadvise/stats.hpp"

namespace coadvise {

enum class Family { gaussian, binomial };

inline Family parse_family(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "binomial") return Family::binomial;
  throw std::invalid_argument("unsupported lasso family: " + s);
}

struct LassoFit {
  std::vector<double> lambda_grid;         // decreasing
  std::vector<Eigen::VectorXd> coef_path;  // per lambda, intercept first, original scale
  std::vector<double> cv_error;            // mean validation loss per lambda
  double lambda_min = 0.0;
  std::size_t lambda_min_index = 0;
  std::vector<Eigen::Index> active_set;    // nonzero covariates at lambda_min
  bool fold_warning = false;               // degenerate folds were skipped
};

namespace detail {

constexpr double kCdTol = 1e-7;
constexpr int kCdMaxSweeps = 100000;

struct Standardized {
  Mat Xs;           // columns scaled to mean 0, population sd 1
  Vec col_mean;
  Vec col_scale;
  std::vector<bool> excluded;  // constant columns are never updated
};

inline Standardized standardize(const Mat& X) {
  Standardized s;
  const Eigen::Index n = X.rows(), p = X.cols();
  s.Xs.resize(n, p);
  s.col_mean.resize(p);
  s.col_scale.resize(p);
  s.excluded.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double m = X.col(j).mean();
    const double var = (X.col(j).array() - m).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    s.col_mean[j] = m;
    if (sd < 1e-12) {
      s.col_scale[j] = 1.0;
      s.excluded[static_cast<std::size_t>(j)] = true;
      s.Xs.col(j).setZero();
    } else {
      s.col_scale[j] = sd;
      s.Xs.col(j) = (X.col(j).array() - m) / sd;
    }
  }
  return s;
}

inline double soft_threshold(double u, double t) {
  if (u > t) return u - t;
  if (u < -t) return u + t;
  return 0.0;
}

// Gaussian cyclic coordinate descent on the Gram matrix:
//   min (1/2n)||yc - Xs b||^2 + lambda sum_j w_j |b_j|
// q tracks Xs'(yc - Xs b)/n; with unit-variance columns the update is
// b_j <- S(q_j + b_j, lambda w_j).
inline void cd_gaussian_gram(const Mat& G, Vec& q, Vec& beta, double lambda,
                             const Vec& pw, const std::vector<bool>& excluded) {
  const Eigen::Index p = beta.size();
  std::vector<Eigen::Index> active;
  const auto sweep = [&](const std::vector<Eigen::Index>* subset) {
    double max_change = 0.0;
    const Eigen::Index count = subset ? static_cast<Eigen::Index>(subset->size()) : p;
    for (Eigen::Index t = 0; t < count; ++t) {
      const Eigen::Index j = subset ? (*subset)[static_cast<std::size_t>(t)] : t;
      if (excluded[static_cast<std::size_t>(j)] || !std::isfinite(pw[j])) continue;
      const double u = q[j] + beta[j];
      const double bj = soft_threshold(u, lambda * pw[j]);
      const double d = bj - beta[j];
      if (d != 0.0) {
        beta[j] = bj;
        q -= d * G.col(j);
        max_change = std::max(max_change, std::fabs(d));
      }
    }
    return max_change;
  };

  for (int outer = 0; outer < kCdMaxSweeps; ++outer) {
    const double full_change = sweep(nullptr);
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j)
      if (beta[j] != 0.0) active.push_back(j);
    if (full_change <= kCdTol) break;
    for (int inner = 0; inner < kCdMaxSweeps; ++inner)
      if (sweep(&active) <= kCdTol) break;
  }
}

struct BinomialState {
  double b0 = 0.0;
  Vec beta;
};

// Binomial loss by outer IRLS quadratic approximation around the current
// linear predictor, inner weighted gaussian CD with residual updates.
inline void cd_binomial(const Mat& Xs, const Vec& y, double lambda, const Vec& pw,
                        const std::vector<bool>& excluded, BinomialState& st) {
  const Eigen::Index n = Xs.rows(), p = Xs.cols();
  for (int outer = 0; outer < 100; ++outer) {
    const double b0_prev = st.b0;
    const Vec beta_prev = st.beta;
    Vec eta = Vec::Constant(n, st.b0);
    if (p > 0) eta += Xs * st.beta;
    Vec mu(n), w(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = 1.0 / (1.0 + std::exp(-eta[i]));
      m = std::min(std::max(m, 1e-5), 1.0 - 1e-5);
      mu[i] = m;
      w[i] = m * (1.0 - m);
      z[i] = eta[i] + (y[i] - m) / w[i];
    }
    Vec r = z - eta;  // working residual
    const double sw = w.sum();

    for (int inner = 0; inner < 1000; ++inner) {
      double max_change = 0.0;
      {  // unpenalized intercept
        const double d = (w.array() * r.array()).sum() / sw;
        if (d != 0.0) {
          st.b0 += d;
          r.array() -= d;
          max_change = std::max(max_change, std::fabs(d));
        }
      }
      for (Eigen::Index j = 0; j < p; ++j) {
        if (excluded[static_cast<std::size_t>(j)] || !std::isfinite(pw[j])) continue;
        const double vj = (w.array() * Xs.col(j).array().square()).sum() / n;
        if (vj <= 0.0) continue;
        const double uj =
            (w.array() * Xs.col(j).array() * r.array()).sum() / n + vj * st.beta[j];
        const double bj = soft_threshold(uj, lambda * pw[j]) / vj;
        const double d = bj - st.beta[j];
        if (d != 0.0) {
          st.beta[j] = bj;
          r -= d * Xs.col(j);
          max_change = std::max(max_change, std::fabs(d));
        }
      }
      if (max_change <= kCdTol) break;
    }
    const double beta_change =
        p > 0 ? (st.beta - beta_prev).cwiseAbs().maxCoeff() : 0.0;
    if (std::max(beta_change, std::fabs(st.b0 - b0_prev)) <= kCdTol) break;
  }
}

inline void check_finite(const Mat& X, const Vec& y) {
  if (!X.allFinite() || !y.allFinite())
    throw std::invalid_argument("lasso: non-finite inputs");
}

}  // namespace detail

// Single-lambda fit; returns coefficients on the original scale with the
// intercept first. The intercept is never penalized.
inline Vec lasso_cd(const Mat& X, const Vec& y, Family family, double lambda,
                    const std::optional<Vec>& warm_start = std::nullopt,
                    const std::optional<Vec>& penalty_weights = std::nullopt) {
  detail::check_finite(X, y);
  if (lambda < 0.0) throw std::invalid_argument("lasso: lambda must be >= 0");
  const Eigen::Index n = X.rows(), p = X.cols();
  if (n == 0) throw std::invalid_argument("lasso: empty input");
  const auto s = detail::standardize(X);
  Vec pw = penalty_weights ? *penalty_weights : Vec::Ones(p);
  if (pw.size() != p) throw std::invalid_argument("lasso: penalty weight length");

  Vec beta_s = Vec::Zero(p);
  if (warm_start && warm_start->size() == p + 1) {
    for (Eigen::Index j = 0; j < p; ++j)
      beta_s[j] = (*warm_start)[j + 1] * s.col_scale[j];
  }

  double b0 = 0.0;
  if (family == Family::gaussian) {
    const double ybar = y.mean();
    const Vec yc = y.array() - ybar;
    const Mat G = (s.Xs.transpose() * s.Xs) / static_cast<double>(n);
    Vec q = (s.Xs.transpose() * yc) / static_cast<double>(n) - G * beta_s;
    detail::cd_gaussian_gram(G, q, beta_s, lambda, pw, s.excluded);
    b0 = ybar;
  } else {
    detail::BinomialState st;
    st.beta = beta_s;
    detail::cd_binomial(s.Xs, y, lambda, pw, s.excluded, st);
    beta_s = st.beta;
    b0 = st.b0;
  }

  Vec out(p + 1);
  double intercept = b0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double bo = beta_s[j] / s.col_scale[j];
    out[j + 1] = bo;
    intercept -= bo * s.col_mean[j];
  }
  out[0] = intercept;
  return out;
}

namespace detail {

inline double lambda_max_value(const Standardized& s, const Vec& y, Family family,
                               const Vec& pw) {
  const Eigen::Index n = s.Xs.rows(), p = s.Xs.cols();
  Vec grad(p);
  if (family == Family::gaussian) {
    const Vec yc = y.array() - y.mean();
    grad = (s.Xs.transpose() * yc) / static_cast<double>(n);
  } else {
    // gradient of the binomial deviance at the intercept-only fit
    const double pbar = std::min(std::max(y.mean(), 1e-5), 1.0 - 1e-5);
    const Vec r = y.array() - pbar;
    grad = (s.Xs.transpose() * r) / static_cast<double>(n);
  }
  double lmax = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (s.excluded[static_cast<std::size_t>(j)]) continue;
    if (!std::isfinite(pw[j]) || pw[j] <= 0.0) continue;
    lmax = std::max(lmax, std::fabs(grad[j]) / pw[j]);
  }
  return lmax > 0.0 ? lmax : 1e-3;
}

inline std::vector<double> lambda_grid(double lmax, int n_lambda) {
  std::vector<double> grid(static_cast<std::size_t>(n_lambda));
  const double ratio = 1e-3;
  for (int k = 0; k < n_lambda; ++k)
    grid[static_cast<std::size_t>(k)] =
        lmax * std::pow(ratio, static_cast<double>(k) / (n_lambda - 1));
  return grid;
}

// Path fit over a fixed grid with warm starts; returns per-lambda
// original-scale coefficients (intercept first).
inline std::vector<Vec> path_fit(const Mat& X, const Vec& y, Family family,
                                 const std::vector<double>& grid, const Vec& pw) {
  std::vector<Vec> path;
  path.reserve(grid.size());
  const Eigen::Index n = X.rows(), p = X.cols();
  const auto s = standardize(X);

  if (family == Family::gaussian) {
    const double ybar = y.mean();
    const Vec yc = y.array() - ybar;
    const Mat G = (s.Xs.transpose() * s.Xs) / static_cast<double>(n);
    const Vec q0 = (s.Xs.transpose() * yc) / static_cast<double>(n);
    Vec beta = Vec::Zero(p);
    for (const double lam : grid) {
      Vec q = q0 - G * beta;
      cd_gaussian_gram(G, q, beta, lam, pw, s.excluded);
      Vec out(p + 1);
      double b0 = ybar;
      for (Eigen::Index j = 0; j < p; ++j) {
        out[j + 1] = beta[j] / s.col_scale[j];
        b0 -= out[j + 1] * s.col_mean[j];
      }
      out[0] = b0;
      path.push_back(std::move(out));
    }
  } else {
    BinomialState st;
    st.beta = Vec::Zero(p);
    for (const double lam : grid) {
      cd_binomial(s.Xs, y, lam, pw, s.excluded, st);
      Vec out(p + 1);
      double b0 = st.b0;
      for (Eigen::Index j = 0; j < p; ++j) {
        out[j + 1] = st.beta[j] / s.col_scale[j];
        b0 -= out[j + 1] * s.col_mean[j];
      }
      out[0] = b0;
      path.push_back(std::move(out));
    }
  }
  return path;
}

inline double validation_loss(const Mat& Xv, const Vec& yv, const Vec& coef,
                              Family family) {
  const Vec eta = coef[0] + (Xv * coef.tail(coef.size() - 1)).array();
  if (family == Family::gaussian) return (yv - eta).squaredNorm() / yv.size();
  double dev = 0.0;
  for (Eigen::Index i = 0; i < yv.size(); ++i) {
    const double m = std::min(std::max(1.0 / (1.0 + std::exp(-eta[i])), 1e-10), 1.0 - 1e-10);
    dev += -2.0 * (yv[i] * std::log(m) + (1.0 - yv[i]) * std::log(1.0 - m));
  }
  return dev / yv.size();
}

}  // namespace detail

// K-fold cross-validation over a log-spaced grid from lambda_max down to
// 1e-3 * lambda_max; lambda_min minimizes mean validation loss with ties
// broken toward the larger (sparser) lambda.
inline LassoFit cv_lasso(const Mat& X, const Vec& y, Family family, int n_folds,
                         int n_lambda, std::uint64_t seed,
                         const std::optional<Vec>& penalty_weights = std::nullopt) {
  detail::check_finite(X, y);
  const Eigen::Index n = X.rows(), p = X.cols();
  if (n_folds < 2 || n_folds > n)
    throw std::invalid_argument("cv_lasso: n_folds must be in [2, n]");
  if (n_lambda < 2) throw std::invalid_argument("cv_lasso: n_lambda must be >= 2");

  const Vec pw = penalty_weights ? *penalty_weights : Vec::Ones(p);
  const auto s_full = detail::standardize(X);
  const double lmax = detail::lambda_max_value(s_full, y, family, pw);

  LassoFit fit;
  fit.lambda_grid = detail::lambda_grid(lmax, n_lambda);

  // seeded shuffle, then fold f = positions {f, f+K, f+2K, ...}
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % n_folds);

  std::vector<double> loss_sum(fit.lambda_grid.size(), 0.0);
  int folds_used = 0;
  for (int f = 0; f < n_folds; ++f) {
    std::vector<Eigen::Index> tr, va;
    for (Eigen::Index i = 0; i < n; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
    if (tr.size() < 2 || va.empty()) {
      fit.fold_warning = true;
      continue;
    }
    Mat Xtr(static_cast<Eigen::Index>(tr.size()), p), Xva(static_cast<Eigen::Index>(va.size()), p);
    Vec ytr(static_cast<Eigen::Index>(tr.size())), yva(static_cast<Eigen::Index>(va.size()));
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
      ytr[static_cast<Eigen::Index>(i)] = y[tr[i]];
    }
    for (std::size_t i = 0; i < va.size(); ++i) {
      Xva.row(static_cast<Eigen::Index>(i)) = X.row(va[i]);
      yva[static_cast<Eigen::Index>(i)] = y[va[i]];
    }
    if (family == Family::binomial &&
        (ytr.minCoeff() == ytr.maxCoeff())) {
      fit.fold_warning = true;  // single-class training fold
      continue;
    }
    const auto path = detail::path_fit(Xtr, ytr, family, fit.lambda_grid, pw);
    for (std::size_t k = 0; k < path.size(); ++k)
      loss_sum[k] += detail::validation_loss(Xva, yva, path[k], family);
    ++folds_used;
  }
  if (folds_used == 0)
    throw std::invalid_argument("cv_lasso: all folds degenerate");

  fit.cv_error.resize(fit.lambda_grid.size());
  for (std::size_t k = 0; k < loss_sum.size(); ++k)
    fit.cv_error[k] = loss_sum[k] / folds_used;

  std::size_t best = 0;
  for (std::size_t k = 1; k < fit.cv_error.size(); ++k)
    if (fit.cv_error[k] < fit.cv_error[best]) best = k;  // ties keep larger lambda
  fit.lambda_min_index = best;
  fit.lambda_min = fit.lambda_grid[best];

  fit.coef_path = detail::path_fit(X, y, family, fit.lambda_grid, pw);
  const Vec& coef = fit.coef_path[best];
  for (Eigen::Index j = 0; j < p; ++j)
    if (coef[j + 1] != 0.0) fit.active_set.push_back(j);
  return fit;
}

struct AdaptiveLassoResult {
  Vec coef;  // intercept first, original scale, at lambda_min
  std::vector<Eigen::Index> active_set;
  LassoFit fit;
  bool ridge_fallback = false;
};

// Penalty weights 1/|beta_init| (gamma = 1) on the standardized scale;
// exact zeros in the initial fit exclude the covariate outright. The
// initial estimate is unpenalized least squares, or ridge with penalty
// 1e-3 tr(X'X)/p when that is rank deficient.
inline AdaptiveLassoResult adaptive_lasso(const Mat& X, const Vec& y, Family family,
                                          int n_folds, std::uint64_t seed) {
  detail::check_finite(X, y);
  const Eigen::Index n = X.rows(), p = X.cols();
  const auto s = detail::standardize(X);

  Vec beta_std(p);
  const GlmFit init = ols_fit(with_intercept(X), y);
  AdaptiveLassoResult res;
  if (!init.rank_deficient) {
    for (Eigen::Index j = 0; j < p; ++j)
      beta_std[j] = init.beta[j + 1] * s.col_scale[j];
  } else {
    res.ridge_fallback = true;
    const Vec yc = y.array() - y.mean();
    const Mat G = s.Xs.transpose() * s.Xs;
    const double kappa = 1e-3 * G.trace() / std::max<Eigen::Index>(p, 1);
    const Mat A = G + kappa * Mat::Identity(p, p);
    beta_std = A.ldlt().solve(s.Xs.transpose() * yc);
  }

  Vec pw(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (s.excluded[static_cast<std::size_t>(j)] || beta_std[j] == 0.0)
      pw[j] = std::numeric_limits<double>::infinity();
    else
      pw[j] = 1.0 / std::fabs(beta_std[j]);
  }

  res.fit = cv_lasso(X, y, family, n_folds, 100, seed, pw);
  res.coef = res.fit.coef_path[res.fit.lambda_min_index];
  res.active_set = res.fit.active_set;
  return res;
}

}  // namespace coadvise
