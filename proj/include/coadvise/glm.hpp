#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coadvise/stats.hpp"

namespace coadvise {

// Link menu. "linear" and "identity" are two spellings of the same mean
// function; parse_link maps both onto Link::identity.
enum class Link { identity, logit, probit, log, cloglog };

inline Link parse_link(const std::string& s) {
  if (s == "linear" || s == "identity") return Link::identity;
  if (s == "logit") return Link::logit;
  if (s == "probit") return Link::probit;
  if (s == "log") return Link::log;
  if (s == "cloglog") return Link::cloglog;
  throw std::invalid_argument("unknown link: " + s);
}

inline std::string link_name(Link l) {
  switch (l) {
    case Link::identity: return "identity";
    case Link::logit: return "logit";
    case Link::probit: return "probit";
    case Link::log: return "log";
    case Link::cloglog: return "cloglog";
  }
  return "?";
}

struct LinkFamily {
  Link tag = Link::identity;

  double mean(double eta) const {
    switch (tag) {
      case Link::identity: return eta;
      case Link::logit: return 1.0 / (1.0 + std::exp(-eta));
      case Link::probit: return normal_cdf(eta);
      case Link::log: return std::exp(std::min(eta, 700.0));
      case Link::cloglog: return 1.0 - std::exp(-std::exp(std::min(eta, 700.0)));
    }
    return eta;
  }

  // d mean / d eta; strictly positive on the working range
  double dmean(double eta) const {
    switch (tag) {
      case Link::identity: return 1.0;
      case Link::logit: {
        const double m = mean(eta);
        return m * (1.0 - m);
      }
      case Link::probit:
        return std::exp(-0.5 * eta * eta) / std::sqrt(2.0 * M_PI);
      case Link::log: return std::exp(std::min(eta, 700.0));
      case Link::cloglog: {
        const double e = std::min(eta, 700.0);
        return std::exp(e - std::exp(e));
      }
    }
    return 1.0;
  }

  // GLM variance function for the IRLS working weights
  double variance(double mu) const {
    switch (tag) {
      case Link::identity: return 1.0;
      case Link::log: return std::max(mu, 1e-10);
      default: {
        const double m = std::min(std::max(mu, 1e-10), 1.0 - 1e-10);
        return m * (1.0 - m);
      }
    }
  }

  bool is_binary_type() const {
    return tag == Link::logit || tag == Link::probit || tag == Link::cloglog;
  }
};

struct GlmFit {
  LinkFamily link;
  Eigen::VectorXd beta;       // intercept first
  bool converged = false;
  int n_iter = 0;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;  // y - fitted
  bool rank_deficient = false;
  std::vector<double> deviance_trace;
};

namespace detail {

// Pivot |r_kk| <= 1e-10 |r_11| counts as zero.
constexpr double kRankThreshold = 1e-10;

inline Eigen::VectorXd solve_min_norm(const Mat& X, const Vec& y, bool* deficient) {
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(X);
  cod.setThreshold(kRankThreshold);
  // setThreshold after construction requires recompute
  cod.compute(X);
  if (deficient) *deficient = cod.rank() < X.cols();
  return cod.solve(y);
}

}  // namespace detail

inline Mat with_intercept(const Mat& X) {
  Mat D(X.rows(), X.cols() + 1);
  D.col(0).setOnes();
  if (X.cols() > 0) D.rightCols(X.cols()) = X;
  return D;
}

// Weighted least squares via rank-revealing orthogonal decomposition.
// On rank deficiency the minimum-norm solution is returned and the flag set.
inline GlmFit ols_fit(const Mat& X, const Vec& y,
                      const std::optional<Vec>& weights = std::nullopt) {
  if (X.rows() == 0 || y.size() == 0) throw std::invalid_argument("ols_fit: empty input");
  if (X.rows() != y.size()) throw std::invalid_argument("ols_fit: dimension mismatch");
  Mat Xw = X;
  Vec yw = y;
  if (weights) {
    if (weights->size() != y.size())
      throw std::invalid_argument("ols_fit: weight length mismatch");
    if (weights->minCoeff() < 0.0)
      throw std::invalid_argument("ols_fit: negative weight");
    if (weights->sum() <= 0.0)
      throw std::invalid_argument("ols_fit: weights all zero");
    const Vec s = weights->array().sqrt();
    Xw.array().colwise() *= s.array();
    yw.array() *= s.array();
  }
  GlmFit fit;
  fit.link = LinkFamily{Link::identity};
  fit.beta = detail::solve_min_norm(Xw, yw, &fit.rank_deficient);
  fit.converged = true;
  fit.n_iter = 0;
  fit.fitted = X * fit.beta;
  fit.residuals = y - fit.fitted;
  return fit;
}

namespace detail {

inline double glm_deviance(const LinkFamily& link, const Vec& y, const Vec& mu,
                           const std::optional<Vec>& w) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double di = 0.0;
    const double m = mu[i];
    switch (link.tag) {
      case Link::identity: {
        const double r = y[i] - m;
        di = r * r;
        break;
      }
      case Link::log: {
        const double mc = std::max(m, 1e-300);
        di = 2.0 * ((y[i] > 0 ? y[i] * std::log(y[i] / mc) : 0.0) - (y[i] - mc));
        break;
      }
      default: {  // binomial-type
        const double mc = std::min(std::max(m, 1e-12), 1.0 - 1e-12);
        double t = 0.0;
        if (y[i] > 0) t += y[i] * std::log(y[i] / mc);
        if (y[i] < 1) t += (1.0 - y[i]) * std::log((1.0 - y[i]) / (1.0 - mc));
        di = 2.0 * t;
        break;
      }
    }
    dev += w ? (*w)[i] * di : di;
  }
  return dev;
}

inline void check_response_support(const LinkFamily& link, const Vec& y) {
  if (link.is_binary_type()) {
    if (y.minCoeff() < 0.0 || y.maxCoeff() > 1.0)
      throw std::invalid_argument("irls_fit: response outside [0,1] for " +
                                  link_name(link.tag) + " link");
  } else if (link.tag == Link::log) {
    if (y.minCoeff() < 0.0)
      throw std::invalid_argument("irls_fit: negative response for log link");
  }
}

}  // namespace detail

// Fisher scoring / IRLS. Divergence (non-finite working quantities, or a
// step that cannot be damped into a deviance decrease) ends the loop with
// converged=false; it never throws for numerical reasons.
inline GlmFit irls_fit(const Mat& X, const Vec& y, const LinkFamily& link,
                       const std::optional<Vec>& weights = std::nullopt,
                       int max_iter = 100, double tol = 1e-8) {
  if (X.rows() != y.size()) throw std::invalid_argument("irls_fit: dimension mismatch");
  if (max_iter < 1) throw std::invalid_argument("irls_fit: max_iter must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("irls_fit: tol must be > 0");
  if (link.tag == Link::identity) return ols_fit(X, y, weights);
  detail::check_response_support(link, y);

  const Eigen::Index n = X.rows(), p = X.cols();
  GlmFit fit;
  fit.link = link;
  fit.beta = Vec::Zero(p);

  const auto mu_of = [&](const Vec& beta) {
    Vec eta = X * beta;
    Vec mu(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = link.mean(eta[i]);
      if (link.is_binary_type()) m = std::min(std::max(m, 1e-10), 1.0 - 1e-10);
      mu[i] = m;
    }
    return mu;
  };

  double dev = detail::glm_deviance(link, y, mu_of(fit.beta), weights);
  fit.deviance_trace.push_back(dev);

  for (int iter = 1; iter <= max_iter; ++iter) {
    fit.n_iter = iter;
    const Vec eta = X * fit.beta;
    Vec w(n), z(n);
    bool finite = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double m = link.mean(eta[i]);
      if (link.is_binary_type()) m = std::min(std::max(m, 1e-10), 1.0 - 1e-10);
      const double gp = std::max(link.dmean(eta[i]), 1e-10);
      const double v = link.variance(m);
      double wi = gp * gp / v;
      if (weights) wi *= (*weights)[i];
      const double zi = eta[i] + (y[i] - m) / gp;
      if (!std::isfinite(wi) || !std::isfinite(zi)) {
        finite = false;
        break;
      }
      w[i] = wi;
      z[i] = zi;
    }
    if (!finite || w.sum() <= 0.0) {
      fit.converged = false;
      break;
    }

    bool deficient = false;
    const Vec s = w.array().sqrt();
    Mat Xw = X;
    Xw.array().colwise() *= s.array();
    Vec zw = z.array() * s.array();
    Vec beta_new = detail::solve_min_norm(Xw, zw, &deficient);
    if (deficient) fit.rank_deficient = true;
    if (!beta_new.allFinite()) {
      fit.converged = false;
      break;
    }

    // half-step damping until the deviance stops increasing
    const double slack = 1e-10 * (1.0 + std::fabs(dev));
    double dev_new = detail::glm_deviance(link, y, mu_of(beta_new), weights);
    int halvings = 0;
    while (dev_new > dev + slack && halvings < 30) {
      beta_new = 0.5 * (beta_new + fit.beta);
      dev_new = detail::glm_deviance(link, y, mu_of(beta_new), weights);
      ++halvings;
    }
    if (dev_new > dev + slack) {
      fit.converged = false;
      break;
    }

    const double max_change = (beta_new - fit.beta).cwiseAbs().maxCoeff();
    fit.beta = beta_new;
    dev = dev_new;
    fit.deviance_trace.push_back(dev);
    if (max_change <= tol) {
      fit.converged = true;
      break;
    }
  }

  Vec eta = X * fit.beta;
  fit.fitted.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) fit.fitted[i] = link.mean(eta[i]);
  fit.residuals = y - fit.fitted;
  return fit;
}

inline Vec predict_mean(const GlmFit& fit, const Mat& X) {
  if (X.cols() != fit.beta.size())
    throw std::invalid_argument("predict_mean: dimension mismatch");
  Vec eta = X * fit.beta;
  Vec out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = fit.link.mean(eta[i]);
  return out;
}

}  // namespace coadvise
