#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace coadvise {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double mean(const Vec& x) {
  if (x.size() == 0) throw std::invalid_argument("mean: empty vector");
  return x.mean();
}

// Unbiased sample variance (denominator n-1).
inline double sample_variance(const Vec& x) {
  const Eigen::Index n = x.size();
  if (n < 2) throw std::invalid_argument("sample_variance: need n >= 2");
  const double m = x.mean();
  return (x.array() - m).square().sum() / static_cast<double>(n - 1);
}

inline double sample_covariance(const Vec& x, const Vec& y) {
  const Eigen::Index n = x.size();
  if (n != y.size()) throw std::invalid_argument("sample_covariance: size mismatch");
  if (n < 2) throw std::invalid_argument("sample_covariance: need n >= 2");
  const double mx = x.mean(), my = y.mean();
  return ((x.array() - mx) * (y.array() - my)).sum() / static_cast<double>(n - 1);
}

inline double weighted_mean(const Vec& x, const Vec& w) {
  const double sw = w.sum();
  if (sw <= 0.0) throw std::invalid_argument("weighted_mean: weights sum to zero");
  return (x.array() * w.array()).sum() / sw;
}

// Kish effective sample size (sum w)^2 / sum w^2.
inline double effective_sample_size(const Vec& w) {
  const double sw = w.sum();
  const double sw2 = w.array().square().sum();
  if (sw2 <= 0.0) throw std::invalid_argument("effective_sample_size: all-zero weights");
  return sw * sw / sw2;
}

// Weighted sample variance normalized so that unit weights reproduce the
// unbiased n-1 form; the effective sample size plays the role of n.
inline double weighted_variance(const Vec& x, const Vec& w) {
  const double sw = w.sum();
  const double neff = effective_sample_size(w);
  if (neff <= 1.0) throw std::invalid_argument("weighted_variance: effective n <= 1");
  const double m = (x.array() * w.array()).sum() / sw;
  const double s = (w.array() * (x.array() - m).square()).sum() / sw;
  return s * neff / (neff - 1.0);
}

inline double weighted_covariance(const Vec& x, const Vec& y, const Vec& w) {
  const double sw = w.sum();
  const double neff = effective_sample_size(w);
  if (neff <= 1.0) throw std::invalid_argument("weighted_covariance: effective n <= 1");
  const double mx = (x.array() * w.array()).sum() / sw;
  const double my = (y.array() * w.array()).sum() / sw;
  const double s = (w.array() * (x.array() - mx) * (y.array() - my)).sum() / sw;
  return s * neff / (neff - 1.0);
}

inline double pearson_corr(const Vec& x, const Vec& y) {
  const Eigen::Index n = x.size();
  if (n != y.size()) throw std::invalid_argument("pearson_corr: size mismatch");
  if (n < 2) throw std::invalid_argument("pearson_corr: need n >= 2");
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double syy = (y.array() - my).square().sum();
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::invalid_argument("pearson_corr: zero variance");
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  return sxy / std::sqrt(sxx * syy);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

inline double two_sided_p_from_z(double z) { return std::erfc(std::fabs(z) * M_SQRT1_2); }

// Wichura's AS 241 (PPND16) inverse normal CDF, |error| < 1e-15.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
  constexpr int max_iter = 300;
  constexpr double eps = 3e-16;
  constexpr double fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double betainc_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lnbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const double front = std::exp(lnbeta + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

inline double student_t_cdf(double x, double df) {
  if (df <= 0.0) throw std::invalid_argument("student_t_cdf: df must be > 0");
  if (!std::isfinite(x)) return x > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * betainc_reg(0.5 * df, 0.5, df / (df + x * x));
  return x > 0.0 ? 1.0 - tail : tail;
}

struct WelchResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

// Welch two-sample t-test with Satterthwaite degrees of freedom.
inline WelchResult welch_t_test(const Vec& x1, const Vec& x0) {
  if (x1.size() < 2 || x0.size() < 2)
    throw std::invalid_argument("welch_t_test: group too small");
  const double n1 = static_cast<double>(x1.size());
  const double n0 = static_cast<double>(x0.size());
  const double v1 = sample_variance(x1);
  const double v0 = sample_variance(x0);
  if (!(std::isfinite(v1) && std::isfinite(v0)))
    throw std::invalid_argument("welch_t_test: non-finite variance");
  const double m1 = x1.mean(), m0 = x0.mean();
  const double se2 = v1 / n1 + v0 / n0;
  if (se2 <= 0.0) {
    if (m1 == m0) return {0.0, 1.0, n1 + n0 - 2.0};
    throw std::invalid_argument("welch_t_test: zero variance in both groups");
  }
  WelchResult r;
  r.t = (m1 - m0) / std::sqrt(se2);
  r.df = se2 * se2 /
         (v1 * v1 / (n1 * n1 * (n1 - 1.0)) + v0 * v0 / (n0 * n0 * (n0 - 1.0)));
  r.p = 2.0 * student_t_cdf(-std::fabs(r.t), r.df);
  return r;
}

}  // namespace coadvise
