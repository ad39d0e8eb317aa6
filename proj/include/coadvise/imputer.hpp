#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "coadvise/dataset.hpp"
#include "coadvise/glm.hpp"
#include "coadvise/rng.hpp"

namespace coadvise {

enum class ImputationMethod { cc, chained, ipw, miss_ind };

inline ImputationMethod parse_imputation_method(const std::string& s) {
  if (s == "cc") return ImputationMethod::cc;
  if (s == "mice" || s == "chained") return ImputationMethod::chained;
  if (s == "ipw") return ImputationMethod::ipw;
  if (s == "missInd" || s == "miss_ind") return ImputationMethod::miss_ind;
  if (s == "missForest")
    throw ConfigError(
        "mi-method missForest is not provided; random-forest imputation was "
        "replaced by chained-equations imputation (use mice)");
  throw ConfigError("unknown mi-method: " + s);
}

struct ImputationSpec {
  ImputationMethod method = ImputationMethod::cc;
  int n_cycles = 10;   // chained
  double fill = 0.0;   // miss_ind
  std::uint64_t seed = 4399;
};

struct ImputedTrial {
  BinaryTrial trial;  // fully observed
  Vec row_weights;    // all 1 except ipw
  std::vector<Eigen::Index> dropped_rows;   // cc / ipw
  std::vector<std::string> added_columns;   // miss_ind
  bool weight_clamped = false;              // ipw hit the clamp
  bool rank_fallback = false;               // chained fell back to mean refill
};

namespace detail {

inline void assert_fully_observed(const ImputedTrial& t) {
  if (!t.trial.fully_observed())
    throw std::logic_error("imputer: result still has unobserved cells");
}

inline BoolVec all_ones(Eigen::Index n) { return BoolVec::Constant(n, 1); }

}  // namespace detail

inline ImputedTrial impute_cc(const BinaryTrial& in) {
  const Eigen::Index n = in.n_rows(), p = in.n_covariates();
  std::vector<Eigen::Index> keep;
  std::vector<Eigen::Index> dropped;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool complete = in.Y_observed[i] == 1;
    for (Eigen::Index j = 0; complete && j < p; ++j)
      if (!in.X_observed(i, j)) complete = false;
    (complete ? keep : dropped).push_back(i);
  }
  Eigen::Index n1 = 0, n0 = 0;
  for (const auto i : keep) (in.A[i] == 1 ? n1 : n0)++;
  if (n1 < 2) throw DataError("impute_cc: arm exhausted: 1");
  if (n0 < 2) throw DataError("impute_cc: arm exhausted: 0");

  ImputedTrial out;
  out.trial.A.resize(static_cast<Eigen::Index>(keep.size()));
  out.trial.Y.resize(static_cast<Eigen::Index>(keep.size()));
  out.trial.X.resize(static_cast<Eigen::Index>(keep.size()), p);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.trial.A[static_cast<Eigen::Index>(i)] = in.A[keep[i]];
    out.trial.Y[static_cast<Eigen::Index>(i)] = in.Y[keep[i]];
    out.trial.X.row(static_cast<Eigen::Index>(i)) = in.X.row(keep[i]);
  }
  out.trial.Y_observed = detail::all_ones(out.trial.Y.size());
  out.trial.X_observed = BoolMat::Constant(out.trial.X.rows(), p, 1);
  out.trial.covariate_names = in.covariate_names;
  out.row_weights = Vec::Ones(out.trial.Y.size());
  out.dropped_rows = std::move(dropped);
  detail::assert_fully_observed(out);
  return out;
}

// Chained-equations imputation: mean/mode start, then n_cycles sweeps where
// each incomplete column is regressed on A and all other columns over its
// observed rows, and its missing cells are replaced by predictive draws
// (fitted mean + residual-scaled gaussian noise, or Bernoulli at the fitted
// probability for two-valued columns). One completed dataset per run.
inline ImputedTrial impute_chained(const BinaryTrial& in, int n_cycles,
                                   std::uint64_t seed) {
  if (n_cycles < 1) throw ConfigError("impute_chained: n_cycles must be >= 1");
  const Eigen::Index n = in.n_rows(), p = in.n_covariates();
  const Eigen::Index ncol = p + 1;  // column 0 is the outcome

  ImputedTrial out;
  out.trial = in;
  out.row_weights = Vec::Ones(n);
  Rng rng(derive_seed(seed, 0x6D696365ULL));

  // column views over [Y | X]
  const auto observed = [&](Eigen::Index c, Eigen::Index i) -> bool {
    return c == 0 ? in.Y_observed[i] == 1 : in.X_observed(i, c - 1) == 1;
  };
  const auto value = [&](Eigen::Index c, Eigen::Index i) -> double& {
    return c == 0 ? out.trial.Y[i] : out.trial.X(i, c - 1);
  };

  std::vector<Eigen::Index> incomplete;
  std::vector<bool> is_binary(static_cast<std::size_t>(ncol), false);
  std::vector<std::pair<double, double>> levels(static_cast<std::size_t>(ncol));
  for (Eigen::Index c = 0; c < ncol; ++c) {
    Eigen::Index n_obs = 0, n_miss = 0;
    std::set<double> vals;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (observed(c, i)) {
        ++n_obs;
        if (vals.size() <= 2) vals.insert(value(c, i));
      } else {
        ++n_miss;
      }
    }
    if (n_miss == 0) continue;
    if (n_obs < 2)
      throw DataError("impute_chained: column " + std::to_string(c) +
                      " has fewer than 2 observed values");
    incomplete.push_back(c);
    if (vals.size() == 2) {
      is_binary[static_cast<std::size_t>(c)] = true;
      auto it = vals.begin();
      levels[static_cast<std::size_t>(c)] = {*it, *std::next(it)};
    }
  }

  if (incomplete.empty()) {
    out.trial.Y_observed = detail::all_ones(n);
    out.trial.X_observed = BoolMat::Constant(n, p, 1);
    detail::assert_fully_observed(out);
    return out;
  }

  // mean (mode for two-valued columns) start
  for (const auto c : incomplete) {
    double sum = 0.0;
    Eigen::Index cnt = 0, hi = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (observed(c, i)) {
        sum += value(c, i);
        ++cnt;
        if (is_binary[static_cast<std::size_t>(c)] &&
            value(c, i) == levels[static_cast<std::size_t>(c)].second)
          ++hi;
      }
    double start = sum / cnt;
    if (is_binary[static_cast<std::size_t>(c)]) {
      const auto [lo, hiv] = levels[static_cast<std::size_t>(c)];
      start = (2 * hi >= cnt) ? hiv : lo;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      if (!observed(c, i)) value(c, i) = start;
  }

  for (int cycle = 0; cycle < n_cycles; ++cycle) {
    for (const auto c : incomplete) {
      // design: intercept, A, all other columns at their current values
      Mat D(n, ncol + 1);
      D.col(0).setOnes();
      D.col(1) = in.A.cast<double>();
      Eigen::Index col = 2;
      for (Eigen::Index c2 = 0; c2 < ncol; ++c2) {
        if (c2 == c) continue;
        for (Eigen::Index i = 0; i < n; ++i) D(i, col) = value(c2, i);
        ++col;
      }

      std::vector<Eigen::Index> obs_rows, miss_rows;
      for (Eigen::Index i = 0; i < n; ++i)
        (observed(c, i) ? obs_rows : miss_rows).push_back(i);

      Mat Dobs(static_cast<Eigen::Index>(obs_rows.size()), D.cols());
      Vec t(static_cast<Eigen::Index>(obs_rows.size()));
      for (std::size_t i = 0; i < obs_rows.size(); ++i) {
        Dobs.row(static_cast<Eigen::Index>(i)) = D.row(obs_rows[i]);
        t[static_cast<Eigen::Index>(i)] = value(c, obs_rows[i]);
      }

      const bool binary = is_binary[static_cast<std::size_t>(c)];
      bool fallback = false;
      GlmFit fit;
      if (binary) {
        const auto [lo, hi] = levels[static_cast<std::size_t>(c)];
        Vec t01 = ((t.array() - lo) / (hi - lo)).matrix();
        fit = irls_fit(Dobs, t01, LinkFamily{Link::logit});
        fallback = fit.rank_deficient || !fit.converged;
      } else {
        fit = ols_fit(Dobs, t);
        fallback = fit.rank_deficient;
      }

      if (fallback) {
        out.rank_fallback = true;
        double sum = 0.0;
        Eigen::Index cnt = 0, hi_cnt = 0;
        for (const auto i : obs_rows) {
          sum += value(c, i);
          ++cnt;
          if (binary && value(c, i) == levels[static_cast<std::size_t>(c)].second)
            ++hi_cnt;
        }
        double refill = sum / cnt;
        if (binary) {
          const auto [lo, hiv] = levels[static_cast<std::size_t>(c)];
          refill = (2 * hi_cnt >= cnt) ? hiv : lo;
        }
        for (const auto i : miss_rows) value(c, i) = refill;
        continue;
      }

      if (binary) {
        const auto [lo, hi] = levels[static_cast<std::size_t>(c)];
        for (const auto i : miss_rows) {
          const double ph = fit.link.mean(D.row(i) * fit.beta);
          value(c, i) = rng.bernoulli(ph) ? hi : lo;
        }
      } else {
        const double rss = fit.residuals.squaredNorm();
        const double dof = std::max<double>(
            1.0, static_cast<double>(Dobs.rows()) - static_cast<double>(Dobs.cols()));
        const double sd = std::sqrt(std::max(rss / dof, 0.0));
        for (const auto i : miss_rows)
          value(c, i) = D.row(i) * fit.beta + sd * rng.normal();
      }
    }
  }

  out.trial.Y_observed = detail::all_ones(n);
  out.trial.X_observed = BoolMat::Constant(n, p, 1);
  detail::assert_fully_observed(out);
  return out;
}

// Inverse probability weighting for a missing outcome: logistic model of the
// observation indicator on (A, X, A*X); rows with observed outcome are kept
// with weights 1/P(observed), clamped to [1, 100].
inline ImputedTrial ipw_missing_outcome(const BinaryTrial& in) {
  const Eigen::Index n = in.n_rows(), p = in.n_covariates();
  if (in.X_observed.size() > 0 && in.X_observed.minCoeff() == 0)
    throw DataError(
        "ipw_missing_outcome: covariates contain missing cells; ipw handles a "
        "missing outcome only (use mice or cc)");

  Eigen::Index obs1 = 0, obs0 = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (in.Y_observed[i]) (in.A[i] == 1 ? obs1 : obs0)++;
  if (obs1 < 2 || obs0 < 2)
    throw DataError("ipw_missing_outcome: an arm has fewer than 2 observed outcomes");

  ImputedTrial out;
  if (in.Y_observed.minCoeff() == 1) {
    out.trial = in;
    out.row_weights = Vec::Ones(n);
    detail::assert_fully_observed(out);
    return out;
  }

  Mat D(n, 2 + 2 * p);
  D.col(0).setOnes();
  D.col(1) = in.A.cast<double>();
  for (Eigen::Index j = 0; j < p; ++j) {
    D.col(2 + j) = in.X.col(j);
    D.col(2 + p + j) = in.X.col(j).array() * in.A.cast<double>().array();
  }
  Vec R(n);
  for (Eigen::Index i = 0; i < n; ++i) R[i] = in.Y_observed[i] ? 1.0 : 0.0;
  const GlmFit fit = irls_fit(D, R, LinkFamily{Link::logit});

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    (in.Y_observed[i] ? keep : out.dropped_rows).push_back(i);

  out.trial.A.resize(static_cast<Eigen::Index>(keep.size()));
  out.trial.Y.resize(static_cast<Eigen::Index>(keep.size()));
  out.trial.X.resize(static_cast<Eigen::Index>(keep.size()), p);
  out.row_weights.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const Eigen::Index r = keep[i];
    out.trial.A[static_cast<Eigen::Index>(i)] = in.A[r];
    out.trial.Y[static_cast<Eigen::Index>(i)] = in.Y[r];
    out.trial.X.row(static_cast<Eigen::Index>(i)) = in.X.row(r);
    const double ph = fit.fitted[r];
    double w = 1.0 / std::max(ph, 1e-12);
    if (w < 1.0) w = 1.0;
    if (w > 100.0) {
      w = 100.0;
      out.weight_clamped = true;
    }
    out.row_weights[static_cast<Eigen::Index>(i)] = w;
  }
  out.trial.Y_observed = detail::all_ones(out.trial.Y.size());
  out.trial.X_observed = BoolMat::Constant(out.trial.X.rows(), p, 1);
  out.trial.covariate_names = in.covariate_names;
  detail::assert_fully_observed(out);
  return out;
}

// Missingness-indicator method: appends <col>__miss for each covariate with
// missingness and fills the holes with a constant. Outcome must be observed.
inline ImputedTrial impute_miss_ind(const BinaryTrial& in, double fill) {
  const Eigen::Index n = in.n_rows(), p = in.n_covariates();
  if (in.Y_observed.minCoeff() == 0)
    throw DataError(
        "impute_miss_ind: outcome contains missing values; missInd handles "
        "missing covariates only (use ipw, mice or cc)");

  std::vector<Eigen::Index> cols_with_missing;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (!in.X_observed(i, j)) {
        cols_with_missing.push_back(j);
        break;
      }

  ImputedTrial out;
  out.trial.A = in.A;
  out.trial.Y = in.Y;
  out.trial.Y_observed = detail::all_ones(n);
  const Eigen::Index padd = static_cast<Eigen::Index>(cols_with_missing.size());
  out.trial.X.resize(n, p + padd);
  out.trial.X.leftCols(p) = in.X;
  out.trial.covariate_names = in.covariate_names;
  for (Eigen::Index k = 0; k < padd; ++k) {
    const Eigen::Index j = cols_with_missing[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool miss = !in.X_observed(i, j);
      out.trial.X(i, p + k) = miss ? 1.0 : 0.0;
      if (miss) out.trial.X(i, j) = fill;
    }
    const std::string name = in.covariate_names[static_cast<std::size_t>(j)] + "__miss";
    out.trial.covariate_names.push_back(name);
    out.added_columns.push_back(name);
  }
  out.trial.X_observed = BoolMat::Constant(n, p + padd, 1);
  out.row_weights = Vec::Ones(n);
  detail::assert_fully_observed(out);
  return out;
}

inline ImputedTrial impute(const ImputationSpec& spec, const BinaryTrial& trial) {
  switch (spec.method) {
    case ImputationMethod::cc: return impute_cc(trial);
    case ImputationMethod::chained: return impute_chained(trial, spec.n_cycles, spec.seed);
    case ImputationMethod::ipw: return ipw_missing_outcome(trial);
    case ImputationMethod::miss_ind: return impute_miss_ind(trial, spec.fill);
  }
  throw ConfigError("impute: unknown method");
}

}  // namespace coadvise
