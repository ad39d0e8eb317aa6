#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coadvise/dataset.hpp"
#include "coadvise/lasso.hpp"
#include "coadvise/stats.hpp"

namespace coadvise {

enum class SelectionMethod { none, lasso, adaptive_lasso, corr_k, corr_xi, pre_test };

inline std::string selection_method_name(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::none: return "none";
    case SelectionMethod::lasso: return "lasso";
    case SelectionMethod::adaptive_lasso: return "adaptive_lasso";
    case SelectionMethod::corr_k: return "corr_k";
    case SelectionMethod::corr_xi: return "corr_xi";
    case SelectionMethod::pre_test: return "pre_test";
  }
  return "?";
}

struct SelectionSpec {
  SelectionMethod method = SelectionMethod::lasso;
  int k = 1;                 // corr_k
  double xi = 0.25;          // corr_xi
  double alpha = 0.05;       // pre_test
  std::optional<Family> family;  // lasso variants; default inferred from outcome
  std::uint64_t seed = 4399;
  int n_folds = 10;

  void validate(Eigen::Index /*p*/) const {
    if (method == SelectionMethod::corr_k && k < 1)
      throw ConfigError("selection: k must be >= 1");
    if (method == SelectionMethod::corr_xi && !(xi > 0.0 && xi < 1.0))
      throw ConfigError("selection: xi must be in (0,1)");
    if (method == SelectionMethod::pre_test && !(alpha > 0.0 && alpha <= 1.0))
      throw ConfigError("selection: alpha must be in (0,1]");
  }
};

struct SelectionResult {
  std::vector<Eigen::Index> pooled;  // sorted covariate indices
  std::vector<Eigen::Index> per_arm[2];
  SelectionMethod method = SelectionMethod::none;
  std::map<Eigen::Index, double> diagnostics;  // |corr| or p-value per covariate
  bool clamped_k = false;
  bool zero_variance_skipped = false;
};

inline std::vector<Eigen::Index> select_corr_k(const Mat& X, const Vec& y, int k,
                                               bool* clamped = nullptr,
                                               bool* skipped = nullptr,
                                               std::map<Eigen::Index, double>* diag = nullptr) {
  if (k < 1) throw std::invalid_argument("select_corr_k: k must be >= 1");
  std::vector<std::pair<double, Eigen::Index>> scored;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double c;
    try {
      c = std::fabs(pearson_corr(X.col(j), y));
    } catch (const std::invalid_argument&) {
      if (skipped) *skipped = true;
      continue;
    }
    scored.emplace_back(c, j);
    if (diag) (*diag)[j] = c;
  }
  // ties broken by lower column index
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (clamped && k > static_cast<int>(scored.size())) *clamped = true;
  const std::size_t take = std::min<std::size_t>(scored.size(), static_cast<std::size_t>(k));
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

// strict inequality: |corr| must exceed xi
inline std::vector<Eigen::Index> select_corr_xi(const Mat& X, const Vec& y, double xi,
                                                bool* skipped = nullptr,
                                                std::map<Eigen::Index, double>* diag = nullptr) {
  if (!(xi > 0.0 && xi < 1.0))
    throw std::invalid_argument("select_corr_xi: xi must be in (0,1)");
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double c;
    try {
      c = std::fabs(pearson_corr(X.col(j), y));
    } catch (const std::invalid_argument&) {
      if (skipped) *skipped = true;
      continue;
    }
    if (diag) (*diag)[j] = c;
    if (c > xi) out.push_back(j);
  }
  return out;
}

// Welch test of each covariate between arms; select where p <= alpha.
inline std::vector<Eigen::Index> select_pretest(const Mat& X, const Eigen::VectorXi& A,
                                                double alpha, bool* skipped = nullptr,
                                                std::map<Eigen::Index, double>* diag = nullptr) {
  const Eigen::Index n1 = (A.array() == 1).count();
  const Eigen::Index n0 = (A.array() == 0).count();
  if (n1 < 2 || n0 < 2)
    throw DataError("select_pretest: both arms need >= 2 rows");
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    Vec x1(n1), x0(n0);
    Eigen::Index i1 = 0, i0 = 0;
    for (Eigen::Index i = 0; i < A.size(); ++i)
      (A[i] == 1 ? x1[i1++] : x0[i0++]) = X(i, j);
    double p;
    try {
      p = welch_t_test(x1, x0).p;
    } catch (const std::invalid_argument&) {
      if (skipped) *skipped = true;
      continue;
    }
    if (diag) (*diag)[j] = p;
    if (p <= alpha) out.push_back(j);
  }
  return out;
}

namespace detail {

inline std::vector<Eigen::Index> all_indices(Eigen::Index p) {
  std::vector<Eigen::Index> v(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) v[static_cast<std::size_t>(j)] = j;
  return v;
}

inline Family infer_family(const Vec& y) {
  std::set<double> vals;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    vals.insert(y[i]);
    if (vals.size() > 2) return Family::gaussian;
  }
  return vals.size() == 2 ? Family::binomial : Family::gaussian;
}

inline std::vector<Eigen::Index> lasso_select(const Mat& X, const Vec& y, Family fam,
                                              bool adaptive, int n_folds,
                                              std::uint64_t seed) {
  const Eigen::Index n = X.rows();
  if (n < 2) throw DataError("selection: arm too small to fit");
  const int folds = std::min<int>(n_folds, static_cast<int>(n));
  if (adaptive) return adaptive_lasso(X, y, fam, folds, seed).active_set;
  return cv_lasso(X, y, fam, folds, 100, seed).active_set;
}

}  // namespace detail

// Pooled selection for ANCOVA/ANHECOVA, per-arm selection for AIPW. The
// trial must be fully observed (imputation runs first).
inline SelectionResult select(const SelectionSpec& spec, const BinaryTrial& trial) {
  if (!trial.fully_observed())
    throw DataError("select: trial has missing cells; impute first");
  const Eigen::Index p = trial.n_covariates();
  if (p < 1) throw DataError("select: need at least one covariate");
  spec.validate(p);

  SelectionResult res;
  res.method = spec.method;

  if (spec.method == SelectionMethod::none) {
    res.pooled = detail::all_indices(p);
    res.per_arm[0] = res.pooled;
    res.per_arm[1] = res.pooled;
    return res;
  }

  // materialize per-arm views once
  Mat X1(trial.arm_count(1), p), X0(trial.arm_count(0), p);
  Vec y1(X1.rows()), y0(X0.rows());
  Eigen::Index i1 = 0, i0 = 0;
  for (Eigen::Index i = 0; i < trial.n_rows(); ++i) {
    if (trial.A[i] == 1) {
      X1.row(i1) = trial.X.row(i);
      y1[i1++] = trial.Y[i];
    } else {
      X0.row(i0) = trial.X.row(i);
      y0[i0++] = trial.Y[i];
    }
  }

  switch (spec.method) {
    case SelectionMethod::corr_k: {
      res.pooled = select_corr_k(trial.X, trial.Y, spec.k, &res.clamped_k,
                                 &res.zero_variance_skipped, &res.diagnostics);
      res.per_arm[0] = select_corr_k(X0, y0, spec.k, nullptr, &res.zero_variance_skipped);
      res.per_arm[1] = select_corr_k(X1, y1, spec.k, nullptr, &res.zero_variance_skipped);
      break;
    }
    case SelectionMethod::corr_xi: {
      res.pooled = select_corr_xi(trial.X, trial.Y, spec.xi,
                                  &res.zero_variance_skipped, &res.diagnostics);
      res.per_arm[0] = select_corr_xi(X0, y0, spec.xi, &res.zero_variance_skipped);
      res.per_arm[1] = select_corr_xi(X1, y1, spec.xi, &res.zero_variance_skipped);
      break;
    }
    case SelectionMethod::pre_test: {
      // the test already contrasts arms; per-arm sets duplicate pooled
      res.pooled = select_pretest(trial.X, trial.A, spec.alpha,
                                  &res.zero_variance_skipped, &res.diagnostics);
      res.per_arm[0] = res.pooled;
      res.per_arm[1] = res.pooled;
      break;
    }
    case SelectionMethod::lasso:
    case SelectionMethod::adaptive_lasso: {
      const bool adaptive = spec.method == SelectionMethod::adaptive_lasso;
      const Family fam = spec.family ? *spec.family : detail::infer_family(trial.Y);
      res.pooled = detail::lasso_select(trial.X, trial.Y, fam, adaptive, spec.n_folds,
                                        derive_seed(spec.seed, 0));
      res.per_arm[0] = detail::lasso_select(X0, y0, fam, adaptive, spec.n_folds,
                                            derive_seed(spec.seed, 1));
      res.per_arm[1] = detail::lasso_select(X1, y1, fam, adaptive, spec.n_folds,
                                            derive_seed(spec.seed, 2));
      break;
    }
    case SelectionMethod::none:
      break;
  }
  return res;
}

inline nlohmann::json selection_to_json(const SelectionResult& res,
                                        const std::vector<std::string>& names) {
  const auto name_list = [&](const std::vector<Eigen::Index>& idx) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto j : idx) arr.push_back(names[static_cast<std::size_t>(j)]);
    return arr;
  };
  nlohmann::json j;
  j["method"] = selection_method_name(res.method);
  j["pooled"] = name_list(res.pooled);
  j["arm0"] = name_list(res.per_arm[0]);
  j["arm1"] = name_list(res.per_arm[1]);
  return j;
}

}  // namespace coadvise
