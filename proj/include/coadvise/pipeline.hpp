#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coadvise/dataset.hpp"
#include "coadvise/estimators.hpp"
#include "coadvise/imputer.hpp"
#include "coadvise/selector.hpp"

namespace coadvise {

struct AnalysisConfig {
  ImputationSpec imputation;
  SelectionSpec selection;
  LinkFamily out1_link{Link::identity};
  LinkFamily out0_link{Link::identity};
  double conf_level = 0.95;
};

struct AnalysisResult {
  std::vector<AteEstimate> estimates;  // Simple, ANCOVA, ANHECOVA, AIPW
  SelectionResult selection;
  PotentialMeans aipw_means;
  std::vector<std::string> covariate_names;  // after imputation (missInd adds)
  std::vector<Eigen::Index> dropped_rows;
  std::vector<std::string> added_columns;
};

// imputation -> variable selection -> all four estimators. ANCOVA/ANHECOVA
// consume the pooled set; AIPW refits per arm on its own set.
inline AnalysisResult analyze(const BinaryTrial& trial, const AnalysisConfig& cfg) {
  AnalysisResult out;
  ImputedTrial imp = impute(cfg.imputation, trial);
  const BinaryTrial& t = imp.trial;
  out.covariate_names = t.covariate_names;
  out.dropped_rows = imp.dropped_rows;
  out.added_columns = imp.added_columns;
  const std::optional<Vec> w(imp.row_weights);

  if (t.n_covariates() >= 1) {
    out.selection = select(cfg.selection, t);
  } else {
    out.selection.method = cfg.selection.method;
  }

  const auto subset = [&](const std::vector<Eigen::Index>& idx) {
    Mat Xs(t.n_rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
      Xs.col(static_cast<Eigen::Index>(k)) = t.X.col(idx[k]);
    return Xs;
  };

  out.estimates.push_back(simple_estimator(t.A, t.Y, w, cfg.conf_level));
  out.estimates.push_back(ancova(t.A, t.Y, subset(out.selection.pooled), w, cfg.conf_level));
  out.estimates.push_back(anhecova(t.A, t.Y, subset(out.selection.pooled), w, cfg.conf_level));
  AipwResult ar = aipw(t.A, t.Y, subset(out.selection.per_arm[1]),
                       subset(out.selection.per_arm[0]), cfg.out1_link, cfg.out0_link, w,
                       cfg.conf_level);
  out.estimates.push_back(ar.estimate);
  out.aipw_means = ar.means;
  return out;
}

}  // namespace coadvise
