#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coadvise/errors.hpp"

namespace coadvise {

using BoolMat = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using BoolVec = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

// Trial data with explicit per-cell missingness. Unobserved cells hold 0.0
// but carry observed=0 and must never be interpreted downstream.
struct TrialDataset {
  Eigen::Index n_rows = 0;
  std::vector<std::string> treatment;        // opaque arm labels
  Eigen::VectorXd outcome;                   // per-row value
  BoolVec outcome_observed;                  // 1 = observed
  Eigen::MatrixXd covariates;                // n_rows x p
  BoolMat covariate_observed;                // n_rows x p
  std::vector<std::string> covariate_names;  // unique, size p
  std::string outcome_name = "Y";
  std::string treatment_name = "A";

  Eigen::Index n_covariates() const { return covariates.cols(); }
};

// Dataset after treatment encoding: A in {0,1}, both arms non-empty.
struct BinaryTrial {
  Eigen::VectorXi A;
  Eigen::VectorXd Y;
  BoolVec Y_observed;
  Eigen::MatrixXd X;
  BoolMat X_observed;
  std::vector<std::string> covariate_names;

  Eigen::Index n_rows() const { return A.size(); }
  Eigen::Index n_covariates() const { return X.cols(); }
  Eigen::Index arm_count(int a) const {
    return (A.array() == a).count();
  }
  bool fully_observed() const {
    return Y_observed.minCoeff() == 1 &&
           (X_observed.size() == 0 || X_observed.minCoeff() == 1);
  }
};

struct MissingnessSummary {
  Eigen::Index outcome_missing = 0;
  std::vector<Eigen::Index> covariate_missing;  // per column
  Eigen::Index complete_rows = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  if (line.empty()) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Missing markers: empty field and the literal token NA. Anything else
// must parse fully as a number.
inline bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

inline std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace detail

// CSV: comma-separated, header row, UTF-8, NA/empty = missing, '.' decimal.
inline TrialDataset load_csv(const std::string& path, const std::string& outcome_col,
                             const std::string& treatment_col) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("load_csv: empty file: " + path);
  std::vector<std::string> header = detail::split_csv_line(line);
  for (auto& h : header) h = detail::trim(h);

  {
    std::set<std::string> seen;
    for (const auto& h : header)
      if (!seen.insert(h).second)
        throw DataError("load_csv: duplicate header label: " + h);
  }

  const auto find_col = [&](const std::string& name) -> Eigen::Index {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw DataError("load_csv: missing column: " + name);
    return static_cast<Eigen::Index>(it - header.begin());
  };
  const Eigen::Index yi = find_col(outcome_col);
  const Eigen::Index ai = find_col(treatment_col);

  std::vector<Eigen::Index> xcols;
  std::vector<std::string> xnames;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(header.size()); ++j) {
    if (j == yi || j == ai) continue;
    xcols.push_back(j);
    xnames.push_back(header[j]);
  }

  std::vector<std::string> trt;
  std::vector<double> yvals;
  std::vector<std::uint8_t> yobs;
  std::vector<std::vector<double>> xrows;
  std::vector<std::vector<std::uint8_t>> xobs;

  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> f = detail::split_csv_line(line);
    if (f.size() != header.size())
      throw DataError("load_csv: row " + std::to_string(row + 1) + " has " +
                      std::to_string(f.size()) + " fields, expected " +
                      std::to_string(header.size()));
    for (auto& c : f) c = detail::trim(c);

    if (detail::is_missing_token(f[ai]))
      throw DataError("load_csv: missing treatment label at data row " +
                      std::to_string(row + 1));
    trt.push_back(f[ai]);

    if (detail::is_missing_token(f[yi])) {
      yvals.push_back(0.0);
      yobs.push_back(0);
    } else {
      const auto v = detail::parse_number(f[yi]);
      if (!v)
        throw DataError("load_csv: non-numeric outcome value '" + f[yi] +
                        "' at data row " + std::to_string(row + 1));
      yvals.push_back(*v);
      yobs.push_back(1);
    }

    std::vector<double> xr(xcols.size(), 0.0);
    std::vector<std::uint8_t> xo(xcols.size(), 1);
    for (std::size_t k = 0; k < xcols.size(); ++k) {
      const std::string& cell = f[xcols[k]];
      if (detail::is_missing_token(cell)) {
        xo[k] = 0;
      } else {
        const auto v = detail::parse_number(cell);
        if (!v)
          throw DataError("load_csv: non-numeric covariate value '" + cell +
                          "' in column " + xnames[k] + " at data row " +
                          std::to_string(row + 1));
        xr[k] = *v;
      }
    }
    xrows.push_back(std::move(xr));
    xobs.push_back(std::move(xo));
    ++row;
  }

  TrialDataset ds;
  ds.n_rows = row;
  ds.treatment = std::move(trt);
  ds.outcome = Eigen::Map<Eigen::VectorXd>(yvals.data(), row);
  ds.outcome_observed = Eigen::Map<BoolVec>(yobs.data(), row);
  ds.covariates.resize(row, static_cast<Eigen::Index>(xcols.size()));
  ds.covariate_observed.resize(row, static_cast<Eigen::Index>(xcols.size()));
  for (Eigen::Index i = 0; i < row; ++i)
    for (Eigen::Index j = 0; j < ds.covariates.cols(); ++j) {
      ds.covariates(i, j) = xrows[i][j];
      ds.covariate_observed(i, j) = xobs[i][j];
    }
  ds.covariate_names = std::move(xnames);
  ds.outcome_name = outcome_col;
  ds.treatment_name = treatment_col;
  return ds;
}

inline void write_csv(const TrialDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("write_csv: cannot open file for writing: " + path);
  out << ds.treatment_name << ',' << ds.outcome_name;
  for (const auto& n : ds.covariate_names) out << ',' << n;
  out << '\n';
  char buf[64];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (Eigen::Index i = 0; i < ds.n_rows; ++i) {
    out << ds.treatment[i] << ',';
    if (ds.outcome_observed[i]) put(ds.outcome[i]); else out << "NA";
    for (Eigen::Index j = 0; j < ds.n_covariates(); ++j) {
      out << ',';
      if (ds.covariate_observed(i, j)) put(ds.covariates(i, j)); else out << "NA";
    }
    out << '\n';
  }
}

inline BinaryTrial encode_treatment(const TrialDataset& ds, const std::string& trt_name,
                                    const std::string& ctrl_name) {
  BinaryTrial t;
  t.A.resize(ds.n_rows);
  Eigen::Index n1 = 0, n0 = 0;
  for (Eigen::Index i = 0; i < ds.n_rows; ++i) {
    if (ds.treatment[i] == trt_name) {
      t.A[i] = 1;
      ++n1;
    } else if (ds.treatment[i] == ctrl_name) {
      t.A[i] = 0;
      ++n0;
    } else {
      throw DataError("encode_treatment: unknown treatment label '" +
                      ds.treatment[i] + "' at row " + std::to_string(i + 1));
    }
  }
  if (n1 == 0) throw DataError("encode_treatment: empty arm: " + trt_name);
  if (n0 == 0) throw DataError("encode_treatment: empty arm: " + ctrl_name);
  t.Y = ds.outcome;
  t.Y_observed = ds.outcome_observed;
  t.X = ds.covariates;
  t.X_observed = ds.covariate_observed;
  t.covariate_names = ds.covariate_names;
  return t;
}

inline MissingnessSummary missingness_summary(const TrialDataset& ds) {
  MissingnessSummary s;
  s.covariate_missing.assign(static_cast<std::size_t>(ds.n_covariates()), 0);
  for (Eigen::Index i = 0; i < ds.n_rows; ++i) {
    bool complete = true;
    if (!ds.outcome_observed[i]) {
      ++s.outcome_missing;
      complete = false;
    }
    for (Eigen::Index j = 0; j < ds.n_covariates(); ++j) {
      if (!ds.covariate_observed(i, j)) {
        ++s.covariate_missing[static_cast<std::size_t>(j)];
        complete = false;
      }
    }
    if (complete) ++s.complete_rows;
  }
  return s;
}

}  // namespace coadvise
