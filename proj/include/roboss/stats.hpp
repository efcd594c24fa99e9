#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "roboss/error.hpp"
#include "roboss/format.hpp"

namespace roboss {

/// Per-dataset accuracies and their within-row ranks (1 = best).
struct RankTable {
  std::size_t D = 0;
  std::size_t p = 0;
  Eigen::MatrixXd accuracies;  // empty when built from mean ranks
  Eigen::MatrixXd ranks;       // empty when built from mean ranks
  Eigen::VectorXd mean_ranks;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
};

/// Descending ranks of one row; tied values share the average of their
/// positions.
inline std::vector<double> rank_row(const std::vector<double>& values) {
  const std::size_t p = values.size();
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });
  std::vector<double> ranks(p);
  for (std::size_t start = 0; start < p;) {
    std::size_t end = start + 1;
    while (end < p && values[order[end]] == values[order[start]]) ++end;
    const double avg = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = avg;
    start = end;
  }
  return ranks;
}

namespace detail {

inline std::vector<std::string> default_names(std::vector<std::string> names, std::size_t count,
                                              const std::string& prefix) {
  if (names.empty()) {
    for (std::size_t i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
  }
  if (names.size() != count) throw ShapeError("name list length mismatch", count, names.size());
  return names;
}

}  // namespace detail

/// accuracies: D rows (datasets) x p columns (models).
inline RankTable rank_models(const Eigen::MatrixXd& accuracies, std::vector<std::string> models = {},
                             std::vector<std::string> datasets = {}) {
  if (accuracies.rows() < 1 || accuracies.cols() < 2) {
    throw ShapeError("ranking needs at least one dataset and two models", 2,
                     static_cast<std::size_t>(accuracies.cols()));
  }
  if (!accuracies.allFinite()) throw DataError("accuracy table contains non-finite values");
  RankTable t;
  t.D = static_cast<std::size_t>(accuracies.rows());
  t.p = static_cast<std::size_t>(accuracies.cols());
  t.accuracies = accuracies;
  t.ranks.resize(accuracies.rows(), accuracies.cols());
  for (Eigen::Index d = 0; d < accuracies.rows(); ++d) {
    std::vector<double> row(t.p);
    for (std::size_t m = 0; m < t.p; ++m) row[m] = accuracies(d, static_cast<Eigen::Index>(m));
    const auto r = rank_row(row);
    for (std::size_t m = 0; m < t.p; ++m) t.ranks(d, static_cast<Eigen::Index>(m)) = r[m];
  }
  t.mean_ranks = t.ranks.colwise().mean().transpose();
  t.models = detail::default_names(std::move(models), t.p, "model_");
  t.datasets = detail::default_names(std::move(datasets), t.D, "dataset_");
  return t;
}

/// A table known only through its mean ranks and dataset count.
inline RankTable from_mean_ranks(const Eigen::VectorXd& mean_ranks, std::size_t D,
                                 std::vector<std::string> models = {}) {
  if (mean_ranks.size() < 2) throw ShapeError("need at least two mean ranks", 2, static_cast<std::size_t>(mean_ranks.size()));
  if (D < 1) throw ParameterError("dataset count D must be at least 1");
  const double pd = static_cast<double>(mean_ranks.size());
  if (!mean_ranks.allFinite() || std::abs(mean_ranks.sum() - pd * (pd + 1.0) / 2.0) > 0.005 * pd + 1e-9) {
    throw ParameterError("mean ranks must sum to p(p+1)/2");
  }
  RankTable t;
  t.D = D;
  t.p = static_cast<std::size_t>(mean_ranks.size());
  t.mean_ranks = mean_ranks;
  t.models = detail::default_names(std::move(models), t.p, "model_");
  return t;
}

/// (12D / (p(p+1))) * (sum R^2 - p(p+1)^2 / 4).
inline double friedman_chi2(const Eigen::VectorXd& mean_ranks, std::size_t D) {
  const double p = static_cast<double>(mean_ranks.size());
  const double d = static_cast<double>(D);
  return 12.0 * d / (p * (p + 1.0)) * (mean_ranks.squaredNorm() - p * (p + 1.0) * (p + 1.0) / 4.0);
}

inline double friedman_chi2(const RankTable& table) { return friedman_chi2(table.mean_ranks, table.D); }

/// Iman-Davenport correction: (D-1) chi2 / (D(p-1) - chi2).
inline double friedman_F(double chi2, std::size_t D, std::size_t p) {
  const double d = static_cast<double>(D);
  const double denom = d * (static_cast<double>(p) - 1.0) - chi2;
  if (!(denom > 0.0)) throw NumericError("degenerate Friedman statistic: D(p-1) - chi2 must be positive");
  return (d - 1.0) * chi2 / denom;
}

/// Two-tailed Nemenyi critical values (studentized range at infinite
/// degrees of freedom, divided by sqrt 2) for p = 2..10.
inline double nemenyi_q(std::size_t p, double alpha = 0.05) {
  static constexpr std::array<double, 9> q05{1.959964, 2.343701, 2.569032, 2.727774, 2.849705,
                                             2.948320, 3.030878, 3.101730, 3.163684};
  static constexpr std::array<double, 9> q10{1.644854, 2.052293, 2.291341, 2.459516, 2.588521,
                                             2.692732, 2.779884, 2.854606, 2.919889};
  if (p < 2 || p > 10) throw ParameterError("Nemenyi table covers p = 2..10, got p = " + std::to_string(p));
  if (alpha == 0.05) return q05[p - 2];
  if (alpha == 0.10) return q10[p - 2];
  throw ParameterError("Nemenyi table covers alpha = 0.05 and 0.10 only");
}

inline double nemenyi_cd(std::size_t p, std::size_t D, double alpha = 0.05) {
  if (D < 1) throw ParameterError("dataset count D must be at least 1");
  const double pp = static_cast<double>(p);
  return nemenyi_q(p, alpha) * std::sqrt(pp * (pp + 1.0) / (6.0 * static_cast<double>(D)));
}

/// F((p-1), (p-1)(D-1)) at alpha = 0.05 for the few degree-of-freedom pairs
/// that are tabulated here; callers supply anything else.
inline std::optional<double> critical_f(std::size_t df1, std::size_t df2, double alpha = 0.05) {
  if (alpha != 0.05 || df1 != 5) return std::nullopt;
  switch (df2) {
    case 390: return 2.24;
    case 155: return 2.27;
    case 75: return 2.35;
    default: return std::nullopt;
  }
}

struct NemenyiReport {
  double cd = 0.0;
  Eigen::MatrixXd diffs;  // R_i - R_j
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> significant;
};

/// Significant iff |R_i - R_j| > CD (strict).
inline NemenyiReport nemenyi_report(const RankTable& table, double cd) {
  const auto p = static_cast<Eigen::Index>(table.p);
  NemenyiReport r{cd, Eigen::MatrixXd(p, p), Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>(p, p)};
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      r.diffs(i, j) = table.mean_ranks[i] - table.mean_ranks[j];
      r.significant(i, j) = std::abs(r.diffs(i, j)) > cd;
    }
  }
  return r;
}

/// One row of a "model versus reference" comparison.
struct ReferenceComparison {
  std::string model;
  double mean_rank = 0.0;
  std::optional<double> rank_difference;  // unset for the reference itself
  std::optional<bool> significant;
};

inline std::vector<ReferenceComparison> compare_to_reference(const RankTable& table, const NemenyiReport& report,
                                                             std::size_t reference) {
  if (reference >= table.p) throw IndexError("reference model index out of range");
  std::vector<ReferenceComparison> rows;
  const auto ref = static_cast<Eigen::Index>(reference);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(table.p); ++i) {
    ReferenceComparison c{table.models[static_cast<std::size_t>(i)], table.mean_ranks[i], {}, {}};
    if (i != ref) {
      c.rank_difference = report.diffs(i, ref);
      c.significant = report.significant(i, ref);
    }
    rows.push_back(std::move(c));
  }
  return rows;
}

struct TestReport {
  double chi2_F = 0.0;
  double F_F = 0.0;
  std::size_t df1 = 0;
  std::size_t df2 = 0;
  std::optional<double> critical_F;
  std::optional<bool> reject;  // unset when no critical value is known
  double alpha = 0.05;
  NemenyiReport nemenyi;
};

/// Friedman + Iman-Davenport + Nemenyi. critical_F falls back to the
/// built-in table; reject is F_F > critical_F (strict).
inline TestReport run_tests(const RankTable& table, double alpha = 0.05,
                            std::optional<double> critical_F = std::nullopt) {
  TestReport r;
  r.alpha = alpha;
  r.chi2_F = friedman_chi2(table);
  r.F_F = friedman_F(r.chi2_F, table.D, table.p);
  r.df1 = table.p - 1;
  r.df2 = (table.p - 1) * (table.D - 1);
  r.critical_F = critical_F ? critical_F : critical_f(r.df1, r.df2, alpha);
  if (r.critical_F) r.reject = r.F_F > *r.critical_F;
  r.nemenyi = nemenyi_report(table, nemenyi_cd(table.p, table.D, alpha));
  return r;
}

/// Pivots a harness result CSV (columns dataset, model, mean_acc; others
/// ignored) into a ranked table. Models keep first-appearance order.
inline RankTable rank_table_from_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("results file is empty");
  const auto header = split(line, ',');
  auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError("results file lacks a '" + std::string(name) + "' column");
  };
  const std::size_t c_ds = column("dataset");
  const std::size_t c_model = column("model");
  const std::size_t c_acc = column("mean_acc");
  std::vector<std::string> datasets;
  std::vector<std::string> models;
  std::map<std::pair<std::string, std::string>, double> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw DataError("results line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    const std::string ds(fields[c_ds]);
    const std::string model(fields[c_model]);
    double acc = 0.0;
    if (!try_parse_double(fields[c_acc], acc)) throw DataError("results line " + std::to_string(line_no) + ": mean_acc is not numeric");
    if (std::find(datasets.begin(), datasets.end(), ds) == datasets.end()) datasets.push_back(ds);
    if (std::find(models.begin(), models.end(), model) == models.end()) models.push_back(model);
    if (!cells.emplace(std::make_pair(ds, model), acc).second) {
      throw DataError("results line " + std::to_string(line_no) + ": duplicate entry for (" + ds + ", " + model + ")");
    }
  }
  Eigen::MatrixXd acc(static_cast<Eigen::Index>(datasets.size()), static_cast<Eigen::Index>(models.size()));
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (std::size_t m = 0; m < models.size(); ++m) {
      const auto it = cells.find({datasets[d], models[m]});
      if (it == cells.end()) {
        throw DataError("results file has no entry for dataset '" + datasets[d] + "' and model '" + models[m] + "'");
      }
      acc(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m)) = it->second;
    }
  }
  return rank_models(acc, models, datasets);
}

/// Report CSV: one "friedman" row followed by one "nemenyi" row per model
/// compared against the reference model.
inline void write_test_report(std::ostream& out, const RankTable& table, const TestReport& report,
                              std::size_t reference) {
  CsvWriter csv(out);
  csv.header({"section", "model", "mean_rank", "rank_difference", "significant", "p", "D", "chi2_F", "F_F", "df1",
              "df2", "critical_F", "reject", "CD"});
  csv.cell("friedman").cell("").cell("").cell("").cell("");
  csv.cell(table.p).cell(table.D).cell(report.chi2_F).cell(report.F_F).cell(report.df1).cell(report.df2);
  csv.cell(report.critical_F ? format_double(*report.critical_F) : "");
  csv.cell(report.reject ? (*report.reject ? "Yes" : "No") : "");
  csv.cell(report.nemenyi.cd);
  csv.end_row();
  for (const auto& row : compare_to_reference(table, report.nemenyi, reference)) {
    csv.cell("nemenyi").cell(row.model).cell(row.mean_rank);
    csv.cell(row.rank_difference ? format_double(*row.rank_difference) : "-");
    csv.cell(row.significant ? (*row.significant ? "Yes" : "No") : "N/A");
    for (int i = 0; i < 8; ++i) csv.cell("");
    csv.cell(report.nemenyi.cd);
    csv.end_row();
  }
}

}  // namespace roboss
