#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "roboss/error.hpp"
#include "roboss/format.hpp"
#include "roboss/random.hpp"

namespace roboss {

/// Per-feature (min, max) of the data a normalization was fit on.
struct Scaler {
  std::vector<double> min;
  std::vector<double> max;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

struct Dataset {
  Eigen::MatrixXd X;  // n x m
  Eigen::VectorXd y;  // +1 / -1
  std::string name;
  bool normalized = false;
  std::optional<Scaler> scaler;  // present iff normalized

  std::size_t size() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(X.cols()); }
};

inline void validate(const Dataset& ds) {
  if (static_cast<std::size_t>(ds.y.size()) != ds.size()) {
    throw ShapeError("dataset label count does not match sample count", ds.size(),
                     static_cast<std::size_t>(ds.y.size()));
  }
  if (!ds.X.allFinite()) throw DataError("dataset '" + ds.name + "' has non-finite features");
  for (Eigen::Index i = 0; i < ds.y.size(); ++i) {
    if (ds.y[i] != 1.0 && ds.y[i] != -1.0) {
      throw DataError("dataset '" + ds.name + "' has a label other than +1/-1 at row " + std::to_string(i));
    }
  }
  if (ds.normalized != ds.scaler.has_value()) {
    throw DataError("dataset '" + ds.name + "' must carry a scaler exactly when normalized");
  }
}

enum class DataFormat { CSV, SparseIndexValue };

namespace detail {

inline Eigen::VectorXd resolve_labels(const std::vector<double>& raw, const std::string& name) {
  const std::set<double> alphabet(raw.begin(), raw.end());
  const bool signed_labels = std::all_of(alphabet.begin(), alphabet.end(),
                                         [](double v) { return v == 1.0 || v == -1.0; });
  const bool binary_labels = std::all_of(alphabet.begin(), alphabet.end(),
                                         [](double v) { return v == 0.0 || v == 1.0; });
  if (!signed_labels && !binary_labels) {
    std::string seen;
    for (double v : alphabet) seen += (seen.empty() ? "" : ", ") + format_double(v);
    throw DataError("dataset '" + name + "' has mixed or unsupported label alphabet {" + seen +
                    "}; expected {-1,+1} or {0,1}");
  }
  Eigen::VectorXd y(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = raw[i] == 0.0 ? -1.0 : raw[i];
  }
  return y;
}

inline std::string strip(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
  return line;
}

}  // namespace detail

/// Comma-separated rows, label in the last column. A first row that does
/// not parse as numbers is taken as a header and skipped.
inline Dataset parse_csv(std::istream& in, std::string name) {
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::strip(std::move(line));
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!try_parse_double(fields[i], values[i])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && width == 0) {
        width = fields.size();  // header row
        continue;
      }
      throw DataError(name + ": line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (fields.size() < 2) {
      throw DataError(name + ": line " + std::to_string(line_no) + ": need at least one feature and a label");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError(name + ": line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(fields.size()));
    }
    labels.push_back(values.back());
    values.pop_back();
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError(name + ": no data rows");

  Dataset ds;
  ds.name = std::move(name);
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < width; ++j) {
      ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  ds.y = detail::resolve_labels(labels, ds.name);
  validate(ds);
  return ds;
}

/// "label idx:val idx:val ..." lines with 1-based indices; absent features
/// are 0. Text after '#' is ignored.
inline Dataset parse_sparse(std::istream& in, std::string name) {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::vector<double> labels;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;
    const auto fail = [&](const std::string& why) {
      throw DataError(name + ": line " + std::to_string(line_no) + ": " + why);
    };
    double label = 0.0;
    if (!try_parse_double(token, label)) fail("bad label '" + token + "'");
    std::vector<std::pair<std::size_t, double>> entries;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) fail("expected index:value, got '" + token + "'");
      double idx = 0.0;
      double value = 0.0;
      if (!try_parse_double(std::string_view(token).substr(0, colon), idx) || idx < 1.0 ||
          idx != std::floor(idx)) {
        fail("bad feature index in '" + token + "'");
      }
      if (!try_parse_double(std::string_view(token).substr(colon + 1), value)) {
        fail("bad feature value in '" + token + "'");
      }
      const auto j = static_cast<std::size_t>(idx);
      dim = std::max(dim, j);
      entries.emplace_back(j - 1, value);
    }
    labels.push_back(label);
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw DataError(name + ": no data rows");

  Dataset ds;
  ds.name = std::move(name);
  ds.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, v] : rows[i]) ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
  }
  ds.y = detail::resolve_labels(labels, ds.name);
  validate(ds);
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
  const std::string name = path.stem().string();
  return format == DataFormat::CSV ? parse_csv(in, name) : parse_sparse(in, name);
}

/// Inverse of parse_csv for headerless files: features then the +1/-1
/// label, numbers in shortest round-trip form.
inline void write_csv(std::ostream& out, const Dataset& ds) {
  CsvWriter csv(out);
  for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j) csv.cell(ds.X(i, j));
    csv.cell(static_cast<int>(ds.y[i]));
    csv.end_row();
  }
}

inline Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.name = ds.name;
  out.normalized = ds.normalized;
  out.scaler = ds.scaler;
  out.X.resize(static_cast<Eigen::Index>(indices.size()), ds.X.cols());
  out.y.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= ds.size()) throw IndexError("subset index " + std::to_string(indices[r]) + " out of range");
    out.X.row(static_cast<Eigen::Index>(r)) = ds.X.row(static_cast<Eigen::Index>(indices[r]));
    out.y[static_cast<Eigen::Index>(r)] = ds.y[static_cast<Eigen::Index>(indices[r])];
  }
  return out;
}

/// Affine map of every feature onto [-1, 1] using the stored extremes;
/// constant features map to 0. Unseen values may land outside [-1, 1].
inline Dataset apply_scaler(const Dataset& ds, const Scaler& scaler) {
  if (scaler.min.size() != ds.dim() || scaler.max.size() != ds.dim()) {
    throw ShapeError("scaler feature count does not match dataset", ds.dim(), scaler.min.size());
  }
  if (ds.normalized) throw DataError("dataset '" + ds.name + "' is already normalized");
  Dataset out = ds;
  for (Eigen::Index j = 0; j < out.X.cols(); ++j) {
    const double lo = scaler.min[static_cast<std::size_t>(j)];
    const double hi = scaler.max[static_cast<std::size_t>(j)];
    const double range = hi - lo;
    for (Eigen::Index i = 0; i < out.X.rows(); ++i) {
      out.X(i, j) = range > 0.0 ? 2.0 * (ds.X(i, j) - lo) / range - 1.0 : 0.0;
    }
  }
  out.normalized = true;
  out.scaler = scaler;
  return out;
}

inline Scaler fit_scaler(const Dataset& ds) {
  if (ds.size() == 0) throw DataError("cannot fit a scaler on an empty dataset");
  Scaler s;
  for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
    s.min.push_back(ds.X.col(j).minCoeff());
    s.max.push_back(ds.X.col(j).maxCoeff());
  }
  return s;
}

/// Per-feature min-max normalization onto [-1, 1].
inline Dataset normalize(const Dataset& ds) {
  if (ds.normalized) throw DataError("dataset '" + ds.name + "' is already normalized");
  return apply_scaler(ds, fit_scaler(ds));
}

/// Assignment of every sample to one of k folds.
struct FoldPlan {
  std::size_t k = 5;
  std::vector<std::size_t> assignments;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (assignments[i] == fold) out.push_back(i);
    }
    return out;
  }
  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
      if (assignments[i] != fold) out.push_back(i);
    }
    return out;
  }
};

/// Seeded shuffle, then round-robin: fold sizes differ by at most one.
inline FoldPlan make_folds(std::size_t n, std::size_t k = 5, std::uint64_t seed = 0) {
  if (k < 2) throw ParameterError("fold count must be at least 2");
  if (n < k) throw ParameterError("need at least as many samples (" + std::to_string(n) + ") as folds (" +
                                  std::to_string(k) + ")");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  FoldPlan plan{k, std::vector<std::size_t>(n), seed};
  for (std::size_t pos = 0; pos < n; ++pos) plan.assignments[order[pos]] = pos % k;
  return plan;
}

enum class CorruptionMode { Outliers, LabelNoise };

inline std::string_view to_string(CorruptionMode mode) {
  return mode == CorruptionMode::Outliers ? "outliers" : "label-noise";
}

/// Audit trail of one corruption pass; enough to undo it exactly.
struct CorruptionRecord {
  CorruptionMode mode = CorruptionMode::Outliers;
  double rate = 0.0;
  std::vector<std::size_t> touched_indices;   // ascending
  std::vector<std::size_t> touched_features;  // outliers only, aligned with indices
  std::vector<double> original_values;        // outliers only, aligned with indices
  double factor = 10.0;
  std::uint64_t seed = 0;

  friend bool operator==(const CorruptionRecord&, const CorruptionRecord&) = default;
};

/// round(rate * n), halves rounded up.
inline std::size_t corruption_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 0.5));
}

namespace detail {

inline void check_rate(double rate) {
  if (!(rate > 0.0 && rate < 1.0)) {
    throw ParameterError("corruption rate must lie in (0, 1), got " + format_double(rate));
  }
}

}  // namespace detail

/// Multiplies one uniformly chosen feature of round(rate * n) distinct
/// samples by `factor`.
inline std::pair<Dataset, CorruptionRecord> inject_outliers(const Dataset& ds, double rate,
                                                            double factor = 10.0,
                                                            std::uint64_t seed = 0) {
  detail::check_rate(rate);
  if (!std::isfinite(factor)) throw ParameterError("outlier factor must be finite");
  if (ds.dim() == 0) throw DataError("cannot inject outliers into a dataset without features");
  Rng rng(seed);
  auto picked = rng.sample_without_replacement(ds.size(), corruption_count(rate, ds.size()));
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i : picked) cells.emplace_back(i, static_cast<std::size_t>(rng.below(ds.dim())));
  std::sort(cells.begin(), cells.end());

  Dataset out = ds;
  CorruptionRecord rec{CorruptionMode::Outliers, rate, {}, {}, {}, factor, seed};
  for (const auto& [i, j] : cells) {
    auto& cell = out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    rec.touched_indices.push_back(i);
    rec.touched_features.push_back(j);
    rec.original_values.push_back(cell);
    cell *= factor;
  }
  return {std::move(out), std::move(rec)};
}

/// Flips the labels of round(rate * n) distinct samples.
inline std::pair<Dataset, CorruptionRecord> inject_label_noise(const Dataset& ds, double rate,
                                                               std::uint64_t seed = 0) {
  detail::check_rate(rate);
  Rng rng(seed);
  auto picked = rng.sample_without_replacement(ds.size(), corruption_count(rate, ds.size()));
  std::sort(picked.begin(), picked.end());
  Dataset out = ds;
  for (std::size_t i : picked) out.y[static_cast<Eigen::Index>(i)] = -out.y[static_cast<Eigen::Index>(i)];
  CorruptionRecord rec{CorruptionMode::LabelNoise, rate, std::move(picked), {}, {}, 1.0, seed};
  return {std::move(out), std::move(rec)};
}

/// Undoes a corruption pass. Outlier cells are restored from the recorded
/// originals (x * factor / factor is not always x in floating point) after
/// checking that the record matches the data.
inline Dataset revert_corruption(const Dataset& ds, const CorruptionRecord& rec) {
  Dataset out = ds;
  for (std::size_t r = 0; r < rec.touched_indices.size(); ++r) {
    const std::size_t i = rec.touched_indices[r];
    if (i >= ds.size()) throw DataError("corruption record index " + std::to_string(i) + " out of range");
    const auto row = static_cast<Eigen::Index>(i);
    if (rec.mode == CorruptionMode::LabelNoise) {
      out.y[row] = -out.y[row];
      continue;
    }
    if (rec.touched_features.size() != rec.touched_indices.size() ||
        rec.original_values.size() != rec.touched_indices.size()) {
      throw DataError("outlier record is missing feature or value entries");
    }
    const std::size_t j = rec.touched_features[r];
    if (j >= ds.dim()) throw DataError("corruption record feature " + std::to_string(j) + " out of range");
    auto& cell = out.X(row, static_cast<Eigen::Index>(j));
    if (cell != rec.original_values[r] * rec.factor) {
      throw DataError("dataset does not match corruption record at row " + std::to_string(i));
    }
    cell = rec.original_values[r];
  }
  return out;
}

/// Two Gaussian clusters in `dim` dimensions, centroids `separation` apart
/// along the first axis, isotropic spread `spread`. The first ceil(n/2)
/// samples are labeled +1.
struct ClusterSpec {
  std::size_t n = 200;
  std::size_t dim = 8;
  double separation = 6.0;
  double spread = 0.75;
  std::uint64_t seed = 0;
};

inline Dataset make_two_clusters(const ClusterSpec& spec) {
  if (spec.n < 2 || spec.dim < 1) throw ParameterError("two-cluster set needs n >= 2 and dim >= 1");
  Rng rng(spec.seed);
  Dataset ds;
  ds.name = "two-clusters";
  ds.X.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.dim));
  ds.y.resize(static_cast<Eigen::Index>(spec.n));
  const std::size_t positives = (spec.n + 1) / 2;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double label = i < positives ? 1.0 : -1.0;
    ds.y[r] = label;
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j) ds.X(r, j) = spec.spread * rng.normal();
    ds.X(r, 0) += label * spec.separation / 2.0;
  }
  return ds;
}

}  // namespace roboss
