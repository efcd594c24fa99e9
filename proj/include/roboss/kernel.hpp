#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roboss/error.hpp"

namespace roboss {

enum class KernelKind { Gaussian, Linear };

struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double sigma = 1.0;  // Gaussian width, in feature units

  static KernelSpec gaussian(double sigma) { return {KernelKind::Gaussian, sigma}; }
  static KernelSpec linear() { return {KernelKind::Linear, 1.0}; }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline std::string_view to_string(KernelKind kind) {
  return kind == KernelKind::Gaussian ? "gaussian" : "linear";
}

inline KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "gaussian") return KernelKind::Gaussian;
  if (name == "linear") return KernelKind::Linear;
  throw ParameterError("unknown kernel '" + std::string(name) + "'");
}

inline void validate(const KernelSpec& spec) {
  if (spec.kind == KernelKind::Gaussian && !(std::isfinite(spec.sigma) && spec.sigma > 0.0)) {
    throw ParameterError("kernel parameter out of domain: sigma > 0");
  }
}

/// Largest sample count for which a dense Gram matrix is materialized.
inline constexpr std::size_t kMaxGramSamples = 20000;

namespace detail {

inline double kernel_eval_unchecked(const KernelSpec& spec, const double* x, const double* z,
                                    std::size_t dim, std::size_t x_stride = 1,
                                    std::size_t z_stride = 1) {
  double acc = 0.0;
  if (spec.kind == KernelKind::Gaussian) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = x[i * x_stride] - z[i * z_stride];
      acc += d * d;
    }
    return std::exp(-acc / (spec.sigma * spec.sigma));
  }
  for (std::size_t i = 0; i < dim; ++i) acc += x[i * x_stride] * z[i * z_stride];
  return acc;
}

}  // namespace detail

/// Gaussian: exp(-||x - z||^2 / sigma^2). Linear: <x, z>.
inline double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                          std::span<const double> z) {
  validate(spec);
  if (x.size() != z.size()) throw ShapeError("kernel_eval: vector length mismatch", x.size(), z.size());
  return detail::kernel_eval_unchecked(spec, x.data(), z.data(), x.size());
}

/// Same evaluation for Eigen rows (copied to contiguous storage if needed).
inline double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                          const Eigen::Ref<const Eigen::RowVectorXd>& z) {
  validate(spec);
  if (x.size() != z.size()) {
    throw ShapeError("kernel_eval: vector length mismatch", static_cast<std::size_t>(x.size()),
                     static_cast<std::size_t>(z.size()));
  }
  return detail::kernel_eval_unchecked(spec, x.data(), z.data(), static_cast<std::size_t>(x.size()));
}

/// Precomputed symmetric Gram matrix over a fixed sample set. Immutable.
class KernelMatrix {
 public:
  KernelMatrix(Eigen::MatrixXd entries, KernelSpec spec)
      : entries_(std::move(entries)), spec_(spec) {}

  std::size_t size() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  const KernelSpec& spec() const noexcept { return spec_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// Row j as a read-only view. Storage is column-major and the matrix is
  /// symmetric, so column j holds exactly the values of row j.
  std::span<const double> row(std::size_t j) const {
    if (j >= size()) {
      throw IndexError("kernel row " + std::to_string(j) + " out of range for n = " +
                       std::to_string(size()));
    }
    return {entries_.data() + j * size(), size()};
  }

  /// Principal submatrix on `indices` (training folds reuse a full-data Gram).
  KernelMatrix restrict_to(std::span<const std::size_t> indices) const {
    const auto m = static_cast<Eigen::Index>(indices.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      for (Eigen::Index r = 0; r < m; ++r) {
        sub(r, c) = entries_(static_cast<Eigen::Index>(indices[r]),
                             static_cast<Eigen::Index>(indices[c]));
      }
    }
    return {std::move(sub), spec_};
  }

 private:
  Eigen::MatrixXd entries_;
  KernelSpec spec_;
};

inline std::span<const double> kernel_row(const KernelMatrix& matrix, std::size_t j) {
  return matrix.row(j);
}

/// K[i][j] = kernel_eval(spec, X.row(i), X.row(j)); the upper triangle is
/// computed once and mirrored so symmetry is bit-exact.
inline KernelMatrix gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& samples) {
  validate(spec);
  const auto n = samples.rows();
  if (n == 0) throw ShapeError("gram_matrix: empty sample matrix", 1, 0);
  if (static_cast<std::size_t>(n) > kMaxGramSamples) {
    throw CapacityError("gram_matrix: " + std::to_string(n) + " samples exceeds the dense limit of " +
                        std::to_string(kMaxGramSamples));
  }
  const auto dim = static_cast<std::size_t>(samples.cols());
  const auto stride = static_cast<std::size_t>(samples.rows());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = detail::kernel_eval_unchecked(spec, samples.data() + i, samples.data() + j,
                                                     dim, stride, stride);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return {std::move(k), spec};
}

/// Row-list input; rows of unequal length are rejected.
inline KernelMatrix gram_matrix(const KernelSpec& spec, const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ShapeError("gram_matrix: empty sample matrix", 1, 0);
  const std::size_t dim = rows.front().size();
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw ShapeError("gram_matrix: row " + std::to_string(i) + " has a different length", dim, rows[i].size());
    }
    for (std::size_t j = 0; j < dim; ++j) samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return gram_matrix(spec, samples);
}

/// Rows = `queries`, columns = `points`: out(q, j) = kernel(points_j, query_q).
inline Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::MatrixXd& queries,
                                    const Eigen::MatrixXd& points) {
  validate(spec);
  if (queries.cols() != points.cols()) {
    throw ShapeError("cross_kernel: feature dimension mismatch", static_cast<std::size_t>(points.cols()),
                     static_cast<std::size_t>(queries.cols()));
  }
  const auto dim = static_cast<std::size_t>(points.cols());
  const auto qs = static_cast<std::size_t>(queries.rows());
  const auto ps = static_cast<std::size_t>(points.rows());
  Eigen::MatrixXd out(queries.rows(), points.rows());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
      out(q, j) = detail::kernel_eval_unchecked(spec, points.data() + j, queries.data() + q, dim,
                                                ps, qs);
    }
  }
  return out;
}

}  // namespace roboss
