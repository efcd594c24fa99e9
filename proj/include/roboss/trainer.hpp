#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roboss/error.hpp"
#include "roboss/kernel.hpp"
#include "roboss/loss.hpp"
#include "roboss/random.hpp"

namespace roboss {

/// Regularization, loss, kernel and the NAG constants. Defaults are the
/// reference experimental settings.
struct TrainerConfig {
  double C = 1.0;
  LossSpec loss = LossSpec::roboss(1.0, 1.0);
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  double beta0 = 0.01;     // every coefficient starts here
  double v0 = 0.01;        // every velocity component starts here
  double alpha0 = 0.1;     // initial learning rate
  double eta = 0.1;        // learning-rate decay factor
  double momentum = 0.6;   // r
  std::optional<std::size_t> batch_size;  // unset: 4 if n < 100 else 32
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;  // batch sampling

  friend bool operator==(const TrainerConfig&, const TrainerConfig&) = default;
};

inline std::size_t resolved_batch_size(const TrainerConfig& config, std::size_t n) {
  if (config.batch_size) return *config.batch_size;
  return n < 100 ? 4 : 32;
}

inline void validate(const TrainerConfig& config) {
  auto require = [](bool ok, const char* constraint) {
    if (!ok) throw ParameterError(std::string("trainer parameter out of domain: ") + constraint);
  };
  require(std::isfinite(config.C) && config.C > 0.0, "C > 0");
  require(std::isfinite(config.alpha0) && config.alpha0 > 0.0, "alpha0 > 0");
  require(std::isfinite(config.eta) && config.eta > 0.0, "eta > 0");
  require(config.momentum >= 0.0 && config.momentum < 1.0, "momentum r in [0,1)");
  require(std::isfinite(config.beta0) && std::isfinite(config.v0), "finite beta0 and v0");
  require(config.max_iters >= 1, "max_iters >= 1");
  require(!config.batch_size || *config.batch_size >= 1, "batch_size >= 1");
  validate(config.loss);
  validate(config.kernel);
}

/// Learning rate in force during iteration t (1-based): the update
/// alpha <- alpha * exp(-eta * t) after every iteration compounds to
/// alpha0 * exp(-eta * t (t - 1) / 2).
inline double learning_rate_at(const TrainerConfig& config, std::size_t t) {
  const double td = static_cast<double>(t);
  return config.alpha0 * std::exp(-config.eta * td * (td - 1.0) / 2.0);
}

struct TrainedModel {
  Eigen::VectorXd beta;            // representer coefficients
  Eigen::MatrixXd support_points;  // one training sample per row
  KernelSpec kernel;
  TrainerConfig config;
  std::size_t iterations_run = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double final_learning_rate = 0.0;
};

/// Per-iteration snapshot handed to an optional fit observer.
struct IterationTrace {
  std::size_t t;
  double learning_rate;  // rate used for this iteration's velocity update
  const Eigen::VectorXd& beta;
};

using FitObserver = std::function<void(const IterationTrace&)>;

namespace detail {

inline void check_labels(const Eigen::VectorXd& y, std::size_t n) {
  if (static_cast<std::size_t>(y.size()) != n) {
    throw ShapeError("label vector length does not match sample count", n,
                     static_cast<std::size_t>(y.size()));
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0 && y[i] != -1.0) {
      throw DataError("label at index " + std::to_string(i) + " is not +1 or -1");
    }
  }
}

inline void check_coefficients(const Eigen::VectorXd& beta, std::size_t n) {
  if (static_cast<std::size_t>(beta.size()) != n) {
    throw ShapeError("coefficient vector length does not match kernel size", n,
                     static_cast<std::size_t>(beta.size()));
  }
}

inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

}  // namespace detail

/// f(beta) = 1/2 beta' K beta + (C/n) sum_k L(xi_k), xi_k = 1 - y_k (K beta)_k.
inline double objective(const TrainerConfig& config, const KernelMatrix& kernel,
                        const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  validate(config);
  const std::size_t n = kernel.size();
  detail::check_labels(y, n);
  detail::check_coefficients(beta, n);
  const Eigen::VectorXd kb = kernel.entries() * beta;
  double loss_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    loss_sum += loss_value(config.loss, 1.0 - y[i] * kb[i]);
  }
  return 0.5 * beta.dot(kb) + config.C / static_cast<double>(n) * loss_sum;
}

/// Loss-part gradient over the samples in `batch` with precomputed margin
/// deficits `xi`, plus the full regularizer term K * point:
///   K point - (C/|batch|) sum_j L'(xi_j) y_j K_j.
inline Eigen::VectorXd minibatch_gradient(const TrainerConfig& config, const KernelMatrix& kernel,
                                          const Eigen::VectorXd& y,
                                          std::span<const std::size_t> batch,
                                          std::span<const double> xi,
                                          const Eigen::VectorXd& point) {
  if (batch.size() != xi.size()) throw ShapeError("batch and xi length mismatch", batch.size(), xi.size());
  Eigen::VectorXd grad = kernel.entries() * point;
  const double scale = config.C / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t j = batch[b];
    const double w = loss_derivative(config.loss, xi[b]);
    if (w == 0.0) continue;
    grad -= (scale * w * y[static_cast<Eigen::Index>(j)]) * detail::as_vector(kernel.row(j));
  }
  return grad;
}

/// Exact gradient of `objective`.
inline Eigen::VectorXd full_gradient(const TrainerConfig& config, const KernelMatrix& kernel,
                                     const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  validate(config);
  const std::size_t n = kernel.size();
  detail::check_labels(y, n);
  detail::check_coefficients(beta, n);
  const Eigen::VectorXd kb = kernel.entries() * beta;
  std::vector<std::size_t> all(n);
  std::vector<double> xi(n);
  for (std::size_t k = 0; k < n; ++k) {
    all[k] = k;
    xi[k] = 1.0 - y[static_cast<Eigen::Index>(k)] * kb[static_cast<Eigen::Index>(k)];
  }
  return minibatch_gradient(config, kernel, y, all, xi, beta);
}

/// Mini-batch Nesterov accelerated gradient on `objective`, with a
/// precomputed Gram matrix over `samples`. Runs exactly max_iters
/// iterations; deterministic for a given config.seed.
inline TrainedModel fit(const TrainerConfig& config, const Eigen::MatrixXd& samples,
                        const Eigen::VectorXd& y, const KernelMatrix& kernel,
                        const FitObserver& observer = {}) {
  validate(config);
  if (config.loss.kind == LossKind::ZeroOne) {
    throw ParameterError("zero-one loss has no usable gradient for training");
  }
  if (!(kernel.spec() == config.kernel)) throw ParameterError("kernel matrix built with a different kernel spec");
  const std::size_t n = kernel.size();
  if (static_cast<std::size_t>(samples.rows()) != n) {
    throw ShapeError("fit: sample count does not match kernel size", n,
                     static_cast<std::size_t>(samples.rows()));
  }
  detail::check_labels(y, n);
  const std::size_t s = resolved_batch_size(config, n);
  if (s > n) {
    throw ParameterError("batch_size (" + std::to_string(s) + ") must not exceed the number of samples (" +
                         std::to_string(n) + ")");
  }

  const auto nn = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd& k = kernel.entries();
  const double r = config.momentum;

  // Optimizer state.
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(nn, config.beta0);
  Eigen::VectorXd velocity = Eigen::VectorXd::Constant(nn, config.v0);
  double alpha = config.alpha0;

  TrainedModel model;
  model.initial_objective = objective(config, kernel, y, beta);

  Rng rng(config.seed);
  std::vector<double> xi(s);
  for (std::size_t t = 1; t <= config.max_iters; ++t) {
    const auto batch = rng.sample_without_replacement(n, s);
    for (std::size_t b = 0; b < s; ++b) {
      const auto j = static_cast<Eigen::Index>(batch[b]);
      xi[b] = 1.0 - y[j] * k.col(j).dot(beta);
    }
    const Eigen::VectorXd lookahead = beta + r * velocity;
    const Eigen::VectorXd grad = minibatch_gradient(config, kernel, y, batch, xi, lookahead);
    if (!grad.allFinite()) {
      throw NumericError("non-finite gradient at iteration " + std::to_string(t));
    }
    velocity = r * velocity - alpha * grad;
    beta = lookahead + velocity;
    if (observer) observer(IterationTrace{t, alpha, beta});
    alpha *= std::exp(-config.eta * static_cast<double>(t));
  }

  model.beta = std::move(beta);
  model.support_points = samples;
  model.kernel = config.kernel;
  model.config = config;
  model.iterations_run = config.max_iters;
  model.final_objective = objective(config, kernel, y, model.beta);
  model.final_learning_rate = alpha;
  if (!std::isfinite(model.final_objective)) throw NumericError("non-finite final objective");
  return model;
}

/// Builds the Gram matrix, then fits.
inline TrainedModel fit(const TrainerConfig& config, const Eigen::MatrixXd& samples,
                        const Eigen::VectorXd& y, const FitObserver& observer = {}) {
  validate(config);
  return fit(config, samples, y, gram_matrix(config.kernel, samples), observer);
}

/// sum_j beta_j K(x_j, x_hat).
inline double decision_value(const TrainedModel& model, std::span<const double> x_hat) {
  const auto dim = static_cast<std::size_t>(model.support_points.cols());
  if (x_hat.size() != dim) throw ShapeError("decision_value: feature dimension mismatch", dim, x_hat.size());
  validate(model.kernel);
  const auto stride = static_cast<std::size_t>(model.support_points.rows());
  double acc = 0.0;
  for (Eigen::Index j = 0; j < model.beta.size(); ++j) {
    acc += model.beta[j] * detail::kernel_eval_unchecked(model.kernel, model.support_points.data() + j,
                                                         x_hat.data(), dim, stride, 1);
  }
  return acc;
}

/// Sign of the decision value; sign(0) = +1.
inline int predict(const TrainedModel& model, std::span<const double> x_hat) {
  return decision_value(model, x_hat) >= 0.0 ? 1 : -1;
}

/// Decision values for every row of `queries`.
inline Eigen::VectorXd decision_values(const TrainedModel& model, const Eigen::MatrixXd& queries) {
  return cross_kernel(model.kernel, queries, model.support_points) * model.beta;
}

inline std::vector<int> predict_all(const TrainedModel& model, const Eigen::MatrixXd& queries) {
  const Eigen::VectorXd d = decision_values(model, queries);
  std::vector<int> out(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) out[static_cast<std::size_t>(i)] = d[i] >= 0.0 ? 1 : -1;
  return out;
}

}  // namespace roboss
