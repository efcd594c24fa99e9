#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "roboss/error.hpp"
#include "roboss/loss.hpp"
#include "roboss/trainer.hpp"

namespace roboss {

/// Evaluation grid lo, lo + step, ... up to hi (inclusive within rounding).
struct FGrid {
  double lo = -3.0;
  double hi = 3.0;
  double step = 1e-3;

  std::size_t size() const { return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1; }
  double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

struct ConditionalRiskQuery {
  LossSpec loss = LossSpec::roboss(1.0, 1.0);
  double P = 0.5;  // Prob(y = +1 | x)
  FGrid grid;
};

inline void validate(const ConditionalRiskQuery& q) {
  validate(q.loss);
  if (!(q.P >= 0.0 && q.P <= 1.0)) throw ParameterError("conditional probability P must lie in [0, 1]");
  if (!(q.grid.lo < q.grid.hi)) throw ParameterError("f grid requires lo < hi");
  if (!(q.grid.step > 0.0) || !std::isfinite(q.grid.step)) throw ParameterError("f grid requires step > 0");
}

/// L(1 - f) P + L(1 + f) (1 - P).
inline double conditional_risk(const ConditionalRiskQuery& q, double f) {
  return loss_value(q.loss, 1.0 - f) * q.P + loss_value(q.loss, 1.0 + f) * (1.0 - q.P);
}

/// The same risk for RoBoSS written per region of f: only the term whose
/// margin deficit is positive survives outside (-1, 1).
inline double roboss_conditional_risk_branches(double a, double lambda, double P, double f) {
  auto g = [&](double u) { return lambda * (1.0 - (a * u + 1.0) * std::exp(-a * u)); };
  const double g1 = g(1.0 - f);
  const double g2 = g(1.0 + f);
  if (f <= -1.0) return g1 * P;
  if (f >= 1.0) return g2 * (1.0 - P);
  return (g1 - g2) * P + g2;
}

inline std::vector<std::pair<double, double>> conditional_risk_curve(const ConditionalRiskQuery& q) {
  validate(q);
  std::vector<std::pair<double, double>> curve;
  const std::size_t n = q.grid.size();
  curve.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = q.grid.at(i);
    curve.emplace_back(f, conditional_risk(q, f));
  }
  return curve;
}

struct CalibrationResult {
  double f_star = 0.0;
  double min_risk = 0.0;
  bool degenerate = false;                 // P = 1/2: no Bayes sign to match
  std::optional<bool> sign_matches_bayes;  // unset when degenerate
};

/// Grid minimizer of the conditional risk; equal minima resolve toward the
/// smallest |f|.
inline CalibrationResult calibration_check(const ConditionalRiskQuery& q) {
  validate(q);
  CalibrationResult r;
  bool first = true;
  const std::size_t n = q.grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double f = q.grid.at(i);
    const double risk = conditional_risk(q, f);
    if (first || risk < r.min_risk || (risk == r.min_risk && std::abs(f) < std::abs(r.f_star))) {
      r.f_star = f;
      r.min_risk = risk;
      first = false;
    }
  }
  r.degenerate = q.P == 0.5;
  if (!r.degenerate) {
    const int bayes = q.P > 0.5 ? 1 : -1;
    const int got = r.f_star > 0.0 ? 1 : (r.f_star < 0.0 ? -1 : 0);
    r.sign_matches_bayes = got == bayes;
  }
  return r;
}

/// 4 lambda / sqrt(n C) + sqrt(8 ln(1/eps) / n).
inline double generalization_bound(double lambda, double n, double C, double epsilon) {
  if (!(lambda > 0.0)) throw ParameterError("generalization bound requires lambda > 0");
  if (!(n > 0.0)) throw ParameterError("generalization bound requires n > 0");
  if (!(C > 0.0)) throw ParameterError("generalization bound requires C > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("generalization bound requires 0 < epsilon < 1");
  return 4.0 * lambda / std::sqrt(n * C) + std::sqrt(8.0 * std::log(1.0 / epsilon) / n);
}

/// Mean loss of a trained model's decision values on labelled points.
inline double empirical_risk(const TrainedModel& model, const LossSpec& loss, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) {
    throw ShapeError("empirical risk: label count mismatch", static_cast<std::size_t>(X.rows()),
                     static_cast<std::size_t>(y.size()));
  }
  if (X.rows() == 0) throw ShapeError("empirical risk of an empty sample", 1, 0);
  const Eigen::VectorXd f = decision_values(model, X);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) sum += loss_value(loss, 1.0 - y[i] * f[i]);
  return sum / static_cast<double>(f.size());
}

}  // namespace roboss
