#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "roboss/error.hpp"

namespace roboss {

enum class LossKind { ZeroOne, Hinge, Pinball, TruncatedHinge, TruncatedPinball, RoBoSS };

/// Loss family plus its parameters. Only the fields relevant to `kind` are
/// read; the others keep their defaults.
struct LossSpec {
  LossKind kind = LossKind::RoBoSS;
  double a = 1.0;       // RoBoSS shape
  double lambda = 1.0;  // RoBoSS bound
  double tau = 0.5;     // pinball slope on the correct side
  double delta = 1.0;   // truncated-hinge cap
  double delta1 = 1.0;  // truncated-pinball cap for u > 0
  double delta2 = 0.25; // truncated-pinball cap for u < 0

  static LossSpec zero_one() { return {.kind = LossKind::ZeroOne}; }
  static LossSpec hinge() { return {.kind = LossKind::Hinge}; }
  static LossSpec pinball(double tau) { return {.kind = LossKind::Pinball, .tau = tau}; }
  static LossSpec truncated_hinge(double delta) {
    return {.kind = LossKind::TruncatedHinge, .delta = delta};
  }
  static LossSpec truncated_pinball(double tau, double delta1, double delta2) {
    return {.kind = LossKind::TruncatedPinball, .tau = tau, .delta1 = delta1, .delta2 = delta2};
  }
  static LossSpec roboss(double a, double lambda) {
    return {.kind = LossKind::RoBoSS, .a = a, .lambda = lambda};
  }

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

inline std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::ZeroOne: return "zero-one";
    case LossKind::Hinge: return "hinge";
    case LossKind::Pinball: return "pinball";
    case LossKind::TruncatedHinge: return "truncated-hinge";
    case LossKind::TruncatedPinball: return "truncated-pinball";
    case LossKind::RoBoSS: return "roboss";
  }
  return "unknown";
}

inline LossKind parse_loss_kind(std::string_view name) {
  for (auto k : {LossKind::ZeroOne, LossKind::Hinge, LossKind::Pinball, LossKind::TruncatedHinge,
                 LossKind::TruncatedPinball, LossKind::RoBoSS}) {
    if (to_string(k) == name) return k;
  }
  throw ParameterError("unknown loss '" + std::string(name) + "'");
}

/// Throws ParameterError naming the violated constraint.
inline void validate(const LossSpec& spec) {
  auto require = [](bool ok, const char* constraint) {
    if (!ok) throw ParameterError(std::string("loss parameter out of domain: ") + constraint);
  };
  switch (spec.kind) {
    case LossKind::RoBoSS:
      require(std::isfinite(spec.a) && spec.a > 0.0, "a > 0");
      require(std::isfinite(spec.lambda) && spec.lambda > 0.0, "lambda > 0");
      break;
    case LossKind::Pinball:
      require(spec.tau >= 0.0 && spec.tau <= 1.0, "tau in [0,1]");
      break;
    case LossKind::TruncatedHinge:
      require(std::isfinite(spec.delta) && spec.delta >= 1.0, "delta >= 1");
      break;
    case LossKind::TruncatedPinball:
      require(spec.tau >= 0.0 && spec.tau <= 1.0, "tau in [0,1]");
      require(std::isfinite(spec.delta1) && spec.delta1 > 0.0, "delta1 > 0");
      require(std::isfinite(spec.delta2) && spec.delta2 > 0.0, "delta2 > 0");
      break;
    case LossKind::ZeroOne:
    case LossKind::Hinge:
      break;
  }
}

namespace detail {

// Products of the form (x) * exp(-x) are taken as exactly 0 once the
// exponent passes this threshold; exp(-700) ~ 1e-304.
inline constexpr double kExpCutoff = 700.0;

inline double roboss_value(double a, double lambda, double u) {
  if (u <= 0.0) return 0.0;
  const double au = a * u;
  if (au > kExpCutoff) return lambda;
  // 1 - (1 + au) e^{-au}, written with expm1 to keep precision for small au.
  const double e = std::exp(-au);
  return lambda * (-std::expm1(-au) - au * e);
}

inline double roboss_derivative(double a, double lambda, double u) {
  if (u <= 0.0) return 0.0;
  const double au = a * u;
  if (au > kExpCutoff) return 0.0;
  return lambda * a * a * u * std::exp(-au);
}

}  // namespace detail

/// Loss value at margin deficit u = 1 - y f(x).
inline double loss_value(const LossSpec& spec, double u) {
  validate(spec);
  switch (spec.kind) {
    case LossKind::ZeroOne:
      return u > 0.0 ? 1.0 : 0.0;
    case LossKind::Hinge:
      return u > 0.0 ? u : 0.0;
    case LossKind::Pinball:
      return u > 0.0 ? u : -spec.tau * u;
    case LossKind::TruncatedHinge:
      if (u >= spec.delta) return spec.delta;
      return u > 0.0 ? u : 0.0;
    case LossKind::TruncatedPinball:
      if (u >= spec.delta1) return spec.delta1;
      if (u >= 0.0) return u;
      // With tau = 0 the left plateau is never reached.
      if (spec.tau > 0.0 && u <= -spec.delta2 / spec.tau) return spec.delta2;
      return -spec.tau * u;
    case LossKind::RoBoSS:
      return detail::roboss_value(spec.a, spec.lambda, u);
  }
  return 0.0;
}

/// Derivative (or the fixed subderivative at kinks) with respect to u.
/// Kink conventions: hinge 0 at u = 0, pinball -tau at u = 0, truncated
/// losses 0 on their plateaus including the plateau edge.
inline double loss_derivative(const LossSpec& spec, double u) {
  validate(spec);
  switch (spec.kind) {
    case LossKind::ZeroOne:
      return 0.0;
    case LossKind::Hinge:
      return u > 0.0 ? 1.0 : 0.0;
    case LossKind::Pinball:
      return u > 0.0 ? 1.0 : -spec.tau;
    case LossKind::TruncatedHinge:
      return (u > 0.0 && u < spec.delta) ? 1.0 : 0.0;
    case LossKind::TruncatedPinball:
      if (u >= spec.delta1) return 0.0;
      if (u > 0.0) return 1.0;
      if (spec.tau > 0.0 && u <= -spec.delta2 / spec.tau) return 0.0;
      return -spec.tau;
    case LossKind::RoBoSS:
      return detail::roboss_derivative(spec.a, spec.lambda, u);
  }
  return 0.0;
}

/// sup_u loss_value(spec, u); +infinity for the unbounded losses.
inline double loss_supremum(const LossSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case LossKind::ZeroOne: return 1.0;
    case LossKind::Hinge:
    case LossKind::Pinball: return std::numeric_limits<double>::infinity();
    case LossKind::TruncatedHinge: return spec.delta;
    case LossKind::TruncatedPinball:
      return spec.tau > 0.0 ? std::max(spec.delta1, spec.delta2) : spec.delta1;
    case LossKind::RoBoSS: return spec.lambda;
  }
  return 0.0;
}

inline bool is_bounded(const LossSpec& spec) { return std::isfinite(loss_supremum(spec)); }

/// True when the NAG trainer is the optimizer the loss was designed for.
/// Baselines trained through it are reported as a non-native training path.
inline bool nag_is_native(LossKind kind) { return kind == LossKind::RoBoSS; }

}  // namespace roboss
