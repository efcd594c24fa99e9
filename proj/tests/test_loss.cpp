#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "roboss/loss.hpp"

using namespace roboss;

namespace {

std::vector<LossSpec> all_valid_specs() {
  return {LossSpec::zero_one(),
          LossSpec::hinge(),
          LossSpec::pinball(0.0),
          LossSpec::pinball(0.5),
          LossSpec::truncated_hinge(1.0),
          LossSpec::truncated_hinge(2.5),
          LossSpec::truncated_pinball(0.0, 1.0, 0.25),
          LossSpec::truncated_pinball(0.5, 1.0, 0.25),
          LossSpec::roboss(0.5, 0.5),
          LossSpec::roboss(5.0, 1.5)};
}

}  // namespace

TEST(LossValue, RobossExamples) {
  EXPECT_EQ(loss_value(LossSpec::roboss(1, 1), 0.0), 0.0);
  EXPECT_NEAR(loss_value(LossSpec::roboss(1, 1), 1.0), oracle::roboss_mp(1, 1, 1), 1e-15);
  EXPECT_NEAR(loss_value(LossSpec::roboss(1, 1), 1.0), 0.264241, 1e-6);
}

TEST(LossValue, BaselineExamples) {
  EXPECT_EQ(loss_value(LossSpec::hinge(), -3.0), 0.0);
  EXPECT_EQ(loss_value(LossSpec::hinge(), 2.0), 2.0);
  EXPECT_DOUBLE_EQ(loss_value(LossSpec::pinball(0.5), -2.0), 0.5 * 2.0);
  EXPECT_EQ(loss_value(LossSpec::truncated_pinball(0.5, 1.0, 0.25), 5.0), 1.0);
  EXPECT_EQ(loss_value(LossSpec::zero_one(), 0.3), 1.0);
  EXPECT_EQ(loss_value(LossSpec::zero_one(), 0.0), 0.0);
}

TEST(LossValue, TruncatedPinballPieces) {
  const auto spec = LossSpec::truncated_pinball(0.5, 1.0, 0.25);
  EXPECT_EQ(loss_value(spec, 0.4), 0.4);
  EXPECT_EQ(loss_value(spec, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(loss_value(spec, -0.2), 0.1);
  EXPECT_EQ(loss_value(spec, -0.5), 0.25);  // -delta2/tau
  EXPECT_EQ(loss_value(spec, -7.0), 0.25);
  // Continuous at the left plateau edge.
  EXPECT_NEAR(loss_value(spec, -0.5 + 1e-12), 0.25, 1e-12);
}

TEST(LossValue, TruncatedHingeCap) {
  const auto spec = LossSpec::truncated_hinge(2.0);
  EXPECT_EQ(loss_value(spec, 1.5), 1.5);
  EXPECT_EQ(loss_value(spec, 2.0), 2.0);
  EXPECT_EQ(loss_value(spec, 50.0), 2.0);
  EXPECT_EQ(loss_value(spec, -1.0), 0.0);
}

TEST(LossValue, RejectsInvalidParameters) {
  EXPECT_THROW(loss_value(LossSpec::roboss(0.0, 1.0), 1.0), ParameterError);
  EXPECT_THROW(loss_value(LossSpec::roboss(1.0, -1.0), 1.0), ParameterError);
  EXPECT_THROW(loss_value(LossSpec::pinball(1.5), 1.0), ParameterError);
  EXPECT_THROW(loss_value(LossSpec::truncated_hinge(0.5), 1.0), ParameterError);
  EXPECT_THROW(loss_value(LossSpec::truncated_pinball(0.5, 0.0, 1.0), 1.0), ParameterError);
  try {
    loss_value(LossSpec::roboss(-2.0, 1.0), 1.0);
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("a > 0"), std::string::npos);
  }
}

TEST(LossValue, RobossMatchesHighPrecisionOnGrid) {
  for (double a : {0.5, 1.0, 5.0}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      for (double u : {-1.0, 0.0, 1e-8, 0.01, 0.5, 1.0, 3.0, 40.0}) {
        const double expected = oracle::roboss_mp(a, lambda, u);
        EXPECT_NEAR(loss_value(LossSpec::roboss(a, lambda), u), expected, 1e-15 + 1e-14 * expected)
            << "a=" << a << " lambda=" << lambda << " u=" << u;
      }
    }
  }
}

TEST(LossDerivative, Examples) {
  EXPECT_EQ(loss_derivative(LossSpec::roboss(2.0, 1.5), 0.0), 0.0);
  EXPECT_NEAR(loss_derivative(LossSpec::roboss(1, 1), 1.0), std::exp(-1.0), 1e-15);
  EXPECT_EQ(loss_derivative(LossSpec::pinball(0.3), -1.0), -0.3);
}

TEST(LossDerivative, KinkConventions) {
  EXPECT_EQ(loss_derivative(LossSpec::hinge(), 0.0), 0.0);
  EXPECT_EQ(loss_derivative(LossSpec::hinge(), 1e-9), 1.0);
  EXPECT_EQ(loss_derivative(LossSpec::pinball(0.7), 0.0), -0.7);
  EXPECT_EQ(loss_derivative(LossSpec::truncated_hinge(2.0), 2.0), 0.0);
  EXPECT_EQ(loss_derivative(LossSpec::truncated_hinge(2.0), 1.0), 1.0);
  const auto tp = LossSpec::truncated_pinball(0.5, 1.0, 0.25);
  EXPECT_EQ(loss_derivative(tp, 1.0), 0.0);
  EXPECT_EQ(loss_derivative(tp, 0.5), 1.0);
  EXPECT_EQ(loss_derivative(tp, -0.1), -0.5);
  EXPECT_EQ(loss_derivative(tp, -0.5), 0.0);
  EXPECT_EQ(loss_derivative(LossSpec::zero_one(), 0.5), 0.0);
}

TEST(LossDerivative, RobossMatchesFiniteDifferences) {
  for (double a : {0.5, 1.0, 5.0}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      const auto spec = LossSpec::roboss(a, lambda);
      for (double u : {-1.0, 0.0, 0.01, 0.5, 1.0, 3.0}) {
        const double h = u == 0.0 ? 1e-9 : 1e-6;
        const double fd = oracle::central_difference([&](double v) { return loss_value(spec, v); }, u, h);
        EXPECT_NEAR(loss_derivative(spec, u), fd, 1e-6) << "a=" << a << " lambda=" << lambda << " u=" << u;
        EXPECT_NEAR(loss_derivative(spec, u), oracle::roboss_derivative_mp(a, lambda, u), 1e-14);
      }
    }
  }
}

TEST(LossDerivative, SmoothAtOrigin) {
  const auto spec = LossSpec::roboss(1.0, 1.0);
  EXPECT_LT(loss_value(spec, 1e-8), 1e-15);
  EXPECT_LT(loss_derivative(spec, 1e-8), 1e-7);
  EXPECT_EQ(loss_value(spec, -1e-8), 0.0);
}

TEST(LossSupremum, Values) {
  EXPECT_EQ(loss_supremum(LossSpec::roboss(5.0, 1.5)), 1.5);
  EXPECT_EQ(loss_supremum(LossSpec::zero_one()), 1.0);
  EXPECT_TRUE(std::isinf(loss_supremum(LossSpec::hinge())));
  EXPECT_TRUE(std::isinf(loss_supremum(LossSpec::pinball(0.5))));
  EXPECT_EQ(loss_supremum(LossSpec::truncated_hinge(3.0)), 3.0);
  EXPECT_EQ(loss_supremum(LossSpec::truncated_pinball(0.5, 1.0, 2.0)), 2.0);
  EXPECT_EQ(loss_supremum(LossSpec::truncated_pinball(0.0, 1.0, 2.0)), 1.0);
  EXPECT_FALSE(is_bounded(LossSpec::hinge()));
  EXPECT_TRUE(is_bounded(LossSpec::roboss(1, 1)));
}

TEST(LossSupremum, RobossApproachedOnGrid) {
  const auto spec = LossSpec::roboss(5.0, 1.5);
  double top = 0.0;
  for (int i = 0; i <= 2000; ++i) top = std::max(top, loss_value(spec, -10.0 + 0.01 * i));
  EXPECT_LE(top, 1.5);
  EXPECT_NEAR(top, 1.5, 1e-12);
}

TEST(LossProperty, NonNegativeAndSparse) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  for (const auto& spec : all_valid_specs()) {
    const bool penalizes_left = (spec.kind == LossKind::Pinball || spec.kind == LossKind::TruncatedPinball) &&
                                spec.tau > 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double u = dist(gen);
      const double v = loss_value(spec, u);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, loss_supremum(spec));
      if (u <= 0.0 && !penalizes_left) {
        EXPECT_EQ(v, 0.0);
      }
    }
  }
}

TEST(LossProperty, PinballWithZeroTauIsHinge) {
  const auto pin = LossSpec::pinball(0.0);
  const auto hinge = LossSpec::hinge();
  for (int i = 0; i < 1000; ++i) {
    const double u = -5.0 + 10.0 * i / 999.0;
    EXPECT_EQ(loss_value(pin, u), loss_value(hinge, u));
  }
}

TEST(LossProperty, RobossNonConvexityWitness) {
  const auto spec = LossSpec::roboss(5.0, 1.0);
  EXPECT_GT(loss_value(spec, 2.0), 0.5 * (loss_value(spec, 0.0) + loss_value(spec, 4.0)));
}

TEST(LossProperty, PointwiseConvergenceToZeroOne) {
  for (double u : {0.1, 0.5, 1.0, 2.0}) {
    for (double a : {1.0, 10.0, 50.0, 100.0}) {
      const double gap = std::abs(loss_value(LossSpec::roboss(a, 1.0), u) - 1.0);
      EXPECT_LE(gap, (a * u + 1.0) * std::exp(-a * u) * (1.0 + 1e-12));
    }
  }
  EXPECT_LE(std::abs(loss_value(LossSpec::roboss(100.0, 1.0), 0.5) - 1.0), 1e-10);
}

TEST(LossProperty, OverflowGuard) {
  const auto spec = LossSpec::roboss(100.0, 2.0);
  EXPECT_EQ(loss_value(spec, 8.0), 2.0);
  EXPECT_EQ(loss_derivative(spec, 8.0), 0.0);
  EXPECT_EQ(loss_value(spec, 1e300), 2.0);
  EXPECT_TRUE(std::isfinite(loss_derivative(spec, 6.99)));
}

TEST(LossNames, RoundTrip) {
  for (auto k : {LossKind::ZeroOne, LossKind::Hinge, LossKind::Pinball, LossKind::TruncatedHinge,
                 LossKind::TruncatedPinball, LossKind::RoBoSS}) {
    EXPECT_EQ(parse_loss_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_loss_kind("linex"), ParameterError);
}
