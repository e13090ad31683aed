#include <gtest/gtest.h>

#include <cmath>

#include "arfdx/stats.hpp"
#include "test_support.hpp"

using namespace arfdx;
using arfdx::testing::Gen;

TEST(Quantile, LinearInterpolationOneToTen) {
  const std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_NEAR(stats::quantile_linear(xs, 0.2), 2.8, 1e-12);
  EXPECT_NEAR(stats::quantile_linear(xs, 0.4), 4.6, 1e-12);
  EXPECT_NEAR(stats::quantile_linear(xs, 0.6), 6.4, 1e-12);
  EXPECT_NEAR(stats::quantile_linear(xs, 0.8), 8.2, 1e-12);
  EXPECT_EQ(stats::quantile_linear(xs, 0.0), 1.0);
  EXPECT_EQ(stats::quantile_linear(xs, 1.0), 10.0);
}

TEST(Ranks, TiesAveraged) {
  const std::vector<double> xs{10, 20, 20, 5};
  EXPECT_EQ(stats::average_ranks(xs), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Ranks, SumIsTriangular) {
  Gen g(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = arfdx::testing::uniform_index(g, 1, 40);
    const auto xs = arfdx::testing::random_scores(g, n);
    const auto r = stats::average_ranks(xs);
    double sum = 0.0;
    for (double v : r) sum += v;
    EXPECT_DOUBLE_EQ(sum, static_cast<double>(n * (n + 1)) / 2.0);
  }
}

TEST(Correlation, PearsonKnownValues) {
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8}, z{4, 3, 2, 1};
  EXPECT_NEAR(*stats::pearson(x, y), 1.0, 1e-12);
  EXPECT_NEAR(*stats::pearson(x, z), -1.0, 1e-12);
  EXPECT_FALSE(stats::pearson(x, std::vector<double>{1, 1, 1, 1}).has_value());
}

TEST(Correlation, SpearmanOfBinaryIsPhi) {
  const std::vector<double> a{1, 1, 0, 0}, b{1, 0, 1, 0};
  EXPECT_NEAR(*stats::spearman(a, b), 0.0, 1e-12);
  Gen g(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = arfdx::testing::uniform_index(g, 4, 60);
    std::vector<double> x(n), y(n);
    double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = arfdx::testing::uniform(g) < 0.5;
      y[i] = arfdx::testing::uniform(g) < 0.4;
      (x[i] ? (y[i] ? n11 : n10) : (y[i] ? n01 : n00)) += 1;
    }
    const double denom = std::sqrt((n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00));
    const auto rho = stats::spearman(x, y);
    if (denom == 0.0) {
      EXPECT_FALSE(rho.has_value());
    } else {
      ASSERT_TRUE(rho.has_value());
      EXPECT_NEAR(*rho, (n11 * n00 - n10 * n01) / denom, 1e-12);
    }
  }
}

TEST(LeastSquares, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto fit = stats::least_squares(x, y);
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-12);
}

TEST(LeastSquares, ConstantX) {
  const std::vector<double> x{2, 2, 2}, y{1, 2, 6};
  const auto fit = stats::least_squares(x, y);
  EXPECT_EQ(fit.slope, 0.0);
  EXPECT_NEAR(fit.intercept, 3.0, 1e-12);
}
