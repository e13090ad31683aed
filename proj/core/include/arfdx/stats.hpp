#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace arfdx::stats {

double mean(std::span<const double> xs);

// Linear interpolation between order statistics (h = (n - 1) p).
// `sorted` must be non-empty and sorted ascending.
double quantile_linear(std::span<const double> sorted, double p);

// 1-based ranks with ties replaced by their average rank.
std::vector<double> average_ranks(std::span<const double> xs);

// Undefined (nullopt) when either input is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares of y on x. Zero variance in x gives slope 0 and the
// mean of y as intercept.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace arfdx::stats
