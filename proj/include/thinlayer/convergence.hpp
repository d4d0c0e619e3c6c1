#pragma once

#include <span>

namespace thinlayer {

/// Least-squares slope of log(error) against log(h).
double fit_order(std::span<const double> h, std::span<const double> error);

/// Slope between two refinement levels.
double observed_order(double h_coarse, double e_coarse, double h_fine, double e_fine);

}  // namespace thinlayer
