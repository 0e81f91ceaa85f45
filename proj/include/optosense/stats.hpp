#pragma once

#include <span>

namespace optosense {

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

// sqrt(mean(((measured - reference) / reference)^2))
double rms_relative_deviation(std::span<const double> measured, std::span<const double> reference);

double to_db(double ratio);

}  // namespace optosense
