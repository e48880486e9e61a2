#pragma once

namespace gpmpc::stats {

/// Inverse CDF of the standard normal distribution (Acklam's rational
/// approximation, absolute error below 1.2e-9). Throws std::invalid_argument
/// for p outside (0, 1).
double inverse_normal_cdf(double p);

/// Sample standard deviation (N-1 normalization); 0 for fewer than 2 values.
double sample_std(const double* values, int n);

}  // namespace gpmpc::stats
