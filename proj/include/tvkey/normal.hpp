#pragma once

namespace tvkey {

/// Standard normal CDF. Relative accuracy is that of std::erfc, which keeps
/// lower-tail values meaningful down to about x = -37.
double normal_cdf(double x);

/// Inverse of normal_cdf. Returns -inf at 0 and +inf at 1; NaN outside [0, 1].
double normal_quantile(double p);

}  // namespace tvkey
