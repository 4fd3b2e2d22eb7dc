#include "tvkey/error_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvkey/error.hpp"
#include "tvkey/normal.hpp"

namespace tvkey {

void MaesModel::validate() const {
  if (!std::isfinite(lambda1) || !std::isfinite(lambda2))
    throw Error(ErrorCode::InvalidArgument, "model parameters must be finite");
  if (!(lambda1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda1 must be > 0");
}

double cdf_pe(const MaesModel& model, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::InvalidArgument, "x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  return normal_cdf(model.lambda1 * normal_quantile(x) + model.lambda2);
}

FitReport fit(std::span<const double> error_probs, std::uint32_t trials) {
  const std::size_t n = error_probs.size();
  if (n == 0) throw Error(ErrorCode::DegenerateData, "no data to fit");
  for (double p : error_probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "probabilities must lie in [0, 1]");
    if (trials == 0 && (p == 0.0 || p == 1.0))
      throw Error(ErrorCode::InvalidArgument, "unquantized samples must lie strictly inside (0, 1)");
  }

  std::vector<double> sorted(error_probs.begin(), error_probs.end());
  std::sort(sorted.begin(), sorted.end());

  FitReport report;
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(n);
  ys.reserve(n);
  std::size_t distinct = 0;
  for (std::size_t first = 0; first < n;) {
    std::size_t last = first;
    while (last + 1 < n && sorted[last + 1] == sorted[first]) ++last;
    const std::size_t count = last - first + 1;
    const double value = sorted[first];
    if (value == 0.0 || value == 1.0) {
      report.points_clamped += count;
    } else {
      // Mid-rank of 1-based ranks first+1 .. last+1.
      const double position = (0.5 * static_cast<double>(first + last + 2) - 0.5) / static_cast<double>(n);
      const double x = normal_quantile(value);
      const double y = normal_quantile(position);
      for (std::size_t k = 0; k < count; ++k) {
        xs.push_back(x);
        ys.push_back(y);
      }
      ++distinct;
    }
    first = last + 1;
  }
  if (distinct < 2) {
    throw Error(ErrorCode::DegenerateData,
                "need at least two distinct unclamped error probabilities, got " + std::to_string(distinct));
  }

  const auto m = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= m;
  mean_y /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
  }
  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_x;
  if (!(slope > 0.0)) {
    throw Error(ErrorCode::DegenerateData, "fitted lambda1 is not positive");
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (slope * xs[i] + intercept);
    sse += r * r;
  }
  report.model = {slope, intercept};
  report.residual = std::sqrt(sse / m);
  report.points_used = xs.size();
  return report;
}

FitReport fit(const EmpiricalErrorData& data) { return fit(data.error_probs, data.trials_per_cell); }

double sample_pe_one(const MaesModel& model, Rng& rng) {
  return normal_cdf((normal_quantile(rng.uniform()) - model.lambda2) / model.lambda1);
}

void sample_pe_into(const MaesModel& model, std::span<double> out, Rng& rng) {
  for (double& pe : out) pe = sample_pe_one(model, rng);
}

std::vector<double> sample_pe(const MaesModel& model, std::size_t count, Rng& rng) {
  model.validate();
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  std::vector<double> out(count);
  sample_pe_into(model, out, rng);
  return out;
}

}  // namespace tvkey
