#include "ghostsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ghostsim/error.hpp"
#include "ghostsim/fft.hpp"

namespace ghostsim {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::merge(const CompensatedSum& other) noexcept {
  add(other.sum_);
  add(other.compensation_);
}

CorrelationAccumulator::CorrelationAccumulator(std::size_t positions) : per_position_(positions) {}

void CorrelationAccumulator::add(const RealizationRecord& record) {
  if (record.point_readings.size() != per_position_.size()) {
    throw ValidationError("accumulate: record has " + std::to_string(record.point_readings.size()) +
                          " positions, accumulator has " + std::to_string(per_position_.size()));
  }
  const double b = record.bucket;
  b_.add(b);
  bb_.add(b * b);
  for (std::size_t k = 0; k < per_position_.size(); ++k) {
    const double p = record.point_readings[k];
    const double pb = p * b;
    auto& s = per_position_[k];
    s.p.add(p);
    s.pp.add(p * p);
    s.pb.add(pb);
    s.pbpb.add(pb * pb);
    s.ppb.add(p * pb);
    s.pbb.add(pb * b);
  }
  ++n_;
}

void CorrelationAccumulator::merge(const CorrelationAccumulator& other) {
  if (other.n_ == 0 && other.per_position_.empty()) return;
  if (n_ == 0 && per_position_.empty()) {
    *this = other;
    return;
  }
  if (other.per_position_.size() != per_position_.size()) {
    throw ValidationError("merge: scan-position layouts differ");
  }
  n_ += other.n_;
  b_.merge(other.b_);
  bb_.merge(other.bb_);
  for (std::size_t k = 0; k < per_position_.size(); ++k) {
    auto& s = per_position_[k];
    const auto& o = other.per_position_[k];
    s.p.merge(o.p);
    s.pp.merge(o.pp);
    s.pb.merge(o.pb);
    s.pbpb.merge(o.pbpb);
    s.ppb.merge(o.ppb);
    s.pbb.merge(o.pbb);
  }
}

CorrelationAccumulator accumulate(CorrelationAccumulator acc, const RealizationRecord& record) {
  acc.add(record);
  return acc;
}

CorrelationAccumulator merge(const CorrelationAccumulator& a, const CorrelationAccumulator& b) {
  CorrelationAccumulator out = a;
  out.merge(b);
  return out;
}

bool CorrelationMap::defined(std::size_t k) const { return std::isfinite(g2.at(k)); }

CorrelationMap finalize(const CorrelationAccumulator& acc, std::vector<double> positions) {
  const std::uint64_t count = acc.count();
  if (count < 2) {
    throw InsufficientDataError("finalize: need at least 2 realizations, got " + std::to_string(count));
  }
  if (!positions.empty() && positions.size() != acc.positions()) {
    throw ValidationError("finalize: position list does not match accumulator layout");
  }
  const double n = static_cast<double>(count);
  const double nm1 = n - 1.0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  CorrelationMap map;
  map.positions = std::move(positions);
  map.n_realizations = count;
  const double mb = acc.bucket_sum() / n;
  const double vbb = (acc.bucket_square_sum() - n * mb * mb) / nm1;
  map.mean_bucket = mb;

  const std::size_t m = acc.positions();
  map.g2.resize(m);
  map.covariance.resize(m);
  map.g2_stderr.resize(m);
  map.covariance_stderr.resize(m);
  map.mean_point.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& s = acc.position(k);
    const double mp = s.p.value() / n;
    const double mpb = s.pb.value() / n;
    map.mean_point[k] = mp;
    map.covariance[k] = mpb - mp * mb;

    // Sample covariance of (X, Y, Z) = (I_p I_b, I_p, I_b).
    const double vxx = (s.pbpb.value() - n * mpb * mpb) / nm1;
    const double vyy = (s.pp.value() - n * mp * mp) / nm1;
    const double vxy = (s.ppb.value() - n * mpb * mp) / nm1;
    const double vxz = (s.pbb.value() - n * mpb * mb) / nm1;
    const double vyz = (s.pb.value() - n * mp * mb) / nm1;

    const double var_c = vxx + mb * mb * vyy + mp * mp * vbb - 2.0 * mb * vxy - 2.0 * mp * vxz +
                         2.0 * mp * mb * vyz;
    map.covariance_stderr[k] = std::sqrt(std::max(var_c, 0.0) / n);

    if (mp > 0.0 && mb > 0.0) {
      const double g = mpb / (mp * mb);
      const double gx = 1.0 / (mp * mb);
      const double gy = -g / mp;
      const double gz = -g / mb;
      const double var_g = gx * gx * vxx + gy * gy * vyy + gz * gz * vbb + 2.0 * gx * gy * vxy +
                           2.0 * gx * gz * vxz + 2.0 * gy * gz * vyz;
      map.g2[k] = g;
      map.g2_stderr[k] = std::sqrt(std::max(var_g, 0.0) / n);
    } else {
      map.g2[k] = nan;
      map.g2_stderr[k] = nan;
    }
  }
  return map;
}

std::vector<double> ghost_image(const CorrelationMap& map) { return map.covariance; }

double predicted_contrast(double object_area, double detector_area) {
  if (!(detector_area > 0.0)) throw ValidationError("contrast: detector area a must be positive");
  if (!(object_area >= detector_area)) throw ValidationError("contrast: object area A must be >= a");
  const double ratio = object_area / detector_area;
  return (1.0 + ratio) / ratio;
}

namespace {

std::pair<double, double> region_mean(const CorrelationMap& map, std::span<const std::size_t> region,
                                      const char* name) {
  if (region.empty()) throw ValidationError(std::string("contrast: empty ") + name + " region");
  double sum = 0.0, var = 0.0;
  for (auto k : region) {
    if (k >= map.size()) throw ValidationError(std::string("contrast: ") + name + " index out of range");
    if (!map.defined(k)) throw ValidationError(std::string("contrast: undefined g2 in ") + name + " region");
    sum += map.g2[k];
    var += map.g2_stderr[k] * map.g2_stderr[k];
  }
  const double count = static_cast<double>(region.size());
  return {sum / count, std::sqrt(var) / count};
}

}  // namespace

ContrastReport measured_contrast(const CorrelationMap& map, std::span<const std::size_t> signal_region,
                                 std::span<const std::size_t> background_region, double object_area,
                                 double detector_area) {
  for (auto s : signal_region) {
    if (std::find(background_region.begin(), background_region.end(), s) != background_region.end()) {
      throw ValidationError("contrast: signal and background regions overlap");
    }
  }
  const auto [sig, sig_se] = region_mean(map, signal_region, "signal");
  const auto [bg, bg_se] = region_mean(map, background_region, "background");
  ContrastReport report;
  report.s_measured = sig / bg;
  report.s_stderr = report.s_measured * std::hypot(sig_se / sig, bg_se / bg);
  report.s_predicted = predicted_contrast(object_area, detector_area);
  report.object_area = object_area;
  report.detector_area = detector_area;
  report.signal_region.assign(signal_region.begin(), signal_region.end());
  report.background_region.assign(background_region.begin(), background_region.end());
  return report;
}

SpeckleMetricsAccumulator::SpeckleMetricsAccumulator(const Grid2D& grid)
    : grid_(grid), sum_(grid.size(), 0.0), square_sum_(grid.size(), 0.0), power_(grid.size(), Complex{}),
      work_(grid.size()) {
  validate(grid);
}

void SpeckleMetricsAccumulator::add(const IntensityMap& frame) {
  if (!(frame.grid == grid_) || frame.values.size() != grid_.size()) {
    throw ValidationError("speckle metrics: grid mismatch");
  }
  const std::size_t n = grid_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double v = frame.values[k];
    sum_[k] += v;
    square_sum_[k] += v * v;
    work_[k] = v;
  }
  const auto& fft = Fft2D::get(grid_.nx, grid_.ny);
  fft.forward(work_);
  for (std::size_t k = 0; k < n; ++k) power_[k] += std::norm(work_[k]);
  ++count_;
}

SpeckleMetrics SpeckleMetricsAccumulator::finalize() const {
  if (count_ < 100) {
    throw InsufficientDataError("speckle metrics: need at least 100 frames, got " + std::to_string(count_));
  }
  const std::size_t n = grid_.size();
  const double count = static_cast<double>(count_);
  const auto& fft = Fft2D::get(grid_.nx, grid_.ny);

  std::vector<double> mean(n);
  for (std::size_t k = 0; k < n; ++k) mean[k] = sum_[k] / count;

  // Sum over frames of the periodic autocorrelation I*I, and that of the mean.
  ComplexBuffer power = power_;
  fft.backward(power);
  ComplexBuffer work(n);
  for (std::size_t k = 0; k < n; ++k) work[k] = mean[k];
  fft.forward(work);
  for (auto& w : work) w = std::norm(w);
  fft.backward(work);

  SpeckleMetrics metrics;
  // Pair-normalized autocovariance |mu(dx)|^2 along x:
  // sum_k dI_k * dI_k = sum_k I_k * I_k - K M * M.
  std::vector<double> profile(grid_.nx, 0.0);
  for (std::size_t i = 0; i < grid_.nx; ++i) {
    const std::size_t lag = (i + grid_.nx - grid_.nx / 2) % grid_.nx;
    const double pair = work[lag].real();
    profile[i] = pair > 0.0 ? (power[lag].real() - count * pair) / (count * pair) : 0.0;
  }
  const double zero_lag = profile[grid_.nx / 2];
  if (zero_lag > 0.0) {
    for (auto& v : profile) v /= zero_lag;
    metrics.correlation_length = full_width_at_level(profile, grid_.nx / 2, 0.25, grid_.dx);
    metrics.intensity_autocovariance_fwhm = full_width_at_level(profile, grid_.nx / 2, 0.5, grid_.dx);
  } else {
    metrics.correlation_length = std::numeric_limits<double>::quiet_NaN();
    metrics.intensity_autocovariance_fwhm = std::numeric_limits<double>::quiet_NaN();
  }
  metrics.autocovariance_profile = std::move(profile);

  const double peak = *std::max_element(mean.begin(), mean.end());
  double contrast_sum = 0.0;
  std::size_t lit = 0;
  if (peak > 0.0) {
    for (std::size_t k = 0; k < n; ++k) {
      if (mean[k] >= 0.5 * peak) {
        const double var = std::max(0.0, (square_sum_[k] - count * mean[k] * mean[k]) / (count - 1.0));
        contrast_sum += std::sqrt(var) / mean[k];
        ++lit;
      }
    }
  }
  metrics.contrast = lit > 0 ? contrast_sum / static_cast<double>(lit) : 0.0;
  return metrics;
}

SpeckleMetrics speckle_metrics(std::span<const IntensityMap> frames) {
  if (frames.size() < 100) {
    throw InsufficientDataError("speckle metrics: need at least 100 frames, got " + std::to_string(frames.size()));
  }
  SpeckleMetricsAccumulator acc(frames.front().grid);
  for (const auto& f : frames) acc.add(f);
  return acc.finalize();
}

}  // namespace ghostsim
