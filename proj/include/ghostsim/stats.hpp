#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ghostsim/detect.hpp"
#include "ghostsim/field.hpp"

namespace ghostsim {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  void merge(const CompensatedSum& other) noexcept;
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Mergeable streaming sums behind g2 = <I_p I_b> / (<I_p><I_b>).
///
/// Besides the first and second moments it keeps the cross moments
/// sum (I_p I_b)^2, sum I_p^2 I_b and sum I_p I_b^2 so the standard error of
/// g2 follows from the full delta method.
class CorrelationAccumulator {
 public:
  CorrelationAccumulator() = default;
  explicit CorrelationAccumulator(std::size_t positions);

  std::size_t positions() const noexcept { return per_position_.size(); }
  std::uint64_t count() const noexcept { return n_; }

  void add(const RealizationRecord& record);
  void merge(const CorrelationAccumulator& other);

  struct PositionSums {
    CompensatedSum p, pp, pb, pbpb, ppb, pbb;
  };
  const PositionSums& position(std::size_t k) const { return per_position_.at(k); }
  double bucket_sum() const noexcept { return b_.value(); }
  double bucket_square_sum() const noexcept { return bb_.value(); }

 private:
  std::uint64_t n_ = 0;
  CompensatedSum b_, bb_;
  std::vector<PositionSums> per_position_;
};

/// Functional forms.
CorrelationAccumulator accumulate(CorrelationAccumulator acc, const RealizationRecord& record);
CorrelationAccumulator merge(const CorrelationAccumulator& a, const CorrelationAccumulator& b);

/// Finalized ghost-image estimates, one entry per scan position.
struct CorrelationMap {
  std::vector<double> positions;   ///< scan coordinate (m); may be empty for abstract maps
  std::vector<double> g2;          ///< NaN where undefined
  std::vector<double> covariance;  ///< <I_p I_b> - <I_p><I_b>
  std::vector<double> g2_stderr;
  std::vector<double> covariance_stderr;
  std::vector<double> mean_point;
  double mean_bucket = 0.0;
  std::uint64_t n_realizations = 0;

  std::size_t size() const noexcept { return g2.size(); }
  bool defined(std::size_t k) const;
};

/// Throws InsufficientDataError for n < 2.
CorrelationMap finalize(const CorrelationAccumulator& acc, std::vector<double> positions = {});

/// Background-subtracted ghost image: the covariance C(x).
std::vector<double> ghost_image(const CorrelationMap& map);

/// S = (1 + A/a) / (A/a). Requires A >= a > 0.
double predicted_contrast(double object_area, double detector_area);

struct ContrastReport {
  double s_measured = 0.0;
  double s_stderr = 0.0;
  double s_predicted = 0.0;
  double object_area = 0.0;
  double detector_area = 0.0;
  std::vector<std::size_t> signal_region;
  std::vector<std::size_t> background_region;
};

/// Mean g2 over the signal positions divided by mean g2 over the background.
ContrastReport measured_contrast(const CorrelationMap& map, std::span<const std::size_t> signal_region,
                                 std::span<const std::size_t> background_region, double object_area,
                                 double detector_area);

struct SpeckleMetrics {
  /// Width where the normalized intensity autocovariance |mu|^2 falls to 1/4,
  /// i.e. the FWHM of |mu|; directly comparable with the configured l_c.
  double correlation_length = 0.0;
  /// FWHM of the intensity autocovariance itself (|mu|^2 = 1/2).
  double intensity_autocovariance_fwhm = 0.0;
  /// Mean over illuminated pixels of std(I)/<I>.
  double contrast = 0.0;
  std::vector<double> autocovariance_profile;  ///< normalized, along x, centre at nx/2
};

/// Streaming form of speckle_metrics: memory does not grow with the frame count.
class SpeckleMetricsAccumulator {
 public:
  explicit SpeckleMetricsAccumulator(const Grid2D& grid);
  void add(const IntensityMap& frame);
  std::uint64_t count() const noexcept { return count_; }
  /// Requires at least 100 frames.
  SpeckleMetrics finalize() const;

 private:
  Grid2D grid_;
  std::uint64_t count_ = 0;
  std::vector<double> sum_, square_sum_;
  ComplexBuffer power_;  // sum over frames of |FFT(I)|^2
  ComplexBuffer work_;
};

/// Requires at least 100 frames on a common grid.
SpeckleMetrics speckle_metrics(std::span<const IntensityMap> frames);

}  // namespace ghostsim
