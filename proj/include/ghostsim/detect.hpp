#pragma once

#include <cstdint>
#include <vector>

#include "ghostsim/field.hpp"
#include "ghostsim/optics.hpp"

namespace ghostsim {

class SpeckleSource;

/// Square point detector scanned along the row y = scan_y.
struct PointDetectorSpec {
  double side = 0.0;                    ///< sqrt(a), metres
  std::vector<double> scan_positions;   ///< window centres along x, metres
  double scan_y = 0.0;

  double area() const noexcept { return side * side; }
  bool operator==(const PointDetectorSpec&) const = default;
};

/// Inclusive pixel bounds of one detector window.
struct PixelWindow {
  std::size_t col0 = 0, col1 = 0;
  std::size_t row0 = 0, row1 = 0;

  std::size_t pixels() const noexcept { return (col1 - col0 + 1) * (row1 - row0 + 1); }
  bool operator==(const PixelWindow&) const = default;
};

/// Window side in pixels: nearest odd count to side/pitch, rounding even
/// counts up. A side equal to the whole axis maps to the whole axis.
std::size_t snapped_side_pixels(double side, double pitch, std::size_t axis_pixels);

/// Snapped windows for every scan position. Throws ValidationError when the
/// side is below one pixel or a window leaves the grid.
std::vector<PixelWindow> detector_windows(const Grid2D& grid, const PointDetectorSpec& spec);

/// Sum |E|^2 dx dy over the whole grid.
double bucket_read(const ComplexField& field_after_object);

/// Sum |E|^2 dx dy over the window at `position_index`.
double point_read(const ComplexField& field, const PointDetectorSpec& spec, std::size_t position_index);

struct RealizationRecord {
  std::uint64_t realization_index = 0;
  double bucket = 0.0;
  std::vector<double> point_readings;

  bool operator==(const RealizationRecord&) const = default;
};

/// Splits `source`, sends beam 1 through `object_arm`, the mask and the
/// bucket, and beam 2 through `reference_arm` to every scan position.
RealizationRecord measure_realization(const ComplexField& source, const OpticalChain& object_arm,
                                      const OpticalChain& reference_arm, const ApertureMask& mask,
                                      const PointDetectorSpec& point_spec,
                                      std::uint64_t realization_index = 0);

/// Precomputed two-arm apparatus with any number of measurement channels.
///
/// A channel pairs an object arm + mask (bucket) with a reference arm +
/// detector (scan). Channels sharing a source realization share the arm
/// evaluations, so a single realization feeds e.g. several masks at once.
/// Identical arm chains are evaluated once; the copies they would produce
/// are bit-identical anyway.
class Apparatus {
 public:
  struct Channel {
    std::size_t object_arm = 0;
    std::size_t mask = 0;
    std::size_t reference_arm = 0;
    std::size_t detector = 0;
  };

  /// Per-thread scratch buffers.
  class Workspace {
   public:
    /// Field at the end of arm `arm` from the last measure() call.
    const ComplexBuffer& arm_field(std::size_t arm) const;

   private:
    friend class Apparatus;
    ComplexBuffer source_;
    ComplexBuffer alt_;      // source in the other domain, computed on demand
    ComplexBuffer scratch_;  // spectrum of an arm evaluated row by row
    std::vector<ComplexBuffer> arms_;
    bool full_ = false;
    std::vector<double> column_sums_;
    const Apparatus* owner_ = nullptr;
  };

  Apparatus(const Grid2D& grid, std::vector<OpticalChain> arms, std::vector<ApertureMask> masks,
            std::vector<PointDetectorSpec> detectors, std::vector<Channel> channels);

  const Grid2D& grid() const noexcept { return grid_; }
  std::size_t channel_count() const noexcept { return channels_.size(); }
  const Channel& channel(std::size_t c) const { return channels_.at(c); }
  const PointDetectorSpec& detector(std::size_t d) const { return detectors_.at(d); }
  const ApertureMask& mask(std::size_t m) const { return masks_.at(m); }
  const OpticalChain& arm(std::size_t a) const { return arms_.at(a); }

  /// With `full_fields` false, arms are evaluated only on the rows their
  /// masks and detectors read when that is cheaper; arm_field() then holds
  /// valid data on those rows only.
  Workspace make_workspace(bool full_fields = false) const;

  /// One realization from a speckle source; `records` gets one entry per channel.
  void measure(const SpeckleSource& source, std::uint64_t realization, std::uint64_t master_seed,
               Workspace& ws, std::vector<RealizationRecord>& records) const;

  /// One realization from an explicit source field.
  void measure(const ComplexField& source, std::uint64_t realization, Workspace& ws,
               std::vector<RealizationRecord>& records) const;

 private:
  enum class Domain { spatial, spectral };
  struct Support {
    std::vector<std::uint32_t> index;
    std::vector<Complex> transmission;
  };

  void run_arms(Domain source_domain, Workspace& ws) const;
  void detect(std::uint64_t realization, Workspace& ws, std::vector<RealizationRecord>& records) const;
  const std::vector<Complex>& transfer(double z) const;

  Grid2D grid_;
  std::vector<OpticalChain> arms_;
  std::vector<std::size_t> unique_arm_;       // arm -> evaluated slot
  std::vector<std::size_t> slot_source_arm_;  // slot -> representative arm
  std::vector<std::vector<std::size_t>> slot_rows_;  // rows read from each slot
  std::vector<ApertureMask> masks_;
  std::vector<Support> supports_;
  std::vector<PointDetectorSpec> detectors_;
  std::vector<std::vector<PixelWindow>> windows_;
  std::vector<Channel> channels_;
  std::vector<std::pair<double, std::vector<Complex>>> transfers_;
  std::vector<std::pair<LensSpec, std::vector<Complex>>> lenses_;
};

}  // namespace ghostsim
