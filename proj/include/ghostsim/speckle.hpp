#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghostsim/field.hpp"
#include "ghostsim/grid.hpp"

namespace ghostsim {

enum class SpeckleMethod {
  spectral_synthesis,     ///< filtered circular-Gaussian noise, l_c prescribed
  phase_screen_diffuser,  ///< plane wave x random phase screen, then free propagation
};

SpeckleMethod parse_speckle_method(std::string_view name);
std::string_view to_string(SpeckleMethod method);

struct DiffuserParams {
  double screen_correlation_length = 320e-6;  ///< FWHM of the phase autocorrelation (m)
  double phase_rms = 4.0;                      ///< rms phase (rad)
  double distance = 1.0;                       ///< screen-to-plane distance (m)

  bool operator==(const DiffuserParams&) const = default;
};

/// Statistical description of the chaotic source.
struct SpeckleSpec {
  double correlation_length = 80e-6;  ///< l_c: FWHM of |normalized field autocorrelation| (m)
  double mean_intensity = 1.0;        ///< I0 on axis
  double correlation_time = 1e-3;     ///< tau_c (s); metadata, realizations are independent
  SpeckleMethod method = SpeckleMethod::spectral_synthesis;
  DiffuserParams diffuser{};
  /// 1/e^2 intensity radius of a Gaussian illumination envelope (m). Zero
  /// means uniform illumination: the field is statistically homogeneous and
  /// periodic on the grid.
  double beam_radius = 0.0;

  bool operator==(const SpeckleSpec&) const = default;
};

struct EnsembleSpec {
  std::uint64_t n_realizations = 1;
  std::uint64_t master_seed = 0;

  bool operator==(const EnsembleSpec&) const = default;
};

void validate(const EnsembleSpec& ensemble);

/// Validates `spec` against `grid`: SamplingError when l_c < 2 max(dx, dy),
/// ValidationError for other bad fields.
void validate(const SpeckleSpec& spec, const Grid2D& grid);

/// Gaussian rms width sigma of |mu(r)| = exp(-r^2 / (2 sigma^2)) with FWHM l_c.
double coherence_sigma(double correlation_length) noexcept;

/// Gaussian Schell-model expansion factor Delta(z) of an enveloped spectral
/// source: beam width and coherence width both scale by this factor.
double beam_expansion(const SpeckleSpec& spec, double wavelength, double z);

/// Distance at which beam_expansion reaches sqrt(2).
double effective_rayleigh_range(const SpeckleSpec& spec, double wavelength);

/// Realization generator for one (grid, spec) pair.
///
/// Construction does the envelope calibration once and verifies it against
/// the exact ensemble autocorrelation (the transform of the power spectrum);
/// a mismatch above 5% throws SamplingError. Generation is const and safe
/// to call concurrently.
class SpeckleSource {
 public:
  SpeckleSource(const Grid2D& grid, const SpeckleSpec& spec);

  const Grid2D& grid() const noexcept { return grid_; }
  const SpeckleSpec& spec() const noexcept { return spec_; }

  ComplexField generate(std::uint64_t realization, std::uint64_t master_seed) const;
  void generate_into(std::uint64_t realization, std::uint64_t master_seed,
                     std::span<Complex> out) const;

  /// True when realizations can be produced directly in the spatial-frequency
  /// domain (uniform spectral synthesis).
  bool has_direct_spectrum() const noexcept;

  /// Spectrum F of the realization such that field = unnormalized backward DFT of F.
  void spectrum_into(std::uint64_t realization, std::uint64_t master_seed,
                     std::span<Complex> out) const;

  /// FWHM of |mu| measured on the exact ensemble autocorrelation.
  double calibrated_correlation_length() const noexcept { return calibrated_lc_; }

  /// Number of spectral bins that receive random amplitudes.
  std::size_t support_size() const noexcept { return support_.size(); }

 private:
  void fill_spectrum(std::uint64_t realization, std::uint64_t master_seed,
                     std::span<Complex> out) const;

  Grid2D grid_;
  SpeckleSpec spec_;
  std::vector<std::uint32_t> support_;  // spectral bin indices, ascending
  std::vector<double> amplitude_;       // per support bin
  std::vector<double> envelope_;        // empty for uniform illumination
  std::vector<Complex> diffuser_transfer_;
  double calibrated_lc_ = 0.0;
};

/// One realization; pure function of its arguments.
ComplexField generate_speckle(const Grid2D& grid, const SpeckleSpec& spec,
                              std::uint64_t realization, std::uint64_t master_seed);

/// Goodness of fit of an intensity sample against the negative-exponential law.
struct IntensityHistogramReport {
  std::size_t samples = 0;
  double mean = 0.0;
  double second_moment = 0.0;
  double normalized_second_moment = 0.0;  ///< <I^2> / <I>^2
  double ks_distance = 0.0;               ///< max |F_emp - (1 - exp(-I/<I>))|
  double threshold = 0.0;
  bool passed = false;
  std::vector<double> bin_edges;          ///< in units of <I>
  std::vector<std::size_t> bin_counts;
};

/// 1% critical value of the Kolmogorov statistic, 1.628 / sqrt(n). With the
/// mean estimated from the sample this is conservative.
double exponential_ks_threshold(std::size_t samples) noexcept;

IntensityHistogramReport intensity_histogram_test(std::span<const double> intensities,
                                                  std::size_t bins = 40);

/// Pools |E|^2 from every field at a lattice of pixels `stride` apart.
/// Requires at least 100 fields; throws ValidationError when empty.
IntensityHistogramReport intensity_histogram_test(std::span<const ComplexField> fields,
                                                  std::size_t stride = 1, std::size_t bins = 40);

}  // namespace ghostsim
