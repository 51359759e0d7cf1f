#include "ghostsim/speckle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ghostsim/error.hpp"
#include "ghostsim/optics.hpp"
#include "ghostsim/rng.hpp"

namespace ghostsim {

namespace {

// Spectral bins whose power is below this fraction of the peak are not drawn.
constexpr double kSupportFloor = 1e-10;
constexpr double kCalibrationTolerance = 0.05;

// |FWHM| of |mu| = exp(-r^2 / 2 sigma^2) is 2 sqrt(2 ln 2) sigma.
const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

// Power spectrum exp(-k^2 sigma^2 / 2), the transform of exp(-r^2 / 2 sigma^2).
std::vector<double> gaussian_power_spectrum(const Grid2D& grid, double sigma) {
  const double dkx = 2.0 * std::numbers::pi / grid.extent_x();
  const double dky = 2.0 * std::numbers::pi / grid.extent_y();
  std::vector<double> p(grid.size());
  for (std::size_t j = 0; j < grid.ny; ++j) {
    const double ky = dky * static_cast<double>(frequency_index(j, grid.ny));
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double kx = dkx * static_cast<double>(frequency_index(i, grid.nx));
      p[grid.index(i, j)] = std::exp(-0.5 * (kx * kx + ky * ky) * sigma * sigma);
    }
  }
  return p;
}

// Row Dy = 0 of a periodic autocorrelation, re-centred so index nx/2 is zero lag.
std::vector<double> centred_row(const Grid2D& grid, std::span<const Complex> corr) {
  std::vector<double> row(grid.nx);
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const std::size_t src = (i + grid.nx - grid.nx / 2) % grid.nx;
    row[i] = std::abs(corr[src]);
  }
  return row;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError("speckle: " + message);
}

}  // namespace

SpeckleMethod parse_speckle_method(std::string_view name) {
  if (name == "spectral" || name == "spectral-synthesis") return SpeckleMethod::spectral_synthesis;
  if (name == "diffuser" || name == "phase-screen-diffuser") return SpeckleMethod::phase_screen_diffuser;
  throw ValidationError("speckle: unknown method '" + std::string(name) +
                        "' (expected spectral or diffuser)");
}

std::string_view to_string(SpeckleMethod method) {
  switch (method) {
    case SpeckleMethod::spectral_synthesis:
      return "spectral";
    case SpeckleMethod::phase_screen_diffuser:
      return "diffuser";
  }
  throw ValidationError("speckle: unknown method");
}

void validate(const EnsembleSpec& ensemble) {
  if (ensemble.n_realizations < 1) throw ValidationError("ensemble: n_realizations must be >= 1");
}

void validate(const SpeckleSpec& spec, const Grid2D& grid) {
  validate(grid);
  const double pitch = std::max(grid.dx, grid.dy);
  require(std::isfinite(spec.correlation_length) && spec.correlation_length > 0.0,
          "correlation_length must be positive");
  if (spec.correlation_length < 2.0 * pitch) {
    throw SamplingError("speckle: correlation_length " + std::to_string(spec.correlation_length) +
                        " m is below two grid pitches (" + std::to_string(2.0 * pitch) + " m)");
  }
  require(std::isfinite(spec.mean_intensity) && spec.mean_intensity > 0.0,
          "mean_intensity must be positive");
  require(std::isfinite(spec.correlation_time) && spec.correlation_time >= 0.0,
          "correlation_time must be >= 0");
  require(std::isfinite(spec.beam_radius) && spec.beam_radius >= 0.0, "beam_radius must be >= 0");
  switch (spec.method) {
    case SpeckleMethod::spectral_synthesis:
      break;
    case SpeckleMethod::phase_screen_diffuser:
      if (spec.diffuser.screen_correlation_length < 2.0 * pitch) {
        throw SamplingError("speckle: diffuser screen_correlation_length below two grid pitches");
      }
      require(spec.diffuser.phase_rms > 0.0, "diffuser phase_rms must be positive");
      require(spec.diffuser.distance >= 0.0, "diffuser distance must be >= 0");
      break;
    default:
      throw ValidationError("speckle: unknown method");
  }
}

double coherence_sigma(double correlation_length) noexcept {
  return correlation_length / kFwhmPerSigma;
}

double beam_expansion(const SpeckleSpec& spec, double wavelength, double z) {
  if (!(spec.beam_radius > 0.0)) throw ValidationError("speckle: beam expansion needs beam_radius > 0");
  const double k = 2.0 * std::numbers::pi / wavelength;
  const double sigma_s = spec.beam_radius / 2.0;  // rms width of the intensity profile
  const double sigma_g = coherence_sigma(spec.correlation_length);
  const double spread = 1.0 / (4.0 * sigma_s * sigma_s) + 1.0 / (sigma_g * sigma_g);
  const double t = z / (k * sigma_s);
  return std::sqrt(1.0 + t * t * spread);
}

double effective_rayleigh_range(const SpeckleSpec& spec, double wavelength) {
  if (!(spec.beam_radius > 0.0)) throw ValidationError("speckle: Rayleigh range needs beam_radius > 0");
  const double k = 2.0 * std::numbers::pi / wavelength;
  const double sigma_s = spec.beam_radius / 2.0;
  const double sigma_g = coherence_sigma(spec.correlation_length);
  const double spread = 1.0 / (4.0 * sigma_s * sigma_s) + 1.0 / (sigma_g * sigma_g);
  return k * sigma_s / std::sqrt(spread);
}

SpeckleSource::SpeckleSource(const Grid2D& grid, const SpeckleSpec& spec) : grid_(grid), spec_(spec) {
  validate(spec_, grid_);

  const bool diffuser = spec_.method == SpeckleMethod::phase_screen_diffuser;
  const double target = diffuser ? spec_.diffuser.screen_correlation_length : spec_.correlation_length;
  const auto power = gaussian_power_spectrum(grid_, coherence_sigma(target));

  double total = 0.0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    if (power[k] >= kSupportFloor) {
      support_.push_back(static_cast<std::uint32_t>(k));
      total += power[k];
    }
  }
  // Spectral mode: <|E|^2> = I0. Diffuser mode: unit-variance complex noise
  // whose real part becomes the phase screen.
  const double scale = diffuser ? 1.0 : spec_.mean_intensity;
  amplitude_.reserve(support_.size());
  for (auto k : support_) amplitude_.push_back(std::sqrt(scale * power[k] / total));

  // Exact ensemble autocorrelation of the synthesized noise.
  ComplexBuffer corr(grid_.size(), Complex{});
  for (std::size_t s = 0; s < support_.size(); ++s) corr[support_[s]] = amplitude_[s] * amplitude_[s];
  Fft2D::get(grid_.nx, grid_.ny).backward(corr);

  if (diffuser) {
    // Field coherence of exp(i phi): exp(-sigma^2 (1 - rho_phi)).
    const double var = spec_.diffuser.phase_rms * spec_.diffuser.phase_rms;
    const double rho0 = corr[0].real();
    for (auto& c : corr) c = std::exp(-var * (1.0 - c.real() / rho0));
    const auto row = centred_row(grid_, corr);
    const double floor = std::exp(-var);
    std::vector<double> shifted(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) shifted[i] = (row[i] - floor) / (1.0 - floor);
    calibrated_lc_ = full_width_at_level(shifted, grid_.nx / 2, 0.5, grid_.dx);
    diffuser_transfer_ = transfer_function(grid_, spec_.diffuser.distance);
  } else {
    const auto row = centred_row(grid_, corr);
    calibrated_lc_ = full_width_at_level(row, grid_.nx / 2, 0.5, grid_.dx);
    if (!std::isfinite(calibrated_lc_) ||
        std::abs(calibrated_lc_ - spec_.correlation_length) >
            kCalibrationTolerance * spec_.correlation_length) {
      throw SamplingError("speckle: envelope self-check failed, autocorrelation FWHM " +
                          std::to_string(calibrated_lc_) + " m vs requested " +
                          std::to_string(spec_.correlation_length) + " m (grid too small?)");
    }
  }

  if (spec_.beam_radius > 0.0) {
    envelope_.resize(grid_.size());
    const double w2 = spec_.beam_radius * spec_.beam_radius;
    for (std::size_t j = 0; j < grid_.ny; ++j) {
      for (std::size_t i = 0; i < grid_.nx; ++i) {
        const double r2 = grid_.x(i) * grid_.x(i) + grid_.y(j) * grid_.y(j);
        envelope_[grid_.index(i, j)] = std::exp(-r2 / w2);
      }
    }
  }
}

bool SpeckleSource::has_direct_spectrum() const noexcept {
  return spec_.method == SpeckleMethod::spectral_synthesis && envelope_.empty();
}

void SpeckleSource::fill_spectrum(std::uint64_t realization, std::uint64_t master_seed,
                                  std::span<Complex> out) const {
  if (out.size() != grid_.size()) throw ValidationError("speckle: output buffer size mismatch");
  Philox4x32 rng(master_seed, realization);
  std::size_t next = 0;
  for (std::size_t s = 0; s < support_.size(); ++s) {
    const std::size_t k = support_[s];
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(next), out.begin() + static_cast<std::ptrdiff_t>(k), Complex{});
    out[k] = amplitude_[s] * rng.complex_normal();
    next = k + 1;
  }
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(next), out.end(), Complex{});
}

void SpeckleSource::spectrum_into(std::uint64_t realization, std::uint64_t master_seed,
                                  std::span<Complex> out) const {
  if (!has_direct_spectrum()) throw ValidationError("speckle: source has no direct spectrum");
  fill_spectrum(realization, master_seed, out);
}

void SpeckleSource::generate_into(std::uint64_t realization, std::uint64_t master_seed,
                                  std::span<Complex> out) const {
  fill_spectrum(realization, master_seed, out);
  const auto& fft = Fft2D::get(grid_.nx, grid_.ny);
  fft.backward(out);

  if (spec_.method == SpeckleMethod::phase_screen_diffuser) {
    const double amp = std::sqrt(spec_.mean_intensity);
    const double phase_scale = std::numbers::sqrt2 * spec_.diffuser.phase_rms;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double env = envelope_.empty() ? 1.0 : envelope_[k];
      out[k] = std::polar(amp * env, phase_scale * out[k].real());
    }
    if (spec_.diffuser.distance > 0.0) {
      fft.forward(out);
      const double inv_n = 1.0 / static_cast<double>(grid_.size());
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = (out[k] * inv_n) * diffuser_transfer_[k];
      fft.backward(out);
    }
    return;
  }

  if (!envelope_.empty()) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= envelope_[k];
  }
}

ComplexField SpeckleSource::generate(std::uint64_t realization, std::uint64_t master_seed) const {
  ComplexBuffer data(grid_.size());
  generate_into(realization, master_seed, data);
  return ComplexField(grid_, std::move(data));
}

ComplexField generate_speckle(const Grid2D& grid, const SpeckleSpec& spec, std::uint64_t realization,
                              std::uint64_t master_seed) {
  return SpeckleSource(grid, spec).generate(realization, master_seed);
}

double exponential_ks_threshold(std::size_t samples) noexcept {
  return 1.628 / std::sqrt(static_cast<double>(samples));
}

IntensityHistogramReport intensity_histogram_test(std::span<const double> intensities,
                                                  std::size_t bins) {
  if (intensities.empty()) throw ValidationError("histogram: empty ensemble");
  if (bins == 0) throw ValidationError("histogram: bins must be >= 1");
  IntensityHistogramReport report;
  report.samples = intensities.size();
  double s1 = 0.0, s2 = 0.0;
  for (double v : intensities) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("histogram: invalid intensity sample");
    s1 += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(report.samples);
  report.mean = s1 / n;
  report.second_moment = s2 / n;
  report.normalized_second_moment = report.mean > 0.0 ? report.second_moment / (report.mean * report.mean) : 0.0;
  report.threshold = exponential_ks_threshold(report.samples);

  std::vector<double> sorted(intensities.begin(), intensities.end());
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  if (report.mean > 0.0) {
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      const double model = 1.0 - std::exp(-sorted[k] / report.mean);
      const double below = static_cast<double>(k) / n;
      const double upto = static_cast<double>(k + 1) / n;
      d = std::max({d, std::abs(model - below), std::abs(upto - model)});
    }
  } else {
    d = 1.0;  // all-zero sample: no exponential law fits
  }
  report.ks_distance = d;
  report.passed = d < report.threshold;

  // Histogram over [0, 8 <I>) in units of the mean.
  constexpr double kRange = 8.0;
  report.bin_edges.resize(bins + 1);
  report.bin_counts.assign(bins, 0);
  for (std::size_t b = 0; b <= bins; ++b) report.bin_edges[b] = kRange * static_cast<double>(b) / static_cast<double>(bins);
  if (report.mean > 0.0) {
    for (double v : sorted) {
      const double u = v / report.mean;
      if (u < kRange) ++report.bin_counts[static_cast<std::size_t>(u / kRange * static_cast<double>(bins))];
    }
  }
  return report;
}

IntensityHistogramReport intensity_histogram_test(std::span<const ComplexField> fields,
                                                  std::size_t stride, std::size_t bins) {
  if (fields.empty()) throw ValidationError("histogram: empty ensemble");
  if (fields.size() < 100) {
    throw InsufficientDataError("histogram: need at least 100 fields, got " + std::to_string(fields.size()));
  }
  if (stride == 0) throw ValidationError("histogram: stride must be >= 1");
  std::vector<double> samples;
  for (const auto& f : fields) {
    const Grid2D& g = f.grid();
    for (std::size_t j = 0; j < g.ny; j += stride) {
      for (std::size_t i = 0; i < g.nx; i += stride) samples.push_back(std::norm(f(i, j)));
    }
  }
  return intensity_histogram_test(samples, bins);
}

}  // namespace ghostsim
