#include "ghostsim/detect.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ghostsim/error.hpp"
#include "ghostsim/speckle.hpp"

namespace ghostsim {

std::size_t snapped_side_pixels(double side, double pitch, std::size_t axis_pixels) {
  if (!(side > 0.0) || !std::isfinite(side)) throw ValidationError("detector: side must be positive");
  if (side < pitch * (1.0 - 1e-9)) {
    throw ValidationError("detector: side " + std::to_string(side) + " m is smaller than one pixel (" +
                          std::to_string(pitch) + " m)");
  }
  auto n = static_cast<std::size_t>(std::llround(side / pitch));
  n = std::max<std::size_t>(n, 1);
  if (n % 2 == 0 && n != axis_pixels) ++n;
  return n;
}

namespace {

// Inclusive [first, last] of a window of `n` pixels centred on `centre`.
bool axis_window(long long centre, std::size_t n, std::size_t axis, std::size_t& first, std::size_t& last) {
  if (n == axis && n % 2 == 0) {
    // Whole even-length axis: only the central position fits.
    if (centre != static_cast<long long>(axis / 2)) return false;
    first = 0;
    last = axis - 1;
    return true;
  }
  const auto half = static_cast<long long>(n / 2);
  const long long lo = centre - half;
  const long long hi = centre + half;
  if (lo < 0 || hi >= static_cast<long long>(axis)) return false;
  first = static_cast<std::size_t>(lo);
  last = static_cast<std::size_t>(hi);
  return true;
}

// Column-major window sum: for each column, rows first. Shared by point_read
// and the batched scan so both produce the same bits.
double window_sum(std::span<const Complex> samples, const Grid2D& grid, const PixelWindow& w) {
  double total = 0.0;
  for (std::size_t c = w.col0; c <= w.col1; ++c) {
    double column = 0.0;
    for (std::size_t r = w.row0; r <= w.row1; ++r) column += std::norm(samples[grid.index(c, r)]);
    total += column;
  }
  return total;
}

}  // namespace

std::vector<PixelWindow> detector_windows(const Grid2D& grid, const PointDetectorSpec& spec) {
  const std::size_t ncols = snapped_side_pixels(spec.side, grid.dx, grid.nx);
  const std::size_t nrows = snapped_side_pixels(spec.side, grid.dy, grid.ny);
  PixelWindow base;
  if (!axis_window(grid.nearest_row(spec.scan_y), nrows, grid.ny, base.row0, base.row1)) {
    throw ValidationError("detector: scan row window leaves the grid");
  }
  std::vector<PixelWindow> windows;
  windows.reserve(spec.scan_positions.size());
  for (std::size_t p = 0; p < spec.scan_positions.size(); ++p) {
    PixelWindow w = base;
    if (!axis_window(grid.nearest_column(spec.scan_positions[p]), ncols, grid.nx, w.col0, w.col1)) {
      throw ValidationError("detector: window at scan position " + std::to_string(p) + " (x = " +
                            std::to_string(spec.scan_positions[p]) + " m) leaves the grid");
    }
    windows.push_back(w);
  }
  return windows;
}

double bucket_read(const ComplexField& field_after_object) {
  double sum = 0.0;
  for (const auto& e : field_after_object.samples()) sum += std::norm(e);
  return sum * field_after_object.grid().pixel_area();
}

double point_read(const ComplexField& field, const PointDetectorSpec& spec, std::size_t position_index) {
  if (position_index >= spec.scan_positions.size()) {
    throw ValidationError("detector: position index out of range");
  }
  PointDetectorSpec single = spec;
  single.scan_positions = {spec.scan_positions[position_index]};
  const auto windows = detector_windows(field.grid(), single);
  return window_sum(field.samples(), field.grid(), windows.front()) * field.grid().pixel_area();
}

RealizationRecord measure_realization(const ComplexField& source, const OpticalChain& object_arm,
                                      const OpticalChain& reference_arm, const ApertureMask& mask,
                                      const PointDetectorSpec& point_spec, std::uint64_t realization_index) {
  Apparatus apparatus(source.grid(), {object_arm, reference_arm}, {mask}, {point_spec}, {{0, 0, 1, 0}});
  auto ws = apparatus.make_workspace();
  std::vector<RealizationRecord> records;
  apparatus.measure(source, realization_index, ws, records);
  return std::move(records.front());
}

const ComplexBuffer& Apparatus::Workspace::arm_field(std::size_t arm) const {
  if (owner_ == nullptr) throw ValidationError("apparatus: workspace not initialised");
  return arms_.at(owner_->unique_arm_.at(arm));
}

Apparatus::Apparatus(const Grid2D& grid, std::vector<OpticalChain> arms, std::vector<ApertureMask> masks,
                     std::vector<PointDetectorSpec> detectors, std::vector<Channel> channels)
    : grid_(grid),
      arms_(std::move(arms)),
      masks_(std::move(masks)),
      detectors_(std::move(detectors)),
      channels_(std::move(channels)) {
  validate(grid_);
  if (channels_.empty()) throw ValidationError("apparatus: no channels");
  for (const auto& arm : arms_) validate(arm);

  for (std::size_t a = 0; a < arms_.size(); ++a) {
    std::size_t slot = slot_source_arm_.size();
    for (std::size_t s = 0; s < slot_source_arm_.size(); ++s) {
      if (arms_[slot_source_arm_[s]] == arms_[a]) {
        slot = s;
        break;
      }
    }
    if (slot == slot_source_arm_.size()) slot_source_arm_.push_back(a);
    unique_arm_.push_back(slot);

    for (const auto& step : arms_[a].steps) {
      if (const auto* p = std::get_if<PropagationSpec>(&step)) {
        if (p->z == 0.0) continue;
        const bool known = std::any_of(transfers_.begin(), transfers_.end(),
                                       [&](const auto& t) { return t.first == p->z; });
        if (!known) transfers_.emplace_back(p->z, transfer_function(grid_, p->z));
      } else {
        const auto& lens = std::get<LensSpec>(step);
        const bool known = std::any_of(lenses_.begin(), lenses_.end(),
                                       [&](const auto& l) { return l.first == lens; });
        if (!known) lenses_.emplace_back(lens, lens_phase(grid_, lens));
      }
    }
  }

  for (const auto& mask : masks_) {
    if (!(mask.grid() == grid_)) throw ValidationError("apparatus: mask grid mismatch");
    Support support;
    const auto t = mask.transmission();
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] != Complex{}) {
        support.index.push_back(static_cast<std::uint32_t>(k));
        support.transmission.push_back(t[k]);
      }
    }
    supports_.push_back(std::move(support));
  }

  for (const auto& det : detectors_) windows_.push_back(detector_windows(grid_, det));

  slot_rows_.assign(slot_source_arm_.size(), {});
  for (const auto& ch : channels_) {
    if (ch.object_arm >= arms_.size() || ch.reference_arm >= arms_.size() || ch.mask >= masks_.size() ||
        ch.detector >= detectors_.size()) {
      throw ValidationError("apparatus: channel refers to a missing component");
    }
    auto& object_rows = slot_rows_[unique_arm_[ch.object_arm]];
    for (auto k : supports_[ch.mask].index) object_rows.push_back(k / grid_.nx);
    auto& reference_rows = slot_rows_[unique_arm_[ch.reference_arm]];
    if (!windows_[ch.detector].empty()) {
      const auto& w = windows_[ch.detector].front();
      for (std::size_t r = w.row0; r <= w.row1; ++r) reference_rows.push_back(r);
    }
  }
  for (auto& rows : slot_rows_) {
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  }
}

Apparatus::Workspace Apparatus::make_workspace(bool full_fields) const {
  Workspace ws;
  ws.owner_ = this;
  ws.full_ = full_fields;
  ws.source_.assign(grid_.size(), Complex{});
  ws.arms_.assign(slot_source_arm_.size(), ComplexBuffer(grid_.size()));
  ws.column_sums_.assign(grid_.nx, 0.0);
  return ws;
}

const std::vector<Complex>& Apparatus::transfer(double z) const {
  for (const auto& t : transfers_) {
    if (t.first == z) return t.second;
  }
  throw ValidationError("apparatus: missing transfer function");
}

void Apparatus::run_arms(Domain source_domain, Workspace& ws) const {
  const auto& fft = Fft2D::get(grid_.nx, grid_.ny);
  const double inv_n = 1.0 / static_cast<double>(grid_.size());

  bool alt_ready = false;
  auto source_in = [&](Domain want) -> const ComplexBuffer& {
    if (want == source_domain) return ws.source_;
    if (!alt_ready) {
      ws.alt_.assign(ws.source_.begin(), ws.source_.end());
      if (want == Domain::spectral) {
        fft.forward(ws.alt_);
        for (auto& v : ws.alt_) v *= inv_n;
      } else {
        fft.backward(ws.alt_);
      }
      alt_ready = true;
    }
    return ws.alt_;
  };

  for (std::size_t slot = 0; slot < slot_source_arm_.size(); ++slot) {
    const auto& steps = arms_[slot_source_arm_[slot]].steps;
    auto effective = [](const OpticalStep& s) {
      const auto* p = std::get_if<PropagationSpec>(&s);
      return p == nullptr || p->z != 0.0;
    };
    const auto first = std::find_if(steps.begin(), steps.end(), effective);
    const auto last = std::find_if(steps.rbegin(), steps.rend(), effective);
    const Domain start = first != steps.end() && std::holds_alternative<PropagationSpec>(*first) ? Domain::spectral
                                                                                                : Domain::spatial;
    const bool ends_spectral = last != steps.rend() && std::holds_alternative<PropagationSpec>(*last);
    const auto& rows = slot_rows_[slot];
    const bool pruned = ends_spectral && !ws.full_ && !rows.empty() && rows.size() * 8 <= grid_.ny;

    auto& data = pruned ? ws.scratch_ : ws.arms_[slot];
    const auto& src = source_in(start);
    data.assign(src.begin(), src.end());
    Domain domain = start;
    for (const auto& step : steps) {
      if (const auto* p = std::get_if<PropagationSpec>(&step)) {
        if (p->z == 0.0) continue;
        if (domain == Domain::spatial) {
          fft.forward(data);
          for (auto& v : data) v *= inv_n;
          domain = Domain::spectral;
        }
        const auto& t = transfer(p->z);
        for (std::size_t k = 0; k < data.size(); ++k) data[k] *= t[k];
      } else {
        const auto& lens = std::get<LensSpec>(step);
        if (domain == Domain::spectral) {
          fft.backward(data);
          domain = Domain::spatial;
        }
        const auto it = std::find_if(lenses_.begin(), lenses_.end(), [&](const auto& l) { return l.first == lens; });
        const auto& phase = it->second;
        for (std::size_t k = 0; k < data.size(); ++k) data[k] *= phase[k];
      }
    }
    if (domain == Domain::spectral) {
      if (pruned) {
        fft.backward_rows(data, rows, ws.arms_[slot]);
      } else {
        fft.backward(data);
      }
    }
  }
}

void Apparatus::detect(std::uint64_t realization, Workspace& ws, std::vector<RealizationRecord>& records) const {
  const double area = grid_.pixel_area();
  records.resize(channels_.size());
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    const auto& ch = channels_[c];
    auto& rec = records[c];
    rec.realization_index = realization;

    const auto& object = ws.arms_[unique_arm_[ch.object_arm]];
    const auto& support = supports_[ch.mask];
    double bucket = 0.0;
    for (std::size_t s = 0; s < support.index.size(); ++s) {
      bucket += std::norm(object[support.index[s]] * support.transmission[s]);
    }
    rec.bucket = bucket * area;

    const auto& reference = ws.arms_[unique_arm_[ch.reference_arm]];
    const auto& windows = windows_[ch.detector];
    rec.point_readings.resize(windows.size());
    if (windows.empty()) continue;
    std::size_t lo = grid_.nx, hi = 0;
    for (const auto& w : windows) {
      lo = std::min(lo, w.col0);
      hi = std::max(hi, w.col1);
    }
    const std::size_t row0 = windows.front().row0;
    const std::size_t row1 = windows.front().row1;
    for (std::size_t col = lo; col <= hi; ++col) {
      double column = 0.0;
      for (std::size_t r = row0; r <= row1; ++r) column += std::norm(reference[grid_.index(col, r)]);
      ws.column_sums_[col] = column;
    }
    for (std::size_t p = 0; p < windows.size(); ++p) {
      double total = 0.0;
      for (std::size_t col = windows[p].col0; col <= windows[p].col1; ++col) total += ws.column_sums_[col];
      rec.point_readings[p] = total * area;
    }
  }
}

void Apparatus::measure(const SpeckleSource& source, std::uint64_t realization, std::uint64_t master_seed,
                        Workspace& ws, std::vector<RealizationRecord>& records) const {
  if (ws.owner_ != this) throw ValidationError("apparatus: workspace belongs to another apparatus");
  if (!(source.grid() == grid_)) throw ValidationError("apparatus: source grid mismatch");
  if (source.has_direct_spectrum()) {
    source.spectrum_into(realization, master_seed, ws.source_);
    run_arms(Domain::spectral, ws);
  } else {
    source.generate_into(realization, master_seed, ws.source_);
    run_arms(Domain::spatial, ws);
  }
  detect(realization, ws, records);
}

void Apparatus::measure(const ComplexField& source, std::uint64_t realization, Workspace& ws,
                        std::vector<RealizationRecord>& records) const {
  if (ws.owner_ != this) throw ValidationError("apparatus: workspace belongs to another apparatus");
  if (!(source.grid() == grid_)) throw ValidationError("apparatus: source grid mismatch");
  std::copy(source.samples().begin(), source.samples().end(), ws.source_.begin());
  run_arms(Domain::spatial, ws);
  detect(realization, ws, records);
}

}  // namespace ghostsim
