#include "ghostsim/cell_model.hpp"

#include <cmath>

#include "ghostsim/error.hpp"
#include "ghostsim/rng.hpp"
#include "ghostsim/stats.hpp"

namespace ghostsim {

CellModelResult cell_model_contrast(std::uint64_t cells, std::uint64_t samples, std::uint64_t master_seed) {
  if (cells < 1) throw ValidationError("cell model: need at least one cell");
  if (samples < 2) throw InsufficientDataError("cell model: need at least 2 samples");
  CorrelationAccumulator acc(2);
  RealizationRecord rec;
  rec.point_readings.resize(2);
  for (std::uint64_t s = 0; s < samples; ++s) {
    Philox4x32 rng(master_seed, s);
    double bucket = 0.0;
    double first = 0.0;
    for (std::uint64_t c = 0; c < cells; ++c) {
      const double cell = -std::log(rng.uniform());
      if (c == 0) first = cell;
      bucket += cell;
    }
    rec.realization_index = s;
    rec.bucket = bucket;
    rec.point_readings[0] = first;
    rec.point_readings[1] = -std::log(rng.uniform());
    acc.add(rec);
  }
  const auto map = finalize(acc);
  CellModelResult result;
  result.samples = samples;
  result.g2_correlated = map.g2[0];
  result.g2_uncorrelated = map.g2[1];
  result.contrast = map.g2[0] / map.g2[1];
  result.contrast_stderr =
      result.contrast * std::hypot(map.g2_stderr[0] / map.g2[0], map.g2_stderr[1] / map.g2[1]);
  return result;
}

}  // namespace ghostsim
