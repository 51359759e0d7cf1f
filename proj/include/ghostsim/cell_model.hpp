#pragma once

#include <cstdint>

namespace ghostsim {

/// Outcome of the independent-cell Monte Carlo model of bucket ghost imaging.
struct CellModelResult {
  double g2_correlated = 0.0;    ///< point detector on one of the object's cells
  double g2_uncorrelated = 0.0;  ///< point detector on an independent cell
  double contrast = 0.0;         ///< ratio of the two
  double contrast_stderr = 0.0;
  std::uint64_t samples = 0;
};

/// The object is `cells` independent speckle cells with exponential
/// intensities; the bucket is their sum. The point detector sees either the
/// first cell or an unrelated one. Needs no field simulation at all, so it
/// cross-checks the wave simulation and the closed form.
CellModelResult cell_model_contrast(std::uint64_t cells, std::uint64_t samples, std::uint64_t master_seed);

}  // namespace ghostsim
