#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ghostsim/detect.hpp"
#include "ghostsim/speckle.hpp"
#include "ghostsim/stats.hpp"

namespace ghostsim {

struct EnsembleOptions {
  unsigned workers = 1;  ///< 0 = hardware concurrency
  /// Realizations per shard. Shards are accumulated serially and merged in
  /// index order, so results do not depend on the worker count.
  std::uint64_t shard_size = 64;
};

/// Runs `ensemble.n_realizations` realizations of `source` through
/// `apparatus`; returns one accumulator per channel.
std::vector<CorrelationAccumulator> run_ensemble(const SpeckleSource& source, const Apparatus& apparatus,
                                                 const EnsembleSpec& ensemble,
                                                 const EnsembleOptions& options = {});

/// Applies `task(index)` for index in [0, count) on `workers` threads.
/// Exceptions from any task are rethrown after all threads join.
void parallel_for(std::uint64_t count, unsigned workers, const std::function<void(std::uint64_t)>& task);

}  // namespace ghostsim
