#include "ghostsim/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "ghostsim/error.hpp"

namespace ghostsim {

void parallel_for(std::uint64_t count, unsigned workers, const std::function<void(std::uint64_t)>& task) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(body);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<CorrelationAccumulator> run_ensemble(const SpeckleSource& source, const Apparatus& apparatus,
                                                 const EnsembleSpec& ensemble, const EnsembleOptions& options) {
  validate(ensemble);
  if (options.shard_size == 0) throw ValidationError("ensemble: shard_size must be >= 1");
  const std::uint64_t n = ensemble.n_realizations;
  const std::uint64_t shards = (n + options.shard_size - 1) / options.shard_size;
  const std::size_t channels = apparatus.channel_count();

  auto empty = [&] {
    std::vector<CorrelationAccumulator> accs;
    accs.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c) {
      accs.emplace_back(apparatus.detector(apparatus.channel(c).detector).scan_positions.size());
    }
    return accs;
  };

  std::vector<std::vector<CorrelationAccumulator>> partial(shards);
  parallel_for(shards, options.workers, [&](std::uint64_t shard) {
    thread_local std::vector<RealizationRecord> records;
    auto ws = apparatus.make_workspace();
    auto accs = empty();
    const std::uint64_t first = shard * options.shard_size;
    const std::uint64_t last = std::min(n, first + options.shard_size);
    for (std::uint64_t r = first; r < last; ++r) {
      apparatus.measure(source, r, ensemble.master_seed, ws, records);
      for (std::size_t c = 0; c < channels; ++c) accs[c].add(records[c]);
    }
    partial[shard] = std::move(accs);
  });

  auto total = empty();
  for (const auto& shard : partial) {
    for (std::size_t c = 0; c < channels; ++c) total[c].merge(shard[c]);
  }
  return total;
}

}  // namespace ghostsim
