#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ghostsim/cell_model.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/rng.hpp"
#include "ghostsim/stats.hpp"

using namespace ghostsim;

namespace {

// Correlated exponential pair: bucket = p + q with q independent.
std::vector<RealizationRecord> synthetic(std::size_t n, std::uint64_t seed, std::size_t positions = 2) {
  std::vector<RealizationRecord> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    Philox4x32 rng(seed, r);
    const double p = -std::log(rng.uniform());
    const double q = -std::log(rng.uniform());
    out[r].realization_index = r;
    out[r].bucket = p + q;
    out[r].point_readings.push_back(p);
    for (std::size_t k = 1; k < positions; ++k) out[r].point_readings.push_back(-std::log(rng.uniform()));
  }
  return out;
}

CorrelationAccumulator accumulate_all(const std::vector<RealizationRecord>& recs, std::size_t lo, std::size_t hi) {
  CorrelationAccumulator acc(recs.front().point_readings.size());
  for (std::size_t r = lo; r < hi; ++r) acc.add(recs[r]);
  return acc;
}

}  // namespace

TEST_CASE("compensated sum") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
  CompensatedSum a, b;
  a.add(0.1);
  b.add(0.2);
  a.merge(b);
  CHECK(a.value() == doctest::Approx(0.3).epsilon(1e-16));
}

TEST_CASE("finalize matches a direct two-pass computation") {
  const auto recs = synthetic(5000, 1);
  const auto map = finalize(accumulate_all(recs, 0, recs.size()), {-1.0, 1.0});
  CHECK(map.positions == std::vector<double>{-1.0, 1.0});
  for (std::size_t k = 0; k < 2; ++k) {
    double sp = 0, sb = 0, spb = 0;
    for (const auto& r : recs) {
      sp += r.point_readings[k];
      sb += r.bucket;
      spb += r.point_readings[k] * r.bucket;
    }
    const double n = double(recs.size());
    const double g = (spb / n) / ((sp / n) * (sb / n));
    CHECK(map.g2[k] == doctest::Approx(g).epsilon(1e-12));
    CHECK(map.covariance[k] == doctest::Approx(spb / n - sp / n * sb / n).epsilon(1e-10));
    CHECK(map.mean_point[k] == doctest::Approx(sp / n).epsilon(1e-12));
  }
  // <p (p + q)> / (<p><p + q>) = (2 + 1) / 2.
  CHECK(map.g2[0] == doctest::Approx(1.5).epsilon(0.03));
  CHECK(map.g2[1] == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("shard merging is associative up to rounding") {
  const auto recs = synthetic(3000, 2, 4);
  const auto whole = finalize(accumulate_all(recs, 0, recs.size()));
  for (std::size_t cut : {1ul, 64ul, 1000ul, 2999ul}) {
    const auto merged = finalize(merge(accumulate_all(recs, 0, cut), accumulate_all(recs, cut, recs.size())));
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(merged.g2[k] - whole.g2[k]) <= 1e-12);
      CHECK(std::abs(merged.g2_stderr[k] - whole.g2_stderr[k]) <= 1e-12);
    }
  }
  CorrelationAccumulator empty;
  auto acc = accumulate_all(recs, 0, 10);
  acc.merge(empty);
  CHECK(acc.count() == 10);
  empty.merge(acc);
  CHECK(empty.count() == 10);
  CHECK_THROWS_AS(acc.merge(CorrelationAccumulator(3)), ValidationError);
  CHECK(accumulate(CorrelationAccumulator(4), recs[0]).count() == 1);
}

TEST_CASE("standard error matches the spread of independent estimates") {
  const std::size_t reps = 200, n = 500;
  std::vector<double> g;
  double se_mean = 0.0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const auto map = finalize(accumulate_all(synthetic(n, 100 + rep), 0, n));
    g.push_back(map.g2[0]);
    se_mean += map.g2_stderr[0] / reps;
  }
  const double mean = std::accumulate(g.begin(), g.end(), 0.0) / reps;
  double var = 0.0;
  for (double v : g) var += (v - mean) * (v - mean);
  const double spread = std::sqrt(var / (reps - 1));
  CHECK(se_mean == doctest::Approx(spread).epsilon(0.15));
}

TEST_CASE("finalize edge cases") {
  const auto recs = synthetic(3, 3);
  CHECK_THROWS_AS(finalize(accumulate_all(recs, 0, 1)), InsufficientDataError);
  CHECK_THROWS_AS(finalize(accumulate_all(recs, 0, 3), {1.0}), ValidationError);
  CorrelationAccumulator acc(1);
  RealizationRecord zero{0, 1.0, {0.0}};
  acc.add(zero);
  acc.add(zero);
  const auto map = finalize(acc);
  CHECK_FALSE(map.defined(0));
  RealizationRecord wrong{0, 1.0, {1.0, 2.0}};
  CHECK_THROWS_AS(acc.add(wrong), ValidationError);
}

TEST_CASE("predicted contrast") {
  CHECK(predicted_contrast(1.0, 1.0) == 2.0);
  CHECK(predicted_contrast(4.0, 1.0) == 1.25);
  for (double r : {1.0, 3.0, 16.0, 1000.0}) CHECK(predicted_contrast(r, 1.0) == doctest::Approx(1.0 + 1.0 / r));
  CHECK_THROWS_AS(predicted_contrast(0.5, 1.0), ValidationError);
  CHECK_THROWS_AS(predicted_contrast(1.0, 0.0), ValidationError);
}

TEST_CASE("measured contrast on a synthetic map") {
  CorrelationMap map;
  map.g2 = {1.0, 1.0, 1.5, 1.5, 1.0};
  map.g2_stderr = {0.01, 0.01, 0.01, 0.01, 0.01};
  const std::size_t sig[] = {2, 3};
  const std::size_t bg[] = {0, 1, 4};
  const auto report = measured_contrast(map, sig, bg, 2.0, 1.0);
  CHECK(report.s_measured == doctest::Approx(1.5));
  CHECK(report.s_predicted == doctest::Approx(1.5));
  CHECK(report.s_stderr == doctest::Approx(1.5 * std::hypot(std::sqrt(2e-4) / 2 / 1.5, std::sqrt(3e-4) / 3)));
  const std::size_t overlap[] = {3, 4};
  CHECK_THROWS_AS(measured_contrast(map, sig, overlap, 2.0, 1.0), ValidationError);
  CHECK_THROWS_AS(measured_contrast(map, {}, bg, 2.0, 1.0), ValidationError);
}

TEST_CASE("independent-cell model reproduces (1 + N) / N") {
  for (std::uint64_t cells : {1u, 2u, 4u, 8u}) {
    const auto r = cell_model_contrast(cells, 200000, 42);
    const double expected = (1.0 + double(cells)) / double(cells);
    CHECK(std::abs(r.contrast - expected) < 4.0 * r.contrast_stderr);
    CHECK(r.g2_uncorrelated == doctest::Approx(1.0).epsilon(0.02));
  }
  CHECK_THROWS_AS(cell_model_contrast(0, 10, 1), ValidationError);
}
