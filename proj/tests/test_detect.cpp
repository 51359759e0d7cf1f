#include <cmath>
#include <vector>

#include "doctest.h"
#include "ghostsim/detect.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/speckle.hpp"

using namespace ghostsim;

namespace {

Grid2D grid128() { return make_grid(128, 128, 10e-6, 10e-6, 532e-9); }

// Oracle: direct pixel sum over a (2h+1)^2 window centred on (ci, cj).
double window_oracle(const ComplexField& f, long long ci, long long cj, long long h) {
  double s = 0.0;
  for (long long j = cj - h; j <= cj + h; ++j) {
    for (long long i = ci - h; i <= ci + h; ++i) s += std::norm(f(std::size_t(i), std::size_t(j)));
  }
  return s * f.grid().pixel_area();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("detector side snapping") {
  CHECK(snapped_side_pixels(10e-6, 10e-6, 256) == 1);
  CHECK(snapped_side_pixels(20e-6, 10e-6, 256) == 3);
  CHECK(snapped_side_pixels(30e-6, 10e-6, 256) == 3);
  CHECK(snapped_side_pixels(40e-6, 10e-6, 256) == 5);
  CHECK(snapped_side_pixels(2.56e-3, 10e-6, 256) == 256);
  CHECK_THROWS_AS(snapped_side_pixels(5e-6, 10e-6, 256), ValidationError);
  CHECK_THROWS_AS(snapped_side_pixels(0.0, 10e-6, 256), ValidationError);
}

TEST_CASE("detector windows") {
  const auto g = grid128();
  PointDetectorSpec spec{30e-6, {-100e-6, 0.0, 100e-6}, 20e-6};
  const auto w = detector_windows(g, spec);
  REQUIRE(w.size() == 3);
  CHECK(w[1] == PixelWindow{63, 65, 65, 67});
  CHECK(w[0].col0 == 53);
  CHECK(w[2].col1 == 75);
  CHECK(w[0].pixels() == 9);
  spec.scan_positions = {0.64e-3};
  CHECK_THROWS_AS(detector_windows(g, spec), ValidationError);
}

TEST_CASE("point and bucket reads match pixel sums") {
  const auto g = grid128();
  const auto f = generate_speckle(g, SpeckleSpec{}, 2, 5);
  PointDetectorSpec spec{50e-6, {-200e-6, 70e-6}, -30e-6};
  CHECK(rel(point_read(f, spec, 0), window_oracle(f, 44, 61, 2)) < 1e-12);
  CHECK(rel(point_read(f, spec, 1), window_oracle(f, 71, 61, 2)) < 1e-12);
  CHECK_THROWS_AS(point_read(f, spec, 2), ValidationError);
  CHECK(rel(bucket_read(f), f.total_power()) < 1e-12);
}

TEST_CASE("equal arms give identical copies and reads") {
  const auto g = grid128();
  const auto src = generate_speckle(g, SpeckleSpec{}, 0, 9);
  const auto arm = OpticalChain::free_space(0.1);
  const auto open = make_uniform_mask(g, 1.0);
  PointDetectorSpec spec{10e-6, {0.0}, 0.0};
  Apparatus app(g, {arm, arm}, {open}, {spec}, {{0, 0, 1, 0}});
  auto ws = app.make_workspace(true);
  std::vector<RealizationRecord> rec;
  app.measure(src, 0, ws, rec);
  const auto& a = ws.arm_field(0);
  const auto& b = ws.arm_field(1);
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  CHECK(diff == 0.0);
}

TEST_CASE("apparatus agrees with the direct optics pipeline") {
  const auto g = grid128();
  const SpeckleSource source(g, SpeckleSpec{});
  const double z_obj = 0.08, z_ref = 0.12;
  const auto mask = make_two_hole_mask(g, -150e-6, 150e-6, 10e-6);
  PointDetectorSpec spec{10e-6, {-300e-6, -150e-6, 0.0, 150e-6}, 0.0};
  Apparatus app(g, {OpticalChain::free_space(z_obj), OpticalChain::free_space(z_ref)}, {mask}, {spec},
                {{0, 0, 1, 0}});
  for (bool full : {false, true}) {
    auto ws = app.make_workspace(full);
    std::vector<RealizationRecord> rec;
    for (std::uint64_t r = 0; r < 3; ++r) {
      app.measure(source, r, 17, ws, rec);
      const auto field = source.generate(r, 17);
      const auto obj = apply_mask(propagate(field, {z_obj}), mask);
      const auto ref = propagate(field, {z_ref});
      REQUIRE(rec.size() == 1);
      CHECK(rec[0].realization_index == r);
      CHECK(rel(rec[0].bucket, bucket_read(obj)) < 1e-9);
      REQUIRE(rec[0].point_readings.size() == spec.scan_positions.size());
      for (std::size_t p = 0; p < spec.scan_positions.size(); ++p) {
        CHECK(rel(rec[0].point_readings[p], point_read(ref, spec, p)) < 1e-9);
      }
    }
  }
}

TEST_CASE("measure_realization with a lens arm") {
  const auto g = grid128();
  const auto src = generate_speckle(g, SpeckleSpec{}, 4, 3);
  const LensSpec lens{0.05, 0.8e-3};
  const auto ref_arm = OpticalChain::imaging(0.0, 0.1, lens, 0.1);
  const auto mask = make_uniform_mask(g, 1.0);
  PointDetectorSpec spec{10e-6, {-50e-6, 0.0, 50e-6}, 10e-6};
  const auto rec = measure_realization(src, OpticalChain::free_space(0.0), ref_arm, mask, spec, 7);
  const auto ref = apply_chain(src, ref_arm);
  CHECK(rec.realization_index == 7);
  CHECK(rel(rec.bucket, bucket_read(src)) < 1e-12);
  for (std::size_t p = 0; p < 3; ++p) CHECK(rel(rec.point_readings[p], point_read(ref, spec, p)) < 1e-9);
}

TEST_CASE("apparatus validation") {
  const auto g = grid128();
  CHECK_THROWS_AS(Apparatus(g, {OpticalChain{}}, {make_uniform_mask(g, 1.0)}, {}, {}), ValidationError);
  const PointDetectorSpec spec{10e-6, {0.0}, 0.0};
  CHECK_THROWS_AS(Apparatus(g, {OpticalChain{}}, {make_uniform_mask(g, 1.0)}, {spec}, {{0, 0, 1, 0}}),
                  ValidationError);
  const auto other = make_grid(64, 64, 10e-6, 10e-6, 532e-9);
  CHECK_THROWS_AS(Apparatus(g, {OpticalChain{}}, {make_uniform_mask(other, 1.0)}, {spec}, {{0, 0, 0, 0}}),
                  ValidationError);
}
