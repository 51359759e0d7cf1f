#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "ghostsim/error.hpp"
#include "ghostsim/io.hpp"

using namespace ghostsim;

TEST_CASE("csv rendering") {
  DataTable t{"t.csv", {"a", "b"}, {{1.0, 0.1}, {std::numeric_limits<double>::quiet_NaN(), -2e-5}}};
  CHECK(to_csv(t) == "a,b\n1,0.1\nnan,-2e-05\n");
}

TEST_CASE("correlation table columns") {
  CorrelationMap m;
  m.positions = {-1e-5, 0.0};
  m.g2 = {1.0, 2.0};
  m.covariance = {0.0, 1.5};
  m.g2_stderr = {0.01, 0.02};
  const auto t = correlation_table(m);
  CHECK(t.filename == "correlation.csv");
  CHECK(t.columns == std::vector<std::string>{"x_m", "g2", "covariance", "stderr"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1] == std::vector<double>{0.0, 2.0, 1.5, 0.02});
}

TEST_CASE("P2 image scaling") {
  const double v[] = {0.0, 0.5, 1.0, -1.0};
  const auto pgm = to_pgm_p2(v, 2, 2);
  std::istringstream in(pgm);
  std::string magic;
  int w, h, maxval, a, b, c, d;
  in >> magic >> w >> h >> maxval >> a >> b >> c >> d;
  CHECK(magic == "P2");
  CHECK(w == 2);
  CHECK(h == 2);
  CHECK(maxval == 65535);
  CHECK(a == 0);
  CHECK(b == doctest::Approx(32767.5).epsilon(1e-4));
  CHECK(c == 65535);
  CHECK(d == 0);
  CHECK_THROWS_AS(to_pgm_p2(v, 3, 2), ValidationError);
}

TEST_CASE("P5 image is 16-bit big-endian") {
  IntensityMap m;
  m.grid = make_grid(2, 1, 1e-5, 1e-5, 5e-7);
  m.values = {2.0, 1.0};
  const auto pgm = to_pgm_p5(m);
  const std::string header = "P5\n2 1\n65535\n";
  REQUIRE(pgm.size() == header.size() + 4);
  CHECK(pgm.substr(0, header.size()) == header);
  auto px = [&](std::size_t k) {
    return (static_cast<unsigned char>(pgm[header.size() + 2 * k]) << 8) |
           static_cast<unsigned char>(pgm[header.size() + 2 * k + 1]);
  };
  CHECK(px(0) == 65535);
  CHECK(std::abs(px(1) - 32768) <= 1);
}

TEST_CASE("file writing") {
  const auto dir = std::filesystem::temp_directory_path() / "ghostsim_io_test";
  std::filesystem::remove_all(dir);
  ensure_directory(dir / "a" / "b");
  write_file(dir / "a" / "b" / "x.txt", "hello");
  std::ifstream in(dir / "a" / "b" / "x.txt");
  std::string s;
  in >> s;
  CHECK(s == "hello");
  write_file(dir / "plain", "x");
  CHECK_THROWS_AS(ensure_directory(dir / "plain" / "sub"), IoError);
  CHECK_THROWS_AS(write_file(dir / "plain" / "sub" / "y.txt", "x"), IoError);
  std::filesystem::remove_all(dir);
}
