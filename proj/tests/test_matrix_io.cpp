#include <doctest.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>

#include "elliptic/error.hpp"
#include "elliptic/matrix_io.hpp"
#include "support.hpp"

using namespace elliptic;

namespace {

bool same_bits(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  if (a.dim() != b.dim()) return false;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (std::bit_cast<std::uint64_t>(a(i, j)) != std::bit_cast<std::uint64_t>(b(i, j))) return false;
  return true;
}

}  // namespace

TEST_CASE("text format layout") {
  const auto x = SymmetricMatrix::from_rows({{1.5, -2.0}, {-2.0, 0.1}});
  CHECK(to_text(x) == "2\n1.5 -2\n-2 0.1\n");
  CHECK(parse_text("2\n1.5 -2\n\n-2 0.1\n") == x);
}

TEST_CASE("text and JSON round trips are bit-exact") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> mag(-300.0, 300.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 6;
    auto x = random_sym(rng, n, 1.0);
    x = std::pow(10.0, mag(rng) / 10.0) * x;
    CHECK(same_bits(parse_text(to_text(x)), x));
    CHECK(same_bits(symmetric_from_json(nlohmann::json::parse(to_json(x).dump())), x));
    CHECK(same_bits(parse_matrix(to_json(x).dump()), x));
  }
}

TEST_CASE("decimal strings with up to 17 significant digits re-parse exactly") {
  for (const char* s : {"0.1", "-2.5e-300", "1.2345678901234567", "9007199254740993", "3"}) {
    const double v = parse_double(s);
    CHECK(parse_double(format_double(v)) == v);
  }
}

TEST_CASE("malformed text is rejected") {
  for (const char* bad : {"", "2\n1 2\n", "2\n1 2 3\n2 1\n", "x\n", "1\n1 2\n", "2\n1 a\nb 1\n", "2\n1 5\n0 1\n"}) {
    CHECK_THROWS_AS(parse_text(bad), Error);
  }
  CHECK_THROWS_AS(symmetric_from_json(nlohmann::json::parse(R"({"dim": 3, "rows": [[1,0],[0,1]]})")), Error);
  CHECK_THROWS_AS(symmetric_from_json(nlohmann::json::parse(R"({"rows": [[1,2],[3,4]]})")), Error);
}

TEST_CASE("matrix files in either format") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto x = SymmetricMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}});
  const auto txt = dir / "elliptic_io_test.txt";
  const auto js = dir / "elliptic_io_test.json";
  std::ofstream(txt) << to_text(x);
  std::ofstream(js) << to_json(x).dump();
  CHECK(read_matrix_file(txt) == x);
  CHECK(read_matrix_file(js) == x);
  std::filesystem::remove(txt);
  std::filesystem::remove(js);
  CHECK_THROWS_AS(read_matrix_file(dir / "elliptic_io_missing.txt"), Error);
}
