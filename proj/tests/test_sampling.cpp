#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "lowrank/kernels.hpp"
#include "lowrank/sampling.hpp"

using namespace lowrank;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("uniform_grid endpoints, midpoint and symmetry") {
  const auto g = uniform_grid(-1.0, 1.0, 3);
  CHECK(g.points == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(g.domain_measure == 2.0);

  const auto g2 = uniform_grid(0.0, 1.0, 2);
  CHECK(g2.points == std::vector<double>{0.0, 1.0});

  const auto g1 = uniform_grid(2.0, 4.0, 1);
  CHECK(g1.points == std::vector<double>{3.0});

  CHECK_THROWS_AS(uniform_grid(1.0, 1.0, 3), contract_error);
  CHECK_THROWS_AS(uniform_grid(2.0, 1.0, 3), contract_error);

  // Symmetric domains must produce exactly mirrored points; greedy node
  // selection relies on this.
  const auto big = uniform_grid(-1.0, 1.0, 1001);
  for (std::size_t i = 0; i < big.size(); ++i)
    CHECK(big.points[i] == -big.points[big.size() - 1 - i]);
}

TEST_CASE("Grid validation") {
  CHECK_THROWS_AS(Grid({1.0, 1.0}, 1.0), contract_error);
  CHECK_THROWS_AS(Grid({2.0, 1.0}, 1.0), contract_error);
  CHECK_THROWS_AS(Grid({1.0, 2.0}, 0.0), contract_error);
  CHECK_THROWS_AS(Grid({}, 1.0), contract_error);
}

TEST_CASE("builtin families evaluate as documented") {
  const auto prod = builtin_family("product");
  CHECK(prod(2.0, 3.0) == 6.0);  // identity factors by default

  FamilyParams rk;
  rk.g_coeffs = {{0.0, 1.0}, {1.0}};  // x and 1
  rk.h_coeffs = {{0.0, 1.0}, {2.0}};  // y and 2
  const auto r2 = builtin_family("rank_k", rk);
  CHECK(r2(3.0, 4.0) == 3.0 * 4.0 + 2.0);

  FamilyParams cp;
  cp.c = 1.0;
  const auto cauchy = builtin_family("cauchy", cp);
  CHECK(cauchy(0.0, 0.0) == 1.0);
  CHECK(cauchy(1.0, 0.0) == 0.5);

  const auto analytic = builtin_family("analytic");
  CHECK(analytic(1.0, 1.0) == 0.5);

  const auto ea = builtin_family("exp_abs");
  CHECK(ea(0.3, 0.3) == 1.0);
  CHECK(ea(0.0, 1.0) == ea(1.0, 0.0));

  CHECK_THROWS_AS(builtin_family("nope"), contract_error);
  FamilyParams bad;
  bad.c = 0.0;
  CHECK_THROWS_AS(builtin_family("cauchy", bad), contract_error);
  FamilyParams badrk;
  badrk.g_coeffs = {{1.0}};
  CHECK_THROWS_AS(builtin_family("rank_k", badrk), contract_error);
}

TEST_CASE("materialize fills values and weight") {
  FamilyParams cp;
  cp.c = 1.0;
  const auto s = materialize(builtin_family("cauchy", cp), uniform_grid(0.0, 1.0, 2),
                             uniform_grid(0.0, 1.0, 2));
  CHECK(s.values(0, 0) == 1.0);
  CHECK(s.values(0, 1) == 0.5);
  CHECK(s.values(1, 0) == 0.5);
  CHECK(s.values(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s.weight == 0.5);  // |domain| / m = 1 / 2

  // 1/(x+y+0.5) blows up on a grid crossing x+y = -0.5; the error names the point.
  FamilyParams half;
  half.c = 0.5;
  const auto singular = builtin_family("cauchy", half);
  try {
    materialize(singular, uniform_grid(-1.0, 0.0, 3), uniform_grid(0.0, 1.0, 3));
    FAIL("expected numeric_error");
  } catch (const numeric_error& e) {
    CHECK(std::string(e.what()).find("x=") != std::string::npos);
  }
}

TEST_CASE("random_low_rank is seeded and has the requested rank") {
  const auto a = random_low_rank(9, 7, 3, 0.0, 42);
  const auto b = random_low_rank(9, 7, 3, 0.0, 42);
  CHECK(std::memcmp(a.values.data().data(), b.values.data().data(),
                    a.values.data().size() * sizeof(double)) == 0);
  const auto c = random_low_rank(9, 7, 3, 0.0, 43);
  CHECK(a.values(0, 0) != c.values(0, 0));

  const auto s = svd(a.values).singular_values;
  CHECK(s[2] > 1e-6 * s[0]);
  CHECK(s[3] <= 1e-12 * s[0]);

  CHECK_THROWS_AS(random_low_rank(3, 3, 5, 0.0, 1), contract_error);
}

TEST_CASE("CSV without headers gets unit grids") {
  const auto path = temp_path("lowrank_plain.csv");
  write_text(path, "1,2\n3,4\n");
  const auto s = read_matrix_csv(path);
  CHECK(s.values(0, 0) == 1.0);
  CHECK(s.values(0, 1) == 2.0);
  CHECK(s.values(1, 0) == 3.0);
  CHECK(s.values(1, 1) == 4.0);
  CHECK(s.grid_x.points == std::vector<double>{0.0, 1.0});
  CHECK(s.grid_y.points == std::vector<double>{0.0, 1.0});
  CHECK(s.weight == 0.5);
  std::remove(path.c_str());

  const auto single = temp_path("lowrank_single.csv");
  write_text(single, "42\n");
  const auto s1 = read_matrix_csv(single);
  CHECK(s1.values(0, 0) == 42.0);
  CHECK(s1.grid_x.points == std::vector<double>{0.5});
  CHECK(s1.weight == 1.0);
  std::remove(single.c_str());
}

TEST_CASE("CSV headers carry grids and measures") {
  const auto path = temp_path("lowrank_hdr.csv");
  write_text(path, "#y:0,1\n#x:0,2,4\n#measure:4,1\n1,2\n3,4\n5,6\n");
  const auto s = read_matrix_csv(path);
  CHECK(s.grid_x.points == std::vector<double>{0.0, 2.0, 4.0});
  CHECK(s.grid_y.points == std::vector<double>{0.0, 1.0});
  CHECK(s.grid_x.domain_measure == 4.0);
  CHECK(s.weight == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  std::remove(path.c_str());
}

TEST_CASE("CSV errors carry positions") {
  const auto ragged = temp_path("lowrank_ragged.csv");
  write_text(ragged, "1,2\n3\n");
  try {
    read_matrix_csv(ragged);
    FAIL("expected io_error");
  } catch (const io_error& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  std::remove(ragged.c_str());

  const auto bad = temp_path("lowrank_badcell.csv");
  write_text(bad, "1,x\n");
  try {
    read_matrix_csv(bad);
    FAIL("expected io_error");
  } catch (const io_error& e) {
    const std::string what = e.what();
    CHECK(what.find("row 1") != std::string::npos);
    CHECK(what.find("column 2") != std::string::npos);
  }
  std::remove(bad.c_str());

  CHECK_THROWS_AS(read_matrix_csv(temp_path("lowrank_missing_file.csv")), io_error);
}

TEST_CASE("CSV round-trip is bit exact on values and grids") {
  // Values chosen to stress shortest-form printing: non-terminating binary
  // fractions, denormals, negatives, exact integers.
  DenseMatrix vals(2, 3, {0.1, -1.0 / 3.0, 5e-324, 1.0, -2.5e298, 42.0});
  SnapshotMatrix s(std::move(vals), uniform_grid(-1.0, 1.0, 2), uniform_grid(0.0, 1.0, 3));
  const auto path = temp_path("lowrank_roundtrip.csv");
  write_matrix_csv(s, path);
  const auto back = read_matrix_csv(path);
  REQUIRE(back.values.rows() == 2);
  REQUIRE(back.values.cols() == 3);
  CHECK(std::memcmp(back.values.data().data(), s.values.data().data(),
                    6 * sizeof(double)) == 0);
  CHECK(back.grid_x.points == s.grid_x.points);
  CHECK(back.grid_y.points == s.grid_y.points);
  CHECK(back.grid_x.domain_measure == s.grid_x.domain_measure);
  CHECK(back.weight == s.weight);
  std::remove(path.c_str());
}

TEST_CASE("trivariate materialization") {
  TrivariateSource src{[](double x, double y, double z) { return x + 2.0 * y + 4.0 * z; },
                       "affine"};
  const auto g = uniform_grid(0.0, 1.0, 2);
  const auto t = materialize_trivariate(src, g, g, g);
  CHECK(t.values(0, 0, 0) == 0.0);
  CHECK(t.values(1, 0, 0) == 1.0);
  CHECK(t.values(0, 1, 0) == 2.0);
  CHECK(t.values(0, 0, 1) == 4.0);
  CHECK(t.values(1, 1, 1) == 7.0);
  CHECK(t.values.max_abs() == 7.0);
}
