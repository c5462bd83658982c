#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sliphom/geometry.hpp"
#include "sliphom/rng.hpp"

using namespace sliphom;

TEST_CASE("slip system derives the normal by a quarter turn") {
  const SlipSystem e1({1.0, 0.0});
  CHECK(e1.m().x == doctest::Approx(0.0));
  CHECK(e1.m().y == doctest::Approx(1.0));
  const SlipSystem diag({1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)});
  CHECK(diag.s().dot(diag.m()) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(diag.m().norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(SlipSystem({1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("shear interval per slip direction") {
  SUBCASE("slip along e2 pins the shear at zero") {
    const Interval K = shear_interval(SlipSystem({0.0, 1.0}), 0.5);
    CHECK(K.is_point());
    CHECK(K.lo == 0.0);
    const Interval Km = shear_interval(SlipSystem({0.0, -1.0}), 0.3);
    CHECK(Km.is_point());
  }
  SUBCASE("slip along e1 leaves the shear free") {
    const Interval K = shear_interval(SlipSystem({1.0, 0.0}), 0.5);
    CHECK(std::isinf(K.lo));
    CHECK(std::isinf(K.hi));
    const Interval Km = shear_interval(SlipSystem({-1.0, 0.0}), 0.7);
    CHECK(std::isinf(Km.hi));
  }
  SUBCASE("oblique slip gives the closed interval to -2 lambda s1/s2") {
    const double r = 1.0 / std::sqrt(2.0);
    const Interval K = shear_interval(SlipSystem({r, -r}), 0.5);
    CHECK(K.lo == doctest::Approx(0.0));
    CHECK(K.hi == doctest::Approx(1.0));  // -2*0.5*(r/-r) = 1
    const Interval Kp = shear_interval(SlipSystem({r, r}), 0.5);
    CHECK(Kp.lo == doctest::Approx(-1.0));
    CHECK(Kp.hi == doctest::Approx(0.0));
  }
}

TEST_CASE("soft mask resolves the laminate exactly") {
  SUBCASE("one period, half soft") {
    const auto mask = soft_mask(Microstructure(0.5, 1), Grid1D(4));
    REQUIRE(mask.size() == 4);
    CHECK(mask[0]);
    CHECK(mask[1]);
    CHECK(!mask[2]);
    CHECK(!mask[3]);
  }
  SUBCASE("two periods of four cells") {
    const auto mask = soft_mask(Microstructure(0.5, 2), Grid1D(8));
    int count = 0;
    for (bool b : mask) count += b;
    CHECK(count == 4);
    for (int i = 0; i < 4; ++i) CHECK(mask[i] == mask[i + 4]);
  }
  SUBCASE("quarter fraction, one soft cell per period") {
    const auto mask = soft_mask(Microstructure(0.25, 4), Grid1D(16));
    int count = 0;
    for (bool b : mask) count += b;
    CHECK(count == 4);
    for (int p = 0; p < 4; ++p) {
      CHECK(mask[4 * p]);
      CHECK(!mask[4 * p + 1]);
    }
  }
  SUBCASE("misalignment is rejected") {
    CHECK_THROWS_AS(soft_mask(Microstructure(0.5, 3), Grid1D(8)), std::invalid_argument);
    CHECK_THROWS_AS(soft_mask(Microstructure(0.3, 2), Grid1D(8)), std::invalid_argument);
  }
}

TEST_CASE("slip-compatible deformations satisfy the pointwise constraints") {
  CHECK(in_Ms(Mat2::identity(), SlipSystem({0.6, 0.8}), 1e-12));
  CHECK_FALSE(in_Ms(Mat2{2, 0, 0, 2}, SlipSystem({1.0, 0.0}), 1e-9));
  Rng rng(42);
  for (int it = 0; it < 200; ++it) {
    const double phi = rng.uniform(0.0, 6.2831853);
    const SlipSystem sl({std::cos(phi), std::sin(phi)});
    const double gamma = rng.uniform(-3.0, 3.0);
    const Mat2 S{1.0 + gamma * sl.s().x * sl.m().x, gamma * sl.s().x * sl.m().y,
                 gamma * sl.s().y * sl.m().x, 1.0 + gamma * sl.s().y * sl.m().y};
    const Mat2 F = rotation(rng.uniform(0.0, 6.2831853)) * S;
    CHECK(in_Ms(F, sl, 1e-9));
  }
}

TEST_CASE("2d grid quadrature weights sum to the area") {
  const Grid2D grid(3, 5);
  double area = 0.0;
  for (int i = 0; i < grid.n_gauss(); ++i) area += grid.weight();
  CHECK(std::abs(area - 4.0) <= 1e-13);
}
