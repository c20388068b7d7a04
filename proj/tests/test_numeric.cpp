#include <cmath>

#include "doctest.h"
#include "mm1game/errors.hpp"
#include "mm1game/numeric.hpp"

using namespace mm1game::numeric;
using doctest::Approx;

TEST_CASE("golden section finds an interior maximum") {
  const auto m = golden_section_maximize([](double x) { return -(x - 1.3) * (x - 1.3) + 2.0; }, 0.0, 5.0);
  CHECK(m.x == Approx(1.3).epsilon(1e-8));
  CHECK(m.value == Approx(2.0));
}

TEST_CASE("golden section handles a maximum at the boundary") {
  const auto m = golden_section_maximize([](double x) { return x; }, 0.0, 3.0);
  CHECK(m.x == Approx(3.0).epsilon(1e-8));
}

TEST_CASE("bracket and refine picks the global peak of a bimodal function") {
  auto f = [](double x) { return std::exp(-(x - 1) * (x - 1) * 20) + 1.5 * std::exp(-(x - 4) * (x - 4) * 20); };
  const auto m = bracket_and_refine(f, 0.0, 5.0);
  CHECK(m.x == Approx(4.0).epsilon(1e-7));
  CHECK(m.value == Approx(1.5));
}

TEST_CASE("bracket and refine prefers the larger x on a flat top") {
  const auto m = bracket_and_refine([](double x) { return x < 2.0 ? x : 2.0; }, 0.0, 4.0, 101);
  CHECK(m.value == Approx(2.0));
  CHECK(m.x > 3.9);
}

TEST_CASE("bisection") {
  CHECK(bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0) == Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(bisect([](double x) { return 1.0 - x; }, 0.0, 3.0) == Approx(1.0));
  CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0), mm1game::InvalidArgument);
}
