#include <doctest.h>

#include "revdetect/costmodel.hpp"
#include "revdetect/error.hpp"

using namespace revdetect;

TEST_CASE("default inputs reproduce the reported generation cost") {
  auto c = cost_estimate({});
  const double tc = (0.01 * 188 / 1000 + 0.03 * 157 / 1000) * 11000;
  CHECK(c.text_cost == doctest::Approx(tc));
  CHECK(c.text_cost == doctest::Approx(72.49));
  CHECK(std::abs(c.text_cost - 72) <= 1.0);
  CHECK(c.image_cost == 176.0);
  CHECK(c.total == doctest::Approx(tc + 176.0));
  CHECK(std::abs(c.total - 248) <= 1.0);
  CHECK(c.text_cost_per_review == doctest::Approx(0.00654).epsilon(0.01));
  CHECK(c.text_cost_per_review == doctest::Approx(tc / 11000));
}

TEST_CASE("zero reviews cost nothing") {
  CostInputs in;
  in.reviews = 0;
  auto c = cost_estimate(in);
  CHECK(c.text_cost == 0);
  CHECK(c.image_cost == 0);
  CHECK(c.total == 0);
  CHECK(c.text_cost_per_review == 0);
}

TEST_CASE("costs are linear in the review count") {
  for (double m : {1.0, 7.0, 11000.0, 123457.0}) {
    CostInputs a, b;
    a.reviews = m;
    b.reviews = 2 * m;
    auto ca = cost_estimate(a), cb = cost_estimate(b);
    CHECK(cb.text_cost == 2 * ca.text_cost);
    CHECK(cb.image_cost == 2 * ca.image_cost);
    CHECK(cb.total == 2 * ca.total);
  }
}

TEST_CASE("negative inputs are rejected") {
  CostInputs in;
  in.price_per_image = -1;
  CHECK_THROWS_AS(cost_estimate(in), Error);
}
