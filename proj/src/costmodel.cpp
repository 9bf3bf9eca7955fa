#include "revdetect/costmodel.hpp"

#include <cmath>

#include "revdetect/error.hpp"

namespace revdetect {

CostBreakdown cost_estimate(const CostInputs& in) {
  for (double v : {in.input_tokens, in.output_tokens, in.reviews, in.price_in_per_1k,
                   in.price_out_per_1k, in.price_per_image})
    if (!(v >= 0) || !std::isfinite(v)) throw Error("cost inputs must be finite and non-negative");

  CostBreakdown c;
  const double per_review = (in.price_in_per_1k * in.input_tokens + in.price_out_per_1k * in.output_tokens) / 1000.0;
  c.text_cost = per_review * in.reviews;
  c.image_cost = in.price_per_image * in.reviews;
  c.total = c.text_cost + c.image_cost;
  c.text_cost_per_review = in.reviews > 0 ? c.text_cost / in.reviews : 0.0;
  return c;
}

}  // namespace revdetect
