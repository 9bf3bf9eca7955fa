#pragma once

namespace revdetect {

/// Generation cost inputs. Token prices are per 1,000 tokens.
struct CostInputs {
  double input_tokens = 188;   // mean prompt tokens per review
  double output_tokens = 157;  // mean completion tokens per review
  double reviews = 11000;
  double price_in_per_1k = 0.01;
  double price_out_per_1k = 0.03;
  double price_per_image = 0.016;
};

struct CostBreakdown {
  double text_cost = 0;
  double image_cost = 0;
  double total = 0;
  double text_cost_per_review = 0;
};

/// Throws Error on negative or non-finite inputs.
CostBreakdown cost_estimate(const CostInputs& in);

}  // namespace revdetect
