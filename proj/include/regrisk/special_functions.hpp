#pragma once

namespace regrisk {

double normal_pdf(double x);
double normal_cdf(double x);
double log_normal_cdf(double x);

// phi(x) / Phi(x), accurate in the far left tail where both underflow.
double normal_hazard_left(double x);

}  // namespace regrisk
