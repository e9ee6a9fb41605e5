#pragma once

namespace unrestcast::inference {

/// Regularized incomplete beta I_x(a, b), evaluated with Lentz's continued
/// fraction on whichever side of the symmetry point converges fastest.
double regularized_beta(double x, double a, double b);

/// P(F <= x) for an F(d1, d2) variate.
double f_cdf(double x, double d1, double d2);

/// P(F > x), computed directly so small tail probabilities keep full precision.
double f_sf(double x, double d1, double d2);

}  // namespace unrestcast::inference
