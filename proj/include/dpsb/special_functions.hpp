#pragma once

namespace dpsb {

// log K_p(z), modified Bessel function of the second kind, real order p, z > 0.
// Computed in log space so it stays finite where K_p itself under/overflows.
double log_bessel_k(double p, double z);

// Standard normal CDF.
double normal_cdf(double x);

// log(cosh(x)) without overflow.
double log_cosh(double x);

}  // namespace dpsb
