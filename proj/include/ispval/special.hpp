#pragma once

namespace ispval {

// Standard normal cdf and survival function via erfc; absolute error a few ulp.
double normal_cdf(double x);
double normal_sf(double x);

// Inverse standard normal cdf. Rational initial guess refined with Halley
// steps against the erfc-based cdf; absolute error below 1e-13 on (0,1).
double normal_quantile(double p);

double log_normal_pdf(double x, double mu, double sigma);

// Regularized incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
double regularized_gamma_q(double a, double x);

// Survival function of the chi-square distribution with k degrees of freedom.
double chi_square_sf(double x, double k);

// log of the binomial coefficient; 0 <= k <= n expected.
double lchoose(double n, double k);

}  // namespace ispval
