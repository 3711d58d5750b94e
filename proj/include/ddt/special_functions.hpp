#pragma once

// Distribution functions backing the hypothesis tests.

namespace ddt::special {

double normal_cdf(double x);
/// Upper tail 1 - Phi(x), accurate far into the tail.
double normal_sf(double x);
/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_sf(double t, double df);
double student_t_cdf(double t, double df);

/// P(F > f) for the F distribution with (d1, d2) degrees of freedom.
double f_sf(double f, double d1, double d2);

/// Upper tail of the limiting Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

/// P(X >= k) for X ~ Binomial(n, 1/2).
double binomial_half_upper(long n, long k);

}  // namespace ddt::special
