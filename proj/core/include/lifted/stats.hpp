#ifndef LIFTED_STATS_HPP
#define LIFTED_STATS_HPP

namespace lifted {

// Regularised incomplete beta function I_x(a, b), continued-fraction form.
double regularized_incomplete_beta(double a, double b, double x);

// CDF of the F distribution with d1, d2 degrees of freedom.
double f_cdf(double x, int d1, int d2);

// Critical value of the F distribution: the (1 - alpha) quantile, found by
// bisection on the CDF to absolute tolerance 1e-6 or better.
double f_critical(double alpha, int d1, int d2);

}  // namespace lifted

#endif
