#pragma once

// Small statistics toolbox for the test and acceptance harnesses: tail
// probabilities for z and chi-square statistics and a two-sample
// Kolmogorov-Smirnov test.

#include <vector>

namespace rwre::stats {

// P(Z > z) for a standard normal Z.
double normal_sf(double z);

// Upper tail P(X > x) for a chi-square variable with k degrees of freedom,
// via the regularized upper incomplete gamma function Q(k/2, x/2).
double chi2_sf(double x, int k);

// Regularized incomplete gamma functions (series / continued fraction).
double gamma_p(double a, double x);  // lower, P(a, x)
double gamma_q(double a, double x);  // upper, Q(a, x)

struct KsResult {
  double statistic = 0;  // sup-norm distance between empirical CDFs
  double p_value = 1;    // asymptotic two-sided p-value
};

// Two-sample KS test. Sorts copies of the inputs; ties are handled by
// advancing both sides through equal values before comparing CDFs.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson chi-square statistic for observed counts against expected counts
// (expected entries must be positive).
double chi2_statistic(const std::vector<double>& observed,
                      const std::vector<double>& expected);

}  // namespace rwre::stats
