#pragma once
// Distribution tails for the ANOVA and correlation tests, computed
// in-house so the metrics engine has no external stats dependency.

namespace silicon {

// Regularized incomplete beta I_x(a, b), a > 0, b > 0, x in [0, 1].
// Continued-fraction evaluation, absolute accuracy well below 1e-10.
double ibeta(double a, double b, double x);

// Upper tail P(F > f) for an F distribution with (df1, df2) degrees of
// freedom.
double f_upper_tail(double f, double df1, double df2);

// Two-sided p-value for a Student-t statistic with df degrees of freedom.
double t_two_sided(double t, double df);

}  // namespace silicon
