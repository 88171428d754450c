#pragma once

namespace psmdid::stats {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation with
// relative accuracy around 1e-14 for moderate parameters.
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with df degrees of freedom (df > 0).
double student_t_cdf(double t, double df);

// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

double logistic(double x);
double logit(double p);

}  // namespace psmdid::stats
