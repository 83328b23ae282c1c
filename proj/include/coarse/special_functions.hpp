#pragma once

namespace coarse {

/// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
/// Continued-fraction evaluation (Lentz), accurate to ~1e-13.
double regularized_incomplete_beta(double a, double b, double x);

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a), a > 0, x >= 0.
double regularized_gamma_q(double a, double x);

/// Survival function of the chi-squared distribution with k > 0 dof.
double chi_squared_sf(double k, double x);

/// Two-sided p-value of a t statistic with the given degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace coarse
