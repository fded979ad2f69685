#pragma once

namespace bfbayes {

// log Gamma(x) for x > 0.
double log_gamma(double x);

// psi(x) = d/dx log Gamma(x) for x > 0.
double digamma(double x);

// psi'(x) for x > 0.
double trigamma(double x);

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double inc_beta(double a, double b, double x);

// Upper tail P(T > t) of Student's t with (possibly fractional) df > 0.
double student_t_sf(double t, double df);

// log density of InverseGamma(alpha, beta) at x > 0:
//   f(x) = beta^alpha / Gamma(alpha) * x^(-alpha - 1) * exp(-beta / x)
double log_pdf_inverse_gamma(double x, double alpha, double beta);

}  // namespace bfbayes
