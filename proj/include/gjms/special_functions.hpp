#pragma once

#include <complex>

#include "gjms/errors.hpp"

namespace gjms {

using Complex = std::complex<double>;

/// Tolerances shared by the special-function routines.
struct SpecialFunctionTolerances {
    double pole_distance = 1e-12;
    int hyp2f1_max_terms = 10000;
    double hyp2f1_term_tol = 1e-14;
    double bessel_asymptotic_x = 20.0;
};

const SpecialFunctionTolerances& special_function_tolerances();

/// Principal branch of log Gamma(z).
Complex log_gamma(Complex z);

/// |Gamma(a + i b)|^2.
double abs_gamma_sq(double a, double b);

/// 2F1(a, b; c; x) for x <= 0.
double hyp2f1(double a, double b, double c, double x);

/// Complex-parameter 2F1(a, b; c; x), x <= 0, c real.
Complex hyp2f1(Complex a, Complex b, double c, double x);

/// Associated Legendre function of the first kind P_nu^mu(z), z > 1.
Complex legendre_p(Complex nu, double mu, double z);

/// Bessel J of integer or half-integer order.
double bessel_j(double order, double x);

}  // namespace gjms
