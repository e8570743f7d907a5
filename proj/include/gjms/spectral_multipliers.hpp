#pragma once

#include <string>

#include "gjms/errors.hpp"

namespace gjms {

/// Dimension n and order s. rho and the critical exponent are derived on demand.
struct Params {
    int n = 3;
    double s = 1.0;

    double rho() const { return 0.5 * (n - 1); }
    double crit_exponent() const { return 2.0 * n / (n - 2.0 * s); }
};

/// Throws ParameterError unless n >= 2 and 0 < s < n/2.
void validate(const Params& p);

enum class MultiplierKind { GJMS, INTERTWINED, REMAINDER };

std::string to_string(MultiplierKind kind);
MultiplierKind parse_multiplier_kind(const std::string& name);

/// sin(pi x) with exact zeros at the integers.
double sin_pi(double x);

/// True when s = 3/2 + 2k for some integer k >= 0.
bool is_exceptional_order(double s);

double multiplier(MultiplierKind kind, const Params& p, double beta);

/// |Gamma(s+1/2+i beta)|^2 / |Gamma(1/2+i beta)|^2 evaluated through log Gamma for every s.
double intertwined_gamma_ratio(double s, double beta);

double spectral_bottom(MultiplierKind kind, const Params& p);
double b_constant(double s);
double gap_constant(double s);
double integer_multiplier(int k, double beta);
double verify_decomposition(const Params& p, double beta_max, int count);

}  // namespace gjms
