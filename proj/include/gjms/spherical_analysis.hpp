#pragma once

#include <functional>
#include <vector>

#include "gjms/hyperbolic_geometry.hpp"
#include "gjms/spectral_multipliers.hpp"

namespace gjms {

/// Samples of a radial spherical (or Fourier) transform on [0, B_max].
struct SpectralProfile {
    RadialGrid beta_grid;
    std::vector<double> values;

    double beta_max() const { return beta_grid.radius(); }
};

struct SpectralTolerances {
    double r_min = 0.05;           // below this the origin series is used for Phi
    double tail_fraction = 1e-8;   // last-decade share of a squared spectral integrand
    double beta_start = 15.0;      // first frequency cutoff tried by the automatic transforms
    double beta_cap = 480.0;
    double kernel_gaussian_floor = 1e-16;
};

const SpectralTolerances& spectral_tolerances();

using Symbol = std::function<double(double)>;

double plancherel_density(int n, double beta);

/// Phi_beta(r), normalised by Phi_beta(0) = 1.
double spherical_function(int n, double beta, double r);

/// Phi_beta(r) through the hypergeometric (Legendre) representation, r > 0.
double spherical_function_legendre(int n, double beta, double r);

/// Phi_beta(r) through the Mehler (Abel) integral, r > 0.
double spherical_function_abel(int n, double beta, double r);

RadialGrid make_beta_grid(double beta_max, double panel_width);

SpectralProfile spherical_transform(const RadialFunction& f, int n, const RadialGrid& beta_grid);

/// Transform on an automatically chosen frequency range: the last decade of
/// weight(beta) |f^|^2 |c|^-2 must carry less than tail_fraction of the total.
SpectralProfile spherical_transform_auto(const RadialFunction& f, int n, const Symbol& weight);

RadialFunction inverse_spherical_transform(const SpectralProfile& F, int n, const RadialGrid& r_grid);

/// Integral over [0, B_max] of symbol(beta) |F|^2 |c|^-2.
double spectral_integral(const SpectralProfile& F, int n, const Symbol& symbol);

double quadratic_form(MultiplierKind kind, const Params& p, double lambda, const RadialFunction& f);
double quadratic_form(const Symbol& symbol, int n, double lambda, const RadialFunction& f);

double regularized_kernel(MultiplierKind kind, const Params& p, double r, double eps_reg);
double regularized_kernel(const Symbol& symbol, int n, double r, double eps_reg);

struct KernelExtrapolation {
    std::vector<double> eps;
    std::vector<double> values;
    double extrapolated = 0.0;
};

/// Kernel at eps in {0.02, 0.01, 0.005} with quadratic Richardson extrapolation to eps = 0.
KernelExtrapolation regularized_kernel_richardson(MultiplierKind kind, const Params& p, double r);

double decay_rate_fit(MultiplierKind kind, const Params& p, const std::vector<double>& r_values, double eps_reg);

/// Least-squares slope of log|values| against r.
double log_slope(const std::vector<double>& r_values, const std::vector<double>& values);

}  // namespace gjms
