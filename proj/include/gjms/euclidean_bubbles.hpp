#pragma once

#include <vector>

#include "gjms/hyperbolic_geometry.hpp"
#include "gjms/spherical_analysis.hpp"

namespace gjms {

/// Scale eps in (0, 1) and cut-off radius delta in (0, 1/4).
struct BubbleParams {
    double eps = 0.1;
    double delta = 0.2;
};

void validate(const BubbleParams& bp);

/// U_eps(r) = eps^{-(n-2s)/2} (1 + (r/eps)^2)^{-(n-2s)/2}.
double bubble(const Params& p, const BubbleParams& bp, double r);

/// Radial derivative of U_eps of order 0, 1 or 2.
double bubble_derivative(const Params& p, const BubbleParams& bp, double r, int order);

/// Flat mollifier: 1 on [0, delta], 0 beyond 2 delta, exactly 1/2 at 3 delta / 2.
double cutoff(double delta, double r);

/// Euclidean samples of eta U_eps on [0, 2 delta].
RadialFunction cut_bubble(const Params& p, const BubbleParams& bp);

/// Limit of the critical mass, integral of (1 + |y|^2)^{-n} over R^n.
double crit_mass_limit(int n);

double crit_mass(const Params& p, const BubbleParams& bp);

/// Critical mass of U_eps without cut-off.
double crit_mass_uncut(const Params& p, double eps);

/// Integral of |u_eps|^2 dV for the lift of eta U_eps.
double hyperbolic_l2_mass(const Params& p, const BubbleParams& bp);

/// w^(rho) = integral of w(r) r^{n-1} J_nu(r rho) (r rho)^{-nu} dr, nu = (n-2)/2.
SpectralProfile radial_fourier(const RadialFunction& w, int n, const RadialGrid& rho_grid);

struct EuclideanTolerances {
    double tail_fraction = 1e-10;  // last-decade share of rho^{2s+n-1} |w^|^2
    double rho_start = 20.0;
    double rho_cap = 640.0;
    double bubble_rho_cut = 50.0;  // frequency cut-off for the untruncated bubble
};

const EuclideanTolerances& euclidean_tolerances();

/// Transform on an automatically chosen range, judged against the weight rho^{2 s}.
SpectralProfile radial_fourier_auto(const RadialFunction& w, int n, double s);

double fractional_energy(const RadialFunction& w, const Params& p);

/// Fourier transform of U = (1 + r^2)^{-(n-2s)/2} by Gamma subordination.
double bubble_fourier(const Params& p, double rho);

struct EnergyEstimate {
    double value = 0.0;
    double tail_bound = 0.0;
};

/// ||(-Delta)^{s/2} U||^2 integrated up to rho_cut, with a bound for the rest.
EnergyEstimate bubble_energy(const Params& p, double rho_cut = 50.0);

/// Energy of eta U_eps, computed in the scale-free variable y = r / eps.
double cut_bubble_energy(const Params& p, const BubbleParams& bp);

/// |E(eta U_eps) - E(U_eps) - E((eta - 1) U_eps)|.
double cross_term(const Params& p, const BubbleParams& bp);

struct RateFit {
    double slope = 0.0;         // least squares on log-log data
    double extrapolated = 0.0;  // local slopes extrapolated to eps = 0
    std::vector<double> local;  // slopes between consecutive ladder entries
    bool dropped_first = false;
};

/// Fits log|values| against log eps. Local slopes are extrapolated linearly in eps^q.
RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& values, double q);

struct LadderResult {
    std::vector<double> eps;
    std::vector<double> values;
    std::vector<double> differences;
    RateFit fit;
};

LadderResult crit_mass_ladder(const Params& p, double delta, const std::vector<double>& ladder);
LadderResult l2_mass_ladder(const Params& p, double delta, const std::vector<double>& ladder);
LadderResult energy_ladder(const Params& p, double delta, const std::vector<double>& ladder);

/// Extrapolated slope of log|E(eta U_eps) - E(U)| against log eps.
double energy_asymptotics_experiment(const Params& p, double delta, const std::vector<double>& eps_ladder);

/// Increments of mass / eps^{2s} per unit of |log eps| along the ladder (the n = 4s regime).
std::vector<double> log_regime_increments(const LadderResult& l2, double s);

/// sup over delta <= r < 1 of |d^order U_eps|, divided by eps^{(n-2s)/2}, for each ladder entry.
std::vector<double> derivative_bound_check(const Params& p, double delta, const std::vector<double>& eps_ladder,
                                           int order);

}  // namespace gjms
