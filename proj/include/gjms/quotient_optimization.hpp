#pragma once

#include <string>
#include <vector>

#include "gjms/euclidean_bubbles.hpp"
#include "gjms/spherical_analysis.hpp"

namespace gjms {

struct QuotientReport {
    double lambda = 0.0;
    double energy = 0.0;
    double l2_mass = 0.0;
    double crit_norm = 0.0;  // (integral of |u|^{2*})^{2/2*}
    double quotient = 0.0;
    std::string trial_descriptor;

    double numerator() const { return energy - lambda * l2_mass; }
};

/// Re-evaluates a report at another lambda (the trial is unchanged).
QuotientReport at_lambda(const QuotientReport& r, double lambda);

/// kind must be GJMS or INTERTWINED. The GJMS energy is the intertwined energy plus the remainder form.
QuotientReport sobolev_quotient(MultiplierKind kind, const Params& p, double lambda, const RadialFunction& u);

/// Lift of eta U_eps; the intertwined energy is taken from the Euclidean side.
QuotientReport bubble_quotient(MultiplierKind kind, const Params& p, double lambda, const BubbleParams& bp);

/// E(U) / M_inf^{(n-2s)/n}.
double sharp_constant_estimate(const Params& p);

/// Sharp constant with the frequency cut-off of E(U) made explicit, and the induced error bar.
EnergyEstimate sharp_constant_with_error(const Params& p, double rho_cut = 50.0);

enum class FamilyKind { BUBBLE, SPLINE };

struct TrialFamily {
    FamilyKind kind = FamilyKind::BUBBLE;
    // BUBBLE box; delta >= min_ratio * eps keeps the bubble inside its core
    double eps_min = 0.01, eps_max = 0.5;
    double delta_min = 0.02, delta_max = 0.249;
    double min_ratio = 1.0;
    double eps_start = 0.1, delta_start = 0.2;
    // SPLINE: Gaussian knots on [0, R], optionally times the ground spherical function
    int knots = 12;
    double width = 8.0;
    bool envelope = false;
    std::vector<double> coeff_start;  // empty: concentrated start
    int max_evaluations = 500;
    double tolerance = 1e-5;
};

TrialFamily bubble_family();
/// SPLINE family; its Nelder-Mead budget is larger than the bubble default.
TrialFamily spline_family(double width = 8.0, bool envelope = false, int knots = 12);

FamilyKind parse_family_kind(const std::string& name);
std::string to_string(FamilyKind kind);

struct MinimizeTrace {
    int evaluations = 0;
    std::vector<double> best_values;  // best quotient after each line search or simplex iteration
    std::vector<double> best_point;   // (eps, delta) or spline coefficients
};

/// Deterministic derivative-free minimisation; throws BudgetExceeded past the evaluation cap.
QuotientReport minimize_quotient(MultiplierKind kind, const Params& p, double lambda, const TrialFamily& family,
                                 MinimizeTrace* trace = nullptr);

class SplineModel;

/// Nelder-Mead over a prebuilt spline model; family supplies the start, budget and tolerance.
QuotientReport minimize_quotient(MultiplierKind kind, double lambda, const SplineModel& model,
                                 const TrialFamily& family, MinimizeTrace* trace = nullptr);

/// One minimised report per lambda. Each entry is warm-started from the previous optimum,
/// which is also re-evaluated, so the table is non-increasing in lambda.
std::vector<QuotientReport> gap_scan(MultiplierKind kind, const Params& p, const std::vector<double>& lambda_grid,
                                     const TrialFamily& family);

/// Spline trial space with precomputed spectral and mass matrices.
class SplineModel {
public:
    SplineModel(const Params& p, int knots, double width, bool envelope);

    QuotientReport evaluate(MultiplierKind kind, double lambda, const std::vector<double>& coeff) const;
    RadialFunction profile(const std::vector<double>& coeff) const;
    int size() const { return knots_; }
    const Params& params() const { return p_; }
    std::string descriptor(const std::vector<double>& coeff) const;

private:
    Params p_;
    int knots_;
    double width_;
    bool envelope_;
    RadialGrid grid_;
    std::vector<std::vector<double>> basis_;  // basis_[k][i] on grid_
    std::vector<double> intertwined_, remainder_, gram_;  // knots x knots, row major
    std::vector<double> volume_;                           // quadrature weight times sinh^{n-1}
};

struct BlowdownRow {
    int N = 0;
    double R_N = 0.0;
    double bound = 0.0;
    double scaled_bound = 0.0;
};

/// Q(u_N) <= -N q + 2 C N^2 exp(-alpha R_N) with R_N = (2/alpha) log N + R0, scaled by N^{2/2*} crit_norm.
std::vector<BlowdownRow> multibump_blowdown(const Params& p, double lambda, double q, double C, double alpha,
                                            double R0, const std::vector<int>& N_values, double crit_norm = 1.0);

/// R0 with 2 C exp(-alpha R0) = q / 4.
double blowdown_radius(double q, double C, double alpha);

struct BlowdownCalibration {
    double q = 0.0;      // -quotient of the widest-needed trial (crit_norm 1)
    double C = 0.0;      // |k(r)| <= C exp(-alpha r) on the calibration radii
    double alpha = 0.0;  // 0.9 times the fitted kernel decay rate
    double R0 = 0.0;
    double trial_width = 0.0;
};

/// Measures q on Phi_0 cos^2(pi r / 2R) with R doubling from 8, and calibrates C, alpha
/// from the kernel at r = 2..6. Requires lambda above the spectral bottom.
BlowdownCalibration calibrate_blowdown(MultiplierKind kind, const Params& p, double lambda);

}  // namespace gjms
