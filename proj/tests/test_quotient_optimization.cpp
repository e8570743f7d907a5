#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gjms/quotient_optimization.hpp"

using namespace gjms;
using std::numbers::pi;

namespace {

// smooth bump of radius R, times a polynomial shape factor
RadialFunction bump(double R, double a = 0.0) {
    auto f = [=](double r) {
        double t = r / R;
        if (t >= 1.0) return 0.0;
        return (1.0 + a * t * t) * std::exp(-1.0 / (1.0 - t * t));
    };
    return sample(make_grid(GridKind::HYPERBOLIC_GEODESIC, R, std::min(0.05, R / 20)), f, R, Space::HYPERBOLIC);
}

// a small box keeps the cut-off ratio delta / eps moderate
TrialFamily small_box() {
    TrialFamily fam = bubble_family();
    fam.eps_min = 0.02;
    fam.delta_max = 0.1;
    fam.delta_start = 0.1;
    fam.tolerance = 1e-4;
    return fam;
}

RadialFunction scaled(RadialFunction f, double c) {
    for (double& v : f.values) v *= c;
    return f;
}

}  // namespace

TEST_CASE("sharp constant estimate") {
    double S = sharp_constant_estimate({3, 1.0});
    CHECK(S == doctest::Approx(0.75 * pi * pi / std::cbrt(0.25 * pi * pi)).epsilon(1e-8));
    CHECK(S == doctest::Approx(5.4779).epsilon(1e-4));
    for (Params p : {Params{3, 1.0}, Params{5, 0.8}, Params{4, 0.75}}) {
        EnergyEstimate a = sharp_constant_with_error(p, 50.0), b = sharp_constant_with_error(p, 100.0);
        CHECK(std::abs(a.value - b.value) < 1e-4 * b.value);
        CHECK(a.tail_bound >= 0.0);
    }
}

TEST_CASE("quotient report invariant and errors") {
    Params p{3, 1.0};
    QuotientReport r = sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.3, bump(1.0));
    CHECK(r.crit_norm > 0.0);
    CHECK(r.quotient == doctest::Approx((r.energy - 0.3 * r.l2_mass) / r.crit_norm).epsilon(1e-15));
    CHECK_THROWS_AS(sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.0, scaled(bump(1.0), 0.0)), ZeroTrial);
    CHECK_THROWS_AS(sobolev_quotient(MultiplierKind::REMAINDER, p, 0.0, bump(1.0)), ParameterError);
    QuotientReport shifted = at_lambda(r, -1.0);
    CHECK(shifted.energy == r.energy);
    CHECK(shifted.quotient == doctest::Approx((r.energy + r.l2_mass) / r.crit_norm).epsilon(1e-15));
}

TEST_CASE("Sobolev floor on bumps") {
    for (Params p : {Params{3, 1.0}, Params{5, 0.8}}) {
        double S = sharp_constant_estimate(p);
        for (double R : {0.5, 1.0, 2.0, 4.0})
            for (double a : {0.0, 2.0}) {
                QuotientReport r = sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.0, bump(R, a));
                CHECK(r.quotient >= S * (1.0 - 1e-3));
            }
    }
}

TEST_CASE("homogeneity") {
    Params p{5, 0.8};
    for (auto kind : {MultiplierKind::INTERTWINED, MultiplierKind::GJMS}) {
        RadialFunction u = bump(1.2, 1.0);
        QuotientReport a = sobolev_quotient(kind, p, 0.2, u), b = sobolev_quotient(kind, p, 0.2, scaled(u, 7.0));
        CHECK(std::abs(a.quotient - b.quotient) <= 1e-12 * std::abs(a.quotient));
    }
}

TEST_CASE("integer order: GJMS and intertwined agree") {
    for (Params p : {Params{3, 1.0}, Params{5, 2.0}}) {
        RadialFunction u = bump(1.0, 0.5);
        QuotientReport a = sobolev_quotient(MultiplierKind::GJMS, p, 0.1, u);
        QuotientReport b = sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.1, u);
        CHECK(std::abs(a.quotient - b.quotient) <= 1e-8 * std::abs(b.quotient));
    }
}

TEST_CASE("decomposition: GJMS = intertwined + remainder / crit") {
    Params p{5, 0.8};
    for (double R : {0.5, 2.0}) {
        RadialFunction u = bump(R);
        QuotientReport g = sobolev_quotient(MultiplierKind::GJMS, p, 0.0, u);
        QuotientReport t = sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.0, u);
        double rem = quadratic_form(MultiplierKind::REMAINDER, p, 0.0, u);
        CHECK(std::abs(g.quotient - (t.quotient + rem / t.crit_norm)) <= 1e-8 * std::abs(g.quotient));
    }
    BubbleParams bp{0.05, 0.2};
    QuotientReport g = bubble_quotient(MultiplierKind::GJMS, p, 0.0, bp);
    QuotientReport t = bubble_quotient(MultiplierKind::INTERTWINED, p, 0.0, bp);
    double rem = quadratic_form(MultiplierKind::REMAINDER, p, 0.0, conformal_lift(cut_bubble(p, bp), p));
    CHECK(std::abs(g.quotient - (t.quotient + rem / t.crit_norm)) <= 1e-8 * std::abs(g.quotient));
}

TEST_CASE("lambda monotonicity for a fixed trial") {
    Params p{4, 0.75};
    RadialFunction u = bump(1.0);
    QuotientReport a = sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.0, u);
    double slope = -a.l2_mass / a.crit_norm;
    CHECK(slope < 0.0);
    for (double lambda : {-1.0, 0.1, 0.5}) {
        QuotientReport b = sobolev_quotient(MultiplierKind::INTERTWINED, p, lambda, u);
        CHECK(b.quotient == doctest::Approx(a.quotient + lambda * slope).epsilon(1e-12));
    }
}

TEST_CASE("bubble quotient matches the hyperbolic pipeline") {
    Params p{3, 1.0};
    BubbleParams bp{0.1, 0.2};
    QuotientReport e = bubble_quotient(MultiplierKind::INTERTWINED, p, 0.2, bp);
    QuotientReport h = sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.2, conformal_lift(cut_bubble(p, bp), p));
    CHECK(e.energy == doctest::Approx(h.energy).epsilon(1e-3));
    CHECK(e.l2_mass == doctest::Approx(h.l2_mass).epsilon(1e-6));
    CHECK(e.crit_norm == doctest::Approx(h.crit_norm).epsilon(1e-6));
    CHECK(e.trial_descriptor.rfind("BUBBLE(eps=0.1,delta=0.2", 0) == 0);
}

TEST_CASE("bubble quotient: positive lambda lowers, small eps approaches S") {
    Params p{5, 0.8};
    double S = sharp_constant_estimate(p);
    BubbleParams bp{0.02, 0.2};
    QuotientReport a = bubble_quotient(MultiplierKind::INTERTWINED, p, 0.0, bp);
    QuotientReport b = bubble_quotient(MultiplierKind::INTERTWINED, p, 0.1, bp);
    CHECK(b.quotient < a.quotient);
    CHECK(a.quotient >= S * (1.0 - 1e-6));
    std::vector<double> eps{0.08, 0.04, 0.02, 0.01}, excess;
    for (double e : eps) excess.push_back(bubble_quotient(MultiplierKind::INTERTWINED, p, 0.0, {e, 0.2}).quotient - S);
    RateFit fit = fit_rate(eps, excess, 2.0 * p.s);
    CHECK(std::abs(fit.extrapolated - (p.n - 2.0 * p.s)) <= 0.15 * (p.n - 2.0 * p.s));
}

TEST_CASE("bubble minimisation: floor, determinism, budget") {
    Params p{3, 1.0};
    double S = sharp_constant_estimate(p);
    TrialFamily fam = small_box();
    MinimizeTrace t1, t2;
    QuotientReport a = minimize_quotient(MultiplierKind::INTERTWINED, p, 0.0, fam, &t1);
    QuotientReport b = minimize_quotient(MultiplierKind::INTERTWINED, p, 0.0, fam, &t2);
    CHECK(a.quotient >= S * (1.0 - 2e-3));
    CHECK(a.quotient == b.quotient);
    CHECK(a.trial_descriptor == b.trial_descriptor);
    CHECK(t1.evaluations == t2.evaluations);
    CHECK(t1.evaluations <= fam.max_evaluations);
    for (std::size_t i = 1; i < t1.best_values.size(); ++i) CHECK(t1.best_values[i] <= t1.best_values[i - 1]);

    fam.max_evaluations = 5;
    CHECK_THROWS_AS(minimize_quotient(MultiplierKind::INTERTWINED, p, 0.0, fam), BudgetExceeded);
    TrialFamily bad = bubble_family();
    bad.delta_max = 0.3;
    CHECK_THROWS_AS(minimize_quotient(MultiplierKind::INTERTWINED, p, 0.0, bad), ParameterError);
}

TEST_CASE("spline model") {
    Params p{3, 1.0};
    SplineModel model(p, 6, 4.0, false);
    std::vector<double> c{1.0, 0.5, -0.2, 0.1, 0.0, 0.3};
    QuotientReport m = model.evaluate(MultiplierKind::INTERTWINED, 0.1, c);
    QuotientReport d = sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.1, model.profile(c));
    CHECK(m.energy == doctest::Approx(d.energy).epsilon(1e-6));
    CHECK(m.l2_mass == doctest::Approx(d.l2_mass).epsilon(1e-10));
    CHECK(m.crit_norm == doctest::Approx(d.crit_norm).epsilon(1e-10));
    std::vector<double> c7 = c;
    for (double& v : c7) v *= 7.0;
    CHECK(model.evaluate(MultiplierKind::INTERTWINED, 0.1, c7).quotient == doctest::Approx(m.quotient).epsilon(1e-12));
    CHECK(model.descriptor(c).rfind("SPLINE(m=6,R=4.0,envelope=0", 0) == 0);
    CHECK_THROWS_AS(model.evaluate(MultiplierKind::INTERTWINED, 0.0, std::vector<double>(6, 0.0)), ZeroTrial);
}

TEST_CASE("spline minimisation at the spectral bottom") {
    Params p{3, 1.0};
    double bottom = spectral_bottom(MultiplierKind::INTERTWINED, p);
    TrialFamily fam = spline_family(20.0, true, 6);
    QuotientReport at = minimize_quotient(MultiplierKind::INTERTWINED, p, bottom, fam);
    CHECK(at.numerator() >= -1e-6 * at.energy);
    QuotientReport above = minimize_quotient(MultiplierKind::INTERTWINED, p, 1.05 * bottom, fam);
    CHECK(above.numerator() < 0.0);
    CHECK(above.quotient < 0.0);
}

TEST_CASE("gap scan is non-increasing") {
    Params p{3, 1.0};
    TrialFamily fam = small_box();
    std::vector<double> grid{0.2, -0.5, 0.0};
    std::vector<QuotientReport> rows = gap_scan(MultiplierKind::INTERTWINED, p, grid, fam);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(rows[i].lambda == grid[i]);
    CHECK(rows[1].quotient >= rows[2].quotient - 1e-6);
    CHECK(rows[2].quotient >= rows[0].quotient - 1e-6);
    CHECK_THROWS_AS(gap_scan(MultiplierKind::INTERTWINED, p, {}, fam), ParameterError);
}

TEST_CASE("family parsing") {
    CHECK(parse_family_kind("BUBBLE") == FamilyKind::BUBBLE);
    CHECK(parse_family_kind("spline") == FamilyKind::SPLINE);
    CHECK(to_string(FamilyKind::SPLINE) == "spline");
    CHECK_THROWS_AS(parse_family_kind("cubic"), ParameterError);
}

TEST_CASE("multi-bump blow-down bound") {
    Params p{3, 1.0};
    double q = 0.5, C = 2.0, alpha = 0.9;
    double R0 = blowdown_radius(q, C, alpha);
    CHECK(2.0 * C * std::exp(-alpha * R0) == doctest::Approx(q / 4).epsilon(1e-12));
    std::vector<BlowdownRow> rows = multibump_blowdown(p, 0.3, q, C, alpha, R0, {1, 4, 16, 64, 256});
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].bound <= -q / 2);
    CHECK(rows[0].R_N == doctest::Approx(R0));
    CHECK(rows[2].R_N == doctest::Approx(2.0 / alpha * std::log(16.0) + R0));
    std::vector<double> N, v;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        N.push_back(rows[i].N);
        v.push_back(-rows[i].scaled_bound);
    }
    for (double& x : N) x = std::log(x);
    double slope = log_slope(N, v);
    double target = 2.0 * p.s / p.n;
    CHECK(std::abs(slope - target) <= 0.1 * target);

    std::vector<BlowdownRow> doubled = multibump_blowdown(p, 0.3, 2 * q, C, alpha, R0, {1, 4, 16, 64, 256});
    for (std::size_t i = 0; i < rows.size(); ++i)
        CHECK(doubled[i].bound - rows[i].bound == doctest::Approx(-rows[i].N * q).epsilon(1e-12));
    CHECK_THROWS_AS(multibump_blowdown(p, 0.3, 0.0, C, alpha, R0, {1}), ParameterError);
    CHECK_THROWS_AS(blowdown_radius(-1.0, C, alpha), ParameterError);
}
