#include "gjms/quotient_optimization.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>

#include "gjms/format.hpp"
#include "gjms/parallel.hpp"

namespace gjms {

namespace {

void check_kind(MultiplierKind kind) {
    if (kind == MultiplierKind::REMAINDER) throw ParameterError("quotients are defined for GJMS and INTERTWINED");
}

bool has_remainder(MultiplierKind kind, const Params& p) {
    return kind == MultiplierKind::GJMS && sin_pi(p.s) != 0.0;
}

QuotientReport make_report(double lambda, double energy, double l2, double crit, std::string descriptor) {
    if (!(crit > 0.0)) throw ZeroTrial("trial function vanishes");
    QuotientReport r;
    r.lambda = lambda;
    r.energy = energy;
    r.l2_mass = l2;
    r.crit_norm = crit;
    r.quotient = (energy - lambda * l2) / crit;
    r.trial_descriptor = std::move(descriptor);
    return r;
}

std::string bubble_descriptor(const BubbleParams& bp) {
    return "BUBBLE(eps=" + format_number(bp.eps) + ",delta=" + format_number(bp.delta) + ")";
}

std::uint64_t key_of(double x) {
    std::uint64_t k;
    std::memcpy(&k, &x, sizeof k);
    return k;
}

// Energies of bubble trials. The intertwined energy depends on delta / eps only.
struct BubbleCache {
    std::map<std::uint64_t, double> energy;
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> remainder;
};

QuotientReport bubble_report(MultiplierKind kind, const Params& p, double lambda, const BubbleParams& bp,
                             BubbleCache* cache) {
    check_kind(kind);
    validate(p);
    validate(bp);
    double ratio = bp.delta / bp.eps, E;
    auto it = cache ? cache->energy.find(key_of(ratio)) : decltype(cache->energy.end()){};
    if (cache && it != cache->energy.end()) {
        E = it->second;
    } else {
        E = cut_bubble_energy(p, bp);
        if (cache) cache->energy[key_of(ratio)] = E;
    }
    if (has_remainder(kind, p)) {
        auto k = std::make_pair(key_of(bp.eps), key_of(bp.delta));
        auto jt = cache ? cache->remainder.find(k) : decltype(cache->remainder.end()){};
        double rem;
        if (cache && jt != cache->remainder.end()) {
            rem = jt->second;
        } else {
            RadialFunction u = conformal_lift(cut_bubble(p, bp), p);
            rem = quadratic_form(MultiplierKind::REMAINDER, p, 0.0, u);
            if (cache) cache->remainder[k] = rem;
        }
        E += rem;
    }
    double l2 = hyperbolic_l2_mass(p, bp);
    double crit = std::pow(crit_mass(p, bp), 2.0 / p.crit_exponent());
    return make_report(lambda, E, l2, crit, bubble_descriptor(bp));
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol, double& best_x) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    double len = b - a;
    while (b - a > tol * len) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    // the optimum often sits on the box boundary
    double fa = f(a), fb = f(b);
    double xs[4] = {a, c, d, b}, fs[4] = {fa, fc, fd, fb};
    int k = int(std::min_element(fs, fs + 4) - fs);
    best_x = xs[k];
    return fs[k];
}

QuotientReport minimize_bubble(MultiplierKind kind, const Params& p, double lambda, const TrialFamily& fam,
                               MinimizeTrace* trace, BubbleCache& cache) {
    if (!(fam.eps_min > 0.0 && fam.eps_min < fam.eps_max && fam.eps_max < 1.0))
        throw ParameterError("bubble box: need 0 < eps_min < eps_max < 1");
    if (!(fam.delta_min > 0.0 && fam.delta_min < fam.delta_max && fam.delta_max < 0.25))
        throw ParameterError("bubble box: need 0 < delta_min < delta_max < 1/4");
    int evaluations = 0;
    QuotientReport best;
    bool have = false;
    auto eval = [&](double eps, double delta) {
        if (++evaluations > fam.max_evaluations)
            throw BudgetExceeded("bubble minimisation: evaluation cap of " + std::to_string(fam.max_evaluations) +
                                 " reached");
        QuotientReport r = bubble_report(kind, p, lambda, {eps, delta}, &cache);
        if (!have || r.quotient < best.quotient) {
            best = r;
            have = true;
        }
        return r.quotient;
    };
    double delta = std::clamp(fam.delta_start, fam.delta_min, fam.delta_max);
    double eps = std::clamp(fam.eps_start, fam.eps_min, std::min(fam.eps_max, delta / fam.min_ratio));
    double current = eval(eps, delta);
    std::vector<double> values{current};
    for (;;) {
        double before = current;
        // ratio delta / eps at fixed delta
        double lo = std::log(std::max(delta / fam.eps_max, fam.min_ratio)), hi = std::log(delta / fam.eps_min);
        if (hi > lo) {
            double x;
            double v = golden_section([&](double t) { return eval(delta / std::exp(t), delta); }, lo, hi, 1e-4, x);
            if (v < current) {
                current = v;
                eps = delta / std::exp(x);
            }
        }
        // delta at fixed ratio
        double ratio = delta / eps;
        double dlo = std::max(fam.delta_min, ratio * fam.eps_min), dhi = std::min(fam.delta_max, ratio * fam.eps_max);
        if (dhi > dlo) {
            double x;
            double v = golden_section([&](double d) { return eval(d / ratio, d); }, dlo, dhi, 1e-4, x);
            if (v < current) {
                current = v;
                delta = x;
                eps = x / ratio;
            }
        }
        // delta at fixed eps, which slides along the eps bounds
        dlo = std::max(fam.delta_min, fam.min_ratio * eps);
        dhi = fam.delta_max;
        if (dhi > dlo) {
            double x;
            double v = golden_section([&](double d) { return eval(eps, d); }, dlo, dhi, 1e-4, x);
            if (v < current) {
                current = v;
                delta = x;
            }
        }
        values.push_back(current);
        if (std::abs(before - current) <= fam.tolerance * std::abs(current)) break;
    }
    if (trace) {
        trace->evaluations = evaluations;
        trace->best_values = values;
        trace->best_point = {eps, delta};
    }
    return best;
}

// Nelder-Mead on the spline coefficients. The quotient is scale invariant, so the
// coefficients are renormalised to max |c| = 1 in the report.
QuotientReport minimize_spline(MultiplierKind kind, const Params&, double lambda, const TrialFamily& fam,
                               MinimizeTrace* trace, const SplineModel& model) {
    const int m = model.size();
    int evaluations = 0;
    auto f = [&](const std::vector<double>& c) {
        if (++evaluations > fam.max_evaluations)
            throw BudgetExceeded("spline minimisation: evaluation cap of " + std::to_string(fam.max_evaluations) +
                                 " reached");
        bool zero = std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
        if (zero) return std::numeric_limits<double>::infinity();
        return model.evaluate(kind, lambda, c).quotient;
    };
    std::vector<double> x0 = fam.coeff_start;
    if (x0.empty()) {
        x0.assign(m, 0.0);
        x0[0] = 1.0;
    }
    if (int(x0.size()) != m) throw ParameterError("spline start has the wrong number of coefficients");
    std::vector<double> values;

    auto run = [&](std::vector<double> start) {
        std::vector<std::vector<double>> simplex{start};
        double scale = 0.0;
        for (double v : start) scale = std::max(scale, std::abs(v));
        for (int i = 0; i < m; ++i) {
            auto v = start;
            v[i] += 0.5 * scale;
            simplex.push_back(v);
        }
        std::vector<double> fv;
        for (auto& v : simplex) fv.push_back(f(v));
        for (;;) {
            std::vector<int> order(m + 1);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
            std::vector<std::vector<double>> s2;
            std::vector<double> f2;
            for (int i : order) {
                s2.push_back(simplex[i]);
                f2.push_back(fv[i]);
            }
            simplex.swap(s2);
            fv.swap(f2);
            values.push_back(fv[0]);
            if (std::abs(fv[m] - fv[0]) <= fam.tolerance * std::abs(fv[0])) break;
            std::vector<double> centroid(m, 0.0);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) centroid[j] += simplex[i][j] / m;
            auto point = [&](double t) {
                std::vector<double> v(m);
                for (int j = 0; j < m; ++j) v[j] = centroid[j] + t * (simplex[m][j] - centroid[j]);
                return v;
            };
            auto xr = point(-1.0);
            double fr = f(xr);
            if (fr < fv[0]) {
                auto xe = point(-2.0);
                double fe = f(xe);
                if (fe < fr) {
                    simplex[m] = xe;
                    fv[m] = fe;
                } else {
                    simplex[m] = xr;
                    fv[m] = fr;
                }
            } else if (fr < fv[m - 1]) {
                simplex[m] = xr;
                fv[m] = fr;
            } else {
                bool outside = fr < fv[m];
                auto xc = point(outside ? -0.5 : 0.5);
                double fc = f(xc);
                if (fc < (outside ? fr : fv[m])) {
                    simplex[m] = xc;
                    fv[m] = fc;
                } else {
                    for (int i = 1; i <= m; ++i) {
                        for (int j = 0; j < m; ++j) simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                        fv[i] = f(simplex[i]);
                    }
                }
            }
        }
        return std::make_pair(simplex[0], fv[0]);
    };
    // a second run from the first optimum guards against a collapsed simplex
    auto [x1, f1] = run(x0);
    auto [x2, f2] = run(x1);
    std::vector<double> best = f2 <= f1 ? x2 : x1;
    double scale = 0.0;
    for (double v : best) scale = std::max(scale, std::abs(v));
    for (double& v : best) v /= scale;
    if (trace) {
        trace->evaluations = evaluations;
        trace->best_values = values;
        trace->best_point = best;
    }
    return model.evaluate(kind, lambda, best);
}

}  // namespace

QuotientReport at_lambda(const QuotientReport& r, double lambda) {
    return make_report(lambda, r.energy, r.l2_mass, r.crit_norm, r.trial_descriptor);
}

QuotientReport sobolev_quotient(MultiplierKind kind, const Params& p, double lambda, const RadialFunction& u) {
    check_kind(kind);
    validate(p);
    if (std::all_of(u.values.begin(), u.values.end(), [](double v) { return v == 0.0; }))
        throw ZeroTrial("trial function vanishes");
    bool rem = has_remainder(kind, p);
    auto tilde = [&](double b) { return multiplier(MultiplierKind::INTERTWINED, p, b); };
    auto remainder = [&](double b) { return multiplier(MultiplierKind::REMAINDER, p, b); };
    SpectralProfile F = spherical_transform_auto(u, p.n, [&](double b) {
        return tilde(b) + (rem ? std::abs(remainder(b)) : 0.0) + std::abs(lambda);
    });
    double E = spectral_integral(F, p.n, tilde);
    if (rem) E += spectral_integral(F, p.n, remainder);
    double l2 = integrate_power(u, p.n, 2.0);
    double crit = std::pow(integrate_power(u, p.n, p.crit_exponent()), 2.0 / p.crit_exponent());
    return make_report(lambda, E, l2, crit, "PROFILE");
}

QuotientReport bubble_quotient(MultiplierKind kind, const Params& p, double lambda, const BubbleParams& bp) {
    return bubble_report(kind, p, lambda, bp, nullptr);
}

EnergyEstimate sharp_constant_with_error(const Params& p, double rho_cut) {
    validate(p);
    EnergyEstimate e = bubble_energy(p, rho_cut);
    double norm = std::pow(crit_mass_limit(p.n), (p.n - 2.0 * p.s) / p.n);
    return {e.value / norm, e.tail_bound / norm};
}

double sharp_constant_estimate(const Params& p) {
    return sharp_constant_with_error(p, euclidean_tolerances().bubble_rho_cut).value;
}

TrialFamily bubble_family() { return TrialFamily{}; }

TrialFamily spline_family(double width, bool envelope, int knots) {
    TrialFamily f;
    f.kind = FamilyKind::SPLINE;
    f.width = width;
    f.envelope = envelope;
    f.knots = knots;
    f.max_evaluations = 40000;
    return f;
}

FamilyKind parse_family_kind(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "bubble") return FamilyKind::BUBBLE;
    if (lower == "spline") return FamilyKind::SPLINE;
    throw ParameterError("unknown trial family: " + name);
}

std::string to_string(FamilyKind kind) { return kind == FamilyKind::BUBBLE ? "bubble" : "spline"; }

SplineModel::SplineModel(const Params& p, int knots, double width, bool envelope)
    : p_(p), knots_(knots), width_(width), envelope_(envelope) {
    validate(p);
    if (knots < 2) throw ParameterError("spline family needs at least two knots");
    if (!(width > 0.0)) throw ParameterError("spline width must be positive");
    const double h = width / (knots - 1), support = width + 8.0 * h;
    grid_ = make_grid(GridKind::HYPERBOLIC_GEODESIC, support, std::min(0.25, h / 3.0));
    const std::size_t N = grid_.size();
    std::vector<double> env(N, 1.0);
    if (envelope) parallel_for(N, [&](std::size_t i) { env[i] = spherical_function(p.n, 0.0, grid_.nodes[i]); });
    basis_.assign(knots, std::vector<double>(N, 0.0));
    for (int k = 0; k < knots; ++k) {
        double c = k * h;
        for (std::size_t i = 0; i < N; ++i) {
            double r = grid_.nodes[i];
            double a = (r - c) / h, b = (r + c) / h;
            basis_[k][i] = env[i] * (std::exp(-0.5 * a * a) + std::exp(-0.5 * b * b));
        }
    }
    const double omega = sphere_area(p.n);
    volume_.resize(N);
    for (std::size_t i = 0; i < N; ++i) volume_[i] = omega * grid_.weights[i] * std::pow(std::sinh(grid_.nodes[i]), p.n - 1);

    auto as_function = [&](int k) {
        RadialFunction f;
        f.grid = grid_;
        f.values = basis_[k];
        f.support_radius = support;
        f.space = Space::HYPERBOLIC;
        return f;
    };
    bool rem = sin_pi(p.s) != 0.0;
    auto weight = [&](double b) {
        return multiplier(MultiplierKind::INTERTWINED, p, b) +
               (rem ? std::abs(multiplier(MultiplierKind::REMAINDER, p, b)) : 0.0) + 1.0;
    };
    double B = std::max(spherical_transform_auto(as_function(0), p.n, weight).beta_max(),
                        spherical_transform_auto(as_function(knots - 1), p.n, weight).beta_max());
    RadialGrid beta = make_beta_grid(B, std::min(0.5, 3.14159 / support));
    std::vector<std::vector<double>> F(knots);
    for (int k = 0; k < knots; ++k) F[k] = spherical_transform(as_function(k), p.n, beta).values;
    std::vector<double> wt(beta.size()), wr(beta.size());
    for (std::size_t j = 0; j < beta.size(); ++j) {
        double b = beta.nodes[j], dens = beta.weights[j] * plancherel_density(p.n, b);
        wt[j] = dens * multiplier(MultiplierKind::INTERTWINED, p, b);
        wr[j] = rem ? dens * multiplier(MultiplierKind::REMAINDER, p, b) : 0.0;
    }
    intertwined_.assign(knots * knots, 0.0);
    remainder_.assign(knots * knots, 0.0);
    gram_.assign(knots * knots, 0.0);
    for (int k = 0; k < knots; ++k)
        for (int l = k; l < knots; ++l) {
            double a = 0.0, r = 0.0, g = 0.0;
            for (std::size_t j = 0; j < beta.size(); ++j) {
                double prod = F[k][j] * F[l][j];
                a += wt[j] * prod;
                r += wr[j] * prod;
            }
            for (std::size_t i = 0; i < N; ++i) g += volume_[i] * basis_[k][i] * basis_[l][i];
            intertwined_[k * knots + l] = intertwined_[l * knots + k] = a;
            remainder_[k * knots + l] = remainder_[l * knots + k] = r;
            gram_[k * knots + l] = gram_[l * knots + k] = g;
        }
}

RadialFunction SplineModel::profile(const std::vector<double>& coeff) const {
    if (int(coeff.size()) != knots_) throw ParameterError("spline coefficient count mismatch");
    RadialFunction f;
    f.grid = grid_;
    f.values.assign(grid_.size(), 0.0);
    for (int k = 0; k < knots_; ++k)
        for (std::size_t i = 0; i < grid_.size(); ++i) f.values[i] += coeff[k] * basis_[k][i];
    f.support_radius = grid_.radius();
    f.space = Space::HYPERBOLIC;
    return f;
}

std::string SplineModel::descriptor(const std::vector<double>& coeff) const {
    std::string s = "SPLINE(m=" + std::to_string(knots_) + ",R=" + format_number(width_) +
                    ",envelope=" + (envelope_ ? "1" : "0") + ",c=[";
    for (int k = 0; k < knots_; ++k) s += (k ? ";" : "") + format_number(coeff[k]);
    return s + "])";
}

QuotientReport SplineModel::evaluate(MultiplierKind kind, double lambda, const std::vector<double>& coeff) const {
    check_kind(kind);
    if (int(coeff.size()) != knots_) throw ParameterError("spline coefficient count mismatch");
    auto form = [&](const std::vector<double>& M) {
        double s = 0.0;
        for (int k = 0; k < knots_; ++k)
            for (int l = 0; l < knots_; ++l) s += coeff[k] * M[k * knots_ + l] * coeff[l];
        return s;
    };
    double E = form(intertwined_);
    if (has_remainder(kind, p_)) E += form(remainder_);
    double l2 = form(gram_);
    double power = p_.crit_exponent(), I = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        double v = 0.0;
        for (int k = 0; k < knots_; ++k) v += coeff[k] * basis_[k][i];
        if (v != 0.0) I += volume_[i] * std::pow(std::abs(v), power);
    }
    return make_report(lambda, E, l2, std::pow(I, 2.0 / power), descriptor(coeff));
}

QuotientReport minimize_quotient(MultiplierKind kind, const Params& p, double lambda, const TrialFamily& family,
                                 MinimizeTrace* trace) {
    check_kind(kind);
    validate(p);
    if (family.max_evaluations < 1) throw ParameterError("evaluation cap must be positive");
    if (family.kind == FamilyKind::BUBBLE) {
        BubbleCache cache;
        return minimize_bubble(kind, p, lambda, family, trace, cache);
    }
    SplineModel model(p, family.knots, family.width, family.envelope);
    return minimize_spline(kind, p, lambda, family, trace, model);
}

QuotientReport minimize_quotient(MultiplierKind kind, double lambda, const SplineModel& model,
                                 const TrialFamily& family, MinimizeTrace* trace) {
    check_kind(kind);
    if (family.max_evaluations < 1) throw ParameterError("evaluation cap must be positive");
    return minimize_spline(kind, model.params(), lambda, family, trace, model);
}

std::vector<QuotientReport> gap_scan(MultiplierKind kind, const Params& p, const std::vector<double>& lambda_grid,
                                     const TrialFamily& family) {
    check_kind(kind);
    validate(p);
    if (lambda_grid.empty()) throw ParameterError("gap scan needs at least one lambda");
    std::vector<double> sorted = lambda_grid;
    std::sort(sorted.begin(), sorted.end());
    std::map<double, QuotientReport> by_lambda;
    TrialFamily fam = family;
    BubbleCache cache;
    std::unique_ptr<SplineModel> model;
    if (fam.kind == FamilyKind::SPLINE) model = std::make_unique<SplineModel>(p, fam.knots, fam.width, fam.envelope);
    bool have = false;
    QuotientReport prev;
    for (double lambda : sorted) {
        MinimizeTrace trace;
        QuotientReport r = fam.kind == FamilyKind::BUBBLE ? minimize_bubble(kind, p, lambda, fam, &trace, cache)
                                                          : minimize_spline(kind, p, lambda, fam, &trace, *model);
        if (have) {
            QuotientReport carried = at_lambda(prev, lambda);
            if (carried.quotient < r.quotient) r = carried;
        }
        // warm start the next lambda from this optimum
        if (fam.kind == FamilyKind::BUBBLE) {
            fam.eps_start = trace.best_point[0];
            fam.delta_start = trace.best_point[1];
        } else {
            fam.coeff_start = trace.best_point;
        }
        prev = r;
        have = true;
        by_lambda[lambda] = r;
    }
    std::vector<QuotientReport> out;
    for (double lambda : lambda_grid) out.push_back(by_lambda.at(lambda));
    return out;
}

double blowdown_radius(double q, double C, double alpha) {
    if (!(q > 0.0) || !(C > 0.0) || !(alpha > 0.0)) throw ParameterError("blow-down needs q, C, alpha > 0");
    return std::max(0.0, std::log(8.0 * C / q) / alpha);
}

BlowdownCalibration calibrate_blowdown(MultiplierKind kind, const Params& p, double lambda) {
    check_kind(kind);
    validate(p);
    if (!(lambda > spectral_bottom(kind, p))) throw ParameterError("blow-down needs lambda above the spectral bottom");
    BlowdownCalibration c;
    for (double R = 8.0; R <= 256.0 && c.q == 0.0; R *= 2.0) {
        RadialGrid g = make_grid(GridKind::HYPERBOLIC_GEODESIC, R, std::min(0.25, R / 32.0));
        RadialFunction u = sample(
            g,
            [&](double r) {
                double w = std::cos(0.5 * std::numbers::pi * r / R);
                return spherical_function(p.n, 0.0, r) * w * w;
            },
            R, Space::HYPERBOLIC);
        QuotientReport rep = sobolev_quotient(kind, p, lambda, u);
        if (rep.numerator() < 0.0) {
            c.q = -rep.quotient;
            c.trial_width = R;
        }
    }
    if (c.q == 0.0) throw NonConvergence("no negative-numerator trial up to width 256; lambda is too close to the bottom");
    std::vector<double> rs{2, 3, 4, 5, 6}, ks;
    for (double r : rs) ks.push_back(regularized_kernel(kind, p, r, 0.01));
    c.alpha = 0.9 * std::abs(log_slope(rs, ks));
    for (std::size_t i = 0; i < rs.size(); ++i) c.C = std::max(c.C, std::abs(ks[i]) * std::exp(c.alpha * rs[i]));
    c.R0 = blowdown_radius(c.q, c.C, c.alpha);
    return c;
}

std::vector<BlowdownRow> multibump_blowdown(const Params& p, double lambda, double q, double C, double alpha,
                                            double R0, const std::vector<int>& N_values, double crit_norm) {
    validate(p);
    (void)lambda;
    if (!(q > 0.0)) throw ParameterError("blow-down needs a negative-numerator trial (q > 0)");
    if (!(C >= 0.0) || !(alpha > 0.0) || !(crit_norm > 0.0))
        throw ParameterError("blow-down needs C >= 0, alpha > 0 and a positive critical norm");
    std::vector<BlowdownRow> out;
    for (int N : N_values) {
        if (N < 1) throw ParameterError("bump counts must be positive");
        BlowdownRow row;
        row.N = N;
        row.R_N = 2.0 / alpha * std::log(double(N)) + R0;
        row.bound = -N * q + 2.0 * C * double(N) * N * std::exp(-alpha * row.R_N);
        row.scaled_bound = row.bound / (std::pow(double(N), 2.0 / p.crit_exponent()) * crit_norm);
        out.push_back(row);
    }
    return out;
}

}  // namespace gjms
