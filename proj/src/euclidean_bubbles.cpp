#include "gjms/euclidean_bubbles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "gjms/parallel.hpp"
#include "gjms/quadrature.hpp"
#include "gjms/special_functions.hpp"

namespace gjms {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPanel = 0.2;  // panel width in units of eps

double mollifier_density(double t) { return t <= 0.0 || t >= 1.0 ? 0.0 : std::exp(-1.0 / (t * (1.0 - t))); }

// Cumulative integral of the mollifier density on [0, 1/2].
class Mollifier {
public:
    Mollifier() {
        cum_[0] = 0.0;
        for (int k = 0; k < kPanels; ++k) cum_[k + 1] = cum_[k] + piece(edge(k), edge(k + 1));
        total_ = 2.0 * cum_[kPanels];
    }

    // normalized integral from 0 to t
    double operator()(double t) const {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        if (t > 0.5) return 1.0 - (*this)(1.0 - t);
        int k = std::min(kPanels - 1, int(t / 0.5 * kPanels));
        return (cum_[k] + piece(edge(k), t)) / total_;
    }

private:
    static constexpr int kPanels = 64;
    static double edge(int k) { return 0.5 * k / kPanels; }
    static double piece(double a, double b) {
        const GaussRule& g = gauss_legendre(16);
        double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
        for (int i = 0; i < 16; ++i) s += g.weights[i] * mollifier_density(c + h * g.nodes[i]);
        return h * s;
    }
    std::array<double, kPanels + 1> cum_{};
    double total_ = 1.0;
};

const Mollifier& mollifier() {
    static const Mollifier m;
    return m;
}

double half_exponent(const Params& p) { return 0.5 * (p.n - 2.0 * p.s); }

// sqrt(2/pi) j_l(x) / x^l, which is J_{l+1/2}(x) x^{-(l+1/2)}
double spherical_bessel_ratio(int l, double x) {
    constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
    if (x <= l + 1.0) {
        // sum of (-x^2/2)^k / (k! (2l+2k+1)!!)
        double df = 1.0;
        for (int j = 3; j <= 2 * l + 1; j += 2) df *= j;
        double term = 1.0 / df, sum = term, q = -0.5 * x * x;
        for (int k = 1; k < 60 && std::abs(term) > 1e-17 * std::abs(sum); ++k) {
            term *= q / (k * (2.0 * l + 2.0 * k + 1.0));
            sum += term;
        }
        return c * sum;
    }
    double sn = std::sin(x), cs = std::cos(x);
    double j0 = sn / x;
    if (l == 0) return c * j0;
    double j1 = sn / (x * x) - cs / x;
    for (int k = 1; k < l; ++k) {
        double j2 = (2.0 * k + 1.0) / x * j1 - j0;
        j0 = j1;
        j1 = j2;
    }
    return c * j1 / std::pow(x, l);
}

// J_nu(x) x^{-nu} with nu = (n - 2)/2, including the limit at x = 0.
double bessel_ratio(int n, double x) {
    if (n % 2 == 1) return spherical_bessel_ratio((n - 3) / 2, x);
    double nu = 0.5 * (n - 2);
    double lead = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
    if (x < 1e-4) return lead * (1.0 - x * x / (4.0 * (nu + 1.0)));
    if (n == 2) return bessel_j(0.0, x);
    return bessel_j(nu, x) / std::pow(x, nu);
}

// Panel edges on [0, 2 delta / eps] in the scaled variable, with delta / eps on an edge.
std::vector<double> scaled_edges(double L, double width = kPanel) {
    int m = std::max(4, int(std::ceil(0.5 * L / width)));
    std::vector<double> e(2 * m + 1);
    for (int i = 0; i <= 2 * m; ++i) e[i] = L * i / (2.0 * m);
    return e;
}

// g(y) = eta(eps y) U(y), the cut bubble in the scale-free variable.
RadialFunction scaled_cut_bubble(const Params& p, const BubbleParams& bp, double width) {
    double L = 2.0 * bp.delta / bp.eps, a = half_exponent(p);
    RadialGrid g = make_grid_from_edges(GridKind::EUCLIDEAN, scaled_edges(L, width));
    return sample(
        g, [&](double y) { return cutoff(bp.delta, bp.eps * y) * std::pow(1.0 + y * y, -a); }, L, Space::EUCLIDEAN);
}

double tail_share(const SpectralProfile& F, const std::vector<double>& integrand) {
    double total = 0.0, tail = 0.0, cut = 0.9 * F.beta_max();
    for (std::size_t k = 0; k < integrand.size(); ++k) {
        double v = std::abs(integrand[k]) * F.beta_grid.weights[k];
        total += v;
        if (F.beta_grid.nodes[k] >= cut) tail += v;
    }
    return total > 0.0 ? tail / total : 0.0;
}

double weighted_energy(const SpectralProfile& F, const Params& p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < F.values.size(); ++k) {
        double rho = F.beta_grid.nodes[k];
        sum += F.beta_grid.weights[k] * std::pow(rho, 2.0 * p.s + p.n - 1) * F.values[k] * F.values[k];
    }
    return sphere_area(p.n) * sum;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept = nullptr) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw DegenerateData("rate fit: abscissae coincide");
    double slope = sxy / sxx;
    if (intercept) *intercept = my - slope * mx;
    return slope;
}

void check_ladder(const std::vector<double>& ladder) {
    if (ladder.size() < 2) throw ParameterError("eps ladder needs at least two entries");
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0 && ladder[i] < 1.0)) throw ParameterError("eps ladder entries must lie in (0, 1)");
        if (i > 0 && !(ladder[i] < ladder[i - 1])) throw ParameterError("eps ladder must be decreasing");
    }
}

}  // namespace

void validate(const BubbleParams& bp) {
    if (!(bp.eps > 0.0 && bp.eps < 1.0)) throw ParameterError("eps must lie in (0, 1)");
    if (!(bp.delta > 0.0 && bp.delta < 0.25)) throw ParameterError("delta must lie in (0, 1/4)");
}

double bubble(const Params& p, const BubbleParams& bp, double r) {
    if (r < 0.0) throw DomainError("bubble: r >= 0 required");
    double a = half_exponent(p), y = r / bp.eps;
    return std::pow(bp.eps, -a) * std::pow(1.0 + y * y, -a);
}

double bubble_derivative(const Params& p, const BubbleParams& bp, double r, int order) {
    double a = half_exponent(p), e = bp.eps, q = 1.0 + r * r / (e * e);
    double pre = std::pow(e, -a);
    switch (order) {
        case 0: return pre * std::pow(q, -a);
        case 1: return pre * (-2.0 * a * r / (e * e)) * std::pow(q, -a - 1.0);
        case 2:
            return pre * (-2.0 * a / (e * e) * std::pow(q, -a - 1.0) +
                          4.0 * a * (a + 1.0) * r * r / (e * e * e * e) * std::pow(q, -a - 2.0));
        default: throw ParameterError("bubble_derivative: order must be 0, 1 or 2");
    }
}

double cutoff(double delta, double r) {
    if (r <= delta) return 1.0;
    if (r >= 2.0 * delta) return 0.0;
    return std::clamp(1.0 - mollifier()((r - delta) / delta), 0.0, 1.0);
}

RadialFunction cut_bubble(const Params& p, const BubbleParams& bp) {
    validate(bp);
    std::vector<double> e = scaled_edges(2.0 * bp.delta / bp.eps);
    for (double& x : e) x *= bp.eps;
    e.back() = 2.0 * bp.delta;
    RadialGrid g = make_grid_from_edges(GridKind::EUCLIDEAN, e);
    return sample(
        g, [&](double r) { return cutoff(bp.delta, r) * bubble(p, bp, r); }, 2.0 * bp.delta, Space::EUCLIDEAN);
}

double crit_mass_limit(int n) {
    double h = 0.5 * n;
    return sphere_area(n) * std::exp(2.0 * std::lgamma(h) - std::lgamma(double(n))) / 2.0;
}

double crit_mass(const Params& p, const BubbleParams& bp) {
    validate(p);
    RadialFunction w = cut_bubble(p, bp);
    return integrate_power(w, p.n, p.crit_exponent());
}

double crit_mass_uncut(const Params& p, double eps) {
    validate(p);
    if (!(eps > 0.0)) throw ParameterError("eps must be positive");
    std::vector<double> edges{0.0};
    for (double y = 0.25; y < 1e13; y *= 1.5) edges.push_back(eps * y);
    RadialGrid g = make_grid_from_edges(GridKind::EUCLIDEAN, edges);
    double power = p.crit_exponent(), a = half_exponent(p), sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double r = g.nodes[i], u = std::pow(eps, -a) * std::pow(1.0 + (r / eps) * (r / eps), -a);
        sum += g.weights[i] * std::pow(u, power) * std::pow(r, p.n - 1);
    }
    return sphere_area(p.n) * sum;
}

double hyperbolic_l2_mass(const Params& p, const BubbleParams& bp) {
    validate(p);
    RadialFunction w = cut_bubble(p, bp);
    double sum = 0.0;
    for (std::size_t i = 0; i < w.values.size(); ++i) {
        double r = w.grid.nodes[i], phi = 2.0 / (1.0 - r * r);
        sum += w.grid.weights[i] * w.values[i] * w.values[i] * std::pow(phi, 2.0 * p.s) * std::pow(r, p.n - 1);
    }
    return sphere_area(p.n) * sum;
}

const EuclideanTolerances& euclidean_tolerances() {
    static const EuclideanTolerances tol{};
    return tol;
}

SpectralProfile radial_fourier(const RadialFunction& w, int n, const RadialGrid& rho_grid) {
    if (n < 2 || n > 10) throw ParameterError("radial_fourier: n must lie in [2, 10]");
    if (!std::isfinite(w.support_radius)) throw SupportError("radial_fourier: unbounded support");
    SpectralProfile out;
    out.beta_grid = rho_grid;
    out.values.assign(rho_grid.size(), 0.0);
    std::vector<double> rw;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < w.values.size(); ++i)
        if (w.values[i] != 0.0) {
            idx.push_back(i);
            rw.push_back(w.grid.weights[i] * w.values[i] * std::pow(w.grid.nodes[i], n - 1));
        }
    parallel_for(rho_grid.size(), [&](std::size_t k) {
        double rho = rho_grid.nodes[k], s = 0.0;
        for (std::size_t j = 0; j < idx.size(); ++j) s += rw[j] * bessel_ratio(n, w.grid.nodes[idx[j]] * rho);
        out.values[k] = s;
    });
    return out;
}

SpectralProfile radial_fourier_auto(const RadialFunction& w, int n, double s) {
    const auto& tol = euclidean_tolerances();
    double L = std::min(w.support_radius, w.grid.radius());
    double width = std::min(0.5, 6.0 / std::max(L, 1e-3));
    for (double B = tol.rho_start; B <= tol.rho_cap; B *= 2.0) {
        SpectralProfile F = radial_fourier(w, n, make_grid(GridKind::EUCLIDEAN, B, width));
        std::vector<double> integrand(F.values.size());
        for (std::size_t k = 0; k < integrand.size(); ++k) {
            double rho = F.beta_grid.nodes[k];
            integrand[k] = std::pow(rho, 2.0 * s + n - 1) * F.values[k] * F.values[k];
        }
        if (tail_share(F, integrand) <= tol.tail_fraction) return F;
    }
    throw TailError("radial Fourier transform: tail above tolerance at the frequency cap");
}

double fractional_energy(const RadialFunction& w, const Params& p) {
    validate(p);
    return weighted_energy(radial_fourier_auto(w, p.n, p.s), p);
}

namespace {

// Spectrum of the scaled cut bubble. The mollifier edge has a slowly decaying
// spectrum, so the sampling is refined together with the frequency range.
SpectralProfile scaled_spectrum(const Params& p, const BubbleParams& bp) {
    const auto& tol = euclidean_tolerances();
    double L = 2.0 * bp.delta / bp.eps;
    double width = std::min(0.5, 6.0 / L);
    for (double B = tol.rho_start; B <= tol.rho_cap; B *= 2.0) {
        RadialFunction g = scaled_cut_bubble(p, bp, std::min(kPanel, 10.0 / B));
        SpectralProfile F = radial_fourier(g, p.n, make_grid(GridKind::EUCLIDEAN, B, width));
        std::vector<double> integrand(F.values.size());
        for (std::size_t k = 0; k < integrand.size(); ++k)
            integrand[k] = std::pow(F.beta_grid.nodes[k], 2.0 * p.s + p.n - 1) * F.values[k] * F.values[k];
        if (tail_share(F, integrand) <= tol.tail_fraction) return F;
    }
    throw TailError("cut bubble spectrum: tail above tolerance at the frequency cap");
}

}  // namespace

double bubble_fourier(const Params& p, double rho) {
    if (!(rho > 0.0)) throw DomainError("bubble_fourier: rho > 0 required");
    // U^(rho) = 2^{-n/2} / Gamma(a) * int t^{a-1-n/2} exp(-t - rho^2/(4t)) dt, trapezoid in log t
    double a = half_exponent(p), c = a - 0.5 * p.n;
    double q = 0.25 * rho * rho;
    double lo = std::log(q) - std::log(60.0) - 2.0, hi = std::log(60.0) + 1.0;
    const double h = 1.0 / 16.0;
    int steps = int(std::ceil((hi - lo) / h));
    double sum = 0.0;
    for (int i = 0; i <= steps; ++i) {
        double u = lo + i * h, t = std::exp(u);
        sum += std::exp(c * u - t - q / t);
    }
    return std::exp(-0.5 * p.n * std::log(2.0) - std::lgamma(a)) * h * sum;
}

EnergyEstimate bubble_energy(const Params& p, double rho_cut) {
    validate(p);
    if (p.n > 10) throw ParameterError("bubble_energy: n must lie in [2, 10]");
    double a = half_exponent(p), power = 2.0 * p.s + p.n;
    const double rho0 = 1e-8;
    double vlo = std::log(rho0), vhi = std::log(rho_cut);
    int panels = int(std::ceil((vhi - vlo) / 0.5));
    std::vector<double> edges(panels + 1), nodes, weights;
    for (int i = 0; i <= panels; ++i) edges[i] = vlo + (vhi - vlo) * i / panels;
    composite_rule(edges, 16, nodes, weights);
    std::vector<double> f(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
        double rho = std::exp(nodes[i]), u = bubble_fourier(p, rho);
        f[i] = std::pow(rho, power) * u * u;
    });
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += weights[i] * f[i];
    // below rho0: U^ ~ C rho^{-2s}
    double C = std::exp(-0.5 * p.n * std::log(2.0) + std::lgamma(p.s) + 2.0 * p.s * std::log(2.0) - std::lgamma(a));
    sum += C * C * std::pow(rho0, p.n - 2.0 * p.s) / (p.n - 2.0 * p.s);
    EnergyEstimate out;
    double omega = sphere_area(p.n);
    out.value = omega * sum;
    double uc = bubble_fourier(p, rho_cut);
    out.tail_bound = omega * std::pow(rho_cut, power - 1.0) * uc * uc;
    return out;
}

double cut_bubble_energy(const Params& p, const BubbleParams& bp) {
    validate(p);
    validate(bp);
    return weighted_energy(scaled_spectrum(p, bp), p);
}

double cross_term(const Params& p, const BubbleParams& bp) {
    validate(p);
    validate(bp);
    SpectralProfile ref = scaled_spectrum(p, bp);
    double B = ref.beta_max();
    RadialFunction g = scaled_cut_bubble(p, bp, std::min(kPanel, 10.0 / B));
    // graded towards rho = 0, where U^ is singular
    double width = ref.beta_grid.edges[1];
    std::vector<double> edges{0.0};
    for (double x = 1e-10; x < width; x *= 2.0) edges.push_back(x);
    for (std::size_t k = 1; k < ref.beta_grid.edges.size(); ++k) edges.push_back(ref.beta_grid.edges[k]);
    SpectralProfile G = radial_fourier(g, p.n, make_grid_from_edges(GridKind::EUCLIDEAN, edges));
    double sum = 0.0;
    for (std::size_t k = 0; k < G.values.size(); ++k) {
        double rho = G.beta_grid.nodes[k], u = bubble_fourier(p, rho);
        sum += G.beta_grid.weights[k] * std::pow(rho, 2.0 * p.s + p.n - 1) * 2.0 * u * (G.values[k] - u);
    }
    return std::abs(sphere_area(p.n) * sum);
}

RateFit fit_rate(const std::vector<double>& eps, const std::vector<double>& values, double q) {
    if (eps.size() != values.size() || eps.size() < 2) throw DegenerateData("rate fit: need paired data");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(std::abs(values[i]) > 1e-300) || !std::isfinite(values[i]))
            throw DegenerateData("rate fit: value underflows");
        x.push_back(std::log(eps[i]));
        y.push_back(std::log(std::abs(values[i])));
    }
    RateFit fit;
    double b = 0.0;
    fit.slope = ols_slope(x, y, &b);
    // drop the largest eps when its residual exceeds two standard deviations
    if (x.size() > 3) {
        std::size_t first = std::max_element(x.begin(), x.end()) - x.begin();
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) ss += std::pow(y[i] - b - fit.slope * x[i], 2);
        double sigma = std::sqrt(ss / (x.size() - 2));
        if (std::abs(y[first] - b - fit.slope * x[first]) > 2.0 * sigma) {
            std::vector<double> xs, ys;
            for (std::size_t i = 0; i < x.size(); ++i)
                if (i != first) {
                    xs.push_back(x[i]);
                    ys.push_back(y[i]);
                }
            fit.slope = ols_slope(xs, ys);
            fit.dropped_first = true;
        }
    }
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        fit.local.push_back((y[i + 1] - y[i]) / (x[i + 1] - x[i]));
        mids.push_back(std::exp(0.5 * (x[i] + x[i + 1])));
    }
    std::vector<double> sx, sy;
    std::size_t largest = std::max_element(mids.begin(), mids.end()) - mids.begin();
    for (std::size_t i = 0; i < mids.size(); ++i)
        if (mids.size() < 3 || i != largest) {
            sx.push_back(std::pow(mids[i], q));
            sy.push_back(fit.local[i]);
        }
    if (sx.size() < 2 || !(q > 0.0)) {
        std::size_t smallest = std::min_element(mids.begin(), mids.end()) - mids.begin();
        fit.extrapolated = fit.local[smallest];
    } else {
        double icpt = 0.0;
        ols_slope(sx, sy, &icpt);
        fit.extrapolated = icpt;
    }
    return fit;
}

LadderResult crit_mass_ladder(const Params& p, double delta, const std::vector<double>& ladder) {
    check_ladder(ladder);
    LadderResult out;
    out.eps = ladder;
    double limit = crit_mass_limit(p.n);
    for (double e : ladder) {
        double m = crit_mass(p, {e, delta});
        out.values.push_back(m);
        out.differences.push_back(limit - m);
    }
    out.fit = fit_rate(out.eps, out.differences, 2.0);
    return out;
}

LadderResult l2_mass_ladder(const Params& p, double delta, const std::vector<double>& ladder) {
    check_ladder(ladder);
    LadderResult out;
    out.eps = ladder;
    for (double e : ladder) {
        double m = hyperbolic_l2_mass(p, {e, delta});
        out.values.push_back(m);
        out.differences.push_back(m);
    }
    out.fit = fit_rate(out.eps, out.values, std::min(std::abs(p.n - 4.0 * p.s), 2.0));
    return out;
}

LadderResult energy_ladder(const Params& p, double delta, const std::vector<double>& ladder) {
    check_ladder(ladder);
    LadderResult out;
    out.eps = ladder;
    double base = bubble_energy(p, euclidean_tolerances().bubble_rho_cut).value;
    for (double e : ladder) {
        double E = cut_bubble_energy(p, {e, delta});
        out.values.push_back(E);
        out.differences.push_back(E - base);
    }
    out.fit = fit_rate(out.eps, out.differences, std::min(2.0, 2.0 * p.s));
    return out;
}

double energy_asymptotics_experiment(const Params& p, double delta, const std::vector<double>& eps_ladder) {
    if (eps_ladder.size() < 4) throw ParameterError("energy asymptotics: at least four ladder entries required");
    return energy_ladder(p, delta, eps_ladder).fit.extrapolated;
}

std::vector<double> log_regime_increments(const LadderResult& l2, double s) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < l2.eps.size(); ++i) {
        double a = l2.values[i] / std::pow(l2.eps[i], 2.0 * s);
        double b = l2.values[i + 1] / std::pow(l2.eps[i + 1], 2.0 * s);
        out.push_back((b - a) / (std::log(l2.eps[i]) - std::log(l2.eps[i + 1])));
    }
    return out;
}

std::vector<double> derivative_bound_check(const Params& p, double delta, const std::vector<double>& eps_ladder,
                                           int order) {
    validate(p);
    if (order < 0 || order > 2) throw ParameterError("derivative order must be 0, 1 or 2");
    std::vector<double> out;
    for (double e : eps_ladder) {
        BubbleParams bp{e, delta};
        if (!(e > 0.0 && e < 1.0) || !(delta > 0.0 && delta < 1.0))
            throw ParameterError("derivative bound: eps and delta must lie in (0, 1)");
        double sup = 0.0;
        const int samples = 4000;
        for (int i = 0; i <= samples; ++i) {
            double r = delta + (0.999 - delta) * i / samples;
            sup = std::max(sup, std::abs(bubble_derivative(p, bp, r, order)));
        }
        out.push_back(sup / std::pow(e, half_exponent(p)));
    }
    return out;
}

}  // namespace gjms
