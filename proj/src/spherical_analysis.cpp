#include "gjms/spherical_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gjms/parallel.hpp"
#include "gjms/quadrature.hpp"
#include "gjms/special_functions.hpp"

namespace gjms {

namespace {

constexpr double kPi = std::numbers::pi;

double log_sinh(double x) {
    if (x > 20.0) return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0);
    return std::log(std::sinh(x));
}

// Normalising constant of the Mehler integral, fixed by Phi(0) = 1.
double mehler_constant(int n) {
    return std::pow(2.0, 0.5 * (n - 1)) * std::tgamma(0.5 * n) /
           (std::sqrt(kPi) * std::tgamma(0.5 * (n - 1)));
}

// Origin series: Phi = cosh(r/2)^{2-n} 2F1(1/2 - i b, 1/2 + i b; n/2; -sinh^2(r/2)).
double spherical_series(int n, double beta, double r) {
    double x = -std::pow(std::sinh(0.5 * r), 2);
    double c = 0.5 * n, b2 = beta * beta;
    double term = 1.0, sum = 1.0;
    double peak = 2.0 * beta * std::sqrt(-x) + 2.0;
    for (int k = 0; k < 2000; ++k) {
        term *= ((k + 0.5) * (k + 0.5) + b2) / ((c + k) * (k + 1.0)) * x;
        sum += term;
        if (k > peak && std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::pow(std::cosh(0.5 * r), 2.0 - n) * sum;
}

// Nodes t_j in (0, r) and weights W_j with Phi_b(r) = sum_j W_j cos(b t_j) for b <= beta_max.
// Substitution t = r (1 - w^2); breakpoints equally spaced in phase.
void abel_rule(int n, double r, double beta_max, std::vector<double>& t, std::vector<double>& W) {
    int panels = std::max({int(std::ceil(beta_max * r / 2.5)), int(std::ceil(r)), 4});
    const GaussRule& g = gauss_legendre(16);
    t.clear();
    W.clear();
    t.reserve(16 * panels);
    W.reserve(16 * panels);
    double pref = mehler_constant(n) * std::exp(-0.5 * (n - 1) * log_sinh(r));
    double expo = 0.5 * (n - 3);
    double denom = -std::expm1(-2.0 * r);
    for (int k = 0; k < panels; ++k) {
        double a = std::sqrt(double(k) / panels), b = std::sqrt(double(k + 1) / panels);
        double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (int i = 0; i < 16; ++i) {
            double w = c + h * g.nodes[i];
            double A = -std::expm1(-2.0 * r * (1.0 - 0.5 * w * w)) / denom;
            double core = -std::expm1(-r * w * w) * A;
            double amp = 2.0 * r * w;
            if (n != 3) amp *= (n % 2 == 1) ? std::pow(core, int(std::lround(expo))) : std::pow(core, expo);
            t.push_back(r * (1.0 - w * w));
            W.push_back(pref * amp * h * g.weights[i]);
        }
    }
}

// Barycentric interpolation of a RadialFunction inside its panels.
class PanelInterp {
public:
    explicit PanelInterp(const RadialFunction& f) : f_(f), q_(f.grid.per_panel) {
        bw_.resize(f.grid.size());
        for (std::size_t p = 0; p + 1 < f.grid.edges.size(); ++p) {
            const double* x = f.grid.nodes.data() + p * q_;
            for (int j = 0; j < q_; ++j) {
                double w = 1.0;
                for (int k = 0; k < q_; ++k)
                    if (k != j) w /= (x[j] - x[k]);
                bw_[p * q_ + j] = w;
            }
        }
    }

    double operator()(double r, std::size_t panel) const {
        const double* x = f_.grid.nodes.data() + panel * q_;
        const double* y = f_.values.data() + panel * q_;
        const double* w = bw_.data() + panel * q_;
        double num = 0.0, den = 0.0;
        for (int j = 0; j < q_; ++j) {
            double d = r - x[j];
            if (d == 0.0) return y[j];
            double tj = w[j] / d;
            num += tj * y[j];
            den += tj;
        }
        return num / den;
    }

    std::size_t panel_of(double r) const {
        const auto& e = f_.grid.edges;
        auto it = std::upper_bound(e.begin(), e.end(), r);
        std::ptrdiff_t k = it - e.begin() - 1;
        return std::size_t(std::clamp<std::ptrdiff_t>(k, 0, std::ptrdiff_t(e.size()) - 2));
    }

private:
    const RadialFunction& f_;
    int q_;
    std::vector<double> bw_;
};

// Abel kernel sinh(r) (cosh r - cosh t)^{(n-3)/2}.
double abel_kernel(int n, double r, double t) {
    double diff = 2.0 * std::sinh(0.5 * (r + t)) * std::sinh(0.5 * (r - t));
    double sh = std::sinh(r);
    if (n == 3) return sh;
    if (n % 2 == 1) return sh * std::pow(diff, (n - 3) / 2);
    return sh * std::pow(diff, 0.5 * (n - 3));
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

}  // namespace

const SpectralTolerances& spectral_tolerances() {
    static const SpectralTolerances tol{};
    return tol;
}

double plancherel_density(int n, double beta) {
    if (n < 2) throw ParameterError("plancherel_density: n >= 2 required");
    beta = std::abs(beta);
    if (beta == 0.0) return 0.0;
    double rho = 0.5 * (n - 1);
    // |Gamma(i b)|^{-2} = b sinh(pi b) / pi
    double lg = 2.0 * log_gamma({rho, beta}).real() + std::log(beta) + log_sinh(kPi * beta) - std::log(kPi);
    double c = std::pow(2.0, 1.0 - n) / (std::tgamma(0.5 * n) * std::pow(kPi, 0.5 * n));
    return c * std::exp(lg);
}

double spherical_function_legendre(int n, double beta, double r) {
    double mu = 0.5 * (2 - n);
    Complex p = legendre_p({-0.5, beta}, mu, std::cosh(r));
    return std::pow(2.0, 0.5 * (n - 2)) * std::tgamma(0.5 * n) * std::pow(std::sinh(r), mu) * p.real();
}

double spherical_function_abel(int n, double beta, double r) {
    std::vector<double> t, W;
    abel_rule(n, r, std::abs(beta), t, W);
    double sum = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) sum += W[j] * std::cos(beta * t[j]);
    return sum;
}

double spherical_function(int n, double beta, double r) {
    if (n < 2) throw ParameterError("spherical_function: n >= 2 required");
    if (r < 0.0) throw DomainError("spherical_function: r >= 0 required");
    beta = std::abs(beta);
    if (r == 0.0) return 1.0;
    if (r < spectral_tolerances().r_min) return spherical_series(n, beta, r);
    double th = std::tanh(0.5 * r);
    // the Pfaff series loses about 2 beta tanh(r/2) / ln 10 digits to cancellation
    if (2.0 * beta * th <= 6.0 && th * th <= 0.6) return spherical_function_legendre(n, beta, r);
    return spherical_function_abel(n, beta, r);
}

RadialGrid make_beta_grid(double beta_max, double panel_width) {
    return make_grid(GridKind::EUCLIDEAN, beta_max, panel_width, 16);
}

SpectralProfile spherical_transform(const RadialFunction& f, int n, const RadialGrid& beta_grid) {
    if (!std::isfinite(f.support_radius)) throw SupportError("spherical_transform: unbounded support");
    if (f.space != Space::HYPERBOLIC) throw DomainError("spherical_transform expects a hyperbolic profile");
    SpectralProfile out;
    out.beta_grid = beta_grid;
    out.values.assign(beta_grid.size(), 0.0);
    const auto& edges = f.grid.edges;
    std::size_t panels = 0;
    while (panels + 1 < edges.size() && edges[panels] < f.support_radius) ++panels;
    if (panels == 0) return out;
    const double beta_max = std::max(beta_grid.radius(), 1.0);
    const double max_width = 2.5 / beta_max;
    const int q = f.grid.per_panel;
    PanelInterp interp(f);

    // t grid: the profile's own panels, subdivided to resolve cos(beta t)
    std::vector<double> tedges{edges[0]};
    std::vector<std::size_t> tpanel_owner;
    for (std::size_t p = 0; p < panels; ++p) {
        int sub = std::max(1, int(std::ceil((edges[p + 1] - edges[p]) / max_width)));
        for (int k = 1; k <= sub; ++k) {
            tedges.push_back(edges[p] + (edges[p + 1] - edges[p]) * k / sub);
            tpanel_owner.push_back(p);
        }
    }
    std::vector<double> tn, tw;
    composite_rule(tedges, 16, tn, tw);

    const GaussRule& g = gauss_legendre(16);
    const bool even = n % 2 == 0;
    std::vector<double> A(tn.size(), 0.0);
    parallel_for(tn.size(), [&](std::size_t m) {
        double t = tn[m];
        std::size_t k = tpanel_owner[m / 16];
        double acc = 0.0;
        // near zone handled with interpolated values, far zone on the native nodes
        std::size_t far_start = even ? std::min(k + 2, panels) : k + 1;
        double near_end = edges[far_start];
        auto piece = [&](double a, double b, bool substitute) {
            double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0.0;
            for (int i = 0; i < 16; ++i) {
                double r, jac;
                if (substitute) {
                    double v = 0.5 * (1.0 + g.nodes[i]);
                    r = a + (b - a) * v * v;
                    jac = (b - a) * 2.0 * v * 0.5 * g.weights[i];
                } else {
                    r = c + h * g.nodes[i];
                    jac = h * g.weights[i];
                }
                s += jac * interp(r, interp.panel_of(r)) * abel_kernel(n, r, t);
            }
            return s;
        };
        if (near_end > t) {
            if (!even) {
                acc += piece(t, near_end, false);
            } else {
                double len = near_end - t;
                double first = std::min(len, t);
                acc += piece(t, t + first, true);
                double a = first;
                while (a < len) {
                    double b = std::min(2.0 * a, len);
                    acc += piece(t + a, t + b, false);
                    a = b;
                }
            }
        }
        for (std::size_t i = far_start * q; i < panels * q; ++i) {
            double v = f.values[i];
            if (v == 0.0) continue;
            acc += f.grid.weights[i] * v * abel_kernel(n, f.grid.nodes[i], t);
        }
        A[m] = acc;
    });

    const double pref = sphere_area(n) * mehler_constant(n);
    parallel_for(beta_grid.size(), [&](std::size_t kk) {
        double b = beta_grid.nodes[kk], s = 0.0;
        for (std::size_t m = 0; m < tn.size(); ++m) s += tw[m] * A[m] * std::cos(b * tn[m]);
        out.values[kk] = pref * s;
    });
    return out;
}

SpectralProfile spherical_transform_auto(const RadialFunction& f, int n, const Symbol& weight) {
    const auto& tol = spectral_tolerances();
    double support = std::min(f.support_radius, f.grid.radius());
    double width = std::min(0.5, kPi / std::max(support, 1e-3));
    for (double B = tol.beta_start; B <= tol.beta_cap; B *= 2.0) {
        SpectralProfile F = spherical_transform(f, n, make_beta_grid(B, width));
        std::vector<double> integrand(F.values.size());
        for (std::size_t k = 0; k < integrand.size(); ++k) {
            double b = F.beta_grid.nodes[k];
            integrand[k] = weight(b) * F.values[k] * F.values[k] * plancherel_density(n, b);
        }
        if (tail_share(F, integrand) <= tol.tail_fraction) return F;
    }
    throw TailError("spherical transform: spectral tail above tolerance at the frequency cap");
}

RadialFunction inverse_spherical_transform(const SpectralProfile& F, int n, const RadialGrid& r_grid) {
    const auto& tol = spectral_tolerances();
    std::vector<double> a(F.values.size()), sq(F.values.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        double dens = plancherel_density(n, F.beta_grid.nodes[k]);
        a[k] = F.beta_grid.weights[k] * F.values[k] * dens;
        sq[k] = F.values[k] * F.values[k] * dens;
    }
    if (tail_share(F, sq) > tol.tail_fraction)
        throw TailError("inverse spherical transform: truncated spectral tail above tolerance");
    RadialFunction out;
    out.grid = r_grid;
    out.space = Space::HYPERBOLIC;
    out.support_radius = r_grid.radius();
    out.values.assign(r_grid.size(), 0.0);
    const double beta_max = F.beta_max();
    parallel_for(r_grid.size(), [&](std::size_t i) {
        double r = r_grid.nodes[i], s = 0.0;
        if (r < tol.r_min) {
            for (std::size_t k = 0; k < a.size(); ++k)
                if (a[k] != 0.0) s += a[k] * spherical_series(n, F.beta_grid.nodes[k], r);
        } else {
            std::vector<double> t, W;
            abel_rule(n, r, beta_max, t, W);
            for (std::size_t j = 0; j < t.size(); ++j) {
                double G = 0.0;
                for (std::size_t k = 0; k < a.size(); ++k) G += a[k] * std::cos(F.beta_grid.nodes[k] * t[j]);
                s += W[j] * G;
            }
        }
        out.values[i] = s;
    });
    return out;
}

double spectral_integral(const SpectralProfile& F, int n, const Symbol& symbol) {
    double s = 0.0;
    for (std::size_t k = 0; k < F.values.size(); ++k) {
        double b = F.beta_grid.nodes[k];
        s += F.beta_grid.weights[k] * symbol(b) * F.values[k] * F.values[k] * plancherel_density(n, b);
    }
    return s;
}

double quadratic_form(const Symbol& symbol, int n, double lambda, const RadialFunction& f) {
    auto shifted = [&](double b) { return symbol(b) - lambda; };
    auto weight = [&](double b) { return std::abs(symbol(b)) + std::abs(lambda); };
    SpectralProfile F = spherical_transform_auto(f, n, weight);
    return spectral_integral(F, n, shifted);
}

double quadratic_form(MultiplierKind kind, const Params& p, double lambda, const RadialFunction& f) {
    validate(p);
    return quadratic_form([&](double b) { return multiplier(kind, p, b); }, p.n, lambda, f);
}

double regularized_kernel(const Symbol& symbol, int n, double r, double eps_reg) {
    const auto& tol = spectral_tolerances();
    if (!(r >= 0.5)) throw ParameterError("regularized_kernel: r >= 0.5 required");
    if (!(eps_reg > 0.0)) throw ParameterError("regularized_kernel: eps_reg > 0 required");
    double cut = std::sqrt(-std::log(tol.kernel_gaussian_floor) / eps_reg);
    std::vector<double> t, W;
    abel_rule(n, r, cut, t, W);
    auto g = [&](double b) {
        double phi = 0.0;
        for (std::size_t j = 0; j < t.size(); ++j) phi += W[j] * std::cos(b * t[j]);
        return symbol(b) * std::exp(-eps_reg * b * b) * phi * plancherel_density(n, b);
    };
    // scale of the oscillating integrand, for an absolute tolerance
    int panels = std::max(8, int(std::ceil(cut * r / kPi)));
    double scale = integrate_composite([&](double b) { return std::abs(g(b)); }, 0.0, cut, panels, 16);
    AdaptiveOptions opt;
    opt.abs_tol = 1e-14 * scale;
    opt.rel_tol = 1e-10;
    opt.max_panels = 20000;
    double sum = 0.0;
    double h = cut / panels;
    for (int k = 0; k < panels; ++k) {
        AdaptiveOptions local = opt;
        local.abs_tol = opt.abs_tol / panels;
        local.max_panels = opt.max_panels / panels;
        sum += integrate_adaptive(g, k * h, (k + 1) * h, local);
    }
    return sum;
}

double regularized_kernel(MultiplierKind kind, const Params& p, double r, double eps_reg) {
    validate(p);
    return regularized_kernel([&](double b) { return multiplier(kind, p, b); }, p.n, r, eps_reg);
}

KernelExtrapolation regularized_kernel_richardson(MultiplierKind kind, const Params& p, double r) {
    KernelExtrapolation out;
    out.eps = {0.02, 0.01, 0.005};
    for (double e : out.eps) out.values.push_back(regularized_kernel(kind, p, r, e));
    out.extrapolated = (8.0 * out.values[2] - 6.0 * out.values[1] + out.values[0]) / 3.0;
    return out;
}

double log_slope(const std::vector<double>& r_values, const std::vector<double>& values) {
    if (r_values.size() != values.size() || r_values.size() < 2) throw DegenerateData("log_slope: need paired data");
    std::vector<double> y;
    for (double v : values) {
        if (!std::isfinite(v) || std::abs(v) < 1e-300) throw DegenerateData("kernel value underflows");
        y.push_back(std::log(std::abs(v)));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        mx += r_values[i];
        my += y[i];
    }
    mx /= y.size();
    my /= y.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sxy += (r_values[i] - mx) * (y[i] - my);
        sxx += (r_values[i] - mx) * (r_values[i] - mx);
    }
    if (sxx == 0.0) throw DegenerateData("log_slope: abscissae coincide");
    return sxy / sxx;
}

double decay_rate_fit(MultiplierKind kind, const Params& p, const std::vector<double>& r_values, double eps_reg) {
    if (r_values.size() < 4) throw ParameterError("decay_rate_fit: at least four radii required");
    for (double r : r_values)
        if (r < 2.0 || r > 8.0) throw ParameterError("decay_rate_fit: radii must lie in [2, 8]");
    std::vector<double> k(r_values.size());
    parallel_for(r_values.size(), [&](std::size_t i) { k[i] = regularized_kernel(kind, p, r_values[i], eps_reg); });
    return log_slope(r_values, k);
}

}  // namespace gjms
