#include "gjms/special_functions.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

namespace gjms {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos coefficients, g = 7, nine terms.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

Complex lanczos_log_gamma(Complex z) {
    z -= 1.0;
    Complex x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + double(i));
    Complex t = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

// log sin(pi z), stable for large |Im z|.
Complex log_sin_pi(Complex z) {
    Complex w = kPi * z;
    if (std::abs(w.imag()) < 20.0) return std::log(std::sin(w));
    bool flip = w.imag() < 0.0;
    if (flip) w = std::conj(w);
    const Complex I(0.0, 1.0);
    Complex e = std::exp(2.0 * I * w);
    Complex out = -I * w + std::log(Complex(0.0, 0.5)) + std::log(1.0 - e);
    return flip ? std::conj(out) : out;
}

bool near_nonpositive_integer(double x, double tol) {
    if (x > tol) return false;
    return std::abs(x - std::round(x)) < tol;
}

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

// Series for 2F1 at t in [0, 1) with the geometric tail bound as stopping rule.
template <class P>
P hyp_series(P a, P b, double c, double t) {
    const auto& tol = special_function_tolerances();
    P sum = 1.0;
    P term = 1.0;
    double scale = 1.0;
    for (int k = 0; k < tol.hyp2f1_max_terms; ++k) {
        term *= (a + double(k)) * (b + double(k)) / ((c + k) * (k + 1.0)) * t;
        sum += term;
        scale = std::max(scale, magnitude(sum));
        double mag = magnitude(term);
        if (mag == 0.0) return sum;
        double ratio = magnitude((a + double(k + 1)) * (b + double(k + 1))) /
                       std::abs((c + k + 1) * (k + 2.0)) * t;
        if (ratio < 1.0 && mag / (1.0 - std::min(ratio, 0.999999)) <= tol.hyp2f1_term_tol * scale &&
            mag <= tol.hyp2f1_term_tol * magnitude(sum) + 1e-300)
            return sum;
    }
    throw NonConvergence("hyp2f1: series did not converge within the term cap");
}

double bessel_half_integer(double order, double x) {
    int m = int(std::lround(order - 0.5));  // order = m + 1/2
    double pref = std::sqrt(2.0 / (kPi * x));
    double jm = pref * std::cos(x);  // J_{-1/2}
    double j0 = pref * std::sin(x);  // J_{1/2}
    if (x >= order) {
        double prev = jm, cur = j0;
        for (int k = 0; k < m; ++k) {
            double next = 2.0 * (k + 0.5) / x * cur - prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    // Miller recursion; normalise against the larger of J_{1/2}, J_{-1/2}.
    int top = m + 30 + int(x);
    double hi = 0.0, cur = 1e-30, result = 0.0;
    for (int k = top; k >= 0; --k) {
        double lo = 2.0 * (k + 0.5) / x * cur - hi;
        hi = cur;
        cur = lo;
        if (k - 1 == m) result = cur;
        if (k == m) result = hi;
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            hi *= 1e-250;
            result *= 1e-250;
        }
    }
    double scale = std::abs(j0) > std::abs(jm) ? j0 / hi : jm / cur;
    return result * scale;
}

double bessel_integer_miller(int order, double x) {
    int big = std::max(order, int(x) + 1);
    int top = 2 * ((big + 30 + int(std::sqrt(40.0 * big))) / 2);
    double hi = 0.0, cur = 1.0;
    double result = top == order ? cur : 0.0;
    double even_sum = top % 2 == 0 ? cur : 0.0;
    for (int k = top; k > 0; --k) {
        double lo = 2.0 * k / x * cur - hi;
        hi = cur;
        cur = lo;
        int idx = k - 1;
        if (idx == order) result = cur;
        if (idx > 0 && idx % 2 == 0) even_sum += cur;
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            hi *= 1e-250;
            result *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    return result / (cur + 2.0 * even_sum);
}

double bessel_hankel_asymptotic(double order, double x) {
    double mu = 4.0 * order * order;
    double p = 0.0, q = 0.0;
    double a = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 200; ++k) {
        double term = a / std::pow(x, k);
        if (std::abs(term) > last) break;
        last = std::abs(term);
        int r = k % 4;
        if (r == 0) p += term;
        else if (r == 1) q += term;
        else if (r == 2) p -= term;
        else q -= term;
        if (last < 1e-17) break;
        double odd = 2.0 * k + 1.0;
        a *= (mu - odd * odd) / ((k + 1.0) * 8.0);
    }
    double chi = x - (0.5 * order + 0.25) * kPi;
    return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

const SpecialFunctionTolerances& special_function_tolerances() {
    static const SpecialFunctionTolerances tol{};
    return tol;
}

Complex log_gamma(Complex z) {
    if (std::abs(z.imag()) < special_function_tolerances().pole_distance &&
        near_nonpositive_integer(z.real(), special_function_tolerances().pole_distance))
        throw PoleError("log_gamma: pole at z = " + std::to_string(z.real()));
    if (z.real() < 0.5) return std::log(kPi) - log_sin_pi(z) - lanczos_log_gamma(1.0 - z);
    return lanczos_log_gamma(z);
}

double abs_gamma_sq(double a, double b) {
    return std::exp(2.0 * log_gamma(Complex(a, b)).real());
}

double hyp2f1(double a, double b, double c, double x) {
    if (near_nonpositive_integer(c, special_function_tolerances().pole_distance))
        throw ParameterPole("hyp2f1: c is a non-positive integer");
    if (x > 0.0) throw DomainError("hyp2f1: only x <= 0 is supported");
    if (x == 0.0) return 1.0;
    double t = x / (x - 1.0);
    return std::pow(1.0 - x, -a) * hyp_series<double>(a, c - b, c, t);
}

Complex hyp2f1(Complex a, Complex b, double c, double x) {
    if (near_nonpositive_integer(c, special_function_tolerances().pole_distance))
        throw ParameterPole("hyp2f1: c is a non-positive integer");
    if (x > 0.0) throw DomainError("hyp2f1: only x <= 0 is supported");
    if (x == 0.0) return 1.0;
    double t = x / (x - 1.0);
    return std::exp(-a * std::log(1.0 - x)) * hyp_series<Complex>(a, c - b, c, t);
}

Complex legendre_p(Complex nu, double mu, double z) {
    if (!(z > 1.0)) throw DomainError("legendre_p: requires z > 1");
    if (near_nonpositive_integer(1.0 - mu, special_function_tolerances().pole_distance))
        throw ParameterPole("legendre_p: 1 - mu is a non-positive integer");
    double pref = std::pow((z + 1.0) / (z - 1.0), 0.5 * mu) / std::tgamma(1.0 - mu);
    return pref * hyp2f1(-nu, nu + 1.0, 1.0 - mu, 0.5 * (1.0 - z));
}

double bessel_j(double order, double x) {
    double twice = 2.0 * order;
    if (order < 0.0 || std::abs(twice - std::round(twice)) > 1e-12)
        throw UnsupportedOrder("bessel_j: order must be a non-negative multiple of 1/2");
    if (x < 0.0) throw DomainError("bessel_j: requires x >= 0");
    int twice_i = int(std::lround(twice));
    if (x == 0.0) return twice_i == 0 ? 1.0 : 0.0;
    if (twice_i % 2 == 1) return bessel_half_integer(order, x);
    int k = twice_i / 2;
    if (x > special_function_tolerances().bessel_asymptotic_x) return bessel_hankel_asymptotic(order, x);
    return bessel_integer_miller(k, x);
}

}  // namespace gjms
