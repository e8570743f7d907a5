#include "gjms/spectral_multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gjms/special_functions.hpp"

namespace gjms {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_integer(double s) { return std::abs(s - std::round(s)) < 1e-14; }

double gjms_gamma_ratio(double s, double beta) {
    Complex num = log_gamma({(3.0 + 2.0 * s) / 4.0, 0.5 * beta});
    Complex den = log_gamma({(3.0 - 2.0 * s) / 4.0, 0.5 * beta});
    return std::exp(2.0 * s * std::log(2.0) + 2.0 * (num.real() - den.real()));
}

}  // namespace

void validate(const Params& p) {
    if (p.n < 2) throw ParameterError("dimension n must be at least 2");
    if (!(p.s > 0.0) || !(p.s < 0.5 * p.n))
        throw ParameterError("order s must satisfy 0 < s < n/2");
}

std::string to_string(MultiplierKind kind) {
    switch (kind) {
        case MultiplierKind::GJMS: return "gjms";
        case MultiplierKind::INTERTWINED: return "intertwined";
        case MultiplierKind::REMAINDER: return "remainder";
    }
    return "unknown";
}

MultiplierKind parse_multiplier_kind(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "gjms") return MultiplierKind::GJMS;
    if (lower == "intertwined") return MultiplierKind::INTERTWINED;
    if (lower == "remainder") return MultiplierKind::REMAINDER;
    throw ParameterError("unknown multiplier kind: " + name);
}

double sin_pi(double x) {
    // reduce to [-1, 1) using the period 2
    double r = std::fmod(x, 2.0);
    if (r < -1.0) r += 2.0;
    if (r >= 1.0) r -= 2.0;
    if (r == 0.0 || r == -1.0) return 0.0;
    if (r == 0.5) return 1.0;
    if (r == -0.5) return -1.0;
    return std::sin(kPi * r);
}

bool is_exceptional_order(double s) {
    double k = (s - 1.5) / 2.0;
    return k > -1e-12 && std::abs(k - std::round(k)) < 1e-12;
}

double intertwined_gamma_ratio(double s, double beta) {
    Complex num = log_gamma({s + 0.5, beta});
    Complex den = log_gamma({0.5, beta});
    return std::exp(2.0 * (num.real() - den.real()));
}

double multiplier(MultiplierKind kind, const Params& p, double beta) {
    double s = p.s;
    switch (kind) {
        case MultiplierKind::INTERTWINED:
            if (is_integer(s)) return integer_multiplier(int(std::lround(s)), beta);
            return intertwined_gamma_ratio(s, beta);
        case MultiplierKind::REMAINDER: {
            double sn = sin_pi(s);
            if (sn == 0.0) return 0.0;
            return sn / kPi * abs_gamma_sq(s + 0.5, beta);
        }
        case MultiplierKind::GJMS:
            // integer orders: the two operators coincide and the product form is exact
            if (is_integer(s)) return integer_multiplier(int(std::lround(s)), beta);
            if (is_exceptional_order(s))
                return multiplier(MultiplierKind::INTERTWINED, p, beta) +
                       multiplier(MultiplierKind::REMAINDER, p, beta);
            return gjms_gamma_ratio(s, beta);
    }
    return 0.0;
}

namespace {

// Gamma(s + 1/2)^2 / pi, exact product at integer s
double bottom_factor(double s) {
    if (is_integer(s)) return integer_multiplier(int(std::lround(s)), 0.0);
    double g = std::tgamma(s + 0.5);
    return g * g / kPi;
}

}  // namespace

double spectral_bottom(MultiplierKind kind, const Params& p) {
    double s = p.s;
    switch (kind) {
        case MultiplierKind::INTERTWINED:
            return bottom_factor(s);
        case MultiplierKind::GJMS:
            if (is_integer(s)) return integer_multiplier(int(std::lround(s)), 0.0);
            if (is_exceptional_order(s)) return 0.0;
            return gjms_gamma_ratio(s, 0.0);
        case MultiplierKind::REMAINDER:
            break;
    }
    throw ParameterError("spectral_bottom is defined for GJMS and INTERTWINED only");
}

double b_constant(double s) { return std::max(0.0, sin_pi(s)) * bottom_factor(s); }

double gap_constant(double s) {
    double sn = sin_pi(s);
    if (sn > 0.0) return bottom_factor(s);
    return (1.0 + sn) * bottom_factor(s);
}

double integer_multiplier(int k, double beta) {
    if (k < 1) throw ParameterError("integer_multiplier requires k >= 1");
    double b2 = beta * beta, prod = 1.0;
    for (int j = 1; j <= k; ++j) prod *= b2 + (j - 0.5) * (j - 0.5);
    return prod;
}

double verify_decomposition(const Params& p, double beta_max, int count) {
    if (!(beta_max > 0.0) || count < 2) throw ParameterError("verify_decomposition: need beta_max > 0, count >= 2");
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
        double beta = i * beta_max / (count - 1);
        double m = multiplier(MultiplierKind::GJMS, p, beta);
        double mt = multiplier(MultiplierKind::INTERTWINED, p, beta);
        double rem = multiplier(MultiplierKind::REMAINDER, p, beta);
        worst = std::max(worst, std::abs(m - mt - rem) / (1.0 + m));
    }
    return worst;
}

}  // namespace gjms
