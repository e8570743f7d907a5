// Acceptance run: one PASS/FAIL line per criterion.
// With --ctest the exit status only reports crashes; otherwise it is the number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "gjms/euclidean_bubbles.hpp"
#include "gjms/quotient_optimization.hpp"
#include "gjms/spectral_multipliers.hpp"
#include "gjms/spherical_analysis.hpp"

using namespace gjms;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string sci(double v) { return fmt("%.3g", v); }

// composite Simpson on [a, b]
double simpson(const std::function<double(double)>& f, double a, double b, int m = 2000) {
    double h = (b - a) / m, s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

RadialFunction hyperbolic_bump(double R, double a) {
    auto f = [=](double r) {
        double t = r / R;
        if (t >= 1.0) return 0.0;
        return (1.0 + a * t * t) * std::exp(-1.0 / (1.0 - t * t));
    };
    return sample(make_grid(GridKind::HYPERBOLIC_GEODESIC, R, std::min(0.05, R / 20)), f, R, Space::HYPERBOLIC);
}

Outcome decomposition() {
    double worst = 0.0;
    for (Params p : {Params{3, 0.5}, Params{4, 0.75}, Params{5, 1.5}, Params{5, 2.3}})
        worst = std::max(worst, verify_decomposition(p, 50.0, 500));
    return {worst <= 1e-10, "max normalized error " + sci(worst) + " (limit 1e-10)"};
}

Outcome integer_collapse() {
    double worst = 0.0;
    for (int k : {1, 2, 3})
        for (int i = 0; i <= 500; ++i) {
            double beta = 0.1 * i, exact = integer_multiplier(k, beta);
            worst = std::max(worst, std::abs(intertwined_gamma_ratio(k, beta) - exact) / exact);
        }
    return {worst <= 1e-12, "max relative difference " + sci(worst) + " (limit 1e-12)"};
}

Outcome closed_constants() {
    double l0 = spectral_bottom(MultiplierKind::INTERTWINED, {3, 1.0});
    std::mt19937 gen(20240611);
    std::uniform_real_distribution<double> dist(0.0, 4.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        double s = dist(gen);
        Params p{10, s};
        worst = std::max(worst,
                         std::abs(gap_constant(s) - (spectral_bottom(MultiplierKind::GJMS, p) - b_constant(s))));
    }
    bool pass = std::abs(l0 - 0.25) <= 1e-12 && worst <= 1e-12;
    return {pass, "bottom(s=1) - 1/4 = " + sci(l0 - 0.25) + ", gap identity max " + sci(worst) + " (limits 1e-12)"};
}

Outcome plancherel() {
    double norm_err = 0.0, trip_err = 0.0;
    for (int n : {3, 4, 5})
        for (double w : {0.5, 0.8}) {
            double R = 7.0 * w;
            RadialFunction f = sample(make_grid(GridKind::HYPERBOLIC_GEODESIC, R, 0.1),
                                      [=](double r) { return std::exp(-r * r / (w * w)); }, R, Space::HYPERBOLIC);
            double lhs = integrate_power(f, n, 2.0);
            SpectralProfile F = spherical_transform_auto(f, n, [](double) { return 1.0; });
            double rhs = spectral_integral(F, n, [](double) { return 1.0; });
            norm_err = std::max(norm_err, std::abs(rhs - lhs) / lhs);
            RadialFunction back = inverse_spherical_transform(F, n, f.grid);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < f.values.size(); ++i) {
                double v = f.grid.weights[i] * std::pow(std::sinh(f.grid.nodes[i]), n - 1);
                num += v * std::pow(f.values[i] - back.values[i], 2);
                den += v * f.values[i] * f.values[i];
            }
            trip_err = std::max(trip_err, std::sqrt(num / den));
        }
    return {norm_err <= 1e-4 && trip_err <= 1e-3,
            "norm identity " + sci(norm_err) + " (limit 1e-4), round trip " + sci(trip_err) + " (limit 1e-3)"};
}

Outcome eigen_residual() {
    const double h = 1e-3;
    double worst = 0.0, closed = 0.0;
    for (int n : {3, 4, 5})
        for (double b : {0.5, 1.0, 3.0}) {
            double rho = 0.5 * (n - 1);
            for (int i = 0; i <= 4900; i += 7) {
                double r = 0.1 + 1e-3 * i;
                double fm = spherical_function(n, b, r - h), f0 = spherical_function(n, b, r),
                       fp = spherical_function(n, b, r + h);
                double res = (fp - 2 * f0 + fm) / (h * h) + (n - 1) / std::tanh(r) * (fp - fm) / (2 * h) +
                             (b * b + rho * rho) * f0;
                worst = std::max(worst, std::abs(res) / (1.0 + b * b));
                if (n == 3) closed = std::max(closed, std::abs(f0 - std::sin(b * r) / (b * std::sinh(r))));
            }
        }
    return {worst <= 1e-4 && closed <= 1e-8,
            "residual/(1+b^2) " + sci(worst) + " (limit 1e-4), n=3 closed form " + sci(closed) + " (limit 1e-8)"};
}

Outcome critical_mass() {
    const std::vector<double> ladder{0.2, 0.1, 0.05, 0.025};
    std::string detail;
    bool pass = true;
    for (Params p : {Params{3, 1.0}, Params{5, 1.0}}) {
        LadderResult r = crit_mass_ladder(p, 0.2, ladder);
        pass = pass && std::abs(r.fit.extrapolated - p.n) <= 0.3;
        detail += "n=" + std::to_string(p.n) + " slope " + fmt("%.3f", r.fit.extrapolated) + " (raw " +
                  fmt("%.3f", r.fit.slope) + "), ";
    }
    // 4 pi int_0^{pi/2} sin^2 cos^2 after r = tan(theta)
    double oracle = 4.0 * pi * simpson([](double t) { return std::pow(std::sin(t) * std::cos(t), 2); }, 0.0, pi / 2);
    double uncut = crit_mass_uncut({3, 1.0}, 0.1);
    double err = std::max(std::abs(uncut - oracle), std::abs(crit_mass_limit(3) - oracle));
    pass = pass && err <= 1e-6 && std::abs(oracle - pi * pi / 4) <= 1e-12;
    return {pass, detail + "n=3 limit vs oracle " + sci(err) + " (limit 1e-6)"};
}

Outcome l2_regimes() {
    const std::vector<double> ladder{0.1, 0.05, 0.025, 0.0125};
    LadderResult five = l2_mass_ladder({5, 1.0}, 0.2, ladder);
    LadderResult four = l2_mass_ladder({4, 1.0}, 0.2, ladder);
    LadderResult three = l2_mass_ladder({3, 1.0}, 0.2, ladder);
    std::vector<double> inc = log_regime_increments(four, 1.0);
    double lo = *std::min_element(inc.begin(), inc.end()), hi = *std::max_element(inc.begin(), inc.end());
    bool pass = std::abs(five.fit.extrapolated - 2.0) <= 0.1 && lo > 0.0 && (hi - lo) <= 0.1 * lo &&
                std::abs(three.fit.extrapolated - 1.0) <= 0.05;
    return {pass, "(5,1) slope " + fmt("%.3f", five.fit.extrapolated) + " (raw " + fmt("%.3f", five.fit.slope) +
                      "), (4,1) increment spread " + fmt("%.3f", (hi - lo) / lo) + ", (3,1) slope " +
                      fmt("%.3f", three.fit.extrapolated) + " (raw " + fmt("%.3f", three.fit.slope) + ")"};
}

Outcome energy_expansion() {
    const std::vector<double> ladder{0.2, 0.1, 0.05, 0.025};
    struct Case {
        Params p;
        double tol;
    };
    bool pass = true;
    std::string detail;
    for (Case c : {Case{{5, 1.0}, 0.10}, Case{{3, 0.75}, 0.15}, Case{{4, 1.0}, 0.10}}) {
        double target = c.p.n - 2.0 * c.p.s;
        double slope = energy_asymptotics_experiment(c.p, 0.2, ladder);
        pass = pass && std::abs(slope - target) <= c.tol * target;
        detail += "(" + std::to_string(c.p.n) + "," + fmt("%g", c.p.s) + ") " + fmt("%.3f", slope) + "/" +
                  fmt("%g", target) + ", ";
    }
    // 4 pi int_0^{pi/2} sin^4 after r = tan(theta)
    double oracle = 4.0 * pi * simpson([](double t) { return std::pow(std::sin(t), 4); }, 0.0, pi / 2);
    double E = bubble_energy({3, 1.0}).value;
    double rel = std::abs(E - oracle) / oracle;
    pass = pass && rel <= 1e-4;
    return {pass, detail + "E(U) vs Dirichlet oracle " + sci(rel) + " (limit 1e-4)"};
}

Outcome sobolev_floor() {
    bool pass = true;
    std::string detail;
    for (Params p : {Params{3, 1.0}, Params{5, 0.8}, Params{4, 0.75}}) {
        double S = sharp_constant_estimate(p), worst = 1e300;
        int trials = 0;
        auto record = [&](double q) {
            worst = std::min(worst, q / S - 1.0);
            ++trials;
        };
        for (double R : {0.5, 1.0, 2.0, 4.0})
            for (double a : {0.0, 2.0})
                record(sobolev_quotient(MultiplierKind::INTERTWINED, p, 0.0, hyperbolic_bump(R, a)).quotient);
        for (double e : {0.2, 0.1, 0.05, 0.02})
            for (double d : {0.1, 0.2}) record(bubble_quotient(MultiplierKind::INTERTWINED, p, 0.0, {e, d}).quotient);
        SplineModel model(p, 6, 4.0, false);
        for (const std::vector<double>& c : {std::vector<double>{1, 0, 0, 0, 0, 0}, {1, 0.5, 0.25, 0.1, 0.05, 0},
                                             {0, 1, 0, 0, 0, 0}, {1, -0.5, 0.3, -0.1, 0.05, -0.02}})
            record(model.evaluate(MultiplierKind::INTERTWINED, 0.0, c).quotient);
        pass = pass && trials >= 20 && worst >= -2e-3;
        detail += "(" + std::to_string(p.n) + "," + fmt("%g", p.s) + ") " + std::to_string(trials) +
                  " trials, min Q/S-1 " + sci(worst) + "; ";
    }
    return {pass, detail + "limit -2e-3"};
}

Outcome strict_gap() {
    Params p{5, 0.8};
    double S = sharp_constant_estimate(p);
    double l0 = spectral_bottom(MultiplierKind::INTERTWINED, p), b = b_constant(p.s);
    std::vector<double> grid{-1.0, 0.0, 0.1 * l0, 0.5 * l0, l0};
    std::vector<QuotientReport> rows = gap_scan(MultiplierKind::INTERTWINED, p, grid, bubble_family());
    bool floor = true, drops = true, monotone = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double margin = (S - rows[i].quotient) / S;
        if (grid[i] <= 0.0) floor = floor && margin <= 2e-3;
        if (grid[i] > 0.0) drops = drops && margin > 0.0;
        if (i > 0) monotone = monotone && rows[i].quotient <= rows[i - 1].quotient + 1e-6;
    }
    double m_int = (S - rows[3].quotient) / S;
    QuotientReport g = minimize_quotient(MultiplierKind::GJMS, p, 1.2 * b, bubble_family());
    double m_gjms = (S - g.quotient) / S;
    bool pass = floor && drops && monotone && m_int >= 1e-3 && m_gjms >= 1e-3;
    return {pass, "margin INTERTWINED at 0.5*bottom " + sci(m_int) + ", GJMS at 1.2*b " + sci(m_gjms) +
                      " (need 1e-3); floor at lambda<=0 " + (floor ? "holds" : "violated") + ", drop for lambda>0 " +
                      (drops ? "strict" : "missing") + ", monotone " + (monotone ? "yes" : "no")};
}

Outcome bottom_boundary() {
    Params p{5, 0.8};
    bool pass = true;
    std::string detail;
    SplineModel wide(p, 8, 40.0, true);
    TrialFamily sf = spline_family(40.0, true, 8);
    for (auto kind : {MultiplierKind::INTERTWINED, MultiplierKind::GJMS}) {
        double bottom = spectral_bottom(kind, p);
        QuotientReport bub = minimize_quotient(kind, p, bottom, bubble_family());
        QuotientReport spl = minimize_quotient(kind, bottom, wide, sf);
        QuotientReport above = minimize_quotient(kind, 1.05 * bottom, wide, sf);
        double nb = bub.numerator() / bub.energy, ns = spl.numerator() / spl.energy;
        pass = pass && nb >= -1e-6 && ns >= -1e-6 && above.numerator() < 0.0;
        detail += to_string(kind) + ": numerator/energy at bottom bubble " + sci(nb) + ", spline " + sci(ns) +
                  ", at 1.05*bottom " + sci(above.numerator() / above.energy) + "; ";
    }
    return {pass, detail + "limits >= -1e-6 and < 0"};
}

Outcome kernel_decay() {
    const std::vector<double> rs{2, 3, 4, 5, 6};
    bool pass = true;
    std::string detail;
    for (Params p : {Params{3, 0.6}, Params{5, 0.7}}) {
        double a = decay_rate_fit(MultiplierKind::INTERTWINED, p, rs, 0.01);
        double b = decay_rate_fit(MultiplierKind::INTERTWINED, p, rs, 0.005);
        double change = std::abs(b - a) / std::abs(a);
        pass = pass && a <= -0.8 * p.rho() && change <= 0.1;
        detail += "(" + std::to_string(p.n) + "," + fmt("%g", p.s) + ") slope " + fmt("%.3f", a) + " vs " +
                  fmt("%.3f", -0.8 * p.rho()) + ", halving change " + sci(change) + "; ";
    }
    return {pass, detail + "limit 10%"};
}

Outcome blowdown_rate() {
    Params p{5, 0.8};
    BlowdownCalibration c = calibrate_blowdown(MultiplierKind::INTERTWINED, p, 0.3);
    std::vector<BlowdownRow> rows = multibump_blowdown(p, 0.3, c.q, c.C, c.alpha, c.R0, {4, 16, 64, 256});
    std::vector<double> x, y;
    for (const auto& r : rows) {
        x.push_back(std::log(double(r.N)));
        y.push_back(-r.scaled_bound);
    }
    double slope = log_slope(x, y), target = 2.0 * p.s / p.n;
    return {std::abs(slope - target) <= 0.1 * target,
            "slope " + fmt("%.4f", slope) + " vs 2s/n = " + fmt("%.4f", target) + " (10%)"};
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("gjms_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    struct Run {
        std::string name, args;
        bool summary;
    };
    const std::vector<Run> runs{
        {"constants", "constants --n 5 --s 0.8", false},
        {"multiplier", "multiplier --kind GJMS --n 5 --s 0.8 --beta-max 50 --count 201", false},
        {"bubble", "bubble-asymptotics --n 5 --s 1", true},
        {"gap", "gap-scan --kind INTERTWINED --n 3 --s 1 --lambda=-0.5:0.2:3 --eps-min 0.02 --delta-max 0.1", false},
        {"kernel", "kernel-decay --kind INTERTWINED --n 3 --s 0.6 --r 2:6:5", true},
        {"blowdown", "blowdown --kind GJMS --n 5 --s 0.8 --lambda 0.45 --N 4,16,64,256", true},
    };
    bool pass = true;
    int files = 0;
    std::string bad;
    for (const auto& r : runs) {
        std::string out[2];
        for (int k = 0; k < 2; ++k) {
            std::string csv = (dir / (r.name + std::to_string(k) + ".csv")).string();
            std::string stdout_path = csv + ".stdout";
            std::string cmd = std::string(GJMS_CLI_PATH) + " " + r.args +
                              (r.name == "constants" ? "" : " --out " + csv) + " > " + stdout_path + " 2>&1";
            int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
                pass = false;
                bad += r.name + " exit ";
            }
            out[k] = slurp(stdout_path);
            if (r.name != "constants") out[k] += "\x1f" + slurp(csv);
            if (r.summary) out[k] += "\x1f" + slurp(csv + ".summary.json");
        }
        ++files;
        if (out[0] != out[1] || out[0].empty()) {
            pass = false;
            bad += r.name + " ";
        }
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    return {pass, std::to_string(files) + " subcommands re-run" + (bad.empty() ? ", all outputs byte-identical"
                                                                            : ", differing: " + bad)};
}

}  // namespace

int main(int argc, char** argv) {
    bool ctest = argc > 1 && std::string(argv[1]) == "--ctest";
    struct Criterion {
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"decomposition identity", decomposition},
        {"integer collapse", integer_collapse},
        {"closed-form constants", closed_constants},
        {"Plancherel round trip", plancherel},
        {"spherical eigen-ODE residual", eigen_residual},
        {"cut-off critical mass", critical_mass},
        {"L2 three regimes", l2_regimes},
        {"energy expansion", energy_expansion},
        {"sharp-inequality floor", sobolev_floor},
        {"strict gap", strict_gap},
        {"spectral-bottom boundary", bottom_boundary},
        {"kernel decay", kernel_decay},
        {"blow-down rate", blowdown_rate},
        {"determinism", determinism},
    };
    int failed = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", index - failed, index);
    return ctest ? 0 : failed;
}
