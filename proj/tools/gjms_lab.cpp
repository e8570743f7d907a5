// gjms-lab: batch driver for the hyperbolic Sobolev experiments.

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gjms/euclidean_bubbles.hpp"
#include "gjms/format.hpp"
#include "gjms/quotient_optimization.hpp"
#include "gjms/spectral_multipliers.hpp"
#include "gjms/spherical_analysis.hpp"
#include "json.hpp"

using json = nlohmann::json;
using namespace gjms;

namespace {

enum Exit { OK = 0, FAILURE = 1, INVALID = 2, IO = 3, FIT = 4 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& spec, const char* what) {
    std::vector<double> out;
    auto number = [&](const std::string& t) {
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(t, &pos);
        } catch (const std::exception&) {
            throw ParameterError(std::string(what) + ": cannot parse '" + t + "'");
        }
        if (pos != t.size() || !std::isfinite(v)) throw ParameterError(std::string(what) + ": cannot parse '" + t + "'");
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        for (std::string t; std::getline(ss, t, ':');) parts.push_back(t);
        if (parts.size() != 3) throw ParameterError(std::string(what) + ": expected start:stop:count");
        double a = number(parts[0]), b = number(parts[1]), c = number(parts[2]);
        if (c < 1 || c != std::floor(c)) throw ParameterError(std::string(what) + ": count must be a positive integer");
        int m = int(c);
        for (int i = 0; i < m; ++i) out.push_back(m == 1 ? a : (a * (m - 1 - i) + b * i) / (m - 1));
        return out;
    }
    std::stringstream ss(spec);
    for (std::string t; std::getline(ss, t, ',');)
        if (!t.empty()) out.push_back(number(t));
    if (out.empty()) throw ParameterError(std::string(what) + ": empty list");
    return out;
}

std::string started_at() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << content;
    f.close();
    if (!f) throw IoError("write to " + path + " failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

class Csv {
public:
    explicit Csv(const std::string& header) : text_(header + "\n") {}
    Csv& row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
        text_ += "\n";
        return *this;
    }
    const std::string& text() const { return text_; }

private:
    std::string text_;
};

std::string num(double v) { return format_number(v); }

json tolerances() {
    const auto& sp = spectral_tolerances();
    const auto& eu = euclidean_tolerances();
    json t;
    t["spectral_tail_fraction"] = sp.tail_fraction;
    t["euclidean_tail_fraction"] = eu.tail_fraction;
    t["euclidean_rho_cap"] = eu.rho_cap;
    t["bubble_rho_cut"] = eu.bubble_rho_cut;
    return t;
}

// Data files plus the manifest sidecar; the timestamp lives only in the manifest.
void emit(const std::string& command, const std::map<std::string, std::string>& params, const std::string& out,
          const std::string& csv, const json* summary) {
    write_file(out, csv);
    if (summary) write_file(out + ".summary.json", dump(*summary));
    json m;
    m["command"] = command;
    m["params"] = params;
    m["git_describe"] = git_describe();
    m["started_at"] = started_at();
    m["tolerances"] = tolerances();
    json files = json::array({out});
    if (summary) files.push_back(out + ".summary.json");
    m["data_files"] = files;
    write_file(out + ".manifest.json", dump(m));
    if (summary) std::cout << dump(*summary);
}

void check_writable(const std::string& out) {
    if (out.empty()) throw ParameterError("--out is required");
    std::ofstream f(out, std::ios::binary | std::ios::app);
    if (!f) throw IoError("cannot open " + out + " for writing");
}

// Appends config-file overrides for every flag not given on the command line.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::string path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ParameterError("--config needs a file");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (path.empty()) return kept;
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file " + path);
    auto given = [&](const std::string& key) {
        for (const auto& a : kept)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
        return false;
    };
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (!given(key)) {
            kept.push_back("--" + key);
            kept.push_back(value);
        }
    }
    return kept;
}

struct Options {
    int n = 3;
    double s = 1.0;
    std::string kind = "INTERTWINED";
    std::string out;
    // multiplier
    double beta_max = 50.0;
    int count = 101;
    // bubble-asymptotics
    double delta = 0.2;
    std::string eps = "0.1,0.05,0.025,0.0125";
    // gap-scan
    std::string lambda = "0";
    std::string family = "bubble";
    int knots = 12;
    double width = 8.0;
    bool envelope = false;
    int max_evals = 0;
    double tolerance = 1e-5;
    double eps_min = 0.01, eps_max = 0.5, delta_min = 0.02, delta_max = 0.249;
    // kernel-decay
    std::string r = "2,3,4,5,6";
    double eps_reg = 0.01;
    // blowdown
    double lambda_value = 0.0;
    std::string N = "4,16,64,256";
    double q = 0.0, C = 0.0, alpha = 0.0, R0 = -1.0;
};

Params params_of(const Options& o) {
    Params p{o.n, o.s};
    validate(p);
    return p;
}

std::map<std::string, std::string> base_params(const Options& o) {
    return {{"n", std::to_string(o.n)}, {"s", num(o.s)}};
}

int cmd_constants(const Options& o) {
    Params p = params_of(o);
    json j;
    j["n"] = p.n;
    j["s"] = p.s;
    j["lambda0"] = spectral_bottom(MultiplierKind::GJMS, p);
    j["lambda0_tilde"] = spectral_bottom(MultiplierKind::INTERTWINED, p);
    j["b"] = b_constant(p.s);
    j["gap"] = gap_constant(p.s);
    j["crit_exponent"] = p.crit_exponent();
    j["rho"] = p.rho();
    std::cout << dump(j);
    return OK;
}

int cmd_multiplier(const Options& o) {
    Params p = params_of(o);
    MultiplierKind kind = parse_multiplier_kind(o.kind);
    if (o.count < 2) throw ParameterError("--count must be at least 2");
    if (!(o.beta_max > 0.0)) throw ParameterError("--beta-max must be positive");
    check_writable(o.out);
    Csv csv("beta,value");
    for (int i = 0; i < o.count; ++i) {
        double beta = o.beta_max * i / (o.count - 1);
        csv.row({num(beta), num(multiplier(kind, p, beta))});
    }
    auto params = base_params(o);
    params["kind"] = to_string(kind);
    params["beta_max"] = num(o.beta_max);
    params["count"] = std::to_string(o.count);
    emit("multiplier", params, o.out, csv.text(), nullptr);
    return OK;
}

json window(double value, double target, double tol) {
    json j;
    j["slope"] = value;
    j["target"] = target;
    j["tolerance"] = tol;
    j["pass"] = std::abs(value - target) <= tol;
    return j;
}

int cmd_bubble_asymptotics(const Options& o) {
    Params p = params_of(o);
    std::vector<double> ladder = parse_list(o.eps, "--eps");
    if (ladder.size() < 4) throw ParameterError("--eps: at least four ladder entries are needed for the fits");
    for (double e : ladder)
        if (!(e > 0.0 && e < 1.0)) throw ParameterError("--eps: entries must lie in (0, 1)");
    if (!(o.delta > 0.0 && o.delta < 0.25)) throw ParameterError("--delta must lie in (0, 1/4)");
    check_writable(o.out);

    LadderResult crit = crit_mass_ladder(p, o.delta, ladder);
    LadderResult l2 = l2_mass_ladder(p, o.delta, ladder);
    LadderResult energy = energy_ladder(p, o.delta, ladder);

    Csv csv("eps,crit_mass,l2_mass,energy");
    for (std::size_t i = 0; i < ladder.size(); ++i)
        csv.row({num(ladder[i]), num(crit.values[i]), num(l2.values[i]), num(energy.values[i])});

    json summary;
    json jc = window(crit.fit.extrapolated, p.n, 0.3);
    jc["raw_slope"] = crit.fit.slope;
    summary["crit_mass"] = jc;

    json jl;
    double n4s = p.n - 4.0 * p.s;
    if (std::abs(n4s) < 1e-12) {
        std::vector<double> inc = log_regime_increments(l2, p.s);
        double lo = *std::min_element(inc.begin(), inc.end()), hi = *std::max_element(inc.begin(), inc.end());
        jl["regime"] = "log-corrected";
        jl["increments"] = inc;
        jl["spread"] = (hi - lo) / lo;
        jl["tolerance"] = 0.1;
        jl["pass"] = lo > 0.0 && hi <= 1.1 * lo;
        jl["raw_slope"] = l2.fit.slope;
    } else {
        double target = n4s > 0 ? 2.0 * p.s : p.n - 2.0 * p.s;
        jl = window(l2.fit.extrapolated, target, 0.05 * target);
        jl["regime"] = n4s > 0 ? "n > 4s" : "n < 4s";
        jl["raw_slope"] = l2.fit.slope;
    }
    summary["l2_mass"] = jl;

    double target = p.n - 2.0 * p.s;
    json je = window(energy.fit.extrapolated, target, 0.15 * target);
    je["raw_slope"] = energy.fit.slope;
    summary["energy"] = je;
    summary["n"] = p.n;
    summary["s"] = p.s;
    summary["delta"] = o.delta;

    auto params = base_params(o);
    params["delta"] = num(o.delta);
    params["eps"] = o.eps;
    emit("bubble-asymptotics", params, o.out, csv.text(), &summary);
    bool pass = jc["pass"].get<bool>() && jl["pass"].get<bool>() && je["pass"].get<bool>();
    if (!pass) throw FitFailure("a fitted rate is outside its window");
    return OK;
}

TrialFamily family_of(const Options& o) {
    FamilyKind fk = parse_family_kind(o.family);
    TrialFamily f = fk == FamilyKind::BUBBLE ? bubble_family() : spline_family(o.width, o.envelope, o.knots);
    if (o.max_evals > 0) f.max_evaluations = o.max_evals;
    f.eps_min = o.eps_min;
    f.eps_max = o.eps_max;
    f.delta_min = o.delta_min;
    f.delta_max = o.delta_max;
    f.delta_start = std::clamp(f.delta_start, o.delta_min, o.delta_max);
    if (!(o.tolerance > 0.0)) throw ParameterError("--tolerance must be positive");
    f.tolerance = o.tolerance;
    return f;
}

int cmd_gap_scan(const Options& o) {
    Params p = params_of(o);
    MultiplierKind kind = parse_multiplier_kind(o.kind);
    if (kind == MultiplierKind::REMAINDER) throw ParameterError("--kind must be GJMS or INTERTWINED");
    std::vector<double> grid = parse_list(o.lambda, "--lambda");
    TrialFamily fam = family_of(o);
    check_writable(o.out);
    double S = sharp_constant_estimate(p);
    std::vector<QuotientReport> rows = gap_scan(kind, p, grid, fam);
    Csv csv("lambda,quotient,margin_vs_Sest,trial_descriptor");
    for (const auto& r : rows)
        csv.row({num(r.lambda), num(r.quotient), num((r.quotient - S) / S), "\"" + r.trial_descriptor + "\""});
    auto params = base_params(o);
    params["kind"] = to_string(kind);
    params["lambda"] = o.lambda;
    params["family"] = to_string(fam.kind);
    params["max_evals"] = std::to_string(fam.max_evaluations);
    params["tolerance"] = num(fam.tolerance);
    if (fam.kind == FamilyKind::BUBBLE) {
        params["eps_min"] = num(fam.eps_min);
        params["eps_max"] = num(fam.eps_max);
        params["delta_min"] = num(fam.delta_min);
        params["delta_max"] = num(fam.delta_max);
    } else {
        params["knots"] = std::to_string(fam.knots);
        params["width"] = num(fam.width);
        params["envelope"] = fam.envelope ? "true" : "false";
    }
    emit("gap-scan", params, o.out, csv.text(), nullptr);
    return OK;
}

int cmd_kernel_decay(const Options& o) {
    Params p = params_of(o);
    MultiplierKind kind = parse_multiplier_kind(o.kind);
    std::vector<double> rs = parse_list(o.r, "--r");
    for (double r : rs)
        if (r < 0.5) throw ParameterError("--r: the kernel is evaluated only for r >= 0.5");
    if (!(o.eps_reg > 0.0)) throw ParameterError("--eps-reg must be positive");
    check_writable(o.out);
    std::vector<double> ks(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) ks[i] = regularized_kernel(kind, p, rs[i], o.eps_reg);
    Csv csv("r,k_eps,log_abs_k");
    for (std::size_t i = 0; i < rs.size(); ++i) csv.row({num(rs[i]), num(ks[i]), num(std::log(std::abs(ks[i])))});
    json summary;
    double slope = log_slope(rs, ks);
    summary["slope"] = slope;
    summary["target"] = -p.rho();
    summary["threshold"] = -0.8 * p.rho();
    summary["pass"] = slope <= -0.8 * p.rho();
    summary["eps_reg"] = o.eps_reg;
    auto params = base_params(o);
    params["kind"] = to_string(kind);
    params["r"] = o.r;
    params["eps_reg"] = num(o.eps_reg);
    emit("kernel-decay", params, o.out, csv.text(), &summary);
    if (!summary["pass"].get<bool>()) throw FitFailure("kernel decay slope above -0.8 rho");
    return OK;
}

int cmd_blowdown(const Options& o) {
    Params p = params_of(o);
    MultiplierKind kind = parse_multiplier_kind(o.kind);
    if (kind == MultiplierKind::REMAINDER) throw ParameterError("--kind must be GJMS or INTERTWINED");
    double bottom = spectral_bottom(kind, p);
    if (!(o.lambda_value > bottom))
        throw ParameterError("lambda = " + num(o.lambda_value) + " is not above the spectral bottom " + num(bottom) +
                             " of the " + to_string(kind) +
                             " operator: E(u) - lambda ||u||^2 >= 0 for every u if and only if lambda <= bottom, "
                             "so no negative-energy bump exists");
    std::vector<double> Ns = parse_list(o.N, "--N");
    std::vector<int> N_values;
    for (double v : Ns) {
        if (v < 1 || v != std::floor(v)) throw ParameterError("--N: bump counts must be positive integers");
        N_values.push_back(int(v));
    }
    check_writable(o.out);

    double q = o.q, C = o.C, alpha = o.alpha, width = 0.0;
    if (!(q > 0.0) || !(C > 0.0) || !(alpha > 0.0)) {
        BlowdownCalibration cal = calibrate_blowdown(kind, p, o.lambda_value);
        if (!(q > 0.0)) {
            q = cal.q;
            width = cal.trial_width;
        }
        if (!(C > 0.0)) C = cal.C;
        if (!(alpha > 0.0)) alpha = cal.alpha;
    }
    double R0 = o.R0 >= 0.0 ? o.R0 : blowdown_radius(q, C, alpha);
    std::vector<BlowdownRow> rows = multibump_blowdown(p, o.lambda_value, q, C, alpha, R0, N_values);

    Csv csv("N,R_N,bound,scaled_bound");
    std::vector<double> x, y;
    for (const auto& r : rows) {
        csv.row({std::to_string(r.N), num(r.R_N), num(r.bound), num(r.scaled_bound)});
        if (r.scaled_bound < 0.0) {
            x.push_back(std::log(double(r.N)));
            y.push_back(-r.scaled_bound);
        }
    }
    json summary;
    double target = 2.0 * p.s / p.n;
    summary["target"] = target;
    summary["q"] = q;
    summary["C"] = C;
    summary["alpha"] = alpha;
    summary["R0"] = R0;
    if (width > 0.0) summary["trial_width"] = width;
    bool pass = false;
    if (x.size() >= 2) {
        double slope = log_slope(x, y);
        summary["slope"] = slope;
        pass = std::abs(slope - target) <= 0.1 * target;
    } else {
        summary["slope"] = nullptr;
    }
    summary["pass"] = pass;
    auto params = base_params(o);
    params["kind"] = to_string(kind);
    params["lambda"] = num(o.lambda_value);
    params["N"] = o.N;
    if (o.q > 0.0) params["q"] = num(o.q);
    if (o.C > 0.0) params["C"] = num(o.C);
    if (o.alpha > 0.0) params["alpha"] = num(o.alpha);
    if (o.R0 >= 0.0) params["R0"] = num(o.R0);
    emit("blowdown", params, o.out, csv.text(), &summary);
    if (!pass) throw FitFailure("scaled bound slope outside 2s/n +- 10%");
    return OK;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config(args);
    } catch (const IoError& e) {
        std::cerr << "gjms-lab: " << e.what() << "\n";
        return IO;
    } catch (const std::exception& e) {
        std::cerr << "gjms-lab: " << e.what() << "\n";
        return INVALID;
    }

    CLI::App app{"Spectral and quotient experiments for GJMS operators on hyperbolic space"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* c) {
        c->add_option("--n", o.n, "dimension")->required();
        c->add_option("--s", o.s, "order")->required();
    };
    auto with_kind = [&](CLI::App* c) { c->add_option("--kind", o.kind, "GJMS, INTERTWINED or REMAINDER"); };
    auto with_out = [&](CLI::App* c) { c->add_option("--out", o.out, "CSV output path")->required(); };

    auto* constants = app.add_subcommand("constants", "spectral constants as JSON");
    common(constants);

    auto* mult = app.add_subcommand("multiplier", "multiplier table");
    common(mult);
    with_kind(mult);
    with_out(mult);
    mult->add_option("--beta-max", o.beta_max);
    mult->add_option("--count", o.count);

    auto* bub = app.add_subcommand("bubble-asymptotics", "cut-off bubble ladders and rate fits");
    common(bub);
    with_out(bub);
    bub->add_option("--delta", o.delta);
    bub->add_option("--eps", o.eps, "comma-separated ladder");

    auto* gap = app.add_subcommand("gap-scan", "minimised quotients along a lambda grid");
    common(gap);
    with_kind(gap);
    with_out(gap);
    gap->add_option("--lambda", o.lambda, "start:stop:count or a comma list");
    gap->add_option("--family", o.family, "bubble or spline");
    gap->add_option("--knots", o.knots);
    gap->add_option("--width", o.width);
    gap->add_option("--envelope", o.envelope);
    gap->add_option("--max-evals", o.max_evals);
    gap->add_option("--tolerance", o.tolerance);
    gap->add_option("--eps-min", o.eps_min);
    gap->add_option("--eps-max", o.eps_max);
    gap->add_option("--delta-min", o.delta_min);
    gap->add_option("--delta-max", o.delta_max);

    auto* ker = app.add_subcommand("kernel-decay", "regularised kernel against r");
    common(ker);
    with_kind(ker);
    with_out(ker);
    ker->add_option("--r", o.r, "start:stop:count or a comma list");
    ker->add_option("--eps-reg", o.eps_reg);

    auto* blow = app.add_subcommand("blowdown", "multi-bump bound above the spectral bottom");
    common(blow);
    with_kind(blow);
    with_out(blow);
    blow->add_option("--lambda", o.lambda_value)->required();
    blow->add_option("--N", o.N, "bump counts");
    blow->add_option("--q", o.q, "negative numerator per bump (measured when omitted)");
    blow->add_option("--C", o.C, "kernel constant (calibrated when omitted)");
    blow->add_option("--alpha", o.alpha, "decay rate (calibrated when omitted)");
    blow->add_option("--R0", o.R0, "base separation (from q, C, alpha when omitted)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "gjms-lab: " << e.what() << "\n";
        return INVALID;
    }

    try {
        if (*constants) return cmd_constants(o);
        if (*mult) return cmd_multiplier(o);
        if (*bub) return cmd_bubble_asymptotics(o);
        if (*gap) return cmd_gap_scan(o);
        if (*ker) return cmd_kernel_decay(o);
        if (*blow) return cmd_blowdown(o);
    } catch (const IoError& e) {
        std::cerr << "gjms-lab: " << e.what() << "\n";
        return IO;
    } catch (const FitFailure& e) {
        std::cerr << "gjms-lab: " << e.what() << "\n";
        return FIT;
    } catch (const ParameterError& e) {
        std::cerr << "gjms-lab: " << e.what() << "\n";
        return INVALID;
    } catch (const std::exception& e) {
        std::cerr << "gjms-lab: " << e.what() << "\n";
        return FAILURE;
    }
    return INVALID;
}
