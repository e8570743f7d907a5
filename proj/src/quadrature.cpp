#include "gjms/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>

#include "gjms/errors.hpp"

namespace gjms {

namespace {

GaussRule build_gauss_legendre(int q) {
    GaussRule rule;
    rule.nodes.resize(q);
    rule.weights.resize(q);
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (q == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[q - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[q - 1 - i] = w;
    }
    if (q % 2 == 1) rule.nodes[q / 2] = 0.0;
    return rule;
}

// Kronrod 15-point extension of Gauss 7.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod(const std::function<double(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double gauss = fc * kWg[3];
    double kron = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        double dx = h * kXgk[j];
        double f1 = f(c - dx), f2 = f(c + dx);
        kron += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace

const GaussRule& gauss_legendre(int q) {
    static std::map<int, GaussRule> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(q);
    if (it == cache.end()) it = cache.emplace(q, build_gauss_legendre(q)).first;
    return it->second;
}

void composite_rule(const std::vector<double>& edges, int q, std::vector<double>& nodes,
                    std::vector<double>& weights) {
    const GaussRule& g = gauss_legendre(q);
    nodes.clear();
    weights.clear();
    for (size_t p = 0; p + 1 < edges.size(); ++p) {
        double a = edges[p], b = edges[p + 1];
        double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (int i = 0; i < q; ++i) {
            nodes.push_back(c + h * g.nodes[i]);
            weights.push_back(h * g.weights[i]);
        }
    }
}

double integrate_composite(const std::function<double(double)>& f, double a, double b, int panels, int q) {
    const GaussRule& g = gauss_legendre(q);
    double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        double c = a + (p + 0.5) * h;
        double part = 0.0;
        for (int i = 0; i < q; ++i) part += g.weights[i] * f(c + 0.5 * h * g.nodes[i]);
        sum += 0.5 * h * part;
    }
    return sum;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opt) {
    std::priority_queue<Panel> heap;
    Panel first = kronrod(f, a, b);
    heap.push(first);
    double total = first.value, err = first.error;
    int panels = 1;
    while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        if (panels >= opt.max_panels)
            throw NonConvergence("integrate_adaptive: panel cap reached");
        Panel worst = heap.top();
        heap.pop();
        double m = 0.5 * (worst.a + worst.b);
        Panel left = kronrod(f, worst.a, m), right = kronrod(f, m, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++panels;
        if (err < 0.0) {
            // rounding drift: recompute from the heap
            err = 0.0;
            std::priority_queue<Panel> copy = heap;
            while (!copy.empty()) {
                err += copy.top().error;
                copy.pop();
            }
        }
    }
    return total;
}

}  // namespace gjms
