#include "gjms/hyperbolic_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gjms/quadrature.hpp"

namespace gjms {

namespace {

double dot(const BallPoint& a, const BallPoint& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_in_ball(const BallPoint& x) {
    if (!(dot(x, x) < 1.0)) throw DomainError("point is not inside the unit ball");
}

}  // namespace

RadialGrid make_grid_from_edges(GridKind kind, const std::vector<double>& edges, int per_panel) {
    if (edges.size() < 2) throw ParameterError("grid needs at least one panel");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        if (!(edges[i + 1] > edges[i])) throw ParameterError("grid edges must increase");
    RadialGrid g;
    g.kind = kind;
    g.edges = edges;
    g.per_panel = per_panel;
    composite_rule(edges, per_panel, g.nodes, g.weights);
    return g;
}

RadialGrid make_grid(GridKind kind, double radius, double panel_width, int per_panel) {
    int panels = std::max(1, int(std::ceil(radius / panel_width - 1e-9)));
    std::vector<double> edges(panels + 1);
    for (int i = 0; i <= panels; ++i) edges[i] = radius * i / panels;
    return make_grid_from_edges(kind, edges, per_panel);
}

double RadialFunction::operator()(double r) const {
    if (r < 0.0 || r > support_radius || grid.edges.empty() || r > grid.edges.back()) return 0.0;
    auto it = std::upper_bound(grid.edges.begin(), grid.edges.end(), r);
    std::size_t panel = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - grid.edges.begin() - 1, 0),
                                              grid.edges.size() - 2);
    const int q = grid.per_panel;
    const double* x = grid.nodes.data() + panel * q;
    const double* y = values.data() + panel * q;
    double num = 0.0, den = 0.0;
    for (int j = 0; j < q; ++j) {
        double diff = r - x[j];
        if (diff == 0.0) return y[j];
        double wj = 1.0;
        for (int k = 0; k < q; ++k)
            if (k != j) wj /= (x[j] - x[k]);
        double t = wj / diff;
        num += t * y[j];
        den += t;
    }
    return num / den;
}

RadialFunction sample(const RadialGrid& grid, const std::function<double(double)>& f, double support_radius,
                      Space space) {
    RadialFunction out;
    out.grid = grid;
    out.support_radius = support_radius;
    out.space = space;
    out.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.values[i] = grid.nodes[i] <= support_radius ? f(grid.nodes[i]) : 0.0;
    return out;
}

double sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double integrate_power(const RadialFunction& f, int n, double power) {
    double sum = 0.0;
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        double v = f.values[i];
        if (v == 0.0) continue;
        double r = f.grid.nodes[i];
        double jac = f.space == Space::HYPERBOLIC ? std::pow(std::sinh(r), n - 1) : std::pow(r, n - 1);
        sum += f.grid.weights[i] * std::pow(std::abs(v), power) * jac;
    }
    return sphere_area(n) * sum;
}

double conformal_factor(const BallPoint& x) {
    check_in_ball(x);
    return 2.0 / (1.0 - dot(x, x));
}

BallPoint mobius(const BallPoint& y, const BallPoint& x) {
    if (x.size() != y.size()) throw DomainError("mobius: dimension mismatch");
    check_in_ball(x);
    check_in_ball(y);
    BallPoint d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
    double xx = dot(x, x), yy = dot(y, y), dd = dot(d, d);
    double den = 1.0 - 2.0 * dot(x, y) + xx * yy;
    BallPoint out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (dd * y[i] - (1.0 - yy) * d[i]) / den;
    return out;
}

double distance(const BallPoint& x, const BallPoint& y) {
    if (x.size() != y.size()) throw DomainError("distance: dimension mismatch");
    check_in_ball(x);
    check_in_ball(y);
    double dd = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dd += (x[i] - y[i]) * (x[i] - y[i]);
    // cosh d - 1 = 2 sinh^2(d/2)
    double sh = std::sqrt(dd / ((1.0 - dot(x, x)) * (1.0 - dot(y, y))));
    return 2.0 * std::asinh(sh);
}

double geodesic_radius(double t) { return 2.0 * std::atanh(t); }
double ball_radius(double r) { return std::tanh(0.5 * r); }

RadialFunction conformal_lift(const RadialFunction& w, const Params& p) {
    if (w.space != Space::EUCLIDEAN) throw DomainError("conformal_lift expects a Euclidean profile");
    if (!(w.support_radius < 1.0)) throw SupportError("conformal_lift: support must stay inside the unit ball");
    const int q = w.grid.per_panel;
    std::size_t panels = 0;
    while (panels + 1 < w.grid.edges.size() && w.grid.edges[panels] < w.support_radius) ++panels;
    panels = std::max<std::size_t>(panels, 1);
    if (!(w.grid.edges[panels] < 1.0)) {
        // the last needed panel crosses the boundary; only allowed when it carries no mass
        throw SupportError("conformal_lift: grid panel reaches the ball boundary");
    }
    RadialFunction u;
    u.space = Space::HYPERBOLIC;
    u.support_radius = geodesic_radius(w.support_radius);
    u.grid.kind = GridKind::HYPERBOLIC_GEODESIC;
    u.grid.per_panel = q;
    for (std::size_t k = 0; k <= panels; ++k) u.grid.edges.push_back(geodesic_radius(w.grid.edges[k]));
    const double expo = p.s - 0.5 * p.n;
    for (std::size_t i = 0; i < panels * q; ++i) {
        double t = w.grid.nodes[i];
        double phi = 2.0 / (1.0 - t * t);
        u.grid.nodes.push_back(geodesic_radius(t));
        u.grid.weights.push_back(w.grid.weights[i] * phi);
        u.values.push_back(std::pow(phi, expo) * w.values[i]);
    }
    return u;
}

}  // namespace gjms
