#pragma once

#include <functional>
#include <vector>

#include "gjms/errors.hpp"
#include "gjms/spectral_multipliers.hpp"

namespace gjms {

using BallPoint = std::vector<double>;

enum class GridKind { HYPERBOLIC_GEODESIC, EUCLIDEAN };
enum class Space { HYPERBOLIC, EUCLIDEAN };

/// Composite Gauss-Legendre grid. Nodes of panel k occupy indices [k*per_panel, (k+1)*per_panel).
struct RadialGrid {
    std::vector<double> nodes;
    std::vector<double> weights;  // for dr
    GridKind kind = GridKind::HYPERBOLIC_GEODESIC;
    std::vector<double> edges;
    int per_panel = 16;

    std::size_t size() const { return nodes.size(); }
    double radius() const { return edges.empty() ? 0.0 : edges.back(); }
};

RadialGrid make_grid(GridKind kind, double radius, double panel_width = 0.05, int per_panel = 16);
RadialGrid make_grid_from_edges(GridKind kind, const std::vector<double>& edges, int per_panel = 16);

/// Radial profile sampled on a grid; zero beyond support_radius.
struct RadialFunction {
    RadialGrid grid;
    std::vector<double> values;
    double support_radius = 0.0;
    Space space = Space::HYPERBOLIC;

    /// Panel-wise polynomial interpolation of the samples.
    double operator()(double r) const;
};

RadialFunction sample(const RadialGrid& grid, const std::function<double(double)>& f, double support_radius,
                      Space space);

/// Surface area of the unit sphere in R^n.
double sphere_area(int n);

/// Integral of |f|^power over H^n (geodesic polar) or R^n, according to f.space.
double integrate_power(const RadialFunction& f, int n, double power);

double conformal_factor(const BallPoint& x);
BallPoint mobius(const BallPoint& y, const BallPoint& x);
double distance(const BallPoint& x, const BallPoint& y);

/// u = phi^{s - n/2} w on the geodesic grid r = log((1+t)/(1-t)).
RadialFunction conformal_lift(const RadialFunction& w, const Params& p);

/// Geodesic radius of the Euclidean ball radius t and its inverse.
double geodesic_radius(double t);
double ball_radius(double r);

}  // namespace gjms
