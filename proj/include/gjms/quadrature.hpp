#pragma once

#include <functional>
#include <vector>

namespace gjms {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule with q nodes (cached).
const GaussRule& gauss_legendre(int q);

/// Composite Gauss-Legendre nodes/weights on the given breakpoints.
void composite_rule(const std::vector<double>& edges, int q, std::vector<double>& nodes,
                    std::vector<double>& weights);

/// Integral of f over [a, b] with a fixed composite rule of `panels` panels.
double integrate_composite(const std::function<double(double)>& f, double a, double b, int panels,
                           int q = 16);

struct AdaptiveOptions {
    double abs_tol = 1e-14;
    double rel_tol = 1e-12;
    int max_panels = 4000;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature; throws NonConvergence past the panel cap.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          const AdaptiveOptions& opt = {});

}  // namespace gjms
