#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "freemult/measure.hpp"

namespace freemult {

// Marginal laws of free multiplicative Brownian motion: chi_t on the
// positive half-line, lambda_t on the unit circle. Densities come from the
// implicit boundary equations, solved by Newton continuation along the
// grid starting from a real anchor.

enum class BrownianFamily { chi, lambda };

struct BrownianLaw {
    BrownianFamily family = BrownianFamily::chi;
    double t = 1.0;
};

// Support endpoints [x1, x2] with x1*x2 = 1.
std::pair<double, double> chi_support(double t);

// Density of chi_t at x (zero outside the support interval).
double chi_density(double t, double x);
std::vector<double> chi_density_grid(double t, std::span<const double> xs);

struct LambdaSupport {
    double theta0 = 0.0;  // boundary-curve corner angle
    double theta1 = 0.0;  // half-width of the support arc
    bool full_circle = false;
};

// Support arc half-width; (pi, pi) with the full_circle flag for t > 4.
LambdaSupport lambda_support(double t);

// Density of lambda_t at e^{i theta} with respect to d(theta).
double lambda_density(double t, double theta);
std::vector<double> lambda_density_grid(double t, std::span<const double> thetas);

// Polar data (r, psi) of the eta-image of the support arc point e^{i theta},
// t in (0,4]; r increases to 1 and |psi| stays below theta0.
struct BoundaryPoint {
    double r = 0.0;
    double psi = 0.0;
};
BoundaryPoint lambda_boundary_curve(double t, double theta);

// Sigma transforms: exp(t(1+z)/(2z-2)) for chi, exp(t(1+z)/(2-2z)) for
// lambda. z = 1 is a pole of the exponent.
cplx brownian_sigma(BrownianFamily family, double t, cplx z);

// Grid laws sampled from the closed-form densities (renormalized so the
// piecewise-linear interpolant carries mass one).
Measure chi_measure(double t, int grid_size = 2048);
Measure lambda_measure(double t, int grid_size = 2048);

// Quadrature with sqrt-type endpoint clustering, for densities that vanish
// like sqrt(x-a) at the ends of their support.
double integrate_sqrt_edges(double a, double b, int n,
                            const std::function<double(double)>& f);

}  // namespace freemult
