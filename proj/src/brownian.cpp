#include "freemult/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "freemult/errors.hpp"

namespace freemult {

namespace {

struct NewtonOut {
    cplx root;
    double residual;
    bool ok;
};

// Damped Newton on an analytic scalar equation. `scale` supplies the local
// magnitude of the equation's terms so termination is relative: equations
// like (z-1)e^{tz/2} = ... have values far above rounding noise at large t.
template <typename F, typename DF, typename S>
NewtonOut newton(F&& f, DF&& df, S&& scale, cplx seed, double rtol,
                 int maxit = 80) {
    cplx w = seed;
    auto nres = [&](cplx u) { return std::abs(f(u)) / scale(u); };
    double res = nres(w);
    for (int it = 0; it < maxit && res > rtol; ++it) {
        cplx d = df(w);
        if (std::abs(d) < 1e-300) return {w, res, false};
        cplx step = f(w) / d;
        double lambda = 1.0;
        bool improved = false;
        for (int h = 0; h < 50; ++h) {
            cplx trial = w - lambda * step;
            double r2 = nres(trial);
            if (r2 < res) {
                w = trial;
                res = r2;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    return {w, res, res <= rtol};
}

// chi_t boundary equation: z exp(t(z - 1/2)) = x (z - 1), root in C+.
cplx chi_equation_root(double t, double x, cplx seed, bool* ok = nullptr) {
    auto f = [&](cplx z) { return z * std::exp(t * (z - 0.5)) - x * (z - 1.0); };
    auto df = [&](cplx z) { return std::exp(t * (z - 0.5)) * (1.0 + t * z) - x; };
    auto sc = [&](cplx z) {
        return std::abs(z * std::exp(t * (z - 0.5))) + x * std::abs(z - 1.0) + 1.0;
    };
    auto r = newton(f, df, sc, seed, 1e-13);
    if (ok) *ok = r.ok;
    return r.root;
}

// Anchor root at an interior point, found by a deterministic seed sweep.
cplx chi_anchor(double t, double x) {
    double scale = 1.0 + 1.0 / std::sqrt(t);
    for (double im : {0.5 * scale, scale, 0.1 * scale, 2.0 * scale, 4.0 * scale})
        for (double re : {0.25, 1.0, -0.5, 2.0, -2.0, 0.0}) {
            bool ok = false;
            cplx z = chi_equation_root(t, x, cplx(re, im), &ok);
            if (ok && z.imag() > 1e-10) return z;
        }
    throw NumericError("root-tracking",
                       "no interior anchor root for the chi boundary equation (t=" +
                           format_double(t) + ", x=" + format_double(x) + ")");
}

// lambda_t boundary equation: (z-1) exp(tz/2) = (z+1) xi, root with Re z > 0.
cplx lambda_equation_root(double t, cplx xi, cplx seed, bool* ok = nullptr) {
    auto f = [&](cplx z) { return (z - 1.0) * std::exp(0.5 * t * z) - (z + 1.0) * xi; };
    auto df = [&](cplx z) {
        return std::exp(0.5 * t * z) * (1.0 + 0.5 * t * (z - 1.0)) - xi;
    };
    auto sc = [&](cplx z) {
        return std::abs((z - 1.0) * std::exp(0.5 * t * z)) + std::abs(z + 1.0) + 1.0;
    };
    auto r = newton(f, df, sc, seed, 1e-13);
    if (ok) *ok = r.ok;
    return r.root;
}

// Real anchor at xi = 1: bracket in (1, inf) and bisect.
double lambda_anchor(double t) {
    auto g = [&](double z) { return (z - 1.0) * std::exp(0.5 * t * z) - (z + 1.0); };
    double lo = 1.0, hi = 2.0;
    while (g(hi) < 0.0 && hi < 1e4) hi *= 2.0;
    if (g(hi) < 0.0)
        throw NumericError("root-tracking", "lambda anchor bracket failed");
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::pair<double, double> chi_support(double t) {
    if (!(t > 0.0)) throw ValidationError("chi_support: t must be > 0");
    double s = 0.5 * std::sqrt(t * (t + 4.0));
    double x1 = (1.0 + 0.5 * t - s) * std::exp(-s);
    return {x1, 1.0 / x1};
}

std::vector<double> chi_density_grid(double t, std::span<const double> xs) {
    if (!(t > 0.0)) throw ValidationError("chi_density: t must be > 0");
    auto [x1, x2] = chi_support(t);
    std::vector<double> out(xs.size(), 0.0);
    std::vector<std::size_t> idx;  // indices strictly inside the support
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0)) throw ValidationError("chi_density: x must be > 0");
        if (xs[i] > x1 && xs[i] < x2) idx.push_back(i);
    }
    if (idx.empty()) return out;
    // anchor at the interior point closest to the geometric center, then
    // track the root outwards using the neighbor root as the Newton seed
    std::size_t apos = 0;
    for (std::size_t p = 0; p < idx.size(); ++p)
        if (std::abs(std::log(xs[idx[p]])) < std::abs(std::log(xs[idx[apos]])))
            apos = p;
    cplx root = chi_anchor(t, xs[idx[apos]]);
    // z = 1/(1 - eta(1/x)) turns the Stieltjes boundary value into
    // Im z/(pi x); the mass-one check pins the constant.
    auto density = [](cplx z, double x) {
        return std::max(z.imag(), 0.0) / (kPi * x);
    };
    out[idx[apos]] = density(root, xs[idx[apos]]);
    auto track_one = [&](cplx seed, double x) {
        bool ok = false;
        cplx z = chi_equation_root(t, x, seed, &ok);
        if (!ok || z.imag() < -1e-8) {
            z = chi_anchor(t, x);  // fresh sweep as a one-shot retry
        }
        return z;
    };
    cplx seed = root;
    for (std::size_t p = apos + 1; p < idx.size(); ++p) {
        seed = track_one(seed, xs[idx[p]]);
        out[idx[p]] = density(seed, xs[idx[p]]);
    }
    seed = root;
    for (std::size_t p = apos; p-- > 0;) {
        seed = track_one(seed, xs[idx[p]]);
        out[idx[p]] = density(seed, xs[idx[p]]);
    }
    return out;
}

double chi_density(double t, double x) {
    auto [x1, x2] = chi_support(t);
    if (!(x > 0.0)) throw ValidationError("chi_density: x must be > 0");
    if (!(x > x1 && x < x2)) return 0.0;
    // short continuation path from the geometric center down to x
    int steps = 64;
    std::vector<double> path(steps + 1);
    for (int i = 0; i <= steps; ++i)
        path[i] = std::pow(x, double(i) / steps);
    return chi_density_grid(t, path).back();
}

LambdaSupport lambda_support(double t) {
    if (!(t > 0.0)) throw ValidationError("lambda_support: t must be > 0");
    if (t > 4.0) return LambdaSupport{kPi, kPi, true};
    double th0 = std::acos(1.0 - 0.5 * t);
    double th1 = th0 + std::sqrt(t - 0.25 * t * t);
    return LambdaSupport{th0, std::min(th1, kPi), false};
}

std::vector<double> lambda_density_grid(double t, std::span<const double> thetas) {
    if (!(t > 0.0)) throw ValidationError("lambda_density: t must be > 0");
    LambdaSupport sup = lambda_support(t);
    std::vector<double> out(thetas.size(), 0.0);
    // roots for -theta are conjugates, so track |theta| in increasing order
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        double a = std::abs(thetas[i]);
        if (a > kPi + 1e-9)
            throw ValidationError("lambda_density: angle outside (-pi, pi]");
        if (sup.full_circle || a < sup.theta1)
            order.emplace_back(std::min(a, kPi), i);
    }
    if (order.empty()) return out;
    std::sort(order.begin(), order.end());
    cplx seed = cplx(lambda_anchor(t), 0.0);
    double prev = 0.0;
    for (auto& [ang, i] : order) {
        int nstep = std::max(1, int((ang - prev) / 0.02) + 1);
        cplx z = seed;
        for (int s = 1; s <= nstep; ++s) {
            double th = prev + (ang - prev) * double(s) / nstep;
            bool ok = false;
            z = lambda_equation_root(t, std::polar(1.0, th), z, &ok);
            if (!ok)
                throw NumericError("root-tracking",
                                   "lambda root tracking failed near theta=" +
                                       format_double(th));
        }
        seed = z;
        prev = ang;
        out[i] = std::max(z.real(), 0.0) / kTwoPi;
    }
    return out;
}

double lambda_density(double t, double theta) {
    double xs[1] = {theta};
    return lambda_density_grid(t, xs)[0];
}

BoundaryPoint lambda_boundary_curve(double t, double theta) {
    if (!(t > 0.0 && t <= 4.0))
        throw ValidationError("boundary curve: t must lie in (0, 4]");
    LambdaSupport sup = lambda_support(t);
    if (!(std::abs(theta) < sup.theta1))
        throw ValidationError("boundary curve: theta outside the open support arc");
    // density root mapped through (z-1)/(z+1) gives the eta image point
    double a = std::abs(theta);
    cplx z = cplx(lambda_anchor(t), 0.0);
    int nstep = std::max(1, int(a / 0.02) + 1);
    for (int s = 1; s <= nstep; ++s) {
        double th = a * double(s) / nstep;
        bool ok = false;
        z = lambda_equation_root(t, std::polar(1.0, th), z, &ok);
        if (!ok)
            throw NumericError("root-tracking", "boundary-curve root tracking failed");
    }
    if (theta < 0.0) z = std::conj(z);
    cplx etaVal = (z - 1.0) / (z + 1.0);
    double r = std::abs(etaVal), psi = std::arg(etaVal);
    double lhs = t * (r * r - 1.0);
    double rhs = 2.0 * std::log(r) * (1.0 - 2.0 * r * std::cos(psi) + r * r);
    if (std::abs(lhs - rhs) > 1e-7 * (1.0 + std::abs(lhs)))
        throw NumericError("root-tracking", "boundary relation residual too large");
    return BoundaryPoint{r, psi};
}

cplx brownian_sigma(BrownianFamily family, double t, cplx z) {
    if (!(t > 0.0)) throw ValidationError("brownian_sigma: t must be > 0");
    if (std::abs(z - 1.0) < 1e-14)
        throw ValidationError("brownian_sigma: z = 1 is a pole of the exponent");
    cplx num = t * (1.0 + z);
    return (family == BrownianFamily::chi) ? std::exp(num / (2.0 * z - 2.0))
                                           : std::exp(num / (2.0 - 2.0 * z));
}

namespace {

// Node layout clustered at both support ends, where the densities vanish
// like sqrt and a plain grid wastes its interpolation budget.
double edge_cluster(double u) { return u - std::sin(kTwoPi * u) / kTwoPi; }

}  // namespace

Measure chi_measure(double t, int grid_size) {
    auto [x1, x2] = chi_support(t);
    std::vector<double> nodes(grid_size);
    double span = std::log(x2 / x1);
    for (int i = 0; i < grid_size; ++i)
        nodes[i] = x1 * std::exp(span * edge_cluster(double(i) / (grid_size - 1)));
    nodes.back() = x2;
    auto vals = chi_density_grid(t, nodes);
    return Measure::from_density(Space::halfline, nodes, vals,
                                 "chi t=" + format_double(t), true);
}

Measure lambda_measure(double t, int grid_size) {
    LambdaSupport sup = lambda_support(t);
    std::vector<double> nodes;
    if (sup.full_circle || sup.theta1 >= kPi - 1e-12) {
        nodes = uniform_circle_grid(grid_size);
    } else {
        nodes.resize(grid_size);
        for (int i = 0; i < grid_size; ++i)
            nodes[i] = -sup.theta1 +
                       2.0 * sup.theta1 * edge_cluster(double(i) / (grid_size - 1));
        nodes.back() = sup.theta1;
    }
    auto vals = lambda_density_grid(t, nodes);
    return Measure::from_density(Space::circle, nodes, vals,
                                 "lambda t=" + format_double(t), true);
}

double integrate_sqrt_edges(double a, double b, int n,
                            const std::function<double(double)>& f) {
    // x = a + (b-a) sin^2(pi u/2) clusters nodes at both ends, flattening
    // sqrt-type edge behavior into a smooth integrand in u
    double acc = 0.0;
    for (int i = 1; i < n; ++i) {
        double u = double(i) / n;
        double s = std::sin(0.5 * kPi * u);
        double x = a + (b - a) * s * s;
        double w = (b - a) * 0.5 * kPi * std::sin(kPi * u);
        acc += f(x) * w;
    }
    return acc / n;  // endpoints carry zero weight
}

}  // namespace freemult
