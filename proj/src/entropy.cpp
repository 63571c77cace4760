#include "freemult/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "freemult/errors.hpp"

namespace freemult {

EntropyResult free_entropy(const Measure& mu) {
    mu.validate();
    if (mu.space != Space::circle)
        throw ValidationError("free_entropy: circle measure required");
    for (const auto& a : mu.atoms)
        if (a.mass >= 1e-6)
            return EntropyResult{-std::numeric_limits<double>::infinity(), false, 0};

    // -sum |m_k|^2/k, stopping when the harmonic-weighted tail bound
    // |m_K|^2 log(K_max/K) falls below 1e-8
    const int cap = 4096;
    double acc = 0.0;
    double mk2 = 1.0;
    int k = 0;
    while (k < cap) {
        ++k;
        mk2 = std::norm(moment(mu, k));
        acc -= mk2 / k;
        if (k >= 8) {
            double tail = mk2 * std::log(double(cap) / k);
            if (tail < 1e-8) break;
        }
    }
    EntropyResult out;
    out.value = acc;
    out.terms = k;
    out.reduced_precision = (k == cap) && (mk2 * 1.0 > 1e-8);
    return out;
}

double free_entropy_quadrature(const Measure& mu, int resample) {
    mu.validate();
    if (mu.space != Space::circle)
        throw ValidationError("free_entropy: circle measure required");
    if (!mu.atoms.empty())
        throw ValidationError("free_entropy_quadrature: density-only measures");
    // resample the density onto a uniform grid
    const int n = resample;
    DensityProfile p;
    p.space = Space::circle;
    p.nodes = mu.density->nodes;
    p.values = mu.density->values;
    std::vector<double> f(n);
    const double h = kTwoPi / n;
    for (int i = 0; i < n; ++i) f[i] = p.interpolate(-kPi + h * (i + 0.5));

    // circular autocorrelation C(u_j) (periodic trapezoid = plain sum)
    std::vector<double> corr(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += f[i] * f[(i + j) % n];
        corr[j] = s * h;
    }
    // integral of C(u) log|2 sin(u/2)| du; the log factor integrates to
    // zero over the circle, so only the centered part contributes and the
    // u=0 singularity carries weight zero
    double acc = 0.0;
    for (int j = 1; j < n; ++j) {
        double u = h * j;
        acc += (corr[j] - corr[0]) * std::log(std::abs(2.0 * std::sin(0.5 * u))) * h;
    }
    return acc;
}

FlowEntropy entropy_of_flow(const std::function<Measure(double)>& family,
                            std::span<const double> times) {
    FlowEntropy out;
    double prev = std::numeric_limits<double>::infinity();
    for (double t : times) {
        double v = free_entropy(family(t)).value;
        out.values.emplace_back(t, v);
        if (std::abs(v) > prev + 1e-12) out.magnitude_decreasing = false;
        prev = std::abs(v);
    }
    return out;
}

}  // namespace freemult
