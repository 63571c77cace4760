#pragma once

#include <functional>
#include <span>
#include <vector>

#include "freemult/measure.hpp"

namespace freemult {

struct EntropyResult {
    double value = 0.0;           // logarithmic energy; <= 0, -inf for atoms
    bool reduced_precision = false;  // moment cap hit with a visible tail
    int terms = 0;                // moments consumed
};

// Free entropy of a circle measure through the moment series
// -sum_{k>=1} |m_k|^2 / k, truncated when the harmonic-weighted tail is
// below 1e-8 (cap 4096). Any atom mass >= 1e-6 short-circuits to -inf.
EntropyResult free_entropy(const Measure& mu);

// Cross-check path: double quadrature of the logarithmic kernel via the
// autocorrelation of the density, with the singular factor integrated
// against the centered correlation (the full-circle log integral
// vanishes). Test oracle for the series path.
double free_entropy_quadrature(const Measure& mu, int resample = 2048);

struct FlowEntropy {
    std::vector<std::pair<double, double>> values;  // (t, entropy)
    bool magnitude_decreasing = true;
};

// Entropy along a family t -> Measure at the given times.
FlowEntropy entropy_of_flow(const std::function<Measure(double)>& family,
                            std::span<const double> times);

}  // namespace freemult
