#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "freemult/config.hpp"
#include "freemult/levy_hinchin.hpp"
#include "freemult/measure.hpp"

namespace freemult {

// One convolution-power run inside an experiment.
struct ExperimentRecord {
    int n = 0;
    double sup_distance = 0.0;  // to the target density on the run's grid
    double entropy = 0.0;       // circle runs; NaN elsewhere, -inf for atoms
    double residual = 0.0;      // max certified subordination residual
    double extra = 0.0;         // experiment-specific (bound radius, ...)
    bool clean = true;          // recovery finished without unreliable flags
};

struct ExperimentReport {
    std::string name;
    std::map<std::string, double> parameters;
    std::vector<ExperimentRecord> records;  // sorted by n
    std::vector<DensityProfile> profiles;   // one per record
    double final_sup = 0.0;
    double trend_slope = 0.0;  // least-squares slope of log sup vs log n
    std::string verdict;       // "pass" when the tail of sup_distance decreases

    std::string to_json() const;
    // report.json plus {name}_{n}.csv under dir
    void write(const std::string& dir) const;
};

enum class LambdaFamily { two_atom, exact };

// Free powers of a fixed circle law against the flat density 1/(2 pi);
// the extra column carries the containment-radius bound from the
// auxiliary function g(r) = (1+r) log r / (1-r).
ExperimentReport run_haar_superconvergence(const Measure& mu,
                                           std::span<const int> n_list,
                                           const Config& cfg = {});

// Free powers approaching the circle Brownian marginal at time t: the
// two-atom family (+-sqrt(t/n) rotations, the central-limit instance) or
// the exact semigroup roots.
ExperimentReport run_lambda_superconvergence(double t, std::span<const int> n_list,
                                             LambdaFamily family,
                                             const Config& cfg = {});

// Halfline analogue: chi_{t/n} powers against chi_t on the interior
// window [x1+eps, x2-eps]; extra carries the first-derivative sup.
ExperimentReport run_chi_superconvergence(double t, std::span<const int> n_list,
                                          double epsilon, const Config& cfg = {});

// Boolean-to-free correspondence: roots live purely in B-log space
// (parameters scaled by 1/n are exact there); the free n-fold power is
// compared against the free law with the same parameters, and extra
// carries the Boolean recombination error (should be rounding-level).
ExperimentReport run_bercovici_pata(double gamma, const SigmaMeasure& sigma,
                                    std::span<const int> n_list,
                                    const Config& cfg = {});

// Entropy along precomputed laws against the target's entropy.
ExperimentReport run_entropy_convergence(
    const std::vector<std::pair<int, Measure>>& laws, const Measure& target);

// Auxiliary containment bound: g(r) = (1+r) log r/(1-r) is increasing on
// (0,1) with range (-inf, -2); its inverse maps the exponent mass to a
// radius (1.0 when the bound is vacuous).
double containment_g(double r);
double containment_g_inverse(double x);

}  // namespace freemult
