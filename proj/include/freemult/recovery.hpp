#pragma once

#include <span>

#include "freemult/measure.hpp"
#include "freemult/transforms.hpp"

namespace freemult {

struct RecoveryOptions {
    int j_min = 4;   // dyadic boundary ladder 2^-j
    int j_max = 12;
    double atom_deficit_threshold = 1e-3;
};

// Density from boundary values of the resolvent expression
// -(1/pi) Im 1/((x+iy)[1 - eta(1/(x+iy))]) along y = 2^-j, with one level
// of Richardson extrapolation in y. Points whose extrapolation tail is not
// settling are flagged unreliable (value still reported).
DensityProfile stieltjes_density_halfline(const EtaEvaluator& eta,
                                          std::span<const double> xs,
                                          const RecoveryOptions& opts = {});

// Circle analogue from radial boundary values of
// (1/2pi) (1-|eta(r e^{-i theta})|^2)/|1 - eta(r e^{-i theta})|^2
// (the angle flip keeps callers in the measure's own coordinates).
DensityProfile poisson_density_circle(const EtaEvaluator& eta,
                                      std::span<const double> thetas,
                                      const RecoveryOptions& opts = {});

// Mass-deficit attribution: when the reliable part of the profile
// integrates below one, the missing mass is attributed to the node where
// the finest-level kernel blows up. `ambiguous` is set when no blow-up
// location accounts for the deficit.
struct AtomReport {
    std::vector<Atom> atoms;
    bool ambiguous = false;
    double deficit = 0.0;
    // profile nodes this close to an atom are shadows of its kernel peak,
    // not density; they are excluded from the mass audit
    double shadow_radius = 0.0;
};

AtomReport atom_report(const EtaEvaluator& eta, const DensityProfile& profile,
                       const RecoveryOptions& opts = {});

// Full recovery into a Measure: profile + atom report, density renormalized
// to close the mass-audit gap. Throws NumericError("mass-audit") when the
// total is off by more than the stated tolerance.
Measure measure_from_recovery(const EtaEvaluator& eta, std::span<const double> grid,
                              const RecoveryOptions& opts = {});

}  // namespace freemult
