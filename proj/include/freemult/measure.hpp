#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "freemult/numeric.hpp"

namespace freemult {

enum class Space { circle, halfline };

std::string space_name(Space s);

struct Atom {
    double pos = 0.0;   // circle: angle in (-pi, pi]; halfline: x >= 0
    double mass = 0.0;  // > 0
};

// Piecewise-linear density on a strictly increasing grid.
//
// Circle grids are periodic: the arc from the last node back to the first
// node (+2pi) is interpolated linearly as well, so laws supported on a
// sub-arc should carry zero values at the arc ends.
struct DensityGrid {
    std::vector<double> nodes;
    std::vector<double> values;
};

// A probability law on T or R+: atoms plus an absolutely continuous part.
struct Measure {
    Space space = Space::circle;
    std::vector<Atom> atoms;
    std::optional<DensityGrid> density;
    std::string label;

    bool has_density() const { return density && !density->nodes.empty(); }
    double atom_mass() const;
    double density_mass() const;
    double total_mass() const { return atom_mass() + density_mass(); }

    // Throws ValidationError when an invariant is broken (mass != 1,
    // negative values, grid out of range, duplicate atoms, ...).
    void validate() const;

    static Measure point_mass(Space space, double pos, const std::string& label = "");
    static Measure haar(int grid_size = 2048);
    // Builds a density-only measure; renormalizes to mass one when asked.
    static Measure from_density(Space space, std::vector<double> nodes,
                                std::vector<double> values,
                                const std::string& label = "",
                                bool renormalize = false);
};

// k-th moment. Circle: integral of xi^k, a complex number. Halfline:
// integral of x^k (imaginary part zero); +infinity when it overflows.
cplx moment(const Measure& mu, int k);

// Geometric mean of the restriction to [1/e, e]: exp of the log-integral,
// mass outside the window contributing nothing to the exponent.
double log_mean_b(const Measure& mu);

// Pushforward of a halfline measure under x -> x/b.
Measure scale_measure(const Measure& mu, double b);

// JSON round trip. parse_measure throws ValidationError naming the
// offending field on malformed documents.
Measure parse_measure(const std::string& text);
std::string serialize_measure(const Measure& mu);

// Sampled density with grid metadata; the unit of experiment output.
struct ProfileMeta {
    std::string law;
    std::map<std::string, double> params;
};

struct DensityProfile {
    Space space = Space::circle;
    std::vector<double> nodes;
    std::vector<double> values;
    std::vector<unsigned char> unreliable;  // empty or one flag per node
    double sup_error_estimate = 0.0;
    ProfileMeta meta;

    void validate() const;
    std::size_t unreliable_count() const;
    // Trapezoid mass of the profile; reliable_only skips flagged nodes.
    double mass(bool reliable_only = false) const;
    // Linear interpolation (0 outside the grid on the halfline; periodic
    // wrap on the circle).
    double interpolate(double pos) const;
    std::string to_csv() const;
    Measure to_measure(bool renormalize = false) const;
};

DensityProfile parse_profile_csv(const std::string& text);

// ------------------------------------------------------------------
// Grid builders shared across modules.
std::vector<double> uniform_circle_grid(int n);                  // angles in (-pi, pi]
std::vector<double> uniform_grid(double lo, double hi, int n);   // inclusive ends
std::vector<double> geometric_grid(double lo, double hi, int n); // inclusive ends

}  // namespace freemult
