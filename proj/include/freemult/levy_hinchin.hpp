#pragma once

#include <optional>
#include <string>

#include "freemult/measure.hpp"
#include "freemult/recovery.hpp"
#include "freemult/subordination.hpp"
#include "freemult/transforms.hpp"

namespace freemult {

// Finite Borel measure for the integral representations: atoms + density
// like Measure but without the mass-one constraint, and with an explicit
// mass at infinity (used by the free halfline representation only).
struct SigmaMeasure {
    std::vector<Atom> atoms;
    std::optional<DensityGrid> density;
    double mass_at_inf = 0.0;

    double finite_mass() const;
    double total() const { return finite_mass() + mass_at_inf; }
    static SigmaMeasure point(double pos, double mass);
};

enum class Flavor { free_mult, boolean_mult };

// Parameters of an infinitely divisible law: (alpha, sigma) on the circle,
// (gamma, sigma) on the halfline.
struct LevyHinchinParams {
    Space space = Space::halfline;
    Flavor flavor = Flavor::free_mult;
    cplx alpha{1.0, 0.0};  // circle only, |alpha| = 1
    double gamma = 0.0;    // halfline only
    SigmaMeasure sigma;

    void validate() const;
};

LevyHinchinParams parse_params(const std::string& text);
std::string serialize_params(const LevyHinchinParams& params);

// Parameter arithmetic: convolution adds exponents.
LevyHinchinParams params_add(const LevyHinchinParams& a, const LevyHinchinParams& b);
LevyHinchinParams params_scale(const LevyHinchinParams& p, double factor);

// Nevanlinna integral gamma + int (1+xz)/(z-x) dsigma over [0, inf]; the
// mass at infinity contributes -z per unit mass (the continuous extension
// of the kernel to the compactified halfline). Im u <= 0 on C+.
cplx u_halfline(const LevyHinchinParams& params, cplx z);

// Boolean exponent: same integral over [0, inf) (no mass at infinity).
cplx v_halfline(const LevyHinchinParams& params, cplx z);

// Raw Nevanlinna integral gamma + int (1+xz)/(z-x) dsigma and its z
// derivative, for callers composing exponents directly (B-log space work).
cplx nevanlinna_transform(const SigmaMeasure& sigma, double gamma, cplx z);
cplx nevanlinna_transform_prime(const SigmaMeasure& sigma, cplx z);

// Sigma transform of the free law: alpha exp(Herglotz integral) on the
// circle, exp(u) on the halfline.
cplx sigma_transform_infdiv(const LevyHinchinParams& params, cplx z);

// B transform of the Boolean law: exp(v).
cplx b_transform_boolean(const LevyHinchinParams& params, cplx z);

// Radial monotonicity functional of a circle sigma: the integral
// (r^2-1) / (log r (1 - 2 r cos(theta+x) + r^2)) dsigma(x), strictly
// increasing in r on (0,1). Positions of sigma are angles.
double radial_h(const SigmaMeasure& sigma_on_circle, double theta, double r);

struct InfdivLaw {
    LevyHinchinParams params;
    EtaEvaluator eta;
    Measure measure;
    double subordination_residual_sup = 0.0;
    std::string diagnostics;  // inversion diagnostics JSON (free flavors)
};

// Build the law: invert Phi(z) = z Sigma(z) globally (free) or evaluate
// eta = z/B directly (Boolean), then recover the density.
InfdivLaw make_infdiv_law(const LevyHinchinParams& params, int grid_size = 2048,
                          const RecoveryOptions& ropts = {});

// Support bracket estimate for a halfline law given through its eta
// evaluator, by scanning boundary values at a moderate dyadic height.
std::pair<double, double> estimate_halfline_support(const EtaEvaluator& eta,
                                                    double lo_hint = 1e-4,
                                                    double hi_hint = 1e4);

// Samples the halfline argument bound pi > arg eta(z) >= arg z on a
// boundary-refining grid; throws NumericError("not-well-defined") on
// violation (candidate eta maps that do not describe a measure).
void verify_halfline_eta_bound(const std::function<cplx(cplx)>& eta_fn,
                               const std::string& context);

}  // namespace freemult
