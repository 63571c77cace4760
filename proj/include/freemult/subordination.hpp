#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "freemult/transforms.hpp"

namespace freemult {

struct FixedPointResult {
    cplx point;
    double residual;   // |F(w) - w| at the returned point
    int iterations;
};

// Attracting fixed point of an analytic self-map of the unit disc.
// Plain iteration from the seed, with averaged steps once plain iteration
// stalls and a local Newton acceleration once the residual is small (the
// plain rate degenerates for boundary-adjacent targets). Throws
// NumericError("non-convergence") after 10000 steps, carrying the last
// residual in the message.
FixedPointResult denjoy_wolff_solve(const std::function<cplx(cplx)>& selfmap,
                                    double tol, cplx seed = cplx(0.0, 0.0));

// Branch-tracked logarithm of a nonvanishing analytic function on a simply
// connected domain. Values are continued from cached anchors along straight
// segments with adaptive subdivision; the base anchor pins the branch.
// Instances memoize and are not safe to share across threads.
class AnalyticLog {
public:
    AnalyticLog(std::function<cplx(cplx)> f, cplx base_point, cplx base_log);
    cplx operator()(cplx w);

private:
    struct Anchor {
        cplx w, f, logf;
    };
    std::function<cplx(cplx)> f_;
    std::vector<Anchor> anchors_;

    Anchor continue_to(const Anchor& from, cplx target, int depth);
};

// A solved subordination problem: omega with its analytic left inverse Phi,
// certified by the sup of |Phi(omega(z)) - z| over the evaluation set.
// omega coincides with the eta transform of a freely infinitely divisible
// law, which is what makes the radial uniqueness argument available.
struct SubordinationSolution {
    EtaEvaluator omega;
    EtaEvaluator phi;
    double residual_sup = 0.0;
    int iterations_max = 0;
    int power = 0;  // k for the k-fold constructions, else 0
    Space space = Space::circle;
    std::vector<cplx> evaluation_set;
    std::vector<double> residuals;  // per evaluation point
    // exponent v with Phi(z) = z exp(v(z)), when the construction has one;
    // lets branch checks use the true argument instead of a principal alias
    std::function<cplx(cplx)> exponent;
    double arg_g_min = 0.0, arg_g_max = 0.0;  // circle powers: arg(omega/z) range

    std::string diagnostics_json() const;
};

struct InverseOptions {
    double fp_tol = 1e-12;        // fixed-point / Newton target
    double residual_tol = 1e-10;  // certification threshold
    int eval_points = 512;
    bool certify = true;
};

// Global inverse of Phi(z) = z exp(v(z)) on the disc, Re v >= 0. omega(z)
// is the fixed point of w -> z exp(-v(w)); the certification set sits at
// radius 1 - 2^-10.
SubordinationSolution global_inverse_circle(std::function<cplx(cplx)> exponent_v,
                                            const InverseOptions& opts = {});

// Global inverse of H(z) = z exp(E(z)) on the slit plane, E real on the
// negative axis: omega is computed by anchored Newton continuation (real
// anchors on the negative axis, then subdivided straight paths toward each
// target). The certification set is z = 1/(x+iy), x in the given range,
// with dyadic y.
SubordinationSolution global_inverse_halfline(
    std::function<cplx(cplx)> exponent, std::function<cplx(cplx)> exponent_prime,
    std::pair<double, double> certification_x_range, const InverseOptions& opts = {});

// omega solving H(omega(z)) = z with H(z) = z B_mu(z)^{k-1}.
SubordinationSolution power_subordination_halfline(const Measure& mu, int k,
                                                   const InverseOptions& opts = {});

// eta of the k-fold free power from its subordination function:
// z (omega(z)/z)^{k/(k-1)} with the principal power. Throws
// NumericError("branch") if omega(z)/z lands on the negative cut.
cplx eta_power_halfline(const SubordinationSolution& sol, int k, cplx z);

// Circle analogue via the two-fold convolution rho = mu x mu: inverts
// Phi(z) = z [B_rho(z)]^{(k-2)/2} globally. Requires m(mu) != 0 and k >= 3.
SubordinationSolution power_subordination_circle(const Measure& mu, int k,
                                                 const InverseOptions& opts = {});

// eta of the k-fold circle power: omega(z) [g(z)]^{2/(k-2)} with
// g = omega/z and the principal logarithm of g; verifies |arg g| < pi.
cplx eta_power_circle(const SubordinationSolution& sol, int k, cplx z);

// Default boundary-adjacent evaluation sets.
std::vector<cplx> circle_evaluation_set(int n, double radius = 1.0 - 1.0 / 1024.0);
std::vector<cplx> halfline_evaluation_set(double x_lo, double x_hi, int nx,
                                          int j_min = 4, int j_max = 12);

}  // namespace freemult
