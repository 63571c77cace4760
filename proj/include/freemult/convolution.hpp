#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "freemult/measure.hpp"
#include "freemult/transforms.hpp"

namespace freemult {

struct SubordinationSolution;  // subordination.hpp
struct RecoveryOptions;        // recovery.hpp

// Pairwise subordination system for a two-fold free convolution,
// eta-evaluator level (no density recovery). omega1 solves the fixed point
// w -> z eta_nu(r(w))/r(w) with r(w) = z eta_mu(w)/w, and then
// eta(z) = eta_mu(omega1(z)), omega2 = r(omega1), omega1 omega2 = z eta.
// Instances keep a warm-start seed; not safe to share across threads.
class TwoFoldEta {
public:
    TwoFoldEta(std::shared_ptr<const PsiKernel> mu, std::shared_ptr<const PsiKernel> nu,
               double fp_tol = 1e-12);

    Space space() const { return space_; }
    cplx omega1(cplx z) const;
    cplx eta(cplx z) const;
    cplx eta_over_z(cplx z) const;
    cplx b(cplx z) const;  // z/eta with the origin limit
    // |omega1 omega2 - z eta| at z, for the product-identity check
    double identity_residual(cplx z) const;
    cplx mean() const { return mean_; }
    // First moment through the eta route (solves near the origin and
    // extrapolates); deliberately not the m(mu)m(nu) shortcut, so the
    // multiplicativity of means stays a checkable statement.
    cplx mean_from_eta() const;

private:
    std::shared_ptr<const PsiKernel> mu_, nu_;
    Space space_;
    double fp_tol_;
    cplx mean_;
    mutable cplx warm_seed_{0.0, 0.0};
    mutable bool warm_valid_ = false;

    cplx solve_omega1(cplx z) const;
};

// Result of a convolution: the measure (with recovered density and atom
// report) plus the eta evaluator it came from, which stays exact near the
// origin where density grids cannot be.
struct ConvolutionResult {
    Measure measure;
    EtaEvaluator eta;
    double identity_residual_sup = 0.0;  // two-fold ops: omega1 omega2 = z eta
    double subordination_residual_sup = 0.0;
    // First moment extracted from eta near the origin (dyadic Richardson),
    // exact to ~1e-9 where grid moments carry recovery error.
    cplx mean{0.0, 0.0};
    // subordination diagnostics JSON for the k >= 3 pipelines
    std::string diagnostics;
};

// Two-fold multiplicative free convolution on the circle. Both means must
// be nonzero; a zero mean raises ValidationError with the Haar guidance
// (the convolution with the Haar law is Haar).
ConvolutionResult free_convolve_circle(const Measure& mu, const Measure& nu,
                                       int grid_size = 2048);

// Halfline analogue: the same fixed-point scheme on the slit plane with
// pointwise self-map verification. Pairs for which the iteration leaves
// the domain raise NumericError("unsupported-pair").
ConvolutionResult free_convolve_halfline(const Measure& mu, const Measure& nu,
                                         int grid_size = 2048);

// Multiplicative Boolean convolution: eta(z) = eta_mu(z) eta_nu(z)/z on
// the circle (always defined) and via B = B_mu B_nu on the halfline, where
// the argument conditions are verified on a 256-point sample first.
ConvolutionResult boolean_convolve_circle(const Measure& mu, const Measure& nu,
                                          int grid_size = 2048);
ConvolutionResult boolean_convolve_halfline(const Measure& mu, const Measure& nu,
                                            int grid_size = 2048);

// k-fold free power: identity at k=1, the two-fold system at k=2, the
// subordination construction for k >= 3.
ConvolutionResult free_power(const Measure& mu, int k, int grid_size = 2048);

// k-fold Boolean power: eta_k(z) = z (eta(z)/z)^k (integer powers need no
// branch choice); the halfline result is checked against the argument
// bound before recovery.
ConvolutionResult boolean_power(const Measure& mu, int k, int grid_size = 2048);

// k-fold free power of a law given only through the exponent of its
// halfline B transform (log B = expo): H(z) = z exp((k-1) expo(z)).
// Used when the root law has no measure representation (B-log space).
ConvolutionResult free_power_from_b_exponent(std::function<cplx(cplx)> expo,
                                             std::function<cplx(cplx)> expo_prime,
                                             int k, int grid_size = 2048);

// Triangular array row: measures mu_n1..mu_nk with the scaling constant.
struct ArrayRow {
    std::vector<Measure> measures;
    double c_n = 1.0;

    int k_n() const { return int(measures.size()); }
    void validate() const;
};

// (1/c_n) prod_j B_{mu_nj}(z) evaluated in log space (sum of principal
// logs of the near-one factors). Throws NumericError("branch") if a factor
// lands on the negative cut.
cplx array_limit_transform(const ArrayRow& row, cplx z);

// The weak-convergence criterion data: the weighted pushforward measure
// sigma_n on [0, inf] (mass at infinity kept separately) and the centering
// constant gamma_n.
struct GnedenkoData {
    std::vector<Atom> sigma_atoms;          // finite positions
    std::optional<DensityGrid> sigma_density;
    double sigma_mass_at_inf = 0.0;
    double gamma_n = 0.0;

    double sigma_total() const;
};

GnedenkoData gnedenko_criterion(const ArrayRow& row);

}  // namespace freemult
