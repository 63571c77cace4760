#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "freemult/measure.hpp"

namespace freemult {

enum class Domain { disc, slit_plane };
enum class TransformKind { psi, eta, b, sigma, phi, omega };
enum class Provenance { from_measure, from_levy_hinchin, from_subordination, composite };

// An evaluable analytic map (eta, psi, B, Sigma, Phi or omega) together
// with its domain tag and provenance.
struct EtaEvaluator {
    Domain domain = Domain::disc;
    TransformKind kind = TransformKind::eta;
    Provenance provenance = Provenance::from_measure;
    std::function<cplx(cplx)> eval;

    cplx operator()(cplx z) const { return eval(z); }
};

// Cached evaluator for the moment-generating transforms of one measure.
//
// psi(z) = integral of xz/(1-xz) dmu(x), with the density part integrated
// exactly against the piecewise-linear interpolant: cells are split until
// the kernel is smooth on their scale, then handled by Gauss panels. This
// keeps boundary-adjacent evaluations (|z| -> 1, or z -> the positive axis)
// honest where a plain node sum would under-resolve the kernel.
class PsiKernel {
public:
    explicit PsiKernel(const Measure& mu);

    Space space() const { return space_; }
    cplx mean() const { return mean_; }

    cplx psi(cplx z) const;
    cplx psi_prime(cplx z) const;
    cplx eta(cplx z) const;
    cplx eta_prime(cplx z) const;
    cplx b(cplx z) const;        // z/eta, extended by continuity at 0 (circle)
    cplx b_prime(cplx z) const;
    cplx eta_over_z(cplx z) const;  // eta(z)/z with the z=0 limit

    void check_domain(cplx z) const;

private:
    struct Cell {
        double a, b;       // node positions (circle: angles)
        double fa, fb;     // density values
        cplx xi_mid;       // circle: e^{i mid}; halfline: mid (real)
        cplx gauss_xi[5];  // positions at Gauss nodes (circle: e^{i t})
        double gauss_f[5]; // density at Gauss nodes
    };

    Space space_;
    std::vector<cplx> atom_pos_;    // circle: e^{i theta}; halfline: x
    std::vector<double> atom_mass_;
    std::vector<Cell> cells_;
    double hmax_ = 0.0;  // widest density cell
    cplx mean_;

    template <typename K>
    cplx integrate_density(cplx z, K&& kernel) const;
};

// Free-function surface over a one-shot kernel (constructs the cache).
cplx psi(const Measure& mu, cplx z);
cplx eta(const Measure& mu, cplx z);
cplx b_transform(const Measure& mu, cplx z);

struct SigmaNearZero {
    cplx value;      // Sigma(z) = eta^{-1}(z)/z
    cplx preimage;   // w = eta^{-1}(z)
    double residual; // |eta(w) - z|
    int iterations;
};

// Local inversion of eta near the origin by damped Newton seeded at
// z/m(mu). Throws NumericError("inversion-radius") when Newton does not
// converge in 200 steps; the caller should shrink |z|.
SigmaNearZero sigma_near_zero(const PsiKernel& k, cplx z, double tol = 1e-12);
SigmaNearZero sigma_near_zero(const Measure& mu, cplx z, double tol = 1e-12);

// Largest dyadic radius at which the Newton inversion succeeds on 16
// boundary samples. Heuristic diagnostic, not an asserted bound.
double eta_inversion_radius(const Measure& mu);

// Auxiliary centered transform of a (scaled) halfline measure:
// integral of (z-1)(1-x)/(xz-1) dmu(x). Maps C+ into the closed lower
// half-plane and vanishes identically for the point mass at 1.
cplx g_transform(const Measure& scaled_mu, cplx z);
cplx g_transform(const PsiKernel& k, cplx z);

// eta as a shareable evaluator (halfline evaluators accept all of the
// slit plane; conjugate symmetry comes from the real data).
EtaEvaluator eta_evaluator(const Measure& mu);
EtaEvaluator eta_evaluator(std::shared_ptr<const PsiKernel> k);

}  // namespace freemult
