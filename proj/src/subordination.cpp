#include "freemult/subordination.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "freemult/convolution.hpp"
#include "freemult/errors.hpp"

namespace freemult {

namespace {

constexpr int kPlainPhase = 500;
constexpr int kIterationCap = 10000;

// Hybrid attracting-fixed-point loop: plain iteration, averaged steps after
// the plain phase, and Newton acceleration on F(w)-w once the residual is
// small. `residual` maps (w, F(w)) to the convergence measure; `in_domain`
// guards trial points.
template <typename F, typename R, typename D>
FixedPointResult fixed_point_loop(F&& f, R&& residual, D&& in_domain, cplx seed,
                                  double tol) {
    cplx w = seed;
    cplx fw = f(w);
    double res = residual(w, fw);
    int it = 0;
    for (; it < kIterationCap && res > tol; ++it) {
        if (res < 0.03) {
            // local Newton on g(w) = F(w) - w with a finite-difference slope
            double h = 1e-7 * (1.0 + std::abs(w));
            bool accepted = false;
            try {
                if (in_domain(w + h) && in_domain(w - h)) {
                    cplx fp = (f(w + h) - f(w - h)) / (2.0 * h);
                    cplx den = fp - 1.0;
                    if (std::abs(den) > 1e-14) {
                        cplx trial = w - (fw - w) / den;
                        if (in_domain(trial)) {
                            cplx ft = f(trial);
                            double rt = residual(trial, ft);
                            if (rt < res) {
                                w = trial;
                                fw = ft;
                                res = rt;
                                accepted = true;
                            }
                        }
                    }
                }
            } catch (const Error&) {
                accepted = false;
            }
            if (accepted) continue;
        }
        w = (it < kPlainPhase) ? fw : 0.5 * (w + fw);
        fw = f(w);
        res = residual(w, fw);
    }
    if (res > tol)
        throw NumericError("non-convergence",
                           "fixed-point iteration stalled at residual " +
                               format_double(res) + " (tol " + format_double(tol) +
                               ")");
    return FixedPointResult{w, std::abs(fw - w), it};
}

}  // namespace

FixedPointResult denjoy_wolff_solve(const std::function<cplx(cplx)>& selfmap,
                                    double tol, cplx seed) {
    if (!(tol > 0.0)) throw ValidationError("denjoy_wolff_solve: tol must be > 0");
    return fixed_point_loop(
        selfmap, [](cplx w, cplx fw) { return std::abs(fw - w); },
        [](cplx w) { return std::abs(w) < 1.0; }, seed, tol);
}

// ------------------------------------------------------------- AnalyticLog

AnalyticLog::AnalyticLog(std::function<cplx(cplx)> f, cplx base_point, cplx base_log)
    : f_(std::move(f)) {
    anchors_.push_back(Anchor{base_point, std::exp(base_log), base_log});
}

AnalyticLog::Anchor AnalyticLog::continue_to(const Anchor& from, cplx target,
                                             int depth) {
    cplx ft = f_(target);
    cplx ratio = ft / from.f;
    if (std::abs(ratio - 1.0) <= 0.5)
        return Anchor{target, ft, from.logf + log1p_c(ratio - 1.0)};
    if (depth >= 60)
        throw NumericError("branch-tracking",
                           "logarithm continuation could not resolve the branch");
    cplx mid = 0.5 * (from.w + target);
    Anchor m = continue_to(from, mid, depth + 1);
    return continue_to(m, target, depth + 1);
}

cplx AnalyticLog::operator()(cplx w) {
    const Anchor* best = &anchors_.back();
    if (w == best->w) return best->logf;
    double bd = std::abs(w - best->w);
    if (bd > 0.05) {
        for (const auto& a : anchors_) {
            double d = std::abs(w - a.w);
            if (d < bd) {
                bd = d;
                best = &a;
            }
            if (bd == 0.0) return best->logf;
        }
    }
    Anchor out = continue_to(*best, w, 0);
    if (anchors_.size() > 1024) anchors_.erase(anchors_.begin() + 1, anchors_.end() - 8);
    anchors_.push_back(out);
    return out.logf;
}

// ------------------------------------------------- global inversion (disc)

namespace {

struct OmegaWarm {
    cplx seed{0.0, 0.0};
    bool valid = false;
    int iterations_max = 0;
};

}  // namespace

std::vector<cplx> circle_evaluation_set(int n, double radius) {
    std::vector<cplx> zs(n);
    for (int i = 0; i < n; ++i)
        zs[i] = std::polar(radius, -kPi + kTwoPi * (i + 0.5) / n);
    return zs;
}

std::vector<cplx> halfline_evaluation_set(double x_lo, double x_hi, int nx, int j_min,
                                          int j_max) {
    auto xs = geometric_grid(x_lo, x_hi, nx);
    std::vector<cplx> zs;
    zs.reserve(xs.size() * std::size_t(j_max - j_min + 1));
    for (int j = j_min; j <= j_max; ++j) {
        double y = std::pow(2.0, -j);
        for (double x : xs) zs.push_back(1.0 / cplx(x, y));
    }
    return zs;
}

SubordinationSolution global_inverse_circle(std::function<cplx(cplx)> exponent_v,
                                            const InverseOptions& opts) {
    auto v = std::make_shared<std::function<cplx(cplx)>>(std::move(exponent_v));
    auto warm = std::make_shared<OmegaWarm>();
    const double fp_tol = opts.fp_tol;

    auto omega_fn = [v, warm, fp_tol](cplx z) -> cplx {
        if (!(std::abs(z) < 1.0))
            throw ValidationError("omega: z outside the open unit disc");
        if (std::abs(z) < 1e-300) return cplx(0.0, 0.0);
        auto F = [&](cplx w) { return z * std::exp(-(*v)(w)); };
        // |Phi(w) - z| = |exp(v(w))| |F(w) - w| = |z| |F(w)-w| / |F(w)|,
        // so converge on the left-inverse residual directly
        auto res = [&](cplx w, cplx fw) {
            double denom = std::max(std::abs(fw), 1e-300);
            return std::abs(z) * std::abs(fw - w) / denom;
        };
        cplx seed = (warm->valid && std::abs(warm->seed) < 1.0) ? warm->seed
                                                                : cplx(0.0, 0.0);
        auto r = fixed_point_loop(F, res, [](cplx w) { return std::abs(w) < 1.0; },
                                  seed, fp_tol);
        warm->seed = r.point;
        warm->valid = true;
        warm->iterations_max = std::max(warm->iterations_max, r.iterations);
        return r.point;
    };
    auto phi_fn = [v](cplx z) -> cplx {
        if (!(std::abs(z) < 1.0))
            throw ValidationError("phi: z outside the open unit disc");
        return z * std::exp((*v)(z));
    };

    SubordinationSolution sol;
    sol.space = Space::circle;
    sol.exponent = [v](cplx z) { return (*v)(z); };
    sol.omega = EtaEvaluator{Domain::disc, TransformKind::omega,
                             Provenance::from_subordination, omega_fn};
    sol.phi = EtaEvaluator{Domain::disc, TransformKind::phi,
                           Provenance::from_subordination, phi_fn};
    if (opts.certify) {
        sol.evaluation_set = circle_evaluation_set(opts.eval_points);
        sol.residuals.reserve(sol.evaluation_set.size());
        double sup = 0.0;
        for (cplx z : sol.evaluation_set) {
            cplx w = omega_fn(z);
            if (!(std::abs(w) < 1.0))
                throw NumericError("non-convergence", "omega left the unit disc");
            double r = std::abs(phi_fn(w) - z);
            sol.residuals.push_back(r);
            sup = std::max(sup, r);
        }
        sol.residual_sup = sup;
        sol.iterations_max = warm->iterations_max;
        if (sup > opts.residual_tol)
            throw NumericError("residual-certification",
                               "subordination residual " + format_double(sup) +
                                   " exceeds " + format_double(opts.residual_tol));
    }
    return sol;
}

// ------------------------------------------- halfline power subordination

namespace {

class HalflineSolver {
public:
    HalflineSolver(std::function<cplx(cplx)> exponent,
                   std::function<cplx(cplx)> exponent_prime, double fp_tol)
        : E_(std::move(exponent)), Ep_(std::move(exponent_prime)), fp_tol_(fp_tol) {
        // real anchors along the negative axis, overflow-guarded
        for (int p = -30; p <= 8; ++p) {
            cplx w(-std::pow(2.0, p), 0.0);
            double lh;
            try {
                lh = std::log(std::abs(w.real())) + E_(w).real();
            } catch (const Error&) {
                continue;
            }
            if (std::abs(lh) > 27.0) continue;  // keep |H| within ~[2e-12, 5e11]
            anchors_.emplace_back(H(w), w);
        }
        if (anchors_.empty())
            throw NumericError("anchor",
                               "no usable real anchor for the left inverse");
    }

    cplx H(cplx w) { return w * std::exp(E_(w)); }
    cplx H_prime(cplx w) { return std::exp(E_(w)) * (1.0 + w * Ep_(w)); }

    cplx solve(cplx z) {
        if (z.imag() < 0.0) return std::conj(solve(std::conj(z)));
        if (z.imag() == 0.0 && z.real() >= 0.0)
            throw ValidationError("omega: z on the positive half-line cut");
        std::size_t best = 0;
        double bd = std::abs(z - anchors_[0].first);
        for (std::size_t i = 1; i < anchors_.size(); ++i) {
            double d = std::abs(z - anchors_[i].first);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        auto [za, wa] = anchors_[best];
        cplx w = continue_path(za, wa, z, 0);
        if (anchors_.size() > 4096)
            anchors_.erase(anchors_.begin() + 64, anchors_.end() - 64);
        return w;
    }

private:
    std::function<cplx(cplx)> E_, Ep_;
    double fp_tol_;
    std::vector<std::pair<cplx, cplx>> anchors_;  // (z, omega(z))

    static bool usable_point(cplx w) {
        return in_slit_plane(w) || (w.imag() == 0.0 && w.real() < 0.0);
    }

    bool newton_to(cplx z, cplx seed, cplx* out) {
        cplx w = seed;
        double scale = 1.0 + std::abs(z);
        double res;
        try {
            res = std::abs(H(w) - z);
        } catch (const Error&) {
            return false;
        }
        for (int it = 0; it < 60 && res > fp_tol_ * scale; ++it) {
            cplx hp;
            try {
                hp = H_prime(w);
            } catch (const Error&) {
                return false;
            }
            if (std::abs(hp) < 1e-14) return false;  // turning point
            cplx step = (H(w) - z) / hp;
            double lambda = 1.0;
            bool improved = false;
            for (int h = 0; h < 40; ++h) {
                cplx trial = w - lambda * step;
                if (usable_point(trial)) {
                    try {
                        double r2 = std::abs(H(trial) - z);
                        if (r2 < res) {
                            w = trial;
                            res = r2;
                            improved = true;
                            break;
                        }
                    } catch (const Error&) {
                        // fall through to a smaller step
                    }
                }
                lambda *= 0.5;
            }
            if (!improved) return false;
        }
        if (res > fp_tol_ * scale) return false;
        *out = w;
        return true;
    }

    cplx continue_path(cplx z_from, cplx w_from, cplx z_to, int depth) {
        cplx w;
        if (newton_to(z_to, w_from, &w)) {
            anchors_.emplace_back(z_to, w);
            return w;
        }
        if (depth >= 40)
            throw NumericError("turning-point",
                               "path continuation failed toward z=" +
                                   format_double(z_to.real()) + "+" +
                                   format_double(z_to.imag()) + "i; refine the path");
        cplx mid = 0.5 * (z_from + z_to);
        cplx wm = continue_path(z_from, w_from, mid, depth + 1);
        return continue_path(mid, wm, z_to, depth + 1);
    }
};

}  // namespace

SubordinationSolution global_inverse_halfline(std::function<cplx(cplx)> exponent,
                                              std::function<cplx(cplx)> exponent_prime,
                                              std::pair<double, double> cert_range,
                                              const InverseOptions& opts) {
    auto solver = std::make_shared<HalflineSolver>(std::move(exponent),
                                                   std::move(exponent_prime),
                                                   opts.fp_tol);

    auto omega_fn = [solver](cplx z) { return solver->solve(z); };
    auto phi_fn = [solver](cplx z) -> cplx {
        if (z.imag() < 0.0) return std::conj(solver->H(std::conj(z)));
        return solver->H(z);
    };

    SubordinationSolution sol;
    sol.space = Space::halfline;
    sol.omega = EtaEvaluator{Domain::slit_plane, TransformKind::omega,
                             Provenance::from_subordination, omega_fn};
    sol.phi = EtaEvaluator{Domain::slit_plane, TransformKind::phi,
                           Provenance::from_subordination, phi_fn};
    if (opts.certify) {
        sol.evaluation_set =
            halfline_evaluation_set(cert_range.first, cert_range.second, 56);
        double sup = 0.0;
        for (cplx z : sol.evaluation_set) {
            cplx w = omega_fn(z);
            double r = std::abs(phi_fn(w) - z);
            sol.residuals.push_back(r);
            sup = std::max(sup, r);
        }
        sol.residual_sup = sup;
        if (sup > opts.residual_tol)
            throw NumericError("residual-certification",
                               "subordination residual " + format_double(sup) +
                                   " exceeds " + format_double(opts.residual_tol));
    }
    return sol;
}

SubordinationSolution power_subordination_halfline(const Measure& mu, int k,
                                                   const InverseOptions& opts) {
    if (k < 2) throw ValidationError("power subordination: k must be >= 2");
    if (mu.space != Space::halfline)
        throw ValidationError("power subordination: halfline measure required");
    auto kern = std::make_shared<const PsiKernel>(mu);
    cplx b1 = kern->b(cplx(-1.0, 0.0));
    auto logB = std::make_shared<AnalyticLog>(
        [kern](cplx w) { return kern->b(w); }, cplx(-1.0, 0.0),
        std::log(b1.real()));
    double p = double(k - 1);
    auto E = [logB, p](cplx w) { return p * (*logB)(w); };
    auto Ep = [kern, p](cplx w) {
        return p * kern->b_prime(w) / kern->b(w);
    };

    // certification range: the support of mu
    double lo = 0.5, hi = 2.0;
    if (mu.has_density()) {
        lo = mu.density->nodes.front();
        hi = mu.density->nodes.back();
    }
    for (const auto& a : mu.atoms) {
        lo = std::min(lo, std::max(a.pos, 1e-6));
        hi = std::max(hi, a.pos);
    }
    SubordinationSolution sol = global_inverse_halfline(E, Ep, {lo, hi}, opts);
    sol.power = k;
    return sol;
}

cplx eta_power_halfline(const SubordinationSolution& sol, int k, cplx z) {
    if (k < 2) throw ValidationError("eta power: k must be >= 2");
    if (sol.power != k)
        throw ValidationError("eta power: solution was built for k=" +
                              std::to_string(sol.power));
    cplx w = sol.omega(z);
    cplx g = w / z;
    if (g.imag() == 0.0 && g.real() <= 0.0)
        throw NumericError("branch", "omega(z)/z on the negative cut at z=" +
                                         format_double(z.real()) + "+" +
                                         format_double(z.imag()) + "i");
    return z * std::exp((double(k) / (k - 1)) * std::log(g));
}

// --------------------------------------------- circle power subordination

SubordinationSolution power_subordination_circle(const Measure& mu, int k,
                                                 const InverseOptions& opts) {
    if (k < 3)
        throw ValidationError(
            "power subordination: k >= 3 on the circle (two-fold powers go "
            "through the convolution engine)");
    if (mu.space != Space::circle)
        throw ValidationError("power subordination: circle measure required");
    auto kern = std::make_shared<const PsiKernel>(mu);
    cplx m = kern->mean();
    if (std::abs(m) < 1e-12)
        throw NumericError("degenerate-mean",
                           "zero-mean law: the two-fold power is already the "
                           "uniform law, no inversion map exists");
    auto rho = std::make_shared<TwoFoldEta>(kern, kern, opts.fp_tol);
    // branch of log B_rho pinned so exp(u(0)) = 1/m(mu) exactly
    auto logB = std::make_shared<AnalyticLog>(
        [rho](cplx w) { return rho->b(w); }, cplx(0.0, 0.0), -2.0 * std::log(m));
    double half_power = 0.5 * double(k - 2);
    auto v = [logB, half_power](cplx w) { return half_power * (*logB)(w); };
    SubordinationSolution sol = global_inverse_circle(v, opts);
    sol.power = k;
    // arg(omega/z) extremes over the certification set, via the true
    // branch -Im v(omega)
    double amin = 1e300, amax = -1e300;
    for (cplx z : sol.evaluation_set) {
        double a = -v(sol.omega(z)).imag();
        amin = std::min(amin, a);
        amax = std::max(amax, a);
    }
    if (!sol.evaluation_set.empty()) {
        sol.arg_g_min = amin;
        sol.arg_g_max = amax;
    }
    return sol;
}

cplx eta_power_circle(const SubordinationSolution& sol, int k, cplx z) {
    if (k < 3) throw ValidationError("eta power: exponent undefined below k=3");
    if (sol.power != k)
        throw ValidationError("eta power: solution was built for k=" +
                              std::to_string(sol.power));
    if (std::abs(z) < 1e-300) return cplx(0.0, 0.0);
    cplx w = sol.omega(z);
    cplx g = w / z;
    // true argument of g = exp(-v(omega)): the principal value of arg g
    // aliases full turns, the construction's exponent does not
    double a = sol.exponent ? -sol.exponent(w).imag() : std::arg(g);
    if (std::abs(a) >= kPi - 1e-12)
        throw NumericError("branch", "arg of omega(z)/z reached the cut at z=" +
                                         format_double(z.real()) + "+" +
                                         format_double(z.imag()) + "i");
    return w * std::exp((2.0 / double(k - 2)) * std::log(g));
}

std::string SubordinationSolution::diagnostics_json() const {
    nlohmann::json doc;
    doc["space"] = space_name(space);
    doc["power"] = power;
    doc["residual_sup"] = residual_sup;
    doc["iterations_max"] = iterations_max;
    doc["arg_g_min"] = arg_g_min;
    doc["arg_g_max"] = arg_g_max;
    doc["evaluation_points"] = evaluation_set.size();
    auto& pts = doc["points"] = nlohmann::json::array();
    for (std::size_t i = 0; i < evaluation_set.size(); ++i) {
        pts.push_back(nlohmann::json{{"re", evaluation_set[i].real()},
                                     {"im", evaluation_set[i].imag()},
                                     {"residual",
                                      i < residuals.size() ? residuals[i] : 0.0}});
    }
    return doc.dump(2);
}

}  // namespace freemult
