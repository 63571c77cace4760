#include "freemult/convolution.hpp"

#include <algorithm>
#include <cmath>

#include "freemult/errors.hpp"
#include "freemult/levy_hinchin.hpp"
#include "freemult/recovery.hpp"
#include "freemult/subordination.hpp"

namespace freemult {

// ---------------------------------------------------------------- TwoFoldEta

TwoFoldEta::TwoFoldEta(std::shared_ptr<const PsiKernel> mu,
                       std::shared_ptr<const PsiKernel> nu, double fp_tol)
    : mu_(std::move(mu)), nu_(std::move(nu)), space_(mu_->space()), fp_tol_(fp_tol) {
    if (mu_->space() != nu_->space())
        throw ValidationError("free convolution: factors live on different spaces");
    mean_ = mu_->mean() * nu_->mean();
    if (space_ == Space::circle) {
        if (std::abs(mu_->mean()) < 1e-12 || std::abs(nu_->mean()) < 1e-12)
            throw ValidationError(
                "degenerate-mean: a zero-mean circle factor makes the fixed-point "
                "system singular; the convolution with the uniform law is the "
                "uniform law");
    }
}

cplx TwoFoldEta::solve_omega1(cplx z) const {
    const bool circ = (space_ == Space::circle);
    if (circ) {
        if (!(std::abs(z) < 1.0))
            throw ValidationError("free convolution: z outside the unit disc");
        if (std::abs(z) < 1e-300) return cplx(0.0, 0.0);
    } else {
        if (!in_slit_plane(z) && !(z.imag() == 0.0 && z.real() < 0.0))
            throw ValidationError("free convolution: z on the positive half-line cut");
    }
    auto in_dom = [&](cplx w) {
        return circ ? std::abs(w) < 1.0
                    : (in_slit_plane(w) || (w.imag() == 0.0 && w.real() < 0.0) ||
                       std::abs(w) < 1e-300);
    };
    auto F = [&](cplx w) -> cplx {
        cplx r = z * mu_->eta_over_z(w);
        if (!in_dom(r))
            throw NumericError("unsupported-pair",
                               "fixed-point iterate left the domain");
        cplx out = z * nu_->eta_over_z(r);
        if (!in_dom(out))
            throw NumericError("unsupported-pair",
                               "fixed-point iterate left the domain");
        return out;
    };
    cplx seed = warm_valid_ ? warm_seed_ : (circ ? cplx(0.0, 0.0) : z);
    if (!in_dom(seed)) seed = circ ? cplx(0.0, 0.0) : z;

    const double tol = fp_tol_ * (1.0 + std::abs(z));
    cplx w = seed;
    cplx fw = F(w);
    double res = std::abs(fw - w);
    int it = 0;
    const int cap = 10000;
    for (; it < cap && res > tol; ++it) {
        if (res < 0.03) {
            double h = 1e-7 * (1.0 + std::abs(w));
            bool accepted = false;
            try {
                if (in_dom(w + h) && in_dom(w - h)) {
                    cplx fp = (F(w + h) - F(w - h)) / (2.0 * h);
                    cplx den = fp - 1.0;
                    if (std::abs(den) > 1e-14) {
                        cplx trial = w - (fw - w) / den;
                        if (in_dom(trial)) {
                            cplx ft = F(trial);
                            double rt = std::abs(ft - trial);
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
        w = (it < 500) ? fw : 0.5 * (w + fw);
        fw = F(w);
        res = std::abs(fw - w);
    }
    if (res > tol)
        throw NumericError(circ ? "non-convergence" : "unsupported-pair",
                           "two-fold fixed point stalled at residual " +
                               format_double(res));
    warm_seed_ = w;
    warm_valid_ = true;
    return w;
}

cplx TwoFoldEta::omega1(cplx z) const { return solve_omega1(z); }

cplx TwoFoldEta::eta(cplx z) const {
    if (space_ == Space::circle && std::abs(z) < 1e-300) return cplx(0.0, 0.0);
    return mu_->eta(solve_omega1(z));
}

cplx TwoFoldEta::eta_over_z(cplx z) const {
    if (std::abs(z) < 1e-200) return mean_;
    return eta(z) / z;
}

cplx TwoFoldEta::b(cplx z) const {
    if (space_ == Space::circle && std::abs(z) < 1e-200) {
        if (std::abs(mean_) < 1e-280)
            throw NumericError("zero-of-eta", "B(0) undefined for a zero-mean law");
        return 1.0 / mean_;
    }
    cplx e = eta(z);
    if (std::abs(e) < 1e-280)
        throw NumericError("zero-of-eta", "eta of the convolution vanished");
    return z / e;
}

double TwoFoldEta::identity_residual(cplx z) const {
    cplx w1 = solve_omega1(z);
    // polish the fixed point: |omega1 omega2 - z eta| = |omega2||F(w)-w|
    // and |omega2| grows with |z|, so push the residual to its floor
    auto F = [&](cplx w) {
        cplx r = z * mu_->eta_over_z(w);
        return z * nu_->eta_over_z(r);
    };
    cplx fw = F(w1);
    for (int it = 0; it < 12 && std::abs(fw - w1) > 0.0; ++it) {
        double h = 1e-7 * (1.0 + std::abs(w1));
        cplx fp = (F(w1 + h) - F(w1 - h)) / (2.0 * h);
        if (std::abs(fp - 1.0) < 1e-14) break;
        cplx trial = w1 - (fw - w1) / (fp - 1.0);
        cplx ft = F(trial);
        if (std::abs(ft - trial) < std::abs(fw - w1)) {
            w1 = trial;
            fw = ft;
        } else {
            break;
        }
    }
    cplx w2 = z * mu_->eta_over_z(w1);
    cplx e = nu_->eta(w2);
    return std::abs(w1 * w2 - z * e);
}

// --------------------------------------------------- triangular array rows

void ArrayRow::validate() const {
    if (measures.empty()) throw ValidationError("array row: needs k_n >= 1 measures");
    if (!(c_n > 0.0)) throw ValidationError("array row: c_n must be > 0");
    for (const auto& m : measures) {
        m.validate();
        if (m.space != Space::halfline)
            throw ValidationError("array row: halfline measures required");
    }
}

cplx array_limit_transform(const ArrayRow& row, cplx z) {
    row.validate();
    // log-space product: the factors are near 1 for infinitesimal rows and
    // a plain product would lose the cancellation structure
    cplx acc = -std::log(cplx(row.c_n, 0.0));
    for (const auto& m : row.measures) {
        cplx bv = b_transform(m, z);
        if (bv.imag() == 0.0 && bv.real() <= 0.0)
            throw NumericError("branch", "B factor on the negative cut");
        acc += std::log(bv);
    }
    return std::exp(acc);
}

GnedenkoData gnedenko_criterion(const ArrayRow& row) {
    row.validate();
    GnedenkoData out;
    out.gamma_n = -std::log(row.c_n);
    std::vector<Atom> atoms;
    // density accumulation on a shared pushforward grid is grid-dependent;
    // each summand keeps its own transformed cells appended in order
    std::vector<double> nodes, values;

    for (const auto& m : row.measures) {
        double b = log_mean_b(m);
        Measure scaled = scale_measure(m, b);
        // gamma contribution: integral (1-y^2)/(1+y^2) dmu-scaled(y) - log b
        double gsum = 0.0;
        for (const auto& a : scaled.atoms)
            gsum += a.mass * (1.0 - a.pos * a.pos) / (1.0 + a.pos * a.pos);
        if (scaled.has_density()) {
            const auto& d = *scaled.density;
            for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i) {
                auto f = [&](double y) {
                    double w = (y - d.nodes[i]) / (d.nodes[i + 1] - d.nodes[i]);
                    double fv = (1.0 - w) * d.values[i] + w * d.values[i + 1];
                    return fv * (1.0 - y * y) / (1.0 + y * y);
                };
                gsum += gauss5(d.nodes[i], d.nodes[i + 1], f);
            }
        }
        out.gamma_n += gsum - std::log(b);

        // sigma_n summand: pushforward of (1-y)^2/(1+y^2) dmu-scaled under
        // y -> 1/y; mass at y=0 escapes to infinity with unit weight
        for (const auto& a : scaled.atoms) {
            double w = sq(1.0 - a.pos) / (1.0 + a.pos * a.pos);
            if (a.pos == 0.0)
                out.sigma_mass_at_inf += a.mass;  // weight -> 1 at y=0
            else if (w * a.mass > 0.0)
                atoms.push_back(Atom{1.0 / a.pos, a.mass * w});
        }
        if (scaled.has_density()) {
            const auto& d = *scaled.density;
            // transformed nodes 1/y come out decreasing; emit reversed.
            // pushforward density at x = 1/y: weight(y) f(y) |dy/dx|, and
            // |dy/dx| = 1/x^2
            for (std::size_t i = d.nodes.size(); i-- > 0;) {
                double y = d.nodes[i];
                double x = 1.0 / y;
                double wy = sq(1.0 - y) / (1.0 + y * y);
                nodes.push_back(x);
                values.push_back(d.values[i] * wy / (x * x));
            }
        }
    }
    // merge atoms at identical positions
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.pos < b.pos; });
    for (const auto& a : atoms) {
        if (!out.sigma_atoms.empty() && out.sigma_atoms.back().pos == a.pos)
            out.sigma_atoms.back().mass += a.mass;
        else
            out.sigma_atoms.push_back(a);
    }
    if (!nodes.empty()) {
        // rows usually share one grid; enforce strict monotonicity by a
        // stable sort-and-merge of duplicate positions
        std::vector<std::size_t> order(nodes.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return nodes[a] < nodes[b];
        });
        DensityGrid g;
        for (std::size_t i : order) {
            if (!g.nodes.empty() && nodes[i] == g.nodes.back())
                g.values.back() += values[i];
            else {
                g.nodes.push_back(nodes[i]);
                g.values.push_back(values[i]);
            }
        }
        out.sigma_density = std::move(g);
    }
    return out;
}

double GnedenkoData::sigma_total() const {
    double m = sigma_mass_at_inf;
    for (const auto& a : sigma_atoms) m += a.mass;
    if (sigma_density) {
        const auto& d = *sigma_density;
        for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i)
            m += 0.5 * (d.values[i] + d.values[i + 1]) * (d.nodes[i + 1] - d.nodes[i]);
    }
    return m;
}

// ------------------------------------------------------------ convolutions

namespace {

// First moment through an eta/z map with one Richardson step near zero.
cplx mean_from_eta_over_z(const std::function<cplx(cplx)>& eta_over_z, Space space) {
    double z0 = (space == Space::circle) ? 3e-5 : -3e-5;
    cplx f1 = eta_over_z(cplx(z0, 0.0));
    cplx f2 = eta_over_z(cplx(0.5 * z0, 0.0));
    return 2.0 * f2 - f1;
}

std::vector<double> recovery_grid_for(const EtaEvaluator& eta, Space space,
                                      int grid_size) {
    if (space == Space::circle) return uniform_circle_grid(grid_size);
    auto [lo, hi] = estimate_halfline_support(eta);
    return geometric_grid(lo, hi, grid_size);
}

ConvolutionResult two_fold(const Measure& mu, const Measure& nu, int grid_size) {
    auto a = std::make_shared<const PsiKernel>(mu);
    auto b = std::make_shared<const PsiKernel>(nu);
    auto sys = std::make_shared<TwoFoldEta>(a, b, 1e-13);
    Space space = sys->space();

    EtaEvaluator ev{space == Space::circle ? Domain::disc : Domain::slit_plane,
                    TransformKind::eta, Provenance::composite,
                    [sys](cplx z) { return sys->eta(z); }};

    ConvolutionResult out;
    out.eta = ev;
    out.mean = sys->mean_from_eta();

    // product identity on a boundary-adjacent sample
    double idsup = 0.0;
    if (space == Space::circle) {
        for (cplx z : circle_evaluation_set(256))
            idsup = std::max(idsup, sys->identity_residual(z));
    } else {
        auto [lo, hi] = estimate_halfline_support(ev);
        for (cplx z : halfline_evaluation_set(lo, hi, 28, 4, 11))
            idsup = std::max(idsup, sys->identity_residual(z));
    }
    out.identity_residual_sup = idsup;
    if (idsup > 1e-9)
        throw NumericError("residual-certification",
                           "two-fold subordination identity residual " +
                               format_double(idsup) + " exceeds 1e-9");

    out.measure = measure_from_recovery(ev, recovery_grid_for(ev, space, grid_size));
    out.measure.label = "free convolution";
    return out;
}

}  // namespace

cplx TwoFoldEta::mean_from_eta() const {
    return mean_from_eta_over_z([this](cplx z) { return eta_over_z(z); }, space_);
}

ConvolutionResult free_convolve_circle(const Measure& mu, const Measure& nu,
                                       int grid_size) {
    mu.validate();
    nu.validate();
    if (mu.space != Space::circle || nu.space != Space::circle)
        throw ValidationError("free_convolve_circle: circle measures required");
    return two_fold(mu, nu, grid_size);
}

ConvolutionResult free_convolve_halfline(const Measure& mu, const Measure& nu,
                                         int grid_size) {
    mu.validate();
    nu.validate();
    if (mu.space != Space::halfline || nu.space != Space::halfline)
        throw ValidationError("free_convolve_halfline: halfline measures required");
    return two_fold(mu, nu, grid_size);
}

namespace {

ConvolutionResult boolean_convolve(const Measure& mu, const Measure& nu,
                                   int grid_size) {
    mu.validate();
    nu.validate();
    if (mu.space != nu.space)
        throw ValidationError("boolean convolution: factors on different spaces");
    Space space = mu.space;
    auto a = std::make_shared<const PsiKernel>(mu);
    auto b = std::make_shared<const PsiKernel>(nu);

    // eta(z) = eta_mu(z) eta_nu(z) / z, removable at the origin
    auto eta_fn = [a, b](cplx z) -> cplx {
        if (std::abs(z) < 1e-200) return cplx(0.0, 0.0);
        return a->eta_over_z(z) * b->eta(z);
    };

    if (space == Space::halfline) {
        // sufficient conditions: combined argument below pi on a C+ sample,
        // and at least one finite first moment
        bool finite = std::isfinite(a->mean().real()) || std::isfinite(b->mean().real());
        if (!finite)
            throw NumericError("not-well-defined",
                               "boolean convolution needs a finite first moment");
        for (int i = 0; i < 16; ++i) {
            double mod = std::exp(-4.0 + 8.0 * (i + 0.5) / 16.0);
            for (int j = 0; j < 16; ++j) {
                cplx z = std::polar(mod, kPi * (j + 0.5) / 16.0);
                double total =
                    std::arg(a->eta(z)) + std::arg(b->eta(z)) - std::arg(z);
                if (!(total < kPi))
                    throw NumericError(
                        "not-well-defined",
                        "boolean convolution argument condition fails at z=" +
                            format_double(z.real()) + "+" +
                            format_double(z.imag()) + "i");
            }
        }
        verify_halfline_eta_bound(eta_fn, "boolean convolution eta");
    }

    EtaEvaluator ev{space == Space::circle ? Domain::disc : Domain::slit_plane,
                    TransformKind::eta, Provenance::composite, eta_fn};
    ConvolutionResult out;
    out.eta = ev;
    out.mean = mean_from_eta_over_z(
        [&](cplx z) { return a->eta_over_z(z) * b->eta_over_z(z); }, space);
    out.measure = measure_from_recovery(ev, recovery_grid_for(ev, space, grid_size));
    out.measure.label = "boolean convolution";
    return out;
}

}  // namespace

ConvolutionResult boolean_convolve_circle(const Measure& mu, const Measure& nu,
                                          int grid_size) {
    if (mu.space != Space::circle || nu.space != Space::circle)
        throw ValidationError("boolean_convolve_circle: circle measures required");
    return boolean_convolve(mu, nu, grid_size);
}

ConvolutionResult boolean_convolve_halfline(const Measure& mu, const Measure& nu,
                                            int grid_size) {
    if (mu.space != Space::halfline || nu.space != Space::halfline)
        throw ValidationError("boolean_convolve_halfline: halfline measures required");
    return boolean_convolve(mu, nu, grid_size);
}

ConvolutionResult free_power(const Measure& mu, int k, int grid_size) {
    mu.validate();
    if (k < 1) throw ValidationError("free_power: k must be >= 1");
    if (k == 1) {
        ConvolutionResult out;
        out.measure = mu;
        auto kern = std::make_shared<const PsiKernel>(mu);
        out.eta = eta_evaluator(kern);
        out.mean = kern->mean();
        return out;
    }
    if (k == 2) return two_fold(mu, mu, grid_size);

    ConvolutionResult out;
    if (mu.space == Space::circle) {
        auto kern = std::make_shared<const PsiKernel>(mu);
        auto rho = std::make_shared<TwoFoldEta>(kern, kern, 1e-13);
        auto sol = std::make_shared<SubordinationSolution>(
            power_subordination_circle(mu, k));
        out.subordination_residual_sup = sol->residual_sup;
        // primary eta route: eta_rho(omega(z)); branch-free
        auto eta_fn = [rho, sol](cplx z) -> cplx {
            if (std::abs(z) < 1e-300) return cplx(0.0, 0.0);
            return rho->eta(sol->omega(z));
        };
        // internal agreement of the principal-power formula where defined
        double agree = 0.0;
        for (cplx z : circle_evaluation_set(64)) {
            try {
                cplx via_power = eta_power_circle(*sol, k, z);
                agree = std::max(agree, std::abs(via_power - eta_fn(z)));
            } catch (const NumericError&) {
                // principal branch of g wrapped; composed route still valid
            }
        }
        if (agree > 1e-8)
            throw NumericError("residual-certification",
                               "power-formula eta disagrees with the composed "
                               "route by " + format_double(agree));
        out.eta = EtaEvaluator{Domain::disc, TransformKind::eta,
                               Provenance::from_subordination, eta_fn};
        out.mean = mean_from_eta_over_z(
            [&](cplx z) { return eta_fn(z) / z; }, Space::circle);
        out.diagnostics = sol->diagnostics_json();
        out.measure =
            measure_from_recovery(out.eta, uniform_circle_grid(grid_size));
    } else {
        auto sol = std::make_shared<SubordinationSolution>(
            power_subordination_halfline(mu, k));
        out.subordination_residual_sup = sol->residual_sup;
        auto eta_fn = [sol, k](cplx z) { return eta_power_halfline(*sol, k, z); };
        out.eta = EtaEvaluator{Domain::slit_plane, TransformKind::eta,
                               Provenance::from_subordination, eta_fn};
        out.mean = mean_from_eta_over_z(
            [&](cplx z) { return eta_fn(z) / z; }, Space::halfline);
        out.diagnostics = sol->diagnostics_json();
        out.measure = measure_from_recovery(
            out.eta, recovery_grid_for(out.eta, Space::halfline, grid_size));
    }
    out.measure.label = "free power k=" + std::to_string(k);
    return out;
}

ConvolutionResult boolean_power(const Measure& mu, int k, int grid_size) {
    mu.validate();
    if (k < 1) throw ValidationError("boolean_power: k must be >= 1");
    auto kern = std::make_shared<const PsiKernel>(mu);
    auto eta_fn = [kern, k](cplx z) -> cplx {
        if (std::abs(z) < 1e-200) return cplx(0.0, 0.0);
        cplx q = kern->eta_over_z(z);
        cplx acc(1.0, 0.0);
        for (int i = 0; i < k; ++i) acc *= q;
        return z * acc;
    };
    if (mu.space == Space::halfline)
        verify_halfline_eta_bound(eta_fn, "boolean power eta");
    ConvolutionResult out;
    out.eta = EtaEvaluator{mu.space == Space::circle ? Domain::disc
                                                     : Domain::slit_plane,
                           TransformKind::eta, Provenance::composite, eta_fn};
    out.mean = mean_from_eta_over_z(
        [&](cplx z) { return eta_fn(z) / z; }, mu.space);
    out.measure =
        measure_from_recovery(out.eta, recovery_grid_for(out.eta, mu.space, grid_size));
    out.measure.label = "boolean power k=" + std::to_string(k);
    return out;
}

ConvolutionResult free_power_from_b_exponent(std::function<cplx(cplx)> expo,
                                             std::function<cplx(cplx)> expo_prime,
                                             int k, int grid_size) {
    if (k < 2) throw ValidationError("free_power_from_b_exponent: k must be >= 2");
    double p = double(k - 1);
    auto E = [expo, p](cplx z) { return p * expo(z); };
    auto Ep = [expo_prime, p](cplx z) { return p * expo_prime(z); };
    auto sol = std::make_shared<SubordinationSolution>(
        global_inverse_halfline(E, Ep, {0.05, 20.0}));
    sol->power = k;
    ConvolutionResult out;
    out.subordination_residual_sup = sol->residual_sup;
    auto eta_fn = [sol, k](cplx z) { return eta_power_halfline(*sol, k, z); };
    out.eta = EtaEvaluator{Domain::slit_plane, TransformKind::eta,
                           Provenance::from_subordination, eta_fn};
    out.mean =
        mean_from_eta_over_z([&](cplx z) { return eta_fn(z) / z; }, Space::halfline);
    out.measure = measure_from_recovery(
        out.eta, recovery_grid_for(out.eta, Space::halfline, grid_size));
    out.measure.label = "free power k=" + std::to_string(k);
    return out;
}

}  // namespace freemult
