#include "freemult/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "freemult/errors.hpp"

namespace freemult {

namespace {

// Cells are split until their width is below this fraction of the distance
// to the kernel pole; a Gauss-5 panel is then accurate to ~1e-12 relative.
constexpr double kSplitRatio = 0.125;
constexpr int kMaxDepth = 48;

}  // namespace

PsiKernel::PsiKernel(const Measure& mu) : space_(mu.space) {
    mu.validate();
    atom_pos_.reserve(mu.atoms.size());
    atom_mass_.reserve(mu.atoms.size());
    for (const auto& a : mu.atoms) {
        if (space_ == Space::circle)
            atom_pos_.push_back(cplx(std::cos(a.pos), std::sin(a.pos)));
        else
            atom_pos_.push_back(cplx(a.pos, 0.0));
        atom_mass_.push_back(a.mass);
    }
    if (mu.has_density()) {
        const auto& d = *mu.density;
        const std::size_t n = d.nodes.size();
        auto add_cell = [&](double a, double b, double fa, double fb) {
            if (!(b > a)) return;
            Cell c;
            c.a = a; c.b = b; c.fa = fa; c.fb = fb;
            double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double slope = (fb - fa) / (b - a);
            for (int i = 0; i < 5; ++i) {
                double t = mid + half * kGauss5X[i];
                c.gauss_f[i] = fa + slope * (t - a);
                c.gauss_xi[i] = (space_ == Space::circle)
                                    ? cplx(std::cos(t), std::sin(t))
                                    : cplx(t, 0.0);
            }
            c.xi_mid = (space_ == Space::circle) ? cplx(std::cos(mid), std::sin(mid))
                                                 : cplx(mid, 0.0);
            cells_.push_back(c);
        };
        for (std::size_t i = 0; i + 1 < n; ++i)
            add_cell(d.nodes[i], d.nodes[i + 1], d.values[i], d.values[i + 1]);
        if (space_ == Space::circle && n >= 2)
            add_cell(d.nodes.back(), d.nodes.front() + kTwoPi, d.values.back(),
                     d.values.front());
        for (const auto& c : cells_) hmax_ = std::max(hmax_, c.b - c.a);
    }
    mean_ = moment(mu, 1);
}

void PsiKernel::check_domain(cplx z) const {
    if (space_ == Space::circle) {
        if (!(std::abs(z) < 1.0))
            throw ValidationError("transform: z outside the open unit disc");
        return;
    }
    if (in_slit_plane(z)) return;
    // Real z >= 0 sits on the slit, but the integral still converges when
    // the kernel pole 1/z misses the support; accept those points.
    double x = z.real();
    if (x == 0.0)
        throw ValidationError("transform: z = 0 is on the half-line cut");
    double pole = 1.0 / x;
    for (std::size_t i = 0; i < atom_pos_.size(); ++i) {
        double t = atom_pos_[i].real() * x;
        if (std::abs(1.0 - t) <= 1e-8 * (1.0 + std::abs(t)))
            throw NumericError("pole-collision",
                               "quadrature point collides with the kernel pole");
    }
    if (!cells_.empty()) {
        double lo = cells_.front().a, hi = cells_.back().b;
        if (pole >= lo - 1e-12 && pole <= hi + 1e-12)
            throw ValidationError(
                "transform: real z places the kernel pole inside the density support");
    }
}

namespace {

// Adaptive integral of kernel(x) * (piecewise-linear density) over one cell.
// `pos(t)` maps the grid coordinate to the integration variable (e^{it} on
// the circle), `pole_dist(t)` is the distance from pos(t) to the nearest
// kernel singularity measured in grid units.
template <typename K, typename P, typename D>
cplx cell_adaptive(double a, double b, double fa, double fb, K&& kernel, P&& pos,
                   D&& pole_dist, int depth) {
    double h = b - a;
    double d = pole_dist(0.5 * (a + b));
    if (h <= kSplitRatio * d || depth >= kMaxDepth) {
        if (depth >= kMaxDepth && h > 16.0 * d)
            throw NumericError("pole-proximity",
                               "quadrature cell cannot resolve a kernel pole");
        double mid = 0.5 * (a + b), half = 0.5 * h;
        double slope = (fb - fa) / h;
        cplx acc(0.0, 0.0);
        for (int i = 0; i < 5; ++i) {
            double t = mid + half * kGauss5X[i];
            acc += kGauss5W[i] * (fa + slope * (t - a)) * kernel(pos(t));
        }
        return half * acc;
    }
    double m = 0.5 * (a + b);
    double fm = fa + (fb - fa) * 0.5;
    return cell_adaptive(a, m, fa, fm, kernel, pos, pole_dist, depth + 1) +
           cell_adaptive(m, b, fm, fb, kernel, pos, pole_dist, depth + 1);
}

}  // namespace

template <typename K>
cplx PsiKernel::integrate_density(cplx z, K&& kernel) const {
    cplx acc(0.0, 0.0);
    const double az = std::abs(z);
    const double ratio2 = kSplitRatio * kSplitRatio;
    auto plain_cell = [&](const Cell& c) {
        cplx s = kGauss5W[0] * c.gauss_f[0] * kernel(c.gauss_xi[0]);
        for (int i = 1; i < 5; ++i) s += kGauss5W[i] * c.gauss_f[i] * kernel(c.gauss_xi[i]);
        return (0.5 * (c.b - c.a)) * s;
    };
    if (space_ == Space::circle) {
        // poles of 1/(1-xi z) sit at xi = 1/z; |1 - xi z| >= 1 - |z|.
        // When even the widest cell clears the split ratio against that
        // floor no per-cell distance checks are needed at all.
        const double floor_d = 1.0 - az;
        if (!cells_.empty() && hmax_ <= kSplitRatio * floor_d) {
            for (const auto& c : cells_) acc += plain_cell(c);
            return acc;
        }
        for (const auto& c : cells_) {
            double d2 = std::norm(1.0 - c.xi_mid * z);
            double h = c.b - c.a;
            if (h * h <= ratio2 * d2) {
                acc += plain_cell(c);
            } else {
                acc += cell_adaptive(
                    c.a, c.b, c.fa, c.fb, kernel,
                    [](double t) { return cplx(std::cos(t), std::sin(t)); },
                    [&](double t) {
                        double dd = std::abs(1.0 - cplx(std::cos(t), std::sin(t)) * z);
                        return std::max(dd, floor_d);
                    },
                    0);
            }
        }
    } else {
        // pole of 1/(1-xz) at x = 1/z; distance in x units
        const bool no_pole = (z.imag() == 0.0 && z.real() <= 0.0);  // 1-xz >= 1
        if (no_pole) {
            for (const auto& c : cells_) acc += plain_cell(c);
            return acc;
        }
        cplx pole = 1.0 / z;
        // fast path: pole far from the whole support
        double lo = cells_.front().a - pole.real();
        double hi = cells_.back().b - pole.real();
        double dist_support =
            (lo > 0.0) ? lo : (hi < 0.0 ? -hi : 0.0);
        double dmin2 = dist_support * dist_support + pole.imag() * pole.imag();
        if (hmax_ * hmax_ <= ratio2 * dmin2) {
            for (const auto& c : cells_) acc += plain_cell(c);
            return acc;
        }
        for (const auto& c : cells_) {
            double h = c.b - c.a;
            double dx = c.xi_mid.real() - pole.real();
            double d2 = dx * dx + pole.imag() * pole.imag();
            if (h * h <= ratio2 * d2) {
                acc += plain_cell(c);
            } else {
                acc += cell_adaptive(
                    c.a, c.b, c.fa, c.fb, kernel,
                    [](double t) { return cplx(t, 0.0); },
                    [&](double t) { return std::hypot(t - pole.real(), pole.imag()); },
                    0);
            }
        }
    }
    return acc;
}

cplx PsiKernel::psi(cplx z) const {
    check_domain(z);
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < atom_pos_.size(); ++i) {
        cplx xz = atom_pos_[i] * z;
        acc += atom_mass_[i] * xz / (1.0 - xz);
    }
    if (!cells_.empty())
        acc += integrate_density(z, [&](cplx x) {
            cplx xz = x * z;
            return xz / (1.0 - xz);
        });
    return acc;
}

cplx PsiKernel::psi_prime(cplx z) const {
    check_domain(z);
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < atom_pos_.size(); ++i) {
        cplx u = 1.0 - atom_pos_[i] * z;
        acc += atom_mass_[i] * atom_pos_[i] / (u * u);
    }
    if (!cells_.empty())
        acc += integrate_density(z, [&](cplx x) {
            cplx u = 1.0 - x * z;
            return x / (u * u);
        });
    return acc;
}

cplx PsiKernel::eta(cplx z) const {
    cplx p = psi(z);
    cplx den = 1.0 + p;
    if (std::abs(den) < 1e-280)
        throw NumericError("eta-pole", "1+psi vanished at the evaluation point");
    return p / den;
}

cplx PsiKernel::eta_prime(cplx z) const {
    cplx den = 1.0 + psi(z);
    if (std::abs(den) < 1e-140)
        throw NumericError("eta-pole", "1+psi vanished at the evaluation point");
    return psi_prime(z) / (den * den);
}

cplx PsiKernel::eta_over_z(cplx z) const {
    if (std::abs(z) < 1e-200) {
        if (space_ == Space::circle) return mean_;
        // halfline: eta(z)/z -> m as z -> 0 along the negative axis when the
        // first moment is finite; fall back to the derivative limit
        return mean_;
    }
    return eta(z) / z;
}

cplx PsiKernel::b(cplx z) const {
    if (space_ == Space::circle && std::abs(z) < 1e-200) {
        if (std::abs(mean_) < 1e-280)
            throw NumericError("zero-of-eta", "B(0) undefined for a zero-mean law");
        return 1.0 / mean_;
    }
    cplx e = eta(z);
    if (std::abs(e) < 1e-280)
        throw NumericError("zero-of-eta",
                           "eta vanished away from the origin; B undefined there");
    return z / e;
}

cplx PsiKernel::b_prime(cplx z) const {
    if (space_ == Space::circle && std::abs(z) < 1e-8) {
        // central difference across the origin keeps the removable point exact
        double h = 1e-5;
        return (b(z + h) - b(z - h)) / (2.0 * h);
    }
    cplx e = eta(z), ep = eta_prime(z);
    if (std::abs(e) < 1e-280)
        throw NumericError("zero-of-eta", "eta vanished; B' undefined");
    return (e - z * ep) / (e * e);
}

cplx psi(const Measure& mu, cplx z) { return PsiKernel(mu).psi(z); }
cplx eta(const Measure& mu, cplx z) { return PsiKernel(mu).eta(z); }
cplx b_transform(const Measure& mu, cplx z) { return PsiKernel(mu).b(z); }

SigmaNearZero sigma_near_zero(const PsiKernel& k, cplx z, double tol) {
    cplx m = k.mean();
    if (k.space() == Space::circle) {
        if (std::abs(m) < 1e-12)
            throw ValidationError("sigma: circle law has (near) zero mean");
        if (std::abs(z) >= 1.0)
            throw ValidationError("sigma: z outside the unit disc");
    } else {
        if (!(z.imag() == 0.0 && z.real() < 0.0) && std::abs(z) > 1e-200)
            if (!in_slit_plane(z))
                throw ValidationError("sigma: z on the positive half-line cut");
    }
    if (std::abs(z) < 1e-200) {
        if (std::abs(m) < 1e-280 || !std::isfinite(m.real()))
            throw ValidationError("sigma: Sigma(0)=1/m undefined");
        return SigmaNearZero{1.0 / m, cplx(0.0, 0.0), 0.0, 0};
    }

    cplx w;
    if (std::isfinite(m.real()) && std::abs(m) > 1e-12)
        w = z / m;
    else
        w = z;
    auto in_dom = [&](cplx u) {
        return k.space() == Space::circle ? std::abs(u) < 1.0 : in_slit_plane(u);
    };
    if (!in_dom(w)) w = 0.5 * z;

    double res = std::abs(k.eta(w) - z);
    int it = 0;
    for (; it < 200 && res > tol; ++it) {
        cplx der = k.eta_prime(w);
        if (std::abs(der) < 1e-140)
            throw NumericError("inversion-radius",
                               "eta' vanished during Newton inversion");
        cplx step = (k.eta(w) - z) / der;
        double lambda = 1.0;
        bool improved = false;
        for (int halv = 0; halv < 60; ++halv) {
            cplx trial = w - lambda * step;
            if (in_dom(trial)) {
                double r2 = std::abs(k.eta(trial) - z);
                if (r2 < res) {
                    w = trial;
                    res = r2;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!improved) break;
    }
    if (res > tol)
        throw NumericError("inversion-radius",
                           "Newton inversion of eta did not reach tolerance " +
                               format_double(tol) + " (residual " +
                               format_double(res) + "); shrink |z|");
    return SigmaNearZero{w / z, w, res, it};
}

SigmaNearZero sigma_near_zero(const Measure& mu, cplx z, double tol) {
    return sigma_near_zero(PsiKernel(mu), z, tol);
}

double eta_inversion_radius(const Measure& mu) {
    PsiKernel k(mu);
    for (int e = 1; e <= 40; ++e) {
        double r = std::pow(2.0, -e);
        bool ok = true;
        for (int j = 0; j < 16 && ok; ++j) {
            cplx z;
            if (mu.space == Space::circle) {
                double th = -kPi + kTwoPi * (j + 0.5) / 16.0;
                z = r * cplx(std::cos(th), std::sin(th));
            } else {
                z = cplx(-r * (j + 1) / 16.0, 0.0);
            }
            try {
                sigma_near_zero(k, z);
            } catch (const Error&) {
                ok = false;
            }
        }
        if (ok) return r;
    }
    throw NumericError("inversion-radius", "no dyadic inversion radius found");
}

cplx g_transform(const PsiKernel& k, cplx z) {
    if (k.space() != Space::halfline)
        throw ValidationError("g_transform: requires a halfline measure");
    k.check_domain(z);
    // (z-1)(1-x)/(xz-1) = -(z-1)(1-x)/(1-xz) and
    // (1-x)/(1-xz) = (1/z)[(z-1)/(1-xz) + 1], so with
    // I1 = integral 1/(1-xz) dmu = 1 + psi(z):
    //   g(z) = -((z-1)/z) [ (z-1) I1 + 1 ].
    cplx I1 = 1.0 + k.psi(z);
    return -((z - 1.0) / z) * ((z - 1.0) * I1 + 1.0);
}

cplx g_transform(const Measure& scaled_mu, cplx z) {
    return g_transform(PsiKernel(scaled_mu), z);
}

EtaEvaluator eta_evaluator(std::shared_ptr<const PsiKernel> k) {
    EtaEvaluator ev;
    ev.domain = (k->space() == Space::circle) ? Domain::disc : Domain::slit_plane;
    ev.kind = TransformKind::eta;
    ev.provenance = Provenance::from_measure;
    ev.eval = [k](cplx z) { return k->eta(z); };
    return ev;
}

EtaEvaluator eta_evaluator(const Measure& mu) {
    return eta_evaluator(std::make_shared<const PsiKernel>(mu));
}

}  // namespace freemult
