// Acceptance suite: one pass/fail line per criterion, tolerances pinned.
// Usage: acceptance [path-to-freemult-cli]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "freemult/brownian.hpp"
#include "freemult/convolution.hpp"
#include "freemult/entropy.hpp"
#include "freemult/errors.hpp"
#include "freemult/experiments.hpp"
#include "freemult/levy_hinchin.hpp"
#include "freemult/measure.hpp"
#include "freemult/recovery.hpp"
#include "freemult/subordination.hpp"
#include "freemult/transforms.hpp"

using namespace freemult;

namespace {

std::string g_cli;
int g_failures = 0;

void criterion(int number, const std::string& name,
               const std::function<std::pair<bool, std::string>()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
        auto [o, d] = body();
        ok = o;
        detail = d;
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d. %-38s %s  (%.1f s)\n", ok ? "PASS" : "FAIL", number,
                name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(double v) { return format_double(v); }

Measure random_circle_measure(std::mt19937& rng, bool need_mean) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto nodes = uniform_circle_grid(256);
    std::vector<double> vals(nodes.size());
    double a = need_mean ? (0.3 + 0.4 * unif(rng)) : 0.6 * unif(rng);
    double b = (0.95 - a) * unif(rng);  // keep 1 + a cos + b cos(2.) positive
    double ph = kTwoPi * unif(rng);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        vals[i] = 1.0 + a * std::cos(nodes[i]) + b * std::cos(2.0 * nodes[i] + ph);
    Measure mu = Measure::from_density(Space::circle, nodes, vals, "", true);
    if (unif(rng) > 0.5) {
        double am = 0.2 * unif(rng) + 0.05;
        for (auto& v : mu.density->values) v *= (1.0 - am);
        mu.atoms.push_back(Atom{0.5 * (2.0 * unif(rng) - 1.0), am});
    }
    mu.validate();
    return mu;
}

Measure random_halfline_measure(std::mt19937& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double lo = 0.3 + 0.4 * unif(rng), hi = 1.5 + unif(rng);
    auto nodes = geometric_grid(lo, hi, 200);
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double t = (nodes[i] - lo) / (hi - lo);
        vals[i] = 0.2 + std::sin(kPi * t) + 0.3 * unif(rng) * t;
    }
    Measure mu = Measure::from_density(Space::halfline, nodes, vals, "", true);
    if (unif(rng) > 0.5) {
        double am = 0.3 * unif(rng) + 0.05;
        for (auto& v : mu.density->values) v *= (1.0 - am);
        mu.atoms.push_back(Atom{0.5 + 2.0 * unif(rng), am});
    }
    mu.validate();
    return mu;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    std::printf("acceptance suite\n");

    criterion(1, "transform identities for point masses", [] {
        std::mt19937 rng(1001);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            // halfline
            double c = 0.3 + 3.0 * unif(rng);
            Measure dc = Measure::point_mass(Space::halfline, c);
            PsiKernel k(dc);
            cplx z = std::polar(std::exp(2.0 * (2.0 * unif(rng) - 1.0)),
                                kPi * (0.05 + 0.9 * unif(rng)));
            worst = std::max(worst, std::abs(k.eta(z) - c * z) / (1.0 + std::abs(z)));
            worst = std::max(worst, std::abs(k.b(z) - 1.0 / c));
            cplx zs(-0.1 * unif(rng) - 1e-3, 0.0);
            worst = std::max(worst, std::abs(sigma_near_zero(k, zs).value - 1.0 / c));
            // circle rotation
            double th = kPi * (2.0 * unif(rng) - 1.0) * 0.99;
            Measure rot = Measure::point_mass(Space::circle, th);
            PsiKernel kc(rot);
            cplx zd = std::polar(0.95 * unif(rng), kTwoPi * unif(rng));
            cplx xi = std::polar(1.0, th);
            worst = std::max(worst, std::abs(kc.eta(zd) - xi * zd));
            cplx zd2 = std::polar(0.2 * unif(rng) + 1e-3, kTwoPi * unif(rng));
            worst = std::max(worst,
                             std::abs(sigma_near_zero(kc, zd2).value - 1.0 / xi));
        }
        return std::make_pair(worst <= 1e-14, "max dev " + fmt(worst) + " <= 1e-14");
    });

    criterion(2, "argument and Schwarz invariants", [] {
        std::mt19937 rng(1002);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int violations = 0;
        for (int m = 0; m < 10; ++m) {
            Measure mu = random_circle_measure(rng, false);
            PsiKernel k(mu);
            for (int i = 0; i < 100; ++i) {
                cplx z = std::polar(std::sqrt(unif(rng)) * 0.999,
                                    kTwoPi * unif(rng) - kPi);
                if (!(std::abs(k.eta(z)) <= std::abs(z) + 1e-12)) ++violations;
            }
            Measure nu = random_halfline_measure(rng);
            PsiKernel kh(nu);
            for (int i = 0; i < 100; ++i) {
                cplx z = std::polar(std::exp(3.0 * (2.0 * unif(rng) - 1.0)),
                                    kPi * (0.02 + 0.96 * unif(rng)));
                cplx e = kh.eta(z);
                if (!(std::arg(e) >= std::arg(z) - 1e-10) || !(std::arg(e) < kPi))
                    ++violations;
            }
        }
        return std::make_pair(violations == 0,
                              std::to_string(violations) + " violations");
    });

    criterion(3, "subordination residual certification", [] {
        double worst = 0.0;
        auto sol1 = power_subordination_halfline(chi_measure(0.125, 1024), 8);
        worst = std::max(worst, sol1.residual_sup);
        auto sol2 = power_subordination_circle(lambda_measure(0.125, 512), 8);
        worst = std::max(worst, sol2.residual_sup);
        auto sol3 = global_inverse_circle(
            [](cplx w) { return (1.0 + w) / (2.0 - 2.0 * w); });
        worst = std::max(worst, sol3.residual_sup);
        auto sol4 = power_subordination_halfline(
            Measure::point_mass(Space::halfline, 1.4), 5);
        worst = std::max(worst, sol4.residual_sup);
        return std::make_pair(worst <= 1e-10, "sup residual " + fmt(worst));
    });

    criterion(4, "chi semigroup oracle (k=8)", [] {
        auto res = free_power(chi_measure(1.0 / 8, 2048), 8, 2048);
        auto [x1, x2] = chi_support(1.0);
        const auto& d = *res.measure.density;
        auto target = chi_density_grid(1.0, d.nodes);
        double worst = 0.0;
        for (std::size_t i = 0; i < d.nodes.size(); ++i) {
            if (d.nodes[i] < x1 + 0.05 || d.nodes[i] > x2 - 0.05) continue;
            worst = std::max(worst, std::abs(d.values[i] - target[i]));
        }
        return std::make_pair(worst <= 1e-3, "window sup " + fmt(worst) + " <= 1e-3");
    });

    criterion(5, "lambda semigroup oracle (k=8)", [] {
        Measure root = lambda_measure(1.0 / 8, 1024);
        auto res = free_power(root, 8, 512);
        const auto& d = *res.measure.density;
        auto target = lambda_density_grid(1.0, d.nodes);
        double worst = 0.0;
        for (std::size_t i = 0; i < d.nodes.size(); ++i)
            worst = std::max(worst, std::abs(d.values[i] - target[i]));
        // internal agreement of the power formula with the composed route
        auto sol = power_subordination_circle(root, 8);
        auto kern = std::make_shared<const PsiKernel>(root);
        TwoFoldEta rho(kern, kern);
        double agree = 0.0;
        for (cplx z : circle_evaluation_set(128))
            agree = std::max(agree, std::abs(eta_power_circle(sol, 8, z) -
                                             rho.eta(sol.omega(z))));
        bool ok = worst <= 5e-3 && agree <= 1e-8;
        return std::make_pair(ok, "sup " + fmt(worst) + " <= 5e-3, routes " +
                                      fmt(agree) + " <= 1e-8");
    });

    criterion(6, "haar superconvergence (two atoms)", [] {
        Measure mu;
        mu.space = Space::circle;
        mu.atoms = {Atom{0.0, 0.95}, Atom{kPi, 0.05}};
        mu.validate();
        Config cfg;
        cfg.circle_grid = 512;
        std::vector<int> ns = {8, 64};
        auto rep = run_haar_superconvergence(mu, ns, cfg);
        double s8 = rep.records[0].sup_distance, s64 = rep.records[1].sup_distance;
        bool ok = s64 <= 1e-2 && s64 < s8;
        return std::make_pair(ok, "sup(64) " + fmt(s64) + " <= 1e-2 < sup(8) " +
                                      fmt(s8));
    });

    criterion(7, "support endpoints and boundary zeros", [] {
        double worst_prod = 0.0;
        for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            auto [x1, x2] = chi_support(t);
            worst_prod = std::max(worst_prod, std::abs(x1 * x2 - 1.0));
        }
        auto [x1, x2] = chi_support(1.0);
        double f1 = chi_density(1.0, x1), f2 = chi_density(1.0, x2);
        double fpi = lambda_density(4.0, kPi);
        bool ok = worst_prod <= 1e-12 && f1 <= 1e-6 && f2 <= 1e-6 && fpi <= 1e-6;
        return std::make_pair(ok, "x1*x2 dev " + fmt(worst_prod) + ", endpoint " +
                                      fmt(std::max({f1, f2, fpi})));
    });

    criterion(8, "radial monotonicity functional", [] {
        std::mt19937 rng(1008);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int violations = 0;
        for (int trial = 0; trial < 100; ++trial) {
            SigmaMeasure sig;
            int na = 1 + int(unif(rng) * 3);
            for (int a = 0; a < na; ++a)
                sig.atoms.push_back(
                    Atom{kPi * (2.0 * unif(rng) - 1.0) * 0.99, 0.1 + unif(rng)});
            double theta = kPi * (2.0 * unif(rng) - 1.0) * 0.99;
            double prev = -1e300;
            for (int i = 1; i <= 64; ++i) {
                double v = radial_h(sig, theta, double(i) / 65.0);
                if (!(v > prev)) ++violations;
                prev = v;
            }
        }
        return std::make_pair(violations == 0,
                              std::to_string(violations) + " violations");
    });

    criterion(9, "free entropy values and flow", [] {
        double haar = std::abs(free_entropy(Measure::haar(2048)).value);
        auto nodes = uniform_circle_grid(2048);
        std::vector<double> vals(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            vals[i] = (1.0 + std::cos(nodes[i])) / kTwoPi;
        Measure cosm = Measure::from_density(Space::circle, nodes, vals, "", true);
        double series = free_entropy(cosm).value;
        double quad = free_entropy_quadrature(cosm);
        bool flows = true;
        double prev = std::numeric_limits<double>::infinity(), last = 0.0;
        for (double t : {1.0, 2.0, 4.0, 16.0}) {
            last = std::abs(free_entropy(lambda_measure(t, 2048)).value);
            if (!(last < prev)) flows = false;
            prev = last;
        }
        bool ok = haar <= 1e-10 && std::abs(series + 0.25) <= 1e-6 &&
                  std::abs(series - quad) <= 1e-5 && flows && last <= 1e-2;
        return std::make_pair(
            ok, "haar " + fmt(haar) + ", cos " + fmt(series) + " (quad gap " +
                    fmt(std::abs(series - quad)) + "), |S(l16)| " + fmt(last));
    });

    criterion(10, "product limit of B transforms (n=256)", [] {
        ArrayRow row;
        row.c_n = 1.0;
        Measure root = chi_measure(1.0 / 256, 1024);
        for (int i = 0; i < 256; ++i) row.measures.push_back(root);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            double ang = kTwoPi * (i + 0.5) / 100.0;
            cplx z = cplx(-1.0, 0.0) + 0.5 * std::polar(1.0, ang);
            cplx got = array_limit_transform(row, z);
            cplx want = brownian_sigma(BrownianFamily::chi, 1.0, z);
            worst = std::max(worst, std::abs(got - want));
        }
        return std::make_pair(worst <= 1e-3, "disc sup " + fmt(worst) + " <= 1e-3");
    });

    criterion(11, "boolean-to-free correspondence (n=128)", [] {
        SigmaMeasure sigma = SigmaMeasure::point(1.0, 0.5);
        const int n = 128;
        // recombination in B-log space is exact
        double recomb = 0.0;
        for (cplx z : {cplx(-1.0, 0.0), cplx(0.5, 1.0), cplx(-3.0, -0.2)}) {
            cplx whole = nevanlinna_transform(sigma, 0.0, z);
            cplx part = nevanlinna_transform(sigma, 0.0, z) / double(n);
            recomb = std::max(recomb, std::abs(double(n) * part - whole) /
                                          std::max(1.0, std::abs(whole)));
        }
        auto expo = [&](cplx z) { return nevanlinna_transform(sigma, 0.0, z) / double(n); };
        auto expo_p = [&](cplx z) {
            return nevanlinna_transform_prime(sigma, z) / double(n);
        };
        auto res = free_power_from_b_exponent(expo, expo_p, n, 1024);
        auto [x1, x2] = chi_support(1.0);
        const auto& d = *res.measure.density;
        auto target = chi_density_grid(1.0, d.nodes);
        // interior window [x1+0.1, x2-0.1]: the correspondence is local
        // uniform on compacts; the measured deviation halves per doubled n
        double worst = 0.0;
        for (std::size_t i = 0; i < d.nodes.size(); ++i) {
            if (d.nodes[i] < x1 + 0.1 || d.nodes[i] > x2 - 0.1) continue;
            worst = std::max(worst, std::abs(d.values[i] - target[i]));
        }
        bool ok = worst <= 1e-2 && recomb <= 1e-12;
        return std::make_pair(ok, "window(0.1) sup " + fmt(worst) +
                                      " <= 1e-2, recombination " + fmt(recomb));
    });

    criterion(12, "mean multiplicativity over random pairs", [] {
        std::mt19937 rng(1012);
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            Measure mu = random_circle_measure(rng, true);
            Measure nu = random_circle_measure(rng, true);
            auto a = std::make_shared<const PsiKernel>(mu);
            auto b = std::make_shared<const PsiKernel>(nu);
            TwoFoldEta sys(a, b, 1e-13);
            cplx want = moment(mu, 1) * moment(nu, 1);
            worst = std::max(worst, std::abs(sys.mean_from_eta() - want));
        }
        return std::make_pair(worst <= 1e-8, "max dev " + fmt(worst) + " <= 1e-8");
    });

    criterion(13, "CLI determinism", [] {
        if (g_cli.empty())
            return std::make_pair(false, std::string("no CLI path supplied"));
        std::string d1 = "/tmp/freemult_acc_1.csv", d2 = "/tmp/freemult_acc_2.csv";
        std::string cmd1 = g_cli + " density --law lambda --t 1 --grid 256 --out " +
                           d1 + " >/dev/null 2>&1";
        std::string cmd2 = g_cli + " density --law lambda --t 1 --grid 256 --out " +
                           d2 + " >/dev/null 2>&1";
        if (std::system(cmd1.c_str()) != 0 || std::system(cmd2.c_str()) != 0)
            return std::make_pair(false, std::string("cli run failed"));
        std::string a = slurp(d1), b = slurp(d2);
        bool ok = !a.empty() && a == b;
        std::string e1 = "/tmp/freemult_acc_e1", e2 = "/tmp/freemult_acc_e2";
        std::string c3 = g_cli + " experiment haar --mean 0.5 --nlist 4,8 --grid 256 --out " +
                         e1 + " >/dev/null 2>&1";
        std::string c4 = g_cli + " experiment haar --mean 0.5 --nlist 4,8 --grid 256 --out " +
                         e2 + " >/dev/null 2>&1";
        if (std::system(c3.c_str()) != 0 || std::system(c4.c_str()) != 0)
            return std::make_pair(false, std::string("experiment run failed"));
        ok = ok && slurp(e1 + "/report.json") == slurp(e2 + "/report.json") &&
             !slurp(e1 + "/report.json").empty();
        return std::make_pair(ok, std::string(ok ? "byte-identical" : "outputs differ"));
    });

    std::printf("%d/13 criteria passed\n", 13 - g_failures);
    return g_failures;
}
