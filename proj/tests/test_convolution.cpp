#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "freemult/brownian.hpp"
#include "freemult/convolution.hpp"
#include "freemult/errors.hpp"
#include "freemult/levy_hinchin.hpp"

using namespace freemult;

namespace {

Measure random_mean_bounded_circle(std::mt19937& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto nodes = uniform_circle_grid(256);
    std::vector<double> vals(nodes.size());
    double a = 0.25 + 0.5 * unif(rng);  // solid first harmonic => nonzero mean
    double b = 0.3 * unif(rng);
    double ph = kTwoPi * unif(rng);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        vals[i] = 1.0 + a * std::cos(nodes[i]) + b * std::cos(2.0 * nodes[i] + ph);
    Measure mu = Measure::from_density(Space::circle, nodes, vals, "", true);
    if (unif(rng) > 0.6) {
        double am = 0.2 * unif(rng) + 0.05;
        for (auto& v : mu.density->values) v *= (1.0 - am);
        mu.atoms.push_back(Atom{0.4 * (2.0 * unif(rng) - 1.0), am});
    }
    mu.validate();
    return mu;
}

double sup_density_distance(const Measure& got, double t_target,
                            bool circle = true, double skip_edges = 0.0) {
    const auto& d = *got.density;
    double worst = 0.0;
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
        double want;
        if (circle) {
            auto sup = lambda_support(t_target);
            if (skip_edges > 0.0 &&
                std::abs(std::abs(d.nodes[i]) - sup.theta1) < skip_edges)
                continue;
            want = lambda_density(t_target, d.nodes[i]);
        } else {
            auto [x1, x2] = chi_support(t_target);
            if (skip_edges > 0.0 &&
                (d.nodes[i] < x1 + skip_edges || d.nodes[i] > x2 - skip_edges))
                continue;
            want = chi_density(t_target, d.nodes[i]);
        }
        worst = std::max(worst, std::abs(d.values[i] - want));
    }
    return worst;
}

}  // namespace

TEST_CASE("two-fold free convolution: rotation atoms") {
    double t1 = 0.7, t2 = -1.1;
    auto r = free_convolve_circle(Measure::point_mass(Space::circle, t1),
                                  Measure::point_mass(Space::circle, t2));
    REQUIRE(r.measure.atoms.size() == 1);
    CHECK(r.measure.atoms[0].pos == doctest::Approx(t1 + t2).epsilon(1e-9));
    CHECK(r.measure.atoms[0].mass == doctest::Approx(1.0).epsilon(5e-2));
    CHECK(r.identity_residual_sup <= 1e-9);

    // halfline point masses multiply
    auto h = free_convolve_halfline(Measure::point_mass(Space::halfline, 2.0),
                                    Measure::point_mass(Space::halfline, 0.6));
    REQUIRE(h.measure.atoms.size() == 1);
    CHECK(h.measure.atoms[0].pos == doctest::Approx(1.2).epsilon(1e-6));
}

TEST_CASE("two-fold free convolution: mean multiplicativity") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 8; ++trial) {
        Measure mu = random_mean_bounded_circle(rng);
        Measure nu = random_mean_bounded_circle(rng);
        cplx want = moment(mu, 1) * moment(nu, 1);
        auto a = std::make_shared<const PsiKernel>(mu);
        auto b = std::make_shared<const PsiKernel>(nu);
        TwoFoldEta sys(a, b, 1e-13);
        CHECK(std::abs(sys.mean_from_eta() - want) <= 1e-8);
    }
}

TEST_CASE("two-fold free convolution: lambda semigroup") {
    Measure l05 = lambda_measure(0.5, 1024);
    auto r = free_convolve_circle(l05, l05, 512);
    CHECK(sup_density_distance(r.measure, 1.0) <= 1e-4);
}

TEST_CASE("two-fold free convolution: chi semigroup") {
    Measure c05 = chi_measure(0.5, 1024);
    auto r = free_convolve_halfline(c05, c05, 512);
    // sup on the interior window: the boundary limit slows to sqrt-rate
    // at the sqrt-vanishing support ends
    CHECK(sup_density_distance(r.measure, 1.0, false, 0.05) <= 1e-4);
}

TEST_CASE("halfline convolution with a point mass is a pushforward") {
    Measure c1 = chi_measure(1.0, 512);
    double c = 1.5;
    auto r = free_convolve_halfline(c1, Measure::point_mass(Space::halfline, c), 512);
    // density of the pushforward under x -> c x
    Measure pushed = scale_measure(c1, 1.0 / c);
    const auto& d = *r.measure.density;
    DensityProfile ref;
    ref.space = Space::halfline;
    ref.nodes = pushed.density->nodes;
    ref.values = pushed.density->values;
    double worst = 0.0;
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
        if (d.nodes[i] < ref.nodes.front() + 0.08 || d.nodes[i] > ref.nodes.back() - 0.08)
            continue;  // sqrt edges again
        worst = std::max(worst, std::abs(d.values[i] - ref.interpolate(d.nodes[i])));
    }
    CHECK(worst <= 2e-3);
}

TEST_CASE("degenerate-mean error on the circle") {
    Measure haar = Measure::haar(128);
    Measure rot = Measure::point_mass(Space::circle, 0.3);
    CHECK_THROWS_WITH_AS(free_convolve_circle(haar, rot),
                         doctest::Contains("uniform law"), ValidationError);
}

TEST_CASE("boolean convolution closed forms") {
    // point masses multiply on both spaces
    auto c = boolean_convolve_circle(Measure::point_mass(Space::circle, 0.5),
                                     Measure::point_mass(Space::circle, 0.8));
    REQUIRE(c.measure.atoms.size() == 1);
    CHECK(c.measure.atoms[0].pos == doctest::Approx(1.3).epsilon(1e-9));

    auto hh = boolean_convolve_halfline(Measure::point_mass(Space::halfline, 2.0),
                                        Measure::point_mass(Space::halfline, 3.0));
    REQUIRE(hh.measure.atoms.size() == 1);
    CHECK(hh.measure.atoms[0].pos == doctest::Approx(6.0).epsilon(1e-6));

    // identity law is neutral
    std::mt19937 rng(7);
    Measure mu = random_mean_bounded_circle(rng);
    auto r = boolean_convolve_circle(mu, Measure::point_mass(Space::circle, 0.0));
    cplx z(0.4, 0.2);
    PsiKernel k(mu);
    CHECK(std::abs(r.eta(z) - k.eta(z)) < 1e-13);

    // Haar absorbs (eta identically zero)
    auto rh = boolean_convolve_circle(Measure::haar(256), mu);
    CHECK(std::abs(rh.eta(cplx(0.5, 0.1))) < 1e-12);
    double worst = 0.0;
    for (double v : rh.measure.density->values)
        worst = std::max(worst, std::abs(v - 1.0 / kTwoPi));
    CHECK(worst < 1e-9);
}

TEST_CASE("free powers: atoms and identities") {
    // (delta_c)^k = delta_{c^k}
    auto r = free_power(Measure::point_mass(Space::halfline, 1.2), 5, 512);
    REQUIRE(r.measure.atoms.size() == 1);
    CHECK(r.measure.atoms[0].pos == doctest::Approx(std::pow(1.2, 5)).epsilon(1e-6));

    // k=1 is the identity
    Measure l1 = lambda_measure(1.0, 256);
    auto id = free_power(l1, 1);
    CHECK(id.measure.density->nodes == l1.density->nodes);

    // rotation atoms with a large total angle go through the composed route
    auto rot = free_power(Measure::point_mass(Space::circle, 1.0), 7, 512);
    REQUIRE(rot.measure.atoms.size() == 1);
    double want = std::remainder(7.0, kTwoPi);
    CHECK(rot.measure.atoms[0].pos == doctest::Approx(want).epsilon(1e-6));

    CHECK_THROWS_AS(free_power(l1, 0), ValidationError);
}

TEST_CASE("free power semigroups at k=8") {
    auto rc = free_power(chi_measure(1.0 / 8, 2048), 8, 1024);
    CHECK(sup_density_distance(rc.measure, 1.0, false, 0.05) <= 1e-3);

    auto rl = free_power(lambda_measure(1.0 / 8, 512), 8, 256);
    CHECK(sup_density_distance(rl.measure, 1.0) <= 5e-3);
}

TEST_CASE("array limit transform") {
    // identical point-mass rows with the matching centering constant
    // cancel exactly: c_n = c^{-k} keeps nu_n at the identity law
    ArrayRow row;
    row.c_n = std::pow(1.3, -16);
    for (int i = 0; i < 16; ++i)
        row.measures.push_back(Measure::point_mass(Space::halfline, 1.3));
    for (cplx z : {cplx(-1.0, 0.0), cplx(0.3, 1.0)})
        CHECK(std::abs(array_limit_transform(row, z) - 1.0) < 1e-12);

    // log-sum equals the direct power for identical rows
    ArrayRow row2;
    row2.c_n = 1.0;
    Measure c = chi_measure(0.25, 512);
    for (int i = 0; i < 8; ++i) row2.measures.push_back(c);
    cplx z(-2.0, 0.0);
    cplx direct = std::pow(b_transform(c, z), 8);
    CHECK(std::abs(array_limit_transform(row2, z) - direct) <=
          1e-12 * std::abs(direct));

    // chi rows approach the closed-form sigma transform
    ArrayRow row3;
    row3.c_n = 1.0;
    Measure root = chi_measure(1.0 / 64, 1024);
    for (int i = 0; i < 64; ++i) row3.measures.push_back(root);
    cplx target = brownian_sigma(BrownianFamily::chi, 1.0, z);
    CHECK(std::abs(array_limit_transform(row3, z) - target) < 2e-3);
}

TEST_CASE("gnedenko criterion data") {
    // identity rows: sigma vanishes, gamma = -log c_n
    ArrayRow row;
    row.c_n = 2.0;
    for (int i = 0; i < 8; ++i)
        row.measures.push_back(Measure::point_mass(Space::halfline, 1.0));
    auto g = gnedenko_criterion(row);
    CHECK(g.sigma_total() == doctest::Approx(0.0));
    CHECK(g.gamma_n == doctest::Approx(-std::log(2.0)));

    // near-one atoms: sigma mass of order n (s/n)^2 -> 0
    for (int n : {8, 32, 128}) {
        ArrayRow r2;
        r2.c_n = 1.0;
        double s = 0.7;
        for (int i = 0; i < n; ++i)
            r2.measures.push_back(Measure::point_mass(Space::halfline, 1.0 + s / n));
        auto g2 = gnedenko_criterion(r2);
        CHECK(g2.sigma_total() <= 1.2 * n * sq(s / n) / (1.0 + sq(1.0 + s / n)) + 1e-12);
    }

    // chi rows converge toward the point mass at 1 with total t/2-ish mass
    ArrayRow r3;
    r3.c_n = 1.0;
    double t = 1.0;
    int n = 64;
    Measure root = chi_measure(t / n, 1024);
    for (int i = 0; i < n; ++i) r3.measures.push_back(root);
    auto g3 = gnedenko_criterion(r3);
    // weak target: (t/2) delta_1; compare total mass and center of mass
    CHECK(g3.sigma_total() == doctest::Approx(0.5 * t).epsilon(0.05));
    double first = 0.0;
    for (const auto& a : g3.sigma_atoms) first += a.pos * a.mass;
    if (g3.sigma_density) {
        const auto& d = *g3.sigma_density;
        for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i)
            first += 0.5 *
                     (d.nodes[i] * d.values[i] + d.nodes[i + 1] * d.values[i + 1]) *
                     (d.nodes[i + 1] - d.nodes[i]);
    }
    CHECK(first / g3.sigma_total() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("gnedenko data tightens along the semigroup rows") {
    double t = 1.0;
    double prev_mass_gap = 1e300, prev_center_gap = 1e300;
    for (int n : {16, 64}) {
        ArrayRow row;
        row.c_n = 1.0;
        Measure root = chi_measure(t / n, 1024);
        for (int i = 0; i < n; ++i) row.measures.push_back(root);
        auto g = gnedenko_criterion(row);
        double mass_gap = std::abs(g.sigma_total() - 0.5 * t);
        double first = 0.0;
        for (const auto& a : g.sigma_atoms) first += a.pos * a.mass;
        if (g.sigma_density) {
            const auto& d = *g.sigma_density;
            for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i)
                first += 0.5 *
                         (d.nodes[i] * d.values[i] + d.nodes[i + 1] * d.values[i + 1]) *
                         (d.nodes[i + 1] - d.nodes[i]);
        }
        double center_gap = std::abs(first / g.sigma_total() - 1.0);
        CHECK(mass_gap < prev_mass_gap);
        CHECK(center_gap < prev_center_gap);
        prev_mass_gap = mass_gap;
        prev_center_gap = center_gap;
    }
}

TEST_CASE("boolean power at k=1 is the identity") {
    Measure mu = lambda_measure(0.5, 512);
    auto r = boolean_power(mu, 1, 512);
    PsiKernel k(mu);
    for (cplx z : {cplx(0.3, 0.2), cplx(-0.5, 0.4)})
        CHECK(std::abs(r.eta(z) - k.eta(z)) < 1e-13);
}

TEST_CASE("associativity smoke test") {
    Measure a = lambda_measure(0.4, 512);
    Measure b = lambda_measure(0.3, 512);
    Measure c = lambda_measure(0.5, 512);
    auto ab_c = free_convolve_circle(free_convolve_circle(a, b, 512).measure, c, 512);
    auto a_bc = free_convolve_circle(a, free_convolve_circle(b, c, 512).measure, 512);
    const auto& d1 = *ab_c.measure.density;
    DensityProfile p2;
    p2.space = Space::circle;
    p2.nodes = a_bc.measure.density->nodes;
    p2.values = a_bc.measure.density->values;
    double worst = 0.0;
    for (std::size_t i = 0; i < d1.nodes.size(); ++i)
        worst = std::max(worst, std::abs(d1.values[i] - p2.interpolate(d1.nodes[i])));
    CHECK(worst <= 2e-3);
}
