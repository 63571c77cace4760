#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "freemult/brownian.hpp"
#include "freemult/errors.hpp"
#include "freemult/recovery.hpp"
#include "freemult/subordination.hpp"
#include "freemult/transforms.hpp"

using namespace freemult;

TEST_CASE("haar recovers the flat density exactly at every level") {
    EtaEvaluator zero{Domain::disc, TransformKind::eta, Provenance::composite,
                      [](cplx) { return cplx(0.0, 0.0); }};
    auto grid = uniform_circle_grid(128);
    auto prof = poisson_density_circle(zero, grid);
    for (std::size_t i = 0; i < prof.values.size(); ++i) {
        CHECK(prof.values[i] == doctest::Approx(1.0 / kTwoPi).epsilon(1e-12));
        CHECK(prof.unreliable[i] == 0);
    }
    CHECK(prof.mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("point mass on the circle shows up as a flagged atom") {
    EtaEvaluator id{Domain::disc, TransformKind::eta, Provenance::composite,
                    [](cplx z) { return z; }};  // point mass at angle 0
    auto grid = uniform_circle_grid(256);
    auto prof = poisson_density_circle(id, grid);
    auto rep = atom_report(id, prof);
    CHECK(rep.deficit == doctest::Approx(1.0).epsilon(2e-2));
    REQUIRE(rep.atoms.size() == 1);
    CHECK(std::abs(rep.atoms[0].pos) < 1e-9);
    CHECK_FALSE(rep.ambiguous);
}

TEST_CASE("point mass on the halfline") {
    double c = 1.5;
    Measure dc = Measure::point_mass(Space::halfline, c);
    EtaEvaluator ev = eta_evaluator(dc);
    // grid containing c as a node
    auto grid = uniform_grid(0.5, 2.5, 201);
    auto prof = stieltjes_density_halfline(ev, grid);
    auto rep = atom_report(ev, prof);
    CHECK(rep.deficit == doctest::Approx(1.0).epsilon(2e-2));
    REQUIRE(rep.atoms.size() == 1);
    CHECK(rep.atoms[0].pos == doctest::Approx(c));
    CHECK_FALSE(rep.ambiguous);
    // off the atom the density is essentially zero
    double off = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - c) > 0.1) off = std::max(off, prof.values[i]);
    CHECK(off < 1e-4);
}

TEST_CASE("chi closed form against the stieltjes pipeline") {
    double t = 1.0;
    auto E = [t](cplx w) { return t * (1.0 + w) / (2.0 * w - 2.0); };
    auto Ep = [t](cplx w) { cplx d = w - 1.0; return -t / (d * d); };
    auto [x1, x2] = chi_support(t);
    auto sol = global_inverse_halfline(E, Ep, {x1, x2});
    auto grid = geometric_grid(x1 * 0.97, x2 * 1.03, 400);
    auto prof = stieltjes_density_halfline(sol.omega, grid);

    double worst_interior = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < x1 + 0.05 || grid[i] > x2 - 0.05) continue;
        worst_interior =
            std::max(worst_interior, std::abs(prof.values[i] - chi_density(t, grid[i])));
    }
    CHECK(worst_interior <= 1e-3);

    // normalization audit: profile mass ~ 1 (no atoms here)
    CHECK(prof.mass() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(atom_report(sol.omega, prof).atoms.empty());
}

TEST_CASE("lambda closed form against the poisson pipeline") {
    double t = 1.0;
    auto sol = global_inverse_circle(
        [t](cplx w) { return t * (1.0 + w) / (2.0 - 2.0 * w); });
    auto grid = uniform_circle_grid(512);
    auto prof = poisson_density_circle(sol.omega, grid);
    auto sup1 = lambda_support(t);
    double worst_interior = 0.0, worst_all = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double err = std::abs(prof.values[i] - lambda_density(t, grid[i]));
        worst_all = std::max(worst_all, err);
        if (std::abs(std::abs(grid[i]) - sup1.theta1) > 0.05)
            worst_interior = std::max(worst_interior, err);
    }
    CHECK(worst_interior <= 1e-4);
    CHECK(worst_all <= 5e-3);  // sqrt edges slow the radial limit down
    CHECK(prof.mass() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("round trip through eta for a smooth circle law") {
    auto nodes = uniform_circle_grid(512);
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        vals[i] = (1.0 + 0.6 * std::cos(nodes[i])) / kTwoPi;
    Measure mu = Measure::from_density(Space::circle, nodes, vals, "", true);
    EtaEvaluator ev = eta_evaluator(mu);
    auto prof = poisson_density_circle(ev, nodes);
    double worst = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        worst = std::max(worst, std::abs(prof.values[i] - vals[i]));
    CHECK(worst <= 1e-3);
    Measure back = measure_from_recovery(ev, nodes);
    back.validate();
    CHECK(back.atoms.empty());
}

TEST_CASE("atom and density mixture splits correctly") {
    auto nodes = uniform_circle_grid(256);
    std::vector<double> vals(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        vals[i] = (1.0 + 0.4 * std::sin(nodes[i])) / kTwoPi;
    Measure mu = Measure::from_density(Space::circle, nodes, vals, "", true);
    for (auto& v : mu.density->values) v *= 0.5;
    mu.atoms.push_back(Atom{0.0, 0.5});  // grid node
    mu.validate();
    EtaEvaluator ev = eta_evaluator(mu);
    auto prof = poisson_density_circle(ev, nodes);
    auto rep = atom_report(ev, prof);
    CHECK(rep.deficit == doctest::Approx(0.5).epsilon(0.05));
    REQUIRE(rep.atoms.size() == 1);
    CHECK(std::abs(rep.atoms[0].pos) < 1e-9);
    CHECK_FALSE(rep.ambiguous);

    Measure back = measure_from_recovery(ev, nodes);
    back.validate();
    REQUIRE(back.atoms.size() == 1);
    CHECK(back.atoms[0].mass == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("profile values stay above the noise floor") {
    // recovered density >= -1e-6 before clamping, everywhere: the stored
    // values are clamped at zero, so check non-negativity and flags
    double t = 0.5;
    auto sol = global_inverse_circle(
        [t](cplx w) { return t * (1.0 + w) / (2.0 - 2.0 * w); });
    auto grid = uniform_circle_grid(256);
    auto prof = poisson_density_circle(sol.omega, grid);
    for (double v : prof.values) CHECK(v >= 0.0);
}
