#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/inequalities.hpp"

using namespace fraclab;

TEST_CASE("Poincare constant scales exactly like eps^s") {
    for (double p : {2.0, 3.0}) {
        for (double s : {0.3, 0.7}) {
            MinimizerOptions mo;
            mo.max_iters = 30000;
            mo.tol_rel_decrease = 1e-14;
            mo.patience = 10;
            const double c1 = poincare_constant(32, {s, p}, 1.0, 6, mo);
            const double ce = poincare_constant(32, {s, p}, 0.25, 6, mo);
            CHECK(ce == doctest::Approx(std::pow(0.25, s) * c1).epsilon(1e-10));
        }
    }
}

TEST_CASE("Poincare constant is stable under cell doubling") {
    const FracParams params{0.5, 2.0};
    const double c64 = poincare_constant(64, params, 1.0);
    const double c128 = poincare_constant(128, params, 1.0);
    CHECK(std::abs(c128 - c64) / c64 <= 1e-3);
    CHECK(c64 > 0.0);
}

TEST_CASE("Poincare constant decreases with s at fixed grid") {
    // reporting-only observation in the spec; here it guards against gross
    // regressions of the eigenvalue route
    const double c03 = poincare_constant(64, {0.3, 2.0}, 1.0);
    const double c07 = poincare_constant(64, {0.7, 2.0}, 1.0);
    CHECK(c03 > 0.0);
    CHECK(c07 > 0.0);
    CHECK(c07 < c03);
}

TEST_CASE("Poincare general-p route agrees with the eigenvalue route at p = 2") {
    MinimizerOptions mo;
    mo.max_iters = 30000;
    mo.tol_rel_decrease = 1e-14;
    mo.patience = 10;
    const double exact = poincare_constant(32, {0.5, 2.0}, 1.0);
    // drive the descent machinery through a nearby p and back: p = 2 exactly
    // uses the eigen route, so compare against p slightly above 2
    const double near = poincare_constant(32, {0.5, 2.000001}, 1.0, 6, mo);
    CHECK(near == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("oscillation ratio vanishes for constant weight and is scale invariant") {
    const Grid1D g = make_grid(0.0, 1.0, 128);
    const auto disc = build_discretization(g, {0.5, 2.0}, FormVariant::DirichletExterior, 6);
    CHECK(oscillation_ratio(PeriodicWeight::constant(3.0), 0.25, disc, 8, 1) == 0.0);

    // determinism for a fixed seed
    const auto w = PeriodicWeight::sinusoid(2.0, 1.0);
    const double r1 = oscillation_ratio(w, 0.25, disc, 8, 99);
    const double r2 = oscillation_ratio(w, 0.25, disc, 8, 99);
    CHECK(r1 == r2);
    CHECK(r1 > 0.0);

    // the quotient itself is invariant under probe rescaling: check the
    // natural formula on one vector
    const MassMatrix m_rho = assemble_mass(g, sample_weight(w, g, 0.25), 2.0, disc.variant);
    const MassMatrix m_unit = assemble_unit_mass(g, 2.0, disc.variant);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(disc.n_dofs());
    for (double& x : v) x = gauss(rng);
    auto ratio_of = [&](const std::vector<double>& u) {
        const double osc = std::abs(m_rho.value(u) - w.mean() * m_unit.value(u));
        const double denom = std::sqrt(energy_p(u, disc)) * std::sqrt(m_unit.value(u));
        return osc / denom;
    };
    std::vector<double> tv(v);
    for (double& x : tv) x *= 7.5;
    CHECK(ratio_of(v) == doctest::Approx(ratio_of(tv)).epsilon(1e-12));
}

TEST_CASE("oscillation ratio under-resolution error") {
    const Grid1D g = make_grid(0.0, 1.0, 16);
    const auto disc = build_discretization(g, {0.5, 2.0}, FormVariant::DirichletExterior, 6);
    CHECK_THROWS_AS(oscillation_ratio(PeriodicWeight::sinusoid(2.0, 1.0), 0.05, disc, 4, 1),
                    ResolutionError);
}

TEST_CASE("normalized oscillation ratio stays within a factor 10") {
    const Grid1D g = make_grid(0.0, 1.0, 256);
    const auto disc = build_discretization(g, {0.5, 2.0}, FormVariant::DirichletExterior, 6);
    const auto w = PeriodicWeight::sinusoid(2.0, 1.0);
    std::vector<double> normalized;
    for (double eps : {1.0 / 4, 1.0 / 8, 1.0 / 16}) {
        normalized.push_back(oscillation_ratio(w, eps, disc, 12, 321) / std::sqrt(eps));
    }
    const double hi = *std::max_element(normalized.begin(), normalized.end());
    const double lo = *std::min_element(normalized.begin(), normalized.end());
    CHECK(hi / lo <= 10.0);
}

TEST_CASE("oscillation ratio with the Neumann normalizer") {
    const Grid1D g = make_grid(0.0, 1.0, 128);
    const auto disc = build_discretization(g, {0.75, 2.0}, FormVariant::RegionalNeumann, 6);
    const double r = oscillation_ratio(PeriodicWeight::sinusoid(2.0, 1.0), 0.25, disc, 8, 11);
    CHECK(r > 0.0);
    CHECK(oscillation_ratio(PeriodicWeight::constant(2.0), 0.25, disc, 8, 11) == 0.0);
}

TEST_CASE("boundary layer constant: full window, monotonicity, hypothesis") {
    const FracParams params{0.75, 2.0};
    const int n = 128;
    // G_{1/2} covers the whole interval: sigma = 1 via the constant function
    const double full = boundary_layer_constant(0.5, params, n);
    CHECK(std::pow(full, 2.0) == doctest::Approx(1.0).epsilon(1e-10));

    double prev = full;
    for (double d : {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        const double c = boundary_layer_constant(d, params, n);
        CHECK(std::pow(c, 2.0) <= std::pow(prev, 2.0) * (1.0 + 1e-12));
        CHECK(c > 0.0);
        CHECK(c <= 1.0 + 1e-12);
        prev = c;
    }

    CHECK_THROWS_AS(boundary_layer_constant(0.25, FracParams{0.4, 2.0}, n), HypothesisError);
    CHECK_THROWS_AS(boundary_layer_constant(0.0, params, n), std::invalid_argument);
    CHECK_THROWS_AS(boundary_layer_constant(0.7, params, n), std::invalid_argument);
}

TEST_CASE("boundary layer slope near 1 for s = 0.75") {
    const FracParams params{0.75, 2.0};
    const int n = 128;
    std::vector<std::pair<double, double>> pairs;
    for (double d : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const double c = boundary_layer_constant(d, params, n);
        pairs.emplace_back(d, std::pow(c, 2.0));
    }
    const RateFit fit = fit_rate(pairs);
    CHECK(fit.slope >= 0.9);
}

TEST_CASE("boundary layer general-p route stays in (0,1] and under the window value") {
    const FracParams params{0.75, 3.0};
    const double c = boundary_layer_constant(0.25, params, 64);
    CHECK(c > 0.0);
    CHECK(c <= 1.0 + 1e-10);
}

TEST_CASE("pointwise p-inequality") {
    const double x1[] = {2.0};
    const double y1[] = {1.0};
    CHECK(pointwise_p_inequality({x1, 1}, {y1, 1}, 2.0));
    const double x2[] = {1.0};
    const double y2[] = {0.0};
    CHECK(pointwise_p_inequality({x2, 1}, {y2, 1}, 3.0));
    CHECK_THROWS_AS(pointwise_p_inequality({x1, 1}, {y1, 1}, 1.0), std::invalid_argument);

    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double ps[] = {1.5, 2.0, 3.0, 4.0};
    for (int trial = 0; trial < 10000; ++trial) {
        double x[3], y[3];
        for (int d = 0; d < 3; ++d) {
            x[d] = gauss(rng);
            y[d] = gauss(rng);
        }
        CHECK(pointwise_p_inequality({x, 3}, {y, 3}, ps[trial % 4]));
    }
}

TEST_CASE("general weight convergence: constant family is exact") {
    const Grid1D g = make_grid(0.0, 1.0, 64);
    const auto disc = build_discretization(g, {0.5, 2.0}, FormVariant::DirichletExterior, 6);
    const auto w = PeriodicWeight::constant(2.0);
    std::vector<WeightField> family;
    for (double eps : {1.0 / 4, 1.0 / 8}) family.push_back(sample_weight(w, g, eps));
    const WeightField limit = sample_weight(w, g, limit_eps);
    const ConstantReport rep = general_weight_convergence(family, limit, disc, 3);
    CHECK(rep.converged);
    for (double e : rep.constants) CHECK(e <= 1e-11);
}

TEST_CASE("general weight convergence: periodic family cross-checks the sweep") {
    SweepConfig cfg;
    cfg.n_cells = 128;
    cfg.params = {0.5, 2.0};
    cfg.variant = FormVariant::DirichletExterior;
    cfg.weight = PeriodicWeight::sinusoid(2.0, 1.0);
    cfg.eps_list = {1.0 / 4, 1.0 / 8};
    cfg.K = 2;
    const SweepReport swept = sweep(cfg);

    const Grid1D g = make_grid(0.0, 1.0, 128);
    const auto disc = build_discretization(g, cfg.params, cfg.variant, 6);
    std::vector<WeightField> family;
    for (double eps : cfg.eps_list) family.push_back(sample_weight(cfg.weight, g, eps));
    const ConstantReport rep = general_weight_convergence(
        family, sample_weight(cfg.weight, g, limit_eps), disc, 2);
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
        double sweep_err = 0.0;
        for (int k = 1; k <= 2; ++k) {
            sweep_err = std::max(sweep_err, swept.find(cfg.eps_list[i], k)->error);
        }
        CHECK(rep.constants[i] == doctest::Approx(sweep_err).epsilon(1e-12));
    }
}

TEST_CASE("general weight convergence: non-periodic family with weak* limit") {
    // rho_eps(x) = 2 + sin(2 pi x / eps) (1 + x)/2 converges weak* to 2
    const Grid1D g = make_grid(0.0, 1.0, 512);
    const auto disc = build_discretization(g, {0.5, 2.0}, FormVariant::DirichletExterior, 6);
    std::vector<WeightField> family;
    for (double eps : {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        WeightField f;
        f.grid = g;
        f.epsilon = eps;
        f.rho_minus = 1.0;
        f.rho_plus = 3.0;
        f.cell_values.resize(g.n_cells);
        for (int i = 0; i < g.n_cells; ++i) {
            const double x = g.cell_midpoint(i);
            f.cell_values[i] = 2.0 + std::sin(2.0 * M_PI * x / eps) * 0.5 * (1.0 + x);
        }
        family.push_back(std::move(f));
    }
    WeightField limit;
    limit.grid = g;
    limit.is_limit = true;
    limit.rho_minus = limit.rho_plus = 2.0;
    limit.cell_values.assign(g.n_cells, 2.0);
    const ConstantReport rep = general_weight_convergence(family, limit, disc, 2);
    CHECK(rep.converged);
    CHECK(rep.constants.back() < rep.constants.front());
}
