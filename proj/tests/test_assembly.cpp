#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/gagliardo.hpp"
#include "fraclab/quadrature.hpp"

using namespace fraclab;

namespace {

// test-side adaptive Simpson, independent of the library quadrature
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

std::vector<double> random_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = gauss(rng);
    return v;
}

}  // namespace

TEST_CASE("exterior_density closed form") {
    CHECK(exterior_density(0.5, {0.5, 2.0}, 0.0, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(exterior_density(0.5, {0.25, 2.0}, 0.0, 1.0) ==
          doctest::Approx(4.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(exterior_density(0.25, {0.5, 2.0}, 0.0, 1.0) ==
          doctest::Approx(16.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(exterior_density(0.0, {0.5, 2.0}, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(exterior_density(1.5, {0.5, 2.0}, 0.0, 1.0), std::domain_error);
}

TEST_CASE("build_discretization validates arguments") {
    const Grid1D g = make_grid(0.0, 1.0, 8);
    CHECK_THROWS_AS(build_discretization(g, {0.5, 2.0}, FormVariant::DirichletExterior, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_discretization(g, {1.5, 2.0}, FormVariant::DirichletExterior, 6),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_discretization(g, {0.5, 0.5}, FormVariant::DirichletExterior, 6),
                    std::invalid_argument);
}

// Oracle built first: the total kernel mass over disjoint pairs (|i-j| >= 2)
// equals the adaptive quadrature of the double integral, inner integral in
// closed form via the kernel primitive.
TEST_CASE("disjoint-pair kernel mass against adaptive quadrature") {
    const int n = 16;
    const double s = 0.5, p = 2.0, sp = s * p;
    const Grid1D g = make_grid(0.0, 1.0, n);
    const auto disc = build_discretization(g, {s, p}, FormVariant::RegionalNeumann, 6);

    double table_mass = 0.0;
    for (const auto& tab : disc.gap_tables) {
        if (tab.gap < 2) continue;
        double w = 0.0;
        for (const auto& pt : tab.points) w += pt.w;
        table_mass += w * (n - tab.gap);
    }

    // inner closed form: primitive of t^{-(1+sp)} is -t^{-sp}/sp
    const auto primitive = [sp](double t) { return -std::pow(t, -sp) / sp; };
    const double h = g.h;
    double oracle = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto inner = [&](double x) {
            double acc = 0.0;
            if (i >= 2) {  // y in [0, (i-1) h], distance x - y
                acc += (primitive(x) - primitive(x - (i - 1) * h));
            }
            if (i + 2 < n) {  // y in [(i+2) h, 1], distance y - x
                acc += (primitive(1.0 - x) - primitive((i + 2) * h - x));
            }
            return acc;
        };
        // the inner integral covers y on both sides of x, so this already
        // counts every ordered pair
        oracle += integrate(inner, i * h, (i + 1) * h, 1e-12);
    }

    CHECK(table_mass == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("quad_order doubling leaves the p = 2 energy unchanged to 1e-8") {
    const Grid1D g = make_grid(0.0, 1.0, 64);
    for (auto variant : {FormVariant::DirichletExterior, FormVariant::RegionalNeumann}) {
        const auto d6 = build_discretization(g, {0.5, 2.0}, variant, 6);
        const auto d12 = build_discretization(g, {0.5, 2.0}, variant, 12);
        std::vector<double> hat(d6.n_dofs(), 0.0);
        hat[hat.size() / 2] = 1.0;
        const double e6 = energy_p(hat, d6);
        const double e12 = energy_p(hat, d12);
        CHECK(std::abs(e12 - e6) / e12 <= 1e-8);
    }
}

TEST_CASE("energy_p basic values") {
    const Grid1D g = make_grid(0.0, 1.0, 32);
    const auto dn = build_discretization(g, {0.6, 2.5}, FormVariant::RegionalNeumann, 6);
    std::vector<double> zero(dn.n_dofs(), 0.0);
    CHECK(energy_p(zero, dn) == 0.0);
    std::vector<double> ones(dn.n_dofs(), 1.0);
    // regional kernel annihilates constants (fp dust from 1-theta roundoff only)
    CHECK(energy_p(ones, dn) <= 1e-18);

    const auto dd = build_discretization(g, {0.6, 2.5}, FormVariant::DirichletExterior, 6);
    std::vector<double> zero_d(dd.n_dofs(), 0.0);
    CHECK(energy_p(zero_d, dd) == 0.0);
    std::vector<double> bad(dd.n_dofs() + 1, 0.0);
    CHECK_THROWS_AS(energy_p(bad, dd), std::invalid_argument);
}

TEST_CASE("p = 2 energy equals the assembled quadratic form") {
    std::mt19937_64 rng(7);
    const Grid1D g = make_grid(0.0, 1.0, 32);
    for (auto variant : {FormVariant::DirichletExterior, FormVariant::RegionalNeumann}) {
        const auto disc = build_discretization(g, {0.5, 2.0}, variant, 6);
        const StiffnessMatrix sm = assemble_form_p2(disc);
        for (int trial = 0; trial < 5; ++trial) {
            const auto u = random_vector(disc.n_dofs(), rng);
            const Eigen::Map<const Eigen::VectorXd> uv(u.data(), u.size());
            const double quad = uv.transpose() * sm.A * uv;
            const double e = energy_p(u, disc);
            CHECK(e == doctest::Approx(quad).epsilon(1e-10));
        }
    }
}

TEST_CASE("p = 2 gradient equals 2 A u") {
    std::mt19937_64 rng(8);
    const Grid1D g = make_grid(0.0, 1.0, 32);
    const auto disc = build_discretization(g, {0.5, 2.0}, FormVariant::DirichletExterior, 6);
    const StiffnessMatrix sm = assemble_form_p2(disc);
    const auto u = random_vector(disc.n_dofs(), rng);
    const Eigen::Map<const Eigen::VectorXd> uv(u.data(), u.size());
    const Eigen::VectorXd expected = 2.0 * (sm.A * uv);
    const auto grad = energy_grad_p(u, disc);
    for (int i = 0; i < disc.n_dofs(); ++i) {
        CHECK(grad[i] == doctest::Approx(expected[i]).epsilon(1e-10));
    }
    std::vector<double> zero(disc.n_dofs(), 0.0);
    for (double gi : energy_grad_p(zero, disc)) CHECK(gi == 0.0);
}

TEST_CASE("gradient matches central differences for p = 3") {
    std::mt19937_64 rng(9);
    const Grid1D g = make_grid(0.0, 1.0, 24);
    const auto disc = build_discretization(g, {0.4, 3.0}, FormVariant::DirichletExterior, 6);
    const auto u = random_vector(disc.n_dofs(), rng);
    const auto grad = energy_grad_p(u, disc);
    const double t = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
        const auto v = random_vector(disc.n_dofs(), rng);
        double dexp = 0.0;
        std::vector<double> up(u), um(u);
        for (int i = 0; i < disc.n_dofs(); ++i) {
            dexp += grad[i] * v[i];
            up[i] += t * v[i];
            um[i] -= t * v[i];
        }
        const double fd = (energy_p(up, disc) - energy_p(um, disc)) / (2.0 * t);
        CHECK(fd == doctest::Approx(dexp).epsilon(1e-7));
    }
}

TEST_CASE("stiffness matrix invariants") {
    const Grid1D g = make_grid(0.0, 1.0, 32);
    const auto dd = build_discretization(g, {0.5, 2.0}, FormVariant::DirichletExterior, 6);
    const StiffnessMatrix a = assemble_form_p2(dd);
    const double asym = (a.A - a.A.transpose()).cwiseAbs().maxCoeff();
    CHECK(asym <= 1e-12 * a.A.cwiseAbs().maxCoeff());

    // positive definiteness via an independent eigensolver
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.A);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    const auto dn = build_discretization(g, {0.5, 2.0}, FormVariant::RegionalNeumann, 6);
    const StiffnessMatrix an = assemble_form_p2(dn);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(an.A.rows());
    const double scale = an.A.cwiseAbs().maxCoeff();
    CHECK((an.A * ones).cwiseAbs().maxCoeff() <= 1e-10 * scale);
}

TEST_CASE("seminorm scaling identity across grids") {
    std::mt19937_64 rng(10);
    const int n = 32;
    for (double p : {1.5, 2.0, 3.0}) {
        for (double s : {0.3, 0.5, 0.8}) {
            const double eps = 0.125;
            const Grid1D g1 = make_grid(0.0, 1.0, n);
            const Grid1D ge = make_grid(0.0, eps, n);
            const auto d1 = build_discretization(g1, {s, p}, FormVariant::DirichletExterior, 6);
            const auto de = build_discretization(ge, {s, p}, FormVariant::DirichletExterior, 6);
            const auto u = random_vector(d1.n_dofs(), rng);
            const double e1 = energy_p(u, d1);
            const double ee = energy_p(u, de);
            const double factor = std::pow(eps, 1.0 - s * p);
            CHECK(ee == doctest::Approx(factor * e1).epsilon(1e-10));
        }
    }
}

TEST_CASE("energy is p-homogeneous and convex") {
    std::mt19937_64 rng(11);
    const Grid1D g = make_grid(0.0, 1.0, 24);
    for (double p : {1.5, 2.0, 3.0}) {
        const auto disc = build_discretization(g, {0.5, p}, FormVariant::DirichletExterior, 6);
        const auto u = random_vector(disc.n_dofs(), rng);
        const auto v = random_vector(disc.n_dofs(), rng);
        const double eu = energy_p(u, disc), ev = energy_p(v, disc);
        for (double t : {0.5, 2.0, -3.0}) {
            std::vector<double> tu(u);
            for (double& x : tu) x *= t;
            CHECK(energy_p(tu, disc) ==
                  doctest::Approx(std::pow(std::abs(t), p) * eu).epsilon(1e-12));
        }
        std::vector<double> mid(u);
        for (int i = 0; i < disc.n_dofs(); ++i) mid[i] = 0.5 * (u[i] + v[i]);
        CHECK(energy_p(mid, disc) <= 0.5 * (eu + ev) + 1e-12 * (eu + ev));
    }
}

TEST_CASE("mass functional values") {
    const Grid1D g = make_grid(0.0, 1.0, 16);
    const MassMatrix m = assemble_unit_mass(g, 2.0, FormVariant::RegionalNeumann);
    std::vector<double> ones(m.n_dofs(), 1.0);
    const Eigen::Map<const Eigen::VectorXd> ov(ones.data(), ones.size());
    CHECK(double(ov.transpose() * m.M * ov) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.value(ones) == doctest::Approx(1.0).epsilon(1e-14));

    WeightField two;
    two.grid = g;
    two.cell_values.assign(g.n_cells, 2.0);
    const MassMatrix m2 = assemble_mass(g, two, 2.0, FormVariant::RegionalNeumann);
    std::mt19937_64 rng(12);
    const auto u = random_vector(m.n_dofs(), rng);
    CHECK(m2.value(u) == doctest::Approx(2.0 * m.value(u)).epsilon(1e-14));

    // hat of height 1 with weight rho: N_3 = 2 h rho / 4
    const double rho = 1.7;
    WeightField wf;
    wf.grid = g;
    wf.cell_values.assign(g.n_cells, rho);
    const MassMatrix m3 = assemble_mass(g, wf, 3.0, FormVariant::RegionalNeumann);
    std::vector<double> hat(m3.n_dofs(), 0.0);
    hat[8] = 1.0;
    CHECK(m3.value(hat) == doctest::Approx(2.0 * g.h * rho / 4.0).epsilon(1e-14));

    const Grid1D other = make_grid(0.0, 2.0, 16);
    CHECK_THROWS_AS(assemble_mass(other, wf, 2.0, FormVariant::RegionalNeumann),
                    std::invalid_argument);
}

TEST_CASE("per-cell |linear|^p closed form against split Gauss quadrature") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    const auto& q = gauss_legendre(64);
    for (double p : {1.5, 2.0, 2.7, 3.0, 4.0}) {
        for (int trial = 0; trial < 200; ++trial) {
            const double uL = unif(rng), uR = unif(rng);
            // split at the sign change; the |.|^p kink at the panel edge still
            // limits Gauss to ~n^{-2(p+1)}, hence the 1e-8 comparison
            double tsplit = 1.0;
            if ((uL < 0.0) != (uR < 0.0)) tsplit = uL / (uL - uR);
            auto piece = [&](double t0, double t1) {
                double acc = 0.0;
                for (std::size_t i = 0; i < q.nodes.size(); ++i) {
                    const double t = t0 + (t1 - t0) * q.nodes[i];
                    acc += (t1 - t0) * q.weights[i] *
                           std::pow(std::abs(uL + (uR - uL) * t), p);
                }
                return acc;
            };
            const double oracle = piece(0.0, tsplit) + (tsplit < 1.0 ? piece(tsplit, 1.0) : 0.0);
            CHECK(lp_cell_integral(uL, uR, p) == doctest::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("mass gradient matches central differences") {
    std::mt19937_64 rng(14);
    const Grid1D g = make_grid(0.0, 1.0, 12);
    for (double p : {1.5, 2.0, 3.0}) {
        const MassMatrix m = assemble_unit_mass(g, p, FormVariant::RegionalNeumann);
        const auto u = random_vector(m.n_dofs(), rng);
        const auto grad = m.gradient(u);
        const double t = 1e-6;
        for (int trial = 0; trial < 10; ++trial) {
            const auto v = random_vector(m.n_dofs(), rng);
            double dexp = 0.0;
            std::vector<double> up(u), um(u);
            for (int i = 0; i < m.n_dofs(); ++i) {
                dexp += grad[i] * v[i];
                up[i] += t * v[i];
                um[i] -= t * v[i];
            }
            const double fd = (m.value(up) - m.value(um)) / (2.0 * t);
            CHECK(fd == doctest::Approx(dexp).epsilon(1e-6));
        }
    }
}

TEST_CASE("near-equal node values stay stable in the closed forms") {
    // the difference-quotient form cancels near uL == uR; the expansion path
    // must agree with the smooth continuation
    for (double p : {1.5, 2.5, 3.0}) {
        const double base = 0.8;
        for (double d : {1e-4, 1e-6, 1e-9, 0.0}) {
            const double exact = lp_cell_integral(base, base + d, p);
            CHECK(exact == doctest::Approx(std::pow(base + 0.5 * d, p)).epsilon(1e-8));
            double dL = 0.0, dR = 0.0;
            lp_cell_gradient(base, base + d, p, dL, dR);
            CHECK(dL + dR ==
                  doctest::Approx(p * std::pow(base + 0.5 * d, p - 1.0)).epsilon(1e-7));
        }
    }
}

TEST_CASE("discretization cache round-trips") {
    const Grid1D g = make_grid(0.0, 1.0, 16);
    const auto disc = build_discretization(g, {0.5, 2.5}, FormVariant::DirichletExterior, 6);
    const std::string path = "cache_roundtrip_test.bin";
    REQUIRE(save_discretization_cache(disc, path));
    GagliardoDiscretization loaded;
    REQUIRE(try_load_discretization_cache(g, {0.5, 2.5}, FormVariant::DirichletExterior, 6, path,
                                          loaded));
    REQUIRE(loaded.gap_tables.size() == disc.gap_tables.size());
    for (std::size_t i = 0; i < disc.gap_tables.size(); ++i) {
        REQUIRE(loaded.gap_tables[i].points.size() == disc.gap_tables[i].points.size());
        for (std::size_t j = 0; j < disc.gap_tables[i].points.size(); ++j) {
            CHECK(loaded.gap_tables[i].points[j].w == disc.gap_tables[i].points[j].w);
        }
    }
    CHECK(loaded.exterior.size() == disc.exterior.size());
    // key mismatch rejects
    GagliardoDiscretization wrong;
    CHECK_FALSE(try_load_discretization_cache(g, {0.6, 2.5}, FormVariant::DirichletExterior, 6,
                                              path, wrong));
    CHECK_FALSE(try_load_discretization_cache(g, {0.5, 2.5}, FormVariant::RegionalNeumann, 6,
                                              path, wrong));

    // cached build produces the same energies
    const auto built = build_discretization_cached(g, {0.5, 2.5},
                                                   FormVariant::DirichletExterior, 6, ".");
    std::mt19937_64 rng(15);
    const auto u = random_vector(disc.n_dofs(), rng);
    CHECK(energy_p(u, built) == energy_p(u, disc));
}
