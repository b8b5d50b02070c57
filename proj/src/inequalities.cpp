#include "fraclab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"

namespace fraclab {

namespace {

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Monotone projected descent on R(u) = F(u) / G(u) for p-homogeneous F, G > 0.
// `project` runs after every trial step (may be empty); iterates are kept on
// G(u) = 1 by rescaling. Returns the best quotient reached.
struct DescentProblem {
    std::function<double(const std::vector<double>&)> F;
    std::function<std::vector<double>(const std::vector<double>&)> dF;
    std::function<double(const std::vector<double>&)> G;
    std::function<std::vector<double>(const std::vector<double>&)> dG;
    std::function<void(std::vector<double>&)> project;
    double hom_p = 2.0;
};

double descend_quotient(const DescentProblem& prob, std::vector<double> u,
                        const MinimizerOptions& opts, std::vector<double>* arg_out = nullptr) {
    auto renorm = [&](std::vector<double>& v) {
        if (prob.project) prob.project(v);
        const double g = prob.G(v);
        if (!(g > 0.0)) throw NumericalError("descend_quotient: degenerate iterate");
        const double f = std::pow(g, -1.0 / prob.hom_p);
        for (double& x : v) x *= f;
    };
    renorm(u);
    double quotient = prob.F(u);
    double step = opts.initial_step;
    int stall = 0;
    for (int it = 0; it < opts.max_iters; ++it) {
        const auto gf = prob.dF(u);
        const auto gg = prob.dG(u);
        std::vector<double> dir(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) dir[i] = gf[i] - quotient * gg[i];
        const double dn = norm2(dir);
        if (dn == 0.0) break;
        const double un = norm2(u);
        bool accepted = false;
        std::vector<double> cand(u.size());
        double qc = quotient;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            const double gamma = step * un / dn;
            for (std::size_t i = 0; i < u.size(); ++i) cand[i] = u[i] - gamma * dir[i];
            try {
                renorm(cand);
            } catch (const NumericalError&) {
                step *= opts.backtrack;
                continue;
            }
            qc = prob.F(cand);
            if (qc < quotient) {
                accepted = true;
                break;
            }
            step *= opts.backtrack;
        }
        if (!accepted) break;
        const double rel = (quotient - qc) / quotient;
        u.swap(cand);
        quotient = qc;
        step *= opts.grow;
        if (rel < opts.tol_rel_decrease) {
            if (++stall >= opts.patience) break;
        } else {
            stall = 0;
        }
    }
    if (arg_out) *arg_out = std::move(u);
    return quotient;
}

// Interpolant mean of a free-dof vector as a linear functional; uniform grid,
// so the trapezoid weights are h/(b-a) * {1/2, 1, ..., 1, 1/2} over full nodes.
std::vector<double> mean_weights(const Grid1D& grid, FormVariant dofs) {
    const int n = grid.n_cells;
    std::vector<double> w(n + 1, 1.0 / n);
    w.front() *= 0.5;
    w.back() *= 0.5;
    if (dofs == FormVariant::DirichletExterior) {
        return std::vector<double>(w.begin() + 1, w.end() - 1);
    }
    return w;
}

}  // namespace

double poincare_constant(int n_cells, const FracParams& params, double eps, int quad_order,
                         const MinimizerOptions& opts) {
    validate(params);
    if (n_cells < 16) throw std::invalid_argument("poincare_constant: n_cells must be >= 16");
    if (!(eps > 0.0)) throw std::invalid_argument("poincare_constant: eps must be positive");
    const Grid1D grid = make_grid(0.0, eps, n_cells);
    const auto disc =
        build_discretization(grid, params, FormVariant::RegionalNeumann, quad_order);

    if (params.p == 2.0) {
        const StiffnessMatrix a = assemble_form_p2(disc);
        const MassMatrix m = assemble_unit_mass(grid, 2.0, FormVariant::RegionalNeumann);
        const Spectrum sp = solve_linear_gevp(a.A, m.M, 2);
        const double nu2 = sp.eigenvalues[1];  // first nonzero: constants span the kernel
        if (!(nu2 > 0.0)) throw NumericalError("poincare_constant: nonpositive second eigenvalue");
        return 1.0 / std::sqrt(nu2);
    }

    // general p: minimize the reciprocal quotient E_reg(u) / ||u||_p^p over
    // mean-zero u; the p = 2 second eigenvector is the structured warm start.
    const MassMatrix unit = assemble_unit_mass(grid, params.p, FormVariant::RegionalNeumann);
    const auto mw = mean_weights(grid, FormVariant::RegionalNeumann);
    DescentProblem prob;
    prob.hom_p = params.p;
    prob.F = [&](const std::vector<double>& u) { return energy_p(u, disc); };
    prob.dF = [&](const std::vector<double>& u) { return energy_grad_p(u, disc); };
    prob.G = [&](const std::vector<double>& u) { return unit.value(u); };
    prob.dG = [&](const std::vector<double>& u) { return unit.gradient(u); };
    prob.project = [&](std::vector<double>& u) {
        double m = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) m += mw[i] * u[i];
        for (double& x : u) x -= m;
    };

    std::vector<std::vector<double>> starts;
    {
        const auto d2 = build_discretization(grid, {params.s, 2.0}, FormVariant::RegionalNeumann,
                                             quad_order);
        const StiffnessMatrix a2 = assemble_form_p2(d2);
        const MassMatrix m2 = assemble_unit_mass(grid, 2.0, FormVariant::RegionalNeumann);
        const Spectrum sp = solve_linear_gevp(a2.A, m2.M, 2);
        starts.emplace_back(sp.eigenvectors.col(1).data(),
                            sp.eigenvectors.col(1).data() + sp.eigenvectors.rows());
    }
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < opts.restarts; ++r) {
        std::vector<double> u(disc.n_dofs());
        for (double& v : u) v = gauss(rng);
        starts.push_back(std::move(u));
    }
    double best = std::numeric_limits<double>::infinity();
    for (auto& u0 : starts) best = std::min(best, descend_quotient(prob, std::move(u0), opts));
    return std::pow(best, -1.0 / params.p);
}

double oscillation_ratio(const PeriodicWeight& w, double eps, const GagliardoDiscretization& disc,
                         int probe_count, std::uint64_t seed) {
    validate(disc.params);
    const double p = disc.params.p;
    const Grid1D& grid = disc.grid;
    const WeightField f = sample_weight(w, grid, eps);  // throws when under-resolved
    const MassMatrix m_unit = assemble_unit_mass(grid, p, disc.variant);
    const double rho_bar = w.mean();
    // int g(x/eps) |v|^p with g = rho - mean, cellwise: differencing the cell
    // values first keeps the constant-weight case exactly zero
    MassMatrix m_g = m_unit;
    for (int i = 0; i < grid.n_cells; ++i) m_g.rho[i] = f.cell_values[i] - rho_bar;

    // probes: the first five p = 2 eigenvectors of the variant problem, plus
    // seeded gaussian vectors
    std::vector<std::vector<double>> probes;
    {
        const auto d2 = disc.params.p == 2.0
                            ? disc
                            : build_discretization(grid, {disc.params.s, 2.0}, disc.variant,
                                                   disc.quad_order);
        const StiffnessMatrix a2 = assemble_form_p2(d2);
        Eigen::MatrixXd lhs = a2.A;
        const MassMatrix m2 = assemble_unit_mass(grid, 2.0, disc.variant);
        if (disc.variant == FormVariant::RegionalNeumann) lhs += m2.M;
        const int K = std::min<int>(5, static_cast<int>(lhs.rows()));
        const Spectrum sp = solve_linear_gevp(lhs, m2.M, K);
        for (int k = 0; k < K; ++k) {
            probes.emplace_back(sp.eigenvectors.col(k).data(),
                                sp.eigenvectors.col(k).data() + sp.eigenvectors.rows());
        }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < probe_count; ++i) {
        std::vector<double> v(disc.n_dofs());
        for (double& x : v) x = gauss(rng);
        probes.push_back(std::move(v));
    }

    double best = 0.0;
    for (const auto& v : probes) {
        const double osc = std::abs(m_g.value(v));
        double denom = 0.0;
        if (disc.variant == FormVariant::DirichletExterior) {
            // [v]_{W^{s,p}(R^n)} ||v||_p^{p-1}
            const double semi = std::pow(energy_p(v, disc), 1.0 / p);
            const double lp = std::pow(m_unit.value(v), 1.0 / p);
            denom = semi * std::pow(lp, p - 1.0);
        } else {
            denom = energy_p(v, disc) + m_unit.value(v);  // ||v||^p_{W^{s,p}(Omega)}
        }
        if (denom > 0.0) best = std::max(best, osc / denom);
    }
    return best;
}

namespace {

// Exact P1 mass block of one cell restricted to the sub-interval [t0, t1] of
// its unit coordinate, scaled by h.
void partial_cell_mass(double h, double t0, double t1, double blk[2][2]) {
    auto cube = [](double x) { return x * x * x; };
    const double i00 = (cube(1.0 - t0) - cube(1.0 - t1)) / 3.0;
    const double i11 = (cube(t1) - cube(t0)) / 3.0;
    const double i01 = (t1 * t1 - t0 * t0) / 2.0 - (cube(t1) - cube(t0)) / 3.0;
    blk[0][0] = h * i00;
    blk[0][1] = blk[1][0] = h * i01;
    blk[1][1] = h * i11;
}

}  // namespace

double boundary_layer_constant(double delta, const FracParams& params, int n_cells,
                               int quad_order) {
    require_s_above_one_over_p(params);
    if (!(delta > 0.0 && delta <= 0.5)) {
        throw std::invalid_argument("boundary_layer_constant: delta must lie in (0, 1/2]");
    }
    const Grid1D grid = make_grid(0.0, 1.0, n_cells);
    const auto disc =
        build_discretization(grid, params, FormVariant::RegionalNeumann, quad_order);
    const int n = n_cells;

    // layer mass over G_delta = (0, delta) u (1 - delta, 1), full nodes
    Eigen::MatrixXd mg = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
        const double x0 = grid.nodes[i], x1 = grid.nodes[i + 1];
        // overlaps in unit cell coordinates
        const auto add_overlap = [&](double lo, double hi) {
            const double o0 = std::max(x0, lo), o1 = std::min(x1, hi);
            if (o1 <= o0) return;
            double blk[2][2];
            partial_cell_mass(grid.h, (o0 - x0) / grid.h, (o1 - x0) / grid.h, blk);
            for (int a = 0; a < 2; ++a) {
                for (int b = 0; b < 2; ++b) mg(i + a, i + b) += blk[a][b];
            }
        };
        add_overlap(0.0, delta);
        add_overlap(1.0 - delta, 1.0);
    }

    if (params.p == 2.0) {
        const StiffnessMatrix a = assemble_form_p2(disc);
        const MassMatrix m = assemble_unit_mass(grid, 2.0, FormVariant::RegionalNeumann);
        const Eigen::MatrixXd denom = a.A + m.M;
        const Spectrum sp = solve_linear_gevp(mg, denom, n + 1);
        const double sigma = sp.eigenvalues.back();
        return std::pow(sigma, 1.0 / params.p);
    }

    // general p: lower bound of the sup via monotone ascent (descent on the
    // reciprocal), started from boundary bumps, the constant and randoms.
    const double p = params.p;
    const MassMatrix unit = assemble_unit_mass(grid, p, FormVariant::RegionalNeumann);
    auto layer_value = [&](const std::vector<double>& u) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x0 = grid.nodes[i], x1 = grid.nodes[i + 1];
            for (auto [lo, hi] : {std::pair{0.0, delta}, std::pair{1.0 - delta, 1.0}}) {
                const double o0 = std::max(x0, lo), o1 = std::min(x1, hi);
                if (o1 <= o0) continue;
                const double t0 = (o0 - x0) / grid.h, t1 = (o1 - x0) / grid.h;
                // exact sub-interval integral of |linear|^p via the primitive
                const double uL = u[i], uR = u[i + 1];
                const double v0 = uL + (uR - uL) * t0, v1 = uL + (uR - uL) * t1;
                total += grid.h * (t1 - t0) * lp_cell_integral(v0, v1, p);
            }
        }
        return total;
    };
    auto layer_grad = [&](const std::vector<double>& u) {
        std::vector<double> g(n + 1, 0.0);
        for (int i = 0; i < n; ++i) {
            const double x0 = grid.nodes[i], x1 = grid.nodes[i + 1];
            for (auto [lo, hi] : {std::pair{0.0, delta}, std::pair{1.0 - delta, 1.0}}) {
                const double o0 = std::max(x0, lo), o1 = std::min(x1, hi);
                if (o1 <= o0) continue;
                const double t0 = (o0 - x0) / grid.h, t1 = (o1 - x0) / grid.h;
                const double uL = u[i], uR = u[i + 1];
                const double v0 = uL + (uR - uL) * t0, v1 = uL + (uR - uL) * t1;
                double dL = 0.0, dR = 0.0;
                lp_cell_gradient(v0, v1, p, dL, dR);
                const double scale = grid.h * (t1 - t0);
                // chain rule through v0, v1
                g[i] += scale * (dL * (1.0 - t0) + dR * (1.0 - t1));
                g[i + 1] += scale * (dL * t0 + dR * t1);
            }
        }
        return g;
    };

    DescentProblem prob;
    prob.hom_p = p;
    prob.F = [&](const std::vector<double>& u) { return energy_p(u, disc) + unit.value(u); };
    prob.dF = [&](const std::vector<double>& u) {
        auto g = energy_grad_p(u, disc);
        const auto gu = unit.gradient(u);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gu[i];
        return g;
    };
    prob.G = layer_value;
    prob.dG = layer_grad;

    std::vector<std::vector<double>> starts;
    starts.emplace_back(n + 1, 1.0);  // constants: the delta -> 0 maximizer family
    {
        std::vector<double> bump(n + 1, 0.0);
        for (int i = 0; i <= n; ++i) {
            const double x = grid.nodes[i];
            bump[i] = std::max(0.0, 1.0 - std::min(x, 1.0 - x) / (2.0 * delta));
        }
        starts.push_back(std::move(bump));
    }
    MinimizerOptions opts;
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < 2; ++r) {
        std::vector<double> u(n + 1);
        for (double& v : u) v = std::abs(gauss(rng)) + 0.1;
        starts.push_back(std::move(u));
    }
    double best_recip = std::numeric_limits<double>::infinity();
    for (auto& u0 : starts) {
        best_recip = std::min(best_recip, descend_quotient(prob, std::move(u0), opts));
    }
    return std::pow(1.0 / best_recip, 1.0 / p);
}

bool pointwise_p_inequality(std::span<const double> x, std::span<const double> y, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("pointwise_p_inequality: p must exceed 1");
    if (x.size() != y.size()) {
        throw std::invalid_argument("pointwise_p_inequality: dimension mismatch");
    }
    double nx2 = 0.0, ny2 = 0.0, dot_x_diff = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        nx2 += x[i] * x[i];
        ny2 += y[i] * y[i];
        dot_x_diff += x[i] * (x[i] - y[i]);
    }
    const double nx = std::sqrt(nx2), ny = std::sqrt(ny2);
    const double lhs = std::pow(nx, p) - std::pow(ny, p);
    const double rhs = nx == 0.0 ? 0.0 : p * std::pow(nx, p - 2.0) * dot_x_diff;
    const double scale = std::pow(nx, p) + std::pow(ny, p) + std::abs(rhs);
    return lhs <= rhs + 1e-12 * scale;
}

ConstantReport general_weight_convergence(const std::vector<WeightField>& family,
                                          const WeightField& limit_field,
                                          const GagliardoDiscretization& disc, int K,
                                          const MinimizerOptions& opts) {
    if (family.empty()) {
        throw std::invalid_argument("general_weight_convergence: empty family");
    }
    const Grid1D& grid = disc.grid;
    for (const auto& f : family) {
        if (!f.grid.same_as(grid)) {
            throw std::invalid_argument("general_weight_convergence: field grid mismatch");
        }
    }
    const double p = disc.params.p;
    if (p != 2.0) K = 1;

    std::vector<double> lambda_limit;
    std::vector<std::vector<double>> lambdas;
    if (p == 2.0) {
        const StiffnessMatrix a = assemble_form_p2(disc);
        Eigen::MatrixXd lhs = a.A;
        if (disc.variant == FormVariant::RegionalNeumann) {
            lhs += assemble_unit_mass(grid, 2.0, disc.variant).M;
        }
        lambda_limit =
            solve_linear_gevp(lhs, assemble_mass(grid, limit_field, 2.0, disc.variant).M, K)
                .eigenvalues;
        for (const auto& f : family) {
            lambdas.push_back(
                solve_linear_gevp(lhs, assemble_mass(grid, f, 2.0, disc.variant).M, K)
                    .eigenvalues);
        }
    } else {
        lambda_limit = {
            min_rayleigh_p(disc, assemble_mass(grid, limit_field, p, disc.variant), opts).lambda};
        for (const auto& f : family) {
            lambdas.push_back(
                {min_rayleigh_p(disc, assemble_mass(grid, f, p, disc.variant), opts).lambda});
        }
    }

    ConstantReport rep;
    rep.method = "general_weight_convergence";
    for (std::size_t i = 0; i < family.size(); ++i) {
        double err = 0.0;
        for (int k = 0; k < K; ++k) {
            err = std::max(err, std::abs(lambdas[i][k] - lambda_limit[k]));
        }
        rep.sweep_values.push_back(family[i].epsilon);
        rep.constants.push_back(err);
        rep.normalized.push_back(err);  // no rate claim: reported as-is
    }
    // convergence verdict: the tail improves on the head, or everything sits
    // at solver-noise level
    double lam_scale = 1.0;
    for (double l : lambda_limit) lam_scale = std::max(lam_scale, std::abs(l));
    const double noise = 1e-11 * lam_scale;
    const double head = rep.constants.front(), tail = rep.constants.back();
    rep.converged = tail <= std::max(0.5 * head, noise);
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < rep.sweep_values.size(); ++i) {
        if (rep.sweep_values[i] > 0.0) pairs.emplace_back(rep.sweep_values[i], rep.constants[i]);
    }
    try {
        rep.fit = fit_rate(pairs);
    } catch (const InsufficientDataError&) {
        rep.fit = std::nullopt;
    }
    return rep;
}

}  // namespace fraclab
