#include "fraclab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace detail {

std::vector<int> degeneracy_clusters(const std::vector<double>& eigenvalues) {
    std::vector<int> ids(eigenvalues.size(), 0);
    int cluster = 0;
    for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
        const double scale = std::max(std::abs(eigenvalues[i]), std::abs(eigenvalues[i - 1]));
        if (std::abs(eigenvalues[i] - eigenvalues[i - 1]) > 1e-9 * std::max(scale, 1e-300)) {
            ++cluster;
        }
        ids[i] = cluster;
    }
    return ids;
}

}  // namespace detail

Spectrum solve_linear_gevp(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, int K,
                           ProblemTag tag) {
    const auto dim = A.rows();
    if (A.rows() != A.cols() || M.rows() != M.cols() || A.rows() != M.rows()) {
        throw std::invalid_argument("solve_linear_gevp: A and M must be square and conformant");
    }
    if (K < 1 || K > dim) {
        throw std::invalid_argument("solve_linear_gevp: K out of range");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("solve_linear_gevp: mass matrix is not positive definite");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M,
                                                                 Eigen::ComputeEigenvectors |
                                                                     Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) {
        throw NumericalError("solve_linear_gevp: eigendecomposition failed");
    }

    Spectrum sp;
    sp.tag = std::move(tag);
    sp.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + K);
    sp.eigenvectors = es.eigenvectors().leftCols(K);
    sp.cluster_ids = detail::degeneracy_clusters(sp.eigenvalues);

    // Spectrum invariants: residual and M-orthonormality within 1e-8.
    const double normA = A.norm();
    for (int k = 0; k < K; ++k) {
        const auto v = sp.eigenvectors.col(k);
        const double res = (A * v - sp.eigenvalues[k] * (M * v)).norm();
        if (res > 1e-8 * std::max(normA * v.norm(), 1e-300)) {
            std::ostringstream os;
            os << "solve_linear_gevp: residual " << res << " out of tolerance for pair " << k + 1;
            throw NumericalError(os.str());
        }
    }
    Eigen::MatrixXd gram = sp.eigenvectors.transpose() * M * sp.eigenvectors;
    gram -= Eigen::MatrixXd::Identity(K, K);
    if (gram.cwiseAbs().maxCoeff() > 1e-8) {
        throw NumericalError("solve_linear_gevp: eigenvectors are not M-orthonormal");
    }
    for (int k = 1; k < K; ++k) {
        if (sp.eigenvalues[k] < sp.eigenvalues[k - 1]) {
            throw NumericalError("solve_linear_gevp: eigenvalues not ascending");
        }
    }
    return sp;
}

namespace {

struct QuotientParts {
    double energy = 0.0;
    double mass = 0.0;
    double quotient = 0.0;
};

// Rayleigh numerator per variant: full Dirichlet energy, or regional energy
// plus the unweighted L^p term for the Neumann problem.
class Objective {
public:
    Objective(const GagliardoDiscretization& disc, const MassMatrix& mass)
        : disc_(disc), mass_(mass) {
        if (mass.n_dofs() != disc.n_dofs()) {
            throw std::invalid_argument("min_rayleigh_p: mass and discretization dof mismatch");
        }
        if (disc.variant == FormVariant::RegionalNeumann) {
            unit_ = assemble_unit_mass(disc.grid, disc.params.p, disc.variant);
        }
        const double p = disc_.params.p;
        smoothing_ = p < 2.0 ? 1e-10 : 0.0;
    }

    QuotientParts eval(const std::vector<double>& u) const {
        QuotientParts q;
        q.energy = energy_p(u, disc_);
        if (disc_.variant == FormVariant::RegionalNeumann) q.energy += unit_.value(u);
        q.mass = mass_.value(u);
        q.quotient = q.energy / q.mass;
        return q;
    }

    std::vector<double> grad(const std::vector<double>& u, const QuotientParts& q) const {
        // gradient of E/N at N == 1: dE - R dN
        double scale = 0.0;
        for (double v : u) scale = std::max(scale, std::abs(v));
        std::vector<double> g = energy_grad_p(u, disc_, smoothing_ * scale);
        if (disc_.variant == FormVariant::RegionalNeumann) {
            const auto gu = unit_.gradient(u);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += gu[i];
        }
        const auto gm = mass_.gradient(u);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= q.quotient * gm[i];
        return g;
    }

    void normalize(std::vector<double>& u) const {
        const double m = mass_.value(u);
        if (!(m > 0.0)) throw NumericalError("min_rayleigh_p: degenerate iterate (zero mass)");
        const double f = std::pow(m, -1.0 / disc_.params.p);
        for (double& v : u) v *= f;
    }

private:
    const GagliardoDiscretization& disc_;
    const MassMatrix& mass_;
    MassMatrix unit_;
    double smoothing_ = 0.0;
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

struct DescentOutcome {
    bool converged = false;
    double lambda = 0.0;
    std::vector<double> u;
    int iterations = 0;
    std::vector<double> history;
};

DescentOutcome descend(const Objective& obj, std::vector<double> u, const MinimizerOptions& opts) {
    DescentOutcome out;
    obj.normalize(u);
    QuotientParts q = obj.eval(u);
    out.history.push_back(q.quotient);
    double step = opts.initial_step;
    int stall = 0;
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        const auto g = obj.grad(u, q);
        const double gn = norm2(g);
        const double un = norm2(u);
        if (gn == 0.0) {
            stall = opts.patience;
            break;
        }
        bool accepted = false;
        std::vector<double> cand(u.size());
        QuotientParts qc;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            const double gamma = step * un / gn;
            for (std::size_t i = 0; i < u.size(); ++i) cand[i] = u[i] - gamma * g[i];
            try {
                obj.normalize(cand);
            } catch (const NumericalError&) {
                step *= opts.backtrack;
                continue;
            }
            qc = obj.eval(cand);
            if (qc.quotient < q.quotient) {
                accepted = true;
                break;
            }
            step *= opts.backtrack;
        }
        if (!accepted) break;  // monotone decrease no longer possible at this scale
        const double rel = (q.quotient - qc.quotient) / q.quotient;
        u.swap(cand);
        q = qc;
        out.history.push_back(q.quotient);
        step *= opts.grow;
        if (rel < opts.tol_rel_decrease) {
            if (++stall >= opts.patience) {
                ++it;
                break;
            }
        } else {
            stall = 0;
        }
    }
    out.converged = stall >= opts.patience || it < opts.max_iters;
    out.lambda = q.quotient;
    out.u = std::move(u);
    out.iterations = it;
    return out;
}

}  // namespace

MinimizeResult min_rayleigh_p(const GagliardoDiscretization& disc, const MassMatrix& mass,
                              const MinimizerOptions& opts) {
    validate(disc.params);
    if (opts.restarts < 1) throw std::invalid_argument("min_rayleigh_p: restarts must be >= 1");
    if (!(opts.tol_rel_decrease > 0.0)) {
        throw std::invalid_argument("min_rayleigh_p: tolerance must be positive");
    }
    Objective obj(disc, mass);

    std::vector<std::vector<double>> starts;
    if (opts.warm_start) {
        // p = 2 first eigenvector of the same variant and weight; an excellent
        // warm start for nearby p and exact for p = 2.
        GagliardoDiscretization d2 =
            disc.params.p == 2.0
                ? disc
                : build_discretization(disc.grid, {disc.params.s, 2.0}, disc.variant,
                                       disc.quad_order);
        StiffnessMatrix a2 = assemble_form_p2(d2);
        WeightField wf;
        wf.grid = disc.grid;
        wf.cell_values = mass.rho;
        MassMatrix m2 = assemble_mass(disc.grid, wf, 2.0, disc.variant);
        Eigen::MatrixXd lhs = a2.A;
        if (disc.variant == FormVariant::RegionalNeumann) {
            lhs += assemble_unit_mass(disc.grid, 2.0, disc.variant).M;
        }
        Spectrum warm = solve_linear_gevp(lhs, m2.M, 1);
        starts.emplace_back(warm.eigenvectors.col(0).data(),
                            warm.eigenvectors.col(0).data() + warm.eigenvectors.rows());
    }
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < opts.restarts; ++r) {
        std::vector<double> u(disc.n_dofs());
        for (double& v : u) v = gauss(rng);
        starts.push_back(std::move(u));
    }

    MinimizeResult best;
    best.lambda = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    DescentOutcome last;
    for (auto& u0 : starts) {
        DescentOutcome out = descend(obj, std::move(u0), opts);
        any_converged = any_converged || out.converged;
        if (out.lambda < best.lambda) {
            best.lambda = out.lambda;
            best.u = out.u;
            best.iterations = out.iterations;
            best.history = out.history;
        }
        last = std::move(out);
    }
    if (!any_converged) {
        throw ConvergenceError("min_rayleigh_p: no restart converged within max_iters",
                               last.u, last.history);
    }
    return best;
}

Spectrum dirichlet_mu(const Grid1D& grid, const FracParams& params, int K, int quad_order,
                      const MinimizerOptions& opts) {
    validate(params);
    auto disc = build_discretization(grid, params, FormVariant::DirichletExterior, quad_order);
    if (params.p == 2.0) {
        StiffnessMatrix a = assemble_form_p2(disc);
        MassMatrix m = assemble_unit_mass(grid, 2.0, FormVariant::DirichletExterior);
        ProblemTag tag{FormVariant::DirichletExterior, params, "const:1", 0.0};
        return solve_linear_gevp(a.A, m.M, K, tag);
    }
    if (K != 1) {
        throw std::invalid_argument(
            "dirichlet_mu: only the first eigenvalue is computed for p != 2");
    }
    MassMatrix m = assemble_unit_mass(grid, params.p, FormVariant::DirichletExterior);
    MinimizeResult r = min_rayleigh_p(disc, m, opts);
    Spectrum sp;
    sp.tag = ProblemTag{FormVariant::DirichletExterior, params, "const:1", 0.0};
    sp.eigenvalues = {r.lambda};
    sp.eigenvectors = Eigen::Map<Eigen::VectorXd>(r.u.data(), static_cast<long>(r.u.size()));
    sp.cluster_ids = {0};
    return sp;
}

}  // namespace fraclab
