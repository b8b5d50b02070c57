#include "fraclab/homogenize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"

namespace fraclab {

namespace {

RateFit least_squares_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(xs[i]), y = std::log(ys[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    RateFit f;
    f.pairs_used = n;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) {
        throw InsufficientDataError("fit_rate: degenerate abscissae");
    }
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / n;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(xs[i]), y = std::log(ys[i]);
        const double r = y - (f.slope * x + f.intercept);
        ss_res += r * r;
        ss_tot += (y - ybar) * (y - ybar);
    }
    f.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

void run_indexed(int count, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    const int workers = std::min(jobs, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> xs, ys;
    for (const auto& [eps, err] : pairs) {
        if (err < 1e-13) continue;  // below solver noise
        xs.push_back(eps);
        ys.push_back(err);
    }
    if (xs.size() < 3) {
        std::ostringstream os;
        os << "fit_rate: only " << xs.size() << " admissible pairs, need >= 3";
        throw InsufficientDataError(os.str());
    }
    return least_squares_loglog(xs, ys);
}

const SweepRecord* SweepReport::find(double eps, int k) const {
    for (const auto& r : records) {
        if (r.k == k && std::abs(r.eps - eps) <= 1e-12 * eps) return &r;
    }
    return nullptr;
}

namespace {

void validate_config(const SweepConfig& cfg) {
    validate(cfg.params);
    if (cfg.variant == FormVariant::RegionalNeumann) require_s_above_one_over_p(cfg.params);
    if (cfg.eps_list.empty()) throw std::invalid_argument("sweep: eps_list is empty");
    for (std::size_t i = 1; i < cfg.eps_list.size(); ++i) {
        if (!(cfg.eps_list[i] < cfg.eps_list[i - 1])) {
            throw std::invalid_argument("sweep: eps_list must be strictly decreasing");
        }
    }
    const double min_eps = cfg.eps_list.back();
    if (cfg.n_cells * min_eps < 16.0 - 1e-9) {
        std::ostringstream os;
        os << "sweep: resolvability violated, n_cells * min(eps) = " << cfg.n_cells * min_eps
           << " < 16";
        throw ResolutionError(os.str());
    }
    if (cfg.K < 1) throw std::invalid_argument("sweep: K must be >= 1");
}

}  // namespace

SweepReport sweep(const SweepConfig& config) {
    validate_config(config);
    SweepConfig cfg = config;
    if (cfg.params.p != 2.0) cfg.K = 1;  // index-based k >= 2 is p = 2 only

    const Grid1D grid = make_grid(cfg.a, cfg.b, cfg.n_cells);
    const auto disc = build_discretization_cached(grid, cfg.params, cfg.variant, cfg.quad_order,
                                                  cfg.cache_dir);
    SweepReport rep;
    rep.config = cfg;
    rep.prefactor_exponent =
        cfg.variant == FormVariant::DirichletExterior ? 1.0 + 1.0 / cfg.params.p : 2.0;

    const int K = cfg.K;
    const int ne = static_cast<int>(cfg.eps_list.size());
    std::vector<std::vector<double>> lambdas(ne);  // per eps, per k
    std::vector<std::string> failures(ne);

    if (cfg.params.p == 2.0) {
        const StiffnessMatrix a = assemble_form_p2(disc);
        Eigen::MatrixXd lhs = a.A;
        if (cfg.variant == FormVariant::RegionalNeumann) {
            lhs += assemble_unit_mass(grid, 2.0, cfg.variant).M;
        }
        // limit problem: constant mean field
        const WeightField limit_field = sample_weight(cfg.weight, grid, limit_eps);
        const MassMatrix m_lim = assemble_mass(grid, limit_field, 2.0, cfg.variant);
        ProblemTag tag{cfg.variant, cfg.params, cfg.weight.describe(), 0.0};
        rep.lambda_limit = solve_linear_gevp(lhs, m_lim.M, K, tag).eigenvalues;

        // mu: unit-weight Dirichlet spectrum on the same grid/s/p
        if (cfg.variant == FormVariant::DirichletExterior) {
            const MassMatrix m_unit = assemble_unit_mass(grid, 2.0, cfg.variant);
            rep.mu = solve_linear_gevp(a.A, m_unit.M, K).eigenvalues;
        } else {
            const auto disc_d = build_discretization_cached(
                grid, cfg.params, FormVariant::DirichletExterior, cfg.quad_order, cfg.cache_dir);
            const StiffnessMatrix a_d = assemble_form_p2(disc_d);
            const MassMatrix m_unit =
                assemble_unit_mass(grid, 2.0, FormVariant::DirichletExterior);
            rep.mu = solve_linear_gevp(a_d.A, m_unit.M, K).eigenvalues;
        }

        run_indexed(ne, cfg.jobs, [&](int i) {
            try {
                const WeightField f = sample_weight(cfg.weight, grid, cfg.eps_list[i]);
                const MassMatrix m = assemble_mass(grid, f, 2.0, cfg.variant);
                lambdas[i] = solve_linear_gevp(lhs, m.M, K).eigenvalues;
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        });
    } else {
        const MassMatrix lim_mass =
            assemble_mass(grid, sample_weight(cfg.weight, grid, limit_eps), cfg.params.p,
                          cfg.variant);
        MinimizerOptions opts = cfg.minimizer;
        opts.seed = cfg.seed;
        rep.lambda_limit = {min_rayleigh_p(disc, lim_mass, opts).lambda};
        rep.mu = dirichlet_mu(grid, cfg.params, 1, cfg.quad_order, opts).eigenvalues;
        run_indexed(ne, cfg.jobs, [&](int i) {
            try {
                const WeightField f = sample_weight(cfg.weight, grid, cfg.eps_list[i]);
                const MassMatrix m = assemble_mass(grid, f, cfg.params.p, cfg.variant);
                lambdas[i] = {min_rayleigh_p(disc, m, opts).lambda};
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        });
    }

    for (int i = 0; i < ne; ++i) {
        for (int k = 1; k <= K; ++k) {
            SweepRecord r;
            r.eps = cfg.eps_list[i];
            r.k = k;
            r.eps_reciprocal = is_reciprocal_eps(r.eps);
            if (failures[i].empty() && static_cast<int>(lambdas[i].size()) >= K) {
                r.lambda_eps = lambdas[i][k - 1];
                r.lambda_limit = rep.lambda_limit[k - 1];
                r.error = std::abs(r.lambda_eps - r.lambda_limit);
            } else {
                r.solved = false;
                r.note = failures[i];
            }
            rep.records.push_back(std::move(r));
        }
    }

    bool any_solved = false;
    for (const auto& r : rep.records) any_solved = any_solved || r.solved;
    if (!any_solved) {
        throw NumericalError("sweep: no eps produced a datum; first failure: " + failures[0]);
    }

    rep.fits.resize(K);
    for (int k = 1; k <= K; ++k) {
        std::vector<std::pair<double, double>> pairs;
        for (const auto& r : rep.records) {
            if (r.k == k && r.solved) pairs.emplace_back(r.eps, r.error);
        }
        try {
            rep.fits[k - 1] = fit_rate(pairs);
        } catch (const InsufficientDataError&) {
            rep.fits[k - 1] = std::nullopt;  // e.g. constant weight: noise-level errors
        }
    }

    Spectrum mu_spec;
    mu_spec.eigenvalues = rep.mu;
    mu_spec.tag.params = cfg.params;
    rep.verdicts = check_bounds(rep, mu_spec, cfg.weight.rho_minus(), cfg.weight.rho_plus(),
                                nullptr);
    return rep;
}

BoundVerdicts check_bounds(const SweepReport& report, const Spectrum& mu, double rho_minus,
                           double rho_plus, const SweepReport* companion) {
    BoundVerdicts v;
    if (static_cast<int>(mu.eigenvalues.size()) < report.config.K) {
        throw std::invalid_argument("check_bounds: mu spectrum shorter than K");
    }
    const double s = report.config.params.s;

    // sandwich (corrected): (rho_+)^{-1} mu_k <= lambda_k^eps <= (rho_-)^{-1} mu_k
    double worst = -std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& r : report.records) {
        if (!r.solved) continue;
        const double mu_k = mu.eigenvalues[r.k - 1];
        const double tol = 1e-8 * mu_k;
        const double lower_violation = mu_k / rho_plus - r.lambda_eps;
        const double upper_violation = r.lambda_eps - mu_k / rho_minus;
        worst = std::max({worst, lower_violation, upper_violation});
        ok = ok && lower_violation <= tol && upper_violation <= tol;
    }
    v.sandwich_ok = ok;
    v.sandwich_margin = worst;

    // theorem envelope: per-eps constants C(eps) = max_k error / (eps^s mu_k^q)
    const double q = report.prefactor_exponent;
    std::vector<double> per_eps;
    for (double eps : report.config.eps_list) {
        double c = 0.0;
        bool any = false;
        for (const auto& r : report.records) {
            if (!r.solved || std::abs(r.eps - eps) > 1e-12 * eps) continue;
            const double mu_k = mu.eigenvalues[r.k - 1];
            c = std::max(c, r.error / (std::pow(eps, s) * std::pow(mu_k, q)));
            any = true;
        }
        if (any) per_eps.push_back(c);
    }
    if (!per_eps.empty()) {
        const double cmax = *std::max_element(per_eps.begin(), per_eps.end());
        const double cmin = *std::min_element(per_eps.begin(), per_eps.end());
        v.envelope_C = cmax;
        if (cmin > 0.0) {
            v.envelope_spread = cmax / cmin;
            v.envelope_defined = true;
        }
    }

    if (companion != nullptr) {
        const SweepReport* dir = &report;
        const SweepReport* neu = companion;
        if (report.config.variant == FormVariant::RegionalNeumann) std::swap(dir, neu);
        v.ordering_checked = true;
        v.ordering_ok = true;
        double worst_ord = -std::numeric_limits<double>::infinity();
        for (const auto& rn : neu->records) {
            if (!rn.solved) continue;
            const SweepRecord* rd = dir->find(rn.eps, rn.k);
            if (rd == nullptr || !rd->solved) continue;
            const double violation = rn.lambda_eps - rd->lambda_eps;
            worst_ord = std::max(worst_ord, violation);
            v.ordering_ok = v.ordering_ok && violation <= 1e-8 * rd->lambda_eps;
        }
        v.ordering_margin = worst_ord;
    }
    return v;
}

RateFit weyl_fit(const Spectrum& mu, int k_lo, int k_hi, int n_cells) {
    if (mu.tag.params.p != 2.0) {
        throw std::invalid_argument("weyl_fit: requires p = 2 eigenvalues");
    }
    if (k_lo < 1 || k_hi <= k_lo || k_hi > mu.size()) {
        throw std::invalid_argument("weyl_fit: bad k range");
    }
    if (k_hi > n_cells / 8) {
        std::ostringstream os;
        os << "weyl_fit: k_hi = " << k_hi << " above the mesh-resolved band n_cells/8 = "
           << n_cells / 8;
        throw ResolutionError(os.str());
    }
    std::vector<double> ks, vals;
    for (int k = k_lo; k <= k_hi; ++k) {
        ks.push_back(k);
        vals.push_back(mu.eigenvalues[k - 1]);
    }
    return least_squares_loglog(ks, vals);
}

}  // namespace fraclab
