// fraclab command line front end: dispatches spectra, homogenization sweeps
// and the inequality checks, writing CSV/JSON artifacts plus a JSON manifest
// per run.

#include "fraclab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fraclab/errors.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/homogenize.hpp"
#include "fraclab/inequalities.hpp"
#include "fraclab/report_io.hpp"
#include "fraclab/spectral.hpp"
#include "fraclab/verification.hpp"
#include "fraclab/version.hpp"

namespace fraclab::cli {

namespace {

using nlohmann::json;

// ----------------------------------------------------------------------------
// flag plumbing
// ----------------------------------------------------------------------------

struct CommonOpts {
    double a = 0.0, b = 1.0;
    int cells = 1024;
    double s = 0.5, p = 2.0;
    std::string bc = "dirichlet";
    std::string weight = "const:1";
    std::string eps = "1/4:1/64";
    std::string deltas = "1/8:1/128";
    int k = 1;
    int k_lo = 5, k_hi = 40;
    int quad_order = 6;
    int probes = 16;
    std::uint64_t seed = 20240901ULL;
    int jobs = 1;
    std::string out;
    std::string json_out;
    std::string manifest;
    std::string cache_dir;
    std::string config_file;
    bool quick = false;
    int verbosity = 0;
};

std::vector<double> parse_eps_list(const std::string& spec) {
    auto parse_one = [](const std::string& tok) -> double {
        auto slash = tok.find('/');
        if (slash != std::string::npos) {
            const double num = std::stod(tok.substr(0, slash));
            const double den = std::stod(tok.substr(slash + 1));
            if (den == 0.0) throw std::invalid_argument("eps list: division by zero in '" + tok + "'");
            return num / den;
        }
        return std::stod(tok);
    };
    std::vector<double> out;
    try {
        if (spec.find(':') != std::string::npos) {
            // geometric halving chain "1/4:1/64"
            const auto colon = spec.find(':');
            const double first = parse_one(spec.substr(0, colon));
            const double last = parse_one(spec.substr(colon + 1));
            if (!(first > last && last > 0.0)) {
                throw std::invalid_argument("eps range must decrease toward a positive value");
            }
            for (double e = first; e > last * (1.0 - 1e-12); e *= 0.5) out.push_back(e);
        } else {
            std::stringstream ss(spec);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) out.push_back(parse_one(tok));
            }
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse eps/delta list '" + spec + "'");
    }
    if (out.empty()) throw std::invalid_argument("empty eps/delta list '" + spec + "'");
    return out;
}

FormVariant parse_bc(const std::string& bc) {
    if (bc == "dirichlet") return FormVariant::DirichletExterior;
    if (bc == "neumann") return FormVariant::RegionalNeumann;
    throw std::invalid_argument("--bc must be 'dirichlet' or 'neumann', got '" + bc + "'");
}

// JSON config file whose keys mirror the long flag names; command-line flags
// override because every option takes the last occurrence.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    std::vector<std::string> tokens;
    for (const auto& [key, value] : j.items()) {
        tokens.push_back("--" + key);
        if (value.is_boolean()) {
            tokens.back() = value.get<bool>() ? "--" + key : "";
            if (tokens.back().empty()) tokens.pop_back();
            continue;
        }
        if (value.is_string()) {
            tokens.push_back(value.get<std::string>());
        } else {
            tokens.push_back(value.dump());
        }
    }
    return tokens;
}

std::string default_manifest_path(const CommonOpts& o, const std::string& subcommand) {
    if (!o.manifest.empty()) return o.manifest;
    if (!o.out.empty()) return o.out + ".manifest.json";
    return subcommand + ".manifest.json";
}

void write_manifest(const CommonOpts& o, const std::string& subcommand,
                    const std::vector<std::string>& outputs, double wall_seconds,
                    const json& extra = json::object()) {
    json m;
    m["tool"] = "fraclab";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["config"] = {{"a", o.a},         {"b", o.b},
                   {"cells", o.cells}, {"s", o.s},
                   {"p", o.p},         {"bc", o.bc},
                   {"weight", o.weight}, {"eps", o.eps},
                   {"k", o.k},         {"quad-order", o.quad_order},
                   {"seed", o.seed},   {"jobs", o.jobs},
                   {"cache-dir", o.cache_dir}};
    m["outputs"] = outputs;
    m["wall_time_s"] = wall_seconds;
    m["column_legend"] = extra.contains("column_legend") ? extra["column_legend"] : json(nullptr);
    for (const auto& [k, v] : extra.items()) {
        if (k != "column_legend") m[k] = v;
    }
    std::ofstream os(default_manifest_path(o, subcommand), std::ios::binary);
    os << m.dump(2) << "\n";
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);  // binary: LF endings everywhere
    if (!os) throw std::runtime_error("cannot write '" + path + "'");
    os << body;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// ----------------------------------------------------------------------------
// subcommand handlers
// ----------------------------------------------------------------------------

int run_spectrum(const CommonOpts& o) {
    Timer timer;
    const auto weight = parse_weight_spec(o.weight);
    const auto variant = parse_bc(o.bc);
    const FracParams params{o.s, o.p};
    validate(params);
    const Grid1D grid = make_grid(o.a, o.b, o.cells);
    WeightField field = (o.eps == "limit") ? sample_weight(weight, grid, limit_eps)
                                           : sample_weight(weight, grid, parse_eps_list(o.eps)[0]);
    if (field.resolution_warning) {
        std::cerr << "warning: h > eps/16, oscillation marginally resolved\n";
    }
    const auto disc = build_discretization_cached(grid, params, variant, o.quad_order, o.cache_dir);
    Spectrum sp;
    if (o.p == 2.0) {
        const StiffnessMatrix a = assemble_form_p2(disc);
        Eigen::MatrixXd lhs = a.A;
        if (variant == FormVariant::RegionalNeumann) {
            lhs += assemble_unit_mass(grid, 2.0, variant).M;
        }
        const MassMatrix m = assemble_mass(grid, field, 2.0, variant);
        sp = solve_linear_gevp(lhs, m.M, o.k,
                               ProblemTag{variant, params, weight.describe(), field.epsilon});
    } else {
        MinimizerOptions mo;
        mo.seed = o.seed;
        const MassMatrix m = assemble_mass(grid, field, o.p, variant);
        const MinimizeResult r = min_rayleigh_p(disc, m, mo);
        sp.eigenvalues = {r.lambda};
        sp.cluster_ids = {0};
        sp.tag = ProblemTag{variant, params, weight.describe(), field.epsilon};
    }
    std::ostringstream body;
    write_spectrum_csv(sp, body);
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        write_text_file(o.out, body.str());
        outputs.push_back(o.out);
    } else {
        std::cout << body.str();
    }
    write_manifest(o, "spectrum", outputs, timer.seconds(),
                   {{"column_legend", "k,lambda,cluster"}});
    return kExitOk;
}

int run_sweep(const CommonOpts& o) {
    Timer timer;
    SweepConfig cfg;
    cfg.a = o.a;
    cfg.b = o.b;
    cfg.n_cells = o.cells;
    cfg.params = {o.s, o.p};
    cfg.variant = parse_bc(o.bc);
    cfg.weight = parse_weight_spec(o.weight);
    cfg.eps_list = parse_eps_list(o.eps);
    cfg.K = o.k;
    cfg.quad_order = o.quad_order;
    cfg.seed = o.seed;
    cfg.jobs = o.jobs;
    cfg.cache_dir = o.cache_dir;
    validate(cfg.params);
    if (cfg.variant == FormVariant::RegionalNeumann) require_s_above_one_over_p(cfg.params);

    const SweepReport rep = sweep(cfg);
    for (const auto& r : rep.records) {
        if (!r.solved) std::cerr << "warning: eps=" << r.eps << " failed: " << r.note << "\n";
        else if (!r.eps_reciprocal) {
            std::cerr << "note: eps=" << r.eps << " is not the reciprocal of an integer\n";
        }
    }
    std::ostringstream body;
    write_sweep_csv(rep, body);
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        write_text_file(o.out, body.str());
        outputs.push_back(o.out);
    } else {
        std::cout << body.str();
    }
    const std::string jpath = o.json_out.empty() && !o.out.empty() ? o.out + ".json" : o.json_out;
    if (!jpath.empty()) {
        write_text_file(jpath, sweep_to_json(rep).dump(2) + "\n");
        outputs.push_back(jpath);
    }
    write_manifest(o, "sweep", outputs, timer.seconds(),
                   {{"column_legend", "variant,s,p,k,eps,lambda_eps,lambda_limit,error"}});
    return kExitOk;
}

int run_poincare(const CommonOpts& o) {
    Timer timer;
    const FracParams params{o.s, o.p};
    validate(params);
    ConstantReport rep;
    rep.method = "poincare_constant";
    MinimizerOptions mo;
    mo.seed = o.seed;
    for (double eps : parse_eps_list(o.eps)) {
        const double c = poincare_constant(o.cells, params, eps, o.quad_order, mo);
        rep.sweep_values.push_back(eps);
        rep.constants.push_back(c);
        rep.normalized.push_back(c / std::pow(eps, o.s));
    }
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < rep.sweep_values.size(); ++i) {
        pairs.emplace_back(rep.sweep_values[i], rep.constants[i]);
    }
    try {
        rep.fit = fit_rate(pairs);
    } catch (const InsufficientDataError&) {
        rep.fit = std::nullopt;
    }
    std::ostringstream body;
    write_constant_report_csv(rep, body);
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        write_text_file(o.out, body.str());
        outputs.push_back(o.out);
    } else {
        std::cout << body.str();
    }
    write_manifest(o, "poincare", outputs, timer.seconds(),
                   {{"column_legend", "param(eps),constant(C_P),normalized(C_P/eps^s)"},
                    {"report", constant_report_to_json(rep)}});
    return kExitOk;
}

int run_oscillation(const CommonOpts& o) {
    Timer timer;
    const FracParams params{o.s, o.p};
    validate(params);
    const auto weight = parse_weight_spec(o.weight);
    const Grid1D grid = make_grid(o.a, o.b, o.cells);
    const auto disc = build_discretization_cached(grid, params, parse_bc(o.bc), o.quad_order,
                                                  o.cache_dir);
    ConstantReport rep;
    rep.method = "oscillation_ratio";
    for (double eps : parse_eps_list(o.eps)) {
        const double ratio = oscillation_ratio(weight, eps, disc, o.probes, o.seed);
        rep.sweep_values.push_back(eps);
        rep.constants.push_back(ratio);
        rep.normalized.push_back(ratio / std::pow(eps, o.s));
    }
    std::ostringstream body;
    write_constant_report_csv(rep, body);
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        write_text_file(o.out, body.str());
        outputs.push_back(o.out);
    } else {
        std::cout << body.str();
    }
    write_manifest(o, "oscillation", outputs, timer.seconds(),
                   {{"column_legend", "param(eps),constant(ratio),normalized(ratio/eps^s)"}});
    return kExitOk;
}

int run_boundary_layer(const CommonOpts& o) {
    Timer timer;
    const FracParams params{o.s, o.p};
    require_s_above_one_over_p(params);
    ConstantReport rep;
    rep.method = "boundary_layer_constant";
    for (double d : parse_eps_list(o.deltas)) {
        const double c = boundary_layer_constant(d, params, o.cells, o.quad_order);
        rep.sweep_values.push_back(d);
        rep.constants.push_back(c);
        rep.normalized.push_back(std::pow(c, o.p) / d);  // sigma / delta
    }
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < rep.sweep_values.size(); ++i) {
        pairs.emplace_back(rep.sweep_values[i], std::pow(rep.constants[i], o.p));
    }
    try {
        rep.fit = fit_rate(pairs);  // slope of log sigma vs log delta
    } catch (const InsufficientDataError&) {
        rep.fit = std::nullopt;
    }
    std::ostringstream body;
    write_constant_report_csv(rep, body);
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        write_text_file(o.out, body.str());
        outputs.push_back(o.out);
    } else {
        std::cout << body.str();
    }
    write_manifest(o, "boundary-layer", outputs, timer.seconds(),
                   {{"column_legend", "param(delta),constant(sigma^{1/p}),normalized(sigma/delta)"},
                    {"report", constant_report_to_json(rep)}});
    return kExitOk;
}

int run_weyl(const CommonOpts& o) {
    Timer timer;
    const FracParams params{o.s, 2.0};
    validate(params);
    const Grid1D grid = make_grid(o.a, o.b, o.cells);
    const Spectrum mu = dirichlet_mu(grid, params, o.k_hi, o.quad_order);
    const RateFit fit = weyl_fit(mu, o.k_lo, o.k_hi, o.cells);
    std::ostringstream body;
    write_spectrum_csv(mu, body);
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        write_text_file(o.out, body.str());
        outputs.push_back(o.out);
    } else {
        std::cout << body.str();
    }
    std::cout << "weyl slope " << format_number(fit.slope) << " target " << format_number(2.0 * o.s)
              << " r2 " << format_number(fit.r_squared) << "\n";
    write_manifest(o, "weyl", outputs, timer.seconds(),
                   {{"column_legend", "k,lambda,cluster"}, {"fit", rate_fit_to_json(fit)}});
    return kExitOk;
}

int run_verify_all(const CommonOpts& o) {
    Timer timer;
    std::cout << "fraclab verify-all (" << (o.quick ? "quick" : "full") << " mode)\n";
    const auto results = run_verification(o.quick, &std::cout);
    int failures = 0;
    for (const auto& r : results) failures += r.pass ? 0 : 1;
    std::cout << (failures == 0 ? "ALL CHECKS PASSED" : "FAILURES: " + std::to_string(failures))
              << " (" << results.size() << " checks)\n";
    json summary = json::array();
    for (const auto& r : results) {
        summary.push_back({{"id", r.id},
                           {"name", r.name},
                           {"pass", r.pass},
                           {"detail", r.detail},
                           {"seconds", r.seconds}});
    }
    std::vector<std::string> outputs;
    if (!o.json_out.empty()) {
        write_text_file(o.json_out, summary.dump(2) + "\n");
        outputs.push_back(o.json_out);
    }
    write_manifest(o, "verify-all", outputs, timer.seconds(), {{"results", summary}});
    return failures == 0 ? kExitOk : kExitRuntime;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    const auto take_last = CLI::MultiOptionPolicy::TakeLast;
    cmd->add_option("--a", o.a, "left endpoint")->multi_option_policy(take_last);
    cmd->add_option("--b", o.b, "right endpoint")->multi_option_policy(take_last);
    cmd->add_option("--cells", o.cells, "number of grid cells")->multi_option_policy(take_last);
    cmd->add_option("--s", o.s, "fractional order in (0,1)")->multi_option_policy(take_last);
    cmd->add_option("--p", o.p, "exponent in (1,inf)")->multi_option_policy(take_last);
    cmd->add_option("--bc", o.bc, "dirichlet | neumann")->multi_option_policy(take_last);
    cmd->add_option("--weight", o.weight, "weight spec, e.g. sin:base=2,amp=1")
        ->multi_option_policy(take_last);
    cmd->add_option("--eps", o.eps, "eps value, list '1/4,1/8' or range '1/4:1/64'")
        ->multi_option_policy(take_last);
    cmd->add_option("--k", o.k, "number of eigenvalues")->multi_option_policy(take_last);
    cmd->add_option("--quad-order", o.quad_order, "base Gauss order (>= 3)")
        ->multi_option_policy(take_last);
    cmd->add_option("--seed", o.seed, "RNG seed")->multi_option_policy(take_last);
    cmd->add_option("--jobs", o.jobs, "worker cap for per-eps solves")
        ->multi_option_policy(take_last);
    cmd->add_option("--out", o.out, "CSV output path (stdout when omitted)")
        ->multi_option_policy(take_last);
    cmd->add_option("--json-out", o.json_out, "JSON output path")->multi_option_policy(take_last);
    cmd->add_option("--manifest", o.manifest, "manifest path override")
        ->multi_option_policy(take_last);
    cmd->add_option("--cache-dir", o.cache_dir, "quadrature cache directory")
        ->multi_option_policy(take_last);
    cmd->add_option("--config", o.config_file, "JSON config file mirroring flag names")
        ->multi_option_policy(take_last);
    cmd->add_flag("-v,--verbose", o.verbosity, "increase verbosity");
}

}  // namespace

int run(const std::vector<std::string>& argv) {
    CLI::App app{"fraclab: spectral homogenization laboratory for the weighted "
                 "fractional p-Laplacian on an interval"};
    app.require_subcommand(1);
    CommonOpts o;
    if (const char* env = std::getenv("FRACLAB_CACHE_DIR")) o.cache_dir = env;

    auto* c_spectrum = app.add_subcommand("spectrum", "eigenvalues for one weight field");
    auto* c_sweep = app.add_subcommand("sweep", "eps sweep with rates and bound checks");
    auto* c_poincare = app.add_subcommand("poincare", "Poincare constants on eps-intervals");
    auto* c_osc = app.add_subcommand("oscillation", "oscillating-integral ratios");
    auto* c_bl = app.add_subcommand("boundary-layer", "boundary-layer constants sigma(delta)");
    auto* c_weyl = app.add_subcommand("weyl", "unit-weight Dirichlet spectrum and Weyl fit");
    auto* c_verify = app.add_subcommand("verify-all", "run the acceptance checks");
    for (auto* cmd : {c_spectrum, c_sweep, c_poincare, c_osc, c_bl, c_weyl, c_verify}) {
        add_common(cmd, o);
    }
    c_osc->add_option("--probes", o.probes, "random probe count");
    c_bl->add_option("--delta", o.deltas, "delta list, e.g. '1/8:1/128'");
    c_weyl->add_option("--k-lo", o.k_lo, "first k of the fit range");
    c_weyl->add_option("--k-hi", o.k_hi, "last k of the fit range");
    c_verify->add_flag("--quick", o.quick, "smaller problem sizes (smoke run)");

    // Expand --config into tokens placed before the command-line flags so that
    // explicitly passed flags take precedence (TakeLast policy).
    std::vector<std::string> args = argv;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
        if (!path.empty() && i >= 1) {
            try {
                const auto tokens = config_tokens(path);
                args.insert(args.begin() + 1, tokens.begin(), tokens.end());
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            break;
        }
    }

    try {
        // CLI11 wants reversed argv without the program name
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (c_spectrum->parsed()) return run_spectrum(o);
        if (c_sweep->parsed()) return run_sweep(o);
        if (c_poincare->parsed()) return run_poincare(o);
        if (c_osc->parsed()) return run_oscillation(o);
        if (c_bl->parsed()) return run_boundary_layer(o);
        if (c_weyl->parsed()) return run_weyl(o);
        if (c_verify->parsed()) return run_verify_all(o);
    } catch (const std::invalid_argument& e) {
        // covers HypothesisError, ResolutionError, weight-spec and range errors
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace fraclab::cli
