#include "fraclab/report_io.hpp"

#include <cstdio>

namespace fraclab {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_sweep_csv(const SweepReport& report, std::ostream& os) {
    os << "variant,s,p,k,eps,lambda_eps,lambda_limit,error\n";
    const std::string variant = to_string(report.config.variant);
    const std::string s = format_number(report.config.params.s);
    const std::string p = format_number(report.config.params.p);
    for (const auto& r : report.records) {
        if (!r.solved) continue;
        os << variant << ',' << s << ',' << p << ',' << r.k << ',' << format_number(r.eps) << ','
           << format_number(r.lambda_eps) << ',' << format_number(r.lambda_limit) << ','
           << format_number(r.error) << '\n';
    }
}

nlohmann::json rate_fit_to_json(const RateFit& fit) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"r_squared", fit.r_squared},
            {"pairs_used", fit.pairs_used}};
}

nlohmann::json sweep_to_json(const SweepReport& report) {
    nlohmann::json j;
    j["config"] = {{"a", report.config.a},
                   {"b", report.config.b},
                   {"n_cells", report.config.n_cells},
                   {"s", report.config.params.s},
                   {"p", report.config.params.p},
                   {"variant", to_string(report.config.variant)},
                   {"weight", report.config.weight.describe()},
                   {"eps_list", report.config.eps_list},
                   {"K", report.config.K},
                   {"quad_order", report.config.quad_order},
                   {"seed", report.config.seed}};
    j["prefactor_exponent"] = report.prefactor_exponent;
    j["lambda_limit"] = report.lambda_limit;
    j["mu"] = report.mu;
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : report.records) {
        nlohmann::json rj = {{"eps", r.eps},
                             {"k", r.k},
                             {"solved", r.solved},
                             {"eps_reciprocal", r.eps_reciprocal}};
        if (r.solved) {
            rj["lambda_eps"] = r.lambda_eps;
            rj["lambda_limit"] = r.lambda_limit;
            rj["error"] = r.error;
        } else {
            rj["note"] = r.note;
        }
        recs.push_back(std::move(rj));
    }
    j["records"] = std::move(recs);
    nlohmann::json fits = nlohmann::json::array();
    for (const auto& f : report.fits) {
        fits.push_back(f ? rate_fit_to_json(*f) : nlohmann::json(nullptr));
    }
    j["rate_fits"] = std::move(fits);
    j["verdicts"] = {{"sandwich_ok", report.verdicts.sandwich_ok},
                     {"sandwich_margin", report.verdicts.sandwich_margin},
                     {"ordering_checked", report.verdicts.ordering_checked},
                     {"ordering_ok", report.verdicts.ordering_ok},
                     {"ordering_margin", report.verdicts.ordering_margin},
                     {"envelope_C", report.verdicts.envelope_C},
                     {"envelope_spread", report.verdicts.envelope_spread},
                     {"envelope_defined", report.verdicts.envelope_defined}};
    return j;
}

void write_constant_report_csv(const ConstantReport& report, std::ostream& os) {
    os << "param,constant,normalized_constant\n";
    for (std::size_t i = 0; i < report.sweep_values.size(); ++i) {
        os << format_number(report.sweep_values[i]) << ',' << format_number(report.constants[i])
           << ',' << format_number(report.normalized[i]) << '\n';
    }
}

nlohmann::json constant_report_to_json(const ConstantReport& report) {
    nlohmann::json j;
    j["method"] = report.method;
    j["sweep_values"] = report.sweep_values;
    j["constants"] = report.constants;
    j["normalized"] = report.normalized;
    j["converged"] = report.converged;
    j["fit"] = report.fit ? rate_fit_to_json(*report.fit) : nlohmann::json(nullptr);
    return j;
}

void write_spectrum_csv(const Spectrum& spectrum, std::ostream& os) {
    os << "k,lambda,cluster\n";
    for (int k = 0; k < spectrum.size(); ++k) {
        os << (k + 1) << ',' << format_number(spectrum.eigenvalues[k]) << ','
           << spectrum.cluster_ids[k] << '\n';
    }
}

}  // namespace fraclab
