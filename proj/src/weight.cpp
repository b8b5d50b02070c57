#include "fraclab/weight.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fraclab/errors.hpp"

namespace fraclab {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double frac_unit(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0;  // guard against rounding at integers
    return f;
}

void require_positive_bounds(double lo, const std::string& what) {
    if (!(lo > 0.0) || !std::isfinite(lo)) {
        throw std::invalid_argument(what + ": weight must satisfy 0 < rho_minus (condition on the bounds)");
    }
}

}  // namespace

PeriodicWeight PeriodicWeight::constant(double value) {
    require_positive_bounds(value, "PeriodicWeight::constant");
    PeriodicWeight w;
    w.kind_ = WeightKind::constant;
    w.c0_ = value;
    w.rho_minus_ = w.rho_plus_ = w.mean_ = value;
    std::ostringstream os;
    os << "const:" << value;
    w.desc_ = os.str();
    return w;
}

PeriodicWeight PeriodicWeight::sinusoid(double base, double amp) {
    if (!std::isfinite(base) || !std::isfinite(amp)) {
        throw std::invalid_argument("PeriodicWeight::sinusoid: parameters must be finite");
    }
    PeriodicWeight w;
    w.kind_ = WeightKind::sinusoid;
    w.c0_ = base;
    w.c1_ = amp;
    w.rho_minus_ = base - std::abs(amp);
    w.rho_plus_ = base + std::abs(amp);
    require_positive_bounds(w.rho_minus_, "PeriodicWeight::sinusoid");
    w.mean_ = base;
    std::ostringstream os;
    os << "sin:base=" << base << ",amp=" << amp;
    w.desc_ = os.str();
    return w;
}

PeriodicWeight PeriodicWeight::checkerboard(double lo, double hi, double split) {
    if (!(split > 0.0 && split < 1.0)) {
        throw std::invalid_argument("PeriodicWeight::checkerboard: split must lie in (0,1)");
    }
    require_positive_bounds(std::min(lo, hi), "PeriodicWeight::checkerboard");
    PeriodicWeight w;
    w.kind_ = WeightKind::checkerboard;
    w.c0_ = lo;
    w.c1_ = hi;
    w.c2_ = split;
    w.rho_minus_ = std::min(lo, hi);
    w.rho_plus_ = std::max(lo, hi);
    w.mean_ = lo * split + hi * (1.0 - split);
    std::ostringstream os;
    os << "checker:lo=" << lo << ",hi=" << hi;
    if (split != 0.5) os << ",split=" << split;
    w.desc_ = os.str();
    return w;
}

PeriodicWeight PeriodicWeight::tabulated(std::vector<double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("PeriodicWeight::tabulated: need at least one sample");
    }
    double lo = samples[0], hi = samples[0], sum = 0.0;
    for (double v : samples) {
        if (!std::isfinite(v)) throw std::invalid_argument("PeriodicWeight::tabulated: non-finite sample");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    require_positive_bounds(lo, "PeriodicWeight::tabulated");
    PeriodicWeight w;
    w.kind_ = WeightKind::tabulated;
    w.rho_minus_ = lo;
    w.rho_plus_ = hi;
    w.mean_ = sum / static_cast<double>(samples.size());
    std::ostringstream os;
    os << "table:n=" << samples.size();
    w.desc_ = os.str();
    w.samples_ = std::move(samples);
    return w;
}

double PeriodicWeight::operator()(double x) const {
    const double f = frac_unit(x);
    switch (kind_) {
        case WeightKind::constant:
            return c0_;
        case WeightKind::sinusoid:
            return c0_ + c1_ * std::sin(kTwoPi * f);
        case WeightKind::checkerboard:
            return f < c2_ ? c0_ : c1_;
        case WeightKind::tabulated: {
            const auto n = samples_.size();
            auto i = static_cast<std::size_t>(f * static_cast<double>(n));
            if (i >= n) i = n - 1;
            return samples_[i];
        }
    }
    return c0_;
}

double weight_mean(const PeriodicWeight& w, int quad_cells) {
    if (quad_cells < 1) throw std::invalid_argument("weight_mean: quad_cells must be positive");
    double sum = 0.0;
    for (int i = 0; i < quad_cells; ++i) {
        sum += w((i + 0.5) / quad_cells);
    }
    return sum / quad_cells;
}

double WeightField::min_value() const {
    return *std::min_element(cell_values.begin(), cell_values.end());
}

double WeightField::max_value() const {
    return *std::max_element(cell_values.begin(), cell_values.end());
}

WeightField sample_weight(const PeriodicWeight& w, const Grid1D& grid, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::invalid_argument("sample_weight: epsilon must be positive and finite");
    }
    if (grid.h > eps / 2.0) {
        std::ostringstream os;
        os << "sample_weight: grid under-resolves the oscillation (h = " << grid.h
           << " > eps/2 = " << eps / 2.0 << ")";
        throw ResolutionError(os.str());
    }
    WeightField f;
    f.grid = grid;
    f.epsilon = eps;
    f.is_limit = false;
    f.resolution_warning = grid.h > eps / 16.0;
    f.rho_minus = w.rho_minus();
    f.rho_plus = w.rho_plus();
    f.cell_values.resize(grid.n_cells);
    for (int i = 0; i < grid.n_cells; ++i) {
        f.cell_values[i] = w(grid.cell_midpoint(i) / eps);
    }
    return f;
}

WeightField sample_weight(const PeriodicWeight& w, const Grid1D& grid, LimitEps) {
    WeightField f;
    f.grid = grid;
    f.epsilon = 0.0;
    f.is_limit = true;
    f.rho_minus = w.rho_minus();
    f.rho_plus = w.rho_plus();
    f.cell_values.assign(grid.n_cells, w.mean());
    return f;
}

bool is_reciprocal_eps(double eps) {
    if (!(eps > 0.0) || eps > 1.0) return false;
    const double m = 1.0 / eps;
    return std::abs(m - std::round(m)) <= 1e-9 * m;
}

namespace {

double parse_double(const std::string& token, const std::string& context) {
    try {
        std::size_t pos = 0;
        double v = std::stod(token, &pos);
        if (pos != token.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("weight spec: cannot parse number '" + token + "' in " + context);
    }
}

std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& body) {
    std::vector<std::pair<std::string, std::string>> kv;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("weight spec: expected key=value, got '" + item + "'");
        }
        kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return kv;
}

}  // namespace

PeriodicWeight parse_weight_spec(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("weight spec '" + spec +
                                    "': expected '<kind>:<params>' with kind const|sin|checker|table");
    }
    const std::string kind = spec.substr(0, colon);
    const std::string body = spec.substr(colon + 1);
    if (kind == "const") {
        return PeriodicWeight::constant(parse_double(body, spec));
    }
    if (kind == "sin") {
        double base = 0.0, amp = 0.0;
        bool has_base = false, has_amp = false;
        for (auto& [k, v] : parse_kv(body)) {
            if (k == "base") {
                base = parse_double(v, spec);
                has_base = true;
            } else if (k == "amp") {
                amp = parse_double(v, spec);
                has_amp = true;
            } else {
                throw std::invalid_argument("weight spec '" + spec + "': unknown key '" + k + "'");
            }
        }
        if (!has_base || !has_amp) {
            throw std::invalid_argument("weight spec '" + spec + "': sin needs base= and amp=");
        }
        return PeriodicWeight::sinusoid(base, amp);
    }
    if (kind == "checker") {
        double lo = 0.0, hi = 0.0, split = 0.5;
        bool has_lo = false, has_hi = false;
        for (auto& [k, v] : parse_kv(body)) {
            if (k == "lo") {
                lo = parse_double(v, spec);
                has_lo = true;
            } else if (k == "hi") {
                hi = parse_double(v, spec);
                has_hi = true;
            } else if (k == "split") {
                split = parse_double(v, spec);
            } else {
                throw std::invalid_argument("weight spec '" + spec + "': unknown key '" + k + "'");
            }
        }
        if (!has_lo || !has_hi) {
            throw std::invalid_argument("weight spec '" + spec + "': checker needs lo= and hi=");
        }
        return PeriodicWeight::checkerboard(lo, hi, split);
    }
    if (kind == "table") {
        std::ifstream in(body);
        if (!in) throw std::invalid_argument("weight spec '" + spec + "': cannot open '" + body + "'");
        std::vector<double> samples;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            samples.push_back(parse_double(line, spec));
        }
        return PeriodicWeight::tabulated(std::move(samples));
    }
    throw std::invalid_argument("weight spec '" + spec + "': unknown kind '" + kind + "'");
}

}  // namespace fraclab
