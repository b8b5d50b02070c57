#include "fraclab/gagliardo.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fraclab/errors.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

void validate(const FracParams& params) {
    if (!(params.s > 0.0 && params.s < 1.0) || !std::isfinite(params.s)) {
        throw std::invalid_argument("FracParams: s must lie in (0,1)");
    }
    if (!(params.p > 1.0) || !std::isfinite(params.p)) {
        throw std::invalid_argument("FracParams: p must lie in (1,inf)");
    }
}

void require_s_above_one_over_p(const FracParams& params) {
    validate(params);
    if (!(params.s > 1.0 / params.p)) {
        std::ostringstream os;
        os << "hypothesis violated: s > 1/p required, got s = " << params.s << ", 1/p = "
           << 1.0 / params.p;
        throw HypothesisError(os.str());
    }
}

std::string to_string(FormVariant v) {
    return v == FormVariant::DirichletExterior ? "dirichlet" : "neumann";
}

double exterior_density(double x, const FracParams& params, double a, double b) {
    validate(params);
    if (!(x > a && x < b)) {
        throw std::domain_error("exterior_density: x must lie strictly inside (a,b)");
    }
    const double sp = params.sp();
    return (std::pow(x - a, -sp) + std::pow(b - x, -sp)) / sp;
}

std::size_t GagliardoDiscretization::total_points() const {
    std::size_t n = exterior.size();
    for (const auto& t : gap_tables) n += t.points.size();
    return n;
}

namespace {

int disjoint_order(int quad_order, int gap) {
    if (gap < 4) return quad_order + 4;
    if (gap < 8) return quad_order + 2;
    return quad_order;
}

void build_gap_tables(GagliardoDiscretization& d) {
    const int n = d.grid.n_cells;
    const double s = d.params.s, p = d.params.p, sp = s * p;
    const double scale = d.kernel_scale;
    d.gap_tables.clear();
    d.gap_tables.reserve(n);

    // gap 0: |Pi u(x) - Pi u(y)| = |slope| |x - y| exactly, so the pair integral
    // is |uR - uL|^p * 2 / ((p - sp)(p + 1 - sp)). One synthetic point at
    // (theta_x, theta_y) = (0, 1) evaluates |uL - uR|^p.
    {
        GapTable t;
        t.gap = 0;
        t.points.push_back({0.0, 1.0, scale * 2.0 / ((p - sp) * (p + 1.0 - sp))});
        d.gap_tables.push_back(std::move(t));
    }

    if (n >= 2) {
        // gap 1: in shared-vertex coordinates u = 1 - theta_x, v = theta_y the
        // integrand is |alpha u + beta v|^p (u + v)^{-(1+sp)} on the unit square.
        // Duffy split along u = v; the radial power integrates to 1/(p+1-sp),
        // leaving Gauss points on the diagonal parameter t.
        GapTable t;
        t.gap = 1;
        const auto& q = gauss_legendre(d.quad_order + 4);
        const double radial = 1.0 / (p + 1.0 - sp);
        for (std::size_t i = 0; i < q.nodes.size(); ++i) {
            const double tq = q.nodes[i];
            const double w = 2.0 * scale * q.weights[i] * std::pow(1.0 + tq, -(1.0 + sp)) * radial;
            t.points.push_back({1.0 - tq, 1.0, w});  // triangle v >= u: D at (u,v) = (t,1)
            t.points.push_back({0.0, tq, w});        // triangle u >= v: D at (u,v) = (1,t)
        }
        d.gap_tables.push_back(std::move(t));
    }

    for (int g = 2; g < n; ++g) {
        GapTable t;
        t.gap = g;
        const auto& q = gauss_legendre(disjoint_order(d.quad_order, g));
        const std::size_t m = q.nodes.size();
        t.points.reserve(m * m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double dist = g + q.nodes[j] - q.nodes[i];
                const double w =
                    2.0 * scale * q.weights[i] * q.weights[j] * std::pow(dist, -(1.0 + sp));
                t.points.push_back({q.nodes[i], q.nodes[j], w});
            }
        }
        d.gap_tables.push_back(std::move(t));
    }
}

void build_exterior(GagliardoDiscretization& d) {
    const int n = d.grid.n_cells;
    const double p = d.params.p, sp = d.params.sp();
    // E_ext = 2 h^{1-sp}/sp * sum_i int_0^1 |Pi u(i, th)|^p [(i+th)^{-sp} + (n-i-th)^{-sp}] dth.
    const double base = 2.0 * d.kernel_scale / sp;
    d.exterior.clear();
    for (int i = 0; i < n; ++i) {
        const int dist_to_edge = std::min(i, n - 1 - i);
        const auto& q = gauss_legendre(dist_to_edge < 4 ? d.quad_order + 4 : d.quad_order);
        for (std::size_t k = 0; k < q.nodes.size(); ++k) {
            const double th = q.nodes[k];
            double kap = 0.0;
            if (i > 0) kap += std::pow(i + th, -sp);          // left power, smooth off cell 0
            if (i < n - 1) kap += std::pow(n - i - th, -sp);  // right power, smooth off cell n-1
            if (kap > 0.0) d.exterior.push_back({i, th, base * q.weights[k] * kap});
        }
    }
    // Boundary cells against their own singular power: with the interpolant
    // vanishing at the endpoint, int_0^1 |u1 th|^p th^{-sp} dth = |u1|^p / (p+1-sp).
    const double wsing = base / (p + 1.0 - sp);
    d.exterior.push_back({0, 1.0, wsing});
    d.exterior.push_back({n - 1, 0.0, wsing});
}

}  // namespace

GagliardoDiscretization build_discretization(const Grid1D& grid, const FracParams& params,
                                             FormVariant variant, int quad_order) {
    validate(params);
    if (quad_order < 3) throw std::invalid_argument("build_discretization: quad_order must be >= 3");
    if (grid.n_cells < 2) throw std::invalid_argument("build_discretization: grid too small");
    GagliardoDiscretization d;
    d.grid = grid;
    d.params = params;
    d.variant = variant;
    d.quad_order = quad_order;
    d.kernel_scale = std::pow(grid.h, 1.0 - params.sp());
    build_gap_tables(d);
    if (variant == FormVariant::DirichletExterior) build_exterior(d);
    return d;
}

namespace {

// |t|^p with fast paths for the common exponents.
template <class PowAbs>
double kernel_energy(const GagliardoDiscretization& d, const std::vector<double>& uf, PowAbs pw) {
    double total = 0.0;
    const int n = d.grid.n_cells;
    for (const auto& tab : d.gap_tables) {
        const int g = tab.gap;
        const int imax = n - g;
        for (const auto& pt : tab.points) {
            const double cx1 = pt.theta_x, cx0 = 1.0 - cx1;
            const double cy1 = pt.theta_y, cy0 = 1.0 - cy1;
            double acc = 0.0;
            for (int i = 0; i < imax; ++i) {
                const double diff =
                    cx0 * uf[i] + cx1 * uf[i + 1] - cy0 * uf[i + g] - cy1 * uf[i + g + 1];
                acc += pw(diff);
            }
            total += pt.w * acc;
        }
    }
    return total;
}

template <class PowAbs>
double exterior_energy(const GagliardoDiscretization& d, const std::vector<double>& uf, PowAbs pw) {
    double total = 0.0;
    for (const auto& pt : d.exterior) {
        const double v = (1.0 - pt.theta) * uf[pt.cell] + pt.theta * uf[pt.cell + 1];
        total += pt.w * pw(v);
    }
    return total;
}

std::vector<double> to_full_nodal(std::span<const double> u, const GagliardoDiscretization& d) {
    const int n = d.grid.n_cells;
    if (static_cast<int>(u.size()) != d.n_dofs()) {
        throw std::invalid_argument("energy_p: nodal vector has wrong length for the free dofs");
    }
    std::vector<double> uf(n + 1, 0.0);
    const int off = d.dof_offset();
    for (std::size_t i = 0; i < u.size(); ++i) uf[off + i] = u[i];
    return uf;
}

}  // namespace

double energy_p(std::span<const double> u, const GagliardoDiscretization& disc) {
    const std::vector<double> uf = to_full_nodal(u, disc);
    const double p = disc.params.p;
    double e = 0.0;
    if (p == 2.0) {
        auto pw = [](double t) { return t * t; };
        e = kernel_energy(disc, uf, pw) + exterior_energy(disc, uf, pw);
    } else if (p == 3.0) {
        auto pw = [](double t) { return std::abs(t) * t * t; };
        e = kernel_energy(disc, uf, pw) + exterior_energy(disc, uf, pw);
    } else {
        auto pw = [p](double t) { return std::pow(std::abs(t), p); };
        e = kernel_energy(disc, uf, pw) + exterior_energy(disc, uf, pw);
    }
    return e;
}

namespace {

// d/dt |t|^p = p |t|^{p-2} t, optionally smoothed to p (t^2+eta^2)^{(p-2)/2} t.
template <class DPow>
void kernel_gradient(const GagliardoDiscretization& d, const std::vector<double>& uf,
                     std::vector<double>& grad, DPow dpw) {
    const int n = d.grid.n_cells;
    for (const auto& tab : d.gap_tables) {
        const int g = tab.gap;
        const int imax = n - g;
        for (const auto& pt : tab.points) {
            const double cx1 = pt.theta_x, cx0 = 1.0 - cx1;
            const double cy1 = pt.theta_y, cy0 = 1.0 - cy1;
            for (int i = 0; i < imax; ++i) {
                const double diff =
                    cx0 * uf[i] + cx1 * uf[i + 1] - cy0 * uf[i + g] - cy1 * uf[i + g + 1];
                const double gc = pt.w * dpw(diff);
                grad[i] += gc * cx0;
                grad[i + 1] += gc * cx1;
                grad[i + g] -= gc * cy0;
                grad[i + g + 1] -= gc * cy1;
            }
        }
    }
}

template <class DPow>
void exterior_gradient(const GagliardoDiscretization& d, const std::vector<double>& uf,
                       std::vector<double>& grad, DPow dpw) {
    for (const auto& pt : d.exterior) {
        const double v = (1.0 - pt.theta) * uf[pt.cell] + pt.theta * uf[pt.cell + 1];
        const double gc = pt.w * dpw(v);
        grad[pt.cell] += gc * (1.0 - pt.theta);
        grad[pt.cell + 1] += gc * pt.theta;
    }
}

}  // namespace

std::vector<double> energy_grad_p(std::span<const double> u, const GagliardoDiscretization& disc,
                                  double smoothing_eta) {
    const std::vector<double> uf = to_full_nodal(u, disc);
    const int n = disc.grid.n_cells;
    const double p = disc.params.p;
    std::vector<double> grad_full(n + 1, 0.0);
    if (smoothing_eta > 0.0) {
        const double eta2 = smoothing_eta * smoothing_eta;
        auto dpw = [p, eta2](double t) { return p * std::pow(t * t + eta2, 0.5 * (p - 2.0)) * t; };
        kernel_gradient(disc, uf, grad_full, dpw);
        exterior_gradient(disc, uf, grad_full, dpw);
    } else if (p == 2.0) {
        auto dpw = [](double t) { return 2.0 * t; };
        kernel_gradient(disc, uf, grad_full, dpw);
        exterior_gradient(disc, uf, grad_full, dpw);
    } else if (p == 3.0) {
        auto dpw = [](double t) { return 3.0 * std::abs(t) * t; };
        kernel_gradient(disc, uf, grad_full, dpw);
        exterior_gradient(disc, uf, grad_full, dpw);
    } else {
        auto dpw = [p](double t) {
            return t == 0.0 ? 0.0 : p * std::pow(std::abs(t), p - 2.0) * t;
        };
        kernel_gradient(disc, uf, grad_full, dpw);
        exterior_gradient(disc, uf, grad_full, dpw);
    }
    const int off = disc.dof_offset();
    return std::vector<double>(grad_full.begin() + off, grad_full.begin() + off + disc.n_dofs());
}

// ---------------------------------------------------------------------------
// Binary cache
// ---------------------------------------------------------------------------

namespace {

constexpr char kCacheMagic[4] = {'F', 'L', 'Q', 'C'};
constexpr std::uint32_t kCacheVersion = 1;

struct CacheHeader {
    char magic[4];
    std::uint32_t version;
    double a, b, s, p;
    std::uint32_t n_cells;
    std::uint32_t quad_order;
    std::uint8_t variant;
    std::uint8_t pad[7];
};

template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return static_cast<bool>(is);
}

}  // namespace

bool save_discretization_cache(const GagliardoDiscretization& d, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) return false;
    CacheHeader h{};
    std::memcpy(h.magic, kCacheMagic, 4);
    h.version = kCacheVersion;
    h.a = d.grid.a;
    h.b = d.grid.b;
    h.s = d.params.s;
    h.p = d.params.p;
    h.n_cells = static_cast<std::uint32_t>(d.grid.n_cells);
    h.quad_order = static_cast<std::uint32_t>(d.quad_order);
    h.variant = d.variant == FormVariant::DirichletExterior ? 0 : 1;
    write_pod(os, h);
    const auto ngaps = static_cast<std::uint64_t>(d.gap_tables.size());
    write_pod(os, ngaps);
    for (const auto& t : d.gap_tables) {
        write_pod(os, static_cast<std::uint32_t>(t.gap));
        write_pod(os, static_cast<std::uint64_t>(t.points.size()));
        os.write(reinterpret_cast<const char*>(t.points.data()),
                 static_cast<std::streamsize>(t.points.size() * sizeof(PairQuadPoint)));
    }
    write_pod(os, static_cast<std::uint64_t>(d.exterior.size()));
    os.write(reinterpret_cast<const char*>(d.exterior.data()),
             static_cast<std::streamsize>(d.exterior.size() * sizeof(ExteriorQuadPoint)));
    return static_cast<bool>(os);
}

bool try_load_discretization_cache(const Grid1D& grid, const FracParams& params,
                                   FormVariant variant, int quad_order, const std::string& path,
                                   GagliardoDiscretization& out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    CacheHeader h{};
    if (!read_pod(is, h)) return false;
    if (std::memcmp(h.magic, kCacheMagic, 4) != 0 || h.version != kCacheVersion) return false;
    if (h.a != grid.a || h.b != grid.b || h.n_cells != static_cast<std::uint32_t>(grid.n_cells) ||
        h.s != params.s || h.p != params.p ||
        h.quad_order != static_cast<std::uint32_t>(quad_order) ||
        h.variant != (variant == FormVariant::DirichletExterior ? 0 : 1)) {
        return false;
    }
    GagliardoDiscretization d;
    d.grid = grid;
    d.params = params;
    d.variant = variant;
    d.quad_order = quad_order;
    d.kernel_scale = std::pow(grid.h, 1.0 - params.sp());
    std::uint64_t ngaps = 0;
    if (!read_pod(is, ngaps) || ngaps > static_cast<std::uint64_t>(grid.n_cells)) return false;
    d.gap_tables.resize(ngaps);
    for (auto& t : d.gap_tables) {
        std::uint32_t gap = 0;
        std::uint64_t npts = 0;
        if (!read_pod(is, gap) || !read_pod(is, npts)) return false;
        t.gap = static_cast<int>(gap);
        t.points.resize(npts);
        is.read(reinterpret_cast<char*>(t.points.data()),
                static_cast<std::streamsize>(npts * sizeof(PairQuadPoint)));
        if (!is) return false;
    }
    std::uint64_t next = 0;
    if (!read_pod(is, next)) return false;
    d.exterior.resize(next);
    is.read(reinterpret_cast<char*>(d.exterior.data()),
            static_cast<std::streamsize>(next * sizeof(ExteriorQuadPoint)));
    if (!is) return false;
    out = std::move(d);
    return true;
}

GagliardoDiscretization build_discretization_cached(const Grid1D& grid, const FracParams& params,
                                                    FormVariant variant, int quad_order,
                                                    const std::string& cache_dir) {
    if (cache_dir.empty()) return build_discretization(grid, params, variant, quad_order);
    std::ostringstream name;
    name << "gagliardo_a" << grid.a << "_b" << grid.b << "_n" << grid.n_cells << "_s" << params.s
         << "_p" << params.p << "_" << to_string(variant) << "_q" << quad_order << ".bin";
    const auto path = (std::filesystem::path(cache_dir) / name.str()).string();
    GagliardoDiscretization d;
    if (try_load_discretization_cache(grid, params, variant, quad_order, path, d)) return d;
    d = build_discretization(grid, params, variant, quad_order);
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    save_discretization_cache(d, path);
    return d;
}

}  // namespace fraclab
