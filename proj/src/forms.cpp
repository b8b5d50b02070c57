#include "fraclab/forms.hpp"

#include <cmath>
#include <stdexcept>

namespace fraclab {

namespace {

// Antiderivative of |w|^p: F(w) = w |w|^p / (p+1).
inline double f_abs_pow(double w, double p) { return w * std::pow(std::abs(w), p) / (p + 1.0); }

}  // namespace

double lp_cell_integral(double uL, double uR, double p) {
    const double scale = std::abs(uL) + std::abs(uR);
    if (scale == 0.0) return 0.0;
    const double d = uR - uL;
    if (std::abs(d) <= 1e-5 * scale) {
        // midpoint expansion; the exact difference quotient cancels here
        const double m = 0.5 * (uL + uR);
        const double am = std::abs(m);
        double corr = 0.0;
        if (am > 0.0) corr = p * (p - 1.0) * std::pow(am, p - 2.0) * d * d / 24.0;
        return std::pow(am, p) + corr;
    }
    return (f_abs_pow(uR, p) - f_abs_pow(uL, p)) / d;
}

void lp_cell_gradient(double uL, double uR, double p, double& dL, double& dR) {
    const double scale = std::abs(uL) + std::abs(uR);
    if (scale == 0.0) {
        dL = dR = 0.0;
        return;
    }
    const double d = uR - uL;
    if (std::abs(d) <= 1e-5 * scale) {
        const double m = 0.5 * (uL + uR);
        const double gm = m == 0.0 ? 0.0 : std::pow(std::abs(m), p - 2.0) * m;
        // d/duL int = p/2 * |m|^{p-2} m - p(p-1)/12 |m|^{p-2} d + O(d^2), mirrored for uR
        const double lin = m == 0.0 ? 0.0 : p * (p - 1.0) * std::pow(std::abs(m), p - 2.0) * d / 12.0;
        dL = 0.5 * p * gm - lin;
        dR = 0.5 * p * gm + lin;
        return;
    }
    const double P0 = (std::pow(std::abs(uR), p) - std::pow(std::abs(uL), p)) / p;
    const double P1 = f_abs_pow(uR, p) - f_abs_pow(uL, p);
    dR = p * (P1 - uL * P0) / (d * d);
    dL = p * (uR * P0 - P1) / (d * d);
}

namespace {

std::vector<double> full_nodal(std::span<const double> u, const Grid1D& grid, FormVariant dofs) {
    const int n = grid.n_cells;
    const int ndofs = dofs == FormVariant::DirichletExterior ? n - 1 : n + 1;
    if (static_cast<int>(u.size()) != ndofs) {
        throw std::invalid_argument("MassMatrix: nodal vector has wrong length for the free dofs");
    }
    std::vector<double> uf(n + 1, 0.0);
    const int off = dofs == FormVariant::DirichletExterior ? 1 : 0;
    for (std::size_t i = 0; i < u.size(); ++i) uf[off + i] = u[i];
    return uf;
}

}  // namespace

double MassMatrix::value(std::span<const double> u) const {
    const auto uf = full_nodal(u, grid, dofs);
    double total = 0.0;
    for (int i = 0; i < grid.n_cells; ++i) {
        total += rho[i] * lp_cell_integral(uf[i], uf[i + 1], p);
    }
    return grid.h * total;
}

std::vector<double> MassMatrix::gradient(std::span<const double> u) const {
    const auto uf = full_nodal(u, grid, dofs);
    std::vector<double> g(grid.n_cells + 1, 0.0);
    for (int i = 0; i < grid.n_cells; ++i) {
        double dL = 0.0, dR = 0.0;
        lp_cell_gradient(uf[i], uf[i + 1], p, dL, dR);
        g[i] += grid.h * rho[i] * dL;
        g[i + 1] += grid.h * rho[i] * dR;
    }
    const int off = dofs == FormVariant::DirichletExterior ? 1 : 0;
    return std::vector<double>(g.begin() + off, g.begin() + off + n_dofs());
}

StiffnessMatrix assemble_form_p2(const GagliardoDiscretization& disc) {
    if (disc.params.p != 2.0) {
        throw std::invalid_argument("assemble_form_p2: discretization must have p = 2");
    }
    const int n = disc.grid.n_cells;
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n + 1, n + 1);

    // Per gap, the 4x4 block over nodes (i, i+1, i+g, i+g+1) is the same for
    // every i; accumulate the quadrature once, then scatter per element pair.
    for (const auto& tab : disc.gap_tables) {
        const int g = tab.gap;
        double blk[4][4] = {};
        for (const auto& pt : tab.points) {
            const double c[4] = {1.0 - pt.theta_x, pt.theta_x, -(1.0 - pt.theta_y), -pt.theta_y};
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) blk[a][b] += pt.w * c[a] * c[b];
            }
        }
        const int offs[4] = {0, 1, g, g + 1};
        for (int i = 0; i + g < n; ++i) {
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) full(i + offs[a], i + offs[b]) += blk[a][b];
            }
        }
    }
    for (const auto& pt : disc.exterior) {
        const double phi[2] = {1.0 - pt.theta, pt.theta};
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) full(pt.cell + a, pt.cell + b) += pt.w * phi[a] * phi[b];
        }
    }

    StiffnessMatrix sm;
    sm.variant = disc.variant;
    sm.params = disc.params;
    const int off = disc.dof_offset();
    sm.A = full.block(off, off, disc.n_dofs(), disc.n_dofs());
    return sm;
}

MassMatrix assemble_mass(const Grid1D& grid, const WeightField& field, double p,
                         FormVariant free_dofs) {
    if (!field.grid.same_as(grid)) {
        throw std::invalid_argument("assemble_mass: weight field lives on a different grid");
    }
    MassMatrix mm;
    mm.grid = grid;
    mm.rho = field.cell_values;
    mm.p = p;
    mm.dofs = free_dofs;
    if (p == 2.0) {
        const int n = grid.n_cells;
        Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n + 1, n + 1);
        for (int i = 0; i < n; ++i) {
            const double c = mm.rho[i] * grid.h;
            full(i, i) += c / 3.0;
            full(i + 1, i + 1) += c / 3.0;
            full(i, i + 1) += c / 6.0;
            full(i + 1, i) += c / 6.0;
        }
        const int off = free_dofs == FormVariant::DirichletExterior ? 1 : 0;
        mm.M = full.block(off, off, mm.n_dofs(), mm.n_dofs());
    }
    return mm;
}

MassMatrix assemble_unit_mass(const Grid1D& grid, double p, FormVariant free_dofs) {
    WeightField unit;
    unit.grid = grid;
    unit.cell_values.assign(grid.n_cells, 1.0);
    unit.rho_minus = unit.rho_plus = 1.0;
    unit.is_limit = true;
    return assemble_mass(grid, unit, p, free_dofs);
}

}  // namespace fraclab
