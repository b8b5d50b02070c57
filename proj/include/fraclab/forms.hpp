#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "fraclab/gagliardo.hpp"
#include "fraclab/weight.hpp"

namespace fraclab {

/// Dense symmetric form matrix over the free dofs; u^T A u == energy_p(u) for p = 2.
struct StiffnessMatrix {
    Eigen::MatrixXd A;
    FormVariant variant = FormVariant::DirichletExterior;
    FracParams params;
};

/// Weighted L^p mass. For p = 2 a dense SPD matrix is assembled; for every p
/// the weighted functional N_p(u) = sum_cells rho_c int_cell |Pi u|^p and its
/// gradient are evaluated from the exact per-cell closed form for
/// piecewise-linear interpolants.
struct MassMatrix {
    Eigen::MatrixXd M;  // only populated when p == 2
    Grid1D grid;
    std::vector<double> rho;  // cellwise values
    double p = 2.0;
    FormVariant dofs = FormVariant::DirichletExterior;

    int n_dofs() const {
        return dofs == FormVariant::DirichletExterior ? grid.n_cells - 1 : grid.n_cells + 1;
    }
    double value(std::span<const double> u) const;
    std::vector<double> gradient(std::span<const double> u) const;
};

/// p = 2 only: dense symmetric stiffness with u^T A u = energy_p(u, disc).
/// Throws std::invalid_argument when disc.params.p != 2.
StiffnessMatrix assemble_form_p2(const GagliardoDiscretization& disc);

/// Weighted mass over the free dofs of `free_dofs`. Throws std::invalid_argument
/// when the field lives on a different grid.
MassMatrix assemble_mass(const Grid1D& grid, const WeightField& field, double p,
                         FormVariant free_dofs);

/// Unit-weight convenience overload.
MassMatrix assemble_unit_mass(const Grid1D& grid, double p, FormVariant free_dofs);

/// Exact integral of |uL + (uR - uL) t|^p over t in [0, 1] (unit cell,
/// physical cells multiply by h). Stable for uR ~ uL.
double lp_cell_integral(double uL, double uR, double p);

/// d/duL and d/duR of lp_cell_integral.
void lp_cell_gradient(double uL, double uR, double p, double& dL, double& dR);

}  // namespace fraclab
