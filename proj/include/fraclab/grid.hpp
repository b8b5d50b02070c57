#pragma once

#include <vector>

namespace fraclab {

/// Uniform partition of the interval (a, b) into n_cells cells.
struct Grid1D {
    double a = 0.0;
    double b = 1.0;
    int n_cells = 0;
    double h = 0.0;
    std::vector<double> nodes;  // n_cells + 1 entries, nodes[0] = a, nodes[n_cells] = b

    double cell_midpoint(int i) const { return a + (i + 0.5) * h; }
    bool same_as(const Grid1D& o) const {
        return a == o.a && b == o.b && n_cells == o.n_cells;
    }
};

/// Throws std::invalid_argument for non-finite endpoints, b <= a or n_cells < 2.
Grid1D make_grid(double a, double b, int n_cells);

}  // namespace fraclab
