#include "fraclab/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace fraclab {

Grid1D make_grid(double a, double b, int n_cells) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw std::invalid_argument("make_grid: endpoints must be finite");
    }
    if (!(b > a)) {
        throw std::invalid_argument("make_grid: b must exceed a");
    }
    if (n_cells < 2) {
        throw std::invalid_argument("make_grid: n_cells must be >= 2");
    }
    Grid1D g;
    g.a = a;
    g.b = b;
    g.n_cells = n_cells;
    g.h = (b - a) / n_cells;
    g.nodes.resize(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) g.nodes[i] = a + i * g.h;
    g.nodes[n_cells] = b;  // exact right endpoint
    return g;
}

}  // namespace fraclab
