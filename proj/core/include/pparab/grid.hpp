#ifndef PPARAB_GRID_HPP
#define PPARAB_GRID_HPP

#include <functional>
#include <vector>

namespace pparab {

/// Uniform 1D grid with n_cells cells and n_cells+1 nodes.
struct Grid {
    double x_left;
    double x_right;
    int n_cells;
    double dx;

    int n_nodes() const { return n_cells + 1; }
    double node(int i) const { return x_left + i * dx; }
};

/// Throws std::invalid_argument unless x_left < x_right and n_cells >= 8.
Grid build_grid(double x_left, double x_right, int n_cells);

/// Time-stamped nodal values; values.size() == grid.n_nodes().
struct GridState {
    double t = 0.0;
    std::vector<double> values;
};

struct ErrorNorms {
    double max_norm;
    double l1_norm; ///< trapezoidal rule over the grid
};

/// Nodal max norm and trapezoidal L1 norm of u - exact.
ErrorNorms error_norms(const Grid& grid, const GridState& state,
                       const std::function<double(double)>& exact);

} // namespace pparab

#endif
