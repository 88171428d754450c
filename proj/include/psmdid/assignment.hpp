#pragma once

#include <cstddef>
#include <vector>

namespace psmdid {

// Dense cost matrix, row-major.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> cost;

    double at(std::size_t r, std::size_t c) const { return cost[r * cols + c]; }
};

// Minimum-cost injective assignment of every row to a distinct column
// (rows <= cols), via shortest augmenting paths with dual potentials.
// Returns the chosen column per row.
std::vector<std::size_t> solve_assignment(const CostMatrix& m);

double assignment_cost(const CostMatrix& m, const std::vector<std::size_t>& columns);

// Among assignments within relative_tolerance of the optimum, the
// lexicographically smallest column sequence. Absolute-difference costs on a
// line tie often, and this keeps the choice independent of rounding noise.
std::vector<std::size_t> solve_assignment_canonical(const CostMatrix& m, double relative_tolerance = 1e-10);

}  // namespace psmdid
