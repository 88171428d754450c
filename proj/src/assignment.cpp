#include "psmdid/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace psmdid {

std::vector<std::size_t> solve_assignment(const CostMatrix& m) {
    if (m.rows > m.cols) throw std::invalid_argument("solve_assignment: more rows than columns");
    if (m.cost.size() != m.rows * m.cols) throw std::invalid_argument("solve_assignment: cost size mismatch");
    for (double c : m.cost)
        if (!std::isfinite(c)) throw std::invalid_argument("solve_assignment: non-finite cost");
    if (m.rows == 0) return {};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    const std::size_t n = m.rows;
    const std::size_t k = m.cols;
    // 1-based arrays; column 0 is the virtual source
    std::vector<double> u(n + 1, 0.0), v(k + 1, 0.0);
    std::vector<std::size_t> owner(k + 1, 0), way(k + 1, 0);

    for (std::size_t row = 1; row <= n; ++row) {
        owner[0] = row;
        std::size_t col0 = 0;
        std::vector<double> min_slack(k + 1, kInf);
        std::vector<bool> used(k + 1, false);
        do {
            used[col0] = true;
            const std::size_t r0 = owner[col0];
            double delta = kInf;
            std::size_t col1 = 0;
            for (std::size_t j = 1; j <= k; ++j) {
                if (used[j]) continue;
                const double cur = m.at(r0 - 1, j - 1) - u[r0] - v[j];
                if (cur < min_slack[j]) {
                    min_slack[j] = cur;
                    way[j] = col0;
                }
                if (min_slack[j] < delta) {
                    delta = min_slack[j];
                    col1 = j;
                }
            }
            for (std::size_t j = 0; j <= k; ++j) {
                if (used[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            col0 = col1;
        } while (owner[col0] != 0);
        // augment along the alternating path
        do {
            const std::size_t col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    std::vector<std::size_t> result(n);
    for (std::size_t j = 1; j <= k; ++j)
        if (owner[j] != 0) result[owner[j] - 1] = j - 1;
    return result;
}

double assignment_cost(const CostMatrix& m, const std::vector<std::size_t>& columns) {
    double total = 0.0;
    for (std::size_t r = 0; r < columns.size(); ++r) total += m.at(r, columns[r]);
    return total;
}

std::vector<std::size_t> solve_assignment_canonical(const CostMatrix& m, double relative_tolerance) {
    const auto first = solve_assignment(m);
    if (m.rows == 0) return first;
    const double best = assignment_cost(m, first);
    const double slack = relative_tolerance * std::max(1.0, std::fabs(best));

    std::vector<std::size_t> chosen;
    std::vector<bool> taken(m.cols, false);
    double fixed = 0.0;
    for (std::size_t row = 0; row < m.rows; ++row) {
        bool placed = false;
        for (std::size_t col = 0; col < m.cols && !placed; ++col) {
            if (taken[col]) continue;
            // optimal completion of the remaining rows without this column
            CostMatrix rest{m.rows - row - 1, 0, {}};
            std::vector<std::size_t> free_cols;
            for (std::size_t j = 0; j < m.cols; ++j)
                if (!taken[j] && j != col) free_cols.push_back(j);
            rest.cols = free_cols.size();
            for (std::size_t r = row + 1; r < m.rows; ++r)
                for (std::size_t j : free_cols) rest.cost.push_back(m.at(r, j));
            const double completion = rest.rows ? assignment_cost(rest, solve_assignment(rest)) : 0.0;
            if (fixed + m.at(row, col) + completion <= best + slack) {
                chosen.push_back(col);
                taken[col] = true;
                fixed += m.at(row, col);
                placed = true;
            }
        }
        if (!placed) return first;  // unreachable unless the costs are pathological
    }
    return chosen;
}

}  // namespace psmdid
