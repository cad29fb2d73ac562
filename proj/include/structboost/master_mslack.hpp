#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "structboost/lp.hpp"
#include "structboost/task.hpp"
#include "structboost/types.hpp"

namespace structboost {

struct MslackOptions {
    int primal_row_cap = 500;       // larger programs route through the dual
    long constraint_cap = 1000000;  // hard capacity before giving up
};

struct MslackResult {
    std::vector<double> w;
    std::vector<double> xis;  // one slack per unit
    DualWeights mu;
    double objective = 0.0;
};

struct MslackPrimal {
    lp::LinearProgram prog;              // vars [w_1..w_n, xi_1..xi_units]
    std::vector<DualKey> row_keys;       // (unit, label) per constraint row
};

// Full margin program over the enumerated label set:
//   min 1'w + (C/units) 1'xi
//   s.t. w'delta_psi_u(y) + xi_u >= loss(u, y)  for every u, y != truth(u).
// Rows for y = truth are omitted (they read 0 >= -xi_u, vacuous).
inline MslackPrimal build_primal_lp(const Task& task, std::span<const WeakColumn> columns,
                                    double C, long constraint_cap = 1000000) {
    if (!task.enumerable())
        throw CapacityError("m-slack: label space is not enumerable, use the 1-slack solver");
    const int units = task.unit_count();
    const int n = static_cast<int>(columns.size());

    long rows = 0;
    for (int u = 0; u < units; ++u)
        rows += static_cast<long>(task.labels(u).size()) - 1;
    if (rows > constraint_cap)
        throw CapacityError("m-slack: constraint count exceeds capacity, use the 1-slack solver");

    MslackPrimal out;
    out.prog.objective.assign(n + units, 1.0);
    for (int u = 0; u < units; ++u) out.prog.objective[n + u] = C / units;
    for (int u = 0; u < units; ++u) {
        for (const StructuredLabel& y : task.labels(u)) {
            if (y == task.truth(u)) continue;
            std::vector<double> row(n + units, 0.0);
            for (int j = 0; j < n; ++j) row[j] = task.delta_psi(columns[j], u, y);
            row[n + u] = 1.0;
            out.prog.add_row(std::move(row), task.loss(u, y));
            out.row_keys.emplace_back(u, y);
        }
    }
    return out;
}

namespace detail {

inline MslackResult solve_mslack_primal(const Task& task, std::span<const WeakColumn> columns,
                                        double C, long constraint_cap) {
    MslackPrimal built = build_primal_lp(task, columns, C, constraint_cap);
    const int n = static_cast<int>(columns.size());
    const int units = task.unit_count();
    auto sol = lp::solve(built.prog);
    if (sol.status != lp::LpStatus::optimal)
        throw SolverFailure("m-slack primal did not solve to optimality");
    MslackResult out;
    out.w.assign(sol.primal.begin(), sol.primal.begin() + n);
    out.xis.assign(sol.primal.begin() + n, sol.primal.end());
    for (std::size_t r = 0; r < built.row_keys.size(); ++r)
        if (sol.duals[r] > 1e-12)
            out.mu.add(built.row_keys[r].first, built.row_keys[r].second, sol.duals[r]);
    out.objective = sol.objective_value;
    return out;
}

// Large programs solve the dual instead: variables mu_(u,y), column rows
// sum mu delta_psi_j <= 1, per-unit box sum_y mu_(u,y) <= C/units. Units
// with a single non-truth label get the box as a simple upper bound. The
// primal (w, xi) comes back out of the dual LP's row duals / reduced costs.
inline MslackResult solve_mslack_dual(const Task& task, std::span<const WeakColumn> columns,
                                      double C, long constraint_cap) {
    if (!task.enumerable())
        throw CapacityError("m-slack: label space is not enumerable, use the 1-slack solver");
    const int units = task.unit_count();
    const int n = static_cast<int>(columns.size());
    const double box = C / units;

    std::vector<DualKey> keys;
    std::vector<int> unit_of;
    std::vector<double> losses;
    bool all_singleton = true;
    for (int u = 0; u < units; ++u) {
        int count = 0;
        for (const StructuredLabel& y : task.labels(u)) {
            if (y == task.truth(u)) continue;
            keys.emplace_back(u, y);
            unit_of.push_back(u);
            losses.push_back(task.loss(u, y));
            ++count;
        }
        if (count != 1) all_singleton = false;
    }
    const int vars = static_cast<int>(keys.size());
    if (vars > constraint_cap)
        throw CapacityError("m-slack: constraint count exceeds capacity, use the 1-slack solver");

    lp::LinearProgram prog;
    prog.objective.resize(vars);
    for (int r = 0; r < vars; ++r) prog.objective[r] = -losses[r];
    // column rows: -sum_r delta_psi_rj mu_r >= -1
    for (int j = 0; j < n; ++j) {
        std::vector<double> row(vars, 0.0);
        for (int r = 0; r < vars; ++r)
            row[r] = -task.delta_psi(columns[j], unit_of[r], keys[r].second);
        prog.add_row(std::move(row), -1.0);
    }
    if (all_singleton) {
        prog.upper.assign(vars, box);
    } else {
        for (int u = 0; u < units; ++u) {
            std::vector<double> row(vars, 0.0);
            for (int r = 0; r < vars; ++r)
                if (unit_of[r] == u) row[r] = -1.0;
            prog.add_row(std::move(row), -box);
        }
    }

    auto sol = lp::solve(prog);
    if (sol.status != lp::LpStatus::optimal)
        throw SolverFailure("m-slack dual did not solve to optimality");

    MslackResult out;
    out.w.assign(n, 0.0);
    for (int j = 0; j < n; ++j) out.w[j] = sol.duals[j];
    out.xis.assign(units, 0.0);
    if (all_singleton) {
        for (int r = 0; r < vars; ++r)
            out.xis[unit_of[r]] = std::max(0.0, -sol.reduced_costs[r]);
    } else {
        for (int u = 0; u < units; ++u) out.xis[u] = sol.duals[n + u];
    }
    for (int r = 0; r < vars; ++r)
        if (sol.primal[r] > 1e-12) out.mu.add(keys[r].first, keys[r].second, sol.primal[r]);

    out.objective = 0.0;
    for (double wj : out.w) out.objective += wj;
    for (double xi : out.xis) out.objective += (C / units) * xi;
    // strong duality ties the reconstructed primal to the dual optimum
    if (std::abs(out.objective + sol.objective_value) >
        1e-6 * (1.0 + std::abs(out.objective)))
        throw SolverFailure("m-slack: primal recovered from dual violates strong duality");
    return out;
}

}  // namespace detail

inline MslackResult solve_mslack(const Task& task, std::span<const WeakColumn> columns, double C,
                                 const MslackOptions& opts = {}) {
    if (!task.enumerable())
        throw CapacityError("m-slack: label space is not enumerable, use the 1-slack solver");
    long rows = 0;
    for (int u = 0; u < task.unit_count(); ++u)
        rows += static_cast<long>(task.labels(u).size()) - 1;
    if (rows > opts.constraint_cap)
        throw CapacityError("m-slack: constraint count exceeds capacity, use the 1-slack solver");
    if (rows <= opts.primal_row_cap)
        return detail::solve_mslack_primal(task, columns, C, opts.constraint_cap);
    return detail::solve_mslack_dual(task, columns, C, opts.constraint_cap);
}

}  // namespace structboost
