#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "structboost/lp.hpp"
#include "structboost/parallel.hpp"
#include "structboost/task.hpp"
#include "structboost/types.hpp"

namespace structboost {

// ---------------------------------------------------------------------------
// Working set of aggregated cutting-plane constraints. Each entry is an
// indicator vector c over units plus one violating label per unit; the raw
// per-column sums  sum_u c_u * delta_psi(col, u, y'_u)  and the raw loss sum
// are cached and extended whenever new columns arrive.
// ---------------------------------------------------------------------------

struct WorkingSetEntry {
    std::vector<std::uint8_t> c;
    std::vector<StructuredLabel> ylist;
    std::vector<double> col_sums;  // unscaled, one per column
    double loss_sum = 0.0;         // unscaled
    int zero_dual_streak = 0;
};

class WorkingSet {
public:
    bool contains(const std::vector<std::uint8_t>& c,
                  const std::vector<StructuredLabel>& ylist) const {
        for (const auto& e : entries_)
            if (e.c == c && e.ylist == ylist) return true;
        return false;
    }

    void add(const Task& task, std::span<const WeakColumn> columns,
             std::vector<std::uint8_t> c, std::vector<StructuredLabel> ylist) {
        WorkingSetEntry e;
        e.c = std::move(c);
        e.ylist = std::move(ylist);
        e.col_sums.assign(columns.size(), 0.0);
        for (int u = 0; u < task.unit_count(); ++u) {
            if (!e.c[u]) continue;
            e.loss_sum += task.loss(u, e.ylist[u]);
            for (std::size_t j = 0; j < columns.size(); ++j)
                e.col_sums[j] += task.delta_psi(columns[j], u, e.ylist[u]);
        }
        entries_.push_back(std::move(e));
    }

    // extend cached column sums for columns appended since the last call
    void extend_columns(const Task& task, std::span<const WeakColumn> columns) {
        for (auto& e : entries_) {
            for (std::size_t j = e.col_sums.size(); j < columns.size(); ++j) {
                double s = 0.0;
                for (int u = 0; u < task.unit_count(); ++u)
                    if (e.c[u]) s += task.delta_psi(columns[j], u, e.ylist[u]);
                e.col_sums.push_back(s);
            }
        }
    }

    void evict_stale(int streak_limit) {
        std::erase_if(entries_, [&](const WorkingSetEntry& e) {
            return e.zero_dual_streak >= streak_limit;
        });
    }

    std::vector<WorkingSetEntry>& entries() { return entries_; }
    const std::vector<WorkingSetEntry>& entries() const { return entries_; }
    int size() const { return static_cast<int>(entries_.size()); }
    bool empty() const { return entries_.empty(); }

private:
    std::vector<WorkingSetEntry> entries_;
};

struct RestrictedSolution {
    std::vector<double> w;
    double xi = 0.0;
    std::vector<double> lambdas;  // one per working-set entry
    double objective = 0.0;
};

// the restricted master LP over the working set, variables [w, xi]:
//   min 1'w + C xi  s.t. per entry  (1/units) w'col_sums >= loss_sum/units - xi
inline lp::LinearProgram build_restricted_lp(const Task& task, int num_columns,
                                             const WorkingSet& ws, double C) {
    const double inv_units = 1.0 / task.unit_count();
    lp::LinearProgram prog;
    prog.objective.assign(num_columns + 1, 1.0);
    prog.objective[num_columns] = C;
    for (const auto& e : ws.entries()) {
        std::vector<double> row(num_columns + 1, 0.0);
        for (int j = 0; j < num_columns; ++j) row[j] = e.col_sums[j] * inv_units;
        row[num_columns] = 1.0;
        prog.add_row(std::move(row), e.loss_sum * inv_units);
    }
    return prog;
}

inline RestrictedSolution solve_restricted(const Task& task, std::span<const WeakColumn> columns,
                                           const WorkingSet& ws, double C) {
    const int n = static_cast<int>(columns.size());
    RestrictedSolution out;
    out.w.assign(n, 0.0);
    if (ws.empty()) return out;

    auto sol = lp::solve(build_restricted_lp(task, n, ws, C));
    if (sol.status != lp::LpStatus::optimal)
        throw SolverFailure("restricted master did not solve to optimality");
    for (int j = 0; j < n; ++j) out.w[j] = sol.primal[j];
    out.xi = sol.primal[n];
    out.lambdas = sol.duals;
    out.objective = sol.objective_value;
    return out;
}

struct ViolatedConstraint {
    std::vector<std::uint8_t> c;
    std::vector<StructuredLabel> ylist;
    double scaled_violation = 0.0;  // (1/units) sum_u c_u (loss_u - w'delta_psi_u)
};

// Per-unit loss-augmented inference; c_u flags units whose constraint term
// is strictly positive. The per-unit searches are independent, so the
// parallel loop reproduces sequential results exactly.
inline ViolatedConstraint find_violated(const Task& task, std::span<const WeakColumn> columns,
                                        std::span<const double> w) {
    const int units = task.unit_count();
    ViolatedConstraint out;
    out.c.assign(units, 0);
    out.ylist.assign(units, StructuredLabel{ClassLabel{0}});
    std::vector<double> gaps(units, 0.0);
    parallel_for(units, [&](int u) {
        LossAugResult r = task.most_violated(columns, w, u);
        out.ylist[u] = std::move(r.label);
        gaps[u] = r.gap;
        out.c[u] = r.gap > 0.0 ? 1 : 0;
    });
    double total = 0.0;
    for (int u = 0; u < units; ++u)
        if (out.c[u]) total += gaps[u];
    out.scaled_violation = total / units;
    return out;
}

// mu_(u,y) = (1/units) * sum over entries with ylist[u] = y of lambda * c_u.
// The 1/units factor keeps mu feasible for the per-example dual box C/units
// and the unit edge threshold of the stopping rule.
inline DualWeights recover_mu(const WorkingSet& ws, std::span<const double> lambdas, int units) {
    DualWeights mu;
    const double inv_units = 1.0 / units;
    const auto& entries = ws.entries();
    for (std::size_t e = 0; e < entries.size(); ++e) {
        if (lambdas[e] <= 0.0) continue;
        for (int u = 0; u < units; ++u)
            if (entries[e].c[u]) mu.add(u, entries[e].ylist[u], lambdas[e] * inv_units);
    }
    return mu;
}

struct CuttingPlaneResult {
    std::vector<double> w;
    double xi = 0.0;
    DualWeights mu;
    double objective = 0.0;
    double lambda_sum = 0.0;
    int rounds = 0;
    double final_gap = 0.0;  // last scaled violation minus xi
};

// Alternates restricted solves with loss-augmented separation until the
// newly found constraint is violated by at most eps_cp. The working set is
// seeded deterministically when empty and persists across calls; entries
// with a zero dual for `evict_after` consecutive solves are dropped.
inline CuttingPlaneResult cutting_plane(const Task& task, std::span<const WeakColumn> columns,
                                        double C, double eps_cp, WorkingSet& ws,
                                        int max_rounds = 1000, int evict_after = 10,
                                        std::ostream* log = nullptr) {
    if (eps_cp <= 0.0) throw InvalidInputError("cutting_plane: eps_cp must be positive");
    const int units = task.unit_count();
    ws.extend_columns(task, columns);
    if (ws.empty()) {
        std::vector<std::uint8_t> c(units, 1);
        std::vector<StructuredLabel> ylist;
        ylist.reserve(units);
        for (int u = 0; u < units; ++u) ylist.push_back(task.initial_violation(u));
        ws.add(task, columns, std::move(c), std::move(ylist));
    }

    CuttingPlaneResult out;
    RestrictedSolution sol;
    for (int round = 1; round <= max_rounds; ++round) {
        ws.evict_stale(evict_after);
        sol = solve_restricted(task, columns, ws, C);
        for (std::size_t e = 0; e < ws.entries().size(); ++e) {
            auto& entry = ws.entries()[e];
            entry.zero_dual_streak = sol.lambdas[e] > 1e-12 ? 0 : entry.zero_dual_streak + 1;
        }
        ViolatedConstraint vio = find_violated(task, columns, sol.w);
        out.rounds = round;
        out.final_gap = vio.scaled_violation - sol.xi;
        if (log)
            *log << round << ',' << sol.objective << ',' << out.final_gap << ',' << ws.size()
                 << '\n';
        if (vio.scaled_violation <= sol.xi + eps_cp) break;
        if (ws.contains(vio.c, vio.ylist)) break;  // constraint already present: LP-level stall
        ws.add(task, columns, std::move(vio.c), std::move(vio.ylist));
        if (round == max_rounds)
            throw ConvergenceError("cutting_plane: round limit reached", out.final_gap);
    }

    out.w = sol.w;
    out.xi = sol.xi;
    out.objective = sol.objective;
    for (double l : sol.lambdas) out.lambda_sum += l;
    out.mu = recover_mu(ws, sol.lambdas, units);
    return out;
}

}  // namespace structboost
