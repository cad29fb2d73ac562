#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include "structboost/master_1slack.hpp"
#include "structboost/master_mslack.hpp"
#include "structboost/task.hpp"
#include "structboost/types.hpp"

namespace structboost {

// edge of a candidate column under the current dual weights:
// sum_(u,y) mu_(u,y) [psi(x_u, y_u) - psi(x_u, y)]
inline double weak_edge(const Task& task, const DualWeights& mu, const WeakColumn& column) {
    double e = 0.0;
    for (const auto& [key, value] : mu.entries)
        e += value * task.delta_psi(column, key.first, key.second);
    return e;
}

// primal objective at the current weights:
// sum_j w_j + (C/units) sum_u max_y { loss - w'delta_psi }   (>= 0 at y_u)
inline double objective(const Task& task, std::span<const WeakColumn> columns,
                        std::span<const double> w, double C) {
    double f = 0.0;
    for (double wj : w) f += wj;
    double slack = 0.0;
    for (int u = 0; u < task.unit_count(); ++u)
        slack += std::max(0.0, task.most_violated(columns, w, u).gap);
    return f + (C / task.unit_count()) * slack;
}

// Lower bound on the objective decrease from appending `fresh` with weight
// alpha to the previous model; diagnostic companion of the progress
// guarantee. y*_u(alpha) is loss-augmented inference over the extended
// model.
inline double decrease_lower_bound(const Task& task, std::span<const WeakColumn> prev_columns,
                                   std::span<const double> prev_w, const WeakColumn& fresh,
                                   double alpha, double C) {
    if (alpha < 0.0) throw InvalidInputError("decrease_lower_bound: alpha must be >= 0");
    if (alpha == 0.0) return 0.0;
    std::vector<WeakColumn> ext(prev_columns.begin(), prev_columns.end());
    ext.push_back(fresh);
    std::vector<double> wext(prev_w.begin(), prev_w.end());
    wext.push_back(alpha);
    double acc = 0.0;
    for (int u = 0; u < task.unit_count(); ++u) {
        LossAugResult r = task.most_violated(ext, wext, u);
        acc += task.psi(fresh, u, task.truth(u)) - task.psi(fresh, u, r.label);
    }
    return -alpha + alpha * C / task.unit_count() * acc;
}

struct TraceRow {
    int iteration = 0;
    double objective = 0.0;
    double edge = 0.0;  // edge of the selected column
    double master_seconds = 0.0;
    double cumulative_seconds = 0.0;
    // diagnostics
    int working_set_size = 0;
    int cp_rounds = 0;
    double mu_box_excess = 0.0;        // max_u sum_y mu - C/units
    double lambda_sum = 0.0;           // 1-slack only
    double column_edge_excess = 0.0;   // max_j edge_j - 1 over model columns
    double prop2_bound = 0.0;          // best tested lower bound on the decrease
    double actual_decrease = 0.0;
};

struct TrainTrace {
    std::vector<TraceRow> rows;

    void write_csv(std::ostream& os) const {
        os << "iteration,objective,edge,master_seconds,cumulative_seconds\n";
        for (const auto& r : rows)
            os << r.iteration << ',' << r.objective << ',' << r.edge << ',' << r.master_seconds
               << ',' << r.cumulative_seconds << '\n';
    }
};

struct TrainHooks {
    std::ostream* cp_log = nullptr;      // cutting-plane round trace (CSV)
    bool track_objective = true;         // per-iteration primal objective
    bool track_dual_checks = true;       // mu box / column edge diagnostics
    std::vector<double> prop2_alphas;    // alpha grid for the decrease bound
};

struct TrainResult {
    StrongModel model;
    TrainTrace trace;
    DualWeights final_mu;
    WorkingSet working_set;        // final 1-slack constraint cache
    double final_best_edge = 0.0;  // edge of the last generated candidate
};

namespace detail {

inline bool column_exists(const std::vector<WeakColumn>& haystack, const WeakColumn& needle) {
    return std::find(haystack.begin(), haystack.end(), needle) != haystack.end();
}

}  // namespace detail

// Column generation: initialize mu on one violating label per unit at the
// box value, then alternate weak-learner generation with master re-solves
// until the best edge drops to 1 - eps_cg, the pool degenerates, or the
// iteration cap is reached.
inline TrainResult train(const Task& task, const TrainParams& params, TrainHooks hooks = {}) {
    params.validate();
    if (task.unit_count() == 0) throw InvalidInputError("train: empty dataset");
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const double C = params.C;
    const int units = task.unit_count();

    TrainResult out;
    out.model.task = task.descriptor();
    out.model.metadata.params = params;

    if (hooks.cp_log) *hooks.cp_log << "round,objective,gap,working_set\n";

    // a loss that is zero everywhere certifies the empty model
    if (task.enumerable()) {
        double max_loss = 0.0;
        for (int u = 0; u < units; ++u)
            for (const StructuredLabel& y : task.labels(u))
                max_loss = std::max(max_loss, task.loss(u, y));
        if (max_loss <= 0.0) {
            out.model.metadata.stopped_by_edge = true;
            return out;
        }
    }

    DualWeights mu;
    for (int u = 0; u < units; ++u) mu.add(u, task.initial_mu_label(u), C / units);

    WorkingSet ws;
    WeakOptions weak_opts;
    weak_opts.kind = params.weak;

    double prev_objective = 0.0;
    if (hooks.track_objective)
        prev_objective = objective(task, out.model.columns, out.model.weights, C);
    double prev_cg_gap = -1.0;
    double cumulative = 0.0;

    for (int iter = 1; iter <= params.max_iters; ++iter) {
        GeneratedColumns gen = task.generate_columns(mu, weak_opts);
        out.final_best_edge = gen.best_edge;
        if (gen.columns.empty()) break;  // degenerate pool: clean early stop
        if (gen.best_edge <= 1.0 - params.eps_cg) {
            out.model.metadata.stopped_by_edge = true;
            break;
        }
        std::vector<WeakColumn> fresh;
        for (const auto& col : gen.columns)
            if (!detail::column_exists(out.model.columns, col)) fresh.push_back(col);
        if (fresh.empty()) break;  // the master cannot improve on duplicates

        // the selected learner for diagnostics: largest edge among the batch
        WeakColumn selected = fresh.front();
        double selected_edge = weak_edge(task, mu, selected);
        for (std::size_t f = 1; f < fresh.size(); ++f) {
            double e = weak_edge(task, mu, fresh[f]);
            if (e > selected_edge) {
                selected_edge = e;
                selected = fresh[f];
            }
        }
        std::vector<WeakColumn> prev_columns = out.model.columns;
        std::vector<double> prev_w = out.model.weights;
        for (auto& col : fresh) out.model.columns.push_back(std::move(col));

        TraceRow row;
        row.iteration = iter;
        row.edge = gen.best_edge;

        const auto m0 = clock::now();
        if (params.solver == SolverKind::one_slack) {
            // adapt the inner tolerance to the precision the previous
            // master solve actually reached, never below the user floor
            double inner_eps = params.eps_cp;
            if (params.adaptive_eps_cp && prev_cg_gap >= 0.0)
                inner_eps = std::max(params.eps_cp, 0.5 * prev_cg_gap);
            CuttingPlaneResult cp =
                cutting_plane(task, out.model.columns, C, inner_eps, ws, params.cp_max_rounds,
                              params.evict_after, hooks.cp_log);
            out.model.weights = std::move(cp.w);
            mu = std::move(cp.mu);
            row.working_set_size = ws.size();
            row.cp_rounds = cp.rounds;
            row.lambda_sum = cp.lambda_sum;
            prev_cg_gap = std::max(0.0, cp.final_gap);
        } else {
            MslackOptions opts;
            opts.constraint_cap = params.mslack_constraint_cap;
            MslackResult ms = solve_mslack(task, out.model.columns, C, opts);
            out.model.weights = std::move(ms.w);
            mu = std::move(ms.mu);
        }
        row.master_seconds = std::chrono::duration<double>(clock::now() - m0).count();
        cumulative = std::chrono::duration<double>(clock::now() - t0).count();
        row.cumulative_seconds = cumulative;

        if (hooks.track_objective) {
            row.objective = objective(task, out.model.columns, out.model.weights, C);
            row.actual_decrease = prev_objective - row.objective;
            if (!hooks.prop2_alphas.empty()) {
                double best_bound = 0.0;
                for (double alpha : hooks.prop2_alphas)
                    best_bound = std::max(best_bound, decrease_lower_bound(task, prev_columns,
                                                                           prev_w, selected,
                                                                           alpha, C));
                row.prop2_bound = best_bound;
            }
            prev_objective = row.objective;
        }
        if (hooks.track_dual_checks) {
            double box = C / units;
            double excess = 0.0;
            for (int u = 0; u < units; ++u)
                excess = std::max(excess, mu.unit_total(u) - box);
            row.mu_box_excess = excess;
            double edge_excess = -std::numeric_limits<double>::infinity();
            for (const auto& col : out.model.columns)
                edge_excess = std::max(edge_excess, weak_edge(task, mu, col) - 1.0);
            row.column_edge_excess = edge_excess;
        }
        out.trace.rows.push_back(row);
        out.model.metadata.iterations_run = iter;
    }

    out.final_mu = mu;
    out.working_set = std::move(ws);
    return out;
}

}  // namespace structboost
