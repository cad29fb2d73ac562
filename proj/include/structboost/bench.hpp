#pragma once

#include <chrono>
#include <ostream>
#include <string>
#include <vector>

#include "structboost/column_generation.hpp"
#include "structboost/metrics.hpp"
#include "structboost/tasks_ranking.hpp"

namespace structboost {

struct BenchRow {
    std::string method;
    double c = 0.0;
    double seconds = 0.0;
    double train_auc = 0.0;
    double test_auc = 0.0;
    bool failed = false;  // capacity / memory style failure, reported as "-"
};

struct BenchReport {
    std::vector<BenchRow> rows;
    TrainTrace trace_one_slack;  // per-iteration objective and time, last C
    TrainTrace trace_m_slack;

    void write_csv(std::ostream& os) const {
        os << "method,c,seconds,train_auc,test_auc\n";
        for (const auto& r : rows) {
            os << r.method << ',' << format_double(r.c) << ',';
            if (r.failed)
                os << "-,-,-\n";
            else
                os << format_double(r.seconds) << ',' << format_double(r.train_auc) << ','
                   << format_double(r.test_auc) << '\n';
        }
    }
};

inline void write_trace_csv(const TrainTrace& trace, std::ostream& os) {
    os << "iteration,objective,cumulative_seconds\n";
    for (const auto& r : trace.rows)
        os << r.iteration << ',' << format_double(r.objective) << ','
           << format_double(r.cumulative_seconds) << '\n';
}

// Runs the ranking trainer with both master solvers over a C grid on the
// same column-generation pathway, recording wall time and train/test AUC.
inline BenchReport bench_auc(const Dataset& train_data, const Dataset& test_data,
                             const std::vector<double>& c_grid, TrainParams base,
                             bool track_objective = true) {
    using clock = std::chrono::steady_clock;
    RankingTask task = RankingTask::from_labels(train_data);
    BenchReport report;
    for (double c : c_grid) {
        for (SolverKind solver : {SolverKind::one_slack, SolverKind::m_slack}) {
            TrainParams params = base;
            params.C = c;
            params.solver = solver;
            BenchRow row;
            row.method = solver == SolverKind::one_slack ? "one-slack" : "m-slack";
            row.c = c;
            TrainHooks hooks;
            hooks.track_objective = track_objective;
            hooks.track_dual_checks = false;  // identical treatment for fair timing
            try {
                auto t0 = clock::now();
                auto res = train(task, params, hooks);
                row.seconds = std::chrono::duration<double>(clock::now() - t0).count();
                row.train_auc = eval_ranking(res.model, train_data).get("auc");
                row.test_auc = eval_ranking(res.model, test_data).get("auc");
                if (solver == SolverKind::one_slack)
                    report.trace_one_slack = std::move(res.trace);
                else
                    report.trace_m_slack = std::move(res.trace);
            } catch (const CapacityError&) {
                row.failed = true;
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

}  // namespace structboost
