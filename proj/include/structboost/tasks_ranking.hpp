#pragma once

#include <algorithm>
#include <vector>

#include "structboost/task.hpp"
#include "structboost/types.hpp"
#include "structboost/weak_learners.hpp"

namespace structboost {

struct PairSet {
    std::vector<std::pair<int, int>> pairs;  // (i, j) with y_i ranked above y_j

    int size() const { return static_cast<int>(pairs.size()); }
};

// All ordered pairs with strictly greater ordinal label, i ascending then j.
inline PairSet build_pairs(const std::vector<double>& ordinal_labels) {
    const int m = static_cast<int>(ordinal_labels.size());
    PairSet out;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (ordinal_labels[i] > ordinal_labels[j]) out.pairs.emplace_back(i, j);
    if (out.pairs.empty())
        throw InvalidInputError("build_pairs: need at least two distinct label values");
    return out;
}

// Fraction of positive-negative pairs ranked correctly, ties count half.
inline double auc(const std::vector<double>& scores, const std::vector<int>& binary_labels) {
    double correct = 0.0;
    long total = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (binary_labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (binary_labels[j] != 0) continue;
            ++total;
            if (scores[i] > scores[j])
                correct += 1.0;
            else if (scores[i] == scores[j])
                correct += 0.5;
        }
    }
    if (total == 0) throw InvalidInputError("auc: both classes must be present");
    return correct / static_cast<double>(total);
}

// per-column phi(x_i) - phi(x_j) for one pair
inline std::vector<double> ranking_delta_psi(std::span<const WeakColumn> columns,
                                             std::span<const double> xi,
                                             std::span<const double> xj) {
    std::vector<double> out(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c)
        out[c] = eval_weak(columns[c].learner, xi) - eval_weak(columns[c].learner, xj);
    return out;
}

// ---------------------------------------------------------------------------
// Ordinal regression / AUC task. Units are the pairs of the order set; each
// unit has a two-element label space: class 1 = correctly ordered (truth),
// class 2 = inverted, loss 1, delta_psi = phi(x_i) - phi(x_j).
// ---------------------------------------------------------------------------

class RankingTask : public Task {
public:
    RankingTask(const Dataset& data, PairSet pairs) : data_(data), pairs_(std::move(pairs)) {
        desc_.kind = TaskKind::ranking;
        desc_.num_classes = 2;
        desc_.feature_dim = data.dim();
        for (auto [i, j] : pairs_.pairs)
            if (i < 0 || j < 0 || i >= data_.size() || j >= data_.size() || i == j)
                throw InvalidInputError("ranking pair references invalid samples");
        truth_ = ClassLabel{1};
    }

    static RankingTask from_labels(const Dataset& data) {
        std::vector<double> ord(data.size());
        for (int i = 0; i < data.size(); ++i) ord[i] = std::get<OrdinalRank>(data.labels[i]).value;
        return RankingTask(data, build_pairs(ord));
    }

    const TaskDescriptor& descriptor() const override { return desc_; }
    int unit_count() const override { return pairs_.size(); }
    const StructuredLabel& truth(int) const override { return truth_; }

    double loss(int, const StructuredLabel& y) const override {
        return class_of(y) == 1 ? 0.0 : 1.0;  // fixed margin target 1 per pair
    }

    double psi(const WeakColumn& col, int u, const StructuredLabel& y) const override {
        auto [i, j] = pairs_.pairs[u];
        double diff = eval_weak(col.learner, data_.features.row(i)) -
                      eval_weak(col.learner, data_.features.row(j));
        return (class_of(y) == 1 ? 0.5 : -0.5) * diff;
    }

    bool enumerable() const override { return true; }

    std::vector<StructuredLabel> labels(int) const override {
        return {StructuredLabel{ClassLabel{1}}, StructuredLabel{ClassLabel{2}}};
    }

    StructuredLabel initial_violation(int) const override { return ClassLabel{2}; }

    // e_i = sum of mu over pairs won by i minus sum over pairs lost by i;
    // stump training then maximizes sum_i phi(x_i) e_i.
    std::vector<double> subproblem_reduce(const DualWeights& mu) const {
        std::vector<double> e(data_.size(), 0.0);
        for (const auto& [key, value] : mu.entries) {
            const auto& [unit, label] = key;
            if (class_of(label) == 1) continue;
            auto [i, j] = pairs_.pairs[unit];
            e[i] += value;
            e[j] -= value;
        }
        return e;
    }

    GeneratedColumns generate_columns(const DualWeights& mu, const WeakOptions& opts) const override {
        std::vector<double> e = subproblem_reduce(mu);
        bool nonzero = false;
        for (double v : e)
            if (v != 0.0) { nonzero = true; break; }
        GeneratedColumns out;
        if (!nonzero) return out;
        if (opts.kind == WeakKind::perceptron) {
            auto stump = train_stump(data_.features, e, OutputRange::pm_one);
            auto fit = train_perceptron(data_.features, e, stump.stump, opts.sharpness,
                                        opts.perceptron_steps);
            out.columns.push_back(WeakColumn{fit.perceptron, std::nullopt, std::nullopt});
            out.best_edge = fit.edge;
        } else {
            auto fit = train_stump(data_.features, e, OutputRange::pm_one);
            out.columns.push_back(WeakColumn{fit.stump, std::nullopt, std::nullopt});
            out.best_edge = fit.edge;
        }
        return out;
    }

    const PairSet& pairs() const { return pairs_; }
    const Dataset& data() const { return data_; }

private:
    const Dataset& data_;
    PairSet pairs_;
    TaskDescriptor desc_;
    StructuredLabel truth_;
};

// Indicator of unmet pair margins: c_(i,j) = 1 iff 1 - w'[phi(x_i)-phi(x_j)] > 0.
// The ranking task has no label search; the pair set is the label space.
inline std::vector<std::uint8_t> most_violated_pairs(std::span<const double> w,
                                                     std::span<const WeakColumn> columns,
                                                     const RankingTask& task) {
    std::vector<std::uint8_t> c(task.unit_count(), 0);
    for (int u = 0; u < task.unit_count(); ++u) {
        double margin = 0.0;
        StructuredLabel flipped = ClassLabel{2};
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (w[j] != 0.0) margin += w[j] * task.delta_psi(columns[j], u, flipped);
        c[u] = (1.0 - margin) > 0.0 ? 1 : 0;
    }
    return c;
}

}  // namespace structboost
