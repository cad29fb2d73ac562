#pragma once

#include <algorithm>
#include <memory>
#include <vector>

#include "structboost/task.hpp"
#include "structboost/types.hpp"
#include "structboost/weak_learners.hpp"

namespace structboost {

// ---------------------------------------------------------------------------
// Label codings and the tree loss.
// ---------------------------------------------------------------------------

// orthogonal indicator coding e_y
inline std::vector<double> gamma_flat(int y, int k) {
    if (y < 1 || y > k) throw InvalidInputError("gamma_flat: label out of range");
    std::vector<double> g(k, 0.0);
    g[y - 1] = 1.0;
    return g;
}

// ancestor-set coding: component z is 1 iff z is y or a predecessor of y
inline std::vector<double> gamma_tree(int y_node, const Taxonomy& tax) {
    if (y_node < 1 || y_node > tax.node_count)
        throw InvalidInputError("gamma_tree: node out of range");
    std::vector<double> g(tax.node_count, 0.0);
    for (int cur = y_node; cur != 0; cur = tax.parent[cur - 1]) g[cur - 1] = 1.0;
    return g;
}

// per-node height: leaves at 0, internal nodes one above their tallest child
inline std::vector<int> node_heights(const Taxonomy& tax) {
    std::vector<int> height(tax.node_count, 0);
    // children are strictly deeper, so a pass per level suffices
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 1; v <= tax.node_count; ++v) {
            int p = tax.parent[v - 1];
            if (p != 0 && height[p - 1] < height[v - 1] + 1) {
                height[p - 1] = height[v - 1] + 1;
                changed = true;
            }
        }
    }
    return height;
}

inline int lowest_common_ancestor(int a, int b, const Taxonomy& tax) {
    int x = a, y = b;
    while (tax.depth[x - 1] > tax.depth[y - 1]) x = tax.parent[x - 1];
    while (tax.depth[y - 1] > tax.depth[x - 1]) y = tax.parent[y - 1];
    while (x != y) {
        x = tax.parent[x - 1];
        y = tax.parent[y - 1];
    }
    return x;
}

// Height of the first common ancestor of two class nodes; 0 when identical.
inline double tree_loss(int y_node, int y2_node, const Taxonomy& tax) {
    if (y_node == y2_node) return 0.0;
    auto heights = node_heights(tax);
    return static_cast<double>(heights[lowest_common_ancestor(y_node, y2_node, tax) - 1]);
}

// phi(x) * Gamma(y)[slot] for a slotted column
inline double joint_map_value(const WeakColumn& col, std::span<const double> x, int y,
                              const Taxonomy* tax) {
    if (!col.class_slot) throw InvalidInputError("joint_map_value: column has no class slot");
    int slot = *col.class_slot;
    double indicator;
    if (tax) {
        // slot carries when it is y's node or one of its predecessors
        int node = y;
        indicator = 0.0;
        for (int cur = node; cur != 0; cur = tax->parent[cur - 1])
            if (cur == slot) {
                indicator = 1.0;
                break;
            }
    } else {
        indicator = slot == y ? 1.0 : 0.0;
    }
    if (indicator == 0.0) return 0.0;
    return eval_weak(col.learner, x);
}

// binary recovery: Psi(x, y) = y/2 * phi(x) with y in {-1,+1}
inline double binary_map_value(const WeakColumn& col, std::span<const double> x, int y_sign) {
    return 0.5 * y_sign * eval_weak(col.learner, x);
}

// class 1 plays +1, class 2 plays -1
inline int binary_sign(int class_label) { return class_label == 1 ? +1 : -1; }

// ---------------------------------------------------------------------------
// Flat multi-class / taxonomy task. The label coding Gamma and the loss
// matrix are precomputed; columns carry a class slot r and evaluate as
// phi(x) * Gamma(y)[r].
// ---------------------------------------------------------------------------

class MulticlassTask : public Task {
public:
    // loss_matrix[a-1][b-1] = loss of predicting b when truth is a; when
    // empty, 0/1 loss (flat) or the tree loss (taxonomy) is used.
    MulticlassTask(const Dataset& data, int num_classes, std::optional<Taxonomy> taxonomy,
                   std::vector<std::vector<double>> loss_matrix = {})
        : data_(data), k_(num_classes), loss_(std::move(loss_matrix)) {
        desc_.kind = taxonomy ? TaskKind::tree : TaskKind::multiclass;
        desc_.num_classes = k_;
        desc_.feature_dim = data.dim();
        desc_.taxonomy = std::move(taxonomy);
        if (desc_.taxonomy) {
            desc_.taxonomy->validate();
            if (desc_.taxonomy->num_classes() != k_)
                throw InvalidInputError("taxonomy class count mismatch");
        }
        slots_ = desc_.taxonomy ? desc_.taxonomy->node_count : k_;
        gamma_.resize(k_);
        for (int c = 1; c <= k_; ++c)
            gamma_[c - 1] = desc_.taxonomy
                                ? gamma_tree(desc_.taxonomy->class_nodes[c - 1], *desc_.taxonomy)
                                : gamma_flat(c, k_);
        if (loss_.empty()) {
            loss_.assign(k_, std::vector<double>(k_, 0.0));
            for (int a = 1; a <= k_; ++a)
                for (int b = 1; b <= k_; ++b) {
                    if (a == b) continue;
                    loss_[a - 1][b - 1] =
                        desc_.taxonomy ? tree_loss(desc_.taxonomy->class_nodes[a - 1],
                                                   desc_.taxonomy->class_nodes[b - 1],
                                                   *desc_.taxonomy)
                                       : 1.0;
                }
        }
        for (const auto& y : data_.labels) {
            int c = class_of(y);
            if (c < 1 || c > k_) throw InvalidInputError("class label out of range");
        }
    }

    const TaskDescriptor& descriptor() const override { return desc_; }
    int unit_count() const override { return data_.size(); }
    const StructuredLabel& truth(int u) const override { return data_.labels[u]; }

    double loss(int u, const StructuredLabel& y) const override {
        return loss_[class_of(truth(u)) - 1][class_of(y) - 1];
    }

    double psi(const WeakColumn& col, int u, const StructuredLabel& y) const override {
        if (!col.class_slot) throw InvalidInputError("multiclass column without class slot");
        double ind = gamma_[class_of(y) - 1][*col.class_slot - 1];
        if (ind == 0.0) return 0.0;
        return eval_weak(col.learner, data_.features.row(u));
    }

    bool enumerable() const override { return true; }

    std::vector<StructuredLabel> labels(int) const override {
        std::vector<StructuredLabel> out;
        out.reserve(k_);
        for (int c = 1; c <= k_; ++c) out.emplace_back(ClassLabel{c});
        return out;
    }

    StructuredLabel initial_violation(int u) const override {
        int t = class_of(truth(u));
        return ClassLabel{t == 1 ? std::min(2, k_) : 1};
    }

    // D[i][r] = sum_y mu_(i,y) (Gamma(y_i)[r] - Gamma(y)[r]); the best stump
    // per slot competes and the winner is broadcast over all slots.
    Matrix subproblem_reduce(const DualWeights& mu) const {
        Matrix d(data_.size(), slots_);
        for (const auto& [key, value] : mu.entries) {
            const auto& [unit, label] = key;
            const auto& gt = gamma_[class_of(truth(unit)) - 1];
            const auto& gy = gamma_[class_of(label) - 1];
            for (int r = 0; r < slots_; ++r) d(unit, r) += value * (gt[r] - gy[r]);
        }
        return d;
    }

    GeneratedColumns generate_columns(const DualWeights& mu, const WeakOptions& opts) const override {
        Matrix d = subproblem_reduce(mu);
        int best_slot = -1;
        double best_edge = 0.0;
        WeakLearnerParams best_learner{};
        for (int r = 0; r < slots_; ++r) {
            std::vector<double> weights(data_.size());
            bool nonzero = false;
            for (int i = 0; i < data_.size(); ++i) {
                weights[i] = d(i, r);
                if (weights[i] != 0.0) nonzero = true;
            }
            if (!nonzero) continue;
            WeakLearnerParams learner;
            double edge;
            auto stump = train_stump(data_.features, weights, OutputRange::pm_one);
            if (opts.kind == WeakKind::perceptron) {
                auto fit = train_perceptron(data_.features, weights, stump.stump, opts.sharpness,
                                            opts.perceptron_steps);
                learner = fit.perceptron;
                edge = fit.edge;
            } else {
                learner = stump.stump;
                edge = stump.edge;
            }
            if (best_slot < 0 || edge > best_edge) {
                best_slot = r;
                best_edge = edge;
                best_learner = learner;
            }
        }
        GeneratedColumns out;
        if (best_slot < 0) return out;  // degenerate pool
        out.best_edge = best_edge;
        for (int r = 1; r <= slots_; ++r)
            out.columns.push_back(WeakColumn{best_learner, r, std::nullopt});
        return out;
    }

    int slot_count() const { return slots_; }
    const Dataset& data() const { return data_; }
    const std::vector<double>& gamma(int c) const { return gamma_[c - 1]; }

private:
    const Dataset& data_;
    int k_;
    int slots_;
    TaskDescriptor desc_;
    std::vector<std::vector<double>> gamma_;  // per class, length = slots
    std::vector<std::vector<double>> loss_;
};

// ---------------------------------------------------------------------------
// Binary task recovering the margin program of single-slack-per-example
// boosting: Psi(x, y) = y/2 * phi(x), 0/1 loss. Classes 1/2 encode +1/-1.
// ---------------------------------------------------------------------------

class BinaryTask : public Task {
public:
    explicit BinaryTask(const Dataset& data) : data_(data) {
        desc_.kind = TaskKind::binary;
        desc_.num_classes = 2;
        desc_.feature_dim = data.dim();
        for (const auto& y : data_.labels) {
            int c = class_of(y);
            if (c != 1 && c != 2) throw InvalidInputError("binary label must be class 1 or 2");
        }
    }

    const TaskDescriptor& descriptor() const override { return desc_; }
    int unit_count() const override { return data_.size(); }
    const StructuredLabel& truth(int u) const override { return data_.labels[u]; }

    double loss(int u, const StructuredLabel& y) const override {
        return class_of(truth(u)) == class_of(y) ? 0.0 : 1.0;
    }

    double psi(const WeakColumn& col, int u, const StructuredLabel& y) const override {
        return binary_map_value(col, data_.features.row(u), binary_sign(class_of(y)));
    }

    bool enumerable() const override { return true; }

    std::vector<StructuredLabel> labels(int) const override {
        return {StructuredLabel{ClassLabel{1}}, StructuredLabel{ClassLabel{2}}};
    }

    StructuredLabel initial_violation(int u) const override {
        return ClassLabel{class_of(truth(u)) == 1 ? 2 : 1};
    }

    GeneratedColumns generate_columns(const DualWeights& mu, const WeakOptions& opts) const override {
        // delta_psi for the flipped label collapses to y_i * phi(x_i)
        std::vector<double> weights(data_.size(), 0.0);
        bool nonzero = false;
        for (const auto& [key, value] : mu.entries) {
            const auto& [unit, label] = key;
            if (class_of(label) == class_of(truth(unit))) continue;
            weights[unit] += value * binary_sign(class_of(truth(unit)));
            nonzero = true;
        }
        GeneratedColumns out;
        if (!nonzero) return out;
        if (opts.kind == WeakKind::perceptron) {
            auto stump = train_stump(data_.features, weights, OutputRange::pm_one);
            auto fit = train_perceptron(data_.features, weights, stump.stump, opts.sharpness,
                                        opts.perceptron_steps);
            out.columns.push_back(WeakColumn{fit.perceptron, std::nullopt, std::nullopt});
            out.best_edge = fit.edge;
        } else {
            auto fit = train_stump(data_.features, weights, OutputRange::pm_one);
            out.columns.push_back(WeakColumn{fit.stump, std::nullopt, std::nullopt});
            out.best_edge = fit.edge;
        }
        return out;
    }

    const Dataset& data() const { return data_; }

private:
    const Dataset& data_;
    TaskDescriptor desc_;
};

// ---------------------------------------------------------------------------
// Model-level scoring and prediction over plain feature vectors, shared by
// the CLI and metrics paths.
// ---------------------------------------------------------------------------

inline double score_sample(const StrongModel& model, std::span<const double> x,
                           const StructuredLabel& y) {
    const TaskDescriptor& d = model.task;
    double s = 0.0;
    for (int j = 0; j < model.size(); ++j) {
        if (model.weights[j] == 0.0) continue;
        double v;
        switch (d.kind) {
            case TaskKind::binary:
                v = binary_map_value(model.columns[j], x, binary_sign(class_of(y)));
                break;
            case TaskKind::multiclass:
                v = joint_map_value(model.columns[j], x, class_of(y), nullptr);
                break;
            case TaskKind::tree:
                v = joint_map_value(model.columns[j], x,
                                    d.taxonomy->class_nodes[class_of(y) - 1], &*d.taxonomy);
                break;
            case TaskKind::ranking:
                v = eval_weak(model.columns[j].learner, x);  // per-sample ranking score
                break;
            default:
                throw InvalidInputError("score_sample: unsupported task kind");
        }
        s += model.weights[j] * v;
    }
    return s;
}

inline double ranking_score(const StrongModel& model, std::span<const double> x) {
    double s = 0.0;
    for (int j = 0; j < model.size(); ++j)
        s += model.weights[j] * eval_weak(model.columns[j].learner, x);
    return s;
}

// argmax over the class set with lowest-index ties
inline StructuredLabel predict_sample(const StrongModel& model, std::span<const double> x) {
    const TaskDescriptor& d = model.task;
    if (d.kind == TaskKind::ranking) return OrdinalRank{ranking_score(model, x)};
    if (d.kind == TaskKind::crf)
        throw InvalidInputError("predict_sample: CRF prediction needs a segmentation instance");
    StructuredLabel best = ClassLabel{1};
    double best_score = score_sample(model, x, best);
    for (int c = 2; c <= d.num_classes; ++c) {
        StructuredLabel y = ClassLabel{c};
        double s = score_sample(model, x, y);
        if (s > best_score) {
            best = y;
            best_score = s;
        }
    }
    return best;
}

}  // namespace structboost
