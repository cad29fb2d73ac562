#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "structboost/graphcut.hpp"
#include "structboost/rng.hpp"
#include "structboost/task.hpp"
#include "structboost/types.hpp"
#include "structboost/weak_learners.hpp"

namespace structboost {

// ---------------------------------------------------------------------------
// Super-pixel graph instance for binary segmentation. Unary potential
// vectors are stored per node per label; pairwise potential vectors are
// componentwise nonnegative.
// ---------------------------------------------------------------------------

struct SegInstance {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;  // p < q, no duplicates
    Matrix unary0;    // node_count x unary_dim, U(0, x)
    Matrix unary1;    // node_count x unary_dim, U(1, x)
    Matrix pairwise;  // edges x pairwise_dim, all >= 0
    GridLabeling truth;

    void validate() const {
        if (node_count <= 0) throw InvalidInputError("seg instance: empty graph");
        if (unary0.rows() != node_count || unary1.rows() != node_count ||
            unary0.cols() != unary1.cols())
            throw InvalidInputError("seg instance: unary shape mismatch");
        if (pairwise.rows() != static_cast<int>(edges.size()))
            throw InvalidInputError("seg instance: pairwise shape mismatch");
        if (static_cast<int>(truth.size()) != node_count)
            throw InvalidInputError("seg instance: truth length mismatch");
        for (auto [p, q] : edges)
            if (p < 0 || q < 0 || p >= node_count || q >= node_count || p >= q)
                throw InvalidInputError("seg instance: bad edge");
        for (int e = 0; e < pairwise.rows(); ++e)
            for (int c = 0; c < pairwise.cols(); ++c)
                if (pairwise(e, c) < 0.0)
                    throw InvalidInputError("seg instance: negative pairwise feature");
    }
};

using SegDataset = std::vector<SegInstance>;

inline int hamming(const GridLabeling& a, const GridLabeling& b) {
    if (a.size() != b.size()) throw InvalidInputError("hamming: length mismatch");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

// E(x, y; w) = sum_p w1'Phi1(U(y^p,x)) + sum_(p,q) w2'Phi2(V)[y^p != y^q]
inline double energy(const SegInstance& inst, const GridLabeling& y,
                     std::span<const WeakColumn> columns, std::span<const double> w) {
    if (static_cast<int>(y.size()) != inst.node_count)
        throw InvalidInputError("energy: labeling length mismatch");
    double e = 0.0;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (w[j] == 0.0) continue;
        const WeakColumn& col = columns[j];
        if (!col.part) throw InvalidInputError("energy: column without CRF part");
        double acc = 0.0;
        if (*col.part == CrfPart::unary) {
            for (int p = 0; p < inst.node_count; ++p)
                acc += eval_weak(col.learner,
                                 y[p] ? inst.unary1.row(p) : inst.unary0.row(p));
        } else {
            for (std::size_t k = 0; k < inst.edges.size(); ++k) {
                auto [p, q] = inst.edges[k];
                if (y[p] != y[q]) acc += eval_weak(col.learner, inst.pairwise.row(k));
            }
        }
        e += w[j] * acc;
    }
    return e;
}

// True iff every pairwise column is a zero_one stump with nonnegative
// weight, which pins theta(0,0) = theta(1,1) = 0 <= theta(0,1) + theta(1,0).
inline bool submodularity_check(const StrongModel& model) {
    for (int j = 0; j < model.size(); ++j) {
        const WeakColumn& col = model.columns[j];
        if (!col.part || *col.part != CrfPart::pairwise) continue;
        if (model.weights[j] < 0.0) return false;
        const Stump* s = std::get_if<Stump>(&col.learner);
        if (!s || s->range != OutputRange::zero_one) return false;
    }
    return true;
}

namespace detail {

// graph-cut inference for the current pairwise-symmetric energy, with an
// optional per-node label-dependent cost added to the unaries
inline GridLabeling cut_minimize(const SegInstance& inst, std::span<const WeakColumn> columns,
                                 std::span<const double> w,
                                 const std::vector<double>& extra0,
                                 const std::vector<double>& extra1) {
    std::vector<double> u0(inst.node_count, 0.0), u1(inst.node_count, 0.0);
    std::vector<double> theta(inst.edges.size(), 0.0);
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (w[j] == 0.0) continue;
        const WeakColumn& col = columns[j];
        if (!col.part) throw InvalidInputError("inference: column without CRF part");
        if (*col.part == CrfPart::unary) {
            for (int p = 0; p < inst.node_count; ++p) {
                u0[p] += w[j] * eval_weak(col.learner, inst.unary0.row(p));
                u1[p] += w[j] * eval_weak(col.learner, inst.unary1.row(p));
            }
        } else {
            if (w[j] < 0.0)
                throw InvalidInputError("inference: negative pairwise weight is not submodular");
            for (std::size_t k = 0; k < inst.edges.size(); ++k)
                theta[k] += w[j] * eval_weak(col.learner, inst.pairwise.row(k));
        }
    }
    for (int p = 0; p < inst.node_count; ++p) {
        u0[p] += extra0.empty() ? 0.0 : extra0[p];
        u1[p] += extra1.empty() ? 0.0 : extra1[p];
    }
    auto net = graphcut::build_network(u0, u1, inst.edges, theta, theta);
    return graphcut::min_cut(net).labeling;
}

}  // namespace detail

// global energy minimizer via graph cuts
inline GridLabeling predict_labels(const SegInstance& inst, std::span<const WeakColumn> columns,
                                   std::span<const double> w) {
    return detail::cut_minimize(inst, columns, w, {}, {});
}

inline GridLabeling predict_labels(const SegInstance& inst, const StrongModel& model) {
    if (!submodularity_check(model))
        throw InvalidInputError("predict_labels: model violates submodularity");
    return predict_labels(inst, model.columns, model.weights);
}

// argmin_y E(x,y) - Hamming(truth, y): the loss folds into the unaries as
// a -1 discount on the label disagreeing with truth
inline GridLabeling loss_augmented_labels(const SegInstance& inst,
                                          std::span<const WeakColumn> columns,
                                          std::span<const double> w) {
    std::vector<double> extra0(inst.node_count, 0.0), extra1(inst.node_count, 0.0);
    for (int p = 0; p < inst.node_count; ++p) {
        if (inst.truth[p] == 0)
            extra1[p] = -1.0;
        else
            extra0[p] = -1.0;
    }
    return detail::cut_minimize(inst, columns, w, extra0, extra1);
}

// 4-connected grid with a rectangle of foreground; unary features are
// truth-correlated potentials plus Gaussian noise, pairwise features a
// color-affinity channel and a constant boundary-length channel.
inline SegInstance synth_instance(int width, int height, double noise, std::uint64_t seed) {
    if (width < 1 || height < 1) throw InvalidInputError("synth_instance: empty grid");
    Rng rng(seed);
    SegInstance inst;
    inst.node_count = width * height;

    int x0 = rng.uniform_int(0, width - 1), x1 = rng.uniform_int(0, width - 1);
    int y0 = rng.uniform_int(0, height - 1), y1 = rng.uniform_int(0, height - 1);
    if (x0 > x1) std::swap(x0, x1);
    if (y0 > y1) std::swap(y0, y1);
    inst.truth.assign(inst.node_count, 0);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) inst.truth[y * width + x] = 1;

    inst.unary0 = Matrix(inst.node_count, 2);
    inst.unary1 = Matrix(inst.node_count, 2);
    std::vector<double> color(inst.node_count);
    for (int p = 0; p < inst.node_count; ++p) {
        double pot0 = inst.truth[p] == 0 ? 0.0 : 1.0;  // low potential on the true label
        double pot1 = inst.truth[p] == 1 ? 0.0 : 1.0;
        inst.unary0(p, 0) = pot0 + noise * rng.gauss();
        inst.unary0(p, 1) = 0.5 * pot0 + noise * rng.gauss();
        inst.unary1(p, 0) = pot1 + noise * rng.gauss();
        inst.unary1(p, 1) = 0.5 * pot1 + noise * rng.gauss();
        color[p] = static_cast<double>(inst.truth[p]) + 0.25 * noise * rng.gauss();
    }

    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            int p = y * width + x;
            if (x + 1 < width) inst.edges.emplace_back(p, p + 1);
            if (y + 1 < height) inst.edges.emplace_back(p, p + width);
        }
    std::sort(inst.edges.begin(), inst.edges.end());
    inst.pairwise = Matrix(static_cast<int>(inst.edges.size()), 2);
    for (std::size_t k = 0; k < inst.edges.size(); ++k) {
        auto [p, q] = inst.edges[k];
        inst.pairwise(static_cast<int>(k), 0) = std::exp(-std::abs(color[p] - color[q]));
        inst.pairwise(static_cast<int>(k), 1) = 0.5;  // shared boundary length analog
    }
    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// CRF parameter-learning task. Units are segmentation instances; the label
// space is the exponential set of binary labelings, so only the 1-slack
// path applies. Psi stacks the negated potential sums, giving
// w'Psi(x,y) = -E(x,y;w) while keeping w >= 0.
// ---------------------------------------------------------------------------

class CrfTask : public Task {
public:
    explicit CrfTask(const SegDataset& data) : data_(data) {
        if (data_.empty()) throw InvalidInputError("crf task: empty dataset");
        int ud = -1, pd = -1;
        for (const auto& inst : data_) {
            inst.validate();
            if (ud < 0) {
                ud = inst.unary0.cols();
                pd = inst.pairwise.cols();
            } else if (inst.unary0.cols() != ud || inst.pairwise.cols() != pd) {
                throw InvalidInputError("crf task: feature dimensions differ across instances");
            }
        }
        desc_.kind = TaskKind::crf;
        desc_.unary_dim = ud;
        desc_.pairwise_dim = pd;
        truths_.reserve(data_.size());
        for (const auto& inst : data_) truths_.emplace_back(inst.truth);

        // stacked weak-learner training rows: unary (node, label) rows and
        // pairwise edge rows, fixed per dataset
        int unary_rows = 0, pair_rows = 0;
        for (const auto& inst : data_) {
            unary_rows += 2 * inst.node_count;
            pair_rows += static_cast<int>(inst.edges.size());
        }
        unary_rows_ = Matrix(unary_rows, ud);
        pair_rows_ = Matrix(pair_rows, pd);
        int ur = 0, pr = 0;
        for (const auto& inst : data_) {
            unary_offset_.push_back(ur);
            pair_offset_.push_back(pr);
            for (int p = 0; p < inst.node_count; ++p) {
                for (int c = 0; c < ud; ++c) {
                    unary_rows_(ur + 2 * p, c) = inst.unary0(p, c);
                    unary_rows_(ur + 2 * p + 1, c) = inst.unary1(p, c);
                }
            }
            ur += 2 * inst.node_count;
            for (int e = 0; e < static_cast<int>(inst.edges.size()); ++e)
                for (int c = 0; c < pd; ++c) pair_rows_(pr + e, c) = inst.pairwise(e, c);
            pr += static_cast<int>(inst.edges.size());
        }
    }

    const TaskDescriptor& descriptor() const override { return desc_; }
    int unit_count() const override { return static_cast<int>(data_.size()); }
    const StructuredLabel& truth(int u) const override { return truths_[u]; }

    double loss(int u, const StructuredLabel& y) const override {
        return static_cast<double>(hamming(data_[u].truth, grid_of(y)));
    }

    double psi(const WeakColumn& col, int u, const StructuredLabel& y) const override {
        const SegInstance& inst = data_[u];
        const GridLabeling& lab = grid_of(y);
        if (!col.part) throw InvalidInputError("crf psi: column without part");
        double acc = 0.0;
        if (*col.part == CrfPart::unary) {
            for (int p = 0; p < inst.node_count; ++p)
                acc += eval_weak(col.learner, lab[p] ? inst.unary1.row(p) : inst.unary0.row(p));
        } else {
            for (std::size_t k = 0; k < inst.edges.size(); ++k) {
                auto [p, q] = inst.edges[k];
                if (lab[p] != lab[q]) acc += eval_weak(col.learner, inst.pairwise.row(k));
            }
        }
        return -acc;
    }

    bool enumerable() const override { return false; }

    std::vector<StructuredLabel> labels(int) const override {
        throw CapacityError("crf task: labeling space is exponential, use the 1-slack solver");
    }

    // working-set seed: all-zeros unless that is the truth, then all-ones
    StructuredLabel initial_violation(int u) const override {
        GridLabeling zeros(data_[u].node_count, 0);
        if (zeros != data_[u].truth) return zeros;
        return GridLabeling(data_[u].node_count, 1);
    }

    // column-generation mu seed: the flipped-truth labeling
    StructuredLabel initial_mu_label(int u) const override {
        GridLabeling flip = data_[u].truth;
        for (auto& v : flip) v = v ? 0 : 1;
        return flip;
    }

    LossAugResult most_violated(std::span<const WeakColumn> cols, std::span<const double> w,
                                int u) const override {
        const SegInstance& inst = data_[u];
        GridLabeling y = loss_augmented_labels(inst, cols, w);
        double gap = static_cast<double>(hamming(inst.truth, y)) + energy(inst, inst.truth, cols, w) -
                     energy(inst, y, cols, w);
        return LossAugResult{std::move(y), gap};
    }

    StructuredLabel predict(std::span<const WeakColumn> cols, std::span<const double> w,
                            int u) const override {
        return predict_labels(data_[u], cols, w);
    }

    struct ReducedSets {
        std::vector<double> unary_weights;     // one per (instance, node, label) row
        std::vector<double> pairwise_weights;  // one per (instance, edge) row
    };

    // Expands mu into the two signed-weight training sets: +mu on the
    // violating labeling's node-label rows, -mu on truth's; pairwise weight
    // mu * (disagree(y) - disagree(truth)) per edge.
    ReducedSets subproblem_reduce(const DualWeights& mu) const {
        ReducedSets out;
        out.unary_weights.assign(unary_rows_.rows(), 0.0);
        out.pairwise_weights.assign(pair_rows_.rows(), 0.0);
        for (const auto& [key, value] : mu.entries) {
            const auto& [u, label] = key;
            const SegInstance& inst = data_[u];
            const GridLabeling& lab = grid_of(label);
            int ur = unary_offset_[u];
            for (int p = 0; p < inst.node_count; ++p) {
                out.unary_weights[ur + 2 * p + lab[p]] += value;
                out.unary_weights[ur + 2 * p + inst.truth[p]] -= value;
            }
            int pr = pair_offset_[u];
            for (std::size_t k = 0; k < inst.edges.size(); ++k) {
                auto [p, q] = inst.edges[k];
                int dis_y = lab[p] != lab[q];
                int dis_t = inst.truth[p] != inst.truth[q];
                if (dis_y != dis_t)
                    out.pairwise_weights[pr + static_cast<int>(k)] += value * (dis_y - dis_t);
            }
        }
        return out;
    }

    GeneratedColumns generate_columns(const DualWeights& mu, const WeakOptions& opts) const override {
        ReducedSets sets = subproblem_reduce(mu);
        GeneratedColumns out;
        bool any_unary = false, any_pair = false;
        for (double v : sets.unary_weights)
            if (v != 0.0) { any_unary = true; break; }
        for (double v : sets.pairwise_weights)
            if (v != 0.0) { any_pair = true; break; }
        if (any_unary) {
            auto stump = train_stump(unary_rows_, sets.unary_weights, OutputRange::pm_one);
            WeakLearnerParams learner = stump.stump;
            double edge = stump.edge;
            if (opts.kind == WeakKind::perceptron) {
                auto fit = train_perceptron(unary_rows_, sets.unary_weights, stump.stump,
                                            opts.sharpness, opts.perceptron_steps);
                learner = fit.perceptron;
                edge = fit.edge;
            }
            out.columns.push_back(WeakColumn{learner, std::nullopt, CrfPart::unary});
            out.best_edge = std::max(out.best_edge, edge);
        }
        if (any_pair) {
            // pairwise learners stay zero_one stumps to preserve submodularity
            auto stump = train_stump(pair_rows_, sets.pairwise_weights, OutputRange::zero_one);
            out.columns.push_back(WeakColumn{stump.stump, std::nullopt, CrfPart::pairwise});
            out.best_edge = std::max(out.best_edge, stump.edge);
        }
        return out;
    }

    const SegDataset& data() const { return data_; }
    const Matrix& unary_rows() const { return unary_rows_; }
    const Matrix& pairwise_rows() const { return pair_rows_; }

private:
    const SegDataset& data_;
    TaskDescriptor desc_;
    std::vector<StructuredLabel> truths_;
    Matrix unary_rows_;
    Matrix pair_rows_;
    std::vector<int> unary_offset_;
    std::vector<int> pair_offset_;
};

}  // namespace structboost
