#pragma once

#include <memory>
#include <span>
#include <vector>

#include "structboost/types.hpp"
#include "structboost/weak_learners.hpp"

namespace structboost {

struct LossAugResult {
    StructuredLabel label;
    double gap = 0.0;  // loss(u, label) - w'delta_psi(u, label) at the argmax
};

struct GeneratedColumns {
    std::vector<WeakColumn> columns;  // batch added per boosting iteration
    double best_edge = 0.0;           // edge of the selected learner
};

struct WeakOptions {
    WeakKind kind = WeakKind::stump;
    double sharpness = 5.0;
    int perceptron_steps = 200;
};

// A task binds a dataset to one structured-output instantiation: the label
// space per unit, the loss, the per-column compatibility values psi, the
// loss-augmented inference oracle, and the reduction of the weak-learner
// subproblem to signed-weight training sets.
//
// "Units" are the constraint carriers: examples for classification, pairs
// for ranking, whole instances for segmentation.
class Task {
public:
    virtual ~Task() = default;

    virtual const TaskDescriptor& descriptor() const = 0;
    virtual int unit_count() const = 0;
    virtual const StructuredLabel& truth(int u) const = 0;
    virtual double loss(int u, const StructuredLabel& y) const = 0;
    virtual double psi(const WeakColumn& col, int u, const StructuredLabel& y) const = 0;

    // finite, cheaply enumerable label sets (everything except CRF)
    virtual bool enumerable() const = 0;
    virtual std::vector<StructuredLabel> labels(int u) const = 0;

    // deterministic stand-ins for the "pick any label" initializations: one
    // seeds the cutting-plane working set, the other the first dual weights
    virtual StructuredLabel initial_violation(int u) const = 0;
    virtual StructuredLabel initial_mu_label(int u) const { return initial_violation(u); }

    virtual LossAugResult most_violated(std::span<const WeakColumn> cols,
                                        std::span<const double> w, int u) const;

    virtual GeneratedColumns generate_columns(const DualWeights& mu,
                                              const WeakOptions& opts) const = 0;

    virtual StructuredLabel predict(std::span<const WeakColumn> cols, std::span<const double> w,
                                    int u) const;

    double delta_psi(const WeakColumn& col, int u, const StructuredLabel& y) const {
        return psi(col, u, truth(u)) - psi(col, u, y);
    }

    double score(std::span<const WeakColumn> cols, std::span<const double> w, int u,
                 const StructuredLabel& y) const {
        double s = 0.0;
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (w[j] != 0.0) s += w[j] * psi(cols[j], u, y);
        return s;
    }
};

inline LossAugResult Task::most_violated(std::span<const WeakColumn> cols,
                                         std::span<const double> w, int u) const {
    LossAugResult best;
    bool have = false;
    for (const StructuredLabel& y : labels(u)) {
        double value = loss(u, y);
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (w[j] != 0.0) value -= w[j] * delta_psi(cols[j], u, y);
        if (!have || value > best.gap) {
            best = LossAugResult{y, value};
            have = true;
        }
    }
    if (!have) throw InvalidInputError("most_violated: empty label set");
    return best;
}

inline StructuredLabel Task::predict(std::span<const WeakColumn> cols, std::span<const double> w,
                                     int u) const {
    StructuredLabel best{};
    double best_score = 0.0;
    bool have = false;
    for (const StructuredLabel& y : labels(u)) {
        double s = score(cols, w, u, y);
        if (!have || s > best_score) {
            best = y;
            best_score = s;
            have = true;
        }
    }
    if (!have) throw InvalidInputError("predict: empty label set");
    return best;
}

}  // namespace structboost
