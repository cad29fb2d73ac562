#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace structboost {

// ---------------------------------------------------------------------------
// Errors. The CLI maps these to exit codes, so keep the hierarchy flat.
// ---------------------------------------------------------------------------

class InvalidInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_gap)
        : std::runtime_error(what), last_gap_(last_gap) {}
    double last_gap() const { return last_gap_; }

private:
    double last_gap_;
};

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Structured labels. Classes are 1-based, segmentation nodes take 0/1.
// ---------------------------------------------------------------------------

struct ClassLabel {
    int value = 0;
    auto operator<=>(const ClassLabel&) const = default;
};

struct OrdinalRank {
    double value = 0.0;
    auto operator<=>(const OrdinalRank&) const = default;
};

using GridLabeling = std::vector<std::uint8_t>;

using StructuredLabel = std::variant<ClassLabel, OrdinalRank, GridLabeling>;

inline bool is_class(const StructuredLabel& y) { return std::holds_alternative<ClassLabel>(y); }
inline int class_of(const StructuredLabel& y) { return std::get<ClassLabel>(y).value; }
inline const GridLabeling& grid_of(const StructuredLabel& y) { return std::get<GridLabeling>(y); }

// ---------------------------------------------------------------------------
// Dense row-major matrix; all feature handling in the toolkit is dense.
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::span<const double> row(int r) const {
        return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
    }
    std::span<double> row(int r) {
        return {data_.data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)};
    }

    bool operator==(const Matrix&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Datasets. A sample is a dense feature row plus one structured label; ids
// are the row indices and stay unique by construction.
// ---------------------------------------------------------------------------

struct Sample {
    int id = 0;
    std::span<const double> features;
    const StructuredLabel* label = nullptr;
};

struct Dataset {
    Matrix features;
    std::vector<StructuredLabel> labels;

    int size() const { return features.rows(); }
    int dim() const { return features.cols(); }

    Sample sample(int i) const { return Sample{i, features.row(i), &labels[i]}; }
};

// ---------------------------------------------------------------------------
// Class taxonomy: rooted tree over nodes 1..node_count, classes mapped onto
// a subset of nodes. parent[node-1] == 0 marks the root.
// ---------------------------------------------------------------------------

struct Taxonomy {
    int node_count = 0;
    std::vector<int> parent;       // 1-based ids, 0 = root marker
    std::vector<int> class_nodes;  // class c (1-based) lives at node class_nodes[c-1]
    std::vector<int> depth;        // root depth 0, filled by validate()

    int num_classes() const { return static_cast<int>(class_nodes.size()); }

    // Checks the single-root/acyclic/reachable invariants and fills depth.
    void validate() {
        if (node_count <= 0 || static_cast<int>(parent.size()) != node_count)
            throw InvalidInputError("taxonomy: parent vector size mismatch");
        int roots = 0;
        for (int p : parent) {
            if (p < 0 || p > node_count) throw InvalidInputError("taxonomy: parent id out of range");
            if (p == 0) ++roots;
        }
        if (roots != 1) throw InvalidInputError("taxonomy: exactly one root required");
        depth.assign(node_count, -1);
        for (int v = 1; v <= node_count; ++v) {
            int hops = 0;
            int cur = v;
            while (parent[cur - 1] != 0) {
                cur = parent[cur - 1];
                if (++hops > node_count) throw InvalidInputError("taxonomy: cycle detected");
            }
            hops = 0;
            cur = v;
            while (cur != 0) {
                ++hops;
                cur = parent[cur - 1];
            }
            depth[v - 1] = hops - 1;
        }
        for (int c : class_nodes)
            if (c < 1 || c > node_count) throw InvalidInputError("taxonomy: class node out of range");
    }
};

// ---------------------------------------------------------------------------
// Weak-learner columns and the strong model.
// ---------------------------------------------------------------------------

enum class OutputRange { pm_one, zero_one };

struct Stump {
    int feature = 0;
    double threshold = 0.0;
    int polarity = +1;  // +1 or -1
    OutputRange range = OutputRange::pm_one;
    bool operator==(const Stump&) const = default;
};

struct Perceptron {
    std::vector<double> v;
    double bias = 0.0;
    double sharpness = 5.0;  // sigmoid temperature, training only
    bool operator==(const Perceptron&) const = default;
};

using WeakLearnerParams = std::variant<Stump, Perceptron>;

enum class CrfPart { unary, pairwise };

struct WeakColumn {
    WeakLearnerParams learner;
    std::optional<int> class_slot;   // multi-class / taxonomy tensor slot, 1-based
    std::optional<CrfPart> part;     // CRF slot
    bool operator==(const WeakColumn&) const = default;
};

enum class TaskKind { binary, multiclass, tree, ranking, crf };

struct TaskDescriptor {
    TaskKind kind = TaskKind::multiclass;
    int num_classes = 0;   // binary: 2
    int feature_dim = 0;   // tabular tasks
    std::optional<Taxonomy> taxonomy;
    int unary_dim = 0;     // CRF
    int pairwise_dim = 0;  // CRF
};

enum class SolverKind { one_slack, m_slack };
enum class WeakKind { stump, perceptron };

struct TrainParams {
    double C = 1.0;
    int max_iters = 200;
    double eps_cg = 0.01;
    double eps_cp = 0.01;
    std::uint64_t seed = 1;
    SolverKind solver = SolverKind::one_slack;
    WeakKind weak = WeakKind::stump;
    int cp_max_rounds = 1000;
    int evict_after = 10;        // working-set entries with this many zero-dual solves go
    bool adaptive_eps_cp = true;
    int mslack_constraint_cap = 1000000;

    void validate() const {
        if (C <= 0.0) throw InvalidInputError("params: C must be positive");
        if (max_iters <= 0) throw InvalidInputError("params: max_iters must be positive");
        if (eps_cg <= 0.0) throw InvalidInputError("params: eps_cg must be positive");
        if (eps_cp <= 0.0) throw InvalidInputError("params: eps_cp must be positive");
    }
};

struct TrainMetadata {
    TrainParams params;
    int iterations_run = 0;
    bool stopped_by_edge = false;  // column-generation stopping rule fired
};

struct StrongModel {
    std::vector<WeakColumn> columns;
    std::vector<double> weights;  // all >= 0, one per column
    TaskDescriptor task;
    TrainMetadata metadata;

    int size() const { return static_cast<int>(columns.size()); }
};

// ---------------------------------------------------------------------------
// Dual weights mu_(unit,label). Zeros are dropped; map keys give the engines
// a deterministic iteration order.
// ---------------------------------------------------------------------------

using DualKey = std::pair<int, StructuredLabel>;

struct DualWeights {
    std::map<DualKey, double> entries;

    void add(int unit, const StructuredLabel& y, double value) {
        if (value == 0.0) return;
        auto [it, fresh] = entries.emplace(DualKey{unit, y}, value);
        if (!fresh) {
            it->second += value;
            if (it->second == 0.0) entries.erase(it);
        }
    }

    double unit_total(int unit) const {
        double s = 0.0;
        for (auto it = entries.lower_bound({unit, StructuredLabel{ClassLabel{0}}});
             it != entries.end() && it->first.first == unit; ++it)
            s += it->second;
        return s;
    }

    double total() const {
        double s = 0.0;
        for (const auto& [k, v] : entries) s += v;
        return s;
    }

    bool empty() const { return entries.empty(); }
};

}  // namespace structboost
