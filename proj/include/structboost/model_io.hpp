#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "structboost/rng.hpp"
#include "structboost/tasks_crf.hpp"
#include "structboost/types.hpp"

namespace structboost {

constexpr int kModelFormatVersion = 1;
constexpr int kSegFormatVersion = 1;

// shortest round-trip decimal for all numeric text output
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

using nlohmann::json;

// thresholds can be +-inf, which JSON numbers cannot carry
inline json encode_maybe_inf(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

inline double decode_maybe_inf(const json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw InvalidInputError("model file: bad threshold string");
    }
    return j.get<double>();
}

inline json encode_learner(const WeakLearnerParams& learner) {
    json j;
    if (const Stump* s = std::get_if<Stump>(&learner)) {
        j["type"] = "stump";
        j["feature"] = s->feature;
        j["threshold"] = encode_maybe_inf(s->threshold);
        j["polarity"] = s->polarity;
        j["range"] = s->range == OutputRange::pm_one ? "pm_one" : "zero_one";
    } else {
        const Perceptron& p = std::get<Perceptron>(learner);
        j["type"] = "perceptron";
        j["v"] = p.v;
        j["bias"] = p.bias;
        j["sharpness"] = p.sharpness;
    }
    return j;
}

inline WeakLearnerParams decode_learner(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "stump") {
        Stump s;
        s.feature = j.at("feature").get<int>();
        s.threshold = decode_maybe_inf(j.at("threshold"));
        s.polarity = j.at("polarity").get<int>();
        std::string range = j.at("range").get<std::string>();
        if (range != "pm_one" && range != "zero_one")
            throw InvalidInputError("model file: unknown stump range");
        s.range = range == "pm_one" ? OutputRange::pm_one : OutputRange::zero_one;
        return s;
    }
    if (type == "perceptron") {
        Perceptron p;
        p.v = j.at("v").get<std::vector<double>>();
        p.bias = j.at("bias").get<double>();
        p.sharpness = j.value("sharpness", 5.0);
        return p;
    }
    throw InvalidInputError("model file: unknown learner type");
}

inline std::string task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::binary: return "binary";
        case TaskKind::multiclass: return "multiclass";
        case TaskKind::tree: return "tree";
        case TaskKind::ranking: return "ranking";
        case TaskKind::crf: return "crf";
    }
    throw InvalidInputError("unknown task kind");
}

inline TaskKind task_kind_from(const std::string& s) {
    if (s == "binary") return TaskKind::binary;
    if (s == "multiclass") return TaskKind::multiclass;
    if (s == "tree") return TaskKind::tree;
    if (s == "ranking") return TaskKind::ranking;
    if (s == "crf") return TaskKind::crf;
    throw InvalidInputError("unknown task kind: " + s);
}

}  // namespace detail

inline std::string serialize_model(const StrongModel& model) {
    using nlohmann::json;
    json j;
    j["format_version"] = kModelFormatVersion;

    json task;
    task["kind"] = detail::task_kind_name(model.task.kind);
    task["num_classes"] = model.task.num_classes;
    task["feature_dim"] = model.task.feature_dim;
    task["unary_dim"] = model.task.unary_dim;
    task["pairwise_dim"] = model.task.pairwise_dim;
    if (model.task.taxonomy) {
        json tax;
        tax["node_count"] = model.task.taxonomy->node_count;
        tax["parent"] = model.task.taxonomy->parent;
        tax["class_nodes"] = model.task.taxonomy->class_nodes;
        task["taxonomy"] = tax;
    }
    j["task"] = task;

    json cols = json::array();
    for (const auto& col : model.columns) {
        json c;
        c["learner"] = detail::encode_learner(col.learner);
        if (col.class_slot) c["class_slot"] = *col.class_slot;
        if (col.part) c["part"] = *col.part == CrfPart::unary ? "unary" : "pairwise";
        cols.push_back(c);
    }
    j["columns"] = cols;
    j["weights"] = model.weights;

    const TrainParams& p = model.metadata.params;
    json meta;
    meta["c"] = p.C;
    meta["max_iters"] = p.max_iters;
    meta["eps_cg"] = p.eps_cg;
    meta["eps_cp"] = p.eps_cp;
    meta["seed"] = p.seed;
    meta["solver"] = p.solver == SolverKind::one_slack ? "one-slack" : "m-slack";
    meta["weak"] = p.weak == WeakKind::stump ? "stump" : "perceptron";
    meta["iterations_run"] = model.metadata.iterations_run;
    meta["stopped_by_edge"] = model.metadata.stopped_by_edge;
    j["metadata"] = meta;
    return j.dump(2) + "\n";
}

inline StrongModel deserialize_model(const std::string& text) {
    using nlohmann::json;
    json j = json::parse(text);
    if (!j.contains("format_version") || j["format_version"].get<int>() != kModelFormatVersion)
        throw InvalidInputError("model file: unknown format version");
    StrongModel model;
    const json& task = j.at("task");
    model.task.kind = detail::task_kind_from(task.at("kind").get<std::string>());
    model.task.num_classes = task.at("num_classes").get<int>();
    model.task.feature_dim = task.at("feature_dim").get<int>();
    model.task.unary_dim = task.value("unary_dim", 0);
    model.task.pairwise_dim = task.value("pairwise_dim", 0);
    if (task.contains("taxonomy")) {
        Taxonomy tax;
        tax.node_count = task["taxonomy"].at("node_count").get<int>();
        tax.parent = task["taxonomy"].at("parent").get<std::vector<int>>();
        tax.class_nodes = task["taxonomy"].at("class_nodes").get<std::vector<int>>();
        tax.validate();
        model.task.taxonomy = std::move(tax);
    }
    for (const auto& c : j.at("columns")) {
        WeakColumn col;
        col.learner = detail::decode_learner(c.at("learner"));
        if (c.contains("class_slot")) col.class_slot = c["class_slot"].get<int>();
        if (c.contains("part"))
            col.part = c["part"].get<std::string>() == "unary" ? CrfPart::unary
                                                               : CrfPart::pairwise;
        model.columns.push_back(std::move(col));
    }
    model.weights = j.at("weights").get<std::vector<double>>();
    if (model.weights.size() != model.columns.size())
        throw InvalidInputError("model file: weight/column count mismatch");
    for (double w : model.weights)
        if (w < 0.0) throw InvalidInputError("model file: negative weight");

    const json& meta = j.at("metadata");
    TrainParams& p = model.metadata.params;
    p.C = meta.at("c").get<double>();
    p.max_iters = meta.at("max_iters").get<int>();
    p.eps_cg = meta.at("eps_cg").get<double>();
    p.eps_cp = meta.at("eps_cp").get<double>();
    p.seed = meta.at("seed").get<std::uint64_t>();
    p.solver = meta.at("solver").get<std::string>() == "one-slack" ? SolverKind::one_slack
                                                                   : SolverKind::m_slack;
    p.weak = meta.at("weak").get<std::string>() == "stump" ? WeakKind::stump
                                                           : WeakKind::perceptron;
    model.metadata.iterations_run = meta.at("iterations_run").get<int>();
    model.metadata.stopped_by_edge = meta.at("stopped_by_edge").get<bool>();
    return model;
}

inline void save_model(const StrongModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot open model file for writing: " + path);
    out << serialize_model(model);
}

inline StrongModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

// ---------------------------------------------------------------------------
// Segmentation dataset files: JSON with a version header.
// ---------------------------------------------------------------------------

inline std::string serialize_seg_dataset(const SegDataset& data) {
    using nlohmann::json;
    json j;
    j["format_version"] = kSegFormatVersion;
    json instances = json::array();
    for (const auto& inst : data) {
        json ji;
        ji["nodes"] = inst.node_count;
        json edges = json::array();
        for (auto [p, q] : inst.edges) edges.push_back(json::array({p, q}));
        ji["edges"] = edges;
        auto matrix_rows = [](const Matrix& m) {
            json rows = json::array();
            for (int r = 0; r < m.rows(); ++r) {
                json row = json::array();
                for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
                rows.push_back(row);
            }
            return rows;
        };
        ji["unary0"] = matrix_rows(inst.unary0);
        ji["unary1"] = matrix_rows(inst.unary1);
        ji["pairwise"] = matrix_rows(inst.pairwise);
        json truth = json::array();
        for (auto v : inst.truth) truth.push_back(static_cast<int>(v));
        ji["truth"] = truth;
        instances.push_back(ji);
    }
    j["instances"] = instances;
    return j.dump(2) + "\n";
}

inline SegDataset deserialize_seg_dataset(const std::string& text) {
    using nlohmann::json;
    json j = json::parse(text);
    if (!j.contains("format_version") || j["format_version"].get<int>() != kSegFormatVersion)
        throw InvalidInputError("seg file: unknown format version");
    SegDataset data;
    auto read_matrix = [](const json& rows) {
        int r = static_cast<int>(rows.size());
        int c = r ? static_cast<int>(rows[0].size()) : 0;
        Matrix m(r, c);
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < c; ++k) m(i, k) = rows[i][k].get<double>();
        return m;
    };
    for (const auto& ji : j.at("instances")) {
        SegInstance inst;
        inst.node_count = ji.at("nodes").get<int>();
        for (const auto& e : ji.at("edges"))
            inst.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        inst.unary0 = read_matrix(ji.at("unary0"));
        inst.unary1 = read_matrix(ji.at("unary1"));
        inst.pairwise = read_matrix(ji.at("pairwise"));
        for (const auto& v : ji.at("truth"))
            inst.truth.push_back(static_cast<std::uint8_t>(v.get<int>()));
        inst.validate();
        data.push_back(std::move(inst));
    }
    return data;
}

inline void save_seg_dataset(const SegDataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot open seg file for writing: " + path);
    out << serialize_seg_dataset(data);
}

inline SegDataset load_seg_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open seg file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize_seg_dataset(ss.str());
}

// ---------------------------------------------------------------------------
// Sparse "label idx:val" dataset files; 1-based feature indices, missing
// features zero. Labels are interpreted per task at training time.
// ---------------------------------------------------------------------------

struct RawDataset {
    std::vector<double> labels;
    std::vector<std::vector<std::pair<int, double>>> rows;  // (1-based idx, value)
    int max_feature = 0;

    int size() const { return static_cast<int>(labels.size()); }

    Matrix dense(int dim = 0) const {
        int d = dim > 0 ? dim : max_feature;
        Matrix m(size(), d);
        for (int i = 0; i < size(); ++i)
            for (auto [idx, val] : rows[i]) {
                if (idx > d)
                    throw InvalidInputError("dataset feature index exceeds expected dimension");
                m(i, idx - 1) = val;
            }
        return m;
    }
};

inline RawDataset parse_libsvm_text(const std::string& text) {
    RawDataset data;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank line
        try {
            std::size_t used = 0;
            double label = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            data.labels.push_back(label);
        } catch (const std::exception&) {
            throw InvalidInputError("parse error at line " + std::to_string(line_no) +
                                    ": bad label '" + tok + "'");
        }
        std::vector<std::pair<int, double>> row;
        while (ls >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw InvalidInputError("parse error at line " + std::to_string(line_no) +
                                        ": expected idx:value, got '" + tok + "'");
            try {
                int idx = std::stoi(tok.substr(0, colon));
                double val = std::stod(tok.substr(colon + 1));
                if (idx < 1) throw std::invalid_argument("index");
                row.emplace_back(idx, val);
                data.max_feature = std::max(data.max_feature, idx);
            } catch (const std::exception&) {
                throw InvalidInputError("parse error at line " + std::to_string(line_no) +
                                        ": bad feature '" + tok + "'");
            }
        }
        data.rows.push_back(std::move(row));
    }
    return data;
}

inline RawDataset parse_libsvm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open dataset: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_libsvm_text(ss.str());
}

inline std::string write_libsvm_text(const Matrix& features, const std::vector<double>& labels) {
    std::ostringstream out;
    for (int i = 0; i < features.rows(); ++i) {
        out << format_double(labels[i]);
        for (int j = 0; j < features.cols(); ++j)
            if (features(i, j) != 0.0) out << ' ' << (j + 1) << ':' << format_double(features(i, j));
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Taxonomy files: one node per line, "node_id parent_id|ROOT class_flag".
// ---------------------------------------------------------------------------

inline std::string write_taxonomy_text(const Taxonomy& tax) {
    std::ostringstream out;
    for (int v = 1; v <= tax.node_count; ++v) {
        bool is_class = std::find(tax.class_nodes.begin(), tax.class_nodes.end(), v) !=
                        tax.class_nodes.end();
        out << v << ' ';
        if (tax.parent[v - 1] == 0)
            out << "ROOT";
        else
            out << tax.parent[v - 1];
        out << ' ' << (is_class ? 1 : 0) << '\n';
    }
    return out.str();
}

inline Taxonomy parse_taxonomy_text(const std::string& text) {
    Taxonomy tax;
    std::istringstream in(text);
    std::string line;
    std::vector<std::pair<int, bool>> nodes;  // (parent, class flag) in id order
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        int id;
        std::string parent_tok;
        int flag;
        if (!(ls >> id >> parent_tok >> flag)) {
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            throw InvalidInputError("taxonomy parse error at line " + std::to_string(line_no));
        }
        if (id != static_cast<int>(nodes.size()) + 1)
            throw InvalidInputError("taxonomy ids must be dense from 1 (line " +
                                    std::to_string(line_no) + ")");
        int parent = parent_tok == "ROOT" ? 0 : std::stoi(parent_tok);
        nodes.emplace_back(parent, flag != 0);
    }
    tax.node_count = static_cast<int>(nodes.size());
    for (auto [parent, is_class] : nodes) tax.parent.push_back(parent);
    for (int v = 1; v <= tax.node_count; ++v)
        if (nodes[v - 1].second) tax.class_nodes.push_back(v);
    tax.validate();
    return tax;
}

inline Taxonomy load_taxonomy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("cannot open taxonomy: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_taxonomy_text(ss.str());
}

// ---------------------------------------------------------------------------
// Deterministic shuffled splits.
// ---------------------------------------------------------------------------

struct SplitIndices {
    std::vector<int> train, val, test;
};

inline SplitIndices split_dataset(int size, double train_frac, double val_frac, double test_frac,
                                  std::uint64_t seed) {
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
        throw InvalidInputError("split fractions must sum to 1");
    std::vector<int> order(size);
    for (int i = 0; i < size; ++i) order[i] = i;
    Rng rng(seed);
    for (int i = size - 1; i > 0; --i) {
        int j = rng.uniform_int(0, i);
        std::swap(order[i], order[j]);
    }
    SplitIndices out;
    int n_train = static_cast<int>(std::round(train_frac * size));
    int n_val = static_cast<int>(std::round(val_frac * size));
    n_train = std::min(n_train, size);
    n_val = std::min(n_val, size - n_train);
    out.train.assign(order.begin(), order.begin() + n_train);
    out.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    out.test.assign(order.begin() + n_train + n_val, order.end());
    return out;
}

}  // namespace structboost
