#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "structboost/model_io.hpp"
#include "structboost/tasks_crf.hpp"
#include "structboost/tasks_multiclass.hpp"
#include "structboost/tasks_ranking.hpp"
#include "structboost/types.hpp"

namespace structboost {

struct MetricsRecord {
    std::vector<std::pair<std::string, double>> values;

    void add(const std::string& name, double v) { values.emplace_back(name, v); }

    double get(const std::string& name) const {
        for (const auto& [k, v] : values)
            if (k == name) return v;
        throw InvalidInputError("metric not present: " + name);
    }

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < values.size(); ++i)
            os << values[i].first << (i + 1 < values.size() ? "," : "\n");
        for (std::size_t i = 0; i < values.size(); ++i)
            os << format_double(values[i].second) << (i + 1 < values.size() ? "," : "\n");
    }
};

inline MetricsRecord eval_classification(const StrongModel& model, const Dataset& data) {
    MetricsRecord rec;
    int errors = 0;
    double tree_total = 0.0;
    for (int i = 0; i < data.size(); ++i) {
        StructuredLabel pred = predict_sample(model, data.features.row(i));
        if (!(pred == data.labels[i])) ++errors;
        if (model.task.kind == TaskKind::tree) {
            const Taxonomy& tax = *model.task.taxonomy;
            tree_total += tree_loss(tax.class_nodes[class_of(data.labels[i]) - 1],
                                    tax.class_nodes[class_of(pred) - 1], tax);
        }
    }
    rec.add("error_rate", static_cast<double>(errors) / data.size());
    if (model.task.kind == TaskKind::tree)
        rec.add("mean_tree_loss", tree_total / data.size());
    return rec;
}

// evaluates the flat 0/1 prediction of any class model against a taxonomy
inline double mean_tree_loss(const StrongModel& model, const Dataset& data, const Taxonomy& tax) {
    double total = 0.0;
    for (int i = 0; i < data.size(); ++i) {
        StructuredLabel pred = predict_sample(model, data.features.row(i));
        total += tree_loss(tax.class_nodes[class_of(data.labels[i]) - 1],
                           tax.class_nodes[class_of(pred) - 1], tax);
    }
    return total / data.size();
}

// ordinal labels are binarized at 1/2 for the AUC; benchmark data uses {0,1}
inline MetricsRecord eval_ranking(const StrongModel& model, const Dataset& data) {
    MetricsRecord rec;
    std::vector<double> scores(data.size());
    std::vector<int> labels(data.size());
    for (int i = 0; i < data.size(); ++i) {
        scores[i] = ranking_score(model, data.features.row(i));
        labels[i] = std::get<OrdinalRank>(data.labels[i]).value > 0.5 ? 1 : 0;
    }
    rec.add("auc", auc(scores, labels));
    return rec;
}

inline MetricsRecord eval_crf(const StrongModel& model, const SegDataset& data) {
    MetricsRecord rec;
    long nodes = 0, wrong = 0, correct = 0;
    long inter_fg = 0, union_fg = 0, inter_bg = 0, union_bg = 0;
    for (const auto& inst : data) {
        GridLabeling pred = predict_labels(inst, model);
        for (int p = 0; p < inst.node_count; ++p) {
            ++nodes;
            bool t = inst.truth[p] != 0, y = pred[p] != 0;
            if (t != y) ++wrong;
            if (t == y) ++correct;
            if (t && y) ++inter_fg;
            if (t || y) ++union_fg;
            if (!t && !y) ++inter_bg;
            if (!t || !y) ++union_bg;
        }
    }
    rec.add("hamming_rate", static_cast<double>(wrong) / nodes);
    rec.add("pixel_accuracy", static_cast<double>(correct) / nodes);
    rec.add("iu_foreground", union_fg == 0 ? 1.0 : static_cast<double>(inter_fg) / union_fg);
    rec.add("iu_background", union_bg == 0 ? 1.0 : static_cast<double>(inter_bg) / union_bg);
    return rec;
}

}  // namespace structboost
