#pragma once

#include <cmath>
#include <vector>

#include "structboost/rng.hpp"
#include "structboost/tasks_crf.hpp"
#include "structboost/types.hpp"

namespace structboost {

// k Gaussian blobs on a circle
inline Dataset synth_gaussians(int m, int k, int dim, double noise, std::uint64_t seed) {
    if (m < 1 || k < 1 || dim < 2) throw InvalidInputError("synth_gaussians: bad shape");
    Rng rng(seed);
    Dataset data;
    data.features = Matrix(m, dim);
    for (int i = 0; i < m; ++i) {
        int c = i % k;
        double angle = 2.0 * 3.14159265358979323846 * c / k;
        data.features(i, 0) = std::cos(angle) + noise * rng.gauss();
        data.features(i, 1) = std::sin(angle) + noise * rng.gauss();
        for (int j = 2; j < dim; ++j) data.features(i, j) = noise * rng.gauss();
        data.labels.emplace_back(ClassLabel{c + 1});
    }
    return data;
}

// Hierarchical class clusters matching a two-level taxonomy: groups sit far
// apart, classes within a group sit close, so cross-group mistakes are both
// rarer and more costly under the tree loss.
struct TaxonomySynth {
    Dataset data;
    Taxonomy taxonomy;
};

inline TaxonomySynth synth_taxonomy_data(int m, double noise, std::uint64_t seed) {
    Taxonomy tax;
    tax.node_count = 9;
    tax.parent = {7, 7, 7, 8, 8, 8, 9, 9, 0};
    tax.class_nodes = {1, 2, 3, 4, 5, 6};
    tax.validate();

    Rng rng(seed);
    Dataset data;
    data.features = Matrix(m, 2);
    for (int i = 0; i < m; ++i) {
        int c = i % 6;
        int group = c / 3;
        double group_x = group == 0 ? -2.0 : 2.0;
        double within = (c % 3 - 1) * 0.8;
        data.features(i, 0) = group_x + 0.35 * noise * rng.gauss();
        data.features(i, 1) = within + noise * rng.gauss();
        data.labels.emplace_back(ClassLabel{c + 1});
    }
    return TaxonomySynth{std::move(data), std::move(tax)};
}

// Imbalanced binary data with ordinal labels {1, 0} for AUC optimization.
inline Dataset synth_imbalanced_binary(int positives, int negatives, int dim, double noise,
                                       std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    int m = positives + negatives;
    data.features = Matrix(m, dim);
    for (int i = 0; i < m; ++i) {
        bool pos = i < positives;
        double center = pos ? 0.8 : -0.8;
        for (int j = 0; j < dim; ++j) {
            double axis = j < 2 ? center : 0.0;
            data.features(i, j) = axis + noise * rng.gauss();
        }
        data.labels.emplace_back(OrdinalRank{pos ? 1.0 : 0.0});
    }
    return data;
}

inline SegDataset synth_seg_dataset(int instances, int width, int height, double noise,
                                    std::uint64_t seed) {
    SegDataset data;
    for (int i = 0; i < instances; ++i)
        data.push_back(synth_instance(width, height, noise, seed + 7919 * i));
    return data;
}

inline Dataset subset(const Dataset& data, const std::vector<int>& indices) {
    Dataset out;
    out.features = Matrix(static_cast<int>(indices.size()), data.dim());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        for (int j = 0; j < data.dim(); ++j)
            out.features(static_cast<int>(i), j) = data.features(indices[i], j);
        out.labels.push_back(data.labels[indices[i]]);
    }
    return out;
}

}  // namespace structboost
