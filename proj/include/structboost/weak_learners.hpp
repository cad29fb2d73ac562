#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "structboost/parallel.hpp"
#include "structboost/types.hpp"

namespace structboost {

// sign convention used everywhere: sign(0) = +1.
inline double hard_sign(double v) { return v >= 0.0 ? 1.0 : -1.0; }

inline double eval_stump(const Stump& s, std::span<const double> x) {
    if (s.feature < 0 || s.feature >= static_cast<int>(x.size()))
        throw InvalidInputError("stump feature index out of range");
    double raw = s.polarity * hard_sign(x[s.feature] - s.threshold);
    if (s.range == OutputRange::zero_one) return raw > 0.0 ? 1.0 : 0.0;
    return raw;
}

inline double eval_perceptron(const Perceptron& p, std::span<const double> x) {
    if (p.v.size() != x.size())
        throw InvalidInputError("perceptron dimension mismatch");
    double z = p.bias;
    for (std::size_t j = 0; j < x.size(); ++j) z += p.v[j] * x[j];
    return hard_sign(z);
}

inline double eval_weak(const WeakLearnerParams& learner, std::span<const double> x) {
    if (const Stump* s = std::get_if<Stump>(&learner)) return eval_stump(*s, x);
    return eval_perceptron(std::get<Perceptron>(learner), x);
}

namespace detail {

inline double stump_edge(const Stump& s, const Matrix& features, std::span<const double> d) {
    double edge = 0.0;
    for (int i = 0; i < features.rows(); ++i)
        edge += eval_stump(s, features.row(i)) * d[i];
    return edge;
}

// Candidate thresholds for one feature: -inf, midpoints of consecutive
// distinct values, +inf.
inline std::vector<double> stump_thresholds(const Matrix& features, int f) {
    std::vector<double> vals(features.rows());
    for (int i = 0; i < features.rows(); ++i) vals[i] = features(i, f);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> thr;
    thr.reserve(vals.size() + 1);
    thr.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t u = 0; u + 1 < vals.size(); ++u)
        thr.push_back(vals[u] + 0.5 * (vals[u + 1] - vals[u]));
    thr.push_back(std::numeric_limits<double>::infinity());
    return thr;
}

}  // namespace detail

struct StumpFit {
    Stump stump;
    double edge = 0.0;
};

// Exact weighted-edge maximization: scans every feature, every midpoint
// threshold plus +-inf, both polarities. Tie-break: lowest feature, lowest
// threshold, polarity +1. Edges are evaluated by direct summation in sample
// order so the result is reproducible against independent enumeration.
inline StumpFit train_stump(const Matrix& features, std::span<const double> signed_weights,
                            OutputRange range) {
    const int m = features.rows();
    const int d = features.cols();
    if (m == 0 || static_cast<int>(signed_weights.size()) != m)
        throw InvalidInputError("train_stump: weight vector size mismatch");
    bool any = false;
    for (double w : signed_weights)
        if (w != 0.0) { any = true; break; }
    if (!any) throw InvalidInputError("train_stump: all signed weights are zero");

    std::vector<StumpFit> per_feature(d);
    parallel_for(d, [&](int f) {
        StumpFit best;
        bool have = false;
        for (double t : detail::stump_thresholds(features, f)) {
            for (int polarity : {+1, -1}) {
                Stump cand{f, t, polarity, range};
                double edge = detail::stump_edge(cand, features, signed_weights);
                if (!have || edge > best.edge) {
                    best = StumpFit{cand, edge};
                    have = true;
                }
            }
        }
        per_feature[f] = best;
    });

    StumpFit best = per_feature[0];
    for (int f = 1; f < d; ++f)
        if (per_feature[f].edge > best.edge) best = per_feature[f];
    return best;
}

struct PerceptronFit {
    Perceptron perceptron;
    double edge = 0.0;
};

namespace detail {

inline double smooth_edge(const std::vector<double>& v, double b, double sharpness,
                          const Matrix& features, std::span<const double> d) {
    double obj = 0.0;
    for (int i = 0; i < features.rows(); ++i) {
        double z = b;
        auto x = features.row(i);
        for (int j = 0; j < features.cols(); ++j) z += v[j] * x[j];
        obj += std::tanh(sharpness * z) * d[i];
    }
    return obj;
}

inline double hard_edge(const Perceptron& p, const Matrix& features, std::span<const double> d) {
    double edge = 0.0;
    for (int i = 0; i < features.rows(); ++i)
        edge += eval_perceptron(p, features.row(i)) * d[i];
    return edge;
}

}  // namespace detail

// Gradient ascent on the tanh-smoothed edge with backtracking line search,
// initialized from the stump-equivalent hyperplane. Returns the hard-sign
// edge; never worse than the initializing stump.
inline PerceptronFit train_perceptron(const Matrix& features, std::span<const double> signed_weights,
                                      std::optional<Stump> init = std::nullopt,
                                      double sharpness = 5.0, int max_steps = 200) {
    const int m = features.rows();
    const int dim = features.cols();
    if (m == 0 || static_cast<int>(signed_weights.size()) != m)
        throw InvalidInputError("train_perceptron: weight vector size mismatch");

    Stump seed = init ? *init : train_stump(features, signed_weights, OutputRange::pm_one).stump;

    Perceptron p;
    p.v.assign(dim, 0.0);
    p.sharpness = sharpness;
    if (std::isfinite(seed.threshold)) {
        p.v[seed.feature] = static_cast<double>(seed.polarity);
        p.bias = -seed.threshold * seed.polarity;
    } else {
        // constant stump: zero hyperplane, bias carries the sign
        p.bias = seed.threshold < 0.0 ? seed.polarity : -seed.polarity;
    }

    std::vector<double> v = p.v;
    double b = p.bias;
    double obj = detail::smooth_edge(v, b, sharpness, features, signed_weights);
    std::vector<double> gv(dim);
    for (int step = 0; step < max_steps; ++step) {
        std::fill(gv.begin(), gv.end(), 0.0);
        double gb = 0.0;
        for (int i = 0; i < m; ++i) {
            auto x = features.row(i);
            double z = b;
            for (int j = 0; j < dim; ++j) z += v[j] * x[j];
            double th = std::tanh(sharpness * z);
            double coef = signed_weights[i] * sharpness * (1.0 - th * th);
            for (int j = 0; j < dim; ++j) gv[j] += coef * x[j];
            gb += coef;
        }
        double gnorm2 = gb * gb;
        for (double g : gv) gnorm2 += g * g;
        if (gnorm2 < 1e-18) break;

        double eta = 1.0;
        bool improved = false;
        std::vector<double> v_try(dim);
        for (int bt = 0; bt < 40; ++bt) {
            for (int j = 0; j < dim; ++j) v_try[j] = v[j] + eta * gv[j];
            double b_try = b + eta * gb;
            double obj_try = detail::smooth_edge(v_try, b_try, sharpness, features, signed_weights);
            if (obj_try > obj) {
                v = v_try;
                b = b_try;
                obj = obj_try;
                improved = true;
                break;
            }
            eta *= 0.5;
        }
        if (!improved) break;
    }

    Perceptron trained{v, b, sharpness};
    double trained_edge = detail::hard_edge(trained, features, signed_weights);
    double seed_edge = detail::hard_edge(p, features, signed_weights);
    if (trained_edge >= seed_edge) return PerceptronFit{trained, trained_edge};
    return PerceptronFit{p, seed_edge};
}

}  // namespace structboost
