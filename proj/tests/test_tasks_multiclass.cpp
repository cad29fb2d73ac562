#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "structboost/tasks_multiclass.hpp"
#include "test_util.hpp"

using namespace structboost;
using Catch::Matchers::WithinAbs;

TEST_CASE("flat coding is the orthogonal indicator", "[multiclass]") {
    REQUIRE(gamma_flat(2, 3) == std::vector<double>{0.0, 1.0, 0.0});
    for (int y = 1; y <= 4; ++y) {
        auto g = gamma_flat(y, 4);
        double dot = 0.0;
        for (double v : g) dot += v * v;
        REQUIRE(dot == 1.0);
        for (int y2 = 1; y2 <= 4; ++y2) {
            if (y2 == y) continue;
            auto g2 = gamma_flat(y2, 4);
            double cross = 0.0;
            for (int r = 0; r < 4; ++r) cross += g[r] * g2[r];
            REQUIRE(cross == 0.0);
        }
    }
    REQUIRE_THROWS_AS(gamma_flat(0, 3), InvalidInputError);
    REQUIRE_THROWS_AS(gamma_flat(4, 3), InvalidInputError);
}

TEST_CASE("tree coding marks the class and its predecessors", "[multiclass]") {
    auto tax = test_util::six_class_taxonomy();
    REQUIRE(gamma_tree(3, tax) == std::vector<double>{0, 0, 1, 0, 0, 0, 1, 0, 1});

    // single class under a distinct root
    Taxonomy tiny;
    tiny.node_count = 2;
    tiny.parent = {2, 0};
    tiny.class_nodes = {1};
    tiny.validate();
    REQUIRE(gamma_tree(1, tiny) == std::vector<double>{1, 1});

    // inner products count common predecessors
    for (int a = 1; a <= 6; ++a)
        for (int b = 1; b <= 6; ++b) {
            auto ga = gamma_tree(a, tax), gb = gamma_tree(b, tax);
            double dot = 0.0;
            for (int r = 0; r < 9; ++r) dot += ga[r] * gb[r];
            int common = 0;  // explicit ancestor-set intersection
            for (int z = 1; z <= 9; ++z) {
                auto has = [&](int y) {
                    for (int cur = y; cur != 0; cur = tax.parent[cur - 1])
                        if (cur == z) return true;
                    return false;
                };
                if (has(a) && has(b)) ++common;
            }
            REQUIRE(dot == static_cast<double>(common));
        }
}

TEST_CASE("tree loss is the height of the first common ancestor", "[multiclass]") {
    auto tax = test_util::six_class_taxonomy();
    REQUIRE(tree_loss(3, 3, tax) == 0.0);
    REQUIRE(tree_loss(1, 2, tax) == 1.0);  // siblings under node 7
    REQUIRE(tree_loss(1, 4, tax) == 2.0);  // only common ancestor is the root
    REQUIRE(tree_loss(4, 6, tax) == 1.0);
}

TEST_CASE("joint map value gates phi by the coding slot", "[multiclass]") {
    Stump s{0, 0.0, +1, OutputRange::pm_one};
    std::vector<double> x{1.0};
    WeakColumn flat2{s, 2, std::nullopt};
    REQUIRE(joint_map_value(flat2, x, 3, nullptr) == 0.0);
    REQUIRE(joint_map_value(flat2, x, 2, nullptr) == 1.0);

    auto tax = test_util::six_class_taxonomy();
    WeakColumn slot7{s, 7, std::nullopt};
    REQUIRE(joint_map_value(slot7, x, 3, &tax) == 1.0);  // node 7 is 3's parent
    REQUIRE(joint_map_value(slot7, x, 4, &tax) == 0.0);
    WeakColumn root{s, 9, std::nullopt};
    REQUIRE(joint_map_value(root, x, 5, &tax) == 1.0);
}

TEST_CASE("binary map and its margin direction", "[multiclass]") {
    Stump s{0, 0.0, +1, OutputRange::pm_one};
    WeakColumn col{s, std::nullopt, std::nullopt};
    std::vector<double> x{1.0};  // phi(x) = +1
    REQUIRE(binary_map_value(col, x, +1) == 0.5);
    REQUIRE(binary_map_value(col, x, -1) == -0.5);
    REQUIRE(binary_map_value(col, x, +1) - binary_map_value(col, x, -1) == 1.0);
}

TEST_CASE("subproblem reduction matches the double sum", "[multiclass][oracle]") {
    auto data = test_util::class_dataset(
        test_util::matrix({{0.1, 0.4}, {0.9, 0.2}, {0.5, 0.8}, {0.3, 0.3}}), {1, 2, 3, 1});
    MulticlassTask task(data, 3, std::nullopt);

    SECTION("empty mu gives zero weights") {
        Matrix d = task.subproblem_reduce(DualWeights{});
        for (int i = 0; i < 4; ++i)
            for (int r = 0; r < 3; ++r) REQUIRE(d(i, r) == 0.0);
    }

    SECTION("single entry is an indicator difference") {
        DualWeights mu;
        mu.add(1, ClassLabel{3}, 0.7);  // truth of sample 1 is class 2
        Matrix d = task.subproblem_reduce(mu);
        REQUIRE(d(1, 1) == 0.7);
        REQUIRE(d(1, 2) == -0.7);
        REQUIRE(d(1, 0) == 0.0);
        REQUIRE(d(0, 0) == 0.0);
    }

    SECTION("random mu against brute force") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        DualWeights mu;
        for (int i = 0; i < 4; ++i)
            for (int y = 1; y <= 3; ++y)
                if (u(rng) < 0.6) mu.add(i, ClassLabel{y}, u(rng));
        Matrix d = task.subproblem_reduce(mu);
        for (int i = 0; i < 4; ++i)
            for (int r = 0; r < 3; ++r) {
                double expect = 0.0;
                for (const auto& [key, value] : mu.entries) {
                    if (key.first != i) continue;
                    auto gt = gamma_flat(class_of(data.labels[i]), 3);
                    auto gy = gamma_flat(class_of(key.second), 3);
                    expect += value * (gt[r] - gy[r]);
                }
                REQUIRE_THAT(d(i, r), WithinAbs(expect, 1e-12));
            }
        for (int i = 0; i < 4; ++i) {  // flat-coding rows sum to zero
            double s = 0.0;
            for (int r = 0; r < 3; ++r) s += d(i, r);
            REQUIRE_THAT(s, WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("loss-augmented inference enumerates the class set", "[multiclass][oracle]") {
    auto data = test_util::class_dataset(
        test_util::matrix({{0.2, 0.7}, {0.8, 0.1}, {0.4, 0.5}}), {1, 2, 4});
    MulticlassTask task(data, 4, std::nullopt);
    std::vector<WeakColumn> cols;
    for (int r = 1; r <= 4; ++r)
        cols.push_back(WeakColumn{Stump{0, 0.5, +1, OutputRange::pm_one}, r, std::nullopt});

    SECTION("zero weights pick the lowest-index non-truth label") {
        std::vector<double> w(4, 0.0);
        auto r0 = task.most_violated(cols, w, 0);
        REQUIRE(class_of(r0.label) == 2);  // truth is 1
        auto r1 = task.most_violated(cols, w, 1);
        REQUIRE(class_of(r1.label) == 1);  // truth is 2
    }

    SECTION("random weights match brute force") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.5);
        for (int trial = 0; trial < 25; ++trial) {
            std::vector<double> w{u(rng), u(rng), u(rng), u(rng)};
            for (int i = 0; i < 3; ++i) {
                auto got = task.most_violated(cols, w, i);
                double best = -1e300;
                int best_y = 0;
                for (int y = 1; y <= 4; ++y) {
                    double v = task.loss(i, ClassLabel{y});
                    for (int j = 0; j < 4; ++j)
                        v -= w[j] * task.delta_psi(cols[j], i, ClassLabel{y});
                    if (v > best + 1e-15) {
                        best = v;
                        best_y = y;
                    }
                }
                REQUIRE(class_of(got.label) == best_y);
                REQUIRE_THAT(got.gap, WithinAbs(best, 1e-12));
            }
        }
    }
}

TEST_CASE("zero weights with tree loss pick the max-tree-distance label", "[multiclass]") {
    auto tax = test_util::six_class_taxonomy();
    auto data = test_util::class_dataset(test_util::matrix({{0.2}, {0.8}}), {1, 5});
    MulticlassTask task(data, 6, tax);
    std::vector<WeakColumn> cols{
        WeakColumn{Stump{0, 0.5, +1, OutputRange::pm_one}, 1, std::nullopt}};
    std::vector<double> w{0.0};
    // truth 1: classes 4,5,6 sit at tree distance 2, lowest index wins
    auto r = task.most_violated(cols, w, 0);
    REQUIRE(class_of(r.label) == 4);
    REQUIRE(r.gap == 2.0);
}

TEST_CASE("star taxonomy reduces to flat multi-class", "[multiclass]") {
    auto star = test_util::star_taxonomy(4);
    for (int a = 1; a <= 4; ++a) {
        for (int b = 1; b <= 4; ++b)
            REQUIRE(tree_loss(a, b, star) == (a == b ? 0.0 : 1.0));
        auto gt = gamma_tree(a, star);
        auto gf = gamma_flat(a, 4);
        for (int r = 0; r < 4; ++r) REQUIRE(gt[r] == gf[r]);  // leaf slots
        REQUIRE(gt[4] == 1.0);                                // shared root slot
    }
}

TEST_CASE("model-level score and predict", "[multiclass][model]") {
    StrongModel model;
    model.task.kind = TaskKind::multiclass;
    model.task.num_classes = 3;
    model.task.feature_dim = 2;
    model.columns.push_back(WeakColumn{Stump{0, 0.5, +1, OutputRange::pm_one}, 2, std::nullopt});
    model.columns.push_back(WeakColumn{Stump{1, 0.5, +1, OutputRange::pm_one}, 1, std::nullopt});
    model.weights = {2.0, 1.0};

    std::vector<double> x{0.9, 0.1};
    REQUIRE(score_sample(model, x, ClassLabel{2}) == 2.0);
    REQUIRE(score_sample(model, x, ClassLabel{1}) == -1.0);
    REQUIRE(class_of(predict_sample(model, x)) == 2);
}
