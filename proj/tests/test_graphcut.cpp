#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "structboost/graphcut.hpp"

using namespace structboost;
using Catch::Matchers::WithinAbs;

namespace {

struct RandomInstance {
    std::vector<double> u0, u1;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> t10, t01;
};

RandomInstance random_submodular(std::mt19937& rng, int max_nodes) {
    std::uniform_int_distribution<int> nd(1, max_nodes);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.0, 1.5);
    std::uniform_int_distribution<int> coin(0, 2);
    RandomInstance inst;
    int n = nd(rng);
    inst.u0.resize(n);
    inst.u1.resize(n);
    for (int p = 0; p < n; ++p) {
        inst.u0[p] = u(rng);
        inst.u1[p] = u(rng);
    }
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q)
            if (coin(rng) == 0) {
                inst.edges.emplace_back(p, q);
                inst.t10.push_back(pos(rng));
                inst.t01.push_back(pos(rng));
            }
    return inst;
}

}  // namespace

TEST_CASE("no edges labels each node by its cheaper unary", "[graphcut]") {
    auto net = graphcut::build_network({0.5, 2.0, 1.0}, {1.5, 0.0, 1.0}, {}, {}, {});
    auto cut = graphcut::min_cut(net);
    REQUIRE(cut.labeling == GridLabeling{0, 1, 0});  // tie at node 2 resolved sink-side
    REQUIRE_THAT(cut.cut_value + net.offset, WithinAbs(0.5 + 0.0 + 1.0, 1e-12));
}

TEST_CASE("all-zero capacities: all nodes sink side", "[graphcut]") {
    auto net = graphcut::build_network({0.0, 0.0}, {0.0, 0.0}, {{0, 1}}, {0.0}, {0.0});
    auto cut = graphcut::min_cut(net);
    REQUIRE(cut.cut_value == 0.0);
    REQUIRE(cut.labeling == GridLabeling{0, 0});
}

TEST_CASE("huge pairwise cost forces equal labels", "[graphcut]") {
    // node 0 prefers 1 strongly, node 1 prefers 0 weakly; the pairwise tie
    // must resolve to a uniform labeling
    auto net = graphcut::build_network({3.0, 0.0}, {0.0, 1.0}, {{0, 1}}, {100.0}, {100.0});
    auto cut = graphcut::min_cut(net);
    REQUIRE(cut.labeling[0] == cut.labeling[1]);
    double e_uniform0 = 3.0 + 0.0;
    double e_uniform1 = 0.0 + 1.0;
    REQUIRE_THAT(cut.cut_value + net.offset, WithinAbs(std::min(e_uniform0, e_uniform1), 1e-12));
}

TEST_CASE("negative pairwise cost is rejected", "[graphcut]") {
    REQUIRE_THROWS_AS(graphcut::build_network({0.0}, {0.0}, {{0, 0}}, {1.0}, {1.0}),
                      InvalidInputError);
    REQUIRE_THROWS_AS(
        graphcut::build_network({0.0, 0.0}, {0.0, 0.0}, {{0, 1}}, {-0.5}, {1.0}),
        InvalidInputError);
}

TEST_CASE("min cut matches exhaustive enumeration", "[graphcut][oracle]") {
    std::mt19937 rng(424242);
    for (int trial = 0; trial < 100; ++trial) {
        auto inst = random_submodular(rng, 12);
        auto net = graphcut::build_network(inst.u0, inst.u1, inst.edges, inst.t10, inst.t01);
        auto cut = graphcut::min_cut(net);
        auto oracle =
            oracles::min_energy_exhaustive(inst.u0, inst.u1, inst.edges, inst.t01, inst.t10);
        double cut_energy = graphcut::network_energy(inst.u0, inst.u1, inst.edges, inst.t10,
                                                     inst.t01, cut.labeling);
        REQUIRE_THAT(cut_energy, WithinAbs(oracle.energy, 1e-9));
        // cut + offset reproduces the labeling's energy
        REQUIRE_THAT(cut.cut_value + net.offset, WithinAbs(cut_energy, 1e-9));
    }
}

TEST_CASE("max-flow equals evaluated cut", "[graphcut]") {
    std::mt19937 rng(31337);
    for (int trial = 0; trial < 25; ++trial) {
        auto inst = random_submodular(rng, 10);
        auto net = graphcut::build_network(inst.u0, inst.u1, inst.edges, inst.t10, inst.t01);
        auto cut = graphcut::min_cut(net);

        // evaluate the returned cut independently: capacities crossing from
        // the source side to the sink side
        double cut_cap = 0.0;
        for (int p = 0; p < net.nodes; ++p) {
            if (cut.labeling[p] == 0) cut_cap += net.source_cap[p];
            if (cut.labeling[p] == 1) cut_cap += net.sink_cap[p];
        }
        for (std::size_t k = 0; k < net.edges.size(); ++k) {
            auto [p, q] = net.edges[k];
            if (cut.labeling[p] == 1 && cut.labeling[q] == 0) cut_cap += net.cap_pq[k];
            if (cut.labeling[p] == 0 && cut.labeling[q] == 1) cut_cap += net.cap_qp[k];
        }
        REQUIRE_THAT(cut.cut_value, WithinAbs(cut_cap, 1e-9));
    }
}
