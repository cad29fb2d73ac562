#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>

#include "structboost/types.hpp"

namespace structboost::graphcut {

constexpr double kSaturationEps = 1e-12;

// s-t network for a binary pairwise energy with theta(0,0) = theta(1,1) = 0.
// Node p carries source capacity max(0, u0 - u1) and sink capacity
// max(0, u1 - u0); disagreement costs become directed edge capacities.
// offset tracks the reparameterization so cut value + offset = energy.
struct FlowNetwork {
    int nodes = 0;
    std::vector<double> source_cap;  // s -> p, cut when p labeled 0
    std::vector<double> sink_cap;    // p -> t, cut when p labeled 1
    std::vector<std::pair<int, int>> edges;  // (p, q), p < q
    std::vector<double> cap_pq;  // p -> q, theta(1,0)
    std::vector<double> cap_qp;  // q -> p, theta(0,1)
    double offset = 0.0;
};

inline FlowNetwork build_network(const std::vector<double>& unary0,
                                 const std::vector<double>& unary1,
                                 const std::vector<std::pair<int, int>>& edges,
                                 const std::vector<double>& theta10,
                                 const std::vector<double>& theta01) {
    const int n = static_cast<int>(unary0.size());
    if (unary1.size() != unary0.size())
        throw InvalidInputError("build_network: unary size mismatch");
    if (theta10.size() != edges.size() || theta01.size() != edges.size())
        throw InvalidInputError("build_network: pairwise size mismatch");
    FlowNetwork net;
    net.nodes = n;
    net.source_cap.resize(n);
    net.sink_cap.resize(n);
    for (int p = 0; p < n; ++p) {
        double lo = std::min(unary0[p], unary1[p]);
        net.offset += lo;
        net.source_cap[p] = unary0[p] - lo;
        net.sink_cap[p] = unary1[p] - lo;
    }
    for (std::size_t k = 0; k < edges.size(); ++k) {
        auto [p, q] = edges[k];
        if (p < 0 || q < 0 || p >= n || q >= n || p == q)
            throw InvalidInputError("build_network: edge endpoint out of range");
        if (theta10[k] < 0.0 || theta01[k] < 0.0)
            throw InvalidInputError("build_network: negative pairwise cost breaks submodularity");
    }
    net.edges = edges;
    net.cap_pq = theta10;
    net.cap_qp = theta01;
    return net;
}

struct MinCutResult {
    GridLabeling labeling;  // 1 = source side of the final residual graph
    double cut_value = 0.0;
};

namespace detail {

struct Arc {
    int to;
    int rev;  // index of the reverse arc in adj[to]
    double cap;
};

class MaxFlow {
public:
    explicit MaxFlow(int nodes) : adj_(nodes) {}

    void add_arc(int from, int to, double cap_fwd, double cap_rev) {
        adj_[from].push_back({to, static_cast<int>(adj_[to].size()), cap_fwd});
        adj_[to].push_back({from, static_cast<int>(adj_[from].size()) - 1, cap_rev});
    }

    // Edmonds-Karp: BFS shortest augmenting paths, deterministic order.
    double run(int s, int t) {
        double flow = 0.0;
        const int n = static_cast<int>(adj_.size());
        std::vector<int> prev_node(n), prev_arc(n);
        while (true) {
            std::fill(prev_node.begin(), prev_node.end(), -1);
            prev_node[s] = s;
            std::queue<int> q;
            q.push(s);
            while (!q.empty() && prev_node[t] < 0) {
                int v = q.front();
                q.pop();
                for (std::size_t k = 0; k < adj_[v].size(); ++k) {
                    const Arc& a = adj_[v][k];
                    if (a.cap > kSaturationEps && prev_node[a.to] < 0) {
                        prev_node[a.to] = v;
                        prev_arc[a.to] = static_cast<int>(k);
                        q.push(a.to);
                    }
                }
            }
            if (prev_node[t] < 0) break;
            double bottleneck = std::numeric_limits<double>::infinity();
            for (int v = t; v != s; v = prev_node[v])
                bottleneck = std::min(bottleneck, adj_[prev_node[v]][prev_arc[v]].cap);
            for (int v = t; v != s; v = prev_node[v]) {
                Arc& a = adj_[prev_node[v]][prev_arc[v]];
                a.cap -= bottleneck;
                adj_[a.to][a.rev].cap += bottleneck;
            }
            flow += bottleneck;
        }
        return flow;
    }

    std::vector<std::uint8_t> source_reachable(int s) const {
        std::vector<std::uint8_t> seen(adj_.size(), 0);
        seen[s] = 1;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (const Arc& a : adj_[v]) {
                if (a.cap > kSaturationEps && !seen[a.to]) {
                    seen[a.to] = 1;
                    q.push(a.to);
                }
            }
        }
        return seen;
    }

    const std::vector<std::vector<Arc>>& adjacency() const { return adj_; }

private:
    std::vector<std::vector<Arc>> adj_;
};

}  // namespace detail

inline MinCutResult min_cut(const FlowNetwork& net) {
    const int n = net.nodes;
    const int s = n;
    const int t = n + 1;
    detail::MaxFlow mf(n + 2);
    for (int p = 0; p < n; ++p) {
        if (net.source_cap[p] > 0.0) mf.add_arc(s, p, net.source_cap[p], 0.0);
        if (net.sink_cap[p] > 0.0) mf.add_arc(p, t, net.sink_cap[p], 0.0);
    }
    for (std::size_t k = 0; k < net.edges.size(); ++k) {
        auto [p, q] = net.edges[k];
        if (net.cap_pq[k] > 0.0 || net.cap_qp[k] > 0.0)
            mf.add_arc(p, q, net.cap_pq[k], net.cap_qp[k]);
    }
    MinCutResult out;
    out.cut_value = mf.run(s, t);
    auto reach = mf.source_reachable(s);
    out.labeling.resize(n);
    for (int p = 0; p < n; ++p) out.labeling[p] = reach[p] ? 1 : 0;
    return out;
}

// energy of a labeling under the same parameterization the network encodes
inline double network_energy(const std::vector<double>& unary0, const std::vector<double>& unary1,
                             const std::vector<std::pair<int, int>>& edges,
                             const std::vector<double>& theta10, const std::vector<double>& theta01,
                             const GridLabeling& y) {
    double e = 0.0;
    for (std::size_t p = 0; p < unary0.size(); ++p) e += y[p] ? unary1[p] : unary0[p];
    for (std::size_t k = 0; k < edges.size(); ++k) {
        int yp = y[edges[k].first], yq = y[edges[k].second];
        if (yp == 1 && yq == 0) e += theta10[k];
        if (yp == 0 && yq == 1) e += theta01[k];
    }
    return e;
}

}  // namespace structboost::graphcut
