#include "shiftlab/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "shiftlab/errors.hpp"

namespace shiftlab {

void AssignmentInstance::check() const {
    if (!groups.empty() && groups.size() != weights.size()) {
        throw validation_error("DimensionMismatch", "groups must cover every unit");
    }
    for (const auto& row : weights) {
        if (row.size() != capacities.size()) {
            throw validation_error("DimensionMismatch",
                                   "weight rows must match the location count");
        }
        for (double w : row) {
            if (!std::isfinite(w)) {
                throw validation_error("NonFiniteValue", "weights must be finite");
            }
        }
    }
    for (int c : capacities) {
        if (c < 0) {
            throw validation_error("NegativeCapacity", "capacities must be nonnegative");
        }
    }
    long long total_cap = 0;
    for (int c : capacities) total_cap += c;
    if (total_cap < static_cast<long long>(n_units())) {
        throw infeasible_error("Infeasible", "total capacity " + std::to_string(total_cap) +
                                                 " below unit count " +
                                                 std::to_string(n_units()));
    }
}

namespace {

struct Grouped {
    std::vector<std::vector<double>> w;            // summed member rows
    std::vector<int> size;                         // persons per group
    std::vector<std::vector<std::size_t>> members; // original unit indices
    std::vector<std::string> name;
};

Grouped collapse_groups(const AssignmentInstance& inst) {
    Grouped g;
    const std::size_t n = inst.n_units();
    const std::size_t L = inst.n_locations();
    std::vector<std::ptrdiff_t> group_of(n, -1);
    std::vector<std::string> tokens(n);
    for (std::size_t i = 0; i < n; ++i) {
        tokens[i] = inst.groups.empty() ? std::string() : inst.groups[i];
    }
    // Groups keep first-member order; empty tokens stay singletons.
    std::vector<std::pair<std::string, std::size_t>> seen;
    for (std::size_t i = 0; i < n; ++i) {
        std::ptrdiff_t gid = -1;
        if (!tokens[i].empty()) {
            for (const auto& [tok, id] : seen) {
                if (tok == tokens[i]) {
                    gid = static_cast<std::ptrdiff_t>(id);
                    break;
                }
            }
        }
        if (gid < 0) {
            gid = static_cast<std::ptrdiff_t>(g.w.size());
            if (!tokens[i].empty()) seen.emplace_back(tokens[i], static_cast<std::size_t>(gid));
            g.w.emplace_back(L, 0.0);
            g.size.push_back(0);
            g.members.emplace_back();
            g.name.push_back(tokens[i].empty() ? "unit " + std::to_string(i) : tokens[i]);
        }
        group_of[i] = gid;
        auto gi = static_cast<std::size_t>(gid);
        for (std::size_t j = 0; j < L; ++j) g.w[gi][j] += inst.weights[i][j];
        g.size[gi] += 1;
        g.members[gi].push_back(i);
    }
    return g;
}

Assignment to_assignment(const AssignmentInstance& inst, const Grouped& g,
                         const std::vector<std::size_t>& group_loc) {
    Assignment out;
    out.location_of.assign(inst.n_units(), 0);
    for (std::size_t gi = 0; gi < g.members.size(); ++gi) {
        for (std::size_t unit : g.members[gi]) out.location_of[unit] = group_loc[gi];
    }
    double obj = 0.0;
    for (std::size_t i = 0; i < inst.n_units(); ++i) obj += inst.weights[i][out.location_of[i]];
    out.objective = obj;
    return out;
}

// Depth-first branch and bound over group -> location choices. The bound
// ignores joint capacity interactions (each remaining group takes its best
// location that could still fit it), which is admissible. Pruning with
// bound <= incumbent keeps the first optimum found, i.e. the
// lexicographically smallest one in original group order.
struct BranchAndBound {
    const Grouped& g;
    const std::size_t L;
    std::vector<int> residual;
    std::vector<std::size_t> current;
    std::vector<std::size_t> best_assign;
    double best_value = -std::numeric_limits<double>::infinity();
    bool found = false;
    std::size_t deepest_stuck = 0;

    BranchAndBound(const Grouped& grouped, const std::vector<int>& caps)
        : g(grouped), L(caps.size()), residual(caps), current(grouped.w.size(), 0) {}

    double remaining_bound(std::size_t from) const {
        double bound = 0.0;
        for (std::size_t gi = from; gi < g.w.size(); ++gi) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < L; ++j) {
                if (residual[j] >= g.size[gi]) best = std::max(best, g.w[gi][j]);
            }
            if (best == -std::numeric_limits<double>::infinity()) {
                return best;  // some group cannot fit at all
            }
            bound += best;
        }
        return bound;
    }

    void search(std::size_t gi, double value) {
        if (gi == g.w.size()) {
            if (!found || value > best_value) {
                found = true;
                best_value = value;
                best_assign = current;
            }
            return;
        }
        const double bound = remaining_bound(gi);
        if (bound == -std::numeric_limits<double>::infinity()) {
            deepest_stuck = std::max(deepest_stuck, gi);
            return;
        }
        if (found && value + bound <= best_value) return;
        for (std::size_t j = 0; j < L; ++j) {
            if (residual[j] < g.size[gi]) continue;
            residual[j] -= g.size[gi];
            current[gi] = j;
            search(gi + 1, value + g.w[gi][j]);
            residual[j] += g.size[gi];
        }
    }
};

// Successive-shortest-path min cost flow specialized to the bipartite
// unit/location graph with unit supplies. Costs are negated weights.
struct UnitFlowSolver {
    struct Edge {
        std::size_t to;
        int cap;
        double cost;
        std::size_t rev;
    };

    std::vector<std::vector<Edge>> adj;
    std::size_t n_nodes;

    explicit UnitFlowSolver(std::size_t nodes) : adj(nodes), n_nodes(nodes) {}

    void add_edge(std::size_t from, std::size_t to, int cap, double cost) {
        adj[from].push_back({to, cap, cost, adj[to].size()});
        adj[to].push_back({from, 0, -cost, adj[from].size() - 1});
    }

    // Sends `flow` units from s to t; returns false if s-t capacity runs out.
    bool solve(std::size_t s, std::size_t t, int flow) {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> potential(n_nodes, 0.0);
        // Initial potentials via Bellman-Ford (costs may be negative).
        {
            std::vector<double> dist(n_nodes, inf);
            dist[s] = 0.0;
            for (std::size_t iter = 0; iter + 1 < n_nodes; ++iter) {
                bool changed = false;
                for (std::size_t u = 0; u < n_nodes; ++u) {
                    if (dist[u] == inf) continue;
                    for (const Edge& e : adj[u]) {
                        if (e.cap > 0 && dist[u] + e.cost < dist[e.to]) {
                            dist[e.to] = dist[u] + e.cost;
                            changed = true;
                        }
                    }
                }
                if (!changed) break;
            }
            potential = dist;
        }
        while (flow > 0) {
            // Dijkstra over reduced costs.
            std::vector<double> dist(n_nodes, inf);
            std::vector<std::pair<std::size_t, std::size_t>> parent(n_nodes, {SIZE_MAX, 0});
            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
            dist[s] = 0.0;
            heap.push({0.0, s});
            while (!heap.empty()) {
                auto [d, u] = heap.top();
                heap.pop();
                if (d > dist[u]) continue;
                for (std::size_t ei = 0; ei < adj[u].size(); ++ei) {
                    const Edge& e = adj[u][ei];
                    if (e.cap <= 0 || dist[u] == inf || potential[u] == inf ||
                        potential[e.to] == inf) {
                        continue;
                    }
                    const double nd = dist[u] + e.cost + potential[u] - potential[e.to];
                    if (nd < dist[e.to] - 1e-15) {
                        dist[e.to] = nd;
                        parent[e.to] = {u, ei};
                        heap.push({nd, e.to});
                    }
                }
            }
            if (dist[t] == inf) return false;
            for (std::size_t u = 0; u < n_nodes; ++u) {
                if (dist[u] < inf && potential[u] < inf) potential[u] += dist[u];
            }
            // Unit capacities on the left: one unit per augmentation.
            int push = flow;
            for (std::size_t v = t; v != s;) {
                auto [u, ei] = parent[v];
                push = std::min(push, adj[u][ei].cap);
                v = u;
            }
            for (std::size_t v = t; v != s;) {
                auto [u, ei] = parent[v];
                adj[u][ei].cap -= push;
                adj[adj[u][ei].to][adj[u][ei].rev].cap += push;
                v = u;
            }
            flow -= push;
        }
        return true;
    }
};

Assignment solve_singletons_flow(const AssignmentInstance& inst, const Grouped& g) {
    const std::size_t G = g.w.size();
    const std::size_t L = inst.n_locations();
    const std::size_t source = 0;
    const std::size_t sink = 1 + G + L;
    UnitFlowSolver flow(sink + 1);
    for (std::size_t gi = 0; gi < G; ++gi) flow.add_edge(source, 1 + gi, 1, 0.0);
    for (std::size_t gi = 0; gi < G; ++gi) {
        for (std::size_t j = 0; j < L; ++j) {
            flow.add_edge(1 + gi, 1 + G + j, 1, -g.w[gi][j]);
        }
    }
    for (std::size_t j = 0; j < L; ++j) {
        flow.add_edge(1 + G + j, sink, inst.capacities[j], 0.0);
    }
    if (!flow.solve(source, sink, static_cast<int>(G))) {
        throw infeasible_error("Infeasible", "flow could not place every unit");
    }
    std::vector<std::size_t> group_loc(G, 0);
    for (std::size_t gi = 0; gi < G; ++gi) {
        for (const auto& e : flow.adj[1 + gi]) {
            if (e.to >= 1 + G && e.to < 1 + G + L && e.cap == 0) {
                group_loc[gi] = e.to - 1 - G;
                break;
            }
        }
    }
    return to_assignment(inst, g, group_loc);
}

}  // namespace

Assignment solve_assignment(const AssignmentInstance& instance) {
    instance.check();
    if (instance.n_units() == 0) return {{}, 0.0};
    if (instance.n_locations() == 0) {
        throw infeasible_error("Infeasible", "no locations");
    }
    const Grouped g = collapse_groups(instance);
    const int max_cap = *std::max_element(instance.capacities.begin(), instance.capacities.end());
    for (std::size_t gi = 0; gi < g.size.size(); ++gi) {
        if (g.size[gi] > max_cap) {
            throw infeasible_error("Infeasible", "group '" + g.name[gi] +
                                                     "' exceeds every location capacity");
        }
    }
    const bool all_singletons =
        std::all_of(g.size.begin(), g.size.end(), [](int s) { return s == 1; });
    if (all_singletons) {
        return solve_singletons_flow(instance, g);
    }
    BranchAndBound bnb(g, instance.capacities);
    bnb.search(0, 0.0);
    if (!bnb.found) {
        throw infeasible_error("Infeasible", "no feasible placement; packing blocked at group '" +
                                                 g.name[bnb.deepest_stuck] + "'");
    }
    return to_assignment(instance, g, bnb.best_assign);
}

Assignment brute_force_assignment(const AssignmentInstance& instance) {
    instance.check();
    if (instance.n_units() == 0) return {{}, 0.0};
    const Grouped g = collapse_groups(instance);
    if (g.w.size() > 8 || instance.n_locations() > 5) {
        throw validation_error("InstanceTooLarge",
                               "brute force is limited to 8 groups and 5 locations");
    }
    const std::size_t G = g.w.size();
    const std::size_t L = instance.n_locations();
    std::vector<int> residual(instance.capacities);
    std::vector<std::size_t> current(G, 0);
    std::vector<std::size_t> best;
    double best_value = -std::numeric_limits<double>::infinity();
    bool found = false;

    // Plain exhaustive recursion; first optimum in lexicographic order wins.
    auto recurse = [&](auto&& self, std::size_t gi, double value) -> void {
        if (gi == G) {
            if (!found || value > best_value) {
                found = true;
                best_value = value;
                best = current;
            }
            return;
        }
        for (std::size_t j = 0; j < L; ++j) {
            if (residual[j] < g.size[gi]) continue;
            residual[j] -= g.size[gi];
            current[gi] = j;
            self(self, gi + 1, value + g.w[gi][j]);
            residual[j] += g.size[gi];
        }
    };
    recurse(recurse, 0, 0.0);
    if (!found) {
        throw infeasible_error("Infeasible", "no feasible placement exists");
    }
    return to_assignment(instance, g, best);
}

double evaluate_impact(const Assignment& assignment,
                       const std::vector<std::vector<double>>& truth_weights) {
    if (truth_weights.size() != assignment.location_of.size()) {
        throw validation_error("DimensionMismatch", "truth weights must cover every unit");
    }
    double impact = 0.0;
    for (std::size_t i = 0; i < assignment.location_of.size(); ++i) {
        const std::size_t j = assignment.location_of[i];
        if (j >= truth_weights[i].size()) {
            throw validation_error("DimensionMismatch", "truth weights missing a location");
        }
        impact += truth_weights[i][j];
    }
    return impact;
}

ImpactComparison evaluate_impact(const Assignment& assignment,
                                 const std::vector<std::vector<double>>& truth_weights,
                                 const Assignment& baseline) {
    ImpactComparison out;
    out.impact = evaluate_impact(assignment, truth_weights);
    out.baseline_impact = evaluate_impact(baseline, truth_weights);
    out.delta = out.impact - out.baseline_impact;
    return out;
}

}  // namespace shiftlab
