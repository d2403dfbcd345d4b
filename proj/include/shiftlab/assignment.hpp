#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace shiftlab {

// Units to be placed into locations. weights[i][j] is the predicted value
// of placing unit i at location j; capacities count persons; units sharing
// a non-empty group token must be co-located.
struct AssignmentInstance {
    std::vector<std::vector<double>> weights;
    std::vector<int> capacities;
    std::vector<std::string> groups;  // empty vector or empty tokens = singletons

    std::size_t n_units() const { return weights.size(); }
    std::size_t n_locations() const { return capacities.size(); }

    void check() const;  // structural invariants; throws on violation
};

struct Assignment {
    std::vector<std::size_t> location_of;  // per unit
    double objective = 0.0;
};

// Exact solver. Groups collapse to super-units (summed weight rows,
// person-count sizes). All-singleton instances route through min-cost
// flow; grouped instances use depth-first branch and bound, since a flow
// relaxation may split a group across locations. Deterministic: among
// optima the lexicographically smallest location vector (in original group
// order) wins.
Assignment solve_assignment(const AssignmentInstance& instance);

// Exhaustive oracle for small instances (<= 8 group super-units and
// <= 5 locations); same tie-breaking rule as the solver.
Assignment brute_force_assignment(const AssignmentInstance& instance);

// Total truth-weight value collected by an assignment.
double evaluate_impact(const Assignment& assignment,
                       const std::vector<std::vector<double>>& truth_weights);

struct ImpactComparison {
    double impact = 0.0;
    double baseline_impact = 0.0;
    double delta = 0.0;
};

ImpactComparison evaluate_impact(const Assignment& assignment,
                                 const std::vector<std::vector<double>>& truth_weights,
                                 const Assignment& baseline);

}  // namespace shiftlab
