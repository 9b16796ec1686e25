#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace axgen::evolver {

/// Both objectives are minimized. `violation` is how far the accuracy falls
/// below the feasibility bound; zero means feasible.
struct Objectives {
    double error = 0.0;
    std::int64_t area = 0;
    double violation = 0.0;

    bool feasible() const { return violation <= 0.0; }
};

/// Plain Pareto dominance on (error, area).
bool pareto_dominates(const Objectives& a, const Objectives& b);

/// Constrained dominance: feasible beats infeasible; between two infeasible
/// solutions the smaller violation wins; between two feasible ones Pareto
/// dominance applies.
bool dominates(const Objectives& a, const Objectives& b);

/// Fast non-dominated sort. Fronts partition the indices; within a front
/// indices are ascending.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Objectives> pop);

/// Crowding distance of each member of `front` (same order). Boundary points
/// on either objective get +infinity.
std::vector<double> crowding_distance(std::span<const Objectives> pop, std::span<const std::size_t> front);

/// Area dominated by the points inside the box [0, ref_error] x [0, ref_area].
/// Points outside the box contribute nothing.
double hypervolume(std::span<const Objectives> points, double ref_error, double ref_area);

}  // namespace axgen::evolver
