#include "axgen/nsga2.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace axgen::evolver {

bool pareto_dominates(const Objectives& a, const Objectives& b) {
    return a.error <= b.error && a.area <= b.area && (a.error < b.error || a.area < b.area);
}

bool dominates(const Objectives& a, const Objectives& b) {
    const bool fa = a.feasible(), fb = b.feasible();
    if (fa && !fb) return true;
    if (!fa && fb) return false;
    if (!fa) return a.violation < b.violation;
    return pareto_dominates(a, b);
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Objectives> pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dom_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(pop[p], pop[q]))
                dominated[p].push_back(q);
            else if (dominates(pop[q], pop[p]))
                ++dom_count[p];
        }
        if (dom_count[p] == 0) current.push_back(p);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t p : current)
            for (std::size_t q : dominated[p])
                if (--dom_count[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const Objectives> pop, std::span<const std::size_t> front) {
    const std::size_t m = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(m, 0.0);
    if (m <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<std::size_t> order(m);
    auto sweep = [&](auto key) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return key(pop[front[a]]) < key(pop[front[b]]); });
        const double lo = key(pop[front[order.front()]]);
        const double hi = key(pop[front[order.back()]]);
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        if (hi <= lo) return;
        for (std::size_t k = 1; k + 1 < m; ++k)
            dist[order[k]] += (key(pop[front[order[k + 1]]]) - key(pop[front[order[k - 1]]])) / (hi - lo);
    };
    sweep([](const Objectives& o) { return o.error; });
    sweep([](const Objectives& o) { return static_cast<double>(o.area); });
    return dist;
}

double hypervolume(std::span<const Objectives> points, double ref_error, double ref_area) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : points)
        if (p.error < ref_error && static_cast<double>(p.area) < ref_area)
            pts.emplace_back(p.error, static_cast<double>(p.area));
    std::sort(pts.begin(), pts.end());
    double volume = 0.0;
    double best_area = ref_area;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        best_area = std::min(best_area, pts[i].second);
        const double next_error = i + 1 < pts.size() ? pts[i + 1].first : ref_error;
        volume += (next_error - pts[i].first) * (ref_area - best_area);
    }
    return volume;
}

}  // namespace axgen::evolver
