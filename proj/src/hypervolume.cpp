#include "sbmrobust/hypervolume.hpp"

#include <algorithm>
#include <numeric>

namespace sbmrobust {

bool dominates(const Objectives& a, const Objectives& b)
{
    return a.targeted >= b.targeted && a.random >= b.random &&
           (a.targeted > b.targeted || a.random > b.random);
}

namespace {

struct Prepared {
    std::vector<Objectives> points;   // clamped onto the reference
    std::vector<std::size_t> order;   // descending first objective, then second
    std::size_t clamped = 0;
};

Prepared prepare(std::span<const Objectives> points, const Objectives& reference)
{
    Prepared p;
    p.points.reserve(points.size());
    for (const auto& pt : points) {
        if (!(pt.targeted > reference.targeted && pt.random > reference.random)) ++p.clamped;
        p.points.push_back({std::max(pt.targeted, reference.targeted),
                            std::max(pt.random, reference.random)});
    }
    p.order.resize(points.size());
    std::iota(p.order.begin(), p.order.end(), std::size_t{0});
    std::sort(p.order.begin(), p.order.end(), [&](std::size_t i, std::size_t j) {
        const auto& a = p.points[i];
        const auto& b = p.points[j];
        return a.targeted != b.targeted ? a.targeted > b.targeted : a.random > b.random;
    });
    return p;
}

double sweep(const Prepared& p, const Objectives& reference, std::size_t skip)
{
    double area = 0.0;
    double level = reference.random;
    for (std::size_t i : p.order) {
        if (i == skip) continue;
        const auto& pt = p.points[i];
        if (pt.random > level) {
            area += (pt.targeted - reference.targeted) * (pt.random - level);
            level = pt.random;
        }
    }
    return area;
}

}  // namespace

HypervolumeResult hypervolume_2d(std::span<const Objectives> points, const Objectives& reference)
{
    const Prepared p = prepare(points, reference);
    return {sweep(p, reference, points.size()), p.clamped};
}

double hv_contribution(std::span<const Objectives> points, std::size_t index,
                       const Objectives& reference)
{
    const Prepared p = prepare(points, reference);
    return sweep(p, reference, points.size()) - sweep(p, reference, index);
}

std::vector<double> hv_contributions(std::span<const Objectives> points, const Objectives& reference)
{
    const Prepared p = prepare(points, reference);
    const double total = sweep(p, reference, points.size());
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = total - sweep(p, reference, i);
    return out;
}

std::vector<std::vector<std::size_t>> nondominated_fronts(std::span<const Objectives> points)
{
    const std::size_t n = points.size();
    std::vector<std::size_t> dominated_by(n, 0);
    std::vector<std::vector<std::size_t>> dominating(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominating[i].push_back(j);
                ++dominated_by[j];
            } else if (dominates(points[j], points[i])) {
                dominating[j].push_back(i);
                ++dominated_by[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dominated_by[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current)
            for (std::size_t j : dominating[i])
                if (--dominated_by[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

}  // namespace sbmrobust
