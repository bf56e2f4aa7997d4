// Minimum-cost pairing of loaded atoms with target vacancies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "atomcycle/planner.hpp"

namespace atomcycle {
namespace {

struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

CostMatrix euclidean_costs(const LatticeGeometry& g, std::span<const SiteIndex> rows, std::span<const SiteIndex> cols) {
    CostMatrix c{rows.size(), cols.size(), std::vector<double>(rows.size() * cols.size())};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Point a = g.position(rows[i]);
        for (std::size_t j = 0; j < cols.size(); ++j) c.values[i * cols.size() + j] = distance(a, g.position(cols[j]));
    }
    return c;
}

// Hungarian algorithm with potentials for rows <= cols. Returns the column
// assigned to every row.
std::vector<std::size_t> hungarian(const CostMatrix& a) {
    const std::size_t n = a.rows;
    const std::size_t m = a.cols;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    std::vector<double> minv(m + 1);
    std::vector<char> used(m + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a.at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assigned(n);
    for (std::size_t j = 1; j <= m; ++j)
        if (p[j] != 0) assigned[p[j] - 1] = j - 1;
    return assigned;
}

// Some optimal matching uses, for every row, one of that row's `rows` cheapest
// columns, so the union of those candidate sets is an exact reduction.
std::vector<std::size_t> exact_assignment(const CostMatrix& full) {
    const std::size_t n = full.rows;
    const std::size_t m = full.cols;
    std::vector<char> candidate(m, 0);
    if (n >= m) {
        std::fill(candidate.begin(), candidate.end(), 1);
    } else {
        std::vector<std::size_t> order(m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) order[j] = j;
            auto cheaper = [&](std::size_t x, std::size_t y) {
                const double cx = full.at(i, x);
                const double cy = full.at(i, y);
                return cx < cy || (cx == cy && x < y);
            };
            std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n - 1), order.end(), cheaper);
            for (std::size_t k = 0; k < n; ++k) candidate[order[k]] = 1;
        }
    }
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < m; ++j)
        if (candidate[j]) kept.push_back(j);

    CostMatrix reduced{n, kept.size(), std::vector<double>(n * kept.size())};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < kept.size(); ++k) reduced.values[i * kept.size() + k] = full.at(i, kept[k]);

    std::vector<std::size_t> assigned = hungarian(reduced);
    for (std::size_t& j : assigned) j = kept[j];
    return assigned;
}

std::vector<std::size_t> greedy_assignment(const CostMatrix& c) {
    std::vector<char> taken(c.cols, 0);
    std::vector<std::size_t> assigned(c.rows);
    for (std::size_t i = 0; i < c.rows; ++i) {
        std::size_t best = c.cols;
        for (std::size_t j = 0; j < c.cols; ++j) {
            if (taken[j]) continue;
            if (best == c.cols || c.at(i, j) < c.at(i, best)) best = j;
        }
        taken[best] = 1;
        assigned[i] = best;
    }
    return assigned;
}

std::vector<SiteIndex> sorted_unique(std::span<const SiteIndex> sites) {
    std::vector<SiteIndex> out(sites.begin(), sites.end());
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw std::invalid_argument("assign_targets: duplicate site in input");
    return out;
}

}  // namespace

std::vector<Pairing> assign_targets(const LatticeGeometry& geometry, std::span<const SiteIndex> loaded,
                                    std::span<const SiteIndex> vacant, const AssignmentOptions& options) {
    const std::vector<SiteIndex> sources = sorted_unique(loaded);
    const std::vector<SiteIndex> targets = sorted_unique(vacant);
    if (sources.empty() || targets.empty()) return {};

    // Rows are the smaller side.
    const bool transposed = sources.size() > targets.size();
    const std::vector<SiteIndex>& rows = transposed ? targets : sources;
    const std::vector<SiteIndex>& cols = transposed ? sources : targets;
    const CostMatrix costs = euclidean_costs(geometry, rows, cols);
    const std::vector<std::size_t> assigned =
        rows.size() <= options.exact_limit ? exact_assignment(costs) : greedy_assignment(costs);

    std::vector<Pairing> pairs;
    pairs.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (transposed)
            pairs.push_back(Pairing{cols[assigned[i]], rows[i]});
        else
            pairs.push_back(Pairing{rows[i], cols[assigned[i]]});
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pairing& a, const Pairing& b) { return a.source < b.source; });
    return pairs;
}

double pairing_cost(const LatticeGeometry& geometry, std::span<const Pairing> pairs) {
    double total = 0.0;
    for (const Pairing& p : pairs) total += distance(geometry.position(p.source), geometry.position(p.destination));
    return total;
}

}  // namespace atomcycle
