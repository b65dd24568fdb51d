#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace chesscv {

/// Agglomerative 2-cluster split with Ward's minimum-variance linkage,
/// run on a precomputed distance matrix (row-major n*n). Returns a 0/1
/// label per item. Lance-Williams recurrence on squared distances.
inline std::vector<int> ward_two_way_split(const std::vector<double>& dist, std::size_t n) {
    if (n < 2) throw std::invalid_argument("ward_two_way_split: need >= 2 items");
    if (dist.size() != n * n)
        throw std::invalid_argument("ward_two_way_split: distance matrix size mismatch");

    std::vector<double> d2(n * n);
    for (std::size_t i = 0; i < n * n; ++i) d2[i] = dist[i] * dist[i];
    std::vector<std::size_t> size(n, 1);
    std::vector<bool> active(n, true);
    std::vector<std::vector<int>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};

    for (std::size_t merges = 0; merges < n - 2; ++merges) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (d2[i * n + j] < best) {
                    best = d2[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        // Merge bj into bi; update Ward distances to every other cluster.
        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const double ni = static_cast<double>(size[bi]);
            const double nj = static_cast<double>(size[bj]);
            const double nk = static_cast<double>(size[k]);
            const double t = ni + nj + nk;
            const double v = ((ni + nk) * d2[bi * n + k] + (nj + nk) * d2[bj * n + k] -
                              nk * d2[bi * n + bj]) /
                             t;
            d2[bi * n + k] = d2[k * n + bi] = v;
        }
        size[bi] += size[bj];
        active[bj] = false;
        members[bi].insert(members[bi].end(), members[bj].begin(), members[bj].end());
        members[bj].clear();
    }

    std::vector<int> labels(n, 0);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        for (int idx : members[i]) labels[static_cast<std::size_t>(idx)] = next;
        ++next;
    }
    return labels;
}

/// Plain DBSCAN over items with a caller-supplied distance functor.
/// Returns one cluster id per item; with min_pts == 1 every item is core,
/// so ids partition the data into eps-connected components (no noise).
/// With min_pts > 1, noise items get id -1.
template <typename DistFn>
std::vector<int> dbscan(std::size_t n, double eps, std::size_t min_pts, DistFn&& dist_fn) {
    std::vector<int> labels(n, -2);  // -2 unvisited, -1 noise
    std::vector<std::size_t> stack;
    int cluster = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != -2) continue;
        std::vector<std::size_t> neigh;
        for (std::size_t j = 0; j < n; ++j)
            if (dist_fn(i, j) <= eps) neigh.push_back(j);
        if (neigh.size() < min_pts) {
            labels[i] = -1;
            continue;
        }
        labels[i] = cluster;
        stack.assign(neigh.begin(), neigh.end());
        while (!stack.empty()) {
            const std::size_t q = stack.back();
            stack.pop_back();
            if (labels[q] == -1) labels[q] = cluster;  // border point
            if (labels[q] != -2) continue;
            labels[q] = cluster;
            std::vector<std::size_t> qn;
            for (std::size_t j = 0; j < n; ++j)
                if (dist_fn(q, j) <= eps) qn.push_back(j);
            if (qn.size() >= min_pts)
                for (std::size_t j : qn) stack.push_back(j);
        }
        ++cluster;
    }
    return labels;
}

}  // namespace chesscv
