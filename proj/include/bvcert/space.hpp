#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "bvcert/common.hpp"

namespace bvcert {

struct graph_edge {
    int a = 0;
    int b = 0;
    double length = 0.0;
};

/// Present when the space is an axis-aligned sample of a rectangle:
/// nx*ny points at cell centers, spacings hx and hy, index = iy*nx + ix.
struct grid_tag {
    int nx = 0;
    int ny = 0;
    double hx = 0.0;
    double hy = 0.0;
};

/// A finite metric measure space: point labels, a full symmetric distance
/// matrix, and strictly positive point masses. Immutable after load; every
/// operation in the library takes it by const reference.
struct metric_measure_space {
    std::string name;
    int n = 0;
    std::vector<std::string> labels;
    std::vector<double> dist; // row-major n*n
    std::vector<double> mass;
    std::vector<graph_edge> edges; // retained when the metric is graph- or grid-backed
    bool graph_backed = false;     // dist equals shortest-path length along edges
    std::optional<grid_tag> grid;
    double diameter = 0.0;
    double total_mass = 0.0;

    double d(int i, int j) const { return dist[static_cast<size_t>(i) * n + j]; }
};

struct ball {
    int center = 0;
    double radius = 0.0;
    std::vector<int> members; // ascending point indices, strict inequality set
};

/// One real value per point (the function u).
struct scalar_field {
    std::vector<double> values;
};

/// One nonnegative mass per point (the measures nu, lambda).
struct point_measure {
    std::vector<double> masses;
};

inline void require_field(const metric_measure_space& space, const scalar_field& u) {
    if (static_cast<int>(u.values.size()) != space.n)
        throw input_error("scalar field has " + std::to_string(u.values.size()) +
                          " values, space has " + std::to_string(space.n) + " points");
    for (double v : u.values)
        if (!std::isfinite(v)) throw input_error("scalar field contains a non-finite value");
}

inline void require_measure(const metric_measure_space& space, const point_measure& nu) {
    if (static_cast<int>(nu.masses.size()) != space.n)
        throw input_error("point measure has " + std::to_string(nu.masses.size()) +
                          " masses, space has " + std::to_string(space.n) + " points");
    for (double w : nu.masses)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw input_error("point measure masses must be finite and nonnegative");
}

namespace detail {

/// Shortest-path distances from every source along the edge list.
/// Dijkstra with (distance, node) keys; ties resolve by node index, so the
/// result is independent of edge-list order beyond the adjacency sort.
inline std::vector<double> all_pairs_shortest_paths(int n, const std::vector<graph_edge>& edges) {
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(n));
    for (const auto& e : edges) {
        adj[static_cast<size_t>(e.a)].emplace_back(e.b, e.length);
        adj[static_cast<size_t>(e.b)].emplace_back(e.a, e.length);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    std::vector<double> dist(static_cast<size_t>(n) * n, kInf);
    std::vector<double> row(static_cast<size_t>(n));
    using node = std::pair<double, int>;
    for (int s = 0; s < n; ++s) {
        std::fill(row.begin(), row.end(), kInf);
        row[static_cast<size_t>(s)] = 0.0;
        std::priority_queue<node, std::vector<node>, std::greater<node>> heap;
        heap.emplace(0.0, s);
        while (!heap.empty()) {
            auto [dcur, x] = heap.top();
            heap.pop();
            if (dcur > row[static_cast<size_t>(x)]) continue;
            for (auto [y, w] : adj[static_cast<size_t>(x)]) {
                double cand = dcur + w;
                if (cand < row[static_cast<size_t>(y)]) {
                    row[static_cast<size_t>(y)] = cand;
                    heap.emplace(cand, y);
                }
            }
        }
        std::copy(row.begin(), row.end(), dist.begin() + static_cast<size_t>(s) * n);
    }
    return dist;
}

inline void validate_metric(metric_measure_space& space, bool symmetrize_roundoff) {
    const int n = space.n;
    auto at = [&](int i, int j) -> double& { return space.dist[static_cast<size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i) {
        if (at(i, i) != 0.0)
            throw input_error("dist(" + std::to_string(i) + "," + std::to_string(i) + ") must be 0");
        for (int j = i + 1; j < n; ++j) {
            double a = at(i, j), b = at(j, i);
            if (!std::isfinite(a) || !std::isfinite(b))
                throw input_error("distances must be finite (is the graph connected?)");
            if (symmetrize_roundoff) {
                if (std::fabs(a - b) > kMetricTol)
                    throw input_error("shortest-path asymmetry beyond tolerance at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
                at(j, i) = a;
            } else if (a != b) {
                throw input_error("distance matrix is not symmetric at (" + std::to_string(i) +
                                  "," + std::to_string(j) + ")");
            }
            if (!(a > 0.0))
                throw input_error("dist(" + std::to_string(i) + "," + std::to_string(j) +
                                  ") must be positive for distinct points");
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (at(i, k) > at(i, j) + at(j, k) + kMetricTol)
                    throw input_error("triangle inequality fails for points (" + std::to_string(i) +
                                      "," + std::to_string(j) + "," + std::to_string(k) + ")");
    double diam = 0.0;
    for (double v : space.dist) diam = std::max(diam, v);
    space.diameter = diam;
}

inline void validate_masses(metric_measure_space& space) {
    if (static_cast<int>(space.mass.size()) != space.n)
        throw input_error("mu has " + std::to_string(space.mass.size()) + " entries, expected " +
                          std::to_string(space.n));
    double total = 0.0;
    for (double m : space.mass) {
        if (!(m > 0.0) || !std::isfinite(m)) throw input_error("every point mass must be positive and finite");
        total += m;
    }
    space.total_mass = total;
}

inline void validate_edges(int n, const std::vector<graph_edge>& edges) {
    for (const auto& e : edges) {
        if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
            throw input_error("edge endpoint out of range");
        if (e.a == e.b) throw input_error("self-loop edges are not allowed");
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            throw input_error("edge lengths must be positive and finite");
    }
}

inline void default_labels(metric_measure_space& space) {
    if (!space.labels.empty()) return;
    space.labels.reserve(static_cast<size_t>(space.n));
    for (int i = 0; i < space.n; ++i) space.labels.push_back(std::to_string(i));
}

} // namespace detail

/// Finalizes a space whose dist matrix was supplied directly (matrix metric).
/// When edges are also present they describe curves in the ambient metric,
/// so each edge must be at least as long as the distance it connects.
inline metric_measure_space make_matrix_space(std::string name, int n, std::vector<double> dist,
                                              std::vector<double> mass,
                                              std::vector<graph_edge> edges = {},
                                              std::vector<std::string> labels = {}) {
    if (n <= 0) throw input_error("space must contain at least one point");
    if (static_cast<int>(dist.size()) != n * n) throw input_error("distance matrix must be n-by-n");
    metric_measure_space space;
    space.name = std::move(name);
    space.n = n;
    space.dist = std::move(dist);
    space.mass = std::move(mass);
    space.labels = std::move(labels);
    detail::validate_edges(n, edges);
    space.edges = std::move(edges);
    detail::validate_metric(space, /*symmetrize_roundoff=*/false);
    detail::validate_masses(space);
    detail::default_labels(space);
    for (const auto& e : space.edges)
        if (e.length < space.d(e.a, e.b) - kMetricTol)
            throw input_error("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                              ") is shorter than the ambient distance it connects");
    return space;
}

/// Finalizes a graph-backed space: dist is the shortest-path length metric.
inline metric_measure_space make_graph_space(std::string name, int n, std::vector<graph_edge> edges,
                                             std::vector<double> mass,
                                             std::vector<std::string> labels = {},
                                             std::optional<grid_tag> grid = std::nullopt) {
    if (n <= 0) throw input_error("space must contain at least one point");
    detail::validate_edges(n, edges);
    metric_measure_space space;
    space.name = std::move(name);
    space.n = n;
    space.dist = detail::all_pairs_shortest_paths(n, edges);
    for (double v : space.dist)
        if (!std::isfinite(v)) throw input_error("graph is not connected");
    space.mass = std::move(mass);
    space.labels = std::move(labels);
    space.edges = std::move(edges);
    space.graph_backed = true;
    space.grid = grid;
    detail::validate_metric(space, /*symmetrize_roundoff=*/true);
    detail::validate_masses(space);
    detail::default_labels(space);
    return space;
}

/// Axis-aligned sample of a rectangle: nx*ny cell centers joined by a
/// 4-neighbor lattice with edge lengths hx and hy.
inline metric_measure_space make_grid_space(std::string name, int nx, int ny, double hx, double hy,
                                            std::vector<double> mass) {
    if (nx <= 0 || ny <= 0) throw input_error("grid dimensions must be positive");
    if (!(hx > 0.0) || !(hy > 0.0)) throw input_error("grid spacings must be positive");
    std::vector<graph_edge> edges;
    edges.reserve(static_cast<size_t>(2 * nx * ny));
    auto id = [nx](int ix, int iy) { return iy * nx + ix; };
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            if (ix + 1 < nx) edges.push_back({id(ix, iy), id(ix + 1, iy), hx});
            if (iy + 1 < ny) edges.push_back({id(ix, iy), id(ix, iy + 1), hy});
        }
    if (nx * ny == 1) {
        // single-cell grid: no edges, dist matrix is trivially [0]
        metric_measure_space space;
        space.name = std::move(name);
        space.n = 1;
        space.dist = {0.0};
        space.mass = std::move(mass);
        space.grid = grid_tag{nx, ny, hx, hy};
        detail::validate_masses(space);
        detail::default_labels(space);
        return space;
    }
    return make_graph_space(std::move(name), nx * ny, std::move(edges), std::move(mass), {},
                            grid_tag{nx, ny, hx, hy});
}

/// Open ball: members = {y : dist(y, center) < r}, strict inequality.
inline ball resolve_ball(const metric_measure_space& space, int center, double r) {
    if (center < 0 || center >= space.n) throw input_error("ball center out of range");
    if (!(r > 0.0)) throw input_error("ball radius must be positive");
    ball b;
    b.center = center;
    b.radius = r;
    for (int y = 0; y < space.n; ++y)
        if (space.d(center, y) < r) b.members.push_back(y);
    return b;
}

/// Distinct distances from the center, ascending, always starting at 0.
/// Realizable ball member sets are exactly {y : dist <= t} for these t.
inline std::vector<double> distance_breakpoints(const metric_measure_space& space, int center) {
    std::vector<double> t(static_cast<size_t>(space.n));
    for (int y = 0; y < space.n; ++y) t[static_cast<size_t>(y)] = space.d(center, y);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

/// The distinct values {dist(center, y) : dist(center, y) < R}, ascending.
/// {B(center, r) : 0 < r <= R} realizes exactly the sets {y : dist <= t}
/// for t in this list: a point at distance t is reachable iff some radius
/// r with t < r <= R exists, i.e. iff t < R.
inline std::vector<double> candidate_radii(const metric_measure_space& space, int center, double R) {
    if (center < 0 || center >= space.n) throw input_error("center out of range");
    if (!(R > 0.0)) throw input_error("radius bound must be positive");
    std::vector<double> t = distance_breakpoints(space, center);
    while (!t.empty() && !(t.back() < R)) t.pop_back();
    return t;
}

/// One ball per realizable member set at this center, radius chosen in the
/// interior of the realizing interval: midpoint of consecutive distance
/// values, and half a gap beyond the largest distance for the full set.
inline std::vector<ball> realizable_balls(const metric_measure_space& space, int center) {
    std::vector<double> t = distance_breakpoints(space, center);
    const size_t m = t.size();
    std::vector<ball> family;
    family.reserve(m);
    if (m == 1) { // isolated space of one point
        family.push_back(resolve_ball(space, center, 1.0));
        return family;
    }
    for (size_t i = 0; i + 1 < m; ++i)
        family.push_back(resolve_ball(space, center, 0.5 * (t[i] + t[i + 1])));
    family.push_back(resolve_ball(space, center, t[m - 1] + 0.5 * (t[m - 1] - t[m - 2])));
    return family;
}

/// Sum of point masses over the members of a set, in index order.
inline double set_mass(const metric_measure_space& space, const std::vector<int>& members) {
    double total = 0.0;
    for (int y : members) total += space.mass[static_cast<size_t>(y)];
    return total;
}

inline double set_measure(const point_measure& nu, const std::vector<int>& members) {
    double total = 0.0;
    for (int y : members) total += nu.masses[static_cast<size_t>(y)];
    return total;
}

} // namespace bvcert
