#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bvcert/common.hpp"
#include "bvcert/maximal.hpp"
#include "bvcert/space.hpp"

namespace bvcert {

enum class variation_mode { graph, grid };

inline variation_mode parse_variation_mode(const std::string& s) {
    if (s == "graph") return variation_mode::graph;
    if (s == "grid") return variation_mode::grid;
    throw input_error("unknown variation mode \"" + s + "\" (expected graph or grid)");
}

/// Discrete variation measure of u.
///
/// graph mode: nu({x}) = 1/2 * sum over edges x~y of w(x,y)|u(x)-u(y)|/d(x,y)
/// with the symmetric edge weight w(x,y) = (mass(x)+mass(y))/2.
///
/// grid mode: one-sided finite-difference gradient magnitude per cell times
/// the cell mass (forward difference, falling back to backward on the far
/// boundary).
inline point_measure variation_measure(const metric_measure_space& space, const scalar_field& u,
                                       variation_mode mode) {
    require_field(space, u);
    point_measure nu;
    nu.masses.assign(static_cast<size_t>(space.n), 0.0);
    if (mode == variation_mode::graph) {
        if (!space.graph_backed)
            throw input_error("graph-mode variation requires a graph-backed space");
        for (int x = 0; x < space.n; ++x) {
            double total = 0.0;
            for (const auto& e : space.edges) {
                if (e.a != x && e.b != x) continue;
                int y = e.a == x ? e.b : e.a;
                double w = 0.5 * (space.mass[static_cast<size_t>(x)] +
                                  space.mass[static_cast<size_t>(y)]);
                double du = std::fabs(u.values[static_cast<size_t>(x)] -
                                      u.values[static_cast<size_t>(y)]);
                if (du != 0.0) total += w * du / space.d(x, y);
            }
            nu.masses[static_cast<size_t>(x)] = 0.5 * total;
        }
        return nu;
    }
    if (!space.grid) throw input_error("grid-mode variation requires a grid-sampled space");
    const grid_tag g = *space.grid;
    auto val = [&](int ix, int iy) { return u.values[static_cast<size_t>(iy) * g.nx + ix]; };
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix) {
            double gx = 0.0, gy = 0.0;
            if (ix + 1 < g.nx) gx = (val(ix + 1, iy) - val(ix, iy)) / g.hx;
            else if (ix > 0) gx = (val(ix, iy) - val(ix - 1, iy)) / g.hx;
            if (iy + 1 < g.ny) gy = (val(ix, iy + 1) - val(ix, iy)) / g.hy;
            else if (iy > 0) gy = (val(ix, iy) - val(ix, iy - 1)) / g.hy;
            double mag = (gy == 0.0) ? std::fabs(gx)
                         : (gx == 0.0) ? std::fabs(gy)
                                       : std::sqrt(gx * gx + gy * gy);
            size_t i = static_cast<size_t>(iy) * g.nx + ix;
            nu.masses[i] = mag * space.mass[i];
        }
    return nu;
}

inline double total_variation(const metric_measure_space& space, const scalar_field& u,
                              variation_mode mode) {
    point_measure nu = variation_measure(space, u, mode);
    double total = 0.0;
    for (double w : nu.masses) total += w;
    return total;
}

struct path_check_report {
    bool passed = true;
    int from = -1;
    int to = -1;
    std::vector<int> path;          // first violating path, when any
    double difference = 0.0;        // |u(from) - u(to)|
    double integral = 0.0;          // line integral of g along the path
    long long paths_checked = 0;
};

/// Verifies the upper-gradient condition |u(x)-u(y)| <= integral of g along
/// every enumerated simple path, up to path_budget paths per pair. The line
/// integral is the trapezoid sum: edge length times the endpoint average of
/// g. Failure is a result carrying the first violating path.
inline path_check_report upper_gradient_check(const metric_measure_space& space,
                                              const scalar_field& u, const scalar_field& g,
                                              long long path_budget) {
    require_field(space, u);
    require_field(space, g);
    if (!space.graph_backed) throw input_error("upper-gradient check requires a graph-backed space");
    if (path_budget <= 0) throw input_error("path budget must be positive");
    for (double v : g.values)
        if (v < 0.0) throw input_error("upper gradient must be nonnegative");

    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<size_t>(space.n));
    for (const auto& e : space.edges) {
        adj[static_cast<size_t>(e.a)].emplace_back(e.b, e.length);
        adj[static_cast<size_t>(e.b)].emplace_back(e.a, e.length);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());

    path_check_report rep;
    std::vector<int> stack;
    std::vector<char> visited(static_cast<size_t>(space.n));

    for (int x = 0; x < space.n && rep.passed; ++x) {
        for (int y = x + 1; y < space.n && rep.passed; ++y) {
            const double target = std::fabs(u.values[static_cast<size_t>(x)] -
                                            u.values[static_cast<size_t>(y)]);
            long long budget = path_budget;
            stack.assign(1, x);
            std::fill(visited.begin(), visited.end(), 0);
            visited[static_cast<size_t>(x)] = 1;

            // depth-first enumeration in ascending neighbor order
            std::vector<std::pair<double, size_t>> frame; // (integral so far, next-neighbor index)
            frame.emplace_back(0.0, 0);
            while (!frame.empty() && budget > 0 && rep.passed) {
                int cur = stack.back();
                auto& [acc, next] = frame.back();
                if (cur == y) {
                    rep.paths_checked += 1;
                    budget -= 1;
                    if (!leq_with_slack(target, acc)) {
                        rep.passed = false;
                        rep.from = x;
                        rep.to = y;
                        rep.path = stack;
                        rep.difference = target;
                        rep.integral = acc;
                    }
                    visited[static_cast<size_t>(cur)] = 0;
                    stack.pop_back();
                    frame.pop_back();
                    continue;
                }
                if (next >= adj[static_cast<size_t>(cur)].size()) {
                    visited[static_cast<size_t>(cur)] = 0;
                    stack.pop_back();
                    frame.pop_back();
                    continue;
                }
                auto [nb, len] = adj[static_cast<size_t>(cur)][next];
                next += 1;
                if (visited[static_cast<size_t>(nb)]) continue;
                double step = len * 0.5 * (g.values[static_cast<size_t>(cur)] +
                                           g.values[static_cast<size_t>(nb)]);
                visited[static_cast<size_t>(nb)] = 1;
                stack.push_back(nb);
                frame.emplace_back(acc + step, 0);
            }
            std::fill(visited.begin(), visited.end(), 0);
        }
    }
    return rep;
}

struct poincare_row {
    int center = 0;
    double radius = 0.0;
    long long members = 0;
    double lhs = 0.0;            // integral of |u - u_B| over B
    double rhs_factor = 0.0;     // multiplier of the constant
    double local_constant = 0.0; // least C for this ball, may be inf
};

struct poincare_report {
    double eta = 1.0;
    bool normalized = false;
    std::vector<poincare_row> rows; // (center asc, radius asc)
    double minimal_constant = 0.0;
    int worst_index = -1; // first row attaining the max
};

/// Sweeps every realizable ball B = B(x,r). Unnormalized mode bounds the
/// oscillation integral by C * r * nu(eta B); normalized mode bounds the
/// mean oscillation by C * r * nu(eta B)/mu(eta B). Reports the least C
/// valid for all tested balls; a zero right side with positive left side
/// yields an infinite local constant rather than an error.
inline poincare_report check_ball_poincare(const metric_measure_space& space,
                                           const scalar_field& u, const point_measure& nu,
                                           double eta, bool normalized, int threads = 1) {
    require_field(space, u);
    require_measure(space, nu);
    if (!(eta >= 1.0)) throw input_error("dilation factor must be at least 1");

    std::vector<ball> family;
    for (int x = 0; x < space.n; ++x) {
        std::vector<ball> f = realizable_balls(space, x);
        family.insert(family.end(), std::make_move_iterator(f.begin()),
                      std::make_move_iterator(f.end()));
    }

    poincare_report rep;
    rep.eta = eta;
    rep.normalized = normalized;
    rep.rows.resize(family.size());
    parallel_for(static_cast<int>(family.size()), threads, [&](int i) {
        const ball& B = family[static_cast<size_t>(i)];
        poincare_row row;
        row.center = B.center;
        row.radius = B.radius;
        row.members = static_cast<long long>(B.members.size());
        const double avg = ball_average(space, u, B);
        double lhs = 0.0;
        for (int y : B.members)
            lhs += std::fabs(u.values[static_cast<size_t>(y)] - avg) *
                   space.mass[static_cast<size_t>(y)];
        ball dil = resolve_ball(space, B.center, eta * B.radius);
        double factor = B.radius * set_measure(nu, dil.members);
        if (normalized) {
            lhs /= set_mass(space, B.members);
            factor /= set_mass(space, dil.members);
        }
        row.lhs = lhs;
        row.rhs_factor = factor;
        row.local_constant = lhs == 0.0 ? 0.0 : (factor == 0.0 ? kInf : lhs / factor);
        rep.rows[static_cast<size_t>(i)] = std::move(row);
    });

    for (size_t i = 0; i < rep.rows.size(); ++i) {
        if (rep.worst_index < 0 || rep.rows[i].local_constant > rep.minimal_constant) {
            rep.minimal_constant = rep.rows[i].local_constant;
            rep.worst_index = static_cast<int>(i);
        }
    }
    return rep;
}

} // namespace bvcert
