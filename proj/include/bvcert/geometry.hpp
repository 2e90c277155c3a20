#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bvcert/common.hpp"
#include "bvcert/maximal.hpp"
#include "bvcert/space.hpp"

namespace bvcert {

struct doubling_report {
    double constant = 1.0;   // least c with mu(B(x,2r)) <= c * mu(B(x,r)) for all x, r
    int witness_center = 0;
    double witness_radius = 0.0;
};

/// mu(B(x,r)) is piecewise constant in r and the ratio for any real r is
/// dominated by the ratio at the next distance value, so sweeping distance
/// values and their midpoints (capped at the diameter) is exact.
inline doubling_report doubling_constant(const metric_measure_space& space) {
    doubling_report rep;
    rep.witness_radius = space.diameter > 0.0 ? space.diameter : 1.0;
    for (int x = 0; x < space.n; ++x) {
        detail::radius_profile mu = detail::build_radius_profile(space, x, space.mass);
        std::vector<double> candidates;
        const auto& t = mu.thresholds;
        for (size_t i = 0; i + 1 < t.size(); ++i) {
            candidates.push_back(0.5 * (t[i] + t[i + 1]));
            candidates.push_back(t[i + 1]);
        }
        for (double r : candidates) {
            if (!(r > 0.0) || r > space.diameter) continue;
            double ratio = mu.below(2.0 * r) / mu.below(r);
            if (ratio > rep.constant) {
                rep.constant = ratio;
                rep.witness_center = x;
                rep.witness_radius = r;
            }
        }
    }
    return rep;
}

inline double doubling_dimension(const metric_measure_space& space) {
    return std::log2(doubling_constant(space).constant);
}

struct dimension_audit_report {
    double s = 0.0;
    double best_constant = kInf; // largest C valid on the swept lattice
    long long combinations = 0;
};

/// Sweeps the canonical radius lattice (distance values, their midpoints,
/// and the enclosing radius itself) for the volume lower bound
/// mu(B(y,r)) >= C (r/R)^s mu(B(x,R)) with y in B(x,R) and 0 < r <= R,
/// R below the diameter. Reports the largest C valid on the lattice.
inline dimension_audit_report audit_dimension(const metric_measure_space& space, double s) {
    dimension_audit_report rep;
    rep.s = s;
    std::vector<detail::radius_profile> mu;
    mu.reserve(static_cast<size_t>(space.n));
    for (int x = 0; x < space.n; ++x)
        mu.push_back(detail::build_radius_profile(space, x, space.mass));

    auto lattice = [](const detail::radius_profile& p, double cap, bool strict) {
        std::vector<double> out;
        const auto& t = p.thresholds;
        for (size_t i = 0; i + 1 < t.size(); ++i) {
            out.push_back(0.5 * (t[i] + t[i + 1]));
            out.push_back(t[i + 1]);
        }
        std::vector<double> kept;
        for (double v : out)
            if (v > 0.0 && (strict ? v < cap : v <= cap)) kept.push_back(v);
        return kept;
    };

    for (int x = 0; x < space.n; ++x) {
        for (double R : lattice(mu[static_cast<size_t>(x)], space.diameter, true)) {
            double den = mu[static_cast<size_t>(x)].below(R);
            for (int y = 0; y < space.n; ++y) {
                if (!(space.d(x, y) < R)) continue;
                std::vector<double> radii = lattice(mu[static_cast<size_t>(y)], R, false);
                radii.push_back(R);
                for (double r : radii) {
                    double c = (mu[static_cast<size_t>(y)].below(r) / den) / std::pow(r / R, s);
                    rep.combinations += 1;
                    rep.best_constant = std::min(rep.best_constant, c);
                }
            }
        }
    }
    if (rep.combinations == 0) rep.best_constant = 1.0; // no admissible radii (tiny spaces)
    return rep;
}

/// The shortest-path metric over the retained edges. Graph-backed spaces
/// already carry it; spaces with an ambient matrix metric and edges are
/// re-resolved along their edges.
inline metric_measure_space length_metric(const metric_measure_space& space) {
    if (space.graph_backed) return space;
    if (space.edges.empty())
        throw input_error("length metric requires an edge structure");
    return make_graph_space(space.name, space.n, space.edges, space.mass, space.labels);
}

/// Largest ratio of shortest-path length to ambient distance over all pairs.
/// Spaces without a separate ambient metric are length-metric by convention
/// and return 1.
inline double quasiconvexity_constant(const metric_measure_space& space) {
    if (space.graph_backed || space.edges.empty()) return 1.0;
    metric_measure_space resolved = length_metric(space);
    double best = 1.0;
    for (int i = 0; i < space.n; ++i)
        for (int j = i + 1; j < space.n; ++j)
            best = std::max(best, resolved.d(i, j) / space.d(i, j));
    return best;
}

struct geodesic_ball_report {
    bool found = false;
    int witness = -1;
    double radius = 0.0;
    std::vector<int> members;
    bool contained = false;
    std::string note;
};

/// Searches for a ball of radius r/2 (shrunk by the slack) inside
/// B(x,r) ∩ B(x0,R), given x in B(x0,R) and 0 < r <= 2R. On geodesic
/// spaces an exact witness exists; on graphs the geodesic midpoint may fall
/// between vertices, so candidates are accepted within the given slack.
/// A missing witness is a result, not an error.
inline geodesic_ball_report find_geodesic_ball(const metric_measure_space& space, int x0,
                                               double R, int x, double r, double slack) {
    if (x0 < 0 || x0 >= space.n || x < 0 || x >= space.n)
        throw input_error("point index out of range");
    if (!(R > 0.0)) throw input_error("R must be positive");
    if (!(space.d(x, x0) < R)) throw input_error("x must lie in B(x0, R)");
    if (!(r > 0.0) || r > 2.0 * R) throw input_error("radius must satisfy 0 < r <= 2R");
    if (slack < 0.0) throw input_error("slack must be nonnegative");

    geodesic_ball_report rep;
    const double half = 0.5 * r;
    if (space.d(x, x0) < half) {
        rep.witness = x0;
        rep.radius = half;
    } else {
        const double target_x = half;
        const double target_x0 = space.d(x, x0) - half;
        for (int z = 0; z < space.n; ++z) {
            if (std::fabs(space.d(z, x) - target_x) <= slack + kMetricTol &&
                std::fabs(space.d(z, x0) - target_x0) <= slack + kMetricTol) {
                rep.witness = z;
                break;
            }
        }
        if (rep.witness < 0) {
            rep.note = "no point near the geodesic midpoint within slack";
            return rep;
        }
        rep.radius = half - slack;
        if (!(rep.radius > 0.0)) {
            rep.note = "slack leaves no positive witness radius";
            return rep;
        }
    }
    ball wb = resolve_ball(space, rep.witness, rep.radius);
    rep.members = wb.members;
    rep.contained = true;
    for (int m : rep.members)
        if (!(space.d(m, x) < r) || !(space.d(m, x0) < R)) {
            rep.contained = false;
            break;
        }
    if (!rep.contained) {
        rep.note = "witness ball is not contained in the intersection";
        return rep;
    }
    rep.found = true;
    return rep;
}

struct small_ball_report {
    double lhs = 0.0; // mu(B(x,r) ∩ B(x0,R))
    double rhs = 0.0; // mu(B(x0,R)) * c^-2 * (r/2R)^s
    bool holds = false;
};

/// Volume bound for the intersection: when a geodesic witness ball exists,
/// mu(B(x,r) ∩ B(x0,R)) >= mu(B(x0,R)) * c^-2 * (r/2R)^s follows from the
/// doubling property.
inline small_ball_report check_small_ball(const metric_measure_space& space, int x0, double R,
                                          int x, double r, double c, double s) {
    small_ball_report rep;
    double inter = 0.0;
    for (int y = 0; y < space.n; ++y)
        if (space.d(y, x) < r && space.d(y, x0) < R) inter += space.mass[static_cast<size_t>(y)];
    ball B = resolve_ball(space, x0, R);
    rep.lhs = inter;
    rep.rhs = set_mass(space, B.members) * std::pow(c, -2.0) * std::pow(r / (2.0 * R), s);
    rep.holds = leq_with_slack(rep.rhs, rep.lhs);
    return rep;
}

} // namespace bvcert
