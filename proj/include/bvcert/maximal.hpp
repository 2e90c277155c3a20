#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bvcert/common.hpp"
#include "bvcert/space.hpp"

namespace bvcert {

/// Integral average of u over the members of a ball: mass-weighted sum in
/// point-index order. When every value in the ball coincides, returns that
/// value exactly instead of dividing two rounded sums.
inline double ball_average(const metric_measure_space& space, const scalar_field& u,
                           const ball& B) {
    const double first = u.values[static_cast<size_t>(B.members.front())];
    bool all_equal = true;
    double num = 0.0, den = 0.0;
    for (int y : B.members) {
        double v = u.values[static_cast<size_t>(y)];
        double m = space.mass[static_cast<size_t>(y)];
        all_equal = all_equal && v == first;
        num += v * m;
        den += m;
    }
    return all_equal ? first : num / den;
}

/// Per-center table of the maximal operator: the sup over balls B(x,r) with
/// r <= R is attained on the closed sets {dist <= t} at distinct distance
/// values t < R, so a prefix maximum over thresholds answers every R at once.
struct maximal_table {
    std::vector<double> thresholds;  // ascending, thresholds[0] == 0
    std::vector<double> prefix_best; // prefix_best[i] = max of values over j <= i

    /// sup over 0 < r <= R; R may be +inf. R must be positive.
    double query(double R) const {
        auto it = std::lower_bound(thresholds.begin(), thresholds.end(), R);
        size_t i = static_cast<size_t>(it - thresholds.begin());
        return prefix_best[i - 1]; // i >= 1 since thresholds[0] = 0 < R
    }
};

/// Table of |u|-averages. Every cumulative sum is a full scan in point-index
/// order; a threshold set whose |u| values all coincide yields that value
/// exactly.
inline maximal_table build_function_maximal_table(const metric_measure_space& space,
                                                  const scalar_field& u, int center) {
    maximal_table tab;
    tab.thresholds = distance_breakpoints(space, center);
    tab.prefix_best.resize(tab.thresholds.size());
    double best = 0.0;
    for (size_t j = 0; j < tab.thresholds.size(); ++j) {
        const double t = tab.thresholds[j];
        double first = 0.0;
        bool all_equal = true;
        double num = 0.0, den = 0.0;
        for (int y = 0; y < space.n; ++y) {
            if (space.d(center, y) > t) continue;
            double v = std::fabs(u.values[static_cast<size_t>(y)]);
            double m = space.mass[static_cast<size_t>(y)];
            if (den == 0.0) first = v;
            else all_equal = all_equal && v == first;
            num += v * m;
            den += m;
        }
        double value = all_equal ? first : num / den;
        best = j == 0 ? value : std::max(best, value);
        tab.prefix_best[j] = best;
    }
    return tab;
}

/// Table of measure ratios nu(set)/mu(set).
inline maximal_table build_measure_maximal_table(const metric_measure_space& space,
                                                 const point_measure& nu, int center) {
    maximal_table tab;
    tab.thresholds = distance_breakpoints(space, center);
    tab.prefix_best.resize(tab.thresholds.size());
    double best = 0.0;
    for (size_t j = 0; j < tab.thresholds.size(); ++j) {
        const double t = tab.thresholds[j];
        double num = 0.0, den = 0.0;
        for (int y = 0; y < space.n; ++y) {
            if (space.d(center, y) > t) continue;
            num += nu.masses[static_cast<size_t>(y)];
            den += space.mass[static_cast<size_t>(y)];
        }
        double value = num / den;
        best = j == 0 ? value : std::max(best, value);
        tab.prefix_best[j] = best;
    }
    return tab;
}

/// M_R u(x): the largest |u|-average over balls B(x,r) with 0 < r <= R.
inline double restricted_maximal(const metric_measure_space& space, const scalar_field& u,
                                 int x, double R) {
    if (x < 0 || x >= space.n) throw input_error("point index out of range");
    if (!(R > 0.0)) throw input_error("radius bound must be positive");
    return build_function_maximal_table(space, u, x).query(R);
}

/// M_{R,nu}(x): the largest ratio nu(B)/mu(B) over balls B = B(x,r) with
/// 0 < r <= R. For R = +inf this is the unrestricted maximal function.
inline double restricted_maximal_measure(const metric_measure_space& space,
                                         const point_measure& nu, int x, double R) {
    if (x < 0 || x >= space.n) throw input_error("point index out of range");
    if (!(R > 0.0)) throw input_error("radius bound must be positive");
    return build_measure_maximal_table(space, nu, x).query(R);
}

inline scalar_field restricted_maximal_field(const metric_measure_space& space,
                                             const scalar_field& u, double R,
                                             int threads = 1) {
    require_field(space, u);
    if (!(R > 0.0)) throw input_error("radius bound must be positive");
    scalar_field out;
    out.values.resize(static_cast<size_t>(space.n));
    parallel_for(space.n, threads, [&](int x) {
        out.values[static_cast<size_t>(x)] = build_function_maximal_table(space, u, x).query(R);
    });
    return out;
}

inline scalar_field restricted_maximal_measure_field(const metric_measure_space& space,
                                                     const point_measure& nu, double R,
                                                     int threads = 1) {
    require_measure(space, nu);
    if (!(R > 0.0)) throw input_error("radius bound must be positive");
    scalar_field out;
    out.values.resize(static_cast<size_t>(space.n));
    parallel_for(space.n, threads, [&](int x) {
        out.values[static_cast<size_t>(x)] = build_measure_maximal_table(space, nu, x).query(R);
    });
    return out;
}

namespace detail {

/// Cumulative weights of the closed sets {dist <= t}, one full index-order
/// scan per threshold.
struct radius_profile {
    std::vector<double> thresholds;
    std::vector<double> cumulative;

    /// Total weight of the open ball {dist < r}.
    double below(double r) const {
        auto it = std::lower_bound(thresholds.begin(), thresholds.end(), r);
        int i = static_cast<int>(it - thresholds.begin()) - 1;
        return i < 0 ? 0.0 : cumulative[static_cast<size_t>(i)];
    }
};

inline radius_profile build_radius_profile(const metric_measure_space& space, int center,
                                           const std::vector<double>& weights) {
    radius_profile p;
    p.thresholds = distance_breakpoints(space, center);
    p.cumulative.resize(p.thresholds.size());
    for (size_t j = 0; j < p.thresholds.size(); ++j) {
        double t = p.thresholds[j];
        double total = 0.0;
        for (int y = 0; y < space.n; ++y)
            if (space.d(center, y) <= t) total += weights[static_cast<size_t>(y)];
        p.cumulative[j] = total;
    }
    return p;
}

/// Unrestricted maximal value of a measure at one point. A single sweep of
/// the distance row sorted by (distance, index) visits every closed set
/// {dist <= t} once, evaluating the ratio after each tie block completes.
inline double unrestricted_measure_maximal(const metric_measure_space& space,
                                           const point_measure& nu, int center) {
    std::vector<int> order(static_cast<size_t>(space.n));
    for (int i = 0; i < space.n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double da = space.d(center, a), db = space.d(center, b);
        return da < db || (da == db && a < b);
    });
    double best = 0.0, num = 0.0, den = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        const double t = space.d(center, order[i]);
        for (; i < order.size() && space.d(center, order[i]) == t; ++i) {
            num += nu.masses[static_cast<size_t>(order[i])];
            den += space.mass[static_cast<size_t>(order[i])];
        }
        best = std::max(best, num / den);
    }
    return best;
}

} // namespace detail

/// Largest ratio mu(B(x,5r))/mu(B(x,r)) over all centers and all real radii.
/// Both member sets are piecewise constant in r with breakpoints where r or
/// 5r crosses a distance value, so midpoints between consecutive critical
/// values (plus one radius beyond the last) realize every ratio.
inline double covering_constant_5r(const metric_measure_space& space) {
    double best = 1.0;
    for (int x = 0; x < space.n; ++x) {
        detail::radius_profile mu = detail::build_radius_profile(space, x, space.mass);
        std::vector<double> crit;
        for (double t : mu.thresholds)
            if (t > 0.0) {
                crit.push_back(t);
                crit.push_back(t / 5.0);
            }
        if (crit.empty()) continue;
        std::sort(crit.begin(), crit.end());
        crit.erase(std::unique(crit.begin(), crit.end()), crit.end());
        std::vector<double> candidates;
        candidates.reserve(crit.size() + 1);
        for (size_t i = 0; i + 1 < crit.size(); ++i)
            candidates.push_back(0.5 * (crit[i] + crit[i + 1]));
        candidates.push_back(crit.back() + 1.0);
        for (double r : candidates) {
            double den = mu.below(r);
            if (den <= 0.0) continue;
            best = std::max(best, mu.below(5.0 * r) / den);
        }
    }
    return best;
}

} // namespace bvcert
