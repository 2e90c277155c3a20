#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bvcert/common.hpp"
#include "bvcert/geometry.hpp"
#include "bvcert/json_io.hpp"
#include "bvcert/maximal.hpp"
#include "bvcert/space.hpp"
#include "bvcert/variation.hpp"

namespace bvcert {

struct pointwise_report {
    double sigma = 1.0;
    bool c0_provided = false;
    double c0 = 0.0;
    double c0_minimal = 0.0; // may be inf
    bool passed = false;
    long long pairs = 0;
    int worst_x = -1;
    int worst_y = -1;
    double worst_difference = 0.0; // |u(x) - u(y)| at the worst pair
    double worst_factor = 0.0;     // d(x,y) * (M(x) + M(y)) at the worst pair
    double worst_mx = 0.0;
    double worst_my = 0.0;
    std::vector<maximal_table> tables; // per-point tables, reusable in memory
};

/// Tests |u(x)-u(y)| <= C * d(x,y) * [M_{sigma d, nu}(x) + M_{sigma d, nu}(y)]
/// over all pairs. Without a given C reports the least one (0/0 counts as 0,
/// a positive difference over a zero factor as inf); with a given C reports
/// pass/fail and the worst pair.
inline pointwise_report check_pointwise(const metric_measure_space& space, const scalar_field& u,
                                        const point_measure& nu, double sigma,
                                        std::optional<double> c0 = std::nullopt,
                                        int threads = 1) {
    require_field(space, u);
    require_measure(space, nu);
    if (!(sigma >= 1.0)) throw input_error("sigma must be at least 1");
    if (c0 && !(*c0 > 0.0)) throw input_error("c0 must be positive");

    pointwise_report rep;
    rep.sigma = sigma;
    rep.c0_provided = c0.has_value();
    rep.c0 = c0.value_or(0.0);
    rep.pairs = static_cast<long long>(space.n) * (space.n - 1) / 2;

    rep.tables.resize(static_cast<size_t>(space.n));
    parallel_for(space.n, threads, [&](int x) {
        rep.tables[static_cast<size_t>(x)] = build_measure_maximal_table(space, nu, x);
    });

    struct row_best {
        double ratio = -1.0;
        int y = -1;
        double diff = 0.0, factor = 0.0, mx = 0.0, my = 0.0;
    };
    std::vector<row_best> rows(static_cast<size_t>(space.n));
    parallel_for(space.n, threads, [&](int x) {
        row_best rb;
        for (int y = x + 1; y < space.n; ++y) {
            double d = space.d(x, y);
            double R = sigma * d;
            double mx = rep.tables[static_cast<size_t>(x)].query(R);
            double my = rep.tables[static_cast<size_t>(y)].query(R);
            double diff = std::fabs(u.values[static_cast<size_t>(x)] -
                                    u.values[static_cast<size_t>(y)]);
            double factor = d * (mx + my);
            double ratio = diff == 0.0 ? 0.0 : (factor == 0.0 ? kInf : diff / factor);
            if (ratio > rb.ratio) rb = row_best{ratio, y, diff, factor, mx, my};
        }
        rows[static_cast<size_t>(x)] = rb;
    });

    bool found = false;
    for (int x = 0; x < space.n; ++x) {
        const row_best& rb = rows[static_cast<size_t>(x)];
        if (rb.y < 0) continue;
        if (!found || rb.ratio > rep.c0_minimal) {
            rep.c0_minimal = rb.ratio;
            rep.worst_x = x;
            rep.worst_y = rb.y;
            rep.worst_difference = rb.diff;
            rep.worst_factor = rb.factor;
            rep.worst_mx = rb.mx;
            rep.worst_my = rb.my;
            found = true;
        }
    }
    if (!found) rep.c0_minimal = 0.0; // single-point space
    rep.passed = rep.c0_provided ? rep.c0_minimal <= rep.c0 : std::isfinite(rep.c0_minimal);
    return rep;
}

/// Gradient-form pointwise test: |u(x)-u(y)| <= C * d(x,y) *
/// [(M_{2 sigma d} g^p(x))^{1/p} + (M_{2 sigma d} g^p(y))^{1/p}].
/// p = inf is accepted as a sentinel meaning plain g(x) + g(y).
inline pointwise_report check_sobolev_pointwise(const metric_measure_space& space,
                                                const scalar_field& u, const scalar_field& g,
                                                double p, double sigma, int threads = 1) {
    require_field(space, u);
    require_field(space, g);
    if (!(p > 0.0)) throw input_error("p must be positive (or inf)");
    if (!(sigma >= 1.0)) throw input_error("sigma must be at least 1");
    for (double v : g.values)
        if (v < 0.0) throw input_error("gradient field must be nonnegative");

    pointwise_report rep;
    rep.sigma = sigma;
    rep.pairs = static_cast<long long>(space.n) * (space.n - 1) / 2;

    const bool plain = std::isinf(p);
    if (!plain) {
        scalar_field h;
        h.values.resize(static_cast<size_t>(space.n));
        for (int i = 0; i < space.n; ++i)
            h.values[static_cast<size_t>(i)] = std::pow(g.values[static_cast<size_t>(i)], p);
        rep.tables.resize(static_cast<size_t>(space.n));
        parallel_for(space.n, threads, [&](int x) {
            rep.tables[static_cast<size_t>(x)] = build_function_maximal_table(space, h, x);
        });
    }

    struct row_best {
        double ratio = -1.0;
        int y = -1;
        double diff = 0.0, factor = 0.0, mx = 0.0, my = 0.0;
    };
    std::vector<row_best> rows(static_cast<size_t>(space.n));
    parallel_for(space.n, threads, [&](int x) {
        row_best rb;
        for (int y = x + 1; y < space.n; ++y) {
            double d = space.d(x, y);
            double R = 2.0 * sigma * d;
            double mx, my;
            if (plain) {
                mx = g.values[static_cast<size_t>(x)];
                my = g.values[static_cast<size_t>(y)];
            } else {
                mx = std::pow(rep.tables[static_cast<size_t>(x)].query(R), 1.0 / p);
                my = std::pow(rep.tables[static_cast<size_t>(y)].query(R), 1.0 / p);
            }
            double diff = std::fabs(u.values[static_cast<size_t>(x)] -
                                    u.values[static_cast<size_t>(y)]);
            double factor = d * (mx + my);
            double ratio = diff == 0.0 ? 0.0 : (factor == 0.0 ? kInf : diff / factor);
            if (ratio > rb.ratio) rb = row_best{ratio, y, diff, factor, mx, my};
        }
        rows[static_cast<size_t>(x)] = rb;
    });

    bool found = false;
    for (int x = 0; x < space.n; ++x) {
        const row_best& rb = rows[static_cast<size_t>(x)];
        if (rb.y < 0) continue;
        if (!found || rb.ratio > rep.c0_minimal) {
            rep.c0_minimal = rb.ratio;
            rep.worst_x = x;
            rep.worst_y = rb.y;
            rep.worst_difference = rb.diff;
            rep.worst_factor = rb.factor;
            rep.worst_mx = rb.mx;
            rep.worst_my = rb.my;
            found = true;
        }
    }
    if (!found) rep.c0_minimal = 0.0;
    rep.passed = std::isfinite(rep.c0_minimal);
    return rep;
}

/// Constants assembled once per (space, sigma, c0) and carried through every
/// trace. Each is an explicit product of the doubling constant c, the
/// 5r-covering constant w, and geometric series sums; nothing is hard-coded.
struct derived_constants {
    double doubling = 1.0;         // c: mu(B(x,2r)) <= c mu(B(x,r))
    double covering = 1.0;         // w: 5r-covering constant, weak-type bound
    double dimension = 1.5;        // s: log2(c) raised to at least 1.5 so the
                                   // exponent 1 - 1/s stays positive
    double radius_factor = 1.0;    // c^2 w: factor inside r_k and the k0 rule
    double dilated_volume = 1.0;   // bound on mu(tau B)/mu(B): c^ceil(log2 tau)
    double threshold_window = 1.0; // two-sided bound constant for 2^k0
    double iteration = 1.0;        // factor in the a_k iteration tail
    double base_bound = 1.0;       // constant bounding a_{k0}
    double series_tail = 1.0;      // sum of 2^{k(1-1/s)} up to k, normalized
    double series_weak = 1.0;      // sum of 2^{-k/s} beyond k0, normalized
    double final_factor = 1.0;     // constant C in the final inequality
};

inline derived_constants derive_constants(const metric_measure_space& space, double sigma,
                                          double c0) {
    derived_constants K;
    K.doubling = doubling_constant(space).constant;
    K.covering = covering_constant_5r(space);
    K.dimension = std::max(std::log2(K.doubling), 1.5);
    K.radius_factor = K.doubling * K.doubling * K.covering;
    const double tau = 3.0 * sigma;
    K.dilated_volume = std::pow(K.doubling, ceil_log2(tau));
    K.threshold_window = 2.0 * K.radius_factor * K.dilated_volume;
    const double s = K.dimension;
    K.series_tail = 1.0 / (1.0 - std::pow(2.0, -(1.0 - 1.0 / s)));
    K.series_weak = 2.0 * std::pow(2.0, -1.0 / s) / (1.0 - std::pow(2.0, -1.0 / s));
    K.iteration = 4.0 * c0 * std::pow(2.0 * K.radius_factor, 1.0 / s) * K.series_tail;
    K.base_bound = 4.0 * c0 * K.threshold_window;
    K.final_factor =
        2.0 * (K.base_bound + K.iteration * K.series_weak * K.covering *
                                  std::pow(K.threshold_window * K.dilated_volume, 1.0 / s));
    return K;
}

struct trace_level {
    int k = 0;
    double r = 0.0;              // comparison radius for this level
    double a = 0.0;              // sup of |u - shift| over the level set
    long long count = 0;         // members of the level set
    std::vector<int> fresh;      // members entering at this level
};

/// Replay of the level-set construction on one ball B = B(center, radius):
/// lambda = nu restricted to tau B, level sets E_k = {x in B : M_lambda <= 2^k},
/// comparison radii r_k, threshold k0, and five verified inequalities.
struct level_trace {
    int center = 0;
    double radius = 0.0;
    long long member_count = 0;
    double mu_ball = 0.0;
    double mu_dilated = 0.0;    // mu(tau B)
    double lambda_total = 0.0;  // nu restricted to tau B
    bool trivial = false;            // lambda_total = 0 with u constant on B
    bool hypothesis_failed = false;  // lambda_total = 0 with u nonconstant on B
    std::vector<int> zero_members;   // x in B with M_lambda(x) = 0
    int k0 = 0;
    double shift = 0.0; // u value subtracted so the least |u - shift| on E_{k0} is 0
    std::vector<trace_level> levels; // consecutive k, first level lists its full set
    double k0_lower = 0.0;
    double k0_upper = 0.0;
    double a_k0 = 0.0;
    double a_k0_bound = 0.0;
    double final_lhs = 0.0;
    double final_rhs = 0.0;
    bool flag_lipschitz = false; // (i)   u is c0 2^{k+1}-Lipschitz on each E_k
    bool flag_chain = false;     // (ii)  each x in E_k has y in E_{k-1} within r_k
    bool flag_threshold = false; // (iii) 2^{k0} lies in the two-sided window
    bool flag_base = false;      // (iv)  a_{k0} bounded by the base constant
    bool flag_final = false;     // (v)   oscillation integral bounded at C R lambda
    bool pass = false;
};

inline level_trace build_level_trace(const metric_measure_space& space, const scalar_field& u,
                                     const point_measure& nu, double c0, double sigma,
                                     const ball& B, const derived_constants& K) {
    const double tau = 3.0 * sigma;
    level_trace tr;
    tr.center = B.center;
    tr.radius = B.radius;
    tr.member_count = static_cast<long long>(B.members.size());
    tr.mu_ball = set_mass(space, B.members);

    ball dil = resolve_ball(space, B.center, tau * B.radius);
    tr.mu_dilated = set_mass(space, dil.members);
    point_measure lambda;
    lambda.masses.assign(static_cast<size_t>(space.n), 0.0);
    for (int y : dil.members) lambda.masses[static_cast<size_t>(y)] = nu.masses[static_cast<size_t>(y)];
    tr.lambda_total = set_measure(lambda, dil.members);

    const double R = B.radius;
    const auto uval = [&](int i) { return u.values[static_cast<size_t>(i)]; };

    if (tr.lambda_total == 0.0) {
        bool constant = true;
        for (int y : B.members) constant = constant && uval(y) == uval(B.members.front());
        if (!constant) {
            tr.hypothesis_failed = true;
            return tr;
        }
        tr.trivial = true;
        tr.zero_members = B.members;
        tr.shift = uval(B.center);
        tr.final_lhs = 0.0;
        for (int y : B.members)
            tr.final_lhs += std::fabs(uval(y) - ball_average(space, u, B)) *
                            space.mass[static_cast<size_t>(y)];
        tr.final_rhs = K.final_factor * R * tr.lambda_total;
        tr.flag_lipschitz = tr.flag_chain = tr.flag_threshold = tr.flag_base = true;
        tr.flag_final = leq_with_slack(tr.final_lhs, tr.final_rhs);
        tr.pass = tr.flag_final;
        return tr;
    }

    // unrestricted maximal values of lambda at every member of B
    const int nb = static_cast<int>(B.members.size());
    std::vector<double> mval(static_cast<size_t>(nb));
    for (int i = 0; i < nb; ++i)
        mval[static_cast<size_t>(i)] =
            detail::unrestricted_measure_maximal(space, lambda, B.members[static_cast<size_t>(i)]);

    std::vector<int> enter(static_cast<size_t>(nb)); // level at which the member appears
    bool any_positive = false;
    int k_top = 0, k_stable = 0;
    for (int i = 0; i < nb; ++i) {
        if (mval[static_cast<size_t>(i)] == 0.0) {
            tr.zero_members.push_back(B.members[static_cast<size_t>(i)]);
            continue;
        }
        int k = ceil_log2(mval[static_cast<size_t>(i)]);
        enter[static_cast<size_t>(i)] = k;
        if (!any_positive || k > k_top) k_top = k;
        if (!any_positive || k - 1 < k_stable) k_stable = k - 1;
        any_positive = true;
    }
    // lambda_total > 0 forces a positive maximal value at the center
    const int zero_mark = k_stable - 1;
    for (int i = 0; i < nb; ++i)
        if (mval[static_cast<size_t>(i)] == 0.0) enter[static_cast<size_t>(i)] = zero_mark;

    // smallest k0 with radius_factor * lambda <= 2^k0 * mu(B)
    const double q = K.radius_factor * tr.lambda_total / tr.mu_ball;
    int k0 = ceil_log2(q);
    while (pow2(k0) < q) ++k0;
    while (pow2(k0 - 1) >= q) --k0;
    tr.k0 = k0;

    const int k_lo = std::min(k0, k_stable);
    const int k_hi = std::max(k_top, k0 + 1);

    // shift: first member of E_{k0} minimizing |u|. E_{k0} is nonempty since
    // the set above level 2^{k0} has measure at most mu(B)/c^2; the fallback
    // to the least maximal value only fires under adversarial rounding.
    int zstar = -1;
    for (int i = 0; i < nb; ++i) {
        if (enter[static_cast<size_t>(i)] > k0) continue;
        int y = B.members[static_cast<size_t>(i)];
        if (zstar < 0 || std::fabs(uval(y)) < std::fabs(uval(zstar))) zstar = y;
    }
    if (zstar < 0) {
        int imin = 0;
        for (int i = 1; i < nb; ++i)
            if (mval[static_cast<size_t>(i)] < mval[static_cast<size_t>(imin)]) imin = i;
        zstar = B.members[static_cast<size_t>(imin)];
    }
    tr.shift = uval(zstar);

    const double s = K.dimension;
    tr.levels.reserve(static_cast<size_t>(k_hi - k_lo + 1));
    for (int k = k_lo; k <= k_hi; ++k) {
        trace_level lv;
        lv.k = k;
        lv.r = 2.0 * R * std::pow(K.radius_factor * tr.lambda_total / (pow2(k - 1) * tr.mu_ball),
                                  1.0 / s);
        double a = 0.0;
        for (int i = 0; i < nb; ++i) {
            if (enter[static_cast<size_t>(i)] > k) continue;
            int y = B.members[static_cast<size_t>(i)];
            lv.count += 1;
            a = std::max(a, std::fabs(uval(y) - tr.shift));
            if (enter[static_cast<size_t>(i)] == k || k == k_lo) lv.fresh.push_back(y);
        }
        lv.a = a;
        tr.levels.push_back(std::move(lv));
    }

    // (i) on every level set, u is c0 2^{k+1}-Lipschitz; the binding level for
    // a pair is the one where both points first coexist
    tr.flag_lipschitz = true;
    for (int i = 0; i < nb && tr.flag_lipschitz; ++i)
        for (int j = i + 1; j < nb; ++j) {
            int x = B.members[static_cast<size_t>(i)];
            int y = B.members[static_cast<size_t>(j)];
            double diff = std::fabs(uval(x) - uval(y));
            int ki = enter[static_cast<size_t>(i)];
            int kj = enter[static_cast<size_t>(j)];
            double bound = (ki == zero_mark && kj == zero_mark)
                               ? 0.0
                               : c0 * pow2(std::max(ki, kj) + 1) * space.d(x, y);
            if (!leq_with_slack(diff, bound)) {
                tr.flag_lipschitz = false;
                break;
            }
        }

    // (ii) descent: each member of E_k is within r_k of E_{k-1}, for the
    // levels whose comparison radius fits in the ball (k > k0 exactly)
    tr.flag_chain = true;
    for (int k = k0 + 1; k <= k_hi && tr.flag_chain; ++k) {
        const double rk = tr.levels[static_cast<size_t>(k - k_lo)].r;
        for (int i = 0; i < nb; ++i) {
            if (enter[static_cast<size_t>(i)] > k) continue;
            if (enter[static_cast<size_t>(i)] <= k - 1) continue; // its own witness
            int x = B.members[static_cast<size_t>(i)];
            bool ok = false;
            for (int j = 0; j < nb; ++j)
                if (enter[static_cast<size_t>(j)] <= k - 1 &&
                    space.d(x, B.members[static_cast<size_t>(j)]) < rk) {
                    ok = true;
                    break;
                }
            if (!ok) {
                tr.flag_chain = false;
                break;
            }
        }
    }

    // (iii) the threshold level sits in the two-sided window around
    // lambda(tau B)/mu(tau B)
    tr.k0_lower = tr.lambda_total / (K.threshold_window * tr.mu_dilated);
    tr.k0_upper = K.threshold_window * tr.lambda_total / tr.mu_dilated;
    tr.flag_threshold =
        leq_with_slack(tr.k0_lower, pow2(k0)) && leq_with_slack(pow2(k0), tr.k0_upper);

    // (iv) base estimate for a_{k0}
    tr.a_k0 = tr.levels[static_cast<size_t>(k0 - k_lo)].a;
    tr.a_k0_bound = K.base_bound * R * tr.lambda_total / tr.mu_dilated;
    tr.flag_base = leq_with_slack(tr.a_k0, tr.a_k0_bound);

    // (v) the assembled inequality on the ball itself
    const double avg = ball_average(space, u, B);
    tr.final_lhs = 0.0;
    for (int y : B.members)
        tr.final_lhs += std::fabs(uval(y) - avg) * space.mass[static_cast<size_t>(y)];
    tr.final_rhs = K.final_factor * R * tr.lambda_total;
    tr.flag_final = leq_with_slack(tr.final_lhs, tr.final_rhs);

    tr.pass = tr.flag_lipschitz && tr.flag_chain && tr.flag_threshold && tr.flag_base &&
              tr.flag_final;
    return tr;
}

struct certificate {
    space_document doc;
    std::string function_name;
    std::string measure_name;
    double sigma = 1.0;
    double c0 = 1.0;
    double tau = 3.0;
    double eta = 3.0;
    int audit_balls = -1; // requested trace count; -1 = default rule
    derived_constants constants;
    pointwise_report pointwise;
    poincare_report poincare;
    std::vector<level_trace> traces;
    double overall_constant = kInf;
    bool hypothesis_ok = false;
    bool passed = false;
};

/// Selects which poincare rows receive traces: every ball on small spaces,
/// otherwise the requested number of worst rows by oscillation integral.
inline std::vector<int> select_trace_rows(const poincare_report& rep, int n, int audit_balls) {
    size_t want;
    if (audit_balls >= 0) want = static_cast<size_t>(audit_balls);
    else want = n <= 200 ? rep.rows.size() : 32;
    if (want >= rep.rows.size()) {
        std::vector<int> all(rep.rows.size());
        for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        return all;
    }
    std::vector<int> order(rep.rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rep.rows[static_cast<size_t>(a)].lhs > rep.rows[static_cast<size_t>(b)].lhs;
    });
    order.resize(want);
    std::sort(order.begin(), order.end());
    return order;
}

/// The full pipeline: verify the pointwise hypothesis, derive the constants,
/// run the dilated-ball oscillation sweep at eta = 3 sigma, and attach a
/// level-set trace to the audited balls. The certificate passes when the
/// hypothesis holds, the sweep constant is finite, and every trace passes.
inline certificate poincare_from_pointwise(const metric_measure_space& space,
                                           const scalar_field& u, const point_measure& nu,
                                           double c0, double sigma, int audit_balls = -1,
                                           int threads = 1) {
    if (!space.graph_backed && !space.edges.empty())
        throw input_error("space carries an ambient metric with an edge structure; "
                          "resolve it to the length metric first");
    certificate cert;
    cert.sigma = sigma;
    cert.c0 = c0;
    cert.tau = 3.0 * sigma;
    cert.eta = 3.0 * sigma;
    cert.audit_balls = audit_balls;

    cert.pointwise = check_pointwise(space, u, nu, sigma, c0, threads);
    cert.hypothesis_ok = cert.pointwise.passed;
    cert.poincare.eta = cert.eta;
    if (!cert.hypothesis_ok) return cert;

    cert.constants = derive_constants(space, sigma, c0);
    cert.poincare = check_ball_poincare(space, u, nu, cert.eta, /*normalized=*/false, threads);

    std::vector<int> rows = select_trace_rows(cert.poincare, space.n, audit_balls);
    cert.traces.resize(rows.size());
    parallel_for(static_cast<int>(rows.size()), threads, [&](int i) {
        const poincare_row& row = cert.poincare.rows[static_cast<size_t>(rows[static_cast<size_t>(i)])];
        ball B = resolve_ball(space, row.center, row.radius);
        cert.traces[static_cast<size_t>(i)] =
            build_level_trace(space, u, nu, c0, sigma, B, cert.constants);
    });

    cert.overall_constant = cert.poincare.minimal_constant;
    bool traces_ok = true;
    for (const auto& tr : cert.traces) traces_ok = traces_ok && tr.pass;
    cert.passed = cert.hypothesis_ok && std::isfinite(cert.overall_constant) && traces_ok;
    return cert;
}

inline certificate characterize(const space_document& doc, const std::string& function_name,
                                const std::string& measure_name, double sigma, double c0,
                                int audit_balls = -1, int threads = 1) {
    auto fit = doc.functions.find(function_name);
    if (fit == doc.functions.end())
        throw input_error("document has no function named \"" + function_name + "\"");
    auto mit = doc.measures.find(measure_name);
    if (mit == doc.measures.end())
        throw input_error("document has no measure named \"" + measure_name + "\"");
    certificate cert = poincare_from_pointwise(doc.space, fit->second, mit->second, c0, sigma,
                                               audit_balls, threads);
    cert.doc.space = doc.space;
    cert.doc.functions.emplace(function_name, fit->second);
    cert.doc.measures.emplace(measure_name, mit->second);
    cert.function_name = function_name;
    cert.measure_name = measure_name;
    return cert;
}

// ---- serialization ----

inline json pointwise_to_json(const pointwise_report& rep) {
    json j = json::object();
    j["sigma"] = rep.sigma;
    j["c0_provided"] = rep.c0_provided;
    if (rep.c0_provided) j["c0"] = rep.c0;
    j["c0_minimal"] = json_real(rep.c0_minimal);
    j["passed"] = rep.passed;
    j["pairs"] = rep.pairs;
    json worst = json::object();
    worst["x"] = rep.worst_x;
    worst["y"] = rep.worst_y;
    worst["difference"] = rep.worst_difference;
    worst["factor"] = rep.worst_factor;
    worst["mx"] = rep.worst_mx;
    worst["my"] = rep.worst_my;
    j["worst"] = std::move(worst);
    return j;
}

inline pointwise_report pointwise_from_json(const json& j) {
    pointwise_report rep;
    rep.sigma = read_real(j.at("sigma"), "pointwise sigma");
    rep.c0_provided = j.at("c0_provided").get<bool>();
    if (rep.c0_provided) rep.c0 = read_real(j.at("c0"), "pointwise c0");
    rep.c0_minimal = read_real(j.at("c0_minimal"), "c0_minimal");
    rep.passed = j.at("passed").get<bool>();
    rep.pairs = j.at("pairs").get<long long>();
    const json& w = j.at("worst");
    rep.worst_x = w.at("x").get<int>();
    rep.worst_y = w.at("y").get<int>();
    rep.worst_difference = read_real(w.at("difference"), "worst difference");
    rep.worst_factor = read_real(w.at("factor"), "worst factor");
    rep.worst_mx = read_real(w.at("mx"), "worst mx");
    rep.worst_my = read_real(w.at("my"), "worst my");
    return rep;
}

inline json poincare_to_json(const poincare_report& rep) {
    json j = json::object();
    j["eta"] = rep.eta;
    j["normalized"] = rep.normalized;
    j["minimal_constant"] = json_real(rep.minimal_constant);
    j["worst_index"] = rep.worst_index;
    json rows = json::array();
    for (const auto& row : rep.rows) {
        json r = json::object();
        r["center"] = row.center;
        r["radius"] = row.radius;
        r["members"] = row.members;
        r["lhs"] = row.lhs;
        r["rhs_factor"] = row.rhs_factor;
        r["local_constant"] = json_real(row.local_constant);
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline poincare_report poincare_from_json(const json& j) {
    poincare_report rep;
    rep.eta = read_real(j.at("eta"), "poincare eta");
    rep.normalized = j.at("normalized").get<bool>();
    rep.minimal_constant = read_real(j.at("minimal_constant"), "minimal_constant");
    rep.worst_index = j.at("worst_index").get<int>();
    for (const json& r : j.at("rows")) {
        poincare_row row;
        row.center = r.at("center").get<int>();
        row.radius = read_real(r.at("radius"), "row radius");
        row.members = r.at("members").get<long long>();
        row.lhs = read_real(r.at("lhs"), "row lhs");
        row.rhs_factor = read_real(r.at("rhs_factor"), "row rhs_factor");
        row.local_constant = read_real(r.at("local_constant"), "row local_constant");
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline json constants_to_json(const derived_constants& K) {
    json j = json::object();
    j["doubling"] = K.doubling;
    j["covering"] = K.covering;
    j["dimension"] = K.dimension;
    j["radius_factor"] = K.radius_factor;
    j["dilated_volume"] = K.dilated_volume;
    j["threshold_window"] = K.threshold_window;
    j["iteration"] = K.iteration;
    j["base_bound"] = K.base_bound;
    j["series_tail"] = K.series_tail;
    j["series_weak"] = K.series_weak;
    j["final_factor"] = K.final_factor;
    return j;
}

inline derived_constants constants_from_json(const json& j) {
    derived_constants K;
    K.doubling = read_real(j.at("doubling"), "doubling");
    K.covering = read_real(j.at("covering"), "covering");
    K.dimension = read_real(j.at("dimension"), "dimension");
    K.radius_factor = read_real(j.at("radius_factor"), "radius_factor");
    K.dilated_volume = read_real(j.at("dilated_volume"), "dilated_volume");
    K.threshold_window = read_real(j.at("threshold_window"), "threshold_window");
    K.iteration = read_real(j.at("iteration"), "iteration");
    K.base_bound = read_real(j.at("base_bound"), "base_bound");
    K.series_tail = read_real(j.at("series_tail"), "series_tail");
    K.series_weak = read_real(j.at("series_weak"), "series_weak");
    K.final_factor = read_real(j.at("final_factor"), "final_factor");
    return K;
}

inline json trace_to_json(const level_trace& tr) {
    json j = json::object();
    j["center"] = tr.center;
    j["radius"] = tr.radius;
    j["member_count"] = tr.member_count;
    j["mu_ball"] = tr.mu_ball;
    j["mu_dilated"] = tr.mu_dilated;
    j["lambda_total"] = tr.lambda_total;
    j["trivial"] = tr.trivial;
    j["hypothesis_failed"] = tr.hypothesis_failed;
    j["k0"] = tr.k0;
    j["shift"] = tr.shift;
    j["k0_lower"] = tr.k0_lower;
    j["k0_upper"] = tr.k0_upper;
    j["a_k0"] = tr.a_k0;
    j["a_k0_bound"] = tr.a_k0_bound;
    j["final_lhs"] = tr.final_lhs;
    j["final_rhs"] = tr.final_rhs;
    j["zero_members"] = tr.zero_members;
    json levels = json::array();
    for (const auto& lv : tr.levels) {
        json l = json::object();
        l["k"] = lv.k;
        l["r"] = lv.r;
        l["a"] = lv.a;
        l["count"] = lv.count;
        l["fresh"] = lv.fresh;
        levels.push_back(std::move(l));
    }
    j["levels"] = std::move(levels);
    json flags = json::object();
    flags["lipschitz"] = tr.flag_lipschitz;
    flags["chain"] = tr.flag_chain;
    flags["threshold"] = tr.flag_threshold;
    flags["base"] = tr.flag_base;
    flags["final"] = tr.flag_final;
    flags["pass"] = tr.pass;
    j["flags"] = std::move(flags);
    return j;
}

inline level_trace trace_from_json(const json& j) {
    level_trace tr;
    tr.center = j.at("center").get<int>();
    tr.radius = read_real(j.at("radius"), "trace radius");
    tr.member_count = j.at("member_count").get<long long>();
    tr.mu_ball = read_real(j.at("mu_ball"), "mu_ball");
    tr.mu_dilated = read_real(j.at("mu_dilated"), "mu_dilated");
    tr.lambda_total = read_real(j.at("lambda_total"), "lambda_total");
    tr.trivial = j.at("trivial").get<bool>();
    tr.hypothesis_failed = j.at("hypothesis_failed").get<bool>();
    tr.k0 = j.at("k0").get<int>();
    tr.shift = read_real(j.at("shift"), "shift");
    tr.k0_lower = read_real(j.at("k0_lower"), "k0_lower");
    tr.k0_upper = read_real(j.at("k0_upper"), "k0_upper");
    tr.a_k0 = read_real(j.at("a_k0"), "a_k0");
    tr.a_k0_bound = read_real(j.at("a_k0_bound"), "a_k0_bound");
    tr.final_lhs = read_real(j.at("final_lhs"), "final_lhs");
    tr.final_rhs = read_real(j.at("final_rhs"), "final_rhs");
    for (const json& z : j.at("zero_members")) tr.zero_members.push_back(z.get<int>());
    for (const json& l : j.at("levels")) {
        trace_level lv;
        lv.k = l.at("k").get<int>();
        lv.r = read_real(l.at("r"), "level r");
        lv.a = read_real(l.at("a"), "level a");
        lv.count = l.at("count").get<long long>();
        for (const json& f : l.at("fresh")) lv.fresh.push_back(f.get<int>());
        tr.levels.push_back(std::move(lv));
    }
    const json& flags = j.at("flags");
    tr.flag_lipschitz = flags.at("lipschitz").get<bool>();
    tr.flag_chain = flags.at("chain").get<bool>();
    tr.flag_threshold = flags.at("threshold").get<bool>();
    tr.flag_base = flags.at("base").get<bool>();
    tr.flag_final = flags.at("final").get<bool>();
    tr.pass = flags.at("pass").get<bool>();
    return tr;
}

inline json certificate_to_json(const certificate& cert) {
    json j = json::object();
    j["schema"] = "bvcert-certificate/1";
    j["document"] = document_to_json(cert.doc);
    j["function"] = cert.function_name;
    j["measure"] = cert.measure_name;
    json params = json::object();
    params["sigma"] = cert.sigma;
    params["c0"] = cert.c0;
    params["tau"] = cert.tau;
    params["eta"] = cert.eta;
    params["audit_balls"] = cert.audit_balls;
    j["parameters"] = std::move(params);
    j["constants"] = constants_to_json(cert.constants);
    j["pointwise"] = pointwise_to_json(cert.pointwise);
    j["poincare"] = poincare_to_json(cert.poincare);
    json traces = json::array();
    for (const auto& tr : cert.traces) traces.push_back(trace_to_json(tr));
    j["traces"] = std::move(traces);
    j["overall_constant"] = json_real(cert.overall_constant);
    j["hypothesis_ok"] = cert.hypothesis_ok;
    j["passed"] = cert.passed;
    return j;
}

inline certificate certificate_from_json(const json& j) {
    try {
        if (!j.is_object() || !j.contains("schema") || j.at("schema") != "bvcert-certificate/1")
            throw input_error("not a recognized certificate document");
        certificate cert;
        cert.doc = load_space_document(j.at("document"));
        cert.function_name = j.at("function").get<std::string>();
        cert.measure_name = j.at("measure").get<std::string>();
        const json& params = j.at("parameters");
        cert.sigma = read_real(params.at("sigma"), "sigma");
        cert.c0 = read_real(params.at("c0"), "c0");
        cert.tau = read_real(params.at("tau"), "tau");
        cert.eta = read_real(params.at("eta"), "eta");
        cert.audit_balls = params.at("audit_balls").get<int>();
        cert.constants = constants_from_json(j.at("constants"));
        cert.pointwise = pointwise_from_json(j.at("pointwise"));
        cert.poincare = poincare_from_json(j.at("poincare"));
        for (const json& t : j.at("traces")) cert.traces.push_back(trace_from_json(t));
        cert.overall_constant = read_real(j.at("overall_constant"), "overall_constant");
        cert.hypothesis_ok = j.at("hypothesis_ok").get<bool>();
        cert.passed = j.at("passed").get<bool>();
        return cert;
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("malformed certificate: ") + e.what());
    }
}

} // namespace bvcert
