#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bvcert/characterization.hpp"
#include "bvcert/common.hpp"
#include "bvcert/json_io.hpp"
#include "bvcert/space.hpp"

namespace bvcert {

struct audit_result {
    bool ok = true;
    std::string first_issue;
};

namespace detail {

/// Equality up to 1e-12 relative slack; infinities must match exactly.
inline bool audit_eq(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

struct audit_log {
    bool ok = true;
    std::string issue;

    void check(bool cond, const std::string& what) {
        if (ok && !cond) {
            ok = false;
            issue = what;
        }
    }
    void check_eq(double got, double want, const std::string& what) {
        check(audit_eq(got, want), what + " mismatch");
    }
    void check_flag(bool got, bool want, const std::string& what) {
        check(got == want, what + " flag mismatch");
    }
};

inline void compare_pointwise(audit_log& log, const pointwise_report& stored,
                              const pointwise_report& fresh) {
    log.check_eq(stored.sigma, fresh.sigma, "pointwise.sigma");
    log.check_flag(stored.c0_provided, fresh.c0_provided, "pointwise.c0_provided");
    log.check_eq(stored.c0, fresh.c0, "pointwise.c0");
    log.check_eq(stored.c0_minimal, fresh.c0_minimal, "pointwise.c0_minimal");
    log.check_flag(stored.passed, fresh.passed, "pointwise.passed");
    log.check(stored.pairs == fresh.pairs, "pointwise.pairs mismatch");
    log.check(stored.worst_x == fresh.worst_x && stored.worst_y == fresh.worst_y,
              "pointwise worst pair mismatch");
    log.check_eq(stored.worst_difference, fresh.worst_difference, "pointwise worst difference");
    log.check_eq(stored.worst_factor, fresh.worst_factor, "pointwise worst factor");
    log.check_eq(stored.worst_mx, fresh.worst_mx, "pointwise worst mx");
    log.check_eq(stored.worst_my, fresh.worst_my, "pointwise worst my");
}

inline void compare_poincare(audit_log& log, const poincare_report& stored,
                             const poincare_report& fresh) {
    log.check_eq(stored.eta, fresh.eta, "poincare.eta");
    log.check_flag(stored.normalized, fresh.normalized, "poincare.normalized");
    log.check_eq(stored.minimal_constant, fresh.minimal_constant, "poincare.minimal_constant");
    log.check(stored.worst_index == fresh.worst_index, "poincare.worst_index mismatch");
    log.check(stored.rows.size() == fresh.rows.size(), "poincare row count mismatch");
    if (!log.ok) return;
    for (size_t i = 0; i < stored.rows.size(); ++i) {
        const poincare_row& a = stored.rows[i];
        const poincare_row& b = fresh.rows[i];
        const std::string tag = "poincare row " + std::to_string(i);
        log.check(a.center == b.center, tag + " center mismatch");
        log.check_eq(a.radius, b.radius, tag + " radius");
        log.check(a.members == b.members, tag + " member count mismatch");
        log.check_eq(a.lhs, b.lhs, tag + " lhs");
        log.check_eq(a.rhs_factor, b.rhs_factor, tag + " rhs_factor");
        log.check_eq(a.local_constant, b.local_constant, tag + " local constant");
        if (!log.ok) return;
    }
}

inline void compare_constants(audit_log& log, const derived_constants& stored,
                              const derived_constants& fresh) {
    log.check_eq(stored.doubling, fresh.doubling, "constants.doubling");
    log.check_eq(stored.covering, fresh.covering, "constants.covering");
    log.check_eq(stored.dimension, fresh.dimension, "constants.dimension");
    log.check_eq(stored.radius_factor, fresh.radius_factor, "constants.radius_factor");
    log.check_eq(stored.dilated_volume, fresh.dilated_volume, "constants.dilated_volume");
    log.check_eq(stored.threshold_window, fresh.threshold_window, "constants.threshold_window");
    log.check_eq(stored.iteration, fresh.iteration, "constants.iteration");
    log.check_eq(stored.base_bound, fresh.base_bound, "constants.base_bound");
    log.check_eq(stored.series_tail, fresh.series_tail, "constants.series_tail");
    log.check_eq(stored.series_weak, fresh.series_weak, "constants.series_weak");
    log.check_eq(stored.final_factor, fresh.final_factor, "constants.final_factor");
}

inline void compare_trace(audit_log& log, size_t idx, const level_trace& stored,
                          const level_trace& fresh) {
    const std::string tag = "trace " + std::to_string(idx);
    log.check(stored.center == fresh.center, tag + " center mismatch");
    log.check_eq(stored.radius, fresh.radius, tag + " radius");
    log.check(stored.member_count == fresh.member_count, tag + " member count mismatch");
    log.check_eq(stored.mu_ball, fresh.mu_ball, tag + " mu_ball");
    log.check_eq(stored.mu_dilated, fresh.mu_dilated, tag + " mu_dilated");
    log.check_eq(stored.lambda_total, fresh.lambda_total, tag + " lambda_total");
    log.check_flag(stored.trivial, fresh.trivial, tag + " trivial");
    log.check_flag(stored.hypothesis_failed, fresh.hypothesis_failed, tag + " hypothesis_failed");
    log.check(stored.zero_members == fresh.zero_members, tag + " zero members mismatch");
    log.check(stored.k0 == fresh.k0, tag + " k0 mismatch");
    log.check_eq(stored.shift, fresh.shift, tag + " shift");
    log.check_eq(stored.k0_lower, fresh.k0_lower, tag + " k0_lower");
    log.check_eq(stored.k0_upper, fresh.k0_upper, tag + " k0_upper");
    log.check_eq(stored.a_k0, fresh.a_k0, tag + " a_k0");
    log.check_eq(stored.a_k0_bound, fresh.a_k0_bound, tag + " a_k0 bound");
    log.check_eq(stored.final_lhs, fresh.final_lhs, tag + " final lhs");
    log.check_eq(stored.final_rhs, fresh.final_rhs, tag + " final rhs");
    log.check(stored.levels.size() == fresh.levels.size(), tag + " level count mismatch");
    if (log.ok)
        for (size_t l = 0; l < stored.levels.size(); ++l) {
            const trace_level& a = stored.levels[l];
            const trace_level& b = fresh.levels[l];
            const std::string lt = tag + " level " + std::to_string(a.k);
            log.check(a.k == b.k, lt + " index mismatch");
            log.check_eq(a.r, b.r, lt + " radius");
            log.check_eq(a.a, b.a, lt + " oscillation");
            log.check(a.count == b.count, lt + " count mismatch");
            log.check(a.fresh == b.fresh, lt + " member list mismatch");
            if (!log.ok) break;
        }
    log.check_flag(stored.flag_lipschitz, fresh.flag_lipschitz, tag + " lipschitz");
    log.check_flag(stored.flag_chain, fresh.flag_chain, tag + " chain");
    log.check_flag(stored.flag_threshold, fresh.flag_threshold, tag + " threshold");
    log.check_flag(stored.flag_base, fresh.flag_base, tag + " base");
    log.check_flag(stored.flag_final, fresh.flag_final, tag + " final");
    log.check_flag(stored.pass, fresh.pass, tag + " pass");
}

/// Rechecks one stored trace using only the recorded data plus the document:
/// the level sets are rebuilt from the fresh-member lists and every flag is
/// recomputed from them. This pass does not rerun the pipeline, so it guards
/// the certificate's own claim that the flags follow from its recorded values.
inline void verify_stored_trace(audit_log& log, size_t idx, const metric_measure_space& space,
                                const scalar_field& u, const derived_constants& K, double c0,
                                const level_trace& tr) {
    const std::string tag = "trace " + std::to_string(idx);
    const auto uval = [&](int i) { return u.values[static_cast<size_t>(i)]; };
    log.check(tr.center >= 0 && tr.center < space.n, tag + " center out of range");
    if (!log.ok) return;

    if (tr.hypothesis_failed) {
        log.check(!tr.pass, tag + " marked passing despite a failed hypothesis");
        return;
    }
    if (tr.trivial) {
        log.check(tr.lambda_total == 0.0, tag + " marked trivial with mass present");
        log.check_flag(tr.flag_final, leq_with_slack(tr.final_lhs, tr.final_rhs),
                       tag + " final");
        log.check(tr.pass == tr.flag_final, tag + " pass flag inconsistent");
        return;
    }

    log.check(!tr.levels.empty(), tag + " has no levels");
    if (!log.ok) return;
    const int k_lo = tr.levels.front().k;
    const int k_hi = tr.levels.back().k;
    log.check(tr.k0 >= k_lo && tr.k0 <= k_hi, tag + " k0 outside the recorded window");
    log.check(k_hi >= tr.k0 + 1, tag + " window stops before k0 + 1");
    if (!log.ok) return;

    ball B = resolve_ball(space, tr.center, tr.radius);
    log.check(static_cast<long long>(B.members.size()) == tr.member_count,
              tag + " member count does not match the ball");
    if (!log.ok) return;

    // rebuild the nested sets and the entry level of each member
    std::vector<int> enter(static_cast<size_t>(space.n), k_hi + 1);
    long long running = 0;
    for (size_t l = 0; l < tr.levels.size(); ++l) {
        const trace_level& lv = tr.levels[l];
        log.check(lv.k == k_lo + static_cast<int>(l), tag + " level indices not consecutive");
        int prev = -1;
        for (int x : lv.fresh) {
            log.check(x > prev, tag + " fresh members out of order");
            prev = x;
            log.check(x >= 0 && x < space.n && space.d(tr.center, x) < tr.radius,
                      tag + " fresh member outside the ball");
            if (!log.ok) return;
            log.check(enter[static_cast<size_t>(x)] > k_hi, tag + " member recorded twice");
            enter[static_cast<size_t>(x)] = lv.k;
        }
        running += static_cast<long long>(lv.fresh.size());
        log.check(lv.count == running, tag + " level count inconsistent with members");
        if (l > 0) {
            log.check(lv.a >= tr.levels[l - 1].a - 1e-12 * std::max(1.0, lv.a),
                      tag + " oscillation values not monotone");
            log.check(lv.r < tr.levels[l - 1].r, tag + " comparison radii not decreasing");
        }
        double expect_r = 2.0 * tr.radius *
                          std::pow(K.radius_factor * tr.lambda_total /
                                       (pow2(lv.k - 1) * tr.mu_ball),
                                   1.0 / K.dimension);
        log.check_eq(lv.r, expect_r, tag + " comparison radius");
        double a = 0.0;
        for (int y : B.members)
            if (enter[static_cast<size_t>(y)] <= lv.k)
                a = std::max(a, std::fabs(uval(y) - tr.shift));
        log.check_eq(lv.a, a, tag + " oscillation over the rebuilt set");
        if (!log.ok) return;
    }
    log.check(running == tr.member_count, tag + " levels never exhaust the ball");
    for (int y : B.members)
        log.check(enter[static_cast<size_t>(y)] <= k_hi, tag + " ball member missing from levels");
    for (int z : tr.zero_members)
        log.check(z >= 0 && z < space.n && enter[static_cast<size_t>(z)] == k_lo,
                  tag + " zero member not in the first level");
    if (!log.ok) return;

    std::vector<char> zero(static_cast<size_t>(space.n), 0);
    for (int z : tr.zero_members) zero[static_cast<size_t>(z)] = 1;

    // (i)
    bool lip = true;
    const int nb = static_cast<int>(B.members.size());
    for (int i = 0; i < nb && lip; ++i)
        for (int j = i + 1; j < nb; ++j) {
            int x = B.members[static_cast<size_t>(i)];
            int y = B.members[static_cast<size_t>(j)];
            double diff = std::fabs(uval(x) - uval(y));
            double bound;
            if (zero[static_cast<size_t>(x)] && zero[static_cast<size_t>(y)]) bound = 0.0;
            else {
                int kx = zero[static_cast<size_t>(x)] ? k_lo : enter[static_cast<size_t>(x)];
                int ky = zero[static_cast<size_t>(y)] ? k_lo : enter[static_cast<size_t>(y)];
                bound = c0 * pow2(std::max(kx, ky) + 1) * space.d(x, y);
            }
            if (!leq_with_slack(diff, bound)) {
                lip = false;
                break;
            }
        }
    log.check_flag(tr.flag_lipschitz, lip, tag + " lipschitz");

    // (ii)
    bool chain = true;
    for (int k = tr.k0 + 1; k <= k_hi && chain; ++k) {
        double rk = tr.levels[static_cast<size_t>(k - k_lo)].r;
        for (int i = 0; i < nb; ++i) {
            int x = B.members[static_cast<size_t>(i)];
            if (enter[static_cast<size_t>(x)] != k) continue;
            bool okx = false;
            for (int j = 0; j < nb; ++j) {
                int y = B.members[static_cast<size_t>(j)];
                if (enter[static_cast<size_t>(y)] <= k - 1 && space.d(x, y) < rk) {
                    okx = true;
                    break;
                }
            }
            if (!okx) {
                chain = false;
                break;
            }
        }
    }
    log.check_flag(tr.flag_chain, chain, tag + " chain");

    // (iii)
    log.check_eq(tr.k0_lower, tr.lambda_total / (K.threshold_window * tr.mu_dilated),
                 tag + " k0 lower bound");
    log.check_eq(tr.k0_upper, K.threshold_window * tr.lambda_total / tr.mu_dilated,
                 tag + " k0 upper bound");
    log.check_flag(tr.flag_threshold,
                   leq_with_slack(tr.k0_lower, pow2(tr.k0)) &&
                       leq_with_slack(pow2(tr.k0), tr.k0_upper),
                   tag + " threshold");

    // (iv)
    log.check_eq(tr.a_k0, tr.levels[static_cast<size_t>(tr.k0 - k_lo)].a, tag + " a_k0 value");
    log.check_eq(tr.a_k0_bound, K.base_bound * tr.radius * tr.lambda_total / tr.mu_dilated,
                 tag + " a_k0 bound value");
    log.check_flag(tr.flag_base, leq_with_slack(tr.a_k0, tr.a_k0_bound), tag + " base");

    // (v)
    log.check_eq(tr.final_rhs, K.final_factor * tr.radius * tr.lambda_total,
                 tag + " final rhs value");
    log.check_flag(tr.flag_final, leq_with_slack(tr.final_lhs, tr.final_rhs), tag + " final");

    log.check(tr.pass == (tr.flag_lipschitz && tr.flag_chain && tr.flag_threshold &&
                          tr.flag_base && tr.flag_final),
              tag + " pass flag inconsistent with the flags");
}

} // namespace detail

/// Verifies a certificate document: parses it, recomputes the entire pipeline
/// from the embedded space document, compares every recorded value, and
/// independently rechecks each trace's flags from its stored data. Shape
/// errors throw input_error; a verified mismatch is reported in the result.
inline audit_result audit_certificate(const json& j, int threads = 1) {
    certificate cert = certificate_from_json(j);
    auto fit = cert.doc.functions.find(cert.function_name);
    if (fit == cert.doc.functions.end())
        throw input_error("certificate names a function absent from its document");
    auto mit = cert.doc.measures.find(cert.measure_name);
    if (mit == cert.doc.measures.end())
        throw input_error("certificate names a measure absent from its document");

    detail::audit_log log;
    log.check(detail::audit_eq(cert.tau, 3.0 * cert.sigma), "tau is not 3 sigma");
    log.check(detail::audit_eq(cert.eta, 3.0 * cert.sigma), "eta is not 3 sigma");

    certificate fresh;
    if (log.ok) {
        fresh = characterize(cert.doc, cert.function_name, cert.measure_name, cert.sigma,
                             cert.c0, cert.audit_balls, threads);
        detail::compare_pointwise(log, cert.pointwise, fresh.pointwise);
        log.check(cert.hypothesis_ok == fresh.hypothesis_ok, "hypothesis flag mismatch");
        if (cert.hypothesis_ok && log.ok) {
            detail::compare_constants(log, cert.constants, fresh.constants);
            detail::compare_poincare(log, cert.poincare, fresh.poincare);
            log.check(cert.traces.size() == fresh.traces.size(), "trace count mismatch");
            if (log.ok)
                for (size_t i = 0; i < cert.traces.size() && log.ok; ++i)
                    detail::compare_trace(log, i, cert.traces[i], fresh.traces[i]);
        }
        log.check(detail::audit_eq(cert.overall_constant, fresh.overall_constant),
                  "overall constant mismatch");
        log.check(cert.passed == fresh.passed, "passed flag mismatch");
    }

    if (log.ok && cert.hypothesis_ok)
        for (size_t i = 0; i < cert.traces.size() && log.ok; ++i)
            detail::verify_stored_trace(log, i, cert.doc.space, fit->second, cert.constants,
                                        cert.c0, cert.traces[i]);

    audit_result res;
    res.ok = log.ok;
    res.first_issue = log.issue;
    return res;
}

inline audit_result audit_certificate_file(const std::string& path, int threads = 1) {
    return audit_certificate(parse_json_file(path), threads);
}

} // namespace bvcert
