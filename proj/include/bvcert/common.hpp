#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bvcert {

/// Raised when an input document or argument violates the schema or a
/// precondition of the requested operation (CLI exit code 1).
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute tolerance used when validating metric axioms and when matching
/// distances in geodesic searches. Shortest-path resolution accumulates
/// roundoff of this order on decimal edge lengths.
inline constexpr double kMetricTol = 1e-12;

/// a <= b, allowing roundoff of relative size 1e-12. Used for inequality
/// flags that are mathematically exact but numerically assembled.
inline bool leq_with_slack(double a, double b) {
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return a <= b + 1e-12 * scale;
}

/// Smallest integer k with 2^k >= v. Requires v > 0 and finite.
inline int ceil_log2(double v) {
    int k = std::ilogb(v);
    if (std::ldexp(1.0, k) < v) ++k;
    return k;
}

inline double pow2(int k) { return std::ldexp(1.0, k); }

/// Fixed-format decimal rendering with 17 significant digits; round-trips
/// every finite double exactly.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Runs f(i) for i in [0, count). With threads <= 1 the loop is serial.
/// Work is split into contiguous index ranges, so any per-index output
/// written to a preallocated slot is identical for every thread count.
template <class F>
void parallel_for(int count, int threads, F&& f) {
    if (count <= 0) return;
    int workers = std::min(threads, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        int lo = static_cast<int>(static_cast<long long>(count) * w / workers);
        int hi = static_cast<int>(static_cast<long long>(count) * (w + 1) / workers);
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (int i = lo; i < hi; ++i) f(i);
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace bvcert
