#pragma once

// Shared fixtures, brute-force oracles, and a small subprocess harness for
// the test suite. Everything here is deliberately slow and literal; the
// library under test must agree with it, not the other way around.

#include <bvcert/json_io.hpp>
#include <bvcert/space.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace testkit {

using bvcert::graph_edge;
using bvcert::metric_measure_space;
using bvcert::point_measure;
using bvcert::scalar_field;

// splitmix64, so fixture streams do not depend on libstdc++ internals.
struct rng64 {
    std::uint64_t state;
    explicit rng64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in {0, ..., m-1}
    int below(int m) { return static_cast<int>(next() % static_cast<std::uint64_t>(m)); }
};

inline bool near(double a, double b, double tol) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// ---- fixtures ----

inline metric_measure_space make_s2_graph() {
    return bvcert::make_graph_space("s2", 2, {{0, 1, 1.0}}, {1.0, 1.0}, {"a", "b"});
}

inline metric_measure_space make_s2_matrix() {
    return bvcert::make_matrix_space("s2m", 2, {0.0, 1.0, 1.0, 0.0}, {1.0, 1.0});
}

inline metric_measure_space make_path(int n, double h, double mass = 1.0) {
    std::vector<graph_edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, h});
    return bvcert::make_graph_space("path" + std::to_string(n), n, edges,
                                    std::vector<double>(static_cast<size_t>(n), mass));
}

inline metric_measure_space make_cycle(int n, double h) {
    std::vector<graph_edge> edges;
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, h});
    return bvcert::make_graph_space("cycle" + std::to_string(n), n, edges,
                                    std::vector<double>(static_cast<size_t>(n), 1.0));
}

// side x side sample of the unit square with trapezoid-rule cell masses, so
// the masses sum to 1 and linear fields have unit total variation.
inline metric_measure_space make_unit_grid(int side) {
    const double h = 1.0 / (side - 1);
    auto axis = [&](int i) { return (i == 0 || i == side - 1) ? 0.5 * h : h; };
    std::vector<double> mass(static_cast<size_t>(side) * static_cast<size_t>(side));
    for (int iy = 0; iy < side; ++iy)
        for (int ix = 0; ix < side; ++ix)
            mass[static_cast<size_t>(iy) * side + ix] = axis(ix) * axis(iy);
    return bvcert::make_grid_space("grid" + std::to_string(side), side, side, h, h,
                                   std::move(mass));
}

inline scalar_field grid_coordinate_x(int side) {
    const double h = 1.0 / (side - 1);
    scalar_field u;
    u.values.resize(static_cast<size_t>(side) * static_cast<size_t>(side));
    for (int iy = 0; iy < side; ++iy)
        for (int ix = 0; ix < side; ++ix) u.values[static_cast<size_t>(iy) * side + ix] = ix * h;
    return u;
}

inline scalar_field grid_sine(int side) {
    const double pi = std::acos(-1.0);
    const double h = 1.0 / (side - 1);
    scalar_field u;
    u.values.resize(static_cast<size_t>(side) * static_cast<size_t>(side));
    for (int iy = 0; iy < side; ++iy)
        for (int ix = 0; ix < side; ++ix)
            u.values[static_cast<size_t>(iy) * side + ix] =
                std::sin(pi * ix * h) * std::sin(pi * iy * h);
    return u;
}

// Random spaces live on the 1/64 lattice inside the unit square: coordinates
// and weights are small dyadic-by-64 rationals, so distinct distances stay
// at least (sqrt(8192)-sqrt(8191))/64 ~ 8.6e-5 apart and every derived
// quantity is reproducible across platforms.
inline metric_measure_space random_lattice_space(std::uint64_t seed, int n) {
    rng64 rng(seed);
    std::vector<std::pair<int, int>> pts;
    while (static_cast<int>(pts.size()) < n) {
        std::pair<int, int> p{rng.below(65), rng.below(65)};
        if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(p);
    }
    std::vector<double> dist(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double dx = (pts[static_cast<size_t>(i)].first - pts[static_cast<size_t>(j)].first) / 64.0;
            double dy =
                (pts[static_cast<size_t>(i)].second - pts[static_cast<size_t>(j)].second) / 64.0;
            dist[static_cast<size_t>(i) * n + j] = std::sqrt(dx * dx + dy * dy);
        }
    std::vector<double> mass(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) mass[static_cast<size_t>(i)] = (32 + rng.below(97)) / 64.0;
    return bvcert::make_matrix_space("rnd" + std::to_string(seed), n, std::move(dist),
                                     std::move(mass));
}

inline scalar_field random_field(rng64& rng, int n) {
    scalar_field f;
    f.values.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) f.values[static_cast<size_t>(i)] = (rng.below(257) - 128) / 64.0;
    return f;
}

// roughly one point in five carries no mass
inline point_measure random_measure(rng64& rng, int n) {
    point_measure m;
    m.masses.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        m.masses[static_cast<size_t>(i)] = rng.below(5) == 0 ? 0.0 : rng.below(129) / 64.0;
    return m;
}

// ---- dense-radius maximal oracle ----

// Scans balls B(center, r) over a dense radius grid, accumulating numerator
// and denominator sums in extended precision. For the function operator use
// num[i] = |u(i)|*mass[i], den[i] = mass[i]; for the measure operator
// num[i] = nu[i], den[i] = mass[i]. radii[k] is ascending and the final
// entry exceeds the diameter, so the last running_best is the unrestricted
// maximal value.
struct dense_oracle {
    std::vector<double> radii;
    std::vector<double> running_best;
    std::vector<int> counts; // open-ball member count at radii[k]
};

inline dense_oracle dense_maximal_oracle(const metric_measure_space& space, int center,
                                         const std::vector<double>& num,
                                         const std::vector<double>& den, int steps) {
    std::vector<int> order(static_cast<size_t>(space.n));
    for (int i = 0; i < space.n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double da = space.d(center, a), db = space.d(center, b);
        return da < db || (da == db && a < b);
    });
    dense_oracle out;
    const double diam = space.diameter > 0.0 ? space.diameter : 1.0;
    for (int k = 1; k <= steps; ++k) out.radii.push_back(diam * k / steps);
    out.radii.push_back(diam + 1.0);
    long double ns = 0.0L, ds = 0.0L;
    double best = 0.0;
    size_t ptr = 0;
    for (double r : out.radii) {
        while (ptr < order.size() && space.d(center, order[static_cast<size_t>(ptr)]) < r) {
            ns += num[static_cast<size_t>(order[ptr])];
            ds += den[static_cast<size_t>(order[ptr])];
            ++ptr;
        }
        double value = ds > 0.0L ? static_cast<double>(ns / ds) : 0.0;
        best = std::max(best, value);
        out.running_best.push_back(best);
        out.counts.push_back(static_cast<int>(ptr));
    }
    return out;
}

inline std::vector<double> function_weights(const metric_measure_space& space,
                                            const scalar_field& u) {
    std::vector<double> w(static_cast<size_t>(space.n));
    for (int i = 0; i < space.n; ++i)
        w[static_cast<size_t>(i)] =
            std::fabs(u.values[static_cast<size_t>(i)]) * space.mass[static_cast<size_t>(i)];
    return w;
}

// ---- subprocess harness ----

struct cli_result {
    int code = -1;
    std::string out;
};

inline std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') q += "'\\''";
        else q += c;
    }
    q += "'";
    return q;
}

inline cli_result run_cli(const std::vector<std::string>& args, bool keep_stderr = false) {
    std::string cmd = shell_quote(BVCERT_CLI_PATH);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += keep_stderr ? " 2>&1" : " 2>/dev/null";
    cli_result res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    char buf[4096];
    size_t got = 0;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) res.out.append(buf, got);
    int status = pclose(pipe);
    if (WIFEXITED(status)) res.code = WEXITSTATUS(status);
    return res;
}

inline std::string data_file(const std::string& name) {
    return std::string(BVCERT_DATA_DIR) + "/" + name;
}

inline bvcert::space_document wrap_document(metric_measure_space space) {
    bvcert::space_document doc;
    doc.space = std::move(space);
    return doc;
}

} // namespace testkit
