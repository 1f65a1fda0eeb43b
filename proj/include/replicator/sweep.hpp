#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "replicator/dynamics.hpp"
#include "replicator/equilibria.hpp"
#include "replicator/model_zoo.hpp"

namespace replicator {

struct Point2 {
    double u = 0.0;
    double v = 0.0;
};

/// Barycentric embedding with A at (0,0), B at (1,0) and E at (1/2, sqrt(3)/2).
inline Point2 to_ternary(const Vector& x)
{
    if (x.size() != 3)
        throw Error(ErrorCode::DimensionMismatch, "ternary coordinates need exactly three opinions");
    constexpr double kHeight = 0.86602540378443864676; // sqrt(3)/2
    return {x(1) + 0.5 * x(2), kHeight * x(2)};
}

inline Point2 to_ternary(const SimplexState& x) { return to_ternary(x.values()); }

namespace detail {

inline std::size_t lattice_divisions(double resolution)
{
    if (!(resolution > 0.0) || resolution > 0.1)
        throw Error(ErrorCode::ParameterOutOfRange, "resolution must lie in (0, 0.1]");
    return static_cast<std::size_t>(std::llround(1.0 / resolution));
}

inline void compositions(std::size_t parts, std::size_t total, std::vector<std::size_t>& cur,
                         std::vector<std::vector<std::size_t>>& out)
{
    if (parts == 1) {
        cur.push_back(total);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t i = 0; i <= total; ++i) {
        cur.push_back(i);
        compositions(parts - 1, total - i, cur, out);
        cur.pop_back();
    }
}

/// Runs body(i) for i in [0, count) on all hardware threads. Results must be
/// written by index; the first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t count, Body&& body)
{
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers)
                    body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace detail

/// All compositions (i_1 h, ..., i_n h) with sum i_k = 1/h, faces included,
/// ordered lexicographically by (i_1, i_2, ...).
inline std::vector<SimplexState> simplex_lattice(std::size_t n, double resolution)
{
    if (n < 2)
        throw Error(ErrorCode::DimensionMismatch, "lattice needs at least two opinions");
    const auto m = detail::lattice_divisions(resolution);
    std::vector<std::vector<std::size_t>> comps;
    std::vector<std::size_t> cur;
    detail::compositions(n, m, cur, comps);
    std::vector<SimplexState> out;
    out.reserve(comps.size());
    for (const auto& c : comps) {
        Vector x(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k)
            x(static_cast<Eigen::Index>(k)) = static_cast<double>(c[k]) / static_cast<double>(m);
        out.emplace_back(std::move(x));
    }
    return out;
}

struct FieldSample {
    SimplexState x;
    Vector field;
    double speed = 0.0;
    std::optional<Point2> ternary;
};

inline std::vector<FieldSample> phase_field(const PayoffMatrix& a, double resolution)
{
    std::vector<FieldSample> out;
    for (auto& x : simplex_lattice(a.size(), resolution)) {
        Vector v = replicator_field(a, x);
        const double speed = v.norm();
        std::optional<Point2> t;
        if (a.size() == 3)
            t = to_ternary(x);
        out.push_back({std::move(x), std::move(v), speed, t});
    }
    return out;
}

struct BasinOptions {
    double tol = 1e-10;
    double match_radius = 1e-3;
    double step = 0.01;
};

struct BasinMap {
    double resolution = 0.0;
    std::vector<SimplexState> grid;
    /// Index into attractors, or -1 when the point did not settle near one.
    std::vector<int> assignment;
    std::vector<FixedPoint> attractors;
    std::vector<std::size_t> unresolved;

    /// Fraction of the grid assigned to each attractor.
    std::vector<double> fractions() const
    {
        std::vector<double> f(attractors.size(), 0.0);
        for (int k : assignment)
            if (k >= 0)
                f[static_cast<std::size_t>(k)] += 1.0;
        for (auto& v : f)
            v /= static_cast<double>(grid.size());
        return f;
    }
};

/// Runs converge from every lattice point and assigns it to the stable
/// fixed point it ends up at. With no stable point, everything is unresolved.
inline BasinMap basins(const PayoffMatrix& a, double resolution, double max_t, const BasinOptions& opt = {},
                       const ClassifyOptions& classify_opt = {})
{
    BasinMap map;
    map.resolution = resolution;
    map.grid = simplex_lattice(a.size(), resolution);
    detail::check_positive(max_t, "max_t");
    for (auto& p : analyze(a, classify_opt))
        if (is_stable(p.classification))
            map.attractors.push_back(std::move(p));

    map.assignment.assign(map.grid.size(), -1);
    if (!map.attractors.empty()) {
        const IntegrationOptions integ{opt.step, 2};
        detail::parallel_for(map.grid.size(), [&](std::size_t i) {
            const auto traj = converge(a, map.grid[i], opt.tol, max_t, integ);
            const Vector& end = traj.terminal_state().values();
            int best = -1;
            double best_d = opt.match_radius;
            for (std::size_t k = 0; k < map.attractors.size(); ++k) {
                const double d = (end - map.attractors[k].x.values()).cwiseAbs().maxCoeff();
                if (d <= best_d) {
                    best_d = d;
                    best = static_cast<int>(k);
                }
            }
            map.assignment[i] = best;
        });
    }
    for (std::size_t i = 0; i < map.grid.size(); ++i)
        if (map.assignment[i] < 0)
            map.unresolved.push_back(i);
    return map;
}

struct SweepPoint {
    std::optional<double> r;
    std::optional<double> delta;
    TableReport report;
};

/// Path of one fixed point (identified by its support) across the sweep grid.
struct Locus {
    std::vector<std::size_t> support;
    std::vector<std::size_t> grid_index;
    std::vector<SimplexState> path;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<Locus> loci;
};

/// Table reports over the grid r_values x delta_values (r outer). An empty
/// list keeps the template's own value for that parameter.
inline SweepResult sweep(const ModelSpec& base, const std::vector<double>& r_values,
                         const std::vector<double>& delta_values, const ClassifyOptions& opt = {})
{
    if (!delta_values.empty() && !base.preference)
        throw Error(ErrorCode::ParameterOutOfRange, "delta values given for a model without preference");
    if (!r_values.empty() && !base.equivocator_r)
        throw Error(ErrorCode::ParameterOutOfRange, "r values given for a model without equivocator");
    for (double v : r_values)
        detail::check_open_unit(v, "r");
    for (double v : delta_values)
        detail::check_open_unit(v, "delta");

    std::vector<ModelSpec> specs;
    const std::vector<std::optional<double>> rs = r_values.empty()
        ? std::vector<std::optional<double>>{base.equivocator_r}
        : std::vector<std::optional<double>>(r_values.begin(), r_values.end());
    std::vector<std::optional<double>> ds;
    if (delta_values.empty())
        ds.push_back(base.preference ? std::optional<double>(base.preference->delta) : std::nullopt);
    else
        ds.assign(delta_values.begin(), delta_values.end());
    for (const auto& r : rs) {
        for (const auto& d : ds) {
            ModelSpec s = base;
            s.equivocator_r = r;
            if (d)
                s.preference->delta = *d;
            validate(s);
            specs.push_back(s);
        }
    }

    std::vector<std::optional<TableReport>> reports(specs.size());
    detail::parallel_for(specs.size(), [&](std::size_t i) { reports[i] = table_report(specs[i], opt); });

    SweepResult result;
    std::map<std::vector<std::size_t>, std::size_t> locus_of;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        SweepPoint sp{specs[i].equivocator_r,
                      specs[i].preference ? std::optional<double>(specs[i].preference->delta) : std::nullopt,
                      std::move(*reports[i])};
        for (const auto& row : sp.report.rows) {
            if (row.point.degenerate)
                continue;
            auto [it, inserted] = locus_of.try_emplace(row.point.support, result.loci.size());
            if (inserted)
                result.loci.push_back({row.point.support, {}, {}});
            auto& locus = result.loci[it->second];
            locus.grid_index.push_back(i);
            locus.path.push_back(row.point.x);
        }
        result.points.push_back(std::move(sp));
    }
    return result;
}

} // namespace replicator
