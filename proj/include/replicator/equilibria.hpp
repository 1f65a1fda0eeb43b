#pragma once

#include <algorithm>
#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "replicator/dynamics.hpp"
#include "replicator/errors.hpp"
#include "replicator/model_zoo.hpp"

namespace replicator {

using Spectrum = std::vector<std::complex<double>>;

enum class Classification { Stable, Unstable, StableNumeric, UnstableNumeric, Unclassified };

constexpr std::string_view to_string(Classification c) noexcept
{
    switch (c) {
        case Classification::Stable: return "stable";
        case Classification::Unstable: return "unstable";
        case Classification::StableNumeric: return "stable-numeric";
        case Classification::UnstableNumeric: return "unstable-numeric";
        case Classification::Unclassified: return "unclassified";
    }
    return "unclassified";
}

constexpr bool is_stable(Classification c) noexcept
{
    return c == Classification::Stable || c == Classification::StableNumeric;
}

struct FixedPoint {
    SimplexState x;
    std::vector<std::size_t> support;
    Spectrum eigen_full;
    Spectrum eigen_reduced;
    Classification classification = Classification::Unclassified;
    /// Member of a continuum of equilibria; such points are not classified.
    bool degenerate = false;
};

struct ExistenceCondition {
    std::string description;
    bool holds = true;
};

struct TableRow {
    FixedPoint point;
    ExistenceCondition existence;
};

struct TableReport {
    std::string model;
    PayoffMatrix matrix;
    std::vector<TableRow> rows;
};

/// J_ij = [i==j](f_i - phi) + x_i (a_ij - f_j - (A^T x)_j)
inline Matrix jacobian(const PayoffMatrix& a, const Vector& x)
{
    detail::check_dims(a, x.size());
    const Matrix& m = a.entries();
    const Vector f = m * x;
    const Vector g = m.transpose() * x;
    const double phi = x.dot(f);
    const auto n = x.size();
    Matrix j(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c)
            j(r, c) = x(r) * (m(r, c) - f(c) - g(c));
        j(r, r) += f(r) - phi;
    }
    return j;
}

inline Matrix jacobian(const PayoffMatrix& a, const SimplexState& x) { return jacobian(a, x.values()); }

/// Jacobian of the (n-1)-dimensional system obtained by substituting
/// x_n = 1 - sum_{i<n} x_i; its spectrum is the on-simplex part.
inline Matrix reduced_jacobian(const PayoffMatrix& a, const Vector& x)
{
    const Matrix j = jacobian(a, x);
    const auto m = j.rows() - 1;
    Matrix r(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index c = 0; c < m; ++c)
            r(i, c) = j(i, c) - j(i, m);
    return r;
}

/// Eigenvalues sorted by (real, imag).
inline Spectrum eigen_spectrum(const Matrix& j)
{
    if (!j.allFinite())
        throw Error(ErrorCode::NonFiniteState, "matrix has non-finite entries");
    if (j.rows() != j.cols())
        throw Error(ErrorCode::DimensionMismatch, "eigenvalues need a square matrix");
    Spectrum out;
    if (j.rows() == 0)
        return out;
    Eigen::EigenSolver<Matrix> solver(j, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::ConvergenceFailure, "eigenvalue iteration did not converge");
    const auto& ev = solver.eigenvalues();
    out.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) {
        if (p.real() != q.real())
            return p.real() < q.real();
        return p.imag() < q.imag();
    });
    return out;
}

namespace detail {

inline constexpr double kDedupTol = 1e-9;
inline constexpr double kResidualTol = 1e-9;

inline std::vector<std::size_t> support_of(const Vector& x, double tol)
{
    std::vector<std::size_t> s;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) > tol)
            s.push_back(static_cast<std::size_t>(i));
    return s;
}

inline std::vector<std::size_t> bits(std::uint64_t mask, std::size_t n)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::uint64_t{1} << i))
            out.push_back(i);
    return out;
}

/// Solves {sum_{j in cols} a_ij x_j = c for i in rows, sum x = 1} for (x_cols, c).
/// Returns nullopt when the solution is not unique or does not exist.
inline std::optional<Vector> solve_equal_payoff(const Matrix& a, const std::vector<std::size_t>& rows,
                                                const std::vector<std::size_t>& cols, bool* singular = nullptr)
{
    const auto nr = static_cast<Eigen::Index>(rows.size()) + 1;
    const auto nc = static_cast<Eigen::Index>(cols.size()) + 1;
    Matrix m = Matrix::Zero(nr, nc);
    Vector b = Vector::Zero(nr);
    for (Eigen::Index r = 0; r + 1 < nr; ++r) {
        for (Eigen::Index c = 0; c + 1 < nc; ++c)
            m(r, c) = a(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
        m(r, nc - 1) = -1.0;
    }
    for (Eigen::Index c = 0; c + 1 < nc; ++c)
        m(nr - 1, c) = 1.0;
    b(nr - 1) = 1.0;

    Eigen::FullPivLU<Matrix> lu(m);
    lu.setThreshold(1e-12);
    const bool full_rank = lu.rank() == nc;
    if (singular)
        *singular = !full_rank;
    if (!full_rank)
        return std::nullopt;
    Vector sol = lu.solve(b);
    if ((m * sol - b).cwiseAbs().maxCoeff() > kResidualTol)
        return std::nullopt;
    return sol;
}

/// Embeds a support solution into R^n; nullopt when it leaves the simplex by more than tol.
inline std::optional<Vector> embed(const Vector& sol, const std::vector<std::size_t>& cols, std::size_t n, double tol)
{
    Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const double v = sol(static_cast<Eigen::Index>(k));
        if (v < -tol)
            return std::nullopt;
        x(static_cast<Eigen::Index>(cols[k])) = std::max(v, 0.0);
    }
    x /= x.sum();
    return x;
}

struct Candidate {
    Vector x;
    bool degenerate;
};

inline void add_unique(std::vector<Candidate>& out, Vector x, bool degenerate)
{
    for (auto& c : out) {
        if ((c.x - x).cwiseAbs().maxCoeff() < kDedupTol) {
            c.degenerate = c.degenerate || degenerate;
            return;
        }
    }
    out.push_back({std::move(x), degenerate});
}

} // namespace detail

/// Every fixed point of the replicator flow, found by support enumeration:
/// for each nonempty support S the on-support payoffs are equalised, which is
/// a linear system because fitness is linear in x. Points are ordered by
/// support size, then by support bitmask. Spectra are filled in; the
/// classification is left Unclassified (see analyze()).
inline std::vector<FixedPoint> enumerate_fixed_points(const PayoffMatrix& a, double tol = 1e-9)
{
    detail::check_positive(tol, "tol");
    const std::size_t n = a.size();
    if (n > 20)
        throw Error(ErrorCode::ParameterOutOfRange, "support enumeration is limited to 20 opinions");
    const Matrix& m = a.entries();

    std::vector<std::uint64_t> masks;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask)
        masks.push_back(mask);
    std::stable_sort(masks.begin(), masks.end(), [](auto p, auto q) { return std::popcount(p) < std::popcount(q); });

    std::vector<detail::Candidate> found;
    for (const auto mask : masks) {
        const auto support = detail::bits(mask, n);
        bool singular = false;
        if (auto sol = detail::solve_equal_payoff(m, support, support, &singular)) {
            if (auto x = detail::embed(*sol, support, n, tol))
                detail::add_unique(found, std::move(*x), false);
            continue;
        }
        if (!singular)
            continue;
        // Singular system: the solutions on this face form a polytope. Its
        // vertices are the unique solutions obtained by zeroing some of the
        // support coordinates while keeping every equal-payoff row of S.
        std::vector<Vector> vertices;
        for (std::uint64_t sub = mask; sub; sub = (sub - 1) & mask) {
            const auto cols = detail::bits(sub, n);
            auto sol = detail::solve_equal_payoff(m, support, cols);
            if (!sol)
                continue;
            auto x = detail::embed(*sol, cols, n, tol);
            if (!x)
                continue;
            const bool dup = std::any_of(vertices.begin(), vertices.end(), [&](const Vector& v) {
                return (v - *x).cwiseAbs().maxCoeff() < detail::kDedupTol;
            });
            if (!dup)
                vertices.push_back(std::move(*x));
        }
        std::sort(vertices.begin(), vertices.end(), [](const Vector& p, const Vector& q) {
            return std::lexicographical_compare(q.data(), q.data() + q.size(), p.data(), p.data() + p.size());
        });
        const bool continuum = vertices.size() >= 2;
        for (auto& v : vertices)
            detail::add_unique(found, std::move(v), continuum);
    }

    std::vector<FixedPoint> out;
    out.reserve(found.size());
    for (auto& c : found) {
        FixedPoint p{SimplexState(c.x), detail::support_of(c.x, tol), {}, {}, Classification::Unclassified,
                     c.degenerate};
        p.eigen_full = eigen_spectrum(jacobian(a, c.x));
        p.eigen_reduced = eigen_spectrum(reduced_jacobian(a, c.x));
        out.push_back(std::move(p));
    }
    return out;
}

struct ClassifyOptions {
    double margin = 1e-9;
    double radius = 1e-3;
    double return_tol = 1e-4;
    double horizon = 5e4;
    double escape = 0.1;
    double step = 0.01;
};

namespace detail {

/// Start points for the perturbation test: p +- radius (e_k - e_last), projected
/// back onto the simplex when they fall outside it.
inline std::vector<Vector> perturbations(const Vector& p, double radius)
{
    const auto n = p.size();
    std::vector<Vector> out;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        for (double sign : {1.0, -1.0}) {
            Vector y = p;
            y(k) += sign * radius;
            y(n - 1) -= sign * radius;
            SimplexState::project_in_place(y);
            out.push_back(std::move(y));
        }
    }
    return out;
}

inline bool returns_to(const PayoffMatrix& a, const Vector& p, Vector y, const ClassifyOptions& opt)
{
    const auto steps = step_count(opt.horizon, opt.step);
    return with_dimension(a.size(), [&](auto dim) {
        Rk4Stepper<decltype(dim)::value> stepper(a);
        using State = typename decltype(stepper)::State;
        const State target = p;
        State x = y;
        for (std::uint64_t k = 0; k <= steps; ++k) {
            const double d = (x - target).cwiseAbs().maxCoeff();
            if (d < opt.return_tol)
                return true;
            if (d > opt.escape)
                return false;
            stepper.step(x, opt.step);
        }
        return false;
    });
}

} // namespace detail

/// Linear stability from the reduced spectrum; when some eigenvalue sits
/// within the margin of the imaginary axis the point is perturbed in
/// 2(n-1) directions and integrated to see whether it comes back.
inline Classification classify(const PayoffMatrix& a, const FixedPoint& p, const ClassifyOptions& opt = {})
{
    detail::check_dims(a, p.x.values().size());
    const Vector& x = p.x.values();
    if (replicator_field(a, x).cwiseAbs().maxCoeff() >= 1e-8)
        throw Error(ErrorCode::NotAFixedPoint, "the replicator field does not vanish at the given point");
    if (p.degenerate)
        return Classification::Unclassified;

    const Spectrum reduced = eigen_spectrum(reduced_jacobian(a, x));
    const bool all_negative = std::all_of(reduced.begin(), reduced.end(),
                                          [&](const auto& z) { return z.real() < -opt.margin; });
    if (all_negative)
        return Classification::Stable;
    const bool any_positive = std::any_of(reduced.begin(), reduced.end(),
                                          [&](const auto& z) { return z.real() > opt.margin; });
    if (any_positive)
        return Classification::Unstable;

    for (const auto& y : detail::perturbations(x, opt.radius)) {
        if (!detail::returns_to(a, x, y, opt))
            return Classification::UnstableNumeric;
    }
    return Classification::StableNumeric;
}

/// enumerate_fixed_points followed by classify on every point.
inline std::vector<FixedPoint> analyze(const PayoffMatrix& a, const ClassifyOptions& opt = {}, double tol = 1e-9)
{
    auto points = enumerate_fixed_points(a, tol);
    for (auto& p : points)
        p.classification = classify(a, p, opt);
    return points;
}

/// Existence predicate of a fixed point of a built model. Only the
/// equivocator models with a preferred deterministic opinion have points
/// that exist conditionally: those whose support contains both the
/// preferred opinion and E.
inline ExistenceCondition existence_condition(const ModelSpec& spec, const std::vector<std::size_t>& support)
{
    if (!spec.equivocator_r || !spec.preference || spec.preference->target == "E")
        return {"always", true};
    const double r = *spec.equivocator_r;
    const double delta = spec.preference->delta;
    const std::size_t pref = spec.preference->target == "A" ? 0 : 1;
    const bool conditional = std::find(support.begin(), support.end(), pref) != support.end() &&
                             std::find(support.begin(), support.end(), std::size_t{2}) != support.end();
    if (!conditional)
        return {"always", true};
    if (pref == 0)
        return {"delta < 1 - r", delta < 1.0 - r};
    return {"delta < r", delta < r};
}

inline TableReport table_report(const ModelSpec& spec, const ClassifyOptions& opt = {})
{
    TableReport report{spec.name(), build(spec), {}};
    for (auto& p : analyze(report.matrix, opt)) {
        auto cond = existence_condition(spec, p.support);
        report.rows.push_back({std::move(p), std::move(cond)});
    }
    return report;
}

/// Report for a user-supplied matrix; every row exists unconditionally.
inline TableReport table_report(const PayoffMatrix& a, const ClassifyOptions& opt = {})
{
    TableReport report{"custom", a, {}};
    for (auto& p : analyze(a, opt))
        report.rows.push_back({std::move(p), {"always", true}});
    return report;
}

} // namespace replicator
