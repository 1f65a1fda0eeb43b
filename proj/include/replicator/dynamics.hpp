#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <type_traits>
#include <string>
#include <vector>

#include "replicator/errors.hpp"
#include "replicator/model_zoo.hpp"

namespace replicator {

inline constexpr double kSimplexSumTol = 1e-9;

/// Frequency vector on the unit simplex: non-negative, summing to one.
class SimplexState {
public:
    explicit SimplexState(Vector x) : x_(std::move(x))
    {
        if (x_.size() < 1)
            throw Error(ErrorCode::InvalidState, "state must have at least one component");
        if (!x_.allFinite())
            throw Error(ErrorCode::InvalidState, "state has non-finite components");
        if ((x_.array() < 0.0).any())
            throw Error(ErrorCode::InvalidState, "state has negative components");
        if (std::abs(x_.sum() - 1.0) > kSimplexSumTol)
            throw Error(ErrorCode::InvalidState, "state components do not sum to one");
    }

    SimplexState(std::initializer_list<double> xs) : SimplexState(from_list(xs)) {}

    /// Clamps negative components to zero and renormalises.
    static SimplexState project(Vector x)
    {
        project_in_place(x);
        return SimplexState(std::move(x));
    }

    template <typename Derived>
    static void project_in_place(Eigen::MatrixBase<Derived>& x)
    {
        x = x.cwiseMax(0.0);
        const double s = x.sum();
        if (!(s > 0.0))
            throw Error(ErrorCode::NonFiniteState, "state left the simplex");
        if (std::abs(s - 1.0) > 1e-15)
            x /= s;
    }

    static SimplexState vertex(std::size_t n, std::size_t i)
    {
        Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
        x(static_cast<Eigen::Index>(i)) = 1.0;
        return SimplexState(std::move(x));
    }

    static SimplexState uniform(std::size_t n)
    {
        return SimplexState(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
    }

    const Vector& values() const noexcept { return x_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(x_.size()); }
    double operator[](std::size_t i) const { return x_(static_cast<Eigen::Index>(i)); }

private:
    static Vector from_list(std::initializer_list<double> xs)
    {
        Vector v(static_cast<Eigen::Index>(xs.size()));
        Eigen::Index i = 0;
        for (double d : xs)
            v(i++) = d;
        return v;
    }

    Vector x_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SimplexState> states;
    bool converged = false;

    const SimplexState& terminal_state() const { return states.back(); }
};

namespace detail {

inline void check_dims(const PayoffMatrix& a, Eigen::Index n)
{
    if (static_cast<Eigen::Index>(a.size()) != n)
        throw Error(ErrorCode::DimensionMismatch, "state has " + std::to_string(n) + " components but the game has " +
                                                      std::to_string(a.size()) + " opinions");
}

} // namespace detail

/// f_i = sum_j a_ij x_j
inline Vector fitness(const PayoffMatrix& a, const Vector& x)
{
    detail::check_dims(a, x.size());
    return a.entries() * x;
}

/// phi = x^T A x
inline double average_fitness(const PayoffMatrix& a, const Vector& x)
{
    detail::check_dims(a, x.size());
    return x.dot(a.entries() * x);
}

/// dx_i/dt = x_i (f_i - phi)
inline Vector replicator_field(const PayoffMatrix& a, const Vector& x)
{
    detail::check_dims(a, x.size());
    const Vector f = a.entries() * x;
    const double phi = x.dot(f);
    return (x.array() * (f.array() - phi)).matrix();
}

inline Vector fitness(const PayoffMatrix& a, const SimplexState& x) { return fitness(a, x.values()); }
inline double average_fitness(const PayoffMatrix& a, const SimplexState& x) { return average_fitness(a, x.values()); }
inline Vector replicator_field(const PayoffMatrix& a, const SimplexState& x) { return replicator_field(a, x.values()); }

/// Classical RK4 for the replicator field with clamp-and-renormalise after
/// every step. Owns its scratch vectors so stepping does not allocate.
/// Classical RK4 on the replicator field, followed by projection onto the
/// simplex. N fixes the dimension at compile time (Eigen::Dynamic for any n).
template <int N = Eigen::Dynamic>
class Rk4Stepper {
public:
    using State = Eigen::Matrix<double, N, 1>;

    explicit Rk4Stepper(const PayoffMatrix& a) : a_(a.entries())
    {
        const auto n = a_.rows();
        for (State* v : {&k1_, &k2_, &k3_, &k4_, &tmp_, &f_})
            v->resize(n);
    }

    void field(const State& x, State& out)
    {
        f_.noalias() = a_ * x;
        const double phi = x.dot(f_);
        out.array() = x.array() * (f_.array() - phi);
    }

    /// Max-norm of the field at x. The field is kept for a following advance().
    double field_norm(const State& x)
    {
        field(x, k1_);
        return k1_.cwiseAbs().maxCoeff();
    }

    void step(State& x, double h)
    {
        field(x, k1_);
        finish_step(x, h);
    }

    /// step() reusing the field from the preceding field_norm() or advance()
    /// call at the same x; returns the field max-norm at the new state.
    double advance(State& x, double h)
    {
        finish_step(x, h);
        return field_norm(x);
    }

private:
    void finish_step(State& x, double h)
    {
        tmp_ = x + (0.5 * h) * k1_;
        field(tmp_, k2_);
        tmp_ = x + (0.5 * h) * k2_;
        field(tmp_, k3_);
        tmp_ = x + h * k3_;
        field(tmp_, k4_);
        x += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
        if (!x.allFinite())
            throw Error(ErrorCode::NonFiniteState, "integration produced a non-finite state");
        SimplexState::project_in_place(x);
    }

    Eigen::Matrix<double, N, N> a_;
    State k1_, k2_, k3_, k4_, tmp_, f_;
};

namespace detail {

/// Calls f with std::integral_constant<int, N>, N = 2 or 3 when n matches
/// and Eigen::Dynamic otherwise, so small games run on fixed-size vectors.
template <typename F>
decltype(auto) with_dimension(std::size_t n, F&& f)
{
    if (n == 2)
        return f(std::integral_constant<int, 2>{});
    if (n == 3)
        return f(std::integral_constant<int, 3>{});
    return f(std::integral_constant<int, Eigen::Dynamic>{});
}

} // namespace detail

struct IntegrationOptions {
    double step = 0.01;
    std::size_t max_samples = 10000;
};

namespace detail {

/// Keeps every stride-th sample so that at most max_samples are stored.
class Recorder {
public:
    Recorder(std::uint64_t max_steps, std::size_t max_samples)
    {
        if (max_steps + 1 <= max_samples)
            return;
        const std::uint64_t room = max_samples > 3 ? max_samples - 2 : 1;
        stride_ = (max_steps + room - 1) / room;
    }

    template <typename State>
    void offer(Trajectory& traj, std::uint64_t step_index, double t, const State& x)
    {
        if (step_index % stride_ == 0)
            push(traj, t, x);
    }

    template <typename State>
    static void finish(Trajectory& traj, double t, const State& x)
    {
        if (traj.times.empty() || traj.times.back() < t)
            push(traj, t, x);
    }

private:
    template <typename State>
    static void push(Trajectory& traj, double t, const State& x)
    {
        traj.times.push_back(t);
        traj.states.emplace_back(Vector(x));
    }

    std::uint64_t stride_ = 1;
};

inline std::uint64_t step_count(double span, double step)
{
    const double q = span / step;
    const auto whole = static_cast<std::uint64_t>(std::llround(q));
    if (std::abs(q - static_cast<double>(whole)) < 1e-9 * std::max(1.0, q))
        return std::max<std::uint64_t>(whole, 1);
    return static_cast<std::uint64_t>(std::ceil(q));
}

inline void check_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw Error(ErrorCode::ParameterOutOfRange, std::string(name) + " must be positive and finite");
}

} // namespace detail

/// Integrates from x0 over [0, t_end] with a fixed step (the final step is
/// shortened to land on t_end).
inline Trajectory integrate(const PayoffMatrix& a, const SimplexState& x0, double step, double t_end,
                            std::size_t max_samples = 10000)
{
    detail::check_dims(a, x0.values().size());
    detail::check_positive(step, "step");
    detail::check_positive(t_end, "t_end");

    const std::uint64_t n = detail::step_count(t_end, step);
    return detail::with_dimension(a.size(), [&](auto dim) {
        Rk4Stepper<decltype(dim)::value> stepper(a);
        typename decltype(stepper)::State x = x0.values();
        detail::Recorder rec(n, max_samples);
        Trajectory traj;
        rec.offer(traj, 0, 0.0, x);
        for (std::uint64_t k = 1; k <= n; ++k) {
            const double t_prev = static_cast<double>(k - 1) * step;
            const double t = k == n ? t_end : static_cast<double>(k) * step;
            stepper.step(x, t - t_prev);
            if (k < n)
                rec.offer(traj, k, t, x);
        }
        detail::Recorder::finish(traj, t_end, x);
        traj.converged = stepper.field_norm(x) < 1e-10;
        return traj;
    });
}

/// Integrates until the max-norm of the field drops below tol or max_t is reached.
inline Trajectory converge(const PayoffMatrix& a, const SimplexState& x0, double tol = 1e-10, double max_t = 1e4,
                           const IntegrationOptions& opts = {})
{
    detail::check_dims(a, x0.values().size());
    detail::check_positive(tol, "tol");
    detail::check_positive(max_t, "max_t");
    detail::check_positive(opts.step, "step");

    const std::uint64_t n = detail::step_count(max_t, opts.step);
    return detail::with_dimension(a.size(), [&](auto dim) {
        Rk4Stepper<decltype(dim)::value> stepper(a);
        typename decltype(stepper)::State x = x0.values();
        detail::Recorder rec(n, opts.max_samples);
        Trajectory traj;
        rec.offer(traj, 0, 0.0, x);
        double t = 0.0;
        double norm = stepper.field_norm(x);
        if (norm < tol) {
            traj.converged = true;
            return traj;
        }
        for (std::uint64_t k = 1; k <= n; ++k) {
            const double t_next = k == n ? max_t : static_cast<double>(k) * opts.step;
            norm = stepper.advance(x, t_next - t);
            t = t_next;
            if (norm < tol) {
                traj.converged = true;
                break;
            }
            rec.offer(traj, k, t, x);
        }
        detail::Recorder::finish(traj, t, x);
        return traj;
    });
}

} // namespace replicator
