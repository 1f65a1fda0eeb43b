#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "replicator/dynamics.hpp"
#include "replicator/errors.hpp"
#include "replicator/model_zoo.hpp"

namespace replicator {

/// Finite well-mixed population: number of agents holding each opinion.
class Population {
public:
    explicit Population(std::vector<std::int64_t> counts) : counts_(std::move(counts))
    {
        if (counts_.empty())
            throw Error(ErrorCode::InvalidState, "population needs at least one opinion");
        for (auto c : counts_)
            if (c < 0)
                throw Error(ErrorCode::InvalidState, "opinion counts must be non-negative");
        total_ = std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
        if (total_ < 2)
            throw Error(ErrorCode::InvalidState, "population needs at least two agents");
    }

    /// Rounds N x to integer counts by largest remainder.
    static Population from_frequencies(const SimplexState& x, std::int64_t total)
    {
        if (total < 2)
            throw Error(ErrorCode::ParameterOutOfRange, "population size must be at least 2");
        const auto n = x.size();
        std::vector<std::int64_t> counts(n);
        std::vector<std::pair<double, std::size_t>> rem;
        std::int64_t assigned = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double exact = x[i] * static_cast<double>(total);
            counts[i] = static_cast<std::int64_t>(std::floor(exact));
            assigned += counts[i];
            rem.emplace_back(exact - static_cast<double>(counts[i]), i);
        }
        std::stable_sort(rem.begin(), rem.end(), [](const auto& p, const auto& q) { return p.first > q.first; });
        for (std::size_t k = 0; assigned < total; ++k, ++assigned)
            ++counts[rem[k % n].second];
        return Population(std::move(counts));
    }

    const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
    std::int64_t total() const noexcept { return total_; }
    std::size_t size() const noexcept { return counts_.size(); }

    Vector frequencies() const
    {
        Vector x(static_cast<Eigen::Index>(counts_.size()));
        for (std::size_t i = 0; i < counts_.size(); ++i)
            x(static_cast<Eigen::Index>(i)) = static_cast<double>(counts_[i]) / static_cast<double>(total_);
        return x;
    }

    bool monomorphic() const
    {
        return std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }) == 1;
    }

    /// Moves one agent from opinion `from` to opinion `to`.
    void convert(std::size_t from, std::size_t to)
    {
        --counts_[from];
        ++counts_[to];
    }

    friend bool operator==(const Population&, const Population&) = default;

private:
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
};

/// Largest minus smallest payoff entry.
inline double payoff_spread(const PayoffMatrix& a)
{
    return a.entries().maxCoeff() - a.entries().minCoeff();
}

/// Replicator time covered by one imitation step: the mean-field drift per
/// step is x_i (f_i - phi) / (spread * N).
inline double re_time_per_step(const PayoffMatrix& a, std::int64_t total)
{
    return 1.0 / (payoff_spread(a) * static_cast<double>(total));
}

namespace detail {

inline std::size_t opinion_at(const std::vector<std::int64_t>& counts, std::int64_t agent)
{
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (agent < counts[i])
            return i;
        agent -= counts[i];
    }
    return counts.size() - 1;
}

/// Expected payoff of one agent holding opinion i, excluding itself.
inline double payoff_excluding_self(const Matrix& a, const std::vector<std::int64_t>& counts, std::int64_t total,
                                    std::size_t i)
{
    const auto ii = static_cast<Eigen::Index>(i);
    double s = -a(ii, ii);
    for (std::size_t j = 0; j < counts.size(); ++j)
        s += a(ii, static_cast<Eigen::Index>(j)) * static_cast<double>(counts[j]);
    return s / static_cast<double>(total - 1);
}

} // namespace detail

/// One pairwise-comparison update: a focal agent and a distinct model agent
/// are drawn uniformly; the focal agent copies the model's opinion with
/// probability max(0, pi_model - pi_focal) / spread.
template <typename Rng>
void step_in_place(const PayoffMatrix& a, Population& pop, Rng& rng)
{
    detail::check_dims(a, static_cast<Eigen::Index>(pop.size()));
    const auto total = pop.total();
    std::uniform_int_distribution<std::int64_t> pick_focal(0, total - 1);
    std::uniform_int_distribution<std::int64_t> pick_model(0, total - 2);
    const std::int64_t focal = pick_focal(rng);
    std::int64_t model = pick_model(rng);
    if (model >= focal)
        ++model;
    const auto& counts = pop.counts();
    const std::size_t i = detail::opinion_at(counts, focal);
    const std::size_t j = detail::opinion_at(counts, model);
    if (i == j)
        return;
    const double spread = payoff_spread(a);
    if (!(spread > 0.0))
        return;
    const double gain = detail::payoff_excluding_self(a.entries(), counts, total, j) -
                        detail::payoff_excluding_self(a.entries(), counts, total, i);
    if (gain <= 0.0)
        return;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < gain / spread)
        pop.convert(i, j);
}

template <typename Rng>
Population step(const PayoffMatrix& a, const Population& pop, Rng& rng)
{
    Population next = pop;
    step_in_place(a, next, rng);
    return next;
}

struct Snapshot {
    std::int64_t step = 0;
    Vector x;
};

/// Runs `steps` updates from pop0 with a mt19937_64 seeded by `seed`,
/// recording frequencies every `every` steps (and at the last step).
inline std::vector<Snapshot> run(const PayoffMatrix& a, const Population& pop0, std::int64_t steps,
                                 std::uint64_t seed, std::int64_t every = 0)
{
    if (steps < 0)
        throw Error(ErrorCode::ParameterOutOfRange, "step count must be non-negative");
    detail::check_dims(a, static_cast<Eigen::Index>(pop0.size()));
    if (every <= 0)
        every = pop0.total();
    std::mt19937_64 rng(seed);
    Population pop = pop0;
    std::vector<Snapshot> out;
    out.push_back({0, pop.frequencies()});
    for (std::int64_t s = 1; s <= steps; ++s) {
        step_in_place(a, pop, rng);
        if (s % every == 0 || s == steps)
            out.push_back({s, pop.frequencies()});
    }
    return out;
}

} // namespace replicator
