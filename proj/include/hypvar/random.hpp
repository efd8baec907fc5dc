#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace hypvar {

/*!
 * A seedable, splittable random stream.
 *
 * The generator is xoshiro256++; its state is derived from
 * (root_seed, stream_index) through SplitMix64, so equal pairs reproduce
 * identical sequences and distinct pairs give unrelated ones. Streams are
 * plain values: copy one to fork it, pass by reference to advance it.
 * Satisfies UniformRandomBitGenerator.
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t root_seed, std::uint64_t stream_index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1).
    double uniform01();

    std::uint64_t root_seed() const { return root_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t root_seed_;
    std::uint64_t stream_index_;
    std::uint64_t state_[4];
};

/// Stream index for replicate `replicate` of experiment `experiment_id`.
std::uint64_t stream_index_for(std::string_view experiment_id, std::uint64_t replicate);

/// Default cap on the Poisson mean accepted by poisson_draw.
inline constexpr double kDefaultPoissonMeanCap = 2e7;

/*!
 * One Poisson(mean) variate. mean == 0 returns 0. A mean above `cap`
 * throws BudgetError (see point_process.hpp).
 */
std::int64_t poisson_draw(double mean, RngStream& rng, double cap = kDefaultPoissonMeanCap);

} // namespace hypvar
