#include "hypvar/random.hpp"

#include "hypvar/errors.hpp"

#include <random>
#include <sstream>

namespace hypvar {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t x) {
    return splitmix64(x);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

RngStream::RngStream(std::uint64_t root_seed, std::uint64_t stream_index)
    : root_seed_(root_seed), stream_index_(stream_index) {
    std::uint64_t sm = mix(root_seed) ^ mix(stream_index ^ 0x6a09e667f3bcc908ULL);
    for (auto& word : state_) {
        word = splitmix64(sm);
    }
}

RngStream::result_type RngStream::operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform01() {
    // 53 random bits, shifted by half an ulp so 0 is never produced.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t stream_index_for(std::string_view experiment_id, std::uint64_t replicate) {
    // FNV-1a over the id, then mixed with the replicate counter.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : experiment_id) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix(h ^ mix(replicate));
}

std::int64_t poisson_draw(double mean, RngStream& rng, double cap) {
    if (!(mean >= 0.0)) {
        throw std::invalid_argument("poisson_draw: mean must be >= 0");
    }
    if (mean > cap) {
        std::ostringstream msg;
        msg << "poisson_draw: mean " << mean << " exceeds the count cap " << cap;
        throw BudgetError(msg.str(), mean);
    }
    if (mean == 0.0) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> dist(mean);
    return dist(rng);
}

} // namespace hypvar
