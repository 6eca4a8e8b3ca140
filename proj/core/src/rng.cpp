#include "persona/rng.hpp"

#include <limits>
#include <stdexcept>

namespace persona {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
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

double Rng::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be >= 1");
    const std::uint64_t umax = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t rem = (umax % n + 1) % n;  // 2^64 mod n
    const std::uint64_t max_ok = umax - rem;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x > max_ok);
    return x % n;
}

Rng Rng::split(std::string_view label) const {
    const std::uint64_t h = fnv1a64(label);
    std::uint64_t seed = h;
    for (std::uint64_t word : state_) {
        std::uint64_t sm = word ^ h;
        seed = rotl(seed, 7) ^ splitmix64(sm);
    }
    return Rng(seed);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t sm = a;
    std::uint64_t x = splitmix64(sm);
    sm ^= 0x9e3779b97f4a7c15ULL * (b + 1);
    x ^= splitmix64(sm);
    sm ^= 0xbf58476d1ce4e5b9ULL * (c + 1);
    x ^= splitmix64(sm);
    return x;
}

}  // namespace persona
