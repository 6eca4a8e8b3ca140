#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace persona {

/// Deterministic, explicitly seeded generator used by every stochastic step.
///
/// Algorithm (pinned, identical on every platform): xoshiro256++ with the
/// four state words expanded from the seed by splitmix64. `next_below` is
/// modulo-bias-free (classic rejection), `shuffle` is Fisher-Yates, and
/// `split` derives an independent child stream by folding an FNV-1a hash of
/// the label into the current state through splitmix64. An Rng value is
/// single-owner; take children via split() before going parallel.
class Rng {
public:
    static constexpr const char* kAlgorithm = "xoshiro256++/splitmix64";

    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1), 53 random bits.
    double next_uniform();

    /// Uniform integer in [0, n). n must be >= 1.
    std::uint64_t next_below(std::uint64_t n);

    /// Fisher-Yates, back to front.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Child stream derived from (current state, label). Does not advance
    /// this generator; distinct labels give independent streams.
    Rng split(std::string_view label) const;

private:
    std::array<std::uint64_t, 4> state_;
};

/// Stable 64-bit mix of up to three values, used to derive trial seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace persona
