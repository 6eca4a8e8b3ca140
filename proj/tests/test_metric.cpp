#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "persona/metric.hpp"
#include "persona/rng.hpp"

using namespace persona;

TEST_SUITE("metric") {

TEST_CASE("endpoints recover local and global exactly") {
    const PerfPair perf{0.81, 0.64, Orientation::higher_is_better};
    CHECK(personalization_score(1.0, perf) == 0.81);
    CHECK(personalization_score(0.0, perf) == 0.64);
    CHECK(personalization_score(0.5, {0.2, 0.4, Orientation::higher_is_better}) ==
          doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("alpha outside [0,1] is an error") {
    const PerfPair perf{0.5, 0.5, Orientation::higher_is_better};
    CHECK_THROWS_AS(personalization_score(-0.01, perf), std::invalid_argument);
    CHECK_THROWS_AS(personalization_score(1.01, perf), std::invalid_argument);
    CHECK_THROWS_AS(personalization_score(std::nan(""), perf), std::invalid_argument);
}

TEST_CASE("reference break-even point: 0.9124 with single preferred above") {
    // g1 - g0 = -0.0545, p0 - p1 = -0.00523, treated as losses
    // (lower is better), matching the published arithmetic.
    const PerfPair single{0.20, 0.30, Orientation::lower_is_better};
    const PerfPair average{0.20523, 0.2455, Orientation::lower_is_better};
    const AlphaCutoff cutoff = breakeven_alpha(single, average);
    REQUIRE(cutoff.value.has_value());
    CHECK(*cutoff.value == doctest::Approx(0.9124).epsilon(0.0005));
    CHECK(cutoff.above == Preference::first);
    CHECK(cutoff.below == Preference::second);
}

TEST_CASE("equal globals put the cutoff at zero") {
    const PerfPair a{0.9, 0.5, Orientation::higher_is_better};
    const PerfPair b{0.7, 0.5, Orientation::higher_is_better};
    const AlphaCutoff cutoff = breakeven_alpha(a, b);
    REQUIRE(cutoff.value.has_value());
    CHECK(*cutoff.value == 0.0);
    CHECK(cutoff.above == Preference::first);
    CHECK(cutoff.below == Preference::indifferent);  // empty side
}

TEST_CASE("equal locals put the cutoff at one") {
    const PerfPair a{0.8, 0.6, Orientation::higher_is_better};
    const PerfPair b{0.8, 0.7, Orientation::higher_is_better};
    const AlphaCutoff cutoff = breakeven_alpha(a, b);
    REQUIRE(cutoff.value.has_value());
    CHECK(*cutoff.value == 1.0);
    CHECK(cutoff.above == Preference::indifferent);  // empty side
    CHECK(cutoff.below == Preference::second);
}

TEST_CASE("identical performances are indifferent everywhere") {
    const PerfPair a{0.8, 0.6, Orientation::higher_is_better};
    const AlphaCutoff cutoff = breakeven_alpha(a, a);
    CHECK(!cutoff.value.has_value());
    CHECK(cutoff.above == Preference::indifferent);
    CHECK(cutoff.below == Preference::indifferent);
}

TEST_CASE("no crossing inside [0,1] reports a constant preference") {
    // First dominates on both axes: cutoff formula lands outside [0,1].
    const PerfPair strong{0.9, 0.8, Orientation::higher_is_better};
    const PerfPair weak{0.7, 0.6, Orientation::higher_is_better};
    const AlphaCutoff cutoff = breakeven_alpha(strong, weak);
    CHECK(!cutoff.value.has_value());
    CHECK(cutoff.above == Preference::first);
    CHECK(cutoff.below == Preference::first);
    for (int i = 0; i <= 100; ++i) {
        CHECK(preferred(i / 100.0, strong, weak) == Preference::first);
    }
}

TEST_CASE("constant score difference with zero slope") {
    // p0-p1 == g0-g1 != 0: difference is constant, denominator is zero.
    const PerfPair a{0.8, 0.7, Orientation::higher_is_better};
    const PerfPair b{0.75, 0.65, Orientation::higher_is_better};
    const AlphaCutoff cutoff = breakeven_alpha(a, b);
    CHECK(!cutoff.value.has_value());
    CHECK(cutoff.above == Preference::first);
    CHECK(cutoff.below == Preference::first);
}

TEST_CASE("preference at the cutoff is indifferent") {
    Rng rng(55);
    for (int round = 0; round < 200; ++round) {
        const PerfPair a{rng.next_uniform(), rng.next_uniform(), Orientation::higher_is_better};
        const PerfPair b{rng.next_uniform(), rng.next_uniform(), Orientation::higher_is_better};
        const AlphaCutoff cutoff = breakeven_alpha(a, b);
        if (!cutoff.value) continue;
        CHECK(std::abs(personalization_score(*cutoff.value, a) -
                       personalization_score(*cutoff.value, b)) < 1e-9);
        CHECK(preferred(*cutoff.value, a, b) == Preference::indifferent);
    }
}

TEST_CASE("preferred respects orientation") {
    const PerfPair small{0.2, 0.3, Orientation::lower_is_better};
    const PerfPair large{0.4, 0.5, Orientation::lower_is_better};
    CHECK(preferred(0.5, small, large) == Preference::first);
    const PerfPair small_acc{0.2, 0.3, Orientation::higher_is_better};
    const PerfPair large_acc{0.4, 0.5, Orientation::higher_is_better};
    CHECK(preferred(0.5, small_acc, large_acc) == Preference::second);
}

TEST_CASE("mismatched orientations are an error") {
    const PerfPair a{0.2, 0.3, Orientation::lower_is_better};
    const PerfPair b{0.2, 0.3, Orientation::higher_is_better};
    CHECK_THROWS_AS(preferred(0.5, a, b), std::invalid_argument);
    CHECK_THROWS_AS(breakeven_alpha(a, b), std::invalid_argument);
}

TEST_CASE("score is affine: three-point collinearity") {
    Rng rng(77);
    for (int round = 0; round < 5000; ++round) {
        const PerfPair perf{rng.next_uniform() * 2 - 1, rng.next_uniform() * 2 - 1,
                            Orientation::higher_is_better};
        const double a1 = rng.next_uniform();
        const double a2 = rng.next_uniform();
        const double mid = (a1 + a2) / 2;
        const double lhs = personalization_score(mid, perf);
        const double rhs =
            (personalization_score(a1, perf) + personalization_score(a2, perf)) / 2;
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("score stays within [min, max] of the pair") {
    Rng rng(88);
    for (int round = 0; round < 1000; ++round) {
        const double local = rng.next_uniform();
        const double global = rng.next_uniform();
        const PerfPair perf{local, global, Orientation::higher_is_better};
        const double alpha = rng.next_uniform();
        const double score = personalization_score(alpha, perf);
        CHECK(score >= std::min(local, global) - 1e-12);
        CHECK(score <= std::max(local, global) + 1e-12);
    }
}

TEST_CASE("preference is constant on each side of the cutoff") {
    Rng rng(99);
    int with_cutoff = 0;
    for (int round = 0; round < 500 || with_cutoff < 50; ++round) {
        const PerfPair a{rng.next_uniform(), rng.next_uniform(), Orientation::higher_is_better};
        const PerfPair b{rng.next_uniform(), rng.next_uniform(), Orientation::higher_is_better};
        const AlphaCutoff cutoff = breakeven_alpha(a, b);
        if (!cutoff.value) continue;
        ++with_cutoff;
        for (int i = 0; i <= 100; ++i) {
            const double alpha = i / 100.0;
            if (std::abs(alpha - *cutoff.value) < 1e-6) continue;
            const Preference expected = alpha > *cutoff.value ? cutoff.above : cutoff.below;
            if (expected == Preference::indifferent) continue;
            CHECK(preferred(alpha, a, b) == expected);
        }
        if (round > 5000) break;
    }
    CHECK(with_cutoff >= 50);
}

TEST_CASE("positive rescaling changes neither cutoff nor preferences") {
    Rng rng(111);
    for (int round = 0; round < 200; ++round) {
        const PerfPair a{rng.next_uniform(), rng.next_uniform(), Orientation::higher_is_better};
        const PerfPair b{rng.next_uniform(), rng.next_uniform(), Orientation::higher_is_better};
        const double c = 0.1 + 10 * rng.next_uniform();
        const PerfPair as{a.local * c, a.global * c, a.orientation};
        const PerfPair bs{b.local * c, b.global * c, b.orientation};
        const AlphaCutoff base = breakeven_alpha(a, b);
        const AlphaCutoff scaled = breakeven_alpha(as, bs);
        CHECK(base.value.has_value() == scaled.value.has_value());
        if (base.value) {
            CHECK(*base.value == doctest::Approx(*scaled.value).epsilon(1e-9));
        }
        CHECK(base.above == scaled.above);
        CHECK(base.below == scaled.below);
        CHECK(preferred(0.25, a, b) == preferred(0.25, as, bs));
        CHECK(preferred(0.75, a, b) == preferred(0.75, as, bs));
    }
}

}  // TEST_SUITE
