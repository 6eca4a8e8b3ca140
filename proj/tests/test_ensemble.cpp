#include <doctest.h>

#include <cmath>

#include "persona/ensemble.hpp"
#include "test_support.hpp"

using namespace persona;
using persona::testing::constant_model;

namespace {

const std::vector<std::string> kSharedWord{"t"};
const std::vector<std::string> kTokens{"t"};

std::vector<ModelParams> members_with_outputs(const std::vector<double>& probabilities) {
    std::vector<ModelParams> members;
    for (double p : probabilities) members.push_back(constant_model(p, kSharedWord));
    return members;
}

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("average of member outputs") {
    const auto members = members_with_outputs({0.6, 0.8});
    CHECK(predict_average(members, kTokens) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("single member is the identity for both strategies") {
    const auto members = members_with_outputs({0.37});
    CHECK(predict_average(members, kTokens) == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(predict_confident(members, kTokens) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("average stays within member bounds") {
    Rng rng(41);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> ps;
        const int n = 1 + static_cast<int>(rng.next_below(6));
        for (int i = 0; i < n; ++i) ps.push_back(0.05 + 0.9 * rng.next_uniform());
        const auto members = members_with_outputs(ps);
        const double avg = predict_average(members, kTokens);
        CHECK(avg >= *std::min_element(ps.begin(), ps.end()) - 1e-9);
        CHECK(avg <= *std::max_element(ps.begin(), ps.end()) + 1e-9);
    }
}

TEST_CASE("confidence picks the output farthest from 0.5") {
    const auto members = members_with_outputs({0.6, 0.1});
    CHECK(predict_confident(members, kTokens) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("tied confidence breaks to the lowest member index") {
    // b2 = -/+0.8003 produces outputs ~0.31/~0.69 whose distances from 0.5
    // are bitwise equal, so the tie rule alone decides.
    std::vector<ModelParams> members{constant_model(0.5, kSharedWord),
                                     constant_model(0.5, kSharedWord)};
    members[0].b2 = -0.8003;
    members[1].b2 = 0.8003;
    const std::vector<int> idx = members[0].vocab.encode(kTokens);
    const double low = forward_infer(members[0], idx);
    const double high = forward_infer(members[1], idx);
    REQUIRE(std::abs(low - 0.5) == std::abs(high - 0.5));
    CHECK(predict_confident(members, kTokens) == low);
}

TEST_CASE("confidence output is always exactly one member's output") {
    Rng rng(43);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> ps;
        const int n = 1 + static_cast<int>(rng.next_below(7));
        for (int i = 0; i < n; ++i) ps.push_back(0.05 + 0.9 * rng.next_uniform());
        const auto members = members_with_outputs(ps);
        const double chosen = predict_confident(members, kTokens);
        bool is_member_output = false;
        for (const auto& member : members) {
            const std::vector<int> idx = member.vocab.encode(kTokens);
            is_member_output = is_member_output || chosen == forward_infer(member, idx);
        }
        CHECK(is_member_output);
    }
}

TEST_CASE("permutation invariance") {
    Rng rng(47);
    std::vector<double> ps{0.91, 0.2, 0.55, 0.35, 0.7};  // distinct confidences
    auto members = members_with_outputs(ps);
    const double avg = predict_average(members, kTokens);
    const double conf = predict_confident(members, kTokens);
    for (int round = 0; round < 10; ++round) {
        rng.shuffle(members);
        CHECK(predict_average(members, kTokens) == doctest::Approx(avg).epsilon(1e-12));
        CHECK(predict_confident(members, kTokens) == doctest::Approx(conf).epsilon(1e-12));
    }
}

TEST_CASE("identical members collapse to the single-model output") {
    const auto members = members_with_outputs({0.62, 0.62, 0.62});
    const std::vector<int> idx = members[0].vocab.encode(kTokens);
    const double single = forward_infer(members[0], idx);
    CHECK(predict_average(members, kTokens) == doctest::Approx(single).epsilon(1e-12));
    CHECK(predict_confident(members, kTokens) == doctest::Approx(single).epsilon(1e-12));
}

TEST_CASE("empty member lists are errors") {
    const std::vector<ModelParams> none;
    CHECK_THROWS_AS(predict_average(none, kTokens), DataError);
    CHECK_THROWS_AS(predict_confident(none, kTokens), DataError);
    CHECK_THROWS_AS(Predictor::ensemble({}, Strategy::average), DataError);
}

TEST_CASE("members encode with their own private vocabs") {
    // Member 0 knows "left" only, member 1 knows "right" only. On "left",
    // member 1 sees an empty encoding and outputs exactly 0.5.
    std::vector<ModelParams> members{constant_model(0.9, {"left"}),
                                     constant_model(0.2, {"right"})};
    const std::vector<std::string> left{"left"};
    CHECK(predict_average(members, left) == doctest::Approx((0.9 + 0.5) / 2).epsilon(1e-9));
    CHECK(predict_confident(members, left) == doctest::Approx(0.9).epsilon(1e-9));
}

TEST_CASE("predictor dispatches per strategy and round-trips") {
    std::vector<ModelParams> members = members_with_outputs({0.6, 0.9});
    Predictor average = Predictor::ensemble(members, Strategy::average);
    Predictor confident = Predictor::ensemble(members, Strategy::confidence);
    Predictor single = Predictor::single_model(members[0]);
    CHECK(average.predict(kTokens) == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(confident.predict(kTokens) == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(single.predict(kTokens) == doctest::Approx(0.6).epsilon(1e-9));

    const std::string bytes = predictor_to_bytes(confident);
    const Predictor reloaded = predictor_from_bytes(bytes);
    CHECK(reloaded.strategy == Strategy::confidence);
    REQUIRE(reloaded.members.size() == 2);
    CHECK(predictor_to_bytes(reloaded) == bytes);
    CHECK(reloaded.predict(kTokens) == doctest::Approx(0.9).epsilon(1e-9));

    CHECK_THROWS_AS(predictor_from_bytes("garbage"), DataError);
}

TEST_CASE("strategy names round-trip") {
    for (Strategy s : {Strategy::single, Strategy::average, Strategy::confidence}) {
        CHECK(strategy_from_name(strategy_name(s)) == s);
    }
    CHECK_THROWS_AS(strategy_from_name("voting"), DataError);
}

}  // TEST_SUITE
