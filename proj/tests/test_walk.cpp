#include <idla/balls.hpp>
#include <idla/lamplighter.hpp>
#include <idla/stats.hpp>
#include <idla/walk.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace idla;

namespace {

const FreeProductGroup T3 = FreeProductGroup::involution_tree(3);

std::vector<std::uint64_t> exit_counts(const FreeProductGroup& g, std::size_t n, std::uint64_t samples,
                                       std::uint64_t seed) {
    std::vector<std::uint64_t> counts(sphere_size(n, g.degree()), 0);
    Engine engine = make_engine({seed, 0});
    for (std::uint64_t s = 0; s < samples; ++s) ++counts[sphere_rank(g, exit_point(g, n, engine))];
    return counts;
}

}  // namespace

TEST(Step, UniformOverGenerators) {
    Engine engine = make_engine({11, 0});
    std::vector<std::uint64_t> counts(3, 0);
    const std::uint64_t draws = 100'000;
    for (std::uint64_t i = 0; i < draws; ++i) {
        const auto s = step(T3, WalkState<FreeProductGroup>{T3.identity(), 0}, engine);
        ASSERT_EQ(s.steps, 1u);
        ASSERT_EQ(s.position.length(), 1u);
        ++counts[s.position.letters[0]];
    }
    const double sigma = stats::binomial_sigma(1.0 / 3.0, draws) * draws;
    for (auto c : counts) EXPECT_NEAR(double(c), draws / 3.0, 3 * sigma);
    EXPECT_GT(stats::chi_square_p_value(stats::chi_square_uniform(counts), 2), 1e-3);
}

TEST(Step, SameSeedSameTrajectory) {
    auto trajectory = [](SeedSpec seed) {
        Engine engine = make_engine(seed);
        WalkState<FreeProductGroup> s{T3.identity(), 0};
        std::vector<Word> out;
        for (int i = 0; i < 200; ++i) out.push_back((s = step(T3, s, engine)).position);
        return out;
    };
    EXPECT_EQ(trajectory({5, 9}), trajectory({5, 9}));
    EXPECT_NE(trajectory({5, 9}), trajectory({5, 10}));
    EXPECT_NE(trajectory({5, 9}), trajectory({6, 9}));
}

TEST(Step, WeightedLawValidation) {
    EXPECT_THROW(WeightedStep({}), invalid_input);
    EXPECT_THROW(WeightedStep({1.0, -1.0}), invalid_input);
    EXPECT_THROW(WeightedStep({0.0, 0.0}), invalid_input);
    Engine engine = make_engine({1, 1});
    const WeightedStep only_b({0.0, 1.0, 0.0});
    for (int i = 0; i < 100; ++i) EXPECT_EQ(only_b(engine, 3), 1u);
}

TEST(RunUntilExit, SingletonExitsOnFirstStep) {
    std::vector<std::uint64_t> counts(3, 0);
    for (std::uint64_t i = 0; i < 30'000; ++i) {
        const auto r = run_until_exit(T3, [](const Word& x) { return x.is_identity(); }, SeedSpec{3, i});
        ASSERT_EQ(r.sigma, 1u);
        ASSERT_EQ(r.site.length(), 1u);
        ++counts[r.site.letters[0]];
    }
    EXPECT_GT(stats::chi_square_p_value(stats::chi_square_uniform(counts), 2), 1e-3);
}

TEST(RunUntilExit, BallExitsOnItsBoundary) {
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto r = run_until_exit(T3, [](const Word& x) { return x.length() <= 1; }, SeedSpec{4, i});
        ASSERT_EQ(r.site.length(), 2u);
        ASSERT_GE(r.sigma, 2u);
    }
}

TEST(RunUntilExit, ExitFromBallOfRadiusTwoIsUniform) {
    std::vector<std::uint64_t> counts(12, 0);
    for (std::uint64_t i = 0; i < 100'000; ++i) {
        const auto r = run_until_exit(T3, [](const Word& x) { return x.length() <= 2; }, SeedSpec{5, i});
        ASSERT_EQ(r.site.length(), 3u);
        ++counts[sphere_rank(T3, r.site)];
    }
    EXPECT_GT(stats::chi_square_p_value(stats::chi_square_uniform(counts), 11), 1e-3);
}

TEST(RunUntilExit, StartOutsideReturnsImmediately) {
    const auto r = run_until_exit(T3, [](const Word&) { return false; }, SeedSpec{});
    EXPECT_EQ(r.sigma, 0u);
    EXPECT_TRUE(r.site.is_identity());
}

TEST(FirstHit, IdentityTargetHitsAtZero) {
    const auto r = first_hit(T3, T3.identity(), HitOptions{}, SeedSpec{});
    EXPECT_EQ(r.outcome, HitOutcome::hit);
    EXPECT_EQ(r.steps, 0u);
}

TEST(FirstHit, ZeroCutoffRejected) {
    EXPECT_THROW(first_hit(T3, T3.parse("a"), HitOptions{0}, SeedSpec{}), invalid_input);
}

TEST(FirstHit, WithoutEscapeRuleNonHitsAreCensored) {
    for (std::uint64_t i = 0; i < 500; ++i) {
        const auto r = first_hit(T3, T3.parse("abc"), HitOptions{16, 0, 1}, SeedSpec{6, i});
        ASSERT_NE(r.outcome, HitOutcome::miss);
        if (r.outcome == HitOutcome::censored) ASSERT_EQ(r.steps, 16u);
    }
}

class HitFrequency : public ::testing::TestWithParam<std::size_t> {};

TEST_P(HitFrequency, MatchesInversePowerOfBranching) {
    const std::size_t len = GetParam();
    Word z;
    for (std::size_t i = 0; i < len; ++i) z.letters.push_back(static_cast<std::uint8_t>(i % 2));
    const std::uint64_t walks = 100'000;
    // escape radius 40: a walk that far away returns with probability 2^-40
    const HitOptions opts{10'000, 40, 4};
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < walks; ++i) hits += first_hit(T3, z, opts, SeedSpec{7 + len, i}).outcome == HitOutcome::hit;
    const double expected = std::pow(0.5, double(len));
    EXPECT_NEAR(double(hits) / walks, expected, 3 * stats::binomial_sigma(expected, walks));
}

INSTANTIATE_TEST_SUITE_P(Lengths, HitFrequency, ::testing::Values(1u, 3u));

TEST(ExitPoint, RadiusZeroUniformOverGenerators) {
    const auto counts = exit_counts(T3, 0, 30'000, 21);
    EXPECT_EQ(counts.size(), 3u);
    EXPECT_GT(stats::chi_square_p_value(stats::chi_square_uniform(counts), 2), 1e-3);
}

TEST(ExitPoint, RadiusTwoUniformOverTwelvePoints) {
    const auto counts = exit_counts(T3, 2, 100'000, 22);
    EXPECT_EQ(counts.size(), 12u);
    EXPECT_GT(stats::chi_square_p_value(stats::chi_square_uniform(counts), 11), 1e-3);
}

TEST(ExitPoint, FirstArrivalOnTheSphere) {
    // Replays the same engine draw by draw: the returned point is the first
    // position of word length n+1, and nothing before it reaches that length.
    for (std::uint64_t s = 0; s < 200; ++s) {
        Engine a = make_engine({23, s}), b = make_engine({23, s});
        const Word got = exit_point(T3, 3, a);
        Word pos;
        UniformStep law;
        while (pos.length() < 4) {
            T3.step(pos, law(b, 3));
            ASSERT_LE(pos.length(), 4u);
        }
        ASSERT_EQ(pos, got);
    }
}

TEST(ExitPoint, TotalVariationSmall) {
    for (unsigned q : {3u, 4u}) {
        const auto g = FreeProductGroup::involution_tree(q);
        for (std::size_t n = 0; n <= 3; ++n) {
            const std::uint64_t samples = 100'000;
            const auto counts = exit_counts(g, n, samples, 30 + q * 10 + n);
            double tv = 0.0;
            for (auto c : counts) tv += std::abs(double(c) / samples - 1.0 / counts.size());
            EXPECT_LT(tv / 2, 0.05) << "q=" << q << " n=" << n;
        }
    }
}

TEST(WordDistance, TreeOverloadMatchesGeneric) {
    Engine engine = make_engine({24, 0});
    const auto g = FreeProductGroup::free_group(2);
    for (int t = 0; t < 1000; ++t) {
        Word x, y;
        for (auto i = uniform_below(engine, 10); i > 0; --i) g.step(x, uniform_below(engine, 4));
        for (auto i = uniform_below(engine, 10); i > 0; --i) g.step(y, uniform_below(engine, 4));
        ASSERT_EQ(word_distance(g, x, y), g.word_length(g.multiply(g.inverse(x), y)));
    }
}

TEST(Lamplighter, WalkDeterministic) {
    LamplighterGroup g;
    auto walk = [&](SeedSpec seed) {
        Engine e = make_engine(seed);
        WalkState<LamplighterGroup> s{g.identity(), 0};
        for (int i = 0; i < 1000; ++i) s = step(g, s, e);
        return s.position;
    };
    EXPECT_EQ(walk({1, 2}), walk({1, 2}));
}
