#include "test_util.hpp"

#include <idla/balls.hpp>
#include <idla/cayley.hpp>
#include <idla/lamplighter.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace idla;

namespace {

const FreeProductGroup T3 = FreeProductGroup::involution_tree(3);

}  // namespace

TEST(BallVolume, Examples) {
    EXPECT_EQ(ball_volume(0, 3), 1u);
    EXPECT_EQ(ball_volume(2, 3), 10u);
    EXPECT_EQ(ball_volume(2, 4), 17u);
}

TEST(SphereSize, Examples) {
    EXPECT_EQ(sphere_size(0, 3), 3u);
    EXPECT_EQ(sphere_size(2, 3), 12u);
    EXPECT_EQ(sphere_size(1, 5), 20u);
}

TEST(BallVolume, MatchesBfsForSmallTrees) {
    for (unsigned q : {3u, 4u, 5u}) {
        const auto g = FreeProductGroup::involution_tree(q);
        const auto layers = bfs_layers(g, 8);
        std::uint64_t total = 0;
        for (std::size_t n = 0; n < 8; ++n) {
            total += layers[n].size();
            EXPECT_EQ(ball_volume(n, q), total);
            EXPECT_EQ(sphere_size(n, q), layers[n + 1].size());
        }
    }
}

TEST(BallVolume, OverflowAndDegreeErrors) {
    EXPECT_THROW(ball_volume(64, 3), overflow_error);
    EXPECT_THROW(sphere_size(40, 26), overflow_error);
    EXPECT_THROW(ball_volume(1, 2), invalid_input);
}

TEST(BallVolume, ExponentialGrowthBounds) {
    for (unsigned q : {3u, 4u, 5u}) {
        const double K = std::log(q - 1.0);
        for (std::size_t n = 0; n <= 20; ++n) {
            const double v = double(ball_volume(n, q));
            const double e = std::exp(K * double(n));
            EXPECT_LE(std::exp(-K) * e, v);
            EXPECT_LE(v, double(q) / (q - 2.0) * e);
            if (n >= 1) EXPECT_LE(v, 3.0 * std::pow(double(n), 3) * e);
        }
    }
}

TEST(Contains, Examples) {
    EXPECT_TRUE(contains(T3, T3.identity(), BallSpec{T3.identity(), 0}));
    EXPECT_FALSE(contains(T3, T3.parse("abc"), BallSpec{T3.identity(), 2}));
    EXPECT_TRUE(contains(T3, T3.parse("ab"), BallSpec{T3.identity(), 2}));
}

TEST(Contains, LeftInvariant) {
    Engine engine = make_engine({51, 0});
    for (int t = 0; t < 2000; ++t) {
        const Word g = idla::testing::random_element(T3, 10, engine);
        const Word z = idla::testing::random_element(T3, 10, engine);
        const std::size_t n = uniform_below(engine, 8);
        ASSERT_EQ(contains(T3, T3.multiply(g, z), BallSpec{g, n}), contains(T3, z, BallSpec{T3.identity(), n}));
    }
}

TEST(Contains, LamplighterUnsupported) {
    LamplighterGroup g;
    EXPECT_THROW(contains(g, g.identity(), BallSpec{}), unsupported_operation);
}

TEST(EnumerateSphere, SmallExamples) {
    std::vector<std::string> got;
    for (const Word& z : enumerate_sphere(T3, 0)) got.push_back(T3.format(z));
    EXPECT_EQ(got, (std::vector<std::string>{"a", "b", "c"}));
    got.clear();
    for (const Word& z : enumerate_sphere(T3, 1)) {
        got.push_back(T3.format(z));
        EXPECT_NE(z.letters[0], z.letters[1]);
    }
    EXPECT_EQ(got, (std::vector<std::string>{"ab", "ac", "ba", "bc", "ca", "cb"}));
}

TEST(EnumerateSphere, CountOrderAndUniqueInnerNeighbour) {
    for (unsigned q : {3u, 4u, 5u}) {
        const auto g = FreeProductGroup::standard(q);
        for (std::size_t n = 0; n <= 5; ++n) {
            std::vector<Word> words;
            for (const Word& z : enumerate_sphere(g, n)) {
                ASSERT_EQ(z.length(), n + 1);
                std::size_t inside = 0;
                for (const auto& y : g.neighbors(z)) inside += y.length() <= n;
                ASSERT_EQ(inside, 1u);
                ASSERT_EQ(sphere_rank(g, z), words.size());
                ASSERT_EQ(sphere_unrank(g, n, words.size()), z);
                words.push_back(z);
            }
            EXPECT_EQ(words.size(), sphere_size(n, q));
            EXPECT_TRUE(std::is_sorted(words.begin(), words.end()));
        }
    }
}

TEST(EnumerateSphere, BudgetExceededNamesRequiredCount) {
    try {
        enumerate_sphere(T3, 10, 1000);
        FAIL() << "expected resource_error";
    } catch (const resource_error& e) {
        EXPECT_EQ(e.required(), sphere_size(10, 3));
        EXPECT_NE(std::string(e.what()).find(std::to_string(sphere_size(10, 3))), std::string::npos);
    }
}

TEST(BoundaryInclusion, HoldsWithTheNaturalUnit) {
    for (std::size_t n = 0; n <= 6; ++n) EXPECT_TRUE(check_boundary_inclusion(T3, n));
    const auto t5 = FreeProductGroup::involution_tree(5);
    for (std::size_t n = 0; n <= 4; ++n) EXPECT_TRUE(check_boundary_inclusion(t5, n));
}

TEST(BoundaryInclusion, CorruptedUnitFails) {
    EXPECT_FALSE(check_boundary_inclusion(T3, 2, 0.5 * std::log(2.0)));
}
