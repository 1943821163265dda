#include "test_util.hpp"

#include <idla/balls.hpp>
#include <idla/cayley.hpp>
#include <idla/lamplighter.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <queue>

using namespace idla;
using idla::testing::naive_reduce;

namespace {

const FreeProductGroup T3 = FreeProductGroup::involution_tree(3);
const FreeProductGroup F2 = FreeProductGroup::free_group(2);

Word w(const FreeProductGroup& g, std::string_view s) { return g.parse(s); }

}  // namespace

TEST(Reduce, CancelsInversePair) {
    // F_2 letters: a, A = a^-1, b, B = b^-1.
    EXPECT_EQ(F2.format(F2.reduce(std::vector<std::uint8_t>{0, 1})), "1");
    EXPECT_TRUE(F2.reduce(std::vector<std::uint8_t>{0, 1}).is_identity());
}

TEST(Reduce, InvolutionSquaresToIdentity) {
    EXPECT_TRUE(T3.reduce(std::vector<std::uint8_t>{0, 0}).is_identity());
}

TEST(Reduce, SingleInnerCancellation) {
    EXPECT_EQ(F2.format(F2.reduce(std::vector<std::uint8_t>{0, 2, 3, 0})), "aa");
}

TEST(Reduce, RejectsUnknownGenerator) {
    EXPECT_THROW(T3.reduce(std::vector<std::uint8_t>{0, 3}), invalid_input);
}

TEST(Multiply, IdentityLaw) {
    const Word x = w(T3, "abca");
    EXPECT_EQ(T3.multiply(T3.identity(), x), x);
    EXPECT_EQ(T3.multiply(x, T3.identity()), x);
}

TEST(Multiply, ReducesAtSeam) {
    EXPECT_EQ(F2.format(F2.multiply(w(F2, "ab"), w(F2, "Ba"))), "aa");
    EXPECT_EQ(T3.format(T3.multiply(w(T3, "ab"), w(T3, "b"))), "a");
}

TEST(Multiply, ModelMismatchIsInvalidInput) {
    Word bad;
    bad.letters = {3};
    EXPECT_THROW(T3.multiply(bad, w(T3, "a")), invalid_input);
    // a letter that is valid in F_2 but not reduced there
    Word unreduced;
    unreduced.letters = {0, 1};
    EXPECT_THROW(F2.multiply(unreduced, w(F2, "a")), invalid_input);
}

TEST(Inverse, Examples) {
    EXPECT_TRUE(T3.inverse(T3.identity()).is_identity());
    EXPECT_EQ(F2.format(F2.inverse(w(F2, "ab"))), "BA");
    EXPECT_EQ(T3.format(T3.inverse(w(T3, "abc"))), "cba");
}

TEST(Neighbors, TreeExamples) {
    auto fmt = [](const std::vector<Word>& v) {
        std::vector<std::string> s;
        for (const auto& x : v) s.push_back(T3.format(x));
        std::sort(s.begin(), s.end());
        return s;
    };
    EXPECT_EQ(fmt(T3.neighbors(T3.identity())), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(fmt(T3.neighbors(w(T3, "a"))), (std::vector<std::string>{"1", "ab", "ac"}));
}

TEST(Neighbors, FreeGroupHasFourDistinct) {
    Engine engine = make_engine({1, 0});
    for (int t = 0; t < 200; ++t) {
        const Word x = idla::testing::random_element(F2, 12, engine);
        auto nb = F2.neighbors(x);
        EXPECT_EQ(nb.size(), 4u);
        std::sort(nb.begin(), nb.end());
        EXPECT_EQ(std::adjacent_find(nb.begin(), nb.end()), nb.end());
    }
}

TEST(Presentation, DegreesAndKinds) {
    EXPECT_EQ(FreeProductGroup::standard(3).degree(), 3u);
    EXPECT_EQ(FreeProductGroup::standard(3).kind(), GroupKind::free_product);
    EXPECT_EQ(FreeProductGroup::standard(4).kind(), GroupKind::free_group);
    EXPECT_EQ(FreeProductGroup::involution_tree(5).kind(), GroupKind::involution_tree);
    EXPECT_THROW(FreeProductGroup::involution_tree(2), invalid_input);
}

TEST(Format, ParseRoundTrip) {
    Engine engine = make_engine({2, 0});
    for (const auto& g : {T3, F2, FreeProductGroup::standard(5)}) {
        for (int t = 0; t < 200; ++t) {
            const Word x = idla::testing::random_element(g, 15, engine);
            EXPECT_EQ(g.parse(g.format(x)), x);
        }
    }
    EXPECT_TRUE(T3.parse("1").is_identity());
    EXPECT_TRUE(T3.parse("e").is_identity());
    EXPECT_THROW(T3.parse("ad"), invalid_input);
}

// Properties on random elements.

class GroupProperties : public ::testing::TestWithParam<FreeProductGroup> {};

TEST_P(GroupProperties, Associativity) {
    const auto& g = GetParam();
    Engine engine = make_engine({3, g.degree()});
    for (int t = 0; t < 2000; ++t) {
        const Word x = idla::testing::random_element(g, 10, engine);
        const Word y = idla::testing::random_element(g, 10, engine);
        const Word z = idla::testing::random_element(g, 10, engine);
        ASSERT_EQ(g.multiply(g.multiply(x, y), z), g.multiply(x, g.multiply(y, z)));
    }
}

TEST_P(GroupProperties, ReduceMatchesReferenceAndIsIdempotent) {
    const auto& g = GetParam();
    Engine engine = make_engine({4, g.degree()});
    for (int t = 0; t < 2000; ++t) {
        const auto raw = idla::testing::random_raw(g, uniform_below(engine, 20), engine);
        const Word once = g.reduce(raw);
        ASSERT_EQ(once.letters, naive_reduce(g, raw));
        ASSERT_EQ(g.reduce(once.letters), once);
    }
}

TEST_P(GroupProperties, LengthTriangleAndInverse) {
    const auto& g = GetParam();
    Engine engine = make_engine({5, g.degree()});
    for (int t = 0; t < 2000; ++t) {
        const Word x = idla::testing::random_element(g, 12, engine);
        const Word y = idla::testing::random_element(g, 12, engine);
        ASSERT_LE(g.word_length(g.multiply(x, y)), g.word_length(x) + g.word_length(y));
        ASSERT_TRUE(g.multiply(x, g.inverse(x)).is_identity());
    }
}

TEST_P(GroupProperties, BfsBallMatchesBruteForceAndClosedForm) {
    const auto& g = GetParam();
    const std::size_t depth = g.degree() <= 4 ? 6 : 4;
    const auto layers = bfs_layers(g, depth);
    const auto brute = idla::testing::brute_force_ball(g, depth);
    std::size_t total = 0;
    for (std::size_t r = 0; r <= depth; ++r) {
        total += layers[r].size();
        EXPECT_EQ(total, ball_volume(r, g.degree())) << "radius " << r;
        for (const auto& x : layers[r]) {
            EXPECT_EQ(x.length(), r);
            EXPECT_TRUE(brute.contains(x.letters));
        }
    }
    EXPECT_EQ(total, brute.size());
}

INSTANTIATE_TEST_SUITE_P(Trees, GroupProperties,
                         ::testing::Values(FreeProductGroup::involution_tree(3), FreeProductGroup::involution_tree(4),
                                           FreeProductGroup::free_group(2), FreeProductGroup::standard(3),
                                           FreeProductGroup::standard(5), FreeProductGroup::involution_tree(5)));

// Lamplighter.

TEST(Lamplighter, GeneratorsAndInverse) {
    LamplighterGroup g;
    EXPECT_EQ(g.degree(), 3u);
    const LampState t = g.parse("t"), T = g.parse("T"), a = g.parse("a");
    EXPECT_EQ(g.multiply(t, T), g.identity());
    EXPECT_EQ(g.multiply(a, a), g.identity());
    EXPECT_EQ(g.format(g.parse("tat")), "(2;1)");
    EXPECT_EQ(g.format(g.identity()), "(0;)");
}

TEST(Lamplighter, Associativity) {
    LamplighterGroup g;
    Engine engine = make_engine({6, 0});
    auto rnd = [&] {
        LampState x;
        for (std::uint64_t i = uniform_below(engine, 15); i > 0; --i) g.step(x, uniform_below(engine, 3));
        return x;
    };
    for (int t = 0; t < 2000; ++t) {
        const auto x = rnd(), y = rnd(), z = rnd();
        ASSERT_EQ(g.multiply(g.multiply(x, y), z), g.multiply(x, g.multiply(y, z)));
        ASSERT_EQ(g.multiply(x, g.inverse(x)), g.identity());
    }
}

TEST(Lamplighter, WordLengthMatchesBfsDistance) {
    LamplighterGroup g;
    const auto layers = bfs_layers(g, 9);
    for (std::size_t r = 0; r < layers.size(); ++r)
        for (const auto& x : layers[r]) ASSERT_EQ(g.word_length(x), r) << g.format(x);
}
