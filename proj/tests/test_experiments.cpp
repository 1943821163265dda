#include <idla/acceptance.hpp>
#include <idla/experiments.hpp>

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace idla;

namespace {

const FreeProductGroup T3 = FreeProductGroup::involution_tree(3);

/// Surjection count by enumerating all M^N assignments.
std::pair<std::uint64_t, std::uint64_t> brute_force_coverage(unsigned balls, unsigned boxes) {
    std::uint64_t total = 1;
    for (unsigned i = 0; i < balls; ++i) total *= boxes;
    std::uint64_t covered = 0;
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t mask = 0, c = code;
        for (unsigned i = 0; i < balls; ++i, c /= boxes) mask |= std::uint64_t{1} << (c % boxes);
        covered += mask == (std::uint64_t{1} << boxes) - 1;
    }
    return {covered, total};
}

std::vector<std::uint64_t> indices_of(const FreeProductGroup& g, std::initializer_list<const char*> words) {
    std::vector<std::uint64_t> out;
    for (const char* w : words) out.push_back(sphere_rank(g, g.parse(w)));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

// Fits.

TEST(Fit, LogFormExact) {
    std::vector<FitPoint> pts;
    for (int n = 2; n <= 12; ++n) pts.push_back({double(n), 2.0 * std::log(n)});
    const auto f = fit(pts, FitForm::log);
    EXPECT_NEAR(f.c, 2.0, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_EQ(f.samples, pts.size());
}

TEST(Fit, SqrtFormWithNoise) {
    std::mt19937_64 engine(7);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<FitPoint> pts;
    for (int n = 1; n <= 100; ++n) pts.push_back({double(n), 3.0 * std::sqrt(n) + noise(engine)});
    const auto f = fit(pts, FitForm::sqrt);
    EXPECT_GE(f.c, 2.5);
    EXPECT_LE(f.c, 3.5);
    EXPECT_GT(f.r_squared, 0.9);
}

TEST(Fit, ConstantPowerExponentNearZero) {
    std::vector<FitPoint> pts;
    for (int n = 3; n <= 13; ++n) pts.push_back({double(n), 4.0});
    EXPECT_NEAR(fit(pts, FitForm::power).alpha, 0.0, 0.05);
}

TEST(Fit, RejectsDegenerateInputs) {
    const std::vector<FitPoint> few{{1, 1}, {2, 2}, {3, 3}, {3, 4}};
    EXPECT_THROW(fit(few, FitForm::log), fit_error);
    const std::vector<FitPoint> zero{{1, 1}, {2, 0}, {3, 3}, {4, 4}};
    EXPECT_THROW(fit(zero, FitForm::power), fit_error);
}

TEST(Fit, JsonCarriesAllFields) {
    std::vector<FitPoint> pts;
    for (int n = 1; n <= 6; ++n) pts.push_back({double(n), double(n * n)});
    const auto j = to_json(fit(pts, FitForm::power));
    EXPECT_EQ(j.at("form"), "c*n^alpha");
    EXPECT_NEAR(j.at("alpha").get<double>(), 2.0, 1e-12);
    EXPECT_TRUE(j.contains("r_squared"));
    EXPECT_TRUE(j.contains("samples"));
}

// Scans.

TEST(ScanConfig, Validation) {
    ScanConfig c;
    c.replicas = 0;
    EXPECT_THROW(validate(c), invalid_input);
    c = {};
    c.n_min = 0;
    EXPECT_THROW(validate(c), invalid_input);
    c = {};
    c.q = 2;
    EXPECT_THROW(validate(c), invalid_input);
    EXPECT_THROW(make_tree_group(GroupKind::free_group, 3), invalid_input);
    EXPECT_THROW(make_tree_group(GroupKind::lamplighter, 3), unsupported_operation);
}

TEST(ShapeScan, EnvelopeAndSublinearInnerFluctuation) {
    ScanConfig c;
    c.q = 3;
    c.n_min = 6;
    c.n_max = 13;
    c.replicas = 20;
    c.master_seed = 91;
    const auto scan = shape_scan(c);
    ASSERT_EQ(scan.records.size(), 8u * 20u);
    EXPECT_EQ(acceptance::envelope_violations(scan.records, std::log(2.0)), 0u);
    long max_inner_13 = -100;
    std::set<long> inner_values;
    for (const auto& r : scan.records) {
        inner_values.insert(r.delta_I);
        if (r.n == 13) max_inner_13 = std::max(max_inner_13, r.delta_I);
    }
    EXPECT_LT(double(max_inner_13), 13.0 / 2.0);
    EXPECT_GT(inner_values.size(), 1u);
    EXPECT_GE(scan.outer_power.alpha, 0.3);
    EXPECT_LE(scan.outer_power.alpha, 0.7);
}

TEST(ShapeScan, OutputsAreSortedAndThreadIndependent) {
    ScanConfig c;
    c.n_min = 2;
    c.n_max = 8;
    c.replicas = 4;
    c.master_seed = 92;
    auto render = [&](unsigned threads) {
        c.threads = threads;
        const auto scan = shape_scan(c);
        std::ostringstream os;
        write_records_csv(os, "tree", 3, scan.records);
        write_fits_jsonl(os, scan);
        return os.str();
    };
    const std::string one = render(1);
    EXPECT_EQ(one, render(3));
    std::istringstream lines(one);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "model,q,n,replica,seed,volume,delta_I,delta_O");
    std::getline(lines, line);
    EXPECT_EQ(line.rfind("tree,3,2,0,92,10,", 0), 0u) << line;
    int json_lines = 0;
    while (std::getline(lines, line))
        if (line.front() == '{') {
            EXPECT_TRUE(nlohmann::json::accept(line)) << line;
            ++json_lines;
        }
    EXPECT_EQ(json_lines, 3);
}

TEST(LowerBoundScan, FrequencyProxies) {
    ScanConfig c;
    c.q = 3;
    c.n_min = 8;
    c.n_max = 13;
    c.replicas = 50;
    c.master_seed = 93;
    const auto scan = lower_bound_scan(c);
    ASSERT_EQ(scan.rows.size(), 6u * 50u);
    EXPECT_GE(scan.outer_reached_fraction, 0.5);
    EXPECT_GT(scan.inner_uncovered_fraction, 0.0);
    EXPECT_NEAR(scan.outer_constant, 0.5 * std::sqrt(std::log(2.0) / std::log(3.0)), 1e-15);

    ScanConfig small = c;
    small.n_min = 3;
    small.n_max = 8;
    small.replicas = 30;
    const auto full_ball = lower_bound_scan(small, {}, 0.0);
    EXPECT_GE(full_ball.inner_uncovered_fraction, 0.9);
}

// Classes and the Mouse selection.

TEST(ClassPartition, ClassesAreBallsOfRadiusTwoR) {
    for (unsigned q : {3u, 4u}) {
        const auto g = FreeProductGroup::involution_tree(q);
        for (std::size_t R = 0; R <= 4; ++R) {
            const auto size = sphere_size(R, q);
            for (std::size_t r = 0; r <= R; ++r) {
                const auto p = class_partition(g, R, r);
                ASSERT_EQ(p.class_count * p.class_size, size);
                for (std::uint64_t i = 0; i < size; ++i) {
                    const Word zi = sphere_unrank(g, R, i);
                    for (std::uint64_t j = 0; j < size; ++j) {
                        const bool close = word_distance(g, zi, sphere_unrank(g, R, j)) <= 2 * r;
                        ASSERT_EQ(close, p.class_of(i) == p.class_of(j)) << "q=" << q << " R=" << R << " r=" << r;
                    }
                }
            }
            EXPECT_THROW(class_partition(g, R, R + 1), invalid_input);
        }
    }
}

TEST(Mouse, SmallExamples) {
    const auto r0 = mouse_select(T3, 0, indices_of(T3, {"a", "b"}));
    EXPECT_EQ(T3.format(r0.z), "c");
    const auto r1 = mouse_select(T3, 1, indices_of(T3, {"ab", "ac", "ba", "bc"}));
    EXPECT_EQ(T3.format(r1.z), "ca");
    EXPECT_EQ(r1.path.size(), 3u);
    const auto by_word = mouse_select(T3, 1, std::vector<Word>{T3.parse("ab"), T3.parse("ac"), T3.parse("ba"),
                                                              T3.parse("bc")});
    EXPECT_EQ(by_word.z, r1.z);
}

TEST(Mouse, WholeSphereRejected) {
    EXPECT_THROW(mouse_select(T3, 0, indices_of(T3, {"a", "b", "c"})), invalid_input);
    EXPECT_THROW(mouse_select(T3, 1, std::vector<Word>{T3.parse("a")}), invalid_input);
    const std::vector<std::uint64_t> unsorted{2, 1};
    EXPECT_THROW(mouse_select(T3, 0, unsorted), invalid_input);
}

TEST(Mouse, EmptySetPicksFirstWord) {
    const auto r = mouse_select(T3, 2, std::span<const std::uint64_t>{});
    EXPECT_EQ(T3.format(r.z), "aba");
}

TEST(Mouse, MissingClassIsFound) {
    for (unsigned q : {3u, 4u}) {
        const auto g = FreeProductGroup::involution_tree(q);
        for (std::size_t R = 0; R <= 3; ++R) {
            for (std::size_t r = 0; r <= R; ++r) {
                const auto p = class_partition(g, R, r);
                for (std::uint64_t missing = 0; missing < p.class_count; ++missing) {
                    std::vector<std::uint64_t> marked;
                    for (std::uint64_t i = 0; i < p.class_count * p.class_size; ++i)
                        if (p.class_of(i) != missing) marked.push_back(i);
                    ASSERT_EQ(p.class_of(mouse_select(g, R, marked).index), missing);
                }
            }
        }
    }
}

TEST(Mouse, InvariantsOnSmallSpheres) {
    for (unsigned q : {3u, 4u}) {
        const auto t = acceptance::mouse_sweep(q, 2, 94, 6, 200);
        EXPECT_EQ(t.failures, 0u) << "q=" << q;
        EXPECT_GT(t.sets, 200u);
    }
}

// Balls in boxes.

TEST(Boxes, ExactValues) {
    EXPECT_EQ(exact_coverage(3, 3).numerator, 6);
    EXPECT_EQ(exact_coverage(3, 3).denominator, 27);
    const auto five = exact_coverage(5, 3);
    EXPECT_EQ(five.numerator, 150);
    EXPECT_EQ(five.denominator, 243);
    EXPECT_LE(five.value, coverage_bound(5, 3));
    EXPECT_NEAR(coverage_bound(5, 3), std::exp(-1.5 * std::exp(-20.0 / 3.0)), 1e-15);
    EXPECT_EQ(exact_coverage(0, 3).value, 0.0);
}

TEST(Boxes, InclusionExclusionMatchesEnumeration) {
    for (unsigned m = 3; m <= 5; ++m) {
        for (unsigned n = 0; n <= 7; ++n) {
            const auto [covered, total] = brute_force_coverage(n, m);
            const auto ex = exact_coverage(n, m);
            ASSERT_EQ(ex.numerator, covered) << "M=" << m << " N=" << n;
            ASSERT_EQ(ex.denominator, total);
        }
    }
}

TEST(Boxes, ExactNeverExceedsBound) {
    for (std::uint64_t m = 3; m <= 12; ++m)
        for (std::uint64_t n = 0; n <= 40; ++n)
            ASSERT_LE(exact_coverage(n, m).value, coverage_bound(n, m) * (1 + 1e-12)) << m << "," << n;
}

TEST(Boxes, MonteCarloNearExact) {
    const auto r = balls_in_boxes(5, 3, 100'000, SeedSpec{7, 0});
    ASSERT_TRUE(r.exact.has_value());
    EXPECT_NEAR(r.empirical, *r.exact, 3 * stats::binomial_sigma(*r.exact, r.trials));
    EXPECT_EQ(r.exact_numerator, "150");
    EXPECT_EQ(r.exact_denominator, "243");
    EXPECT_EQ(balls_in_boxes(0, 3, 1000, SeedSpec{}).empirical, 0.0);
    EXPECT_FALSE(balls_in_boxes(40, 13, 1000, SeedSpec{}).exact.has_value());
}

TEST(Boxes, PreconditionErrors) {
    EXPECT_THROW(balls_in_boxes(5, 2, 1000, SeedSpec{}), invalid_input);
    EXPECT_THROW(balls_in_boxes(5, 3, 999, SeedSpec{}), invalid_input);
}

// Exit-law uniformity.

TEST(ExitUniformity, NullAndNegativeControl) {
    const auto ok = exit_uniformity(T3, 0, 100'000, SeedSpec{95, 0});
    EXPECT_GT(ok.p_value, 0.001);
    EXPECT_LT(ok.p_value, 0.999);
    EXPECT_EQ(ok.dof, 2.0);
    const auto t4 = exit_uniformity(FreeProductGroup::involution_tree(4), 2, 100'000, SeedSpec{95, 1});
    EXPECT_EQ(t4.counts.size(), 36u);
    EXPECT_EQ(t4.dof, 35.0);
    const auto biased = exit_uniformity(T3, 1, 100'000, SeedSpec{95, 2}, WeightedStep({2.0, 1.0, 1.0}));
    EXPECT_LT(biased.p_value, 1e-6);
}

TEST(ExitUniformity, PValuesUniformAcrossSeeds) {
    std::vector<double> p;
    for (std::uint64_t s = 0; s < 50; ++s) p.push_back(exit_uniformity(T3, 1, 10'000, SeedSpec{96, s}).p_value);
    EXPECT_GE(stats::ks_uniform(p).p_value, 0.01);
}

TEST(ExitUniformity, PreconditionErrors) {
    EXPECT_THROW(exit_uniformity(T3, 2, 100, SeedSpec{}), invalid_input);
    EXPECT_THROW(exit_uniformity(T3, 30, 1'000'000, SeedSpec{}, UniformStep{}, 1000), resource_error);
}
