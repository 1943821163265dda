#pragma once

// Desk-scale acceptance criteria. Each returns a pass/fail verdict with a
// one-line detail; the acceptance test binary and the CLI --check mode both
// call these.

#include <idla/balls.hpp>
#include <idla/cayley.hpp>
#include <idla/experiments.hpp>
#include <idla/green.hpp>
#include <idla/idla.hpp>
#include <idla/lamplighter.hpp>
#include <idla/stats.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace idla::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    bool warning = false;  // outside a report-only band
    std::string detail;
    double seconds = 0.0;
    double time_limit = 0.0;
};

namespace detail {

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Uniform reduced word of the given length.
inline Word random_word(const FreeProductGroup& group, std::size_t length, Engine& engine) {
    Word w;
    for (std::size_t i = 0; i < length; ++i) {
        std::uint8_t g;
        do {
            g = static_cast<std::uint8_t>(uniform_below(engine, group.degree()));
        } while (i > 0 && g == group.inverse_letter(w.letters.back()));
        w.letters.push_back(g);
    }
    return w;
}

inline void finish(CriterionResult& r, const Stopwatch& sw, std::ostringstream& detail) {
    r.seconds = sw.seconds();
    if (r.time_limit > 0 && r.seconds > r.time_limit) {
        r.passed = false;
        detail << " [time " << r.seconds << "s over limit " << r.time_limit << "s]";
    }
    r.detail = detail.str();
}

}  // namespace detail

/// 1. Closed-form V(n) and #dB(n) against breadth-first enumeration.
inline CriterionResult exact_tree_identities() {
    CriterionResult r{.id = 1, .name = "exact tree identities (BFS)", .passed = true};
    r.time_limit = 10;
    detail::Stopwatch sw;
    std::ostringstream d;
    std::size_t checked = 0;
    for (unsigned q : {3u, 4u, 5u}) {
        const auto group = FreeProductGroup::involution_tree(q);
        const auto layers = bfs_layers(group, 9);
        std::uint64_t volume = 0;
        for (std::size_t n = 0; n <= 8; ++n) {
            volume += layers[n].size();
            const bool ok = ball_volume(n, q) == volume && sphere_size(n, q) == layers[n + 1].size() &&
                            enumerate_sphere(group, n).size() == layers[n + 1].size();
            if (!ok) {
                r.passed = false;
                d << "mismatch q=" << q << " n=" << n << "; ";
            }
            ++checked;
        }
    }
    d << checked << " (q,n) pairs checked";
    detail::finish(r, sw, d);
    return r;
}

/// 2. Monte Carlo hitting law on T_3 against (q-1)^-|z|.
inline CriterionResult hitting_law(std::uint64_t seed, unsigned threads = 1) {
    CriterionResult r{.id = 2, .name = "hitting law F(z) = (q-1)^-|z| on T_3", .passed = true};
    r.time_limit = 60;
    detail::Stopwatch sw;
    std::ostringstream d;
    const auto group = FreeProductGroup::involution_tree(3);
    McOptions options;
    options.trials = 100'000;
    options.threads = threads;
    for (std::size_t len = 1; len <= 3; ++len) {
        Word z;
        for (std::size_t i = 0; i < len; ++i) z.letters.push_back(static_cast<std::uint8_t>(i % 2));
        const auto est = mc_F(group, group.identity(), z, options, SeedSpec{seed, len});
        const double expected = std::pow(2.0, -static_cast<double>(len));
        const double sigma = stats::binomial_sigma(expected, options.trials);
        const double dev = std::abs(est.value - expected) / sigma;
        const bool ok = dev <= 3.0 && est.censored_fraction < 1e-3;
        r.passed &= ok;
        d << "|z|=" << len << ": " << est.value << " (" << dev << " sigma, censored " << est.censored_fraction
          << ", cutoff " << est.cutoff << ") ";
    }
    detail::finish(r, sw, d);
    return r;
}

/// 3. Metric axioms of the hitting distance: exact on T_3 and T_4, within
/// joint 3 sigma on the lamplighter group.
inline CriterionResult metric_axioms(std::uint64_t seed, unsigned threads = 1) {
    CriterionResult r{.id = 3, .name = "hitting-distance metric axioms", .passed = true};
    r.time_limit = 300;
    detail::Stopwatch sw;
    std::ostringstream d;
    const double tol = 1e-12;
    for (unsigned q : {3u, 4u}) {
        const auto group = FreeProductGroup::involution_tree(q);
        Engine engine = make_engine({seed, q});
        std::size_t failures = 0;
        for (int t = 0; t < 10'000; ++t) {
            const Word x = detail::random_word(group, uniform_below(engine, 13), engine);
            const Word y = detail::random_word(group, uniform_below(engine, 13), engine);
            const Word z = detail::random_word(group, uniform_below(engine, 13), engine);
            const Word g = detail::random_word(group, uniform_below(engine, 13), engine);
            const double dxy = hitting_distance(group, x, y).value;
            const double dyx = hitting_distance(group, y, x).value;
            const double dyz = hitting_distance(group, y, z).value;
            const double dxz = hitting_distance(group, x, z).value;
            const double dxx = hitting_distance(group, x, x).value;
            const double dgxgy = hitting_distance(group, group.multiply(g, x), group.multiply(g, y)).value;
            const bool ok = dxy >= 0 && dxx == 0 && ((dxy == 0) == (x == y)) && dxy == dyx &&
                            dxz <= dxy + dyz + tol && dgxgy == dxy;
            failures += !ok;
        }
        r.passed &= failures == 0;
        d << "T_" << q << ": " << failures << "/10000 violations; ";
    }

    // Lamplighter: Monte Carlo distances, memoised by x^-1 y.
    LamplighterGroup lamp;
    McOptions options;
    options.trials = 4000;
    options.threads = threads;
    std::map<std::pair<std::int64_t, std::vector<std::int64_t>>, DistanceEstimate> cache;
    auto dist = [&](const LampState& a, const LampState& b) {
        const auto key_el = lamp.multiply(lamp.inverse(a), b);
        const auto key = std::make_pair(key_el.cursor, key_el.lamps);
        auto it = cache.find(key);
        if (it == cache.end()) {
            const auto stream = 1000 + cache.size();
            it = cache.emplace(key, hitting_distance(lamp, lamp.identity(), key_el, options, SeedSpec{seed, stream}))
                     .first;
        }
        return it->second;
    };
    Engine engine = make_engine({seed, 77});
    auto random_lamp = [&] {
        LampState x;
        const auto len = uniform_below(engine, 3);
        for (std::uint64_t i = 0; i < len; ++i) lamp.step(x, uniform_below(engine, 3));
        return x;
    };
    std::size_t sym_fail = 0, tri_fail = 0, unresolved = 0;
    for (int t = 0; t < 100; ++t) {
        const auto x = random_lamp(), y = random_lamp(), z = random_lamp();
        const auto dxy = dist(x, y), dyx = dist(y, x), dyz = dist(y, z), dxz = dist(x, z);
        if (!dxy.resolved || !dyx.resolved || !dyz.resolved || !dxz.resolved) {
            ++unresolved;
            continue;
        }
        if (std::abs(dxy.value - dyx.value) > 3.0 * std::hypot(dxy.sigma(), dyx.sigma())) ++sym_fail;
        const double joint = std::sqrt(dxz.sigma() * dxz.sigma() + dxy.sigma() * dxy.sigma() + dyz.sigma() * dyz.sigma());
        if (dxz.value > dxy.value + dyz.value + 3.0 * joint) ++tri_fail;
    }
    r.passed &= sym_fail == 0 && tri_fail == 0 && unresolved == 0;
    d << "lamplighter: " << sym_fail << " symmetry, " << tri_fail << " triangle violations, " << unresolved
      << " unresolved over 100 triples (" << cache.size() << " distinct estimates)";
    detail::finish(r, sw, d);
    return r;
}

/// 4. Exit law on dB(n) is uniform: per-seed chi-square p-values are KS-uniform.
inline CriterionResult exit_law(std::uint64_t seed, unsigned threads = 1) {
    CriterionResult r{.id = 4, .name = "uniform exit law on dB(n)", .passed = true};
    r.time_limit = 300;
    detail::Stopwatch sw;
    std::ostringstream d;
    for (unsigned q : {3u, 4u}) {
        const auto group = FreeProductGroup::involution_tree(q);
        for (std::size_t n = 0; n <= 2; ++n) {
            std::vector<double> p(50);
            parallel_for(p.size(), threads, [&](std::size_t s) {
                p[s] = exit_uniformity(group, n, 100'000, SeedSpec{seed, (q << 16) + (n << 8) + s}).p_value;
            });
            const auto ks = stats::ks_uniform(p);
            const bool ok = ks.p_value >= 0.01;
            r.passed &= ok;
            d << "q=" << q << ",n=" << n << ": KS p=" << ks.p_value << (ok ? "" : " FAIL") << "; ";
        }
    }
    detail::finish(r, sw, d);
    return r;
}

/// Envelope check of criterion 5 on a set of records.
inline std::size_t envelope_violations(const std::vector<FluctuationRecord>& records, double K) {
    std::size_t bad = 0;
    for (const auto& rec : records) {
        if (rec.n <= 5) continue;
        const double n = static_cast<double>(rec.n);
        if (static_cast<double>(rec.delta_I) > (3.0 / K + 1.0) * std::log(n)) ++bad;
        if (static_cast<double>(rec.delta_O) > 2.5 * std::sqrt(n)) ++bad;
    }
    return bad;
}

/// 5. Fluctuation envelope on T_3.
inline CriterionResult shape_envelope(const std::vector<FluctuationRecord>& records, double seconds = 0) {
    CriterionResult r{.id = 5, .name = "fluctuation envelope (q=3, n=6..13, 20 replicas)", .passed = true};
    r.time_limit = 900;
    detail::Stopwatch sw;
    std::ostringstream d;
    const auto bad = envelope_violations(records, std::log(2.0));
    r.passed = bad == 0;
    d << bad << " violations over " << records.size() << " records";
    detail::finish(r, sw, d);
    r.seconds += seconds;
    return r;
}

struct OrderExponents {
    double outer_alpha = 0.0;
    double inner_alpha = 0.0;
    std::size_t inner_positive_points = 0;
};

/// Power-fit exponents of median delta_O(n) and median max(delta_I(n), 0).
/// When fewer than four medians of max(delta_I, 0) are positive the inner
/// profile is flat at zero and its exponent is reported as 0.
inline OrderExponents fluctuation_exponents(const std::vector<FluctuationRecord>& records) {
    OrderExponents e;
    const auto outer = per_n(records, [](const auto& r) { return double(r.delta_O); }, median_of);
    e.outer_alpha = fit(outer, FitForm::power).alpha;
    auto inner = per_n(records, [](const auto& r) { return std::max(0.0, double(r.delta_I)); }, median_of);
    std::erase_if(inner, [](const FitPoint& p) { return p.value <= 0; });
    e.inner_positive_points = inner.size();
    std::set<double> distinct;
    for (const auto& p : inner) distinct.insert(p.n);
    e.inner_alpha = distinct.size() >= 4 ? fit(inner, FitForm::power).alpha : 0.0;
    return e;
}

/// 6. Fluctuation orders. Outside the bands this is a warning below
/// n_max = 13 and a failure from 13 on.
inline CriterionResult fluctuation_orders(const std::vector<FluctuationRecord>& records, std::size_t n_max) {
    CriterionResult r{.id = 6, .name = "fluctuation orders (power-fit exponents)", .passed = true};
    detail::Stopwatch sw;
    std::ostringstream d;
    const auto e = fluctuation_exponents(records);
    const bool in_band = e.outer_alpha >= 0.3 && e.outer_alpha <= 0.7 && e.inner_alpha <= 0.3;
    d << "alpha(median delta_O)=" << e.outer_alpha << " in [0.3,0.7]; alpha(median max(delta_I,0))=" << e.inner_alpha
      << " <= 0.3";
    if (!in_band) {
        if (n_max >= 13) {
            r.passed = false;
        } else {
            r.warning = true;
            d << " (outside band, report-only at n_max=" << n_max << ")";
        }
    }
    detail::finish(r, sw, d);
    return r;
}

/// 7. Balls in boxes: exact coverage under the bound, Monte Carlo at the exact value.
inline CriterionResult balls_in_boxes_check(std::uint64_t seed) {
    CriterionResult r{.id = 7, .name = "balls-in-boxes bound and Monte Carlo", .passed = true};
    r.time_limit = 30;
    detail::Stopwatch sw;
    std::ostringstream d;
    std::size_t bound_fail = 0, mc_fail = 0, mc_runs = 0;
    for (std::uint64_t m = 3; m <= 12; ++m) {
        for (std::uint64_t n = 0; n <= 40; ++n) {
            const auto ex = exact_coverage(n, m);
            if (ex.value > coverage_bound(n, m) * (1.0 + 1e-12)) ++bound_fail;
        }
        for (std::uint64_t n : {m, 2 * m, 4 * m}) {
            const auto res = balls_in_boxes(n, m, 100'000, SeedSpec{seed, m * 100 + n});
            const double sigma = stats::binomial_sigma(*res.exact, res.trials);
            if (std::abs(res.empirical - *res.exact) > 3.0 * sigma) ++mc_fail;
            ++mc_runs;
        }
    }
    r.passed = bound_fail == 0 && mc_fail == 0;
    d << bound_fail << " bound violations over 410 (N,M); " << mc_fail << "/" << mc_runs << " MC runs outside 3 sigma";
    detail::finish(r, sw, d);
    return r;
}

struct MouseTally {
    std::uint64_t sets = 0;
    std::uint64_t class_unions = 0;
    std::uint64_t failures = 0;
};

namespace detail {

/// Checks z_A not in A and #T_j (q-1)^j <= #A for j = 0..R+1; when `r` is
/// given, A is a union of r-classes and every point of A must be further
/// than 2r from z_A.
inline bool mouse_invariants_hold(const FreeProductGroup& group, std::size_t R,
                                  std::span<const std::uint64_t> marked, std::optional<std::size_t> r,
                                  bool brute_force_t) {
    const auto res = mouse_select(group, R, marked);
    if (std::binary_search(marked.begin(), marked.end(), res.index)) return false;
    const std::uint64_t q1 = group.degree() - 1;
    std::uint64_t scale = 1;
    for (std::size_t j = 0; j < res.t_counts.size(); ++j) {
        if (res.t_counts[j] * scale > marked.size()) return false;
        scale *= q1;
    }
    if (r) {
        for (auto idx : marked)
            if (word_distance(group, res.z, sphere_unrank(group, R, idx)) <= 2 * *r) return false;
    }
    if (brute_force_t) {
        for (std::size_t j = 0; j < res.path.size(); ++j) {
            std::uint64_t count = 0;
            for (auto idx : marked)
                count += word_distance(group, res.path[j], sphere_unrank(group, R, idx)) <= R + 1 - j;
            if (count != res.t_counts[j]) return false;
        }
    }
    return true;
}

inline std::vector<std::uint64_t> union_of_classes(const ClassPartition& p, std::uint64_t class_mask_bits,
                                                   const std::vector<bool>* chosen = nullptr) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t c = 0; c < p.class_count; ++c) {
        const bool take = chosen ? (*chosen)[c] : ((class_mask_bits >> c) & 1u);
        if (take)
            for (auto i : p.members(c)) out.push_back(i);
    }
    return out;
}

}  // namespace detail

/// Exhaustive and random verification of the Mouse selection invariants.
inline MouseTally mouse_sweep(unsigned q, std::size_t R_max, std::uint64_t seed, std::size_t random_R,
                              std::size_t random_sets) {
    MouseTally tally;
    const auto group = FreeProductGroup::involution_tree(q);
    std::vector<std::uint64_t> marked;
    for (std::size_t R = 0; R <= R_max; ++R) {
        const std::uint64_t size = sphere_size(R, q);
        if (size <= 24) {
            // Every proper subset.
            for (std::uint64_t mask = 0; mask + 1 < (std::uint64_t{1} << size); ++mask) {
                marked.clear();
                for (std::uint64_t i = 0; i < size; ++i)
                    if ((mask >> i) & 1u) marked.push_back(i);
                tally.failures += !detail::mouse_invariants_hold(group, R, marked, {}, mask % 997 == 0);
                ++tally.sets;
            }
        }
        for (std::size_t r = 1; r < R; ++r) {
            const auto p = class_partition(group, R, r);
            if (p.class_count <= 20) {
                for (std::uint64_t cm = 0; cm + 1 < (std::uint64_t{1} << p.class_count); ++cm) {
                    marked = detail::union_of_classes(p, cm);
                    tally.failures += !detail::mouse_invariants_hold(group, R, marked, r, cm % 101 == 0);
                    ++tally.class_unions;
                }
            } else {
                Engine engine = make_engine({seed, (q << 16) + (R << 8) + r});
                for (int t = 0; t < 10'000; ++t) {
                    std::vector<bool> chosen(p.class_count);
                    for (std::uint64_t c = 0; c < p.class_count; ++c) chosen[c] = uniform_below(engine, 2);
                    chosen[uniform_below(engine, p.class_count)] = false;
                    marked = detail::union_of_classes(p, 0, &chosen);
                    tally.failures += !detail::mouse_invariants_hold(group, R, marked, r, t % 101 == 0);
                    ++tally.class_unions;
                }
            }
        }
    }
    // Random sets at a larger radius: half arbitrary subsets, half unions of classes.
    Engine engine = make_engine({seed, (q << 16) + 0xffff});
    const std::uint64_t size = sphere_size(random_R, q);
    for (std::size_t t = 0; t < random_sets; ++t) {
        std::optional<std::size_t> r;
        if (t % 2 == 0) {
            const double density = uniform_unit(engine);
            marked.clear();
            for (std::uint64_t i = 0; i < size; ++i)
                if (uniform_unit(engine) < density) marked.push_back(i);
            if (marked.size() == size) marked.erase(marked.begin() + static_cast<std::ptrdiff_t>(uniform_below(engine, size)));
        } else {
            r = 1 + uniform_below(engine, random_R - 1);
            const auto p = class_partition(group, random_R, *r);
            std::vector<bool> chosen(p.class_count);
            const double density = uniform_unit(engine);
            for (std::uint64_t c = 0; c < p.class_count; ++c) chosen[c] = uniform_unit(engine) < density;
            chosen[uniform_below(engine, p.class_count)] = false;
            marked = detail::union_of_classes(p, 0, &chosen);
            ++tally.class_unions;
        }
        tally.failures += !detail::mouse_invariants_hold(group, random_R, marked, r, t % 50 == 0);
        ++tally.sets;
    }
    return tally;
}

/// 8. Mouse algorithm invariants.
inline CriterionResult mouse_invariants(std::uint64_t seed) {
    CriterionResult r{.id = 8, .name = "Mouse algorithm invariants", .passed = true};
    r.time_limit = 120;
    detail::Stopwatch sw;
    std::ostringstream d;
    for (unsigned q : {3u, 4u}) {
        const auto t = mouse_sweep(q, 3, seed, 8, 1000);
        r.passed &= t.failures == 0;
        d << "q=" << q << ": " << t.failures << " failures over " << t.sets << " sets and " << t.class_unions
          << " class unions; ";
    }
    detail::finish(r, sw, d);
    return r;
}

/// 9. -ln G(z) is affine in |z| with slope K = ln(q-1).
inline CriterionResult green_decay() {
    CriterionResult r{.id = 9, .name = "Green function decay on trees", .passed = true};
    detail::Stopwatch sw;
    std::ostringstream d;
    for (unsigned q : {3u, 4u, 5u}) {
        const auto group = FreeProductGroup::involution_tree(q);
        std::vector<double> x, y;
        Word z;
        for (std::size_t len = 1; len <= 12; ++len) {
            z.letters.push_back(static_cast<std::uint8_t>(len % 2));
            x.push_back(static_cast<double>(len));
            y.push_back(-green(group, group.identity(), z).log_value);
        }
        const auto fit = stats::linear_regression(x, y);
        const double K = constant_K(group).K;
        const bool ok = std::abs(fit.slope - K) < 1e-9 && fit.r_squared > 0.999;
        r.passed &= ok;
        d << "q=" << q << ": slope-K=" << fit.slope - K << ", R2=" << fit.r_squared << "; ";
    }
    detail::finish(r, sw, d);
    return r;
}

/// 10. Same seed, different worker-pool sizes, identical outputs.
inline CriterionResult determinism(std::uint64_t seed) {
    CriterionResult r{.id = 10, .name = "determinism across worker-pool sizes", .passed = true};
    detail::Stopwatch sw;
    std::ostringstream d;
    auto scan_csv = [&](unsigned threads) {
        ScanConfig c;
        c.q = 3;
        c.n_min = 1;
        c.n_max = 9;
        c.replicas = 6;
        c.master_seed = seed;
        c.threads = threads;
        const auto scan = shape_scan(c);
        std::ostringstream out;
        write_records_csv(out, "tree", 3, scan.records);
        write_fits_jsonl(out, scan);
        return out.str();
    };
    const bool scan_same = scan_csv(1) == scan_csv(4) && scan_csv(1) == scan_csv(1);
    const auto group = FreeProductGroup::involution_tree(3);
    McOptions o;
    o.trials = 20'000;
    auto mc = [&](unsigned threads) {
        o.threads = threads;
        const auto e = mc_F(group, group.identity(), group.parse("ab"), o, SeedSpec{seed, 5});
        return std::make_tuple(e.hits, e.misses, e.censored, e.cutoff);
    };
    const bool mc_same = mc(1) == mc(3);
    auto exits = [&](unsigned threads) {
        std::vector<double> p(8);
        parallel_for(p.size(), threads, [&](std::size_t s) {
            p[s] = exit_uniformity(group, 1, 10'000, SeedSpec{seed, s}).statistic;
        });
        return p;
    };
    const bool exit_same = exits(1) == exits(4);
    r.passed = scan_same && mc_same && exit_same;
    d << "scan " << (scan_same ? "identical" : "DIFFERS") << ", mc_F " << (mc_same ? "identical" : "DIFFERS")
      << ", exit test " << (exit_same ? "identical" : "DIFFERS");
    detail::finish(r, sw, d);
    return r;
}

/// Runs the full list; `on_result` sees each verdict as soon as it is ready.
inline std::vector<CriterionResult> run_all(std::uint64_t seed, unsigned threads,
                                            const std::function<void(const CriterionResult&)>& on_result = {}) {
    std::vector<CriterionResult> out;
    auto emit = [&](CriterionResult r) {
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    };
    emit(exact_tree_identities());
    emit(hitting_law(seed, threads));
    emit(metric_axioms(seed, threads));
    emit(exit_law(seed, threads));
    {
        detail::Stopwatch sw;
        ScanConfig c;
        c.q = 3;
        c.n_min = 6;
        c.n_max = 13;
        c.replicas = 20;
        c.master_seed = seed;
        c.threads = threads;
        const auto scan = shape_scan(c);
        emit(shape_envelope(scan.records, sw.seconds()));
        emit(fluctuation_orders(scan.records, c.n_max));
    }
    emit(balls_in_boxes_check(seed));
    emit(mouse_invariants(seed));
    emit(green_decay());
    emit(determinism(seed));
    return out;
}

inline std::string format_line(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.passed ? (r.warning ? "WARN" : "PASS") : "FAIL") << "  [" << r.id << "] " << r.name << " ("
       << std::round(r.seconds * 100) / 100 << "s): " << r.detail;
    return os.str();
}

}  // namespace idla::acceptance
