#pragma once

// Hitting probability F, Green function G = G(e) F and the hitting distance
// d = -ln F. Exact on homogeneous trees, Monte Carlo with explicit censoring
// elsewhere.

#include <idla/cayley.hpp>
#include <idla/errors.hpp>
#include <idla/parallel.hpp>
#include <idla/rng.hpp>
#include <idla/stats.hpp>
#include <idla/walk.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace idla {

enum class Provenance { exact, monte_carlo };

inline const char* to_string(Provenance p) { return p == Provenance::exact ? "exact" : "monte-carlo"; }

/// A probability stored by its natural logarithm; (q-1)^-|z| underflows a
/// double long before |z| becomes uninteresting.
struct LogProb {
    double log_value = 0.0;

    double value() const { return std::exp(log_value); }
    friend auto operator<=>(const LogProb&, const LogProb&) = default;
};

struct HittingEstimate {
    double value = 0.0;
    double log_value = 0.0;
    double half_width = 0.0;  // 95%, zero for exact values
    double censored_fraction = 0.0;
    Provenance provenance = Provenance::exact;
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t censored = 0;
    std::uint64_t cutoff = 0;  // final cutoff reached by the doubling policy

    double sigma() const { return half_width / stats::z95; }
};

struct McOptions {
    std::uint64_t trials = 10'000;
    std::uint64_t initial_cutoff = 64;
    std::uint64_t max_cutoff = std::uint64_t{1} << 22;
    std::size_t escape_radius = 32;
    std::uint64_t escape_check_every = 8;
    double censored_target = 1e-3;
    unsigned threads = 1;
};

/// F(z) = (q-1)^-|z| on T_q.
template <CayleyGroup G>
LogProb tree_F(const G& group, const typename G::element_type& z) {
    if constexpr (G::exact_formulas) {
        return {-static_cast<double>(group.word_length(z)) * std::log(group.degree() - 1.0)};
    } else {
        throw unsupported_operation("exact hitting probability needs a tree model, got " +
                                    std::string(to_string(group.kind())));
    }
}

/// Monte Carlo estimate of F(x, y), run as F(x^-1 y) from the identity.
///
/// Trials run to a cutoff that starts at options.initial_cutoff and doubles.
/// A trial is a hit, a miss (its word distance to the target passed
/// options.escape_radius) or censored (undecided at the cutoff). Doubling
/// stops once the censored fraction drops below options.censored_target, or
/// once the hit count moved by less than one binomial sigma and the censored
/// count is itself below one sigma, or at options.max_cutoff. Trials that
/// resolved earlier keep their outcome: trajectories are prefix-stable.
template <CayleyGroup G>
HittingEstimate mc_F(const G& group, const typename G::element_type& x, const typename G::element_type& y,
                     const McOptions& options, const SeedSpec& seed) {
    HittingEstimate est;
    est.provenance = Provenance::monte_carlo;
    if (x == y) {
        est.value = 1.0;
        est.log_value = 0.0;
        est.provenance = Provenance::exact;
        return est;
    }
    if (options.trials < 100) throw invalid_input("mc_F needs at least 100 trials");
    if (options.initial_cutoff == 0) throw invalid_input("mc_F initial cutoff must be positive");

    const auto target = group.multiply(group.inverse(x), y);
    const std::uint64_t n = options.trials;
    std::vector<HitOutcome> outcome(n, HitOutcome::censored);
    std::vector<std::size_t> pending(n);
    for (std::size_t i = 0; i < n; ++i) pending[i] = i;

    std::uint64_t cutoff = options.initial_cutoff;
    std::uint64_t hits = 0, misses = 0;
    bool have_previous = false;
    std::uint64_t previous_hits = 0;
    for (;;) {
        HitOptions hit_options{cutoff, options.escape_radius, options.escape_check_every};
        parallel_for(pending.size(), options.threads, [&](std::size_t k) {
            const std::size_t i = pending[k];
            const SeedSpec trial{seed.master_seed, (seed.stream_id << 32) + i};
            outcome[i] = first_hit(group, target, hit_options, trial).outcome;
        });
        std::vector<std::size_t> still;
        for (auto i : pending) {
            if (outcome[i] == HitOutcome::hit)
                ++hits;
            else if (outcome[i] == HitOutcome::miss)
                ++misses;
            else
                still.push_back(i);
        }
        pending.swap(still);

        const double p = static_cast<double>(hits) / static_cast<double>(n);
        const double sigma_count = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
        const double censored_fraction = static_cast<double>(pending.size()) / static_cast<double>(n);
        const bool stable = have_previous && static_cast<double>(hits - previous_hits) < sigma_count &&
                            static_cast<double>(pending.size()) < sigma_count;
        if (pending.empty() || censored_fraction < options.censored_target || stable ||
            cutoff >= options.max_cutoff)
            break;
        previous_hits = hits;
        have_previous = true;
        cutoff = std::min(cutoff * 2, options.max_cutoff);
    }

    est.trials = n;
    est.hits = hits;
    est.misses = misses;
    est.censored = pending.size();
    est.cutoff = cutoff;
    est.value = static_cast<double>(hits) / static_cast<double>(n);
    est.log_value = hits ? std::log(est.value) : -std::numeric_limits<double>::infinity();
    est.half_width = stats::binomial_half_width(hits, n);
    est.censored_fraction = static_cast<double>(est.censored) / static_cast<double>(n);
    return est;
}

struct DistanceEstimate {
    double value = 0.0;  // +inf when unresolved
    double half_width = 0.0;
    Provenance provenance = Provenance::exact;
    bool resolved = true;
    std::string diagnostic;

    double sigma() const { return half_width / stats::z95; }
};

/// d(x, y) = -ln F(x, y).
template <CayleyGroup G>
DistanceEstimate hitting_distance(const G& group, const typename G::element_type& x,
                                  const typename G::element_type& y, const McOptions& options = {},
                                  const SeedSpec& seed = {}) {
    if constexpr (G::exact_formulas) {
        return {-tree_F(group, group.multiply(group.inverse(x), y)).log_value, 0.0, Provenance::exact, true, {}};
    } else {
        if (x == y) return {0.0, 0.0, Provenance::exact, true, {}};
        const auto f = mc_F(group, x, y, options, seed);
        DistanceEstimate d;
        d.provenance = Provenance::monte_carlo;
        if (f.hits == 0) {
            d.value = std::numeric_limits<double>::infinity();
            d.resolved = false;
            d.diagnostic = "no hits in " + std::to_string(f.trials) +
                           " trials; distance not resolvable at this trial budget";
            return d;
        }
        d.value = -f.log_value;
        d.half_width = f.half_width / f.value;
        return d;
    }
}

struct MetricConstants {
    double K = 0.0;
    double G_e = 0.0;
    double K_half_width = 0.0;
    double G_e_half_width = 0.0;
    Provenance provenance = Provenance::exact;
};

/// K = max over generators s of d(e, s), and G(e).
///
/// On T_q these are ln(q-1) and (q-1)/(q-2). Otherwise each F(e, s) is
/// estimated; G(e) = 1 / (1 - r) with r = mean_s F(e, s) the return
/// probability of the simple random walk.
template <CayleyGroup G>
MetricConstants constant_K(const G& group, const McOptions& options = {}, const SeedSpec& seed = {}) {
    const double q = group.degree();
    if constexpr (G::exact_formulas) {
        return {std::log(q - 1.0), (q - 1.0) / (q - 2.0), 0.0, 0.0, Provenance::exact};
    } else {
        MetricConstants c;
        c.provenance = Provenance::monte_carlo;
        double r = 0.0, r_var = 0.0;
        for (std::size_t s = 0; s < group.degree(); ++s) {
            auto gen = group.identity();
            group.step(gen, s);
            const auto f = mc_F(group, group.identity(), gen, options, SeedSpec{seed.master_seed, seed.stream_id + s + 1});
            if (f.hits == 0) throw error("constant_K: no hits for generator " + std::to_string(s));
            const double d = -f.log_value;
            if (d > c.K) {
                c.K = d;
                c.K_half_width = f.half_width / f.value;
            }
            r += f.value / q;
            r_var += (f.half_width / q) * (f.half_width / q);
        }
        c.G_e = 1.0 / (1.0 - r);
        c.G_e_half_width = std::sqrt(r_var) / ((1.0 - r) * (1.0 - r));
        return c;
    }
}

struct GreenValue {
    double value = 0.0;
    double log_value = 0.0;
    double half_width = 0.0;
    Provenance provenance = Provenance::exact;
};

/// G(x, y) = G(e) F(x, y).
template <CayleyGroup G>
GreenValue green(const G& group, const typename G::element_type& x, const typename G::element_type& y,
                 const McOptions& options = {}, const SeedSpec& seed = {}) {
    if constexpr (G::exact_formulas) {
        const auto c = constant_K(group);
        const double log_g = std::log(c.G_e) + tree_F(group, group.multiply(group.inverse(x), y)).log_value;
        return {std::exp(log_g), log_g, 0.0, Provenance::exact};
    } else {
        const auto c = constant_K(group, options, SeedSpec{seed.master_seed, seed.stream_id + 0x1000});
        const auto f = mc_F(group, x, y, options, seed);
        GreenValue g;
        g.provenance = Provenance::monte_carlo;
        g.value = c.G_e * f.value;
        g.log_value = std::log(c.G_e) + f.log_value;
        const double rel = std::hypot(f.value > 0 ? f.half_width / f.value : 0.0, c.G_e_half_width / c.G_e);
        g.half_width = g.value * rel;
        return g;
    }
}

}  // namespace idla
