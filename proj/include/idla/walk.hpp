#pragma once

// Nearest-neighbour random walk S(k) = x X_1 ... X_k on a Cayley graph and the
// stopping times built on it: first exit from a finite set, first hit of a
// target, first exit from a word ball.

#include <idla/cayley.hpp>
#include <idla/errors.hpp>
#include <idla/rng.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace idla {

inline constexpr std::uint64_t kStepCap = 1'000'000'000ULL;

/// Simple random walk increment law: uniform on the generating set.
struct UniformStep {
    std::size_t operator()(Engine& engine, unsigned degree) const {
        return static_cast<std::size_t>(uniform_below(engine, degree));
    }
};

/// Arbitrary increment law given by non-negative weights per generator id.
/// Only used for negative controls; experiments run the simple random walk.
class WeightedStep {
  public:
    explicit WeightedStep(std::vector<double> weights) : cumulative_(weights.size()) {
        if (weights.empty()) throw invalid_input("step law needs at least one weight");
        for (double w : weights)
            if (!(w >= 0.0)) throw invalid_input("step weights must be non-negative");
        std::partial_sum(weights.begin(), weights.end(), cumulative_.begin());
        if (!(cumulative_.back() > 0.0)) throw invalid_input("step weights sum to zero");
    }

    std::size_t operator()(Engine& engine, unsigned degree) const {
        const double u = uniform_unit(engine) * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto g = static_cast<std::size_t>(it - cumulative_.begin());
        return std::min<std::size_t>(g, degree - 1);
    }

  private:
    std::vector<double> cumulative_;
};

template <CayleyGroup G>
struct WalkState {
    typename G::element_type position;
    std::uint64_t steps = 0;
};

/// One increment: position' = position * s with s drawn from the law.
template <CayleyGroup G, class Law = UniformStep>
WalkState<G> step(const G& group, WalkState<G> state, Engine& engine, const Law& law = {}) {
    group.step(state.position, law(engine, group.degree()));
    ++state.steps;
    return state;
}

/// Word distance |x^-1 y|.
template <CayleyGroup G>
std::size_t word_distance(const G& group, const typename G::element_type& x, const typename G::element_type& y) {
    return group.word_length(group.multiply(group.inverse(x), y));
}

/// On trees the geodesic runs through the longest common prefix.
inline std::size_t word_distance(const FreeProductGroup&, const Word& x, const Word& y) {
    const auto [ix, iy] = std::mismatch(x.letters.begin(), x.letters.end(), y.letters.begin(), y.letters.end());
    return static_cast<std::size_t>((x.letters.end() - ix) + (y.letters.end() - iy));
}

template <CayleyGroup G>
struct ExitResult {
    typename G::element_type site;
    std::uint64_t sigma = 0;
};

/// Runs a walk from the identity until it first stands outside the set
/// described by `inside`; returns that site and the exit index.
/// Requires inside(identity) to hold.
template <CayleyGroup G, class Inside, class Law = UniformStep>
ExitResult<G> run_until_exit(const G& group, const Inside& inside, const SeedSpec& seed, const Law& law = {}) {
    Engine engine = make_engine(seed);
    typename G::element_type pos = group.identity();
    if (!inside(pos)) return {std::move(pos), 0};
    for (std::uint64_t k = 1; k <= kStepCap; ++k) {
        group.step(pos, law(engine, group.degree()));
        if (!inside(pos)) return {std::move(pos), k};
    }
    throw step_cap_error("walk did not leave the set within " + std::to_string(kStepCap) + " steps (stream " +
                         std::to_string(seed.stream_id) + ")");
}

enum class HitOutcome { hit, miss, censored };

struct HitResult {
    HitOutcome outcome = HitOutcome::censored;
    std::uint64_t steps = 0;  // tau on a hit, the stopping index otherwise
};

struct HitOptions {
    std::uint64_t cutoff = 64;
    /// A walk whose word distance to the target exceeds this radius is
    /// recorded as a miss. Zero disables the rule: every non-hit is censored.
    std::size_t escape_radius = 0;
    /// Steps between escape checks; the check costs a group multiplication.
    std::uint64_t escape_check_every = 1;
};

/// Walk from `start` looking for `target` within options.cutoff steps.
/// Truncation is reported as censored, never as a miss.
template <CayleyGroup G, class Law = UniformStep>
HitResult first_hit_from(const G& group, const typename G::element_type& start,
                         const typename G::element_type& target, const HitOptions& options, const SeedSpec& seed,
                         const Law& law = {}) {
    if (options.cutoff == 0) throw invalid_input("first_hit cutoff must be positive");
    if (start == target) return {HitOutcome::hit, 0};
    Engine engine = make_engine(seed);
    typename G::element_type pos = start;
    for (std::uint64_t k = 1; k <= options.cutoff; ++k) {
        group.step(pos, law(engine, group.degree()));
        if (pos == target) return {HitOutcome::hit, k};
        if (options.escape_radius > 0 && k % options.escape_check_every == 0 &&
            word_distance(group, pos, target) > options.escape_radius)
            return {HitOutcome::miss, k};
    }
    return {HitOutcome::censored, options.cutoff};
}

/// Walk from the identity; reports whether tau_target <= cutoff.
template <CayleyGroup G, class Law = UniformStep>
HitResult first_hit(const G& group, const typename G::element_type& target, const HitOptions& options,
                    const SeedSpec& seed, const Law& law = {}) {
    return first_hit_from(group, group.identity(), target, options, seed, law);
}

/// First point of the walk on the external boundary of the word ball B(n),
/// i.e. on the word sphere of radius n+1. Draws from the supplied engine.
template <TreeGroup G, class Law = UniformStep>
typename G::element_type exit_point(const G& group, std::size_t radius, Engine& engine, const Law& law = {}) {
    typename G::element_type pos = group.identity();
    for (std::uint64_t k = 0; k < kStepCap; ++k) {
        if (group.word_length(pos) == radius + 1) return pos;
        group.step(pos, law(engine, group.degree()));
    }
    throw step_cap_error("exit_point did not reach radius " + std::to_string(radius + 1));
}

template <TreeGroup G, class Law = UniformStep>
typename G::element_type exit_point(const G& group, std::size_t radius, const SeedSpec& seed, const Law& law = {}) {
    Engine engine = make_engine(seed);
    return exit_point(group, radius, engine, law);
}

}  // namespace idla
