#pragma once

// Internal DLA: A(1) = {e}; particle j walks from e until it first leaves
// A(j-1) and the site where it leaves is added.

#include <idla/balls.hpp>
#include <idla/cayley.hpp>
#include <idla/errors.hpp>
#include <idla/free_product.hpp>
#include <idla/rng.hpp>
#include <idla/version.hpp>
#include <idla/walk.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace idla {

template <CayleyGroup G>
struct Addition {
    std::uint64_t particle = 0;  // j; the first added site is particle 2
    typename G::element_type site;
    std::uint64_t sigma = 0;
};

/// The occupied set A(j) with its insertion log.
template <CayleyGroup G>
class Cluster {
  public:
    using element_type = typename G::element_type;

    explicit Cluster(const G& group) : group_(group) { members_.insert(group.identity()); }

    bool contains(const element_type& x) const { return members_.contains(x); }
    std::size_t size() const noexcept { return members_.size(); }
    const ElementSet<G>& members() const noexcept { return members_; }
    const std::vector<Addition<G>>& addition_log() const noexcept { return log_; }
    std::size_t max_word_radius() const noexcept { return max_radius_; }
    const G& group() const noexcept { return group_; }

    /// Sites in insertion order, identity first.
    std::vector<element_type> ordered_sites() const {
        std::vector<element_type> out{group_.identity()};
        for (const auto& a : log_) out.push_back(a.site);
        return out;
    }

    /// Appends a site. It must be new and adjacent to the current cluster.
    void add(const element_type& site, std::uint64_t sigma) {
        if (members_.contains(site)) throw invalid_input("site " + group_.format(site) + " already occupied");
        bool adjacent = false;
        for (std::size_t s = 0; s < group_.degree() && !adjacent; ++s) {
            element_type y = site;
            group_.step(y, s);
            adjacent = members_.contains(y);
        }
        if (!adjacent) throw invalid_input("site " + group_.format(site) + " does not touch the cluster");
        members_.insert(site);
        log_.push_back({static_cast<std::uint64_t>(members_.size()), site, sigma});
        max_radius_ = std::max(max_radius_, group_.word_length(site));
    }

  private:
    G group_;
    ElementSet<G> members_;
    std::vector<Addition<G>> log_;
    std::size_t max_radius_ = 0;
};

/// Releases one particle from e with the given stream and adds its exit site.
template <CayleyGroup G>
typename G::element_type grow_one(Cluster<G>& cluster, const SeedSpec& seed) {
    auto exit = run_until_exit(
        cluster.group(), [&](const typename G::element_type& x) { return cluster.contains(x); }, seed);
    cluster.add(exit.site, exit.sigma);
    return exit.site;
}

/// Next particle of replica `replica`: stream particle_stream(replica, j).
template <CayleyGroup G>
typename G::element_type grow_one(Cluster<G>& cluster, std::uint64_t master_seed, std::uint64_t replica) {
    return grow_one(cluster, SeedSpec{master_seed, particle_stream(replica, cluster.size() + 1)});
}

/// Largest r with the word ball B(r) inside the cluster, scanning boundary
/// spheres outward from `hint` (which must not exceed the answer).
inline std::size_t inner_radius(const Cluster<FreeProductGroup>& cluster, std::size_t hint = 0,
                                std::uint64_t budget = kDefaultElementBudget) {
    std::size_t r = hint;
    for (;;) {
        if (sphere_size(r, cluster.group().degree()) > cluster.size()) return r;
        const auto sphere = enumerate_sphere(cluster.group(), r, budget);
        for (const Word& z : sphere)
            if (!cluster.contains(z)) return r;
        ++r;
    }
}

/// max over members of d(z)/K, which is the word radius on trees.
template <CayleyGroup G>
std::size_t outer_radius(const Cluster<G>& cluster) {
    return cluster.max_word_radius();
}

struct FluctuationRecord {
    std::size_t n = 0;
    std::uint64_t volume = 0;
    long delta_I = 0;
    long delta_O = 0;
    std::uint64_t seed = 0;
    std::uint64_t replica = 0;

    friend bool operator==(const FluctuationRecord&, const FluctuationRecord&) = default;
};

struct Checkpoint {
    std::size_t n = 0;
    std::uint64_t volume = 0;
    std::size_t inner = 0;
    std::size_t outer = 0;
};

/// delta_I(n) = n - (inner + 1) since the closest unoccupied site sits at
/// word radius inner + 1; delta_O(n) = outer - n. No clamping.
inline FluctuationRecord fluctuation(const Checkpoint& c, std::uint64_t seed, std::uint64_t replica) {
    return {c.n, c.volume, static_cast<long>(c.n) - static_cast<long>(c.inner + 1),
            static_cast<long>(c.outer) - static_cast<long>(c.n), seed, replica};
}

inline std::vector<FluctuationRecord> fluctuations(const std::vector<Checkpoint>& checkpoints, std::uint64_t seed,
                                                   std::uint64_t replica) {
    std::vector<FluctuationRecord> out;
    out.reserve(checkpoints.size());
    for (const auto& c : checkpoints) out.push_back(fluctuation(c, seed, replica));
    return out;
}

struct IdlaRun {
    Cluster<FreeProductGroup> cluster;
    std::vector<Checkpoint> checkpoints;
    std::vector<FluctuationRecord> records;
};

/// Largest n with V(n) within the element budget.
inline std::size_t max_radius_within(std::uint64_t q, std::uint64_t budget) {
    std::size_t n = 0;
    try {
        while (ball_volume(n + 1, q) <= budget) ++n;
    } catch (const overflow_error&) {
    }
    return n;
}

/// Grows a cluster to V(n_max) sites, recording a checkpoint each time the
/// size reaches V(n), n = 1..n_max.
inline IdlaRun run_to_volume(const FreeProductGroup& group, std::size_t n_max, std::uint64_t master_seed,
                             std::uint64_t replica = 0, std::uint64_t budget = kDefaultElementBudget) {
    if (n_max < 1) throw invalid_input("run_to_volume needs n_max >= 1");
    const std::uint64_t q = group.degree();
    const std::size_t reachable = max_radius_within(q, budget);
    if (reachable < n_max) {
        std::uint64_t required = std::numeric_limits<std::uint64_t>::max();
        try {
            required = ball_volume(n_max, q);
        } catch (const overflow_error&) {
        }
        throw resource_error("V(" + std::to_string(n_max) + ") exceeds the element budget of " +
                                 std::to_string(budget) + "; attainable n is " + std::to_string(reachable),
                             required);
    }

    IdlaRun run{Cluster<FreeProductGroup>(group), {}, {}};
    std::size_t inner = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        const std::uint64_t volume = ball_volume(n, q);
        while (run.cluster.size() < volume) grow_one(run.cluster, master_seed, replica);
        inner = inner_radius(run.cluster, inner, budget);
        run.checkpoints.push_back({n, volume, inner, outer_radius(run.cluster)});
    }
    run.records = fluctuations(run.checkpoints, master_seed, replica);
    return run;
}

struct SnapshotManifest {
    std::string model;
    unsigned q = 0;
    unsigned free_pairs = 0;
    unsigned involutions = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t replica = 0;
    std::uint64_t particles = 0;
    std::string version = kVersion;
};

/// Writes a JSON manifest line followed by one canonical word per line in
/// insertion order (the identity first, printed as "1").
inline void save_snapshot(std::ostream& out, const Cluster<FreeProductGroup>& cluster, std::uint64_t master_seed,
                          std::uint64_t replica) {
    const auto& g = cluster.group();
    nlohmann::json manifest = {{"model", std::string(to_string(g.kind()))},
                               {"q", g.degree()},
                               {"free_pairs", g.free_pairs()},
                               {"involutions", g.involutions()},
                               {"master_seed", master_seed},
                               {"replica", replica},
                               {"particles", cluster.size()},
                               {"version", kVersion}};
    out << manifest.dump() << '\n';
    for (const auto& site : cluster.ordered_sites()) out << g.format(site) << '\n';
}

struct Snapshot {
    SnapshotManifest manifest;
    Cluster<FreeProductGroup> cluster;
};

/// Rebuilds a cluster from save_snapshot output. Exit indices are not stored
/// and come back as zero.
inline Snapshot load_snapshot(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw invalid_input("snapshot is empty");
    SnapshotManifest m;
    try {
        const auto j = nlohmann::json::parse(line);
        m.model = j.at("model").get<std::string>();
        m.q = j.at("q").get<unsigned>();
        m.free_pairs = j.at("free_pairs").get<unsigned>();
        m.involutions = j.at("involutions").get<unsigned>();
        m.master_seed = j.at("master_seed").get<std::uint64_t>();
        m.replica = j.at("replica").get<std::uint64_t>();
        m.particles = j.at("particles").get<std::uint64_t>();
        m.version = j.at("version").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw invalid_input(std::string("bad snapshot manifest: ") + e.what());
    }
    FreeProductGroup group(m.free_pairs, m.involutions);
    if (group.degree() != m.q) throw invalid_input("snapshot manifest degree does not match its presentation");
    Snapshot snap{m, Cluster<FreeProductGroup>(group)};
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const Word w = group.parse(line);
        if (first) {
            if (!w.is_identity()) throw invalid_input("snapshot must start with the identity");
            first = false;
            continue;
        }
        snap.cluster.add(w, 0);
    }
    if (snap.cluster.size() != m.particles)
        throw invalid_input("snapshot holds " + std::to_string(snap.cluster.size()) + " sites, manifest says " +
                            std::to_string(m.particles));
    return snap;
}

}  // namespace idla
