#pragma once

// Reproduction harness: fluctuation scans, lower-bound frequency scans, the
// Mouse selection on boundary spheres, balls-in-boxes coverage, exit-law
// uniformity tests and growth-order fits.

#include <idla/balls.hpp>
#include <idla/errors.hpp>
#include <idla/free_product.hpp>
#include <idla/idla.hpp>
#include <idla/parallel.hpp>
#include <idla/rng.hpp>
#include <idla/stats.hpp>
#include <idla/walk.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace idla {

// ---------------------------------------------------------------------------
// Configuration

struct ScanConfig {
    GroupKind kind = GroupKind::involution_tree;
    unsigned q = 3;
    std::size_t n_min = 1;
    std::size_t n_max = 10;
    std::uint64_t replicas = 1;
    std::uint64_t master_seed = 0;
    std::string output_path;
    unsigned threads = 1;
    std::uint64_t budget = kDefaultElementBudget;
};

/// The tree presentation used for `kind` and degree q.
inline FreeProductGroup make_tree_group(GroupKind kind, unsigned q) {
    switch (kind) {
        case GroupKind::involution_tree: return FreeProductGroup::involution_tree(q);
        case GroupKind::free_product: return FreeProductGroup::standard(q);
        case GroupKind::free_group:
            if (q % 2 != 0) throw invalid_input("free group needs even degree, got " + std::to_string(q));
            return FreeProductGroup::free_group(q / 2);
        case GroupKind::lamplighter: break;
    }
    throw unsupported_operation("the lamplighter group has no tree structure");
}

inline void validate(const ScanConfig& c) {
    if (c.replicas < 1) throw invalid_input("replicas must be >= 1");
    if (c.n_min < 1) throw invalid_input("n_min must be >= 1");
    if (c.n_max < c.n_min) throw invalid_input("n_max must be >= n_min");
    if (c.q < 3) throw invalid_input("tree degree must be >= 3");
}

// ---------------------------------------------------------------------------
// Fits

enum class FitForm { log, sqrt, power };

inline const char* to_string(FitForm f) {
    switch (f) {
        case FitForm::log: return "c*ln(n)";
        case FitForm::sqrt: return "c*sqrt(n)";
        case FitForm::power: return "c*n^alpha";
    }
    return "?";
}

struct FitPoint {
    double n = 0;
    double value = 0;
};

/// For log and sqrt forms: value = c * g(n) + intercept. For the power form
/// the fit is ln(value) = ln(c) + alpha ln(n).
struct FitResult {
    FitForm form = FitForm::log;
    double c = 0.0;
    double intercept = 0.0;  // zero for the power form
    double alpha = 0.0;      // power form only
    double r_squared = 0.0;
    std::size_t samples = 0;
};

inline FitResult fit(std::span<const FitPoint> points, FitForm form) {
    std::set<double> distinct;
    for (const auto& p : points) distinct.insert(p.n);
    if (distinct.size() < 4) throw fit_error("fit needs at least 4 distinct n values");
    std::vector<double> x, y;
    for (const auto& p : points) {
        if (p.n <= 0) throw fit_error("fit needs positive n");
        switch (form) {
            case FitForm::log:
                x.push_back(std::log(p.n));
                y.push_back(p.value);
                break;
            case FitForm::sqrt:
                x.push_back(std::sqrt(p.n));
                y.push_back(p.value);
                break;
            case FitForm::power:
                if (p.value <= 0) throw fit_error("power fit needs positive values");
                x.push_back(std::log(p.n));
                y.push_back(std::log(p.value));
                break;
        }
    }
    const auto lin = stats::linear_regression(x, y);
    FitResult r;
    r.form = form;
    r.samples = points.size();
    r.r_squared = lin.r_squared;
    if (form == FitForm::power) {
        r.c = std::exp(lin.intercept);
        r.alpha = lin.slope;
    } else {
        r.c = lin.slope;
        r.intercept = lin.intercept;
    }
    return r;
}

inline nlohmann::json to_json(const FitResult& f) {
    return {{"form", to_string(f.form)}, {"c", f.c},         {"intercept", f.intercept},
            {"alpha", f.alpha},          {"r_squared", f.r_squared}, {"samples", f.samples}};
}

// ---------------------------------------------------------------------------
// Shape scan

struct ShapeScan {
    std::vector<FluctuationRecord> records;  // sorted by (replica, n)
    FitResult inner_log;                     // max over replicas of delta_I vs ln n
    FitResult outer_sqrt;                    // max over replicas of delta_O vs sqrt n
    FitResult outer_power;                   // median delta_O vs n^alpha
};

/// Runs every replica to V(n_max) and keeps the records with n >= n_min.
/// Replica r is a pure function of (master_seed, r).
inline std::vector<IdlaRun> run_replicas(const ScanConfig& config) {
    validate(config);
    const auto group = make_tree_group(config.kind, config.q);
    std::vector<std::optional<IdlaRun>> runs(config.replicas);
    parallel_for(config.replicas, config.threads, [&](std::size_t r) {
        runs[r] = run_to_volume(group, config.n_max, config.master_seed, r, config.budget);
    });
    std::vector<IdlaRun> out;
    out.reserve(runs.size());
    for (auto& r : runs) out.push_back(std::move(*r));
    return out;
}

/// Aggregate of one statistic per n across replicas.
template <class Select, class Reduce>
std::vector<FitPoint> per_n(const std::vector<FluctuationRecord>& records, Select select, Reduce reduce) {
    std::map<std::size_t, std::vector<double>> by_n;
    for (const auto& r : records) by_n[r.n].push_back(select(r));
    std::vector<FitPoint> out;
    for (auto& [n, values] : by_n) out.push_back({static_cast<double>(n), reduce(values)});
    return out;
}

inline double max_of(std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

inline double median_of(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline ShapeScan shape_scan(const ScanConfig& config) {
    ShapeScan scan;
    for (const auto& run : run_replicas(config))
        for (const auto& rec : run.records)
            if (rec.n >= config.n_min) scan.records.push_back(rec);

    const auto inner_max = per_n(scan.records, [](const auto& r) { return double(r.delta_I); }, max_of);
    const auto outer_max = per_n(scan.records, [](const auto& r) { return double(r.delta_O); }, max_of);
    const auto outer_median = per_n(scan.records, [](const auto& r) { return double(r.delta_O); }, median_of);
    scan.inner_log = fit(inner_max, FitForm::log);
    scan.outer_sqrt = fit(outer_max, FitForm::sqrt);
    scan.outer_power = fit(outer_median, FitForm::power);
    return scan;
}

inline void write_records_csv(std::ostream& out, std::string_view model, unsigned q,
                              const std::vector<FluctuationRecord>& records) {
    out << "model,q,n,replica,seed,volume,delta_I,delta_O\n";
    for (const auto& r : records)
        out << model << ',' << q << ',' << r.n << ',' << r.replica << ',' << r.seed << ',' << r.volume << ','
            << r.delta_I << ',' << r.delta_O << '\n';
}

inline void write_fits_jsonl(std::ostream& out, const ShapeScan& scan) {
    const std::pair<const char*, const FitResult*> fits[] = {
        {"max_delta_I", &scan.inner_log}, {"max_delta_O", &scan.outer_sqrt}, {"median_delta_O", &scan.outer_power}};
    for (const auto& [name, f] : fits) {
        auto j = to_json(*f);
        j["statistic"] = name;
        out << j.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Lower-bound scan

/// Half of the admissible outer constant (ln(q-1)/ln q)^(1/2).
inline double default_outer_constant(unsigned q) { return 0.5 * std::sqrt(std::log(q - 1.0) / std::log(double(q))); }

/// Half of the admissible inner constant 1/(2 ln(q-1)).
inline double default_inner_constant(unsigned q) { return 0.25 / std::log(q - 1.0); }

struct LowerBoundRow {
    std::size_t n = 0;
    std::uint64_t replica = 0;
    std::size_t outer_shift = 0;   // ceil(C_o sqrt n)
    bool outer_reached = false;    // A(V(n)) meets dB(n + outer_shift)
    long inner_radius = 0;         // n - ceil(C_i ln n)
    bool inner_covered = false;    // B(inner_radius) inside A(V(n))
};

struct LowerBoundScan {
    double outer_constant = 0.0;
    double inner_constant = 0.0;
    std::vector<LowerBoundRow> rows;
    double outer_reached_fraction = 0.0;
    double inner_uncovered_fraction = 0.0;
};

inline LowerBoundScan lower_bound_scan(const ScanConfig& config, std::optional<double> outer_constant = {},
                                       std::optional<double> inner_constant = {}) {
    LowerBoundScan scan;
    scan.outer_constant = outer_constant.value_or(default_outer_constant(config.q));
    scan.inner_constant = inner_constant.value_or(default_inner_constant(config.q));
    std::size_t reached = 0, uncovered = 0;
    const auto runs = run_replicas(config);
    for (std::size_t r = 0; r < runs.size(); ++r) {
        for (const auto& c : runs[r].checkpoints) {
            if (c.n < config.n_min) continue;
            LowerBoundRow row;
            row.n = c.n;
            row.replica = r;
            const double n = static_cast<double>(c.n);
            row.outer_shift = static_cast<std::size_t>(std::ceil(scan.outer_constant * std::sqrt(n)));
            // dB(m) is the word sphere of radius m + 1.
            row.outer_reached = c.outer >= c.n + row.outer_shift + 1;
            row.inner_radius = static_cast<long>(c.n) - static_cast<long>(std::ceil(scan.inner_constant * std::log(n)));
            row.inner_covered = row.inner_radius <= static_cast<long>(c.inner);
            reached += row.outer_reached;
            uncovered += !row.inner_covered;
            scan.rows.push_back(row);
        }
    }
    if (!scan.rows.empty()) {
        scan.outer_reached_fraction = double(reached) / double(scan.rows.size());
        scan.inner_uncovered_fraction = double(uncovered) / double(scan.rows.size());
    }
    return scan;
}

// ---------------------------------------------------------------------------
// Classes and the Mouse selection on dB(R)

/// Partition of dB(R) into the classes [z] = dB(R) cap B(z, 2r). On T_q two
/// boundary points are within word distance 2r iff they share their first
/// R+1-r letters, so each class is a contiguous block of (q-1)^r sphere
/// indices.
struct ClassPartition {
    std::size_t R = 0;
    std::size_t r = 0;
    std::uint64_t class_size = 0;
    std::uint64_t class_count = 0;

    std::uint64_t class_of(std::uint64_t index) const { return index / class_size; }

    std::vector<std::uint64_t> members(std::uint64_t cls) const {
        std::vector<std::uint64_t> out(class_size);
        for (std::uint64_t i = 0; i < class_size; ++i) out[i] = cls * class_size + i;
        return out;
    }
};

inline ClassPartition class_partition(const FreeProductGroup& group, std::size_t R, std::size_t r) {
    if (r > R) throw invalid_input("class half-radius r must not exceed R");
    const std::uint64_t q = group.degree();
    ClassPartition p{R, r, detail::checked_pow(q - 1, r), 0};
    p.class_count = sphere_size(R, q) / p.class_size;
    return p;
}

struct MouseResult {
    Word z;                             // m_{R+1}, the selected boundary point
    std::uint64_t index = 0;            // its sphere index
    std::vector<Word> path;             // m_0 = e, ..., m_{R+1}
    std::vector<std::uint64_t> t_counts;  // #(B(m_j, R+1-j) cap A), j = 0..R+1
};

/// Greedy descent from e: at depth j step to the child y of m_j whose
/// B(y, R-j) holds the fewest points of A, ties to the smallest generator.
/// `marked` is the sorted set of sphere indices of A inside dB(R).
inline MouseResult mouse_select(const FreeProductGroup& group, std::size_t R,
                                std::span<const std::uint64_t> marked) {
    const std::uint64_t q = group.degree();
    const std::uint64_t total = sphere_size(R, q);
    if (!std::is_sorted(marked.begin(), marked.end()) ||
        std::adjacent_find(marked.begin(), marked.end()) != marked.end())
        throw invalid_input("mouse_select needs sorted distinct indices");
    if (!marked.empty() && marked.back() >= total) throw invalid_input("sphere index out of range");
    if (marked.size() == total) throw invalid_input("A covers the whole sphere; no secure place exists");

    auto count_in = [&](std::uint64_t lo, std::uint64_t hi) {
        return static_cast<std::uint64_t>(std::lower_bound(marked.begin(), marked.end(), hi) -
                                          std::lower_bound(marked.begin(), marked.end(), lo));
    };

    MouseResult out;
    out.path.push_back(group.identity());
    out.t_counts.push_back(marked.size());
    std::uint64_t lo = 0;
    std::uint64_t block = total / q;  // boundary points below one child of e
    Word m;
    for (std::size_t j = 0; j <= R; ++j) {
        std::uint64_t best_count = std::numeric_limits<std::uint64_t>::max();
        std::uint8_t best_letter = 0;
        std::uint64_t best_lo = 0;
        std::uint64_t k = 0;  // child position in enumeration order
        for (std::uint64_t g = 0; g < q; ++g) {
            if (j > 0 && g == group.inverse_letter(m.letters.back())) continue;
            const std::uint64_t child_lo = lo + k * block;
            const std::uint64_t c = count_in(child_lo, child_lo + block);
            if (c < best_count) {
                best_count = c;
                best_letter = static_cast<std::uint8_t>(g);
                best_lo = child_lo;
            }
            ++k;
        }
        m.letters.push_back(best_letter);
        lo = best_lo;
        out.path.push_back(m);
        out.t_counts.push_back(best_count);
        if (j < R) block /= (q - 1);
    }
    out.z = m;
    out.index = lo;
    return out;
}

/// Word-set overload: ranks, sorts and deduplicates A first.
inline MouseResult mouse_select(const FreeProductGroup& group, std::size_t R, const std::vector<Word>& marked) {
    std::vector<std::uint64_t> idx;
    idx.reserve(marked.size());
    for (const auto& w : marked) {
        if (w.length() != R + 1)
            throw invalid_input("word " + group.format(w) + " is not on the boundary of B(" + std::to_string(R) + ")");
        idx.push_back(sphere_rank(group, w));
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return mouse_select(group, R, std::span<const std::uint64_t>(idx));
}

// ---------------------------------------------------------------------------
// Balls in boxes

struct BoxesResult {
    std::uint64_t balls = 0;
    std::uint64_t boxes = 0;
    std::uint64_t trials = 0;
    double empirical = 0.0;
    double half_width = 0.0;
    double bound = 0.0;              // exp(-(M/2) exp(-4N/M))
    std::optional<double> exact;     // inclusion-exclusion, M <= 12
    std::string exact_numerator;     // surjections count
    std::string exact_denominator;   // M^N
};

/// exp(-(M/2) exp(-4N/M)), the upper bound on P[every box occupied].
inline double coverage_bound(std::uint64_t balls, std::uint64_t boxes) {
    const double m = static_cast<double>(boxes);
    return std::exp(-(m / 2.0) * std::exp(-4.0 * static_cast<double>(balls) / m));
}

struct ExactCoverage {
    boost::multiprecision::cpp_int numerator;
    boost::multiprecision::cpp_int denominator;
    double value = 0.0;
};

/// P[all M boxes hit by N balls] = sum_k (-1)^k C(M,k) (M-k)^N / M^N, in
/// exact integer arithmetic.
inline ExactCoverage exact_coverage(std::uint64_t balls, std::uint64_t boxes) {
    using boost::multiprecision::cpp_int;
    cpp_int sum = 0;
    cpp_int binom = 1;
    for (std::uint64_t k = 0; k <= boxes; ++k) {
        cpp_int term = binom * boost::multiprecision::pow(cpp_int(boxes - k), static_cast<unsigned>(balls));
        sum += (k % 2 == 0) ? term : cpp_int(-term);
        binom = binom * (boxes - k) / (k + 1);
    }
    ExactCoverage out;
    out.numerator = sum;
    out.denominator = boost::multiprecision::pow(cpp_int(boxes), static_cast<unsigned>(balls));
    using boost::multiprecision::cpp_rational;
    out.value = static_cast<double>(cpp_rational(out.numerator, out.denominator));
    return out;
}

inline BoxesResult balls_in_boxes(std::uint64_t balls, std::uint64_t boxes, std::uint64_t trials,
                                  const SeedSpec& seed) {
    if (boxes < 3) throw invalid_input("balls_in_boxes needs M >= 3");
    if (trials < 1000) throw invalid_input("balls_in_boxes needs at least 1000 trials");
    BoxesResult out{.balls = balls, .boxes = boxes, .trials = trials};
    Engine engine = make_engine(seed);
    std::uint64_t covered = 0;
    std::vector<std::uint64_t> stamp(boxes, 0);
    for (std::uint64_t t = 1; t <= trials; ++t) {
        std::uint64_t distinct = 0;
        for (std::uint64_t b = 0; b < balls; ++b) {
            auto& s = stamp[uniform_below(engine, boxes)];
            if (s != t) {
                s = t;
                ++distinct;
            }
        }
        covered += (distinct == boxes);
    }
    out.empirical = static_cast<double>(covered) / static_cast<double>(trials);
    out.half_width = stats::z95 * stats::binomial_sigma(out.empirical, trials);
    out.bound = coverage_bound(balls, boxes);
    if (boxes <= 12) {
        const auto ex = exact_coverage(balls, boxes);
        out.exact = ex.value;
        out.exact_numerator = ex.numerator.str();
        out.exact_denominator = ex.denominator.str();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exit-law uniformity

struct ExitTest {
    std::size_t n = 0;
    std::uint64_t samples = 0;
    std::vector<std::uint64_t> counts;  // by sphere index
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Chi-square goodness of fit of S(xi_n) against the uniform law on dB(n).
template <class Law = UniformStep>
ExitTest exit_uniformity(const FreeProductGroup& group, std::size_t n, std::uint64_t samples, const SeedSpec& seed,
                         const Law& law = {}, std::uint64_t budget = kDefaultElementBudget) {
    const auto sphere = enumerate_sphere(group, n, budget);
    if (samples < 10 * sphere.size())
        throw invalid_input("exit_uniformity needs at least 10 samples per boundary point");
    ExitTest out;
    out.n = n;
    out.samples = samples;
    out.counts.assign(sphere.size(), 0);
    Engine engine = make_engine(seed);
    for (std::uint64_t s = 0; s < samples; ++s) ++out.counts[sphere_rank(group, exit_point(group, n, engine, law))];
    out.statistic = stats::chi_square_uniform(out.counts);
    out.dof = static_cast<double>(sphere.size() - 1);
    out.p_value = stats::chi_square_p_value(out.statistic, out.dof);
    return out;
}

}  // namespace idla
