#pragma once

// Hitting-distance balls B(n) = {y : d(center, y) <= K n} and their external
// boundaries. On T_q the hitting distance is ln(q-1) times the word distance,
// so B(n) is the word ball of radius n and its boundary the word sphere of
// radius n+1.

#include <idla/cayley.hpp>
#include <idla/errors.hpp>
#include <idla/free_product.hpp>
#include <idla/walk.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <string>

namespace idla {

inline constexpr std::uint64_t kDefaultElementBudget = 100'000'000ULL;

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out;
    if (__builtin_mul_overflow(a, b, &out)) throw overflow_error("ball size exceeds 64-bit range");
    return out;
}

inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t out = 1;
    for (std::uint64_t i = 0; i < exp; ++i) out = checked_mul(out, base);
    return out;
}

inline void require_tree_degree(std::uint64_t q) {
    if (q < 3) throw invalid_input("tree degree must be >= 3, got " + std::to_string(q));
}

}  // namespace detail

/// #dB(n) = q (q-1)^n.
inline std::uint64_t sphere_size(std::uint64_t n, std::uint64_t q) {
    detail::require_tree_degree(q);
    return detail::checked_mul(q, detail::checked_pow(q - 1, n));
}

/// V(n) = (q (q-1)^n - 2) / (q - 2).
inline std::uint64_t ball_volume(std::uint64_t n, std::uint64_t q) {
    return (sphere_size(n, q) - 2) / (q - 2);
}

struct BallSpec {
    Word center;
    std::size_t radius = 0;
};

/// z in B(center, radius), i.e. word distance at most radius.
template <CayleyGroup G>
bool contains(const G& group, const typename G::element_type& z, const BallSpec& spec) {
    if constexpr (G::exact_formulas) {
        return word_distance(group, spec.center, z) <= spec.radius;
    } else {
        throw unsupported_operation("hitting-distance balls are only available on trees");
    }
}

/// External boundary dB(n) of the ball B(e, n) on T_q: every reduced word of
/// length n+1, produced lazily in lexicographic generator order.
class SphereView {
  public:
    class iterator {
      public:
        using iterator_category = std::input_iterator_tag;
        using value_type = Word;
        using difference_type = std::ptrdiff_t;
        using pointer = const Word*;
        using reference = const Word&;

        iterator() = default;

        const Word& operator*() const { return word_; }
        const Word* operator->() const { return &word_; }

        iterator& operator++() {
            advance();
            return *this;
        }
        void operator++(int) { advance(); }

        friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

      private:
        friend class SphereView;
        iterator(const FreeProductGroup* group, std::size_t length) : group_(group), done_(false) {
            word_.letters.reserve(length);
            fill_from(0, length);
        }

        // Smallest letter >= from that does not cancel the previous one.
        int next_letter(std::size_t pos, int from) const {
            const int q = static_cast<int>(group_->degree());
            for (int g = from; g < q; ++g)
                if (pos == 0 || g != group_->inverse_letter(word_.letters[pos - 1])) return g;
            return -1;
        }

        void fill_from(std::size_t pos, std::size_t length) {
            word_.letters.resize(pos);
            while (word_.letters.size() < length)
                word_.letters.push_back(static_cast<std::uint8_t>(next_letter(word_.letters.size(), 0)));
        }

        void advance() {
            const std::size_t length = word_.letters.size();
            for (std::size_t pos = length; pos-- > 0;) {
                const int g = next_letter(pos, word_.letters[pos] + 1);
                if (g >= 0) {
                    word_.letters[pos] = static_cast<std::uint8_t>(g);
                    fill_from(pos + 1, length);
                    return;
                }
            }
            done_ = true;
        }

        const FreeProductGroup* group_ = nullptr;
        Word word_;
        bool done_ = true;
    };

    SphereView(const FreeProductGroup& group, std::size_t radius_index)
        : group_(&group), radius_index_(radius_index), size_(sphere_size(radius_index, group.degree())) {}

    std::size_t radius_index() const noexcept { return radius_index_; }
    std::uint64_t size() const noexcept { return size_; }

    iterator begin() const { return iterator(group_, radius_index_ + 1); }
    iterator end() const { return {}; }

  private:
    const FreeProductGroup* group_;
    std::size_t radius_index_;
    std::uint64_t size_;
};

/// Checks the element budget before handing out the boundary of B(n).
inline SphereView enumerate_sphere(const FreeProductGroup& group, std::size_t n,
                                   std::uint64_t budget = kDefaultElementBudget) {
    std::uint64_t required = 0;
    try {
        required = sphere_size(n, group.degree());
    } catch (const overflow_error&) {
        throw resource_error("sphere of radius index " + std::to_string(n) + " exceeds 64-bit count",
                             std::numeric_limits<std::uint64_t>::max());
    }
    if (required > budget)
        throw resource_error("sphere of radius index " + std::to_string(n) + " has " + std::to_string(required) +
                                 " elements, budget is " + std::to_string(budget),
                             required);
    return SphereView(group, n);
}

/// Position of a boundary word of dB(n) (length n+1) in enumeration order.
inline std::uint64_t sphere_rank(const FreeProductGroup& group, const Word& w) {
    if (w.letters.empty()) throw invalid_input("the identity is on no boundary sphere");
    group.validate(w);
    const std::uint64_t branch = group.degree() - 1;
    std::uint64_t index = w.letters[0];
    for (std::size_t i = 1; i < w.letters.size(); ++i) {
        const auto g = w.letters[i];
        const auto banned = group.inverse_letter(w.letters[i - 1]);
        if (g == banned) throw invalid_input("word is not reduced");
        index = index * branch + (g > banned ? g - 1u : g);
    }
    return index;
}

/// Inverse of sphere_rank for words of length n+1.
inline Word sphere_unrank(const FreeProductGroup& group, std::size_t n, std::uint64_t index) {
    const std::uint64_t branch = group.degree() - 1;
    if (index >= sphere_size(n, group.degree())) throw invalid_input("sphere index out of range");
    std::vector<std::uint64_t> digits(n + 1);
    for (std::size_t i = n; i > 0; --i) {
        digits[i] = index % branch;
        index /= branch;
    }
    digits[0] = index;
    Word w;
    w.letters.push_back(static_cast<std::uint8_t>(digits[0]));
    for (std::size_t i = 1; i <= n; ++i) {
        const auto banned = group.inverse_letter(w.letters.back());
        auto g = static_cast<std::uint8_t>(digits[i]);
        if (g >= banned) ++g;
        w.letters.push_back(g);
    }
    return w;
}

/// Verifies dB(n) is inside B(n+1) when balls are cut at hitting distance
/// K n, by enumerating the boundary. `K` defaults to ln(q-1); passing a
/// different value checks the inclusion for that radius unit.
inline bool check_boundary_inclusion(const FreeProductGroup& group, std::size_t n, double K = -1.0) {
    const double unit = std::log(group.degree() - 1.0);  // hitting distance of one tree edge
    if (K < 0) K = unit;
    const double tol = 1e-12 * (1.0 + K * static_cast<double>(n + 1));
    // Largest word radius whose hitting distance stays within K n.
    const auto ball_radius = static_cast<std::size_t>(std::floor((K * static_cast<double>(n) + tol) / unit));
    for (const Word& z : enumerate_sphere(group, ball_radius)) {
        if (unit * static_cast<double>(z.length()) > K * static_cast<double>(n + 1) + tol) return false;
    }
    return true;
}

}  // namespace idla
