#pragma once

// Reduced-word arithmetic for free products of copies of Z and Z2. Every such
// group with q generators (counting inverses) has the homogeneous tree T_q as
// Cayley graph, so ball volumes, hitting probabilities and exit laws are known
// in closed form.

#include <idla/errors.hpp>

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace idla {

enum class GroupKind { free_group, free_product, involution_tree, lamplighter };

inline std::string_view to_string(GroupKind kind) {
    switch (kind) {
        case GroupKind::free_group: return "free";
        case GroupKind::free_product: return "free-product";
        case GroupKind::involution_tree: return "tree";
        case GroupKind::lamplighter: return "lamplighter";
    }
    return "unknown";
}

struct Generator {
    std::uint8_t id = 0;
    bool involution = false;
};

/// Canonical reduced word. Letters are generator ids; the empty word is the
/// identity. Equality, ordering and hashing are byte-wise on the letters.
struct Word {
    std::vector<std::uint8_t> letters;

    std::size_t length() const noexcept { return letters.size(); }
    bool is_identity() const noexcept { return letters.empty(); }

    friend bool operator==(const Word&, const Word&) = default;
    friend auto operator<=>(const Word& a, const Word& b) {
        return std::lexicographical_compare_three_way(a.letters.begin(), a.letters.end(),
                                                      b.letters.begin(), b.letters.end());
    }
};

struct WordHash {
    std::size_t operator()(const Word& w) const noexcept {
        std::string_view bytes(reinterpret_cast<const char*>(w.letters.data()), w.letters.size());
        return std::hash<std::string_view>{}(bytes);
    }
};

/// Free product of `free_pairs` copies of Z and `involutions` copies of Z2.
///
/// Generator ids are dense: free pair i owns ids 2i (x_i) and 2i+1 (x_i^-1),
/// involutions follow. Letters print as a, b, c, ... with free inverses in
/// upper case; the identity prints as "1".
class FreeProductGroup {
  public:
    using element_type = Word;
    using element_hash = WordHash;
    static constexpr bool exact_formulas = true;

    FreeProductGroup(unsigned free_pairs, unsigned involutions)
        : pairs_(free_pairs), involutions_(involutions) {
        const unsigned q = 2 * free_pairs + involutions;
        if (q < 3) throw invalid_input("tree degree must be >= 3, got " + std::to_string(q));
        if (free_pairs + involutions > 26) throw invalid_input("at most 26 distinct letters supported");
        inverse_.resize(q);
        for (unsigned i = 0; i < pairs_; ++i) {
            inverse_[2 * i] = static_cast<std::uint8_t>(2 * i + 1);
            inverse_[2 * i + 1] = static_cast<std::uint8_t>(2 * i);
        }
        for (unsigned i = 2 * pairs_; i < q; ++i) inverse_[i] = static_cast<std::uint8_t>(i);
    }

    /// F_k; Cayley graph T_{2k}.
    static FreeProductGroup free_group(unsigned k) { return {k, 0}; }

    /// Z2 * ... * Z2 (q factors); every generator is an involution.
    static FreeProductGroup involution_tree(unsigned q) { return {0, q}; }

    /// F_{q/2} for even q, F_{(q-1)/2} * Z2 for odd q.
    static FreeProductGroup standard(unsigned q) { return {q / 2, q % 2}; }

    GroupKind kind() const noexcept {
        if (involutions_ == 0) return GroupKind::free_group;
        if (pairs_ == 0) return GroupKind::involution_tree;
        return GroupKind::free_product;
    }

    unsigned degree() const noexcept { return static_cast<unsigned>(inverse_.size()); }
    unsigned free_pairs() const noexcept { return pairs_; }
    unsigned involutions() const noexcept { return involutions_; }

    Generator generator(std::size_t id) const {
        check_letter(id);
        return {static_cast<std::uint8_t>(id), inverse_[id] == id};
    }

    std::uint8_t inverse_letter(std::uint8_t g) const noexcept { return inverse_[g]; }

    Word identity() const { return {}; }

    Word generator_word(std::size_t id) const {
        check_letter(id);
        return Word{{static_cast<std::uint8_t>(id)}};
    }

    /// Left-to-right free reduction with a stack; linear time.
    Word reduce(std::span<const std::uint8_t> raw) const {
        Word out;
        out.letters.reserve(raw.size());
        for (auto g : raw) {
            check_letter(g);
            append(out, g);
        }
        return out;
    }

    Word multiply(const Word& x, const Word& y) const {
        validate(x);
        validate(y);
        Word out = x;
        for (auto g : y.letters) append(out, g);
        return out;
    }

    Word inverse(const Word& x) const {
        Word out;
        out.letters.reserve(x.letters.size());
        for (auto it = x.letters.rbegin(); it != x.letters.rend(); ++it) out.letters.push_back(inverse_[*it]);
        return out;
    }

    /// In-place right multiplication by one generator; the walk hot path.
    void step(Word& x, std::size_t g) const noexcept { append(x, static_cast<std::uint8_t>(g)); }

    std::size_t word_length(const Word& x) const noexcept { return x.letters.size(); }

    /// x*s for every s in S, in generator order.
    std::vector<Word> neighbors(const Word& x) const {
        std::vector<Word> out;
        out.reserve(degree());
        for (std::size_t g = 0; g < degree(); ++g) {
            Word y = x;
            step(y, g);
            out.push_back(std::move(y));
        }
        return out;
    }

    /// Throws invalid_input unless x is a reduced word over this model's letters.
    void validate(const Word& x) const {
        for (std::size_t i = 0; i < x.letters.size(); ++i) {
            check_letter(x.letters[i]);
            if (i > 0 && inverse_[x.letters[i - 1]] == x.letters[i])
                throw invalid_input("word is not reduced at position " + std::to_string(i));
        }
    }

    char letter_name(std::uint8_t g) const {
        check_letter(g);
        if (g < 2 * pairs_) {
            const char base = static_cast<char>('a' + g / 2);
            return (g % 2 == 0) ? base : static_cast<char>(base - 'a' + 'A');
        }
        return static_cast<char>('a' + pairs_ + (g - 2 * pairs_));
    }

    std::string format(const Word& x) const {
        if (x.is_identity()) return "1";
        std::string s;
        s.reserve(x.length());
        for (auto g : x.letters) s.push_back(letter_name(g));
        return s;
    }

    /// Parses letters (as printed by format) and reduces. "1" and "" are the identity.
    Word parse(std::string_view text) const {
        if (text == "1" || (text == "e" && !has_letter('e'))) return identity();
        std::vector<std::uint8_t> raw;
        raw.reserve(text.size());
        for (char c : text) {
            const int id = letter_id(c);
            if (id < 0) throw invalid_input(std::string("unknown generator letter '") + c + "'");
            raw.push_back(static_cast<std::uint8_t>(id));
        }
        return reduce(raw);
    }

    friend bool operator==(const FreeProductGroup& a, const FreeProductGroup& b) {
        return a.pairs_ == b.pairs_ && a.involutions_ == b.involutions_;
    }

  private:
    void check_letter(std::size_t g) const {
        if (g >= inverse_.size())
            throw invalid_input("generator id " + std::to_string(g) + " outside generating set of size " +
                                std::to_string(inverse_.size()));
    }

    void append(Word& w, std::uint8_t g) const noexcept {
        if (!w.letters.empty() && w.letters.back() == inverse_[g])
            w.letters.pop_back();
        else
            w.letters.push_back(g);
    }

    bool has_letter(char c) const { return letter_id(c) >= 0; }

    int letter_id(char c) const {
        for (std::size_t g = 0; g < inverse_.size(); ++g)
            if (letter_name(static_cast<std::uint8_t>(g)) == c) return static_cast<int>(g);
        return -1;
    }

    unsigned pairs_;
    unsigned involutions_;
    std::vector<std::uint8_t> inverse_;
};

}  // namespace idla
