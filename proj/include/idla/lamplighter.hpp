#pragma once

// Lamplighter group Z wr Z2 with the switch-walk generators t, t^-1 (move the
// cursor) and a (toggle the lamp under the cursor). Elements are stored as
// (cursor, set of lit lamps) rather than as words.

#include <idla/errors.hpp>
#include <idla/free_product.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace idla {

struct LampState {
    std::int64_t cursor = 0;
    std::vector<std::int64_t> lamps;  // sorted, distinct

    friend bool operator==(const LampState&, const LampState&) = default;
};

struct LampStateHash {
    std::size_t operator()(const LampState& x) const noexcept {
        std::size_t h = std::hash<std::int64_t>{}(x.cursor);
        for (auto l : x.lamps) h ^= std::hash<std::int64_t>{}(l) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

class LamplighterGroup {
  public:
    using element_type = LampState;
    using element_hash = LampStateHash;
    static constexpr bool exact_formulas = false;

    static constexpr std::size_t right = 0;   // t
    static constexpr std::size_t left = 1;    // t^-1
    static constexpr std::size_t toggle = 2;  // a

    GroupKind kind() const noexcept { return GroupKind::lamplighter; }
    unsigned degree() const noexcept { return 3; }

    Generator generator(std::size_t id) const {
        if (id > 2) throw invalid_input("lamplighter generator id " + std::to_string(id) + " out of range");
        return {static_cast<std::uint8_t>(id), id == toggle};
    }

    LampState identity() const { return {}; }

    LampState generator_element(std::size_t id) const {
        LampState x;
        step(x, id);
        return x;
    }

    void step(LampState& x, std::size_t g) const {
        switch (g) {
            case right: ++x.cursor; break;
            case left: --x.cursor; break;
            case toggle: flip(x.lamps, x.cursor); break;
            default: throw invalid_input("lamplighter generator id " + std::to_string(g) + " out of range");
        }
    }

    /// (p, L)(p', L') = (p + p', L xor (L' + p)).
    LampState multiply(const LampState& x, const LampState& y) const {
        LampState out{x.cursor + y.cursor, {}};
        std::vector<std::int64_t> shifted(y.lamps);
        for (auto& l : shifted) l += x.cursor;
        std::set_symmetric_difference(x.lamps.begin(), x.lamps.end(), shifted.begin(), shifted.end(),
                                      std::back_inserter(out.lamps));
        return out;
    }

    LampState inverse(const LampState& x) const {
        LampState out{-x.cursor, x.lamps};
        for (auto& l : out.lamps) l -= x.cursor;
        return out;
    }

    /// Word length for {t, t^-1, a}: one toggle per lit lamp plus the shortest
    /// cursor tour from 0 that visits every lit lamp and ends at the cursor.
    std::size_t word_length(const LampState& x) const noexcept {
        std::int64_t lo = std::min<std::int64_t>(0, x.cursor);
        std::int64_t hi = std::max<std::int64_t>(0, x.cursor);
        if (!x.lamps.empty()) {
            lo = std::min(lo, x.lamps.front());
            hi = std::max(hi, x.lamps.back());
        }
        const std::int64_t left_first = -lo + (hi - lo) + (hi - x.cursor);
        const std::int64_t right_first = hi + (hi - lo) + (x.cursor - lo);
        return x.lamps.size() + static_cast<std::size_t>(std::min(left_first, right_first));
    }

    std::vector<LampState> neighbors(const LampState& x) const {
        std::vector<LampState> out;
        for (std::size_t g = 0; g < degree(); ++g) {
            LampState y = x;
            step(y, g);
            out.push_back(std::move(y));
        }
        return out;
    }

    void validate(const LampState& x) const {
        if (!std::is_sorted(x.lamps.begin(), x.lamps.end()) ||
            std::adjacent_find(x.lamps.begin(), x.lamps.end()) != x.lamps.end())
            throw invalid_input("lamp set must be sorted and distinct");
    }

    std::string format(const LampState& x) const {
        std::ostringstream os;
        os << "(" << x.cursor << ";";
        for (std::size_t i = 0; i < x.lamps.size(); ++i) os << (i ? "," : "") << x.lamps[i];
        os << ")";
        return os.str();
    }

    /// Parses a word over t, T (= t^-1) and a, or "1" for the identity.
    LampState parse(std::string_view text) const {
        LampState x;
        if (text == "1" || text == "e") return x;
        for (char c : text) {
            switch (c) {
                case 't': step(x, right); break;
                case 'T': step(x, left); break;
                case 'a': step(x, toggle); break;
                default: throw invalid_input(std::string("unknown lamplighter letter '") + c + "'");
            }
        }
        return x;
    }

    friend bool operator==(const LamplighterGroup&, const LamplighterGroup&) { return true; }

  private:
    static void flip(std::vector<std::int64_t>& lamps, std::int64_t pos) {
        auto it = std::lower_bound(lamps.begin(), lamps.end(), pos);
        if (it != lamps.end() && *it == pos)
            lamps.erase(it);
        else
            lamps.insert(it, pos);
    }
};

}  // namespace idla
