#pragma once

#include <idla/free_product.hpp>
#include <idla/lamplighter.hpp>

#include <concepts>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

namespace idla {

/// A group with a finite symmetric generating set, presented through its
/// Cayley graph: elements, right multiplication by generator ids, and the
/// word metric.
template <class G>
concept CayleyGroup = requires(const G& g, typename G::element_type& x, const typename G::element_type& cx,
                               std::size_t s) {
    typename G::element_hash;
    { G::exact_formulas } -> std::convertible_to<bool>;
    { g.identity() } -> std::same_as<typename G::element_type>;
    { g.degree() } -> std::convertible_to<unsigned>;
    g.step(x, s);
    { g.multiply(cx, cx) } -> std::same_as<typename G::element_type>;
    { g.inverse(cx) } -> std::same_as<typename G::element_type>;
    { g.word_length(cx) } -> std::convertible_to<std::size_t>;
    { g.format(cx) } -> std::convertible_to<std::string>;
    { g.kind() } -> std::same_as<GroupKind>;
};

/// Groups whose Cayley graph is the homogeneous tree T_q.
template <class G>
concept TreeGroup = CayleyGroup<G> && G::exact_formulas;

template <CayleyGroup G>
using ElementSet = std::unordered_set<typename G::element_type, typename G::element_hash>;

/// Breadth-first layers of the word ball of radius `depth` around the
/// identity: layers[r] holds the elements at word distance exactly r.
template <CayleyGroup G>
std::vector<std::vector<typename G::element_type>> bfs_layers(const G& group, std::size_t depth) {
    using E = typename G::element_type;
    std::vector<std::vector<E>> layers{{group.identity()}};
    ElementSet<G> seen{group.identity()};
    for (std::size_t r = 0; r < depth; ++r) {
        std::vector<E> next;
        for (const auto& x : layers.back()) {
            for (std::size_t s = 0; s < group.degree(); ++s) {
                E y = x;
                group.step(y, s);
                if (seen.insert(y).second) next.push_back(std::move(y));
            }
        }
        layers.push_back(std::move(next));
    }
    return layers;
}

}  // namespace idla
