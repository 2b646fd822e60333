// SPDX-License-Identifier: Apache-2.0
//
// Semantic blocks: description blocks grown from a main concept, and
// substitution blocks standing in for a stretch of model structure.
#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "annot/error.hpp"
#include "annot/kstore.hpp"

namespace annot {

struct SemanticBlock {
    std::string main;
    std::set<std::string> entities;
    std::set<BinaryRelation> relations;

    friend bool operator==(const SemanticBlock&, const SemanticBlock&) = default;
};

// Returns the first violated block invariant, if any: main is a member, every
// relation stays inside the block, and every member is reachable from main
// through the block's own relations.
inline std::optional<std::string> block_violation(const SemanticBlock& b) {
    if (b.main.empty() || !b.entities.count(b.main)) return "main concept belongs to the block";
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& r : b.relations) {
        if (!b.entities.count(r.domain) || !b.entities.count(r.range))
            return "relation endpoints inside the block (" + r.domain + " " + r.predicate + " " + r.range + ")";
        adj[r.domain].push_back(r.range);
    }
    std::set<std::string> seen{b.main};
    std::deque<std::string> queue{b.main};
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (const auto& next : adj[cur])
            if (seen.insert(next).second) queue.push_back(next);
    }
    for (const auto& e : b.entities)
        if (!seen.count(e)) return "every entity reachable from the main concept (" + e + ")";
    return std::nullopt;
}

// How a description block is grown from its main concept.
struct Selector {
    enum class Mode { All, Predicates, Depth };

    Mode mode = Mode::All;
    std::set<std::string> allowed;         // Predicates mode
    std::optional<std::size_t> max_depth;  // honoured in every mode; required by Depth

    static Selector all() { return {}; }

    static Selector predicates(std::set<std::string> preds, std::optional<std::size_t> depth = std::nullopt) {
        Selector s{Mode::Predicates, std::move(preds), depth};
        s.validate();
        return s;
    }

    static Selector depth(std::size_t n) { return {Mode::Depth, {}, n}; }

    void validate() const {
        if (mode == Mode::Predicates && allowed.empty())
            throw InvariantError("whitelist selector has predicates", "empty predicate set");
        if (mode == Mode::Depth && !max_depth) throw InvariantError("depth selector has a bound", "no max depth");
    }

    bool admits(const BinaryRelation& r) const { return mode != Mode::Predicates || allowed.count(r.predicate) != 0; }
};

// Least fixpoint of the layered construction: layer 0 is {main}, layer n+1 the
// out-neighbours of layer n along admitted relations, cut at max_depth.
inline SemanticBlock delimit_sb(const Graph& g, const std::string& main, const Selector& sel = Selector::all()) {
    sel.validate();
    if (!g.has_entity(main)) throw NotFoundError("main concept", main);
    SemanticBlock block;
    block.main = main;
    block.entities.insert(main);
    std::vector<std::string> layer{main};
    for (std::size_t depth = 0; !layer.empty(); ++depth) {
        if (sel.max_depth && depth >= *sel.max_depth) break;
        std::vector<std::string> next;
        for (const auto& id : layer)
            for (const auto* r : g.edges(id, Direction::Out))
                if (sel.admits(*r) && block.entities.insert(r->range).second) next.push_back(r->range);
        layer = std::move(next);
    }
    for (const auto& id : block.entities)
        for (const auto* r : g.edges(id, Direction::Out))
            if (sel.admits(*r) && block.entities.count(r->range)) block.relations.insert(*r);
    return block;
}

// Reading of the second substitution condition. Strict: each interior entity
// is the domain of a block relation into the interior. Symmetric: it touches
// such a relation in either direction.
enum class SbrMode { Strict, Symmetric };

inline const char* to_string(SbrMode m) { return m == SbrMode::Strict ? "strict" : "symmetric"; }

inline SbrMode parse_sbr_mode(std::string_view s) {
    if (s == "strict") return SbrMode::Strict;
    if (s == "symmetric") return SbrMode::Symmetric;
    throw InvariantError("sbr mode is strict or symmetric", std::string(s));
}

struct SbrValidation {
    int condition = 0;  // 0 when accepted, else the violated condition 1..3
    std::string witness;

    bool accepted() const noexcept { return condition == 0; }
    explicit operator bool() const noexcept { return accepted(); }
};

// Checks the three substitution conditions, in order, on (interior, rels)
// between `left` and `right`.
inline SbrValidation validate_sbr(const Graph& g, const std::string& left, const std::string& right,
                                  const std::set<std::string>& interior, const std::vector<BinaryRelation>& rels,
                                  SbrMode mode = SbrMode::Symmetric) {
    if (!g.has_entity(left)) throw NotFoundError("entity", left);
    if (!g.has_entity(right)) throw NotFoundError("entity", right);
    for (const auto& a : interior)
        if (!g.has_entity(a)) throw NotFoundError("entity", a);
    for (const auto& r : rels) {
        const auto* stored = g.relation(r.id);
        if (!stored || !(*stored == r)) throw NotFoundError("relation", r.id);
    }

    if (interior.count(left)) return {1, left};
    if (interior.count(right)) return {1, right};

    for (const auto& k : interior) {
        bool covered = false;
        for (const auto& r : rels) {
            if (r.domain == k && interior.count(r.range)) covered = true;
            else if (mode == SbrMode::Symmetric && r.range == k && interior.count(r.domain)) covered = true;
            if (covered) break;
        }
        if (!covered) return {2, k};
    }

    auto inside = [&](const std::string& a) { return a == left || a == right || interior.count(a) != 0; };
    for (const auto& r : rels)
        if (!inside(r.domain) || !inside(r.range)) return {3, r.domain + " " + r.predicate + " " + r.range};
    return {};
}

struct SubstitutionBlock {
    std::string left;
    std::string right;
    std::set<std::string> interior;
    std::vector<BinaryRelation> relations;
    std::string derivedPredicate;
};

inline SubstitutionBlock make_substitution_block(const Graph& g, std::string left, std::string right,
                                                 std::set<std::string> interior, std::vector<BinaryRelation> rels,
                                                 std::string derived_predicate, SbrMode mode = SbrMode::Symmetric) {
    auto v = validate_sbr(g, left, right, interior, rels, mode);
    if (!v) throw InvariantError("substitution condition C" + std::to_string(v.condition), v.witness);
    return {std::move(left), std::move(right), std::move(interior), std::move(rels), std::move(derived_predicate)};
}

}  // namespace annot
