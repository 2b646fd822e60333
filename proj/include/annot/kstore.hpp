// SPDX-License-Identifier: Apache-2.0
//
// Knowledge store: entity/relation graphs, ontologies and the ontology file
// format. Everything in here is a value type; a loaded KnowledgeStore is never
// mutated, it is rebuilt.
#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "annot/error.hpp"
#include "annot/names.hpp"

namespace annot {

struct Entity {
    std::string id;     // qualified: namespace + local name
    std::string label;  // human readable
    std::string ns;     // "&NS;"

    friend bool operator==(const Entity&, const Entity&) = default;
};

// Builds an entity from a qualified id; the label defaults to the local name.
inline Entity make_entity(std::string_view id, std::string label = {}) {
    auto q = split_qname(id);
    if (!q) throw InvariantError("entity id must be namespace-qualified", std::string(id));
    if (label.empty()) label = q->local;
    return Entity{std::string(id), std::move(label), q->prefix};
}

struct BinaryRelation {
    std::string id;
    std::string predicate;
    std::string domain;
    std::string range;

    const std::string& dom() const noexcept { return domain; }
    const std::string& ran() const noexcept { return range; }

    friend auto operator<=>(const BinaryRelation& a, const BinaryRelation& b) {
        return std::tie(a.domain, a.predicate, a.range, a.id) <=> std::tie(b.domain, b.predicate, b.range, b.id);
    }
    friend bool operator==(const BinaryRelation&, const BinaryRelation&) = default;
};

enum class Direction { Out, In, Both };

// The (A, B) universe: a set of entities and binary relations over them.
// Relation endpoints always resolve; this is checked on every insertion.
class Graph {
public:
    const Entity& add_entity(Entity e) {
        if (e.id.empty()) throw InvariantError("entity id non-empty", "empty id");
        if (e.ns.empty()) throw InvariantError("entity namespace non-empty", e.id);
        if (e.id.compare(0, e.ns.size(), e.ns) != 0 || e.id.size() == e.ns.size())
            throw InvariantError("entity id = namespace + local name", e.id);
        auto [it, inserted] = entities_.emplace(e.id, std::move(e));
        if (!inserted) throw InvariantError("entity ids unique", it->first);
        return it->second;
    }

    // Adds an entity unless one with the same id already exists.
    const Entity& ensure_entity(Entity e) {
        if (auto it = entities_.find(e.id); it != entities_.end()) return it->second;
        return add_entity(std::move(e));
    }

    const BinaryRelation& add_relation(BinaryRelation r) {
        if (!has_entity(r.domain)) throw InvariantError("relation domain resolves", r.domain);
        if (!has_entity(r.range)) throw InvariantError("relation range resolves", r.range);
        if (r.predicate.empty()) throw InvariantError("relation predicate non-empty", r.domain + " -> " + r.range);
        if (r.id.empty()) r.id = "r" + std::to_string(next_id_++);
        if (by_id_.count(r.id)) throw InvariantError("relation ids unique", r.id);
        const std::size_t idx = relations_.size();
        by_id_.emplace(r.id, idx);
        out_[r.domain].push_back(idx);
        in_[r.range].push_back(idx);
        relations_.push_back(std::move(r));
        return relations_.back();
    }

    // Removes the entity together with every incident relation.
    void remove_entity(const std::string& id) {
        if (!has_entity(id)) throw NotFoundError("entity", id);
        std::vector<BinaryRelation> kept;
        kept.reserve(relations_.size());
        for (auto& r : relations_)
            if (r.domain != id && r.range != id) kept.push_back(std::move(r));
        entities_.erase(id);
        rebuild(std::move(kept));
    }

    void remove_relation(const std::string& rel_id) {
        auto it = by_id_.find(rel_id);
        if (it == by_id_.end()) throw NotFoundError("relation", rel_id);
        std::vector<BinaryRelation> kept = relations_;
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(it->second));
        rebuild(std::move(kept));
    }

    bool has_entity(std::string_view id) const { return entities_.find(std::string(id)) != entities_.end(); }

    const Entity& entity(const std::string& id) const {
        auto it = entities_.find(id);
        if (it == entities_.end()) throw NotFoundError("entity", id);
        return it->second;
    }

    const std::map<std::string, Entity>& entities() const noexcept { return entities_; }
    const std::vector<BinaryRelation>& relations() const noexcept { return relations_; }

    const BinaryRelation* relation(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &relations_[it->second];
    }

    const BinaryRelation* find(std::string_view domain, std::string_view predicate, std::string_view range) const {
        auto it = out_.find(std::string(domain));
        if (it == out_.end()) return nullptr;
        for (auto idx : it->second) {
            const auto& r = relations_[idx];
            if (r.predicate == predicate && r.range == range) return &r;
        }
        return nullptr;
    }

    // Relations leaving (Out) or entering (In) the entity, in insertion order.
    std::vector<const BinaryRelation*> edges(const std::string& id, Direction dir) const {
        std::vector<const BinaryRelation*> out;
        auto collect = [&](const std::map<std::string, std::vector<std::size_t>>& index) {
            if (auto it = index.find(id); it != index.end())
                for (auto idx : it->second) out.push_back(&relations_[idx]);
        };
        if (dir != Direction::In) collect(out_);
        if (dir != Direction::Out) collect(in_);
        return out;
    }

    bool empty() const noexcept { return entities_.empty(); }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.entities_ == b.entities_ && a.relations_ == b.relations_;
    }

private:
    void rebuild(std::vector<BinaryRelation> rels) {
        relations_.clear();
        by_id_.clear();
        out_.clear();
        in_.clear();
        for (auto& r : rels) add_relation(std::move(r));
    }

    std::map<std::string, Entity> entities_;
    std::vector<BinaryRelation> relations_;
    std::map<std::string, std::size_t> by_id_;
    std::map<std::string, std::vector<std::size_t>> out_;
    std::map<std::string, std::vector<std::size_t>> in_;
    std::size_t next_id_ = 1;
};

// Pairs (relation, other endpoint) adjacent to `id`. Sorted by relation order.
inline std::vector<std::pair<BinaryRelation, Entity>> neighbors(const Graph& g, const std::string& id, Direction dir) {
    if (!g.has_entity(id)) throw NotFoundError("entity", id);
    std::vector<std::pair<BinaryRelation, Entity>> out;
    for (const auto* r : g.edges(id, dir)) {
        const bool outgoing = r->domain == id && dir != Direction::In;
        const std::string& other = outgoing ? r->range : r->domain;
        out.emplace_back(*r, g.entity(other));
    }
    // a self loop shows up in both indexes

    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
              out.end());
    return out;
}

struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

enum class OntologyRole { Plc, MetaModel };

struct Ontology {
    std::string name;    // "AIPL"
    std::string prefix;  // "&AIPL;"
    OntologyRole role = OntologyRole::Plc;
    std::set<std::string> imports;                 // other prefixes this file may reference
    std::map<std::string, std::string> concepts;   // qualified id -> label
    std::set<std::string> properties;              // qualified names
    std::set<Triple> axioms;

    friend bool operator==(const Ontology&, const Ontology&) = default;
};

// Every concept and property of the ontology.
inline std::set<std::string> oall(const Ontology& o) {
    std::set<std::string> all(o.properties.begin(), o.properties.end());
    for (const auto& [id, label] : o.concepts) all.insert(id);
    return all;
}

namespace detail {

inline std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline nlohmann::json parse_json(std::string_view text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what(), line_of(text, e.byte == 0 ? 0 : e.byte - 1));
    }
}

inline const nlohmann::json& require(const nlohmann::json& j, const char* key, const char* what) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string(what) + ": missing field '" + key + "'");
    return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key, const char* what) {
    const auto& v = require(j, key, what);
    if (!v.is_string()) throw ParseError(std::string(what) + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace detail

// Parses the JSON ontology format:
//   {"namespace":"AIPL","prefix":"&AIPL;","role":"plc","imports":["&MSDL;"],
//    "concepts":[...],"properties":[...],"triples":[["s","p","o"],...]}
// Bare names resolve against the file's own prefix. Triple endpoints are
// registered as concepts.
inline Ontology parse_ontology(std::string_view text) {
    constexpr const char* what = "ontology";
    const auto j = detail::parse_json(text, what);
    if (!j.is_object()) throw ParseError("ontology: top level must be an object", 1);

    Ontology o;
    o.name = detail::require_string(j, "namespace", what);
    if (o.name.empty()) throw ParseError("ontology: namespace must be non-empty");
    o.prefix = make_prefix(o.name);
    if (auto it = j.find("prefix"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>() != o.prefix)
            throw ParseError("ontology: prefix must be \"" + o.prefix + "\"");
    }
    if (auto it = j.find("role"); it != j.end()) {
        const auto role = it->is_string() ? it->get<std::string>() : std::string();
        if (role == "plc") o.role = OntologyRole::Plc;
        else if (role == "metamodel") o.role = OntologyRole::MetaModel;
        else throw ParseError("ontology: role must be \"plc\" or \"metamodel\"");
    }
    if (auto it = j.find("imports"); it != j.end()) {
        for (const auto& p : *it) {
            if (!p.is_string()) throw ParseError("ontology: imports must be strings");
            o.imports.insert(make_prefix(p.get<std::string>()));
        }
    }

    auto resolve = [&](const std::string& name, bool predicate_position) -> std::string {
        if (name.empty()) throw ParseError("ontology: empty name");
        if (predicate_position && is_reserved_predicate(name)) return name;
        if (name.front() == '&') {
            auto q = split_qname(name);
            if (!q) throw ParseError("ontology: malformed qualified name '" + name + "'");
            if (q->prefix != o.prefix && !o.imports.count(q->prefix))
                throw ParseError("ontology: undeclared namespace prefix " + q->prefix + " in '" + name + "'");
            return name;
        }
        if (name.find(':') != std::string::npos || name.find(';') != std::string::npos)
            throw ParseError("ontology: undeclared namespace prefix in '" + name + "'");
        return o.prefix + name;
    };

    if (auto it = j.find("concepts"); it != j.end()) {
        for (const auto& c : *it) {
            std::string id, label;
            if (c.is_string()) {
                id = c.get<std::string>();
            } else if (c.is_object()) {
                id = detail::require_string(c, "id", "concept");
                if (auto l = c.find("label"); l != c.end() && l->is_string()) label = l->get<std::string>();
            } else {
                throw ParseError("ontology: concepts must be strings or objects");
            }
            id = resolve(id, false);
            if (label.empty()) label = local_name(id);
            if (!o.concepts.emplace(id, label).second) throw ParseError("ontology: duplicate concept id '" + id + "'");
        }
    }
    if (auto it = j.find("properties"); it != j.end()) {
        for (const auto& p : *it) {
            if (!p.is_string()) throw ParseError("ontology: properties must be strings");
            auto id = resolve(p.get<std::string>(), false);
            if (!o.properties.insert(id).second) throw ParseError("ontology: duplicate property '" + id + "'");
        }
    }
    if (auto it = j.find("triples"); it != j.end()) {
        std::size_t index = 0;
        for (const auto& t : *it) {
            if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[1].is_string() || !t[2].is_string())
                throw ParseError("ontology: triple " + std::to_string(index) + " must be [subject, predicate, object]");
            Triple tr{resolve(t[0].get<std::string>(), false), resolve(t[1].get<std::string>(), true),
                      resolve(t[2].get<std::string>(), false)};
            if (!is_reserved_predicate(tr.predicate) && prefix_of(tr.predicate) == o.prefix &&
                !o.properties.count(tr.predicate))
                throw ParseError("ontology: triple " + std::to_string(index) + " uses undeclared property '" +
                                 tr.predicate + "'");
            if (o.properties.count(tr.subject) || o.properties.count(tr.object))
                throw ParseError("ontology: triple " + std::to_string(index) + " uses a property as an entity");
            o.concepts.emplace(tr.subject, local_name(tr.subject));
            o.concepts.emplace(tr.object, local_name(tr.object));
            o.axioms.insert(std::move(tr));
            ++index;
        }
    }
    return o;
}

// Canonical form: sorted members, own-namespace names written bare.
inline std::string serialize_ontology(const Ontology& o) {
    auto shorten = [&](const std::string& name) {
        if (prefix_of(name) == o.prefix) return local_name(name);
        return name;
    };
    nlohmann::ordered_json j;
    j["namespace"] = o.name;
    j["prefix"] = o.prefix;
    j["role"] = o.role == OntologyRole::Plc ? "plc" : "metamodel";
    j["imports"] = std::vector<std::string>(o.imports.begin(), o.imports.end());
    auto concepts = nlohmann::ordered_json::array();
    for (const auto& [id, label] : o.concepts) {
        if (label == local_name(id)) concepts.push_back(shorten(id));
        else concepts.push_back({{"id", shorten(id)}, {"label", label}});
    }
    j["concepts"] = std::move(concepts);
    auto props = nlohmann::ordered_json::array();
    for (const auto& p : o.properties) props.push_back(shorten(p));
    j["properties"] = std::move(props);
    auto triples = nlohmann::ordered_json::array();
    for (const auto& t : o.axioms) triples.push_back({shorten(t.subject), shorten(t.predicate), shorten(t.object)});
    j["triples"] = std::move(triples);
    return j.dump(2) + "\n";
}

// The meta-model view used to type model elements: a meta-model ontology plus
// the meta-model ontologies it imports. Elements (MME) are its classes.
struct MetaModelOntology {
    std::string prefix;
    std::set<std::string> elements;    // MME
    std::set<std::string> properties;  // admissible native link kinds
    std::set<Triple> axioms;

    // Resolves a bare or qualified name against a member set. Bare names must
    // match exactly one local name.
    static std::optional<std::string> resolve_in(const std::set<std::string>& members, std::string_view name) {
        if (is_qualified(name)) {
            if (members.count(std::string(name))) return std::string(name);
            return std::nullopt;
        }
        std::optional<std::string> found;
        for (const auto& m : members) {
            if (local_name(m) == name) {
                if (found) throw InvariantError("unambiguous meta-model name", std::string(name));
                found = m;
            }
        }
        return found;
    }

    // Bare names prefer the root namespace, then a unique imported member.
    std::optional<std::string> resolve(const std::set<std::string>& members, std::string_view name) const {
        if (!is_qualified(name)) {
            if (auto own = prefix + std::string(name); members.count(own)) return own;
        }
        return resolve_in(members, name);
    }

    std::optional<std::string> resolve_type(std::string_view name) const { return resolve(elements, name); }
    std::optional<std::string> resolve_property(std::string_view name) const { return resolve(properties, name); }

    // Reflexive-transitive rdfs:subClassOf test.
    bool is_subclass(const std::string& sub, const std::string& super) const {
        if (sub == super) return true;
        std::set<std::string> seen{sub};
        std::vector<std::string> stack{sub};
        while (!stack.empty()) {
            auto cur = std::move(stack.back());
            stack.pop_back();
            for (const auto& t : axioms) {
                if (t.subject != cur || t.predicate != kSubClassOf) continue;
                if (t.object == super) return true;
                if (seen.insert(t.object).second) stack.push_back(t.object);
            }
        }
        return false;
    }
};

// Ontologies keyed by prefix, plus the merged graphs used for delimitation.
class KnowledgeStore {
public:
    KnowledgeStore() = default;

    explicit KnowledgeStore(std::vector<Ontology> ontologies) {
        for (auto& o : ontologies) {
            auto prefix = o.prefix;
            if (!ontologies_.emplace(prefix, std::move(o)).second)
                throw InvariantError("one ontology per namespace", prefix);
        }
        validate();
        build_graphs();
    }

    const std::map<std::string, Ontology>& ontologies() const noexcept { return ontologies_; }

    const Ontology& ontology(std::string_view ns) const {
        auto it = ontologies_.find(make_prefix(ns));
        if (it == ontologies_.end()) throw NotFoundError("ontology namespace", std::string(ns));
        return it->second;
    }

    bool has_ontology(std::string_view ns) const { return ontologies_.count(make_prefix(ns)) != 0; }

    // Graph over every PLC-related ontology: the space domain semantics live in.
    const Graph& plc_graph() const noexcept { return plc_graph_; }

    // Union of oall over the PLC-related ontologies.
    const std::set<std::string>& plc_elements() const noexcept { return plc_elements_; }

    bool is_plc_property(const std::string& name) const {
        for (const auto& [p, o] : ontologies_)
            if (o.role == OntologyRole::Plc && o.properties.count(name)) return true;
        return false;
    }

    bool is_property(const std::string& name) const {
        for (const auto& [p, o] : ontologies_)
            if (o.properties.count(name)) return true;
        return false;
    }

    MetaModelOntology metamodel(std::string_view ns) const {
        const auto& root = ontology(ns);
        if (root.role != OntologyRole::MetaModel) throw InvariantError("meta-model ontology role", root.prefix);
        MetaModelOntology mmo;
        mmo.prefix = root.prefix;
        std::set<std::string> visited;
        std::vector<const Ontology*> stack{&root};
        while (!stack.empty()) {
            const Ontology* cur = stack.back();
            stack.pop_back();
            if (!visited.insert(cur->prefix).second) continue;
            std::set<std::string> individuals;
            for (const auto& t : cur->axioms)
                if (t.predicate == kRdfType) individuals.insert(t.subject);
            for (const auto& [id, label] : cur->concepts)
                if (!individuals.count(id)) mmo.elements.insert(id);
            mmo.properties.insert(cur->properties.begin(), cur->properties.end());
            mmo.axioms.insert(cur->axioms.begin(), cur->axioms.end());
            for (const auto& imp : cur->imports) {
                auto it = ontologies_.find(imp);
                if (it != ontologies_.end() && it->second.role == OntologyRole::MetaModel) stack.push_back(&it->second);
            }
        }
        return mmo;
    }

    // Adds every rdfs:subClassOf descendant (within the PLC graph) to `ids`.
    std::set<std::string> subclass_closure(const std::set<std::string>& ids) const {
        std::set<std::string> out = ids;
        std::vector<std::string> stack(ids.begin(), ids.end());
        while (!stack.empty()) {
            auto cur = std::move(stack.back());
            stack.pop_back();
            if (!plc_graph_.has_entity(cur)) continue;
            for (const auto* r : plc_graph_.edges(cur, Direction::In))
                if (r->predicate == kSubClassOf && out.insert(r->domain).second) stack.push_back(r->domain);
        }
        return out;
    }

private:
    void validate() const {
        for (const auto& [prefix, o] : ontologies_) {
            for (const auto& t : o.axioms) {
                if (is_reserved_predicate(t.predicate) || o.properties.count(t.predicate)) continue;
                auto owner = ontologies_.find(prefix_of(t.predicate));
                if (owner == ontologies_.end() || !owner->second.properties.count(t.predicate))
                    throw InvariantError("axiom predicate is a declared property",
                                         t.subject + " " + t.predicate + " " + t.object);
            }
        }
    }

    void build_graphs() {
        for (const auto& [prefix, o] : ontologies_) {
            if (o.role != OntologyRole::Plc) continue;
            auto all = oall(o);
            plc_elements_.insert(all.begin(), all.end());
            for (const auto& [id, label] : o.concepts) {
                // a concept declared by its owner keeps the owner's label
                auto owner = ontologies_.find(prefix_of(id));
                std::string lbl = label;
                if (owner != ontologies_.end()) {
                    if (auto c = owner->second.concepts.find(id); c != owner->second.concepts.end()) lbl = c->second;
                }
                plc_graph_.ensure_entity(make_entity(id, lbl));
            }
        }
        for (const auto& [prefix, o] : ontologies_) {
            if (o.role != OntologyRole::Plc) continue;
            for (const auto& t : o.axioms) {
                if (plc_graph_.find(t.subject, t.predicate, t.object)) continue;
                plc_graph_.add_relation({t.subject + " " + t.predicate + " " + t.object, t.predicate, t.subject, t.object});
            }
        }
    }

    std::map<std::string, Ontology> ontologies_;
    Graph plc_graph_;
    std::set<std::string> plc_elements_;
};

}  // namespace annot
