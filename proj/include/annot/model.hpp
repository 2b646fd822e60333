// SPDX-License-Identifier: Apache-2.0
//
// Target models (process/product models), relation explication and typing of
// model elements against a meta-model ontology.
#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <tuple>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "annot/error.hpp"
#include "annot/kstore.hpp"
#include "annot/names.hpp"

namespace annot {

struct ModelElement {
    std::string id;
    std::string label;
    std::string metaType;  // qualified member of MME
    std::map<std::string, std::string> attributes;

    friend bool operator==(const ModelElement&, const ModelElement&) = default;
};

struct ModelLink {
    std::string source;
    std::string target;
    std::string kind;  // qualified meta-model property

    friend auto operator<=>(const ModelLink&, const ModelLink&) = default;
};

class Model {
public:
    Model() = default;
    Model(std::string id, std::string metamodel) : id_(std::move(id)), metamodel_(std::move(metamodel)) {}

    const std::string& id() const noexcept { return id_; }
    const std::string& metamodel() const noexcept { return metamodel_; }

    // Namespace under which elements appear as graph entities.
    std::string ns() const { return make_prefix(id_); }

    void add_element(ModelElement e) {
        if (e.id.empty() || e.id.find_first_of("&;") != std::string::npos)
            throw InvariantError("element id is a plain non-empty name", e.id);
        auto [it, inserted] = index_.emplace(e.id, elements_.size());
        if (!inserted) throw InvariantError("element id unique in model", e.id);
        elements_.push_back(std::move(e));
    }

    void add_link(ModelLink l) {
        if (!has_element(l.source)) throw InvariantError("link endpoints resolve to elements", "dangling source '" + l.source + "'");
        if (!has_element(l.target)) throw InvariantError("link endpoints resolve to elements", "dangling target '" + l.target + "'");
        links_.push_back(std::move(l));
    }

    void remove_element(const std::string& id) {
        if (!has_element(id)) throw NotFoundError("element", id);
        std::vector<ModelElement> elems;
        for (auto& e : elements_)
            if (e.id != id) elems.push_back(std::move(e));
        std::vector<ModelLink> links;
        for (auto& l : links_)
            if (l.source != id && l.target != id) links.push_back(std::move(l));
        elements_.clear();
        index_.clear();
        links_.clear();
        for (auto& e : elems) add_element(std::move(e));
        for (auto& l : links) add_link(std::move(l));
    }

    bool has_element(std::string_view id) const { return index_.find(std::string(id)) != index_.end(); }

    const ModelElement& element(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw NotFoundError("element", id);
        return elements_[it->second];
    }

    const std::vector<ModelElement>& elements() const noexcept { return elements_; }
    const std::vector<ModelLink>& links() const noexcept { return links_; }

    friend bool operator==(const Model& a, const Model& b) {
        return a.id_ == b.id_ && a.metamodel_ == b.metamodel_ && a.elements_ == b.elements_ && a.links_ == b.links_;
    }

private:
    std::string id_;
    std::string metamodel_;
    std::vector<ModelElement> elements_;
    std::map<std::string, std::size_t> index_;
    std::vector<ModelLink> links_;
};

// {"id":"...","metamodel":"&MEGA;","elements":[{"id","label","metaType","attributes"}],
//  "links":[{"source","target","kind"}]}
// Meta types and link kinds may be bare local names; they are resolved against
// the meta-model ontology and stored qualified.
inline Model parse_model(std::string_view text, const MetaModelOntology& mmo) {
    constexpr const char* what = "model";
    const auto j = detail::parse_json(text, what);
    if (!j.is_object()) throw ParseError("model: top level must be an object", 1);

    auto metamodel = make_prefix(detail::require_string(j, "metamodel", what));
    if (metamodel != mmo.prefix)
        throw InvariantError("model bound to its meta-model ontology", "model declares " + metamodel + ", loaded " + mmo.prefix);
    Model m(detail::require_string(j, "id", what), metamodel);
    if (m.id().empty()) throw ParseError("model: id must be non-empty");

    if (auto it = j.find("elements"); it != j.end()) {
        for (const auto& e : *it) {
            if (!e.is_object()) throw ParseError("model: elements must be objects");
            ModelElement el;
            el.id = detail::require_string(e, "id", "model element");
            if (auto l = e.find("label"); l != e.end() && l->is_string()) el.label = l->get<std::string>();
            const auto declared = detail::require_string(e, "metaType", "model element");
            auto resolved = mmo.resolve_type(declared);
            if (!resolved)
                throw InvariantError("element metaType in MME", "element '" + el.id + "' has unknown metaType '" + declared + "'");
            el.metaType = *resolved;
            if (auto a = e.find("attributes"); a != e.end()) {
                if (!a->is_object()) throw ParseError("model: attributes of '" + el.id + "' must be an object");
                for (const auto& [k, v] : a->items()) el.attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
            m.add_element(std::move(el));
        }
    }
    if (auto it = j.find("links"); it != j.end()) {
        for (const auto& l : *it) {
            if (!l.is_object()) throw ParseError("model: links must be objects");
            ModelLink link{detail::require_string(l, "source", "link"), detail::require_string(l, "target", "link"),
                           detail::require_string(l, "kind", "link")};
            auto kind = mmo.resolve_property(link.kind);
            if (!kind) throw InvariantError("link kind declared by the meta-model", "unknown link kind '" + link.kind + "'");
            link.kind = *kind;
            m.add_link(std::move(link));
        }
    }
    return m;
}

inline nlohmann::ordered_json model_to_json(const Model& m) {
    nlohmann::ordered_json j;
    j["id"] = m.id();
    j["metamodel"] = m.metamodel();
    auto elems = nlohmann::ordered_json::array();
    for (const auto& e : m.elements()) {
        nlohmann::ordered_json ej{{"id", e.id}, {"label", e.label}, {"metaType", e.metaType}};
        if (!e.attributes.empty()) ej["attributes"] = e.attributes;
        elems.push_back(std::move(ej));
    }
    j["elements"] = std::move(elems);
    auto links = nlohmann::ordered_json::array();
    for (const auto& l : m.links()) links.push_back({{"source", l.source}, {"target", l.target}, {"kind", l.kind}});
    j["links"] = std::move(links);
    return j;
}

enum class RelationOrigin { Native, Derived };

// A relation materialized by a substitution-block rule, in element space.
struct DerivedRelation {
    std::string source;     // element id
    std::string predicate;  // &SANS;-namespaced
    std::string target;     // element id
    std::string rule;       // producing rule name

    friend auto operator<=>(const DerivedRelation& a, const DerivedRelation& b) {
        return std::tie(a.source, a.predicate, a.target, a.rule) <=> std::tie(b.source, b.predicate, b.target, b.rule);
    }
    friend bool operator==(const DerivedRelation&, const DerivedRelation&) = default;
};

// The explicated model: one entity per element, native relations per link,
// derived relations added by the rule engine.
class RelationGraph {
public:
    RelationGraph() = default;
    explicit RelationGraph(std::string ns) : ns_(std::move(ns)) {}

    const Graph& graph() const noexcept { return graph_; }
    const std::string& ns() const noexcept { return ns_; }

    std::string entity_id(std::string_view element) const { return ns_ + std::string(element); }

    std::string element_id(std::string_view entity) const {
        if (entity.compare(0, ns_.size(), ns_) != 0) throw NotFoundError("model entity", std::string(entity));
        return std::string(entity.substr(ns_.size()));
    }

    void add_element(const ModelElement& e) {
        graph_.add_entity(Entity{entity_id(e.id), e.label, ns_});
        types_.emplace(e.id, e.metaType);
    }

    bool has_element(std::string_view element) const { return types_.count(std::string(element)) != 0; }

    const std::string& meta_type(const std::string& element) const {
        auto it = types_.find(element);
        if (it == types_.end()) throw NotFoundError("element", element);
        return it->second;
    }

    void add_native(const ModelLink& l) {
        const auto& r = graph_.add_relation({"n" + std::to_string(origin_.size() + 1), l.kind, entity_id(l.source), entity_id(l.target)});
        origin_.emplace(r.id, Origin{RelationOrigin::Native, {}});
    }

    // Returns false when the same (source, predicate, target) already exists.
    bool add_derived(const DerivedRelation& d) {
        if (d.rule.empty()) throw InvariantError("derived relation cites its rule", d.source + " " + d.predicate + " " + d.target);
        if (graph_.find(entity_id(d.source), d.predicate, entity_id(d.target))) return false;
        const auto& r = graph_.add_relation({"d" + std::to_string(origin_.size() + 1), d.predicate, entity_id(d.source), entity_id(d.target)});
        origin_.emplace(r.id, Origin{RelationOrigin::Derived, d.rule});
        return true;
    }

    RelationOrigin origin(const std::string& relation_id) const {
        auto it = origin_.find(relation_id);
        if (it == origin_.end()) throw NotFoundError("relation", relation_id);
        return it->second.kind;
    }

    std::vector<BinaryRelation> native_relations() const { return select(RelationOrigin::Native); }

    std::vector<DerivedRelation> derived_relations() const {
        std::vector<DerivedRelation> out;
        for (const auto& r : graph_.relations()) {
            const auto& o = origin_.at(r.id);
            if (o.kind == RelationOrigin::Derived) out.push_back({element_id(r.domain), r.predicate, element_id(r.range), o.rule});
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    friend bool operator==(const RelationGraph& a, const RelationGraph& b) {
        return a.ns_ == b.ns_ && a.graph_ == b.graph_ && a.origin_ == b.origin_ && a.types_ == b.types_;
    }

private:
    struct Origin {
        RelationOrigin kind;
        std::string rule;
        friend bool operator==(const Origin&, const Origin&) = default;
    };

    std::vector<BinaryRelation> select(RelationOrigin kind) const {
        std::vector<BinaryRelation> out;
        for (const auto& r : graph_.relations())
            if (origin_.at(r.id).kind == kind) out.push_back(r);
        return out;
    }

    std::string ns_;
    Graph graph_;
    std::map<std::string, Origin> origin_;
    std::map<std::string, std::string> types_;
};

inline RelationGraph explicate_relations(const Model& m) {
    RelationGraph rg(m.ns());
    for (const auto& e : m.elements()) rg.add_element(e);
    for (const auto& l : m.links()) rg.add_native(l);
    return rg;
}

// mr_io: element id -> meta-model element it instantiates.
using TypeAssignment = std::map<std::string, std::string, NaturalLess>;

inline TypeAssignment type_elements(const Model& m, const MetaModelOntology& mmo) {
    TypeAssignment types;
    for (const auto& e : m.elements()) {
        if (!mmo.elements.count(e.metaType)) throw InvariantError("element metaType in MME", e.id + ": " + e.metaType);
        types.emplace(e.id, e.metaType);
    }
    return types;
}

}  // namespace annot
