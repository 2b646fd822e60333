// SPDX-License-Identifier: Apache-2.0
//
// Semantic annotations: the (element, domain semantics, semantic relation,
// meta-model element, io) tuple with provenance, property associations used
// for suggestion, and the JSON annotation store.
#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "annot/blocks.hpp"
#include "annot/error.hpp"
#include "annot/kstore.hpp"
#include "annot/model.hpp"
#include "annot/names.hpp"
#include "annot/rules.hpp"

namespace annot {

// Relation between an element's semantics and the semantics of a block.
enum class SRKind { Equivalent, MoreGeneral, LessGeneral, Overlapping, Disjoint };

// Relation between the semantics of two blocks.
enum class PRKind { Equivalent, MoreGeneral, LessGeneral, Overlapping, Disjoint };

inline constexpr std::array<SRKind, 5> kAllSRKinds{SRKind::Equivalent, SRKind::MoreGeneral, SRKind::LessGeneral,
                                                   SRKind::Overlapping, SRKind::Disjoint};
inline constexpr std::array<PRKind, 5> kAllPRKinds{PRKind::Equivalent, PRKind::MoreGeneral, PRKind::LessGeneral,
                                                   PRKind::Overlapping, PRKind::Disjoint};

namespace detail {
inline constexpr std::array<const char*, 5> kKindNames{"equivalent", "moreGeneral", "lessGeneral", "overlapping",
                                                       "disjoint"};

inline std::size_t kind_index(std::string_view s, const char* what) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (s == kKindNames[i]) return i;
    throw InvariantError(std::string(what) + " is one of equivalent|moreGeneral|lessGeneral|overlapping|disjoint",
                         std::string(s));
}
}  // namespace detail

inline const char* to_string(SRKind k) { return detail::kKindNames[static_cast<std::size_t>(k)]; }
inline const char* to_string(PRKind k) { return detail::kKindNames[static_cast<std::size_t>(k)]; }
inline SRKind parse_sr_kind(std::string_view s) { return static_cast<SRKind>(detail::kind_index(s, "sr")); }
inline PRKind parse_pr_kind(std::string_view s) { return static_cast<PRKind>(detail::kind_index(s, "pr")); }

// pr(y, x) given pr(x, y).
constexpr PRKind inverse(PRKind k) {
    switch (k) {
        case PRKind::MoreGeneral: return PRKind::LessGeneral;
        case PRKind::LessGeneral: return PRKind::MoreGeneral;
        default: return k;
    }
}

// Domain semantics: a semantic block drawn from the PLC-related ontologies.
using DomainSemantics = SemanticBlock;

// Checks a domain block against the loaded ontologies and returns it with its
// relations replaced by the stored ontology relations.
inline DomainSemantics resolve_domain(const DomainSemantics& d, const KnowledgeStore& ks) {
    if (d.main.empty() || d.entities.empty()) throw InvariantError("domain semantics non-empty", "empty block");
    for (const auto& e : d.entities)
        if (!ks.plc_elements().count(e)) throw NotFoundError("ontology element", e);
    DomainSemantics out{d.main, d.entities, {}};
    for (const auto& r : d.relations) {
        const auto* stored = ks.plc_graph().find(r.domain, r.predicate, r.range);
        if (!stored) throw NotFoundError("ontology relation", r.domain + " " + r.predicate + " " + r.range);
        out.relations.insert(*stored);
    }
    if (auto v = block_violation(out)) throw InvariantError("domain semantics is a semantic block", *v);
    return out;
}

inline nlohmann::ordered_json domain_to_json(const DomainSemantics& d) {
    nlohmann::ordered_json j;
    j["main"] = d.main;
    j["entities"] = std::vector<std::string>(d.entities.begin(), d.entities.end());
    std::set<Triple> triples;
    for (const auto& r : d.relations) triples.insert({r.domain, r.predicate, r.range});
    auto arr = nlohmann::ordered_json::array();
    for (const auto& t : triples) arr.push_back({t.subject, t.predicate, t.object});
    j["triples"] = std::move(arr);
    return j;
}

// Entities default to main plus every triple endpoint when omitted.
template <typename Json>
DomainSemantics domain_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("domain: must be an object");
    DomainSemantics d;
    d.main = detail::require_string(j, "main", "domain");
    if (auto t = j.find("triples"); t != j.end()) {
        for (const auto& tr : *t) {
            if (!tr.is_array() || tr.size() != 3) throw ParseError("domain: triples must be [s, p, o]");
            d.relations.insert({"", tr[1].template get<std::string>(), tr[0].template get<std::string>(),
                                tr[2].template get<std::string>()});
        }
    }
    if (auto e = j.find("entities"); e != j.end()) {
        for (const auto& id : *e) d.entities.insert(id.template get<std::string>());
    } else if (!d.main.empty()) {
        d.entities.insert(d.main);
        for (const auto& r : d.relations) {
            d.entities.insert(r.domain);
            d.entities.insert(r.range);
        }
    }
    return d;
}

struct Provenance {
    enum class Kind { Initial, Inferred };

    Kind kind = Kind::Initial;
    std::string source;  // element the suggestion came from (Inferred only)
    std::string via;     // derived predicate that carried it (Inferred only)

    static Provenance initial() { return {}; }
    static Provenance inferred(std::string source, std::string via) {
        return {Kind::Inferred, std::move(source), std::move(via)};
    }

    bool is_inferred() const noexcept { return kind == Kind::Inferred; }

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SemanticAnnotation {
    std::string id;
    std::string element;
    DomainSemantics domain;
    SRKind sr = SRKind::Equivalent;
    std::string mme;
    Provenance provenance;

    // mr_io is the only meta relation kind.
    static constexpr std::string_view mr = "io";

    friend bool operator==(const SemanticAnnotation&, const SemanticAnnotation&) = default;
};

enum class AssociationDirection { Forward, Inverse };

struct PropertyAssociation {
    std::string derived;   // &SANS; predicate produced by a rule
    std::string property;  // PLC-ontology property
    AssociationDirection direction = AssociationDirection::Forward;

    friend auto operator<=>(const PropertyAssociation&, const PropertyAssociation&) = default;
};

class AnnotationStore {
public:
    static constexpr int kSchemaVersion = 1;

    AnnotationStore() = default;
    explicit AnnotationStore(std::string model) : model_(std::move(model)) {}

    const std::string& model() const noexcept { return model_; }

    // Ordered by id (natural order).
    const std::map<std::string, SemanticAnnotation, NaturalLess>& annotations() const noexcept { return annotations_; }
    const std::vector<PropertyAssociation>& associations() const noexcept { return associations_; }

    std::size_t size() const noexcept { return annotations_.size(); }

    const SemanticAnnotation* find(std::string_view id) const {
        auto it = annotations_.find(id);
        return it == annotations_.end() ? nullptr : &it->second;
    }

    const SemanticAnnotation& at(const std::string& id) const {
        if (const auto* a = find(id)) return *a;
        throw NotFoundError("annotation", id);
    }

    std::vector<const SemanticAnnotation*> for_element(std::string_view element) const {
        std::vector<const SemanticAnnotation*> out;
        for (const auto& [id, a] : annotations_)
            if (a.element == element) out.push_back(&a);
        return out;
    }

    // Next free "saN" id.
    std::string next_id() const {
        std::size_t n = 0;
        for (const auto& [id, a] : annotations_) {
            if (id.size() > 2 && id.compare(0, 2, "sa") == 0 &&
                std::all_of(id.begin() + 2, id.end(), [](char c) { return c >= '0' && c <= '9'; }))
                n = std::max<std::size_t>(n, std::stoul(id.substr(2)));
        }
        return "sa" + std::to_string(n + 1);
    }

    // Inserts an already validated annotation.
    void insert(SemanticAnnotation a) {
        if (a.id.empty()) throw InvariantError("annotation id non-empty", a.element);
        auto id = a.id;
        if (!annotations_.emplace(id, std::move(a)).second) throw InvariantError("annotation ids unique", id);
    }

    void erase(const std::string& id) {
        if (!annotations_.erase(id)) throw NotFoundError("annotation", id);
    }

    void add_association(PropertyAssociation p) {
        if (std::find(associations_.begin(), associations_.end(), p) == associations_.end())
            associations_.push_back(std::move(p));
    }

    friend bool operator==(const AnnotationStore&, const AnnotationStore&) = default;

private:
    std::string model_;
    std::map<std::string, SemanticAnnotation, NaturalLess> annotations_;
    std::vector<PropertyAssociation> associations_;
};

// Validates and records one annotation; returns its id. The meta-model element
// is taken from the element's own typing.
inline std::string annotate(AnnotationStore& store, const Model& model, const KnowledgeStore& ks,
                            const std::string& element, const DomainSemantics& domain, SRKind sr,
                            const Provenance& provenance = Provenance::initial(), std::string id = {}) {
    const auto& el = model.element(element);
    if (!store.model().empty() && store.model() != model.id())
        throw InvariantError("annotation store bound to the model", store.model() + " vs " + model.id());
    if (provenance.is_inferred()) {
        if (provenance.source.empty() || provenance.via.empty())
            throw InvariantError("inferred provenance names source and rule", element);
        if (!model.has_element(provenance.source)) throw NotFoundError("element", provenance.source);
        if (provenance.source == element)
            throw InvariantError("inferred annotation comes from another element", element);
    }
    SemanticAnnotation a{id.empty() ? store.next_id() : std::move(id), element, resolve_domain(domain, ks), sr,
                         el.metaType, provenance};
    auto out = a.id;
    store.insert(std::move(a));
    return out;
}

inline void associate_property(AnnotationStore& store, const RuleSet& rules, const KnowledgeStore& ks,
                               const std::string& derived, const std::string& property,
                               AssociationDirection direction = AssociationDirection::Forward) {
    if (!rules.declares(derived)) throw NotFoundError("derived predicate", derived);
    if (!ks.is_plc_property(property)) throw NotFoundError("ontology property", property);
    store.add_association({derived, property, direction});
}

inline nlohmann::ordered_json annotation_to_json(const SemanticAnnotation& a) {
    nlohmann::ordered_json j;
    j["id"] = a.id;
    j["element"] = a.element;
    j["sr"] = to_string(a.sr);
    j["mme"] = a.mme;
    j["mr"] = SemanticAnnotation::mr;
    nlohmann::ordered_json prov;
    prov["kind"] = a.provenance.is_inferred() ? "inferred" : "initial";
    if (a.provenance.is_inferred()) {
        prov["source"] = a.provenance.source;
        prov["via"] = a.provenance.via;
    }
    j["provenance"] = std::move(prov);
    j["domain"] = domain_to_json(a.domain);
    return j;
}

inline nlohmann::ordered_json store_to_json(const AnnotationStore& store) {
    nlohmann::ordered_json j;
    j["model"] = store.model();
    j["schemaVersion"] = AnnotationStore::kSchemaVersion;
    auto anns = nlohmann::ordered_json::array();
    for (const auto& [id, a] : store.annotations()) anns.push_back(annotation_to_json(a));
    j["annotations"] = std::move(anns);
    auto assocs = nlohmann::ordered_json::array();
    for (const auto& p : store.associations())
        assocs.push_back({{"derived", p.derived},
                          {"property", p.property},
                          {"direction", p.direction == AssociationDirection::Forward ? "forward" : "inverse"}});
    j["associations"] = std::move(assocs);
    return j;
}

inline std::string save_store(const AnnotationStore& store) { return store_to_json(store).dump(2) + "\n"; }

// Parses one annotation object (as found in the store file or an API body).
// The id may be absent; "mr" must be "io" when present.
template <typename Json>
SemanticAnnotation annotation_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("annotation: must be an object");
    SemanticAnnotation a;
    if (auto it = j.find("id"); it != j.end()) a.id = it->template get<std::string>();
    a.element = detail::require_string(j, "element", "annotation");
    a.sr = parse_sr_kind(detail::require_string(j, "sr", "annotation"));
    if (auto it = j.find("mme"); it != j.end()) a.mme = it->template get<std::string>();
    if (auto it = j.find("mr"); it != j.end() && it->template get<std::string>() != SemanticAnnotation::mr)
        throw InvariantError("mr is io", it->template get<std::string>());
    if (auto it = j.find("provenance"); it != j.end()) {
        const auto kind = detail::require_string(*it, "kind", "provenance");
        if (kind == "inferred") {
            a.provenance = Provenance::inferred(detail::require_string(*it, "source", "provenance"),
                                                detail::require_string(*it, "via", "provenance"));
        } else if (kind != "initial") {
            throw InvariantError("provenance kind is initial or inferred", kind);
        }
    }
    a.domain = domain_from_json(detail::require(j, "domain", "annotation"));
    return a;
}

// Loads a store and re-validates it against the current model and ontologies.
// A reference to an element that no longer exists is reported by id.
inline AnnotationStore load_store(std::string_view text, const Model& model, const KnowledgeStore& ks) {
    const auto j = detail::parse_json(text, "annotation store");
    if (!j.is_object()) throw ParseError("annotation store: top level must be an object", 1);
    const auto& version = detail::require(j, "schemaVersion", "annotation store");
    if (!version.is_number_integer() || version.get<int>() != AnnotationStore::kSchemaVersion)
        throw InvariantError("schema version " + std::to_string(AnnotationStore::kSchemaVersion), version.dump());
    const auto model_ref = detail::require_string(j, "model", "annotation store");
    if (model_ref != model.id()) throw InvariantError("annotation store bound to the model", model_ref + " vs " + model.id());

    AnnotationStore store(model_ref);
    if (auto it = j.find("annotations"); it != j.end()) {
        for (const auto& aj : *it) {
            auto a = annotation_from_json(aj);
            if (a.id.empty()) throw ParseError("annotation store: annotation without id");
            if (!model.has_element(a.element)) throw NotFoundError("element", a.element);
            const auto& typed = model.element(a.element).metaType;
            if (!a.mme.empty() && a.mme != typed)
                throw InvariantError("annotation mme matches element typing", a.id + ": " + a.mme + " vs " + typed);
            annotate(store, model, ks, a.element, a.domain, a.sr, a.provenance, a.id);
        }
    }
    if (auto it = j.find("associations"); it != j.end()) {
        for (const auto& pj : *it) {
            PropertyAssociation p;
            p.derived = detail::require_string(pj, "derived", "association");
            p.property = detail::require_string(pj, "property", "association");
            const auto dir = pj.contains("direction") ? pj["direction"].template get<std::string>() : "forward";
            if (dir == "inverse") p.direction = AssociationDirection::Inverse;
            else if (dir != "forward") throw InvariantError("association direction is forward or inverse", dir);
            if (prefix_of(p.derived) != kDerivedNamespace) throw NotFoundError("derived predicate", p.derived);
            if (!ks.is_plc_property(p.property)) throw NotFoundError("ontology property", p.property);
            store.add_association(std::move(p));
        }
    }
    return store;
}

}  // namespace annot
