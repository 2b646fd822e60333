// SPDX-License-Identifier: Apache-2.0
//
// Reasoning over semantic annotations: block comparison, suggestion of
// inferred annotations, inconsistency detection between two annotations of
// the same element, and localization of the resulting conflicts.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "annot/annotation.hpp"
#include "annot/blocks.hpp"
#include "annot/kstore.hpp"
#include "annot/model.hpp"
#include "annot/rules.hpp"

namespace annot {

enum class Verdict { Consistent, PossiblyConsistent, Inconsistent };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Consistent: return "consistent";
        case Verdict::PossiblyConsistent: return "possiblyConsistent";
        case Verdict::Inconsistent: return "inconsistent";
    }
    return "?";
}

struct ComparatorOptions {
    bool subclass_closure = false;
};

// Set algebra over the blocks' entity sets.
inline PRKind compare_domain_semantics(const DomainSemantics& px, const DomainSemantics& py, const KnowledgeStore& ks,
                                       const ComparatorOptions& opts = {}) {
    for (const auto* d : {&px, &py})
        for (const auto& e : d->entities)
            if (!ks.plc_elements().count(e)) throw NotFoundError("ontology element", e);
    const auto sx = opts.subclass_closure ? ks.subclass_closure(px.entities) : px.entities;
    const auto sy = opts.subclass_closure ? ks.subclass_closure(py.entities) : py.entities;
    if (sx == sy) return PRKind::Equivalent;
    const bool x_has_y = std::includes(sx.begin(), sx.end(), sy.begin(), sy.end());
    if (x_has_y) return PRKind::MoreGeneral;
    const bool y_has_x = std::includes(sy.begin(), sy.end(), sx.begin(), sx.end());
    if (y_has_x) return PRKind::LessGeneral;
    for (const auto& e : sx)
        if (sy.count(e)) return PRKind::Overlapping;
    return PRKind::Disjoint;
}

using Comparator = std::function<PRKind(const DomainSemantics&, const DomainSemantics&)>;

namespace detail {

constexpr std::uint8_t bit(PRKind k) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k)); }

constexpr std::uint8_t kEq = bit(PRKind::Equivalent);
constexpr std::uint8_t kMg = bit(PRKind::MoreGeneral);
constexpr std::uint8_t kLg = bit(PRKind::LessGeneral);
constexpr std::uint8_t kOv = bit(PRKind::Overlapping);
constexpr std::uint8_t kDj = bit(PRKind::Disjoint);
constexpr std::uint8_t kAny = kEq | kMg | kLg | kOv | kDj;

struct Cell {
    std::uint8_t consistent;
    std::uint8_t possibly;
};

// kTable[sr_x][sr_y]; pr kinds in neither mask are inconsistent.
constexpr std::array<std::array<Cell, 5>, 5> kTable{{
    //            y: Equivalent   MoreGeneral          LessGeneral          Overlapping          Disjoint
    /* x=Eq */ {{{kEq, 0}, {kMg, 0}, {kLg, 0}, {kOv, 0}, {kDj, 0}}},
    /* x=Mg */ {{{kLg, 0}, {0, kAny}, {kLg, 0}, {0, kLg | kOv | kDj}, {kDj, 0}}},
    /* x=Lg */ {{{kMg, 0}, {kMg, 0}, {0, kEq | kMg | kLg | kOv}, {0, kMg | kOv}, {0, kMg | kOv | kDj}}},
    /* x=Ov */ {{{kOv, 0}, {0, kMg | kOv | kDj}, {0, kLg | kOv}, {0, kAny}, {0, kMg | kOv | kDj}}},
    /* x=Dj */ {{{kDj, 0}, {kDj, 0}, {0, kLg | kOv | kDj}, {0, kLg | kOv | kDj}, {0, kAny}}},
}};

}  // namespace detail

// Verdict for two annotations (sr_x on p_x, sr_y on p_y) of one element, where
// pr relates p_x to p_y.
constexpr Verdict detect_inconsistency(SRKind sr_x, SRKind sr_y, PRKind pr) {
    const auto& cell = detail::kTable[static_cast<std::size_t>(sr_x)][static_cast<std::size_t>(sr_y)];
    if (cell.consistent & detail::bit(pr)) return Verdict::Consistent;
    if (cell.possibly & detail::bit(pr)) return Verdict::PossiblyConsistent;
    return Verdict::Inconsistent;
}

struct InconsistencyFinding {
    std::string element;
    std::string sa_x;
    std::string sa_y;
    PRKind pr = PRKind::Equivalent;
    Verdict verdict = Verdict::Consistent;

    friend bool operator==(const InconsistencyFinding&, const InconsistencyFinding&) = default;
};

enum class ConflictReason { InitialXInitial, InitialXInferred, InferredXInferred };

inline const char* to_string(ConflictReason r) {
    switch (r) {
        case ConflictReason::InitialXInitial: return "initialXinitial";
        case ConflictReason::InitialXInferred: return "initialXinferred";
        case ConflictReason::InferredXInferred: return "inferredXinferred";
    }
    return "?";
}

struct ConflictFinding {
    std::vector<std::string> suspects;  // natural order, unique
    ConflictReason reason = ConflictReason::InitialXInitial;
    std::size_t finding = 0;  // index into Report::inconsistencies

    friend bool operator==(const ConflictFinding&, const ConflictFinding&) = default;
};

// Which elements may hold the mistake behind an inconsistent pair.
inline ConflictFinding identify_conflicts(const InconsistencyFinding& f, const AnnotationStore& store) {
    if (f.verdict != Verdict::Inconsistent)
        throw InvariantError("conflicts are identified for inconsistent findings", f.sa_x + " / " + f.sa_y);
    const auto& x = store.at(f.sa_x);
    const auto& y = store.at(f.sa_y);
    ConflictFinding c;
    const bool xi = x.provenance.is_inferred(), yi = y.provenance.is_inferred();
    if (!xi && !yi) {
        c.reason = ConflictReason::InitialXInitial;
        c.suspects = {f.element};
    } else if (xi != yi) {
        c.reason = ConflictReason::InitialXInferred;
        c.suspects = {f.element, xi ? x.provenance.source : y.provenance.source};
    } else {
        c.reason = ConflictReason::InferredXInferred;
        c.suspects = {x.provenance.source, y.provenance.source};
    }
    std::sort(c.suspects.begin(), c.suspects.end(), NaturalLess{});
    c.suspects.erase(std::unique(c.suspects.begin(), c.suspects.end()), c.suspects.end());
    return c;
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return out;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline bool nested(const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::includes(a.begin(), a.end(), b.begin(), b.end()) || std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace detail

// Content-derived id, stable across runs: "sg" + 12 hex digits.
inline std::string suggestion_id(const SemanticAnnotation& a) {
    const std::string key = a.element + "|" + a.domain.main + "|" + to_string(a.sr) + "|" + a.provenance.source + "|" +
                            a.provenance.via;
    return "sg" + detail::hex64(detail::fnv1a(key)).substr(4);
}

// Proposes inferred annotations. For a seed annotation (e, p, sr) with sr
// more/less general, a derived relation D linking e to e' (or e' to e for an
// inverse association), and an association D -> rho, every relation
// (main(p), rho, c) of p yields the proposal (e', SB(c), sr). Proposals nested
// with a block already on e' are dropped. `seeds` restricts which annotations
// may seed; null means all.
inline std::vector<SemanticAnnotation> suggest(const AnnotationStore& store, const RelationGraph& rg,
                                               const KnowledgeStore& ks, const std::set<std::string>* seeds = nullptr) {
    std::vector<SemanticAnnotation> raw;
    const auto derived = rg.derived_relations();
    for (const auto& [id, seed] : store.annotations()) {
        if (seeds && !seeds->count(id)) continue;
        if (seed.sr != SRKind::LessGeneral && seed.sr != SRKind::MoreGeneral) continue;
        for (const auto& assoc : store.associations()) {
            for (const auto& d : derived) {
                if (d.predicate != assoc.derived) continue;
                std::string target;
                if (assoc.direction == AssociationDirection::Forward && d.source == seed.element) target = d.target;
                else if (assoc.direction == AssociationDirection::Inverse && d.target == seed.element) target = d.source;
                if (target.empty() || target == seed.element || !rg.has_element(target)) continue;
                for (const auto& r : seed.domain.relations) {
                    if (r.predicate != assoc.property || r.domain != seed.domain.main) continue;
                    SemanticAnnotation p;
                    p.element = target;
                    p.domain = delimit_sb(ks.plc_graph(), r.range);
                    p.sr = seed.sr;
                    p.mme = rg.meta_type(target);
                    p.provenance = Provenance::inferred(seed.element, assoc.derived);
                    p.id = suggestion_id(p);
                    raw.push_back(std::move(p));
                }
            }
        }
    }
    std::sort(raw.begin(), raw.end(), [](const SemanticAnnotation& a, const SemanticAnnotation& b) {
        if (a.element != b.element) return natural_less(a.element, b.element);
        return a.id < b.id;
    });

    std::vector<SemanticAnnotation> out;
    for (auto& p : raw) {
        bool drop = false;
        for (const auto* existing : store.for_element(p.element))
            if (detail::nested(existing->domain.entities, p.domain.entities)) drop = true;
        for (const auto& kept : out)
            if (kept.element == p.element && detail::nested(kept.domain.entities, p.domain.entities)) drop = true;
        if (!drop) out.push_back(std::move(p));
    }
    return out;
}

struct PipelineOptions {
    bool subclass_closure = false;
    SbrMode sbr_mode = SbrMode::Symmetric;
    unsigned max_inference_depth = 4;
    bool auto_accept = false;
    Comparator comparator;  // empty: set-algebra comparator
};

struct ReportStats {
    std::size_t pairs_checked = 0;
    std::size_t rules_fired = 0;
    std::size_t accepted = 0;
    std::size_t inference_rounds = 0;
    std::size_t sbr_checked = 0;
    std::size_t sbr_violations = 0;

    friend bool operator==(const ReportStats&, const ReportStats&) = default;
};

struct Report {
    std::vector<SemanticAnnotation> suggestions;
    std::vector<InconsistencyFinding> inconsistencies;
    std::vector<ConflictFinding> conflicts;
    ReportStats stats;

    bool has_inconsistency() const {
        return std::any_of(inconsistencies.begin(), inconsistencies.end(),
                           [](const auto& f) { return f.verdict == Verdict::Inconsistent; });
    }

    friend bool operator==(const Report&, const Report&) = default;
};

inline nlohmann::ordered_json report_to_json(const Report& r) {
    nlohmann::ordered_json j;
    auto sug = nlohmann::ordered_json::array();
    for (const auto& s : r.suggestions) sug.push_back(annotation_to_json(s));
    j["suggestions"] = std::move(sug);
    auto inc = nlohmann::ordered_json::array();
    for (const auto& f : r.inconsistencies)
        inc.push_back({{"element", f.element}, {"saX", f.sa_x}, {"saY", f.sa_y}, {"pr", to_string(f.pr)}, {"verdict", to_string(f.verdict)}});
    j["inconsistencies"] = std::move(inc);
    auto con = nlohmann::ordered_json::array();
    for (const auto& c : r.conflicts) con.push_back({{"suspects", c.suspects}, {"reason", to_string(c.reason)}, {"finding", c.finding}});
    j["conflicts"] = std::move(con);
    j["stats"] = {{"pairsChecked", r.stats.pairs_checked},
                  {"rulesFired", r.stats.rules_fired},
                  {"accepted", r.stats.accepted},
                  {"inferenceRounds", r.stats.inference_rounds},
                  {"sbrChecked", r.stats.sbr_checked},
                  {"sbrViolations", r.stats.sbr_violations}};
    return j;
}

inline std::string serialize_report(const Report& r) { return report_to_json(r).dump(2) + "\n"; }

struct PipelineResult {
    Report report;
    RelationGraph graph;     // explicated, with derived relations
    AnnotationStore store;   // input store plus auto-accepted inferences
};

// Compares every unordered pair of annotations per element.
inline void detect_all(const AnnotationStore& store, const Comparator& compare, Report& report) {
    std::map<std::string, std::vector<const SemanticAnnotation*>, NaturalLess> by_element;
    for (const auto& [id, a] : store.annotations()) by_element[a.element].push_back(&a);
    for (const auto& [element, anns] : by_element) {
        for (std::size_t i = 0; i < anns.size(); ++i) {
            for (std::size_t k = i + 1; k < anns.size(); ++k) {
                const auto& x = *anns[i];
                const auto& y = *anns[k];
                ++report.stats.pairs_checked;
                const PRKind pr = compare(x.domain, y.domain);
                const Verdict v = detect_inconsistency(x.sr, y.sr, pr);
                if (v == Verdict::Consistent) continue;
                report.inconsistencies.push_back({element, x.id, y.id, pr, v});
                if (v == Verdict::Inconsistent) {
                    auto c = identify_conflicts(report.inconsistencies.back(), store);
                    c.finding = report.inconsistencies.size() - 1;
                    report.conflicts.push_back(std::move(c));
                }
            }
        }
    }
}

// explicate -> apply rules -> suggest (accepting to fixpoint when enabled)
// -> pairwise detection -> conflicts.
inline PipelineResult run_pipeline(const Model& model, const KnowledgeStore& ks, const MetaModelOntology& mmo,
                                   const RuleSet& rules, const AnnotationStore& store, const PipelineOptions& opts = {}) {
    PipelineResult out{{}, explicate_relations(model), store};
    Report& report = out.report;

    const auto types = type_elements(model, mmo);
    MatchOptions match;
    match.subclass_types = opts.subclass_closure;
    match.metamodel = &mmo;
    const auto outcome = apply_rules(out.graph, types, rules, match);
    out.graph = materialize(std::move(out.graph), outcome);
    report.stats.rules_fired = outcome.derived.size();

    const Graph& g = out.graph.graph();
    for (const auto& [d, w] : outcome.witnesses) {
        std::vector<BinaryRelation> rels;
        for (const auto& t : w.relations)
            if (const auto* r = g.find(t.subject, t.predicate, t.object)) rels.push_back(*r);
        ++report.stats.sbr_checked;
        if (!validate_sbr(g, out.graph.entity_id(d.source), out.graph.entity_id(d.target), w.interior, rels, opts.sbr_mode))
            ++report.stats.sbr_violations;
    }

    std::set<std::string> seeds;
    bool all_seeds = true;
    for (unsigned round = 0; round < opts.max_inference_depth; ++round) {
        auto proposals = suggest(out.store, out.graph, ks, all_seeds ? nullptr : &seeds);
        if (proposals.empty()) break;
        ++report.stats.inference_rounds;
        seeds.clear();
        all_seeds = false;
        for (const auto& p : proposals) {
            report.suggestions.push_back(p);
            if (opts.auto_accept) {
                out.store.insert(p);
                seeds.insert(p.id);
                ++report.stats.accepted;
            }
        }
        if (!opts.auto_accept) break;
    }

    Comparator compare = opts.comparator;
    if (!compare) {
        ComparatorOptions copts{opts.subclass_closure};
        compare = [&ks, copts](const DomainSemantics& a, const DomainSemantics& b) {
            return compare_domain_semantics(a, b, ks, copts);
        };
    }
    detect_all(out.store, compare, report);
    return out;
}

}  // namespace annot
