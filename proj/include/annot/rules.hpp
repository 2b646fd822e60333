// SPDX-License-Identifier: Apache-2.0
//
// Substitution-block rules: a small Jena-style rule language and a
// forward-chaining engine that materializes derived relations over an
// explicated model.
//
//   @prefix MEGA: <http://...#>
//   [Operation_to_DataObject: (?OP rdf:type MEGA:Operation) (?DO MEGA:attachesTo ?SF) ...
//       -> (?OP SANS:SBR_Operation_to_DataObject ?DO)]
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "annot/blocks.hpp"
#include "annot/error.hpp"
#include "annot/kstore.hpp"
#include "annot/model.hpp"
#include "annot/names.hpp"

namespace annot {

struct Term {
    enum class Kind { Variable, Constant };

    Kind kind = Kind::Constant;
    std::string text;  // variable name without '?', or a resolved constant

    static Term var(std::string name) { return {Kind::Variable, std::move(name)}; }
    static Term constant(std::string value) { return {Kind::Constant, std::move(value)}; }

    bool is_var() const noexcept { return kind == Kind::Variable; }

    friend auto operator<=>(const Term&, const Term&) = default;
};

struct Pattern {
    Term subject;
    Term predicate;
    Term object;

    friend auto operator<=>(const Pattern&, const Pattern&) = default;
};

struct Rule {
    std::string name;
    std::vector<Pattern> antecedents;
    Pattern consequent;

    friend bool operator==(const Rule&, const Rule&) = default;
};

struct RuleSet {
    std::vector<Rule> rules;
    std::map<std::string, std::string> prefixes;  // NS -> uri

    const Rule* find(std::string_view name) const {
        for (const auto& r : rules)
            if (r.name == name) return &r;
        return nullptr;
    }

    // True when some rule's consequent produces `predicate`.
    bool declares(std::string_view predicate) const {
        for (const auto& r : rules)
            if (!r.consequent.predicate.is_var() && r.consequent.predicate.text == predicate) return true;
        return false;
    }

    std::set<std::string> derived_predicates() const {
        std::set<std::string> out;
        for (const auto& r : rules) out.insert(r.consequent.predicate.text);
        return out;
    }

    // Appends another rule set; rule names stay unique.
    void merge(const RuleSet& other) {
        for (const auto& [ns, uri] : other.prefixes) prefixes.emplace(ns, uri);
        for (const auto& r : other.rules) {
            if (find(r.name)) throw InvariantError("rule names unique", r.name);
            rules.push_back(r);
        }
    }
};

namespace detail {

class RuleParser {
public:
    explicit RuleParser(std::string_view text) : text_(text) {}

    RuleSet parse() {
        RuleSet set;
        skip();
        while (!eof()) {
            if (peek() == '@') {
                parse_prefix(set);
            } else if (peek() == '[') {
                auto [line, col] = std::pair{line_, col_};
                Rule r = parse_rule(set);
                if (set.find(r.name)) throw ParseError("duplicate rule name '" + r.name + "'", line, col);
                set.rules.push_back(std::move(r));
            } else {
                fail(std::string("expected '[' or '@prefix', found '") + peek() + "'");
            }
            skip();
        }
        return set;
    }

private:
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.';
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return eof() ? '\0' : text_[pos_]; }

    char get() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("rules: " + msg, line_, col_); }

    void skip() {
        while (!eof()) {
            if (std::isspace(static_cast<unsigned char>(peek()))) {
                get();
            } else if (peek() == '#') {
                while (!eof() && peek() != '\n') get();
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        skip();
        if (peek() != c) fail(std::string("expected '") + c + "'" + (eof() ? " before end of input" : ""));
        get();
    }

    std::string ident() {
        std::string out;
        while (!eof() && ident_char(peek())) out += get();
        if (out.empty()) fail("expected a name");
        return out;
    }

    // @prefix NS: <uri>   (the angle brackets and a trailing '.' are optional)
    void parse_prefix(RuleSet& set) {
        get();
        if (ident() != "prefix") fail("unknown directive");
        skip();
        auto ns = ident();
        if (peek() != ':') fail("expected ':' after prefix name");
        get();
        std::string uri;
        while (!eof() && peek() != '\n') uri += get();
        auto trim = [](std::string s) {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
            return s;
        };
        uri = trim(uri);
        if (!uri.empty() && uri.back() == '.') uri = trim(uri.substr(0, uri.size() - 1));
        if (uri.size() >= 2 && uri.front() == '<' && uri.back() == '>') uri = uri.substr(1, uri.size() - 2);
        if (uri.empty()) fail("prefix '" + ns + "' has no uri");
        set.prefixes[ns] = uri;
    }

    Term term(const RuleSet& set) {
        skip();
        if (peek() == '?') {
            get();
            return Term::var(ident());
        }
        if (peek() == '&') {
            get();
            auto ns = ident();
            if (peek() != ';') fail("expected ';' in qualified name");
            get();
            auto local = ident();
            if (peek() == ':') fail("qualified name '&" + ns + ";" + local + "' cannot carry a prefix");
            return Term::constant("&" + ns + ";" + local);
        }
        auto first = ident();
        if (peek() != ':') return Term::constant(first);
        get();
        auto local = ident();
        if (first == "rdf" || first == "rdfs") return Term::constant(first + ":" + local);
        if (!set.prefixes.count(first)) fail("undeclared prefix '" + first + "'");
        return Term::constant(make_prefix(first) + local);
    }

    Pattern pattern(const RuleSet& set) {
        expect('(');
        Pattern p{term(set), term(set), term(set)};
        expect(')');
        return p;
    }

    Rule parse_rule(const RuleSet& set) {
        const auto line = line_, col = col_;
        get();
        skip();
        Rule r;
        r.name = ident();
        expect(':');
        for (;;) {
            skip();
            if (peek() == '-') break;
            if (peek() != '(') fail("expected '(' or '->'");
            r.antecedents.push_back(pattern(set));
        }
        get();
        if (peek() != '>') fail("expected '->'");
        get();
        if (r.antecedents.empty()) fail("rule '" + r.name + "' has no antecedents");
        r.consequent = pattern(set);
        expect(']');

        std::set<std::string> bound;
        for (const auto& a : r.antecedents)
            for (const auto* t : {&a.subject, &a.predicate, &a.object})
                if (t->is_var()) bound.insert(t->text);
        for (const auto* t : {&r.consequent.subject, &r.consequent.predicate, &r.consequent.object})
            if (t->is_var() && !bound.count(t->text))
                throw ParseError("rules: consequent variable ?" + t->text + " of rule '" + r.name +
                                     "' is unbound in the antecedents", line, col);
        if (r.consequent.predicate.is_var() || prefix_of(r.consequent.predicate.text) != kDerivedNamespace)
            throw ParseError("rules: consequent predicate of rule '" + r.name + "' must be a " +
                                 std::string(kDerivedNamespace) + " name", line, col);
        if (r.consequent.subject == r.consequent.object)
            throw ParseError("rules: rule '" + r.name + "' relates an entity to itself", line, col);
        return r;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

}  // namespace detail

inline RuleSet parse_rules(std::string_view text) { return detail::RuleParser(text).parse(); }

struct MatchOptions {
    // rdf:type atoms also match superclasses of the declared metaType.
    bool subclass_types = false;
    const MetaModelOntology* metamodel = nullptr;  // needed when subclass_types is set
};

// The structure a rule matched when it produced a derived relation: the bound
// entities other than the endpoints, and the relations the antecedents hit.
struct RuleWitness {
    std::set<std::string> interior;  // entity ids
    std::vector<Triple> relations;   // entity-id triples, rdf:type facts excluded
};

struct RuleOutcome {
    std::vector<DerivedRelation> derived;  // full fixpoint, sorted
    std::map<DerivedRelation, RuleWitness> witnesses;
    std::size_t added = 0;  // relations not already present in the input graph
};

namespace detail {

struct FactBase {
    std::set<Triple> facts;
    std::map<std::string, std::vector<Triple>> by_predicate;

    bool insert(const Triple& t) {
        if (!facts.insert(t).second) return false;
        by_predicate[t.predicate].push_back(t);
        return true;
    }
};

using Binding = std::map<std::string, std::string>;

inline bool unify(const Term& t, const std::string& value, Binding& b, std::vector<std::string>& trail) {
    if (!t.is_var()) return t.text == value;
    auto it = b.find(t.text);
    if (it != b.end()) return it->second == value;
    b.emplace(t.text, value);
    trail.push_back(t.text);
    return true;
}

template <typename Visit>
void match(const std::vector<Pattern>& pats, std::size_t i, const FactBase& fb, Binding& b,
           std::vector<const Triple*>& used, Visit&& visit) {
    if (i == pats.size()) {
        visit(b, used);
        return;
    }
    const Pattern& p = pats[i];
    auto try_fact = [&](const Triple& f) {
        std::vector<std::string> trail;
        if (unify(p.subject, f.subject, b, trail) && unify(p.predicate, f.predicate, b, trail) &&
            unify(p.object, f.object, b, trail)) {
            used.push_back(&f);
            match(pats, i + 1, fb, b, used, visit);
            used.pop_back();
        }
        for (const auto& v : trail) b.erase(v);
    };
    std::optional<std::string> pred;
    if (!p.predicate.is_var()) pred = p.predicate.text;
    else if (auto it = b.find(p.predicate.text); it != b.end()) pred = it->second;
    if (pred) {
        auto it = fb.by_predicate.find(*pred);
        if (it == fb.by_predicate.end()) return;
        for (const auto& f : it->second) try_fact(f);
    } else {
        for (const auto& f : fb.facts) try_fact(f);
    }
}

inline std::string resolve(const Term& t, const Binding& b) { return t.is_var() ? b.at(t.text) : t.text; }

}  // namespace detail

// Forward-chains `rules` to fixpoint over the native and already-derived
// relations of `rg` plus the rdf:type facts of `types`. Set semantics: a
// (source, predicate, target) triple is derived once, by the first rule that
// reaches it.
inline RuleOutcome apply_rules(const RelationGraph& rg, const TypeAssignment& types, const RuleSet& rules,
                               const MatchOptions& opts = {}) {
    detail::FactBase fb;
    std::map<Triple, std::string> derived_by;  // entity-space triple -> rule
    for (const auto& r : rg.graph().relations()) {
        Triple t{r.domain, r.predicate, r.range};
        fb.insert(t);
    }
    for (const auto& d : rg.derived_relations())
        derived_by.emplace(Triple{rg.entity_id(d.source), d.predicate, rg.entity_id(d.target)}, d.rule);

    for (const auto& [element, type] : types) {
        const auto subject = rg.entity_id(element);
        fb.insert({subject, std::string(kRdfType), type});
        if (opts.subclass_types && opts.metamodel) {
            for (const auto& mme : opts.metamodel->elements)
                if (mme != type && opts.metamodel->is_subclass(type, mme)) fb.insert({subject, std::string(kRdfType), mme});
        }
    }

    RuleOutcome out;
    const auto& entities = rg.graph().entities();
    for (;;) {
        std::vector<std::pair<Triple, std::string>> fresh;
        std::map<Triple, RuleWitness> fresh_witness;
        for (const auto& rule : rules.rules) {
            detail::Binding b;
            std::vector<const Triple*> used;
            detail::match(rule.antecedents, 0, fb, b, used, [&](const detail::Binding& bind, const std::vector<const Triple*>& hit) {
                Triple t{detail::resolve(rule.consequent.subject, bind), detail::resolve(rule.consequent.predicate, bind),
                         detail::resolve(rule.consequent.object, bind)};
                if (!entities.count(t.subject) || !entities.count(t.object)) return;
                if (fb.facts.count(t) || fresh_witness.count(t)) return;
                RuleWitness w;
                for (const auto& [var, value] : bind)
                    if (value != t.subject && value != t.object && entities.count(value)) w.interior.insert(value);
                for (const auto* f : hit)
                    if (f->predicate != kRdfType) w.relations.push_back(*f);
                fresh.emplace_back(t, rule.name);
                fresh_witness.emplace(t, std::move(w));
            });
        }
        if (fresh.empty()) break;
        for (auto& [t, rule] : fresh) {
            fb.insert(t);
            derived_by.emplace(t, rule);
            DerivedRelation d{rg.element_id(t.subject), t.predicate, rg.element_id(t.object), rule};
            out.witnesses.emplace(d, std::move(fresh_witness.at(t)));
            ++out.added;
        }
    }
    for (const auto& [t, rule] : derived_by)
        out.derived.push_back({rg.element_id(t.subject), t.predicate, rg.element_id(t.object), rule});
    std::sort(out.derived.begin(), out.derived.end());
    return out;
}

// Copy of `rg` with every derived relation of `outcome` added.
inline RelationGraph materialize(RelationGraph rg, const RuleOutcome& outcome) {
    for (const auto& d : outcome.derived) rg.add_derived(d);
    return rg;
}

}  // namespace annot
