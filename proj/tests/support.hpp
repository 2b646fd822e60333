// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and reference oracles for the unit and acceptance suites.
// The oracles are written against the definitions, not against the library
// code they check.
#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "annot/annot.hpp"

namespace annot::testing {

inline fs::path fixture_dir() { return ANNOT_FIXTURE_DIR; }
inline fs::path test_data_dir() { return ANNOT_TEST_DATA_DIR; }

inline Project load_fixture(const std::string& config = "project.json") {
    return load_project(load_project_config(fixture_dir() / config));
}

// Runs a shell command, returning (exit status, captured stdout).
inline std::pair<int, std::string> run_command(const std::string& cmd) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, out};
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// ----------------------------------------------------------- verdict grid --

using TableKey = std::tuple<SRKind, SRKind, PRKind>;  // (sr_x, sr_y, pr)

// Reads tests/data/verdict_grid.txt: rows are sr_y, columns sr_x.
inline std::map<TableKey, Verdict> load_verdict_grid(const fs::path& file = test_data_dir() / "verdict_grid.txt") {
    static const std::map<std::string, int> sym{{"sim", 0}, {"sup", 1}, {"sub", 2}, {"cap", 3}, {"perp", 4}};
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::map<TableKey, Verdict> table;
    std::ifstream in(file);
    if (!in) throw Error("cannot read " + file.string());
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, '|');) cells.push_back(trim(c));
        if (cells.size() != 6) throw Error("verdict grid: bad row: " + line);
        const auto sr_y = static_cast<SRKind>(sym.at(cells[0]));
        for (int x = 0; x < 5; ++x) {
            const auto& cell = cells[static_cast<std::size_t>(x) + 1];
            const Verdict listed = cell.rfind("a:", 0) == 0 ? Verdict::Consistent : Verdict::PossiblyConsistent;
            std::set<int> kinds;
            std::stringstream ks(cell.substr(2));
            for (std::string k; std::getline(ks, k, ',');) kinds.insert(sym.at(trim(k)));
            for (int pr = 0; pr < 5; ++pr)
                table[{static_cast<SRKind>(x), sr_y, static_cast<PRKind>(pr)}] =
                    kinds.count(pr) ? listed : Verdict::Inconsistent;
        }
    }
    if (table.size() != 125) throw Error("verdict grid: expected 125 cells");
    return table;
}

// ----------------------------------------------------------- random graphs --

struct Edge {
    std::string from, pred, to;
};

struct RandomGraph {
    std::vector<std::string> nodes;
    std::vector<Edge> edges;

    Graph build() const {
        Graph g;
        for (const auto& n : nodes) g.add_entity(make_entity(n));
        for (const auto& e : edges) g.add_relation({"", e.pred, e.from, e.to});
        return g;
    }
};

// Up to `max_nodes` nodes and `max_edges` edges (parallel edges and
// self-loops allowed) over predicates p0..p{preds-1}.
inline RandomGraph random_graph(std::mt19937& rng, int max_nodes, int max_edges, int preds = 3) {
    RandomGraph g;
    const int n = std::uniform_int_distribution<int>(1, max_nodes)(rng);
    const int m = std::uniform_int_distribution<int>(0, max_edges)(rng);
    for (int i = 0; i < n; ++i) g.nodes.push_back("&G;n" + std::to_string(i));
    std::uniform_int_distribution<int> node(0, n - 1), pred(0, preds - 1);
    for (int i = 0; i < m; ++i)
        g.edges.push_back({g.nodes[static_cast<std::size_t>(node(rng))], "&G;p" + std::to_string(pred(rng)),
                           g.nodes[static_cast<std::size_t>(node(rng))]});
    return g;
}

// --------------------------------------------------------- reachability --

// Shortest admitted-path lengths by repeated relaxation over the edge list;
// members are the nodes within `depth` of main.
inline std::set<std::string> reach_oracle(const std::vector<Edge>& edges, const std::string& main,
                                          const std::optional<std::set<std::string>>& preds,
                                          const std::optional<std::size_t>& depth) {
    std::map<std::string, std::size_t> dist{{main, 0}};
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& e : edges) {
            if (preds && !preds->count(e.pred)) continue;
            auto it = dist.find(e.from);
            if (it == dist.end()) continue;
            const auto d = it->second + 1;
            auto [jt, fresh] = dist.emplace(e.to, d);
            if (fresh || d < jt->second) {
                jt->second = d;
                changed = true;
            }
        }
    }
    std::set<std::string> out;
    for (const auto& [node, d] : dist)
        if (!depth || d <= *depth) out.insert(node);
    return out;
}

// ------------------------------------------------------ substitution blocks --

// Direct truth value of C1 and C2 and C3.
inline bool sbr_oracle(const std::string& left, const std::string& right, const std::set<std::string>& interior,
                       const std::vector<BinaryRelation>& rels, bool strict) {
    const bool c1 = !interior.count(left) && !interior.count(right);
    bool c2 = true;
    for (const auto& k : interior) {
        bool found = false;
        for (const auto& r : rels) {
            const bool out_edge = r.domain == k && interior.count(r.range);
            const bool in_edge = r.range == k && interior.count(r.domain);
            if (out_edge || (!strict && in_edge)) found = true;
        }
        c2 = c2 && found;
    }
    bool c3 = true;
    for (const auto& r : rels) {
        for (const auto& end : {r.domain, r.range})
            if (end != left && end != right && !interior.count(end)) c3 = false;
    }
    return c1 && c2 && c3;
}

// ----------------------------------------------------------------- rules --

// Fixpoint of the rules by trying every assignment of every term in the fact
// base to the rule variables and checking each antecedent for membership.
inline std::set<Triple> rule_oracle(const std::set<std::string>& entities, std::set<Triple> facts,
                                    const RuleSet& rules) {
    std::set<Triple> derived;
    for (bool changed = true; changed;) {
        changed = false;
        std::set<std::string> universe;
        for (const auto& f : facts) universe.insert({f.subject, f.predicate, f.object});
        const std::vector<std::string> terms(universe.begin(), universe.end());
        for (const auto& rule : rules.rules) {
            std::vector<std::string> vars;
            auto note = [&](const Term& t) {
                if (t.is_var() && std::find(vars.begin(), vars.end(), t.text) == vars.end()) vars.push_back(t.text);
            };
            for (const auto& a : rule.antecedents) {
                note(a.subject);
                note(a.predicate);
                note(a.object);
            }
            std::vector<std::size_t> idx(vars.size(), 0);
            auto value = [&](const Term& t) {
                if (!t.is_var()) return t.text;
                auto pos = static_cast<std::size_t>(std::find(vars.begin(), vars.end(), t.text) - vars.begin());
                return terms[idx[pos]];
            };
            std::vector<Triple> fresh;
            for (;;) {
                bool ok = !terms.empty() || vars.empty();
                for (const auto& a : rule.antecedents) {
                    if (!ok) break;
                    ok = facts.count({value(a.subject), value(a.predicate), value(a.object)}) != 0;
                }
                if (ok) {
                    Triple t{value(rule.consequent.subject), value(rule.consequent.predicate), value(rule.consequent.object)};
                    if (entities.count(t.subject) && entities.count(t.object)) fresh.push_back(t);
                }
                std::size_t i = 0;
                while (i < idx.size() && ++idx[i] == terms.size()) idx[i++] = 0;
                if (i == idx.size()) break;
            }
            for (const auto& t : fresh) {
                if (facts.insert(t).second) changed = true;
                derived.insert(t);
            }
        }
    }
    return derived;
}

// Facts the rule engine sees for a relation graph: every relation plus the
// rdf:type assignments.
inline std::set<Triple> base_facts(const RelationGraph& rg, const TypeAssignment& types) {
    std::set<Triple> facts;
    for (const auto& r : rg.graph().relations()) facts.insert({r.domain, r.predicate, r.range});
    for (const auto& [e, t] : types) facts.insert({rg.entity_id(e), std::string(kRdfType), t});
    return facts;
}

inline std::set<Triple> to_entity_triples(const RelationGraph& rg, const std::vector<DerivedRelation>& ds) {
    std::set<Triple> out;
    for (const auto& d : ds) out.insert({rg.entity_id(d.source), d.predicate, rg.entity_id(d.target)});
    return out;
}

}  // namespace annot::testing
