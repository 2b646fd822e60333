// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace annot;
using namespace annot::testing;

namespace {

std::set<std::pair<std::string, std::string>> as_pairs(const std::vector<std::pair<BinaryRelation, Entity>>& ns) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& [r, e] : ns) out.insert({r.id, e.id});
    return out;
}

}  // namespace

TEST(Ontology, ParsesConceptAndSubclassTriple) {
    const auto o = parse_ontology(R"({"namespace":"AIPL","prefix":"&AIPL;","concepts":["3mBar"],
                                      "triples":[["3mBar","rdfs:subClassOf","Bars"]]})");
    EXPECT_EQ(o.concepts.size(), 2u);
    ASSERT_EQ(o.axioms.size(), 1u);
    EXPECT_EQ(*o.axioms.begin(), (Triple{"&AIPL;3mBar", "rdfs:subClassOf", "&AIPL;Bars"}));
}

TEST(Ontology, EmptyListsGiveEmptyOall) {
    const auto o = parse_ontology(R"({"namespace":"E","concepts":[],"triples":[]})");
    EXPECT_TRUE(oall(o).empty());
}

TEST(Ontology, UndeclaredPrefixIsRejected) {
    EXPECT_THROW(parse_ontology(R"({"namespace":"A","triples":[["&XX;Foo","rdfs:subClassOf","Bar"]]})"), ParseError);
    EXPECT_THROW(parse_ontology(R"({"namespace":"A","concepts":["XX:Foo"]})"), ParseError);
}

TEST(Ontology, ImportedPrefixIsAccepted) {
    const auto o = parse_ontology(R"({"namespace":"A","imports":["B"],"triples":[["X","rdfs:subClassOf","&B;Y"]]})");
    EXPECT_TRUE(o.concepts.count("&B;Y"));
}

TEST(Ontology, SyntaxErrorCarriesLine) {
    try {
        parse_ontology("{\n  \"namespace\": \"A\",\n  \"concepts\": [\"x\",,]\n}");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Ontology, DuplicateConceptIsRejected) {
    EXPECT_THROW(parse_ontology(R"({"namespace":"A","concepts":["X","X"]})"), ParseError);
    EXPECT_THROW(parse_ontology(R"({"namespace":"A","concepts":["X","&A;X"]})"), ParseError);
}

TEST(Ontology, OwnPredicateMustBeDeclared) {
    EXPECT_THROW(parse_ontology(R"({"namespace":"A","triples":[["X","p","Y"]]})"), ParseError);
    EXPECT_NO_THROW(parse_ontology(R"({"namespace":"A","properties":["p"],"triples":[["X","p","Y"]]})"));
}

TEST(Ontology, OallIsConceptsUnionProperties) {
    const auto o = parse_ontology(R"({"namespace":"A","concepts":["X","Y"],"properties":["p"]})");
    EXPECT_EQ(oall(o), (std::set<std::string>{"&A;X", "&A;Y", "&A;p"}));
}

TEST(Ontology, FixtureOallMatchesFileContents) {
    const auto text = read_file(fixture_dir() / "ontologies/aipl.json");
    const auto o = parse_ontology(text);
    const auto all = oall(o);
    EXPECT_TRUE(all.count("&AIPL;P0110"));
    EXPECT_TRUE(all.count("&AIPL;hasShape"));

    // Enumerate the file independently: declared concepts and properties plus
    // every triple endpoint.
    const auto j = nlohmann::json::parse(text);
    std::set<std::string> expected;
    auto q = [](const std::string& n) { return n[0] == '&' ? n : "&AIPL;" + n; };
    for (const auto& c : j["concepts"]) expected.insert(q(c.is_string() ? c.get<std::string>() : c["id"].get<std::string>()));
    for (const auto& p : j["properties"]) expected.insert(q(p.get<std::string>()));
    for (const auto& t : j["triples"]) {
        expected.insert(q(t[0].get<std::string>()));
        expected.insert(q(t[2].get<std::string>()));
    }
    EXPECT_EQ(all, expected);
}

TEST(Ontology, RoundTripIsIdentityOnCanonicalForm) {
    for (const auto* name : {"go", "msdl", "aipl", "bpmn", "mega"}) {
        const auto o = parse_ontology(read_file(fixture_dir() / "ontologies" / (std::string(name) + ".json")));
        const auto text = serialize_ontology(o);
        const auto back = parse_ontology(text);
        EXPECT_EQ(back, o) << name;
        EXPECT_EQ(serialize_ontology(back), text) << name;
    }
}

TEST(Graph, RejectsDanglingRelationsAndBadIds) {
    Graph g;
    g.add_entity(make_entity("&N;a"));
    EXPECT_THROW(g.add_relation({"", "&N;p", "&N;a", "&N;b"}), InvariantError);
    EXPECT_THROW(g.add_entity(make_entity("&N;a")), InvariantError);
    EXPECT_THROW(g.add_entity(Entity{"&N;x", "", "&M;"}), InvariantError);
    EXPECT_THROW(g.add_entity(Entity{"&N;x", "", ""}), InvariantError);
    EXPECT_THROW(make_entity("bare"), Error);
}

TEST(Graph, RemovingEntityDropsIncidentRelations) {
    Graph g;
    for (auto* n : {"&N;a", "&N;b", "&N;c"}) g.add_entity(make_entity(n));
    g.add_relation({"", "&N;p", "&N;a", "&N;b"});
    g.add_relation({"", "&N;p", "&N;b", "&N;c"});
    g.add_relation({"", "&N;p", "&N;a", "&N;c"});
    g.remove_entity("&N;b");
    ASSERT_EQ(g.relations().size(), 1u);
    for (const auto& r : g.relations()) {
        EXPECT_TRUE(g.has_entity(r.domain));
        EXPECT_TRUE(g.has_entity(r.range));
    }
}

TEST(Neighbors, SpecExamples) {
    Graph g;
    g.add_entity(make_entity("&N;a"));
    g.add_entity(make_entity("&N;b"));
    const auto& r = g.add_relation({"", "&N;p", "&N;a", "&N;b"});
    const auto out = neighbors(g, "&N;a", Direction::Out);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].first, r);
    EXPECT_EQ(out[0].second.id, "&N;b");
    EXPECT_EQ(out[0].first.dom(), "&N;a");
    EXPECT_EQ(out[0].first.ran(), "&N;b");
    EXPECT_TRUE(neighbors(g, "&N;b", Direction::Out).empty());
    EXPECT_THROW(neighbors(g, "&N;z", Direction::Both), NotFoundError);
}

TEST(Neighbors, AgreesWithLinearScanOnRandomGraphs) {
    std::mt19937 rng(11);
    for (int i = 0; i < 300; ++i) {
        const auto rg = random_graph(rng, 12, 40);
        const auto g = rg.build();
        for (const auto& a : rg.nodes) {
            std::set<std::pair<std::string, std::string>> out, in;
            for (const auto& r : g.relations()) {
                if (r.domain == a) out.insert({r.id, r.range});
                if (r.range == a) in.insert({r.id, r.domain});
            }
            EXPECT_EQ(as_pairs(neighbors(g, a, Direction::Out)), out);
            EXPECT_EQ(as_pairs(neighbors(g, a, Direction::In)), in);
            auto both = out;
            both.insert(in.begin(), in.end());
            EXPECT_EQ(as_pairs(neighbors(g, a, Direction::Both)), both);
        }
    }
}

TEST(KnowledgeStore, MetaModelMergesImportsAndExcludesIndividuals) {
    const auto p = load_fixture();
    EXPECT_TRUE(p.mmo.elements.count("&MEGA;Operation"));
    EXPECT_TRUE(p.mmo.elements.count("&BPMN;Activity"));
    EXPECT_TRUE(p.mmo.properties.count("&BPMN;SourceRef"));
    EXPECT_TRUE(p.mmo.is_subclass("&MEGA;Operation", "&BPMN;FlowElement"));

    const KnowledgeStore ks({parse_ontology(R"({"namespace":"M","role":"metamodel","concepts":["C","i1"],
                                                "triples":[["i1","rdf:type","C"]]})")});
    const auto mmo = ks.metamodel("M");
    EXPECT_EQ(mmo.elements, (std::set<std::string>{"&M;C"}));
}

TEST(KnowledgeStore, AxiomPredicatesMustBeDeclaredSomewhere) {
    EXPECT_THROW(KnowledgeStore({parse_ontology(R"({"namespace":"A","imports":["B"],
                                                  "triples":[["X","&B;p","Y"]]})")}),
                 InvariantError);
}

TEST(KnowledgeStore, PlcGraphSpansPlcOntologiesOnly) {
    const auto p = load_fixture();
    EXPECT_TRUE(p.ks.plc_graph().has_entity("&AIPL;P0110"));
    EXPECT_TRUE(p.ks.plc_graph().has_entity("&GO;Thing"));
    EXPECT_FALSE(p.ks.plc_graph().has_entity("&MEGA;Operation"));
    EXPECT_EQ(p.ks.plc_graph().entity("&MSDL;Aluminium").label, "Aluminium");
    EXPECT_TRUE(p.ks.is_plc_property("&MSDL;hasOutput"));
    EXPECT_FALSE(p.ks.is_plc_property("&MEGA;attachesTo"));
}

TEST(KnowledgeStore, SubclassClosureAddsDescendants) {
    const auto p = load_fixture();
    const auto c = p.ks.subclass_closure({"&AIPL;Bases"});
    EXPECT_EQ(c, (std::set<std::string>{"&AIPL;Bases", "&AIPL;P0110", "&AIPL;P0960"}));
}

TEST(Names, NaturalOrder) {
    EXPECT_TRUE(natural_less("e2", "e10"));
    EXPECT_FALSE(natural_less("e10", "e2"));
    EXPECT_TRUE(natural_less("e9", "sf1"));
    EXPECT_EQ(make_prefix("AIPL"), "&AIPL;");
    EXPECT_EQ(make_prefix("&AIPL;"), "&AIPL;");
    EXPECT_EQ(local_name("&AIPL;P0110"), "P0110");
}
