// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace annot;
using namespace annot::testing;

namespace {

const Project& fixture() {
    static const Project p = load_fixture();
    return p;
}

DomainSemantics block(const std::string& main, std::optional<std::size_t> depth = std::nullopt) {
    return delimit_sb(fixture().ks.plc_graph(), main, depth ? Selector::depth(*depth) : Selector::all());
}

AnnotationStore empty_store() {
    AnnotationStore s(fixture().model.id());
    for (const auto& a : fixture().store.associations()) s.add_association(a);
    return s;
}

}  // namespace

TEST(Annotate, RecordsTupleForDataObject) {
    auto s = empty_store();
    const auto id = annotate(s, fixture().model, fixture().ks, "e2", block("&AIPL;P0110"), SRKind::LessGeneral);
    EXPECT_EQ(id, "sa1");
    const auto& a = s.at(id);
    EXPECT_EQ(a.element, "e2");
    EXPECT_EQ(a.mme, "&MEGA;DataObject");
    EXPECT_EQ(a.sr, SRKind::LessGeneral);
    EXPECT_FALSE(a.provenance.is_inferred());
    EXPECT_EQ(a.domain, block("&AIPL;P0110"));
}

TEST(Annotate, EmptyDomainIsRejected) {
    auto s = empty_store();
    EXPECT_THROW(annotate(s, fixture().model, fixture().ks, "e2", DomainSemantics{}, SRKind::Equivalent), InvariantError);
    EXPECT_EQ(s.size(), 0u);
}

TEST(Annotate, SeveralAnnotationsOnOneElementCoexist) {
    auto s = empty_store();
    const auto a = annotate(s, fixture().model, fixture().ks, "e2", block("&AIPL;P0110"), SRKind::LessGeneral);
    const auto b = annotate(s, fixture().model, fixture().ks, "e2", block("&AIPL;GDisc"), SRKind::LessGeneral);
    EXPECT_NE(a, b);
    EXPECT_EQ(s.for_element("e2").size(), 2u);
}

TEST(Annotate, UnknownReferencesAreRejected) {
    auto s = empty_store();
    const auto& m = fixture().model;
    const auto& ks = fixture().ks;
    EXPECT_THROW(annotate(s, m, ks, "e99", block("&AIPL;P0110"), SRKind::LessGeneral), NotFoundError);
    EXPECT_THROW(annotate(s, m, ks, "e2", DomainSemantics{"&AIPL;Nope", {"&AIPL;Nope"}, {}}, SRKind::LessGeneral),
                 NotFoundError);
    EXPECT_THROW(annotate(s, m, ks, "e2", DomainSemantics{"&MEGA;Operation", {"&MEGA;Operation"}, {}}, SRKind::LessGeneral),
                 NotFoundError);
    DomainSemantics fake{"&AIPL;P0110", {"&AIPL;P0110", "&AIPL;GDisc"}, {{"", "&AIPL;hasShape", "&AIPL;P0110", "&AIPL;GDisc"}}};
    EXPECT_THROW(annotate(s, m, ks, "e2", fake, SRKind::LessGeneral), NotFoundError);
    EXPECT_EQ(s.size(), 0u);
}

TEST(Annotate, DomainMustBeABlock) {
    auto s = empty_store();
    DomainSemantics loose{"&AIPL;P0110", {"&AIPL;P0110", "&AIPL;GDisc"}, {}};
    try {
        annotate(s, fixture().model, fixture().ks, "e2", loose, SRKind::LessGeneral);
        FAIL() << "expected an invariant error";
    } catch (const InvariantError& e) {
        EXPECT_EQ(e.invariant(), "domain semantics is a semantic block");
    }
}

TEST(Annotate, InferredProvenanceNamesAnotherElement) {
    auto s = empty_store();
    const auto& m = fixture().model;
    const auto& ks = fixture().ks;
    const auto via = std::string("&SANS;SBR_Operation_to_DataObject");
    EXPECT_THROW(annotate(s, m, ks, "e2", block("&AIPL;P0110"), SRKind::LessGeneral, Provenance::inferred("e2", via)),
                 InvariantError);
    EXPECT_THROW(annotate(s, m, ks, "e2", block("&AIPL;P0110"), SRKind::LessGeneral, Provenance::inferred("e77", via)),
                 NotFoundError);
    const auto id = annotate(s, m, ks, "e2", block("&AIPL;P0110"), SRKind::LessGeneral, Provenance::inferred("e9", via));
    EXPECT_EQ(s.at(id).provenance, Provenance::inferred("e9", via));
}

TEST(AssociateProperty, ValidatesBothSides) {
    auto s = empty_store();
    const auto& p = fixture();
    EXPECT_THROW(associate_property(s, p.rules, p.ks, "&SANS;NotARule", "&MSDL;hasOutput"), NotFoundError);
    EXPECT_THROW(associate_property(s, p.rules, p.ks, "&SANS;SBR_Operation_to_DataObject", "&MEGA;attachesTo"),
                 NotFoundError);
    const auto before = s.associations().size();
    associate_property(s, p.rules, p.ks, "&SANS;SBR_DataObject_to_Operation", "&MSDL;hasInput", AssociationDirection::Inverse);
    associate_property(s, p.rules, p.ks, "&SANS;SBR_DataObject_to_Operation", "&MSDL;hasInput", AssociationDirection::Inverse);
    EXPECT_EQ(s.associations().size(), before + 1);
}

TEST(Store, FixtureHasTheEightDataObjectRows) {
    const std::vector<std::pair<std::string, std::string>> rows{
        {"e1", "&AIPL;3mBar"}, {"e2", "&AIPL;P0110"}, {"e3", "&AIPL;P0960"}, {"e4", "&AIPL;MDisc"},
        {"e5", "&AIPL;GDisc"}, {"e6", "&AIPL;PAL09"}, {"e7", "&AIPL;PAL10"}, {"e8", "&AIPL;Prod3"}};
    for (const auto& [element, main] : rows) {
        const auto anns = fixture().store.for_element(element);
        ASSERT_EQ(anns.size(), 1u) << element;
        EXPECT_EQ(anns[0]->domain.main, main);
        EXPECT_EQ(anns[0]->sr, SRKind::LessGeneral);
        EXPECT_EQ(anns[0]->mme, "&MEGA;DataObject");
        EXPECT_FALSE(anns[0]->provenance.is_inferred());
        EXPECT_FALSE(block_violation(anns[0]->domain).has_value());
    }
}

TEST(Store, RoundTripIsIdentity) {
    const auto& p = fixture();
    const auto text = save_store(p.store);
    const auto back = load_store(text, p.model, p.ks);
    EXPECT_EQ(back, p.store);
    EXPECT_EQ(save_store(back), text);
}

TEST(Store, RandomStoresRoundTrip) {
    const auto& p = fixture();
    std::vector<std::string> mains(p.ks.plc_elements().begin(), p.ks.plc_elements().end());
    std::vector<std::string> elements;
    for (const auto& e : p.model.elements()) elements.push_back(e.id);
    std::mt19937 rng(17);
    for (int i = 0; i < 50; ++i) {
        auto s = empty_store();
        const int n = std::uniform_int_distribution<int>(0, 12)(rng);
        for (int k = 0; k < n; ++k) {
            const auto& main = mains[rng() % mains.size()];
            if (!p.ks.plc_graph().has_entity(main)) continue;
            const auto depth = rng() % 2 ? std::optional<std::size_t>(rng() % 3) : std::nullopt;
            annotate(s, p.model, p.ks, elements[rng() % elements.size()], block(main, depth), kAllSRKinds[rng() % 5]);
        }
        const auto text = save_store(s);
        EXPECT_EQ(load_store(text, p.model, p.ks), s);
    }
}

TEST(Store, LoadNamesAMissingElement) {
    const auto& p = fixture();
    auto model = p.model;
    model.remove_element("e2");
    try {
        load_store(save_store(p.store), model, p.ks);
        FAIL() << "expected a not-found error";
    } catch (const NotFoundError& e) {
        EXPECT_EQ(e.id(), "e2");
    }
}

TEST(Store, SchemaVersionAndMetaRelationAreChecked) {
    const auto& p = fixture();
    auto j = nlohmann::json::parse(save_store(p.store));
    j["schemaVersion"] = 2;
    EXPECT_THROW(load_store(j.dump(), p.model, p.ks), InvariantError);
    j["schemaVersion"] = 1;
    j["annotations"][0]["mr"] = "partOf";
    EXPECT_THROW(load_store(j.dump(), p.model, p.ks), InvariantError);
    j["annotations"][0]["mr"] = "io";
    j["annotations"][0]["mme"] = "&MEGA;Operation";
    EXPECT_THROW(load_store(j.dump(), p.model, p.ks), InvariantError);
    EXPECT_THROW(load_store("{\"schemaVersion\": 1,", p.model, p.ks), ParseError);
}

TEST(Store, FiveTupleIsRecoverableFromJson) {
    for (const auto& [id, a] : fixture().store.annotations()) {
        const auto j = annotation_to_json(a);
        EXPECT_EQ(j["element"], a.element);
        EXPECT_EQ(j["sr"], to_string(a.sr));
        EXPECT_EQ(j["mme"], a.mme);
        EXPECT_EQ(j["mr"], "io");
        EXPECT_EQ(resolve_domain(domain_from_json(j["domain"]), fixture().ks), a.domain);
    }
}

TEST(Kinds, InverseIsAnInvolution) {
    for (auto k : kAllPRKinds) EXPECT_EQ(inverse(inverse(k)), k);
    EXPECT_EQ(inverse(PRKind::MoreGeneral), PRKind::LessGeneral);
    EXPECT_EQ(inverse(PRKind::Overlapping), PRKind::Overlapping);
    for (auto k : kAllSRKinds) EXPECT_EQ(parse_sr_kind(to_string(k)), k);
    EXPECT_THROW(parse_sr_kind("sub"), InvariantError);
}
