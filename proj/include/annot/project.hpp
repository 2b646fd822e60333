// SPDX-License-Identifier: Apache-2.0
//
// Project configuration and loading: one model, its ontologies, rule files
// and annotation store, plus the reasoning parameters.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "annot/annotation.hpp"
#include "annot/error.hpp"
#include "annot/kstore.hpp"
#include "annot/model.hpp"
#include "annot/reason.hpp"
#include "annot/rules.hpp"

namespace annot {

namespace fs = std::filesystem;

struct ProjectConfig {
    fs::path dir;  // relative paths resolve here
    fs::path model;
    std::vector<fs::path> ontologies;
    std::vector<fs::path> rules;
    std::optional<fs::path> annotations;
    bool subclass_closure = false;
    SbrMode sbr_mode = SbrMode::Symmetric;
    unsigned max_inference_depth = 4;
    bool auto_accept = false;

    PipelineOptions pipeline_options() const {
        PipelineOptions o;
        o.subclass_closure = subclass_closure;
        o.sbr_mode = sbr_mode;
        o.max_inference_depth = max_inference_depth;
        o.auto_accept = auto_accept;
        return o;
    }
};

inline constexpr unsigned kMaxInferenceDepthLimit = 64;

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes through a sibling temporary and renames it into place.
inline void write_file_atomic(const fs::path& p, const std::string& content) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.flush()) throw Error("cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, p);
}

// Relative paths resolve against `dir`.
inline ProjectConfig parse_project_config(std::string_view text, const fs::path& dir) {
    const auto j = detail::parse_json(text, "project");
    if (!j.is_object()) throw ParseError("project: top level must be an object", 1);
    ProjectConfig c;
    c.dir = dir;
    auto path = [&](const nlohmann::json& v, const char* key) {
        if (!v.is_string()) throw ParseError(std::string("project: '") + key + "' entries must be strings");
        fs::path p = v.get<std::string>();
        return p.is_absolute() ? p : dir / p;
    };
    c.model = path(detail::require(j, "model", "project"), "model");
    for (const char* key : {"ontologies", "rules"}) {
        const auto& arr = detail::require(j, key, "project");
        if (!arr.is_array()) throw ParseError(std::string("project: '") + key + "' must be a list");
        for (const auto& v : arr) (std::string(key) == "rules" ? c.rules : c.ontologies).push_back(path(v, key));
    }
    if (auto it = j.find("annotations"); it != j.end() && !it->is_null()) c.annotations = path(*it, "annotations");
    if (auto it = j.find("subclassClosure"); it != j.end()) c.subclass_closure = it->get<bool>();
    if (auto it = j.find("sbrMode"); it != j.end()) c.sbr_mode = parse_sbr_mode(it->get<std::string>());
    if (auto it = j.find("maxInferenceDepth"); it != j.end()) {
        if (!it->is_number_integer() || it->get<long long>() < 0 || it->get<long long>() > kMaxInferenceDepthLimit)
            throw InvariantError("maxInferenceDepth in 0.." + std::to_string(kMaxInferenceDepthLimit), it->dump());
        c.max_inference_depth = it->get<unsigned>();
    }
    if (auto it = j.find("autoAccept"); it != j.end()) c.auto_accept = it->get<bool>();
    return c;
}

inline ProjectConfig load_project_config(const fs::path& file) {
    const auto text = read_file(file);
    try {
        return parse_project_config(text, file.parent_path());
    } catch (const std::exception& e) {
        throw Error(file.string() + ": " + e.what());
    }
}

// Explicit path, else $ANNOT_PROJECT_DIR/project.json, else ./project.json.
inline std::optional<fs::path> discover_project_config(const std::optional<fs::path>& explicit_path = std::nullopt) {
    if (explicit_path) return explicit_path;
    if (const char* env = std::getenv("ANNOT_PROJECT_DIR"); env && *env) return fs::path(env) / "project.json";
    if (fs::exists("project.json")) return fs::path("project.json");
    return std::nullopt;
}

struct Project {
    ProjectConfig config;
    KnowledgeStore ks;
    MetaModelOntology mmo;
    Model model;
    RuleSet rules;
    AnnotationStore store;
};

namespace detail {

template <typename F>
auto with_file_context(const fs::path& p, F&& f) -> decltype(f(std::string{})) {
    const auto text = read_file(p);
    try {
        return f(text);
    } catch (const std::exception& e) {
        throw Error(p.string() + ": " + e.what());
    }
}

}  // namespace detail

inline Project load_project(const ProjectConfig& cfg) {
    Project p;
    p.config = cfg;
    std::vector<Ontology> onts;
    for (const auto& path : cfg.ontologies)
        onts.push_back(detail::with_file_context(path, [](const std::string& t) { return parse_ontology(t); }));
    p.ks = KnowledgeStore(std::move(onts));

    const auto model_text = read_file(cfg.model);
    std::string metamodel;
    try {
        metamodel = detail::require_string(detail::parse_json(model_text, "model"), "metamodel", "model");
        p.mmo = p.ks.metamodel(metamodel);
    } catch (const std::exception& e) {
        throw Error(cfg.model.string() + ": " + e.what());
    }
    p.model = detail::with_file_context(cfg.model, [&](const std::string& t) { return parse_model(t, p.mmo); });

    for (const auto& path : cfg.rules)
        p.rules.merge(detail::with_file_context(path, [](const std::string& t) { return parse_rules(t); }));

    if (cfg.annotations) {
        try {
            p.store = load_store(read_file(*cfg.annotations), p.model, p.ks);
        } catch (const std::exception& e) {
            throw Error(cfg.annotations->string() + ": " + e.what());
        }
        for (const auto& a : p.store.associations())
            if (!p.rules.declares(a.derived))
                throw Error(cfg.annotations->string() + ": association names undeclared derived predicate '" + a.derived + "'");
    } else {
        p.store = AnnotationStore(p.model.id());
    }
    return p;
}

inline PipelineResult run_project(const Project& p) {
    return run_pipeline(p.model, p.ks, p.mmo, p.rules, p.store, p.config.pipeline_options());
}

}  // namespace annot
