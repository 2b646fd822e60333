// SPDX-License-Identifier: Apache-2.0
//
// annot check|suggest|sb|serve
//
// Exit codes: 0 clean, 1 input error, 2 inconsistent annotations (check only).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "annot/annot.hpp"
#include "annot/service.hpp"

namespace {

struct Options {
    std::string config;
    std::string model;
    std::vector<std::string> ontologies;
    std::vector<std::string> rules;
    std::string annotations;
    std::string out = "-";
    std::string sbr_mode;
    bool subclass_closure = false;
    bool auto_accept = false;
    std::optional<unsigned> max_depth;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string main_concept;
    std::optional<std::size_t> depth;
};

void add_project_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "project file (default: $ANNOT_PROJECT_DIR/project.json, ./project.json)");
    cmd->add_option("--model", o.model, "model file");
    cmd->add_option("--ontology", o.ontologies, "ontology file (repeatable)");
    cmd->add_option("--rules", o.rules, "rule file (repeatable)");
    cmd->add_option("--annotations", o.annotations, "annotation store file");
    cmd->add_option("--sbr-mode", o.sbr_mode, "substitution-block check: strict|symmetric")
        ->check(CLI::IsMember({"strict", "symmetric"}));
    cmd->add_flag("--subclass-closure", o.subclass_closure, "compare blocks under subclass closure");
    cmd->add_flag("--auto-accept", o.auto_accept, "accept suggestions into the store while reasoning");
    cmd->add_option("--max-depth", o.max_depth, "suggestion rounds")
        ->check(CLI::Range(0u, annot::kMaxInferenceDepthLimit));
}

// Config file (explicit or discovered) overlaid with command-line values.
annot::ProjectConfig resolve_config(const Options& o, bool need_model) {
    annot::ProjectConfig c;
    std::optional<annot::fs::path> explicit_path;
    if (!o.config.empty()) explicit_path = o.config;
    const bool direct = !o.model.empty() || !o.ontologies.empty();
    if (auto file = annot::discover_project_config(explicit_path); file && (explicit_path || !direct)) {
        c = annot::load_project_config(*file);
    } else {
        c.dir = annot::fs::current_path();
    }
    if (!o.model.empty()) c.model = o.model;
    if (!o.ontologies.empty()) c.ontologies.assign(o.ontologies.begin(), o.ontologies.end());
    if (!o.rules.empty()) c.rules.assign(o.rules.begin(), o.rules.end());
    if (!o.annotations.empty()) c.annotations = o.annotations;
    if (!o.sbr_mode.empty()) c.sbr_mode = annot::parse_sbr_mode(o.sbr_mode);
    if (o.subclass_closure) c.subclass_closure = true;
    if (o.auto_accept) c.auto_accept = true;
    if (o.max_depth) c.max_inference_depth = *o.max_depth;
    if (c.ontologies.empty()) throw annot::Error("no ontologies given (use --config or --ontology)");
    if (need_model && c.model.empty()) throw annot::Error("no model given (use --config or --model)");
    return c;
}

void emit(const std::string& out, const std::string& text) {
    if (out == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        std::fflush(stdout);
    } else {
        annot::write_file_atomic(out, text);
    }
}

int cmd_check(const Options& o) {
    const auto project = annot::load_project(resolve_config(o, true));
    const auto result = annot::run_project(project);
    emit(o.out, annot::serialize_report(result.report));
    return result.report.has_inconsistency() ? 2 : 0;
}

int cmd_suggest(const Options& o) {
    const auto project = annot::load_project(resolve_config(o, true));
    const auto result = annot::run_project(project);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : result.report.suggestions) arr.push_back(annot::annotation_to_json(s));
    emit(o.out, arr.dump(2) + "\n");
    return 0;
}

int cmd_sb(const Options& o) {
    const auto cfg = resolve_config(o, false);
    std::vector<annot::Ontology> onts;
    for (const auto& path : cfg.ontologies)
        onts.push_back(annot::detail::with_file_context(path, [](const std::string& t) { return annot::parse_ontology(t); }));
    const annot::KnowledgeStore ks(std::move(onts));
    const auto sel = o.depth ? annot::Selector::depth(*o.depth) : annot::Selector::all();
    emit(o.out, annot::domain_to_json(annot::delimit_sb(ks.plc_graph(), o.main_concept, sel)).dump(2) + "\n");
    return 0;
}

int cmd_serve(const Options& o) {
    annot::Service service(annot::load_project(resolve_config(o, true)));
    std::cerr << "annot: serving on http://" << o.host << ":" << o.port << "\n";
    if (!service.listen(o.host, o.port)) {
        std::cerr << "annot: error: cannot listen on " << o.host << ":" << o.port << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic annotation consistency checker"};
    app.require_subcommand(1);
    Options o;

    auto* check = app.add_subcommand("check", "run the reasoning pipeline and write the report");
    auto* suggest = app.add_subcommand("suggest", "print the suggested inferred annotations");
    auto* sb = app.add_subcommand("sb", "print the semantic block grown from a concept");
    auto* serve = app.add_subcommand("serve", "serve the project API");
    for (auto* cmd : {check, suggest, sb, serve}) add_project_options(cmd, o);
    for (auto* cmd : {check, suggest, sb}) cmd->add_option("--out", o.out, "output path, '-' for stdout");
    sb->add_option("--main", o.main_concept, "main concept, e.g. &AIPL;P0110")->required();
    sb->add_option("--depth", o.depth, "layer bound");
    serve->add_option("--host", o.host, "bind address");
    serve->add_option("--port", o.port, "port")->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*check) return cmd_check(o);
        if (*suggest) return cmd_suggest(o);
        if (*sb) return cmd_sb(o);
        if (*serve) return cmd_serve(o);
    } catch (const std::exception& e) {
        std::cerr << "annot: error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
