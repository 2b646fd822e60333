// SPDX-License-Identifier: Apache-2.0
//
// Project-scoped HTTP API. Readers work on immutable snapshots; mutations are
// serialized, version-checked and published by swapping the snapshot.
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "annot/annotation.hpp"
#include "annot/blocks.hpp"
#include "annot/error.hpp"
#include "annot/project.hpp"
#include "annot/reason.hpp"

namespace annot {

struct Snapshot {
    std::uint64_t version = 0;
    std::shared_ptr<const Project> project;
    std::vector<SemanticAnnotation> pending;  // suggestions awaiting accept/reject
    std::optional<std::string> latest_report;
};

// Session state shared by the request handlers.
class Session {
public:
    explicit Session(Project p, bool persist = true) : persist_(persist) {
        auto s = std::make_shared<Snapshot>();
        s->version = 1;
        s->project = std::make_shared<const Project>(std::move(p));
        current_ = std::move(s);
    }

    std::shared_ptr<const Snapshot> snapshot() const {
        std::lock_guard lock(state_mu_);
        return current_;
    }

    // Runs `f` on a private copy of the current snapshot under the writer lock
    // and publishes the copy. `f` returns whether it committed a mutation,
    // which bumps the version and persists the store.
    template <typename F>
    auto mutate(std::optional<std::uint64_t> expected, F&& f) {
        std::lock_guard writer(write_mu_);
        auto base = snapshot();
        if (expected && *expected != base->version) throw VersionConflict(base->version);
        auto next = std::make_shared<Snapshot>(*base);
        auto out = f(*next);
        if (out.committed) {
            ++next->version;
            persist(*next->project);
        }
        std::lock_guard lock(state_mu_);
        current_ = std::move(next);
        return out;
    }

    struct VersionConflict {
        std::uint64_t current;
    };

private:
    void persist(const Project& p) const {
        if (persist_ && p.config.annotations) write_file_atomic(*p.config.annotations, save_store(p.store));
    }

    bool persist_;
    mutable std::mutex state_mu_;
    std::mutex write_mu_;
    std::shared_ptr<const Snapshot> current_;
};

class Service {
public:
    static constexpr const char* kVersionHeader = "X-Annot-Version";

    explicit Service(Project p, bool persist = true) : session_(std::move(p), persist) { routes(); }

    Session& session() noexcept { return session_; }
    httplib::Server& server() noexcept { return server_; }

    bool listen(const std::string& host, int port) { return server_.listen(host, port); }
    int bind_any_port(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }

private:
    using Json = nlohmann::json;
    using OJson = nlohmann::ordered_json;

    struct HttpError {
        int status;
        std::string message;
        std::string invariant;
    };

    struct Outcome {
        bool committed = false;
        int status = 200;
        std::string body;
    };

    static void send(httplib::Response& res, int status, const std::string& body, std::uint64_t version) {
        res.status = status;
        res.set_header(kVersionHeader, std::to_string(version));
        res.set_content(body, "application/json");
    }

    static std::string error_body(const std::string& message, const std::string& invariant = {}) {
        OJson j{{"error", message}};
        if (!invariant.empty()) j["invariant"] = invariant;
        return j.dump() + "\n";
    }

    // Accepts an optionally quoted decimal (ETag style).
    static std::uint64_t parse_count(const std::string& s, const char* what) {
        std::string v = s;
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
        if (v.empty() || v.size() > 18 || v.find_first_not_of("0123456789") != std::string::npos)
            throw HttpError{400, std::string("malformed ") + what + " '" + s + "'", {}};
        return std::stoull(v);
    }

    // If-Match header, ?version=, or a "version" body field, in that order.
    static std::optional<std::uint64_t> expected_version(const httplib::Request& req, const Json* body) {
        if (req.has_header("If-Match")) return parse_count(req.get_header_value("If-Match"), "version");
        if (req.has_param("version")) return parse_count(req.get_param_value("version"), "version");
        if (body && body->is_object() && body->contains("version")) {
            const auto& v = (*body)["version"];
            if (v.is_number_unsigned()) return v.get<std::uint64_t>();
            throw HttpError{400, "malformed version field", {}};
        }
        return std::nullopt;
    }

    static Json parse_body(const httplib::Request& req) {
        if (req.body.empty()) return Json::object();
        try {
            return Json::parse(req.body);
        } catch (const Json::parse_error& e) {
            throw HttpError{400, std::string("malformed JSON body: ") + e.what(), {}};
        }
    }

    // Maps library errors raised by request content to HTTP statuses.
    template <typename F>
    void guarded(httplib::Response& res, F&& f) {
        try {
            f();
        } catch (const HttpError& e) {
            send(res, e.status, error_body(e.message, e.invariant), session_.snapshot()->version);
        } catch (const Session::VersionConflict& e) {
            send(res, 409, error_body("stale version; current is " + std::to_string(e.current)), e.current);
        } catch (const InvariantError& e) {
            send(res, 422, error_body(e.what(), e.invariant()), session_.snapshot()->version);
        } catch (const NotFoundError& e) {
            send(res, 422, error_body(e.what(), "referenced " + e.kind() + " exists"), session_.snapshot()->version);
        } catch (const ParseError& e) {
            send(res, 400, error_body(e.what()), session_.snapshot()->version);
        } catch (const Json::exception& e) {
            send(res, 400, error_body(e.what()), session_.snapshot()->version);
        }
    }

    void routes() {
        server_.Get("/api/project", [this](const httplib::Request&, httplib::Response& res) {
            auto s = session_.snapshot();
            const auto& p = *s->project;
            OJson j;
            j["model"] = {{"id", p.model.id()},
                          {"metamodel", p.model.metamodel()},
                          {"elements", p.model.elements().size()},
                          {"links", p.model.links().size()}};
            auto ns = OJson::array();
            for (const auto& [prefix, o] : p.ks.ontologies())
                ns.push_back({{"namespace", o.name}, {"prefix", prefix}, {"role", o.role == OntologyRole::Plc ? "plc" : "metamodel"}});
            j["ontologies"] = std::move(ns);
            j["annotations"] = p.store.size();
            j["pendingSuggestions"] = s->pending.size();
            j["version"] = s->version;
            send(res, 200, j.dump(2) + "\n", s->version);
        });

        server_.Get("/api/model", [this](const httplib::Request&, httplib::Response& res) {
            auto s = session_.snapshot();
            send(res, 200, model_to_json(s->project->model).dump(2) + "\n", s->version);
        });

        server_.Get(R"(/api/ontology/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto s = session_.snapshot();
            const auto& ks = s->project->ks;
            const auto ns = req.matches[1].str();
            if (!ks.has_ontology(ns)) return send(res, 404, error_body("unknown ontology '" + ns + "'"), s->version);
            send(res, 200, serialize_ontology(ks.ontology(ns)), s->version);
        });

        server_.Get(R"(/api/ontology/([^/]+)/block)", [this](const httplib::Request& req, httplib::Response& res) {
            auto s = session_.snapshot();
            guarded(res, [&] {
                const auto& ks = s->project->ks;
                const auto ns = req.matches[1].str();
                if (!ks.has_ontology(ns)) throw HttpError{404, "unknown ontology '" + ns + "'", {}};
                const auto& o = ks.ontology(ns);
                if (o.role != OntologyRole::Plc)
                    throw HttpError{422, "blocks are delimited over PLC ontologies", "PLC ontology"};
                if (!req.has_param("main")) throw HttpError{400, "missing 'main'", {}};
                auto main = req.get_param_value("main");
                if (!is_qualified(main)) main = o.prefix + main;
                if (!ks.plc_graph().has_entity(main)) throw HttpError{404, "unknown concept '" + main + "'", {}};
                Selector sel = Selector::all();
                if (req.has_param("depth")) sel = Selector::depth(parse_count(req.get_param_value("depth"), "depth"));
                send(res, 200, domain_to_json(delimit_sb(ks.plc_graph(), main, sel)).dump(2) + "\n", s->version);
            });
        });

        server_.Get("/api/annotations", [this](const httplib::Request&, httplib::Response& res) {
            auto s = session_.snapshot();
            send(res, 200, save_store(s->project->store), s->version);
        });

        server_.Get(R"(/api/annotations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            auto s = session_.snapshot();
            const auto* a = s->project->store.find(req.matches[1].str());
            if (!a) return send(res, 404, error_body("unknown annotation '" + req.matches[1].str() + "'"), s->version);
            send(res, 200, annotation_to_json(*a).dump(2) + "\n", s->version);
        });

        server_.Post("/api/annotations", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto body = parse_body(req);
                const auto expected = expected_version(req, &body);
                auto a = annotation_from_json(body);
                auto out = session_.mutate(expected, [&](Snapshot& next) {
                    auto p = std::make_shared<Project>(*next.project);
                    if (!p->model.has_element(a.element)) throw NotFoundError("element", a.element);
                    if (!a.mme.empty() && a.mme != p->model.element(a.element).metaType)
                        throw InvariantError("annotation mme matches element typing", a.mme);
                    if (!a.id.empty() && p->store.find(a.id)) throw InvariantError("annotation ids unique", a.id);
                    auto id = annotate(p->store, p->model, p->ks, a.element, a.domain, a.sr, a.provenance, a.id);
                    Outcome o{true, 201, annotation_to_json(p->store.at(id)).dump(2) + "\n"};
                    next.project = std::move(p);
                    return o;
                });
                send(res, out.status, out.body, session_.snapshot()->version);
            });
        });

        server_.Delete(R"(/api/annotations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto id = req.matches[1].str();
                auto out = session_.mutate(expected_version(req, nullptr), [&](Snapshot& next) {
                    if (!next.project->store.find(id)) throw HttpError{404, "unknown annotation '" + id + "'", {}};
                    auto p = std::make_shared<Project>(*next.project);
                    p->store.erase(id);
                    next.project = std::move(p);
                    return Outcome{true, 200, OJson{{"deleted", id}}.dump() + "\n"};
                });
                send(res, out.status, out.body, session_.snapshot()->version);
            });
        });

        // Without auto-accept the report only refreshes the pending queue and
        // the version stays put.
        server_.Post("/api/reason", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto body = parse_body(req);
                const auto expected = expected_version(req, &body);
                auto out = session_.mutate(expected, [&](Snapshot& next) {
                    auto opts = next.project->config.pipeline_options();
                    if (body.is_object() && body.contains("autoAccept")) opts.auto_accept = body["autoAccept"].get<bool>();
                    const auto& p = *next.project;
                    auto result = run_pipeline(p.model, p.ks, p.mmo, p.rules, p.store, opts);
                    auto report = serialize_report(result.report);
                    next.latest_report = report;
                    Outcome o{false, 200, report};
                    if (opts.auto_accept) {
                        next.pending.clear();
                        if (result.report.stats.accepted > 0) {
                            auto copy = std::make_shared<Project>(p);
                            copy->store = std::move(result.store);
                            next.project = std::move(copy);
                            o.committed = true;
                        }
                    } else {
                        next.pending = result.report.suggestions;
                    }
                    return o;
                });
                send(res, out.status, out.body, session_.snapshot()->version);
            });
        });

        server_.Get("/api/suggestions", [this](const httplib::Request&, httplib::Response& res) {
            auto s = session_.snapshot();
            auto arr = OJson::array();
            for (const auto& a : s->pending) arr.push_back(annotation_to_json(a));
            send(res, 200, arr.dump(2) + "\n", s->version);
        });

        server_.Post(R"(/api/suggestions/([^/]+)/(accept|reject))", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const auto id = req.matches[1].str();
                const bool accept = req.matches[2].str() == "accept";
                const auto body = parse_body(req);
                auto out = session_.mutate(expected_version(req, &body), [&](Snapshot& next) {
                    auto it = std::find_if(next.pending.begin(), next.pending.end(), [&](const auto& a) { return a.id == id; });
                    if (it == next.pending.end()) throw HttpError{404, "unknown suggestion '" + id + "'", {}};
                    auto s = *it;
                    next.pending.erase(it);
                    if (!accept) return Outcome{false, 200, OJson{{"rejected", id}}.dump() + "\n"};
                    auto p = std::make_shared<Project>(*next.project);
                    annotate(p->store, p->model, p->ks, s.element, s.domain, s.sr, s.provenance, s.id);
                    Outcome o{true, 201, annotation_to_json(p->store.at(s.id)).dump(2) + "\n"};
                    next.project = std::move(p);
                    return o;
                });
                send(res, out.status, out.body, session_.snapshot()->version);
            });
        });

        server_.Get("/api/report/latest", [this](const httplib::Request&, httplib::Response& res) {
            auto s = session_.snapshot();
            if (!s->latest_report) return send(res, 404, error_body("no report yet"), s->version);
            send(res, 200, *s->latest_report, s->version);
        });

        const auto ui = session_.snapshot()->project->config.dir / "ui";
        std::error_code ec;
        if (!session_.snapshot()->project->config.dir.empty() && std::filesystem::is_directory(ui, ec))
            server_.set_mount_point("/", ui.string());
    }

    Session session_;
    httplib::Server server_;
};

}  // namespace annot
