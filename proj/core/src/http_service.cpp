#include "tabtax/http_service.hpp"

#include <thread>

#include "httplib.h"
#include "tabtax/error.hpp"

namespace tabtax {

using nlohmann::json;

namespace {

int status_of(Error::Category c) {
    switch (c) {
        case Error::Category::not_found: return 404;
        case Error::Category::conflict: return 409;
        case Error::Category::io: return 500;
        default: return 422;
    }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, {{"error", message}}, status);
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed JSON body: ") + e.what());
    }
}

std::optional<std::uint64_t> expected_version(const httplib::Request& req, const json& body) {
    if (req.has_header("If-Match")) {
        std::string v = req.get_header_value("If-Match");
        std::erase(v, '"');
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw InvalidArgument("If-Match must hold a session version");
        }
    }
    if (body.is_object() && body.contains("expected_version")) {
        return body.at("expected_version").get<std::uint64_t>();
    }
    return std::nullopt;
}

json concept_ref(const std::string& text) {
    if (!text.empty() && std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return std::stoull(text);
    }
    return text;
}

bool query_flag(const httplib::Request& req, const char* key, bool fallback) {
    if (!req.has_param(key)) return fallback;
    const std::string v = req.get_param_value(key);
    return v == "1" || v == "true" || v == "yes";
}

}  // namespace

struct HttpService::Impl {
    ServiceOptions options;
    SessionRegistry registry;
    httplib::Server server;
    std::thread thread;

    explicit Impl(ServiceOptions o) : options(o), registry(o.limits) { routes(); }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    Handler guard(Handler h) {
        return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const Error& e) {
                send_error(res, status_of(e.category()), e.what());
            } catch (const std::invalid_argument& e) {
                send_error(res, 400, e.what());
            } catch (const json::exception& e) {
                send_error(res, 422, std::string("bad payload: ") + e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, e.what());
            }
        };
    }

    std::shared_ptr<Session> session(const httplib::Request& req) { return registry.get(req.path_params.at("id")); }

    void routes() {
        server.set_payload_max_length(options.max_upload_bytes);
        server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
            res.set_header("X-API-Version", std::string(api_version));
            if (options.cors) {
                res.set_header("Access-Control-Allow-Origin", "*");
                res.set_header("Access-Control-Expose-Headers", "X-API-Version");
            }
        });
        server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, PATCH, DELETE, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type, If-Match");
            res.status = 204;
        });

        server.Post("/sessions", guard([this](const httplib::Request& req, httplib::Response& res) {
            std::string data;
            std::string format = req.has_param("format") ? req.get_param_value("format") : "csv";
            std::string name = req.has_param("name") ? req.get_param_value("name") : "";
            std::string root_label;
            json columns;
            if (req.get_header_value("Content-Type").starts_with("application/json")) {
                const json body = parse_body(req);
                data = body.at("data").get<std::string>();
                format = body.value("format", format);
                name = body.value("name", name);
                root_label = body.value("root_label", std::string{});
                if (body.contains("columns")) columns = body.at("columns");
            } else {
                data = req.body;
            }
            auto table = std::make_shared<Table>(load_table(data, parse_table_format(format), {}, name));
            if (!columns.is_null()) apply_column_config(*table, columns);
            auto s = registry.create(std::move(table), root_label);
            json out = s->summary();
            out["columns"] = s->columns().at("columns");
            send_json(res, out, 201);
        }));

        server.Get("/sessions/:id", guard([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, session(req)->summary());
        }));
        server.Delete("/sessions/:id", guard([this](const httplib::Request& req, httplib::Response& res) {
            if (!registry.erase(req.path_params.at("id"))) throw NotFound("unknown session");
            res.status = 204;
        }));

        server.Get("/sessions/:id/columns", guard([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, session(req)->columns());
        }));
        server.Patch("/sessions/:id/columns", guard([this](const httplib::Request& req, httplib::Response& res) {
            auto s = session(req);
            const json body = parse_body(req);
            send_json(res, s->patch_columns(body, expected_version(req, body)));
        }));

        server.Post("/sessions/:id/commands", guard([this](const httplib::Request& req, httplib::Response& res) {
            auto s = session(req);
            const json body = parse_body(req);
            const json& command = body.contains("command") ? body.at("command") : body;
            send_json(res, s->mutate(command, expected_version(req, body)));
        }));

        server.Get("/sessions/:id/concepts", guard([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, session(req)->concepts());
        }));
        server.Get("/sessions/:id/concepts/:cid", guard([this](const httplib::Request& req, httplib::Response& res) {
            const std::size_t preview = req.has_param("preview") ? std::stoul(req.get_param_value("preview")) : 0;
            send_json(res, session(req)->concept_detail(concept_ref(req.path_params.at("cid")), preview));
        }));
        server.Post("/sessions/:id/concepts/:cid/discover",
                    guard([this](const httplib::Request& req, httplib::Response& res) {
                        auto s = session(req);
                        const json body = parse_body(req);
                        const auto [job, created] = s->start_discovery(concept_ref(req.path_params.at("cid")), body);
                        json out = s->job(job);
                        out["created"] = created;
                        send_json(res, out, 202);
                    }));

        server.Get("/sessions/:id/jobs/:jid", guard([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, session(req)->job(req.path_params.at("jid")));
        }));

        server.Get("/sessions/:id/proposals", guard([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, session(req)->proposals());
        }));
        server.Post("/sessions/:id/proposals/:pid", guard([this](const httplib::Request& req, httplib::Response& res) {
            auto s = session(req);
            const json body = parse_body(req);
            const std::string decision = body.value("decision", std::string{});
            if (decision != "accept" && decision != "reject") {
                throw InvalidArgument("decision must be 'accept' or 'reject'");
            }
            const std::string pid = req.path_params.at("pid");
            if (pid.empty() || !std::all_of(pid.begin(), pid.end(), [](char c) { return c >= '0' && c <= '9'; })) {
                throw NotFound("unknown proposal '" + pid + "'");
            }
            send_json(res, s->resolve(static_cast<ProposalId>(std::stoul(pid)), decision == "accept",
                                      expected_version(req, body)));
        }));

        server.Get("/sessions/:id/export", guard([this](const httplib::Request& req, httplib::Response& res) {
            ExportOptions options;
            options.include_individuals = query_flag(req, "individuals", true);
            if (req.has_param("base")) options.base_iri = req.get_param_value("base");
            if (req.has_param("label")) options.ontology_label = req.get_param_value("label");
            const std::string format = req.has_param("format") ? req.get_param_value("format") : "turtle";
            if (format != "turtle" && format != "ttl") throw InvalidArgument("only turtle export is supported");
            res.set_content(session(req)->export_turtle(options), "text/turtle; charset=utf-8");
        }));
        server.Get("/sessions/:id/stats", guard([this](const httplib::Request& req, httplib::Response& res) {
            const TaxonomyStats stats = session(req)->stats();
            if (req.has_param("format") && req.get_param_value("format") == "csv") {
                res.set_content(stats_csv(stats), "text/csv");
            } else {
                send_json(res, to_json(stats));
            }
        }));
        server.Get("/sessions/:id/log", guard([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, session(req)->log());
        }));
        server.Get("/sessions/:id/document", guard([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, session(req)->document());
        }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) {
                res.set_content(json{{"error", httplib::status_message(res.status)}}.dump(), "application/json");
            }
        });
    }
};

HttpService::HttpService(ServiceOptions options) : impl_(std::make_unique<Impl>(options)) {}

HttpService::~HttpService() { stop(); }

SessionRegistry& HttpService::registry() { return impl_->registry; }

int HttpService::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error(Error::Category::io, "cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void HttpService::run(const std::string& host, int port) {
    if (!impl_->server.listen(host, port)) {
        throw Error(Error::Category::io, "cannot listen on " + host + ":" + std::to_string(port));
    }
}

void HttpService::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tabtax
