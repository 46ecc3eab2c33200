#include "sgaudit/service/server.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/common/text.hpp"
#include "sgaudit/graph/serialize.hpp"
#include "sgaudit/labeling/labeling.hpp"
#include "sgaudit/session/store.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <condition_variable>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

namespace sgaudit::service {

namespace fs = std::filesystem;
using nlohmann::json;
using session::AuditSession;
using Req = httplib::Request;
using Res = httplib::Response;

namespace {

int http_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation: return 400;
        case ErrorKind::NotFound: return 404;
        case ErrorKind::Conflict: return 409;
        case ErrorKind::Schema:
        case ErrorKind::Transport: return 502;
        case ErrorKind::Timeout: return 504;
        default: return 500;
    }
}

json error_body(std::string_view kind, const std::string& message) {
    return {{"error", {{"kind", kind}, {"message", message}}}};
}

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
}

/// Item ids carry their session id before the first '-'.
std::string session_of(const std::string& item_id) {
    auto dash = item_id.find('-');
    if (dash == std::string::npos || dash == 0) throw NotFoundError("malformed id '" + item_id + "'");
    return item_id.substr(0, dash);
}

labeling::RelabelMode relabel_mode(const std::string& s) {
    if (s == "all") return labeling::RelabelMode::All;
    if (s == "affected_only") return labeling::RelabelMode::AffectedOnly;
    throw ValidationError("relabel mode must be all or affected_only");
}

json ids_json(const auto& ids) {
    json out = json::array();
    for (const auto& id : ids) out.push_back(id.str());
    return out;
}

json image_json(const session::GeneratedImage& img) {
    return {{"id", img.id.str()},     {"prompt_id", img.prompt_id.str()}, {"index", img.index},
            {"digest", img.blob.digest}, {"width", img.width},           {"height", img.height},
            {"blob_url", "/images/" + img.id.str() + "/blob"}};
}

json generation_json(const engine::GenerationOutcome& g) {
    return {{"prompt_id", g.prompt_id.str()},
            {"image_ids", ids_json(g.image_ids)},
            {"built_graph", g.built_graph},
            {"labeled_nodes", ids_json(g.labeled_nodes)},
            {"new_records", g.new_records}};
}

json distribution_json(const AuditSession& s, const NodeId& node) {
    json j = session::to_json(labeling::aggregate_distribution(s, node));
    json colors = json::object();
    for (const auto& p : s.prompts) colors[p.id.str()] = session::palette_color(p.color_index);
    j["prompt_colors"] = std::move(colors);
    j["path"] = s.graph.path_names(node);
    return j;
}

graph::NodeSpec node_spec_from(const json& j) {
    graph::NodeSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.kind = graph::node_kind_from(j.value("kind", std::string("attribute")));
    if (j.contains("scope")) spec.scope = graph::scope_spec_from_json(j.at("scope"));
    if (j.contains("candidate_values")) spec.candidate_values = j.at("candidate_values").get<std::vector<std::string>>();
    return spec;
}

}  // namespace

struct AuditServer::Impl {
    struct Slot {
        std::mutex turn_mutex;
        std::condition_variable turn_cv;
        std::uint64_t next_ticket = 0;
        std::uint64_t serving = 0;

        std::shared_mutex state_mutex;
        AuditSession session;
        std::uint64_t seq = 0;  // committed mutations since load

        std::string id;
        adapters::AdapterSet adapters;
        fs::path dir;
    };

    /// Holds a slot's mutation turn; tickets are served in the order taken.
    class Turn {
    public:
        Turn(Slot& slot, std::uint64_t ticket) : slot_(slot) {
            std::unique_lock lock(slot_.turn_mutex);
            slot_.turn_cv.wait(lock, [&] { return slot_.serving == ticket; });
        }
        ~Turn() {
            {
                std::lock_guard lock(slot_.turn_mutex);
                ++slot_.serving;
            }
            slot_.turn_cv.notify_all();
        }
        Turn(const Turn&) = delete;
        Turn& operator=(const Turn&) = delete;

    private:
        Slot& slot_;
    };

    struct Job {
        std::string id;
        std::string kind;
        std::string session_id;
        std::string status = "queued";
        json result;
        json error;
    };

    using SlotPtr = std::shared_ptr<Slot>;
    using Mutation = std::function<json(AuditSession&, Slot&)>;

    ServerConfig config;
    httplib::Server http;
    std::unique_ptr<httplib::ThreadPool> pool;
    std::thread listener;
    int port = -1;

    std::mutex registry_mutex;
    std::map<std::string, SlotPtr> sessions;

    std::mutex submit_mutex;  // keeps ticket order and pool queue order aligned
    std::mutex jobs_mutex;
    std::map<std::string, Job> jobs;
    std::uint64_t job_counter = 0;

    explicit Impl(ServerConfig c) : config(std::move(c)) {
        if (!config.adapters) throw ValidationError("server needs an adapter factory");
        config.guidance.validate();
        fs::create_directories(config.data_dir);
        for (const auto& entry : fs::directory_iterator(config.data_dir)) {
            if (!entry.is_directory() || !fs::exists(entry.path() / "state.json")) continue;
            auto slot = std::make_shared<Slot>();
            slot->session = session::load_session(entry.path());
            slot->adapters = config.adapters(slot->session.seed);
            slot->dir = entry.path();
            slot->id = slot->session.id.str();
            sessions[slot->id] = slot;
        }
        pool = std::make_unique<httplib::ThreadPool>(std::max<std::size_t>(1, config.job_workers));
        routes();
    }

    ~Impl() {
        stop();
        pool->shutdown();
    }

    void stop() {
        http.stop();
        if (listener.joinable()) listener.join();
    }

    SlotPtr slot(const std::string& session_id) {
        std::lock_guard lock(registry_mutex);
        auto it = sessions.find(session_id);
        if (it == sessions.end()) throw NotFoundError("unknown session '" + session_id + "'");
        return it->second;
    }

    SlotPtr slot_of_item(const std::string& item_id) { return slot(session_of(item_id)); }

    static std::uint64_t take_ticket(Slot& s) {
        std::lock_guard lock(s.turn_mutex);
        return s.next_ticket++;
    }

    /// Runs `fn` on a copy of the session in its turn, then publishes and persists the copy.
    json commit(Slot& s, std::uint64_t ticket, const Mutation& fn) {
        Turn turn(s, ticket);
        AuditSession work;
        {
            std::shared_lock lock(s.state_mutex);
            work = s.session;
        }
        json out = fn(work, s);
        {
            std::unique_lock lock(s.state_mutex);
            s.session = std::move(work);
            out["seq"] = ++s.seq;
        }
        session::save_session(s.session, s.dir);
        return out;
    }

    json mutate(const SlotPtr& s, const Mutation& fn) { return commit(*s, take_ticket(*s), fn); }

    template <typename Fn>
    auto read(const SlotPtr& s, Fn&& fn) {
        std::shared_lock lock(s->state_mutex);
        return fn(static_cast<const AuditSession&>(s->session));
    }

    json job_json(const Job& j) {
        json out{{"id", j.id}, {"kind", j.kind}, {"session_id", j.session_id}, {"status", j.status}};
        if (j.status == "succeeded") out["result"] = j.result;
        if (j.status == "failed") out["error"] = j.error;
        return out;
    }

    void set_job(const std::string& id, const std::function<void(Job&)>& fn) {
        std::lock_guard lock(jobs_mutex);
        fn(jobs.at(id));
    }

    json submit(const SlotPtr& s, const std::string& kind, Mutation fn) {
        std::lock_guard order(submit_mutex);
        const auto ticket = take_ticket(*s);
        Job job;
        {
            std::lock_guard lock(jobs_mutex);
            job.id = "job" + std::to_string(++job_counter);
            job.kind = kind;
            job.session_id = s->id;
            jobs[job.id] = job;
        }
        pool->enqueue([this, s, ticket, id = job.id, fn = std::move(fn)] {
            try {
                json result = commit(*s, ticket, [&](AuditSession& work, Slot& slot) {
                    set_job(id, [](Job& j) { j.status = "running"; });
                    return fn(work, slot);
                });
                set_job(id, [&](Job& j) {
                    j.status = "succeeded";
                    j.result = std::move(result);
                });
            } catch (const Error& e) {
                set_job(id, [&](Job& j) {
                    j.status = "failed";
                    j.error = error_body(to_string(e.kind()), e.what()).at("error");
                });
            } catch (const std::exception& e) {
                set_job(id, [&](Job& j) {
                    j.status = "failed";
                    j.error = error_body("internal", e.what()).at("error");
                });
            }
        });
        return job_json(job);
    }

    json create_session(const json& body) {
        session::SessionOptions o;
        o.model_id = body.value("model_id", o.model_id);
        o.seed = body.value("seed", config.default_seed);
        o.first_level = body.value("first_level", o.first_level);
        o.id = body.value("id", std::string());
        auto s = std::make_shared<Slot>();
        s->session = session::create_session(o);
        s->adapters = config.adapters(o.seed);
        const auto id = s->id = s->session.id.str();
        s->dir = config.data_dir / id;
        std::lock_guard lock(registry_mutex);
        if (sessions.contains(id)) throw ConflictError("session '" + id + "' already exists");
        session::save_session(s->session, s->dir);
        sessions[id] = s;
        return session::to_json(s->session);
    }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    static Handler guarded(Handler fn) {
        return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                reply(res, http_status(e.kind()), error_body(to_string(e.kind()), e.what()));
            } catch (const json::exception& e) {
                reply(res, 400, error_body(to_string(ErrorKind::Validation), e.what()));
            } catch (const std::exception& e) {
                reply(res, 500, error_body("internal", e.what()));
            }
        };
    }

    void get(const std::string& pattern, Handler fn) { http.Get(pattern, guarded(std::move(fn))); }
    void post(const std::string& pattern, Handler fn) { http.Post(pattern, guarded(std::move(fn))); }
    void put(const std::string& pattern, Handler fn) { http.Put(pattern, guarded(std::move(fn))); }
    void patch(const std::string& pattern, Handler fn) { http.Patch(pattern, guarded(std::move(fn))); }
    void del(const std::string& pattern, Handler fn) { http.Delete(pattern, guarded(std::move(fn))); }

    void routes();
    void session_routes();
    void node_routes();
    void guidance_routes();
    void note_routes();
};

void AuditServer::Impl::routes() {
    if (config.static_dir) http.set_mount_point("/ui", config.static_dir->string());

    get("/health", [](const Req&, Res& res) { reply(res, 200, {{"status", "ok"}}); });

    get("/jobs/:id", [this](const Req& req, Res& res) {
        std::lock_guard lock(jobs_mutex);
        auto it = jobs.find(req.path_params.at("id"));
        if (it == jobs.end()) throw NotFoundError("unknown job '" + req.path_params.at("id") + "'");
        reply(res, 200, job_json(it->second));
    });

    session_routes();
    node_routes();
    guidance_routes();
    note_routes();
}

void AuditServer::Impl::session_routes() {
    post("/sessions", [this](const Req& req, Res& res) { reply(res, 201, create_session(parse_body(req))); });

    get("/sessions", [this](const Req&, Res& res) {
        std::vector<SlotPtr> all;
        {
            std::lock_guard lock(registry_mutex);
            for (const auto& [id, s] : sessions) all.push_back(s);
        }
        json out = json::array();
        for (const auto& s : all)
            out.push_back(read(s, [](const AuditSession& a) {
                return json{{"id", a.id.str()}, {"model_id", a.model_id}, {"prompts", a.prompts.size()},
                            {"images", a.images.size()}};
            }));
        reply(res, 200, out);
    });

    get("/sessions/:id", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        reply(res, 200, read(s, [&](const AuditSession& a) {
                  json j = session::to_json(a);
                  j["seq"] = s->seq;
                  return j;
              }));
    });

    post("/sessions/:id/prompts", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto body = parse_body(req);
        auto text = body.at("text").get<std::string>();
        auto n = body.value("n", 1);
        if (trim(text).empty()) throw ValidationError("prompt text must be non-empty");
        if (n < 1) throw ValidationError("number of images must be at least 1");
        reply(res, 202, submit(s, "generation", [this, text, n](AuditSession& a, Slot& slot) {
                  return generation_json(engine::add_prompt(a, slot.adapters, text, n, session::PromptOrigin::User,
                                                            config.engine));
              }));
    });

    get("/sessions/:id/images", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        reply(res, 200, read(s, [](const AuditSession& a) {
                  json out = json::array();
                  for (const auto& [id, img] : a.images) out.push_back(image_json(img));
                  return out;
              }));
    });

    get("/images/:id/blob", [this](const Req& req, Res& res) {
        const auto id = ImageId(req.path_params.at("id"));
        auto s = slot_of_item(id.str());
        auto bytes = read(s, [&](const AuditSession& a) { return a.blob_of(id); });
        res.set_content(reinterpret_cast<const char*>(bytes.data()), bytes.size(), "image/png");
    });

    // Lets the markdown report, which links images/<digest>.png, render in place.
    get("/sessions/:id/images/:file", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto file = req.path_params.at("file");
        auto digest = file.ends_with(".png") ? file.substr(0, file.size() - 4) : file;
        auto bytes = read(s, [&](const AuditSession& a) {
            auto it = a.blobs.find(digest);
            if (it == a.blobs.end()) throw NotFoundError("no image with digest " + digest);
            return it->second;
        });
        res.set_content(reinterpret_cast<const char*>(bytes.data()), bytes.size(), "image/png");
    });

    get("/images/:id/labels", [this](const Req& req, Res& res) {
        const auto id = ImageId(req.path_params.at("id"));
        auto s = slot_of_item(id.str());
        reply(res, 200, read(s, [&](const AuditSession& a) {
                  a.image(id);
                  json out = json::array();
                  for (const auto& l : labeling::image_label_summary(a, id))
                      out.push_back(
                          {{"node_id", l.node_id.str()}, {"path", l.path}, {"value", l.value}, {"share", l.share}});
                  return out;
              }));
    });

    post("/sessions/:id/bookmarks", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto body = parse_body(req);
        const auto& t = body.at("target");
        auto comment = body.value("comment", std::string());
        reply(res, 201, mutate(s, [&](AuditSession& a, Slot&) {
                  session::BookmarkTarget target;
                  if (t.contains("node_id")) {
                      NodeId node(t.at("node_id").get<std::string>());
                      target = session::ChartTarget{node, a.graph.path_names(node),
                                                    labeling::aggregate_distribution(a, node)};
                  } else if (t.contains("image_id")) {
                      target = session::ImageTarget{ImageId(t.at("image_id").get<std::string>())};
                  } else {
                      throw ValidationError("bookmark target needs node_id or image_id");
                  }
                  return json{{"bookmark", session::to_json(session::bookmark_item(a, target, comment))}};
              }));
    });

    get("/sessions/:id/report", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto format = req.has_param("format") ? req.get_param_value("format") : std::string("md");
        if (format != "md" && format != "structured") throw ValidationError("format must be md or structured");
        auto report = read(s, [](const AuditSession& a) { return session::export_report(a, "images"); });
        if (format == "md") {
            res.set_content(report.markdown, "text/markdown; charset=utf-8");
        } else {
            reply(res, 200, report.structured);
        }
    });
}

void AuditServer::Impl::node_routes() {
    post("/sessions/:id/nodes", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto body = parse_body(req);
        NodeId parent(body.at("parent_id").get<std::string>());
        auto spec = node_spec_from(body.at("spec"));
        Mutation fn = [this, parent, spec](AuditSession& a, Slot& slot) {
            auto out = engine::add_criterion(a, slot.adapters, parent, spec, config.engine);
            return json{{"node_id", out.node_id.str()}, {"new_records", out.records.size()}};
        };
        // Attributes are labeled on creation, which is long-running work.
        if (spec.kind == graph::NodeKind::Attribute) {
            reply(res, 202, submit(s, "labeling", std::move(fn)));
        } else {
            reply(res, 201, mutate(s, fn));
        }
    });

    patch("/nodes/:id", [this](const Req& req, Res& res) {
        NodeId id(req.path_params.at("id"));
        auto body = parse_body(req);
        graph::NodePatch p;
        if (body.contains("name")) p.name = body.at("name").get<std::string>();
        if (body.contains("scope")) p.scope = graph::scope_spec_from_json(body.at("scope"));
        if (body.contains("candidate_values"))
            p.candidate_values = body.at("candidate_values").get<std::vector<std::string>>();
        reply(res, 200, mutate(slot_of_item(id.str()), [&](AuditSession& a, Slot&) {
                  auto out = graph::edit_node(a.graph, id, p, a.catalog);
                  return json{{"node_id", id.str()}, {"relabel_required", out.relabel_required}};
              }));
    });

    del("/nodes/:id", [this](const Req& req, Res& res) {
        NodeId id(req.path_params.at("id"));
        reply(res, 200, mutate(slot_of_item(id.str()), [&](AuditSession& a, Slot&) {
                  return json{{"removed", ids_json(labeling::remove_node_cascade(a, id))}};
              }));
    });

    post("/nodes/:id/relabel", [this](const Req& req, Res& res) {
        NodeId id(req.path_params.at("id"));
        auto mode = relabel_mode(parse_body(req).value("mode", std::string("affected_only")));
        auto s = slot_of_item(id.str());
        read(s, [&](const AuditSession& a) { return a.graph.node(id).id; });
        reply(res, 202, submit(s, "relabel", [this, id, mode](AuditSession& a, Slot& slot) {
                  auto sum = labeling::relabel(a, id, mode, *slot.adapters.labeler, config.engine.max_in_flight);
                  return json{{"relabeled", sum.relabeled}, {"retired", sum.retired}, {"touched", ids_json(sum.touched)}};
              }));
    });

    get("/nodes/:id/distribution", [this](const Req& req, Res& res) {
        NodeId id(req.path_params.at("id"));
        reply(res, 200, read(slot_of_item(id.str()), [&](const AuditSession& a) { return distribution_json(a, id); }));
    });

    get("/nodes/:id/segment-images", [this](const Req& req, Res& res) {
        NodeId id(req.path_params.at("id"));
        if (!req.has_param("value")) throw ValidationError("segment-images needs a value");
        auto value = req.get_param_value("value");
        std::optional<PromptId> prompt;
        if (req.has_param("prompt") && !req.get_param_value("prompt").empty())
            prompt = PromptId(req.get_param_value("prompt"));
        reply(res, 200, read(slot_of_item(id.str()), [&](const AuditSession& a) {
                  return json{{"images", ids_json(labeling::images_for_segment(a, id, value, prompt))}};
              }));
    });

    put("/labels/:node_id/:image_id", [this](const Req& req, Res& res) {
        NodeId node(req.path_params.at("node_id"));
        ImageId image(req.path_params.at("image_id"));
        if (session_of(node.str()) != session_of(image.str()))
            throw ValidationError("node and image belong to different sessions");
        auto value = parse_body(req).at("value").get<std::string>();
        reply(res, 200, mutate(slot_of_item(node.str()), [&](AuditSession& a, Slot&) {
                  return json{{"record", session::to_json(labeling::manual_edit_label(a, node, image, value))}};
              }));
    });
}

void AuditServer::Impl::guidance_routes() {
    post("/sessions/:id/keywords", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto cfg = config.guidance;
        cfg.keyword_count = parse_body(req).value("count", cfg.keyword_count);
        cfg.validate();
        reply(res, 200, read(s, [&](const AuditSession& a) {
                  return json{{"keywords", guidance::generate_keywords(a, s->adapters, cfg)}};
              }));
    });

    post("/sessions/:id/suggestions/criterion", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto keywords = parse_body(req).value("keywords", std::vector<std::string>{});
        reply(res, 200, mutate(s, [&](AuditSession& a, Slot& slot) {
                  auto r = guidance::audit_analysis_support(a, slot.adapters, keywords, config.guidance);
                  json out{{"attempts_used", r.attempts_used}, {"suggestion", nullptr}};
                  if (r.suggestion) out["suggestion"] = session::to_json(guidance::find_suggestion(a, *r.suggestion));
                  return out;
              }));
    });

    post("/sessions/:id/suggestions/prompt", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        reply(res, 200, mutate(s, [&](AuditSession& a, Slot& slot) {
                  auto id = guidance::prompt_suggestion(a, slot.adapters);
                  return json{{"suggestion", session::to_json(guidance::find_suggestion(a, id))}};
              }));
    });

    post("/suggestions/:id/apply", [this](const Req& req, Res& res) {
        SuggestionId id(req.path_params.at("id"));
        auto s = slot_of_item(id.str());
        auto body = parse_body(req);
        // Validate the id and pick the batch size up front so a bad request fails fast.
        auto n = read(s, [&](const AuditSession& a) {
            const auto& sug = guidance::find_suggestion(a, id);
            if (const auto* p = std::get_if<session::PromptSubstitution>(&sug))
                return body.value("n", a.prompt(p->source_prompt_id).requested_count);
            return 0;
        });
        reply(res, 202, submit(s, "apply-suggestion", [this, id, n](AuditSession& a, Slot& slot) {
                  if (std::holds_alternative<session::CriterionSuggestion>(guidance::find_suggestion(a, id))) {
                      auto out = guidance::apply_criterion_suggestion(a, slot.adapters, id, config.engine);
                      return json{{"node_id", out.node_id.str()},
                                  {"created_objects", ids_json(out.created_objects)},
                                  {"new_records", out.records.size()}};
                  }
                  auto out = guidance::apply_prompt_substitution(a, slot.adapters, id, n, config.engine);
                  return json{{"prompt_id", out.prompt_id.str()},
                              {"duplicated_branch", out.duplicated_branch ? json(out.duplicated_branch->str()) : json()},
                              {"note", out.note},
                              {"generation", generation_json(out.generation)}};
              }));
    });

    post("/suggestions/:id/dismiss", [this](const Req& req, Res& res) {
        SuggestionId id(req.path_params.at("id"));
        reply(res, 200, mutate(slot_of_item(id.str()), [&](AuditSession& a, Slot&) {
                  guidance::dismiss_suggestion(a, id);
                  return json{{"suggestion", session::to_json(guidance::find_suggestion(a, id))}};
              }));
    });
}

void AuditServer::Impl::note_routes() {
    get("/sessions/:id/notes", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        reply(res, 200, read(s, [](const AuditSession& a) { return json{{"text", a.general_notes}}; }));
    });

    put("/sessions/:id/notes", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto text = parse_body(req).at("text").get<std::string>();
        reply(res, 200, mutate(s, [&](AuditSession& a, Slot&) {
                  session::set_general_notes(a, text);
                  return json{{"text", a.general_notes}};
              }));
    });

    post("/sessions/:id/notes/complete", [this](const Req& req, Res& res) {
        auto s = slot(req.path_params.at("id"));
        auto prefix = parse_body(req).value("prefix", std::string());
        reply(res, 200, read(s, [&](const AuditSession& a) {
                  return json{{"completion", guidance::autocomplete_note(a, s->adapters, prefix)}};
              }));
    });
}

AuditServer::AuditServer(ServerConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

AuditServer::~AuditServer() = default;

int AuditServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    impl_->port = bound;
    return bound;
}

void AuditServer::listen() {
    if (impl_->port < 0) throw ValidationError("bind() before listen()");
    impl_->http.listen_after_bind();
}

void AuditServer::start() {
    if (impl_->port < 0) throw ValidationError("bind() before start()");
    impl_->listener = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
}

void AuditServer::stop() { impl_->stop(); }

}  // namespace sgaudit::service
