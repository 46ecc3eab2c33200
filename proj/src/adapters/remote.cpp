#include "sgaudit/adapters/remote.hpp"

#include "sgaudit/adapters/validate.hpp"
#include "sgaudit/common/error.hpp"
#include "sgaudit/common/log.hpp"
#include "sgaudit/common/png.hpp"
#include "sgaudit/common/text.hpp"
#include "sgaudit/graph/serialize.hpp"
#include "sgaudit/session/store.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef SGAUDIT_DEFAULT_TEMPLATE_DIR
#define SGAUDIT_DEFAULT_TEMPLATE_DIR "templates"
#endif

namespace sgaudit::adapters {

using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback = {}) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::string env_name(const std::string& capability) {
    std::string out = "SGAUDIT_REMOTE_";
    for (char c : capability) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out + "_URL";
}

/// Splits "http://host:port/a/b" into ("http://host:port", "/a/b").
std::pair<std::string, std::string> split_url(const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ValidationError("adapter URL needs a scheme: " + url);
    auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

/// Runs `fn` and turns JSON access errors into SchemaError.
template <typename Fn>
auto parse_response(const std::string& capability, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw SchemaError(capability + " response is malformed: " + e.what());
    }
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json prompts_json(const std::vector<PromptInfo>& prompts) {
    json out = json::array();
    for (const auto& p : prompts) out.push_back({{"id", p.id.str()}, {"text", p.text}});
    return out;
}

json image_json(const ImageRef& image) {
    return {{"id", image.id.str()}, {"prompt", image.prompt_text}, {"image", base64_encode(image.blob)}};
}

graph::NodeKind kind_from_wire(const json& j) {
    auto k = j.value("kind", std::string("object"));
    if (k == "object") return graph::NodeKind::Object;
    if (k == "attribute") return graph::NodeKind::Attribute;
    throw SchemaError("unknown node kind '" + k + "'");
}

void attach_wire(SceneGraph& g, const NodeId& parent, const json& j) {
    if (!j.is_object() || !j.contains("name") || !j.at("name").is_string())
        throw SchemaError("extracted node needs a string name");
    auto name = trim(j.at("name").get<std::string>());
    if (name.empty()) throw SchemaError("extracted node has an empty name");
    if (g.node(parent).is_attribute()) throw SchemaError("attribute '" + g.node(parent).name + "' cannot have children");
    if (g.find_child(parent, name)) throw SchemaError("duplicate sibling name '" + name + "'");
    graph::GraphNode node;
    node.id = g.allocate_id();
    node.name = name;
    node.kind = kind_from_wire(j);
    node.frequency = 1;
    node.origin = graph::NodeOrigin::Extracted;
    if (node.is_attribute() && j.contains("candidate_values") && !j.at("candidate_values").is_null()) {
        try {
            node.candidate_values = graph::validate_candidates(j.at("candidate_values").get<std::vector<std::string>>());
        } catch (const ValidationError& e) {
            throw SchemaError(std::string("extracted candidate values: ") + e.what());
        }
    }
    const auto& id = g.attach(parent, std::move(node));
    for (const auto& child : j.value("children", json::array())) attach_wire(g, id, child);
}

class RemoteGenerator final : public ImageGenerator {
public:
    RemoteGenerator(std::shared_ptr<RemoteClient> c, std::shared_ptr<TemplateSet> t)
        : client_(std::move(c)), templates_(std::move(t)) {}

    std::vector<Bytes> generate(const std::string& prompt_text, int n, std::uint64_t sub_seed) override {
        auto res = client_->post("generate", {{"instruction", templates_->render("generate", {{"prompt", prompt_text}})},
                                              {"prompt", prompt_text},
                                              {"n", n},
                                              {"seed", sub_seed}});
        return parse_response("generate", [&] {
            std::vector<Bytes> out;
            for (const auto& b64 : res.at("images")) {
                Bytes blob;
                try {
                    blob = base64_decode(b64.get<std::string>());
                } catch (const ValidationError&) {
                    throw SchemaError("generated image is not valid base64");
                }
                if (!png_dimensions(blob)) throw SchemaError("generated image is not a PNG");
                out.push_back(std::move(blob));
            }
            if (out.size() != static_cast<std::size_t>(n))
                throw SchemaError("asked for " + std::to_string(n) + " images, got " + std::to_string(out.size()));
            return out;
        });
    }

private:
    std::shared_ptr<RemoteClient> client_;
    std::shared_ptr<TemplateSet> templates_;
};

class RemoteExtractor final : public GraphExtractor {
public:
    RemoteExtractor(std::shared_ptr<RemoteClient> c, std::shared_ptr<TemplateSet> t)
        : client_(std::move(c)), templates_(std::move(t)) {}

    SceneGraph extract(std::span<const std::uint8_t> blob, const std::vector<std::string>& first_level) override {
        auto res = client_->post("extract",
                                 {{"instruction", templates_->render("extract", {{"first_level", join(first_level, ", ")}})},
                                  {"image", base64_encode(blob)},
                                  {"digest", sha256_hex(blob)},
                                  {"first_level", first_level}});
        return parse_response("extract", [&] { return graph_from_wire(res.at("graph"), first_level); });
    }

private:
    std::shared_ptr<RemoteClient> client_;
    std::shared_ptr<TemplateSet> templates_;
};

class RemoteLabeler final : public Labeler {
public:
    RemoteLabeler(std::shared_ptr<RemoteClient> c, std::shared_ptr<TemplateSet> t)
        : client_(std::move(c)), templates_(std::move(t)) {}

    std::string label(const ImageRef& image, const PartialSchema& schema) override {
        std::string choices = schema.candidate_values ? join(*schema.candidate_values, ", ") : "";
        json body{{"instruction", templates_->render("label", {{"path", schema.path_string()}, {"candidates", choices}})},
                  {"image_id", image.id.str()},
                  {"image", base64_encode(image.blob)},
                  {"prompt", image.prompt_text},
                  {"schema", graph::to_json(schema)},
                  {"candidate_values", schema.candidate_values ? json(*schema.candidate_values) : json(nullptr)}};
        auto res = client_->post("label", std::move(body));
        return parse_response("label", [&] { return res.at("label").get<std::string>(); });
    }

private:
    std::shared_ptr<RemoteClient> client_;
    std::shared_ptr<TemplateSet> templates_;
};

class RemoteCriterionSuggester final : public CriterionSuggester {
public:
    RemoteCriterionSuggester(std::shared_ptr<RemoteClient> c, std::shared_ptr<TemplateSet> t)
        : client_(std::move(c)), templates_(std::move(t)) {}

    std::vector<std::string> keywords(const GraphSummary& graph, std::size_t count) override {
        auto res = client_->post("suggest-criterion",
                                 {{"task", "keywords"},
                                  {"instruction", templates_->render("keywords", {{"count", std::to_string(count)}})},
                                  {"graph", to_wire(graph)},
                                  {"count", count}});
        return parse_response("suggest-criterion", [&] {
            std::vector<std::string> out;
            for (const auto& k : res.at("keywords")) {
                auto n = normalize(k.get<std::string>());
                if (!n.empty() && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
            }
            if (out.size() > count) out.resize(count);
            return out;
        });
    }

    CriterionProposal suggest(const CriterionRequest& request) override {
        auto res = client_->post(
            "suggest-criterion",
            {{"task", "criterion"},
             {"instruction", templates_->render("suggest_criterion", {{"keywords", join(request.keywords, ", ")}})},
             {"images", json::array({image_json(request.first), image_json(request.second)})},
             {"keywords", request.keywords},
             {"graph", to_wire(request.graph)}});
        auto p = parse_response("suggest-criterion", [&] {
            CriterionProposal p;
            p.name = res.at("name").get<std::string>();
            if (res.contains("candidate_values") && !res.at("candidate_values").is_null())
                p.candidate_values = res.at("candidate_values").get<std::vector<std::string>>();
            p.parent_path = res.at("parent_path").get<std::vector<std::string>>();
            p.rationale = res.value("rationale", std::string());
            p.confidence = res.at("confidence").get<double>();
            return p;
        });
        check_criterion_proposal(p, request.graph);
        return p;
    }

private:
    std::shared_ptr<RemoteClient> client_;
    std::shared_ptr<TemplateSet> templates_;
};

class RemotePromptSuggester final : public PromptSuggester {
public:
    RemotePromptSuggester(std::shared_ptr<RemoteClient> c, std::shared_ptr<TemplateSet> t)
        : client_(std::move(c)), templates_(std::move(t)) {}

    PromptProposal suggest(const std::vector<PromptInfo>& prompts, const GraphSummary& graph,
                           const std::vector<SubstitutionTriple>& history) override {
        json hist = json::array();
        for (const auto& h : history)
            hist.push_back({{"source_prompt_id", h.source_prompt_id.str()},
                            {"replace_span", h.replace_span},
                            {"replacement", h.replacement}});
        auto res = client_->post("suggest-prompt", {{"instruction", templates_->render("suggest_prompt", {})},
                                                    {"prompts", prompts_json(prompts)},
                                                    {"graph", to_wire(graph)},
                                                    {"history", hist}});
        auto p = parse_response("suggest-prompt", [&] {
            return PromptProposal{PromptId(res.at("source_prompt_id").get<std::string>()),
                                  res.at("replace_span").get<std::string>(), res.at("replacement").get<std::string>()};
        });
        check_prompt_proposal(p, prompts);
        return p;
    }

private:
    std::shared_ptr<RemoteClient> client_;
    std::shared_ptr<TemplateSet> templates_;
};

class RemoteNoteCompleter final : public NoteCompleter {
public:
    RemoteNoteCompleter(std::shared_ptr<RemoteClient> c, std::shared_ptr<TemplateSet> t)
        : client_(std::move(c)), templates_(std::move(t)) {}

    std::string complete(const NoteContext& context) override {
        json bookmarks = json::array();
        for (const auto& b : context.bookmarks) bookmarks.push_back(session::to_json(b));
        try {
            auto res = client_->post("complete", {{"instruction", templates_->render("complete", {})},
                                                  {"prompts", prompts_json(context.prompts)},
                                                  {"bookmarks", bookmarks},
                                                  {"notes", context.existing_notes},
                                                  {"prefix", context.cursor_prefix}});
            return parse_response("complete", [&] { return res.at("completion").get<std::string>(); });
        } catch (const Error& e) {
            log_warning(std::string("note completion failed: ") + e.what());
            return {};
        }
    }

private:
    std::shared_ptr<RemoteClient> client_;
    std::shared_ptr<TemplateSet> templates_;
};

}  // namespace

RemoteConfig RemoteConfig::from_env() {
    RemoteConfig c;
    c.base_url = env_or("SGAUDIT_REMOTE_URL");
    for (const auto& cap : kCapabilities)
        if (auto url = env_or(env_name(cap).c_str()); !url.empty()) c.endpoints[cap] = url;
    c.bearer_token = env_or("SGAUDIT_REMOTE_TOKEN");
    if (auto t = env_or("SGAUDIT_REMOTE_TIMEOUT_MS"); !t.empty()) c.timeout_ms = std::stoi(t);
    c.template_dir = env_or("SGAUDIT_TEMPLATE_DIR", default_template_dir().string());
    return c;
}

std::string RemoteConfig::url_for(const std::string& capability) const {
    if (auto it = endpoints.find(capability); it != endpoints.end()) return it->second;
    if (base_url.empty()) throw ValidationError("no endpoint configured for " + capability);
    auto base = base_url;
    while (!base.empty() && base.back() == '/') base.pop_back();
    return base + "/" + capability;
}

std::filesystem::path default_template_dir() { return SGAUDIT_DEFAULT_TEMPLATE_DIR; }

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    TemplateSet t;
    for (const char* name :
         {"generate", "extract", "label", "suggest_criterion", "keywords", "suggest_prompt", "complete"})
        t.templates_[name] = read_file(dir / (std::string(name) + ".txt"));
    return t;
}

std::string TemplateSet::render(const std::string& name, const std::map<std::string, std::string>& values) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw NotFoundError("no template named " + name);
    std::string out = it->second;
    for (const auto& [key, value] : values) {
        const std::string marker = "{{" + key + "}}";
        for (auto pos = out.find(marker); pos != std::string::npos; pos = out.find(marker, pos + value.size()))
            out.replace(pos, marker.size(), value);
    }
    return out;
}

RemoteClient::RemoteClient(RemoteConfig config) : config_(std::move(config)) {}

json RemoteClient::post(const std::string& capability, json body) const {
    auto [origin, path] = split_url(config_.url_for(capability));
    httplib::Client client(origin);
    const auto sec = config_.timeout_ms / 1000;
    const auto usec = (config_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    if (!config_.bearer_token.empty()) client.set_bearer_token_auth(config_.bearer_token);

    body["schema_version"] = kProtocolVersion;
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
        auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read)
            throw TimeoutError(capability + " endpoint timed out (" + httplib::to_string(err) + ")");
        throw TransportError(capability + " endpoint unreachable at " + origin + " (" + httplib::to_string(err) + ")");
    }
    if (res->status >= 500 || res->status == 429)
        throw TransportError(capability + " endpoint failed with HTTP " + std::to_string(res->status));
    if (res->status == 408) throw TimeoutError(capability + " endpoint timed out (HTTP 408)");
    if (res->status != 200)
        throw SchemaError(capability + " endpoint rejected the request with HTTP " + std::to_string(res->status));

    json doc;
    try {
        doc = json::parse(res->body);
    } catch (const json::exception&) {
        throw SchemaError(capability + " response is not JSON");
    }
    if (!doc.is_object() || doc.value("schema_version", -1) != kProtocolVersion)
        throw SchemaError(capability + " response has an unsupported schema_version");
    return doc;
}

SceneGraph graph_from_wire(const json& root, const std::vector<std::string>& first_level) {
    return parse_response("extract", [&] {
        if (!root.is_object()) throw SchemaError("extracted graph must be an object");
        auto g = SceneGraph::create(first_level);
        for (const auto& id : g.preorder()) g.node_mut(id).frequency = 1;
        for (const auto& top : root.value("children", json::array())) {
            auto name = top.at("name").get<std::string>();
            auto fl = g.find_child(g.root(), name);
            if (!fl) throw SchemaError("'" + name + "' is not a first-level node");
            if (kind_from_wire(top) != graph::NodeKind::Object) throw SchemaError("first-level nodes are objects");
            for (const auto& child : top.value("children", json::array())) attach_wire(g, *fl, child);
        }
        check_extracted_graph(g, first_level);
        return g;
    });
}

json to_wire(const GraphSummary& summary) {
    return {{"first_level", summary.first_level},
            {"objects", summary.object_paths},
            {"attributes", summary.attribute_paths}};
}

AdapterSet make_remote_adapters(const RemoteConfig& config) {
    auto client = std::make_shared<RemoteClient>(config);
    auto templates = std::make_shared<TemplateSet>(TemplateSet::load(config.template_dir));
    AdapterSet set;
    set.mode = AdapterMode::Remote;
    set.generator = std::make_shared<RemoteGenerator>(client, templates);
    set.graph_extractor = std::make_shared<RemoteExtractor>(client, templates);
    set.labeler = std::make_shared<RemoteLabeler>(client, templates);
    set.criterion_suggester = std::make_shared<RemoteCriterionSuggester>(client, templates);
    set.prompt_suggester = std::make_shared<RemotePromptSuggester>(client, templates);
    set.note_completer = std::make_shared<RemoteNoteCompleter>(client, templates);
    return set;
}

}  // namespace sgaudit::adapters
