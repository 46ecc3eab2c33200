#include "sgaudit/graph/serialize.hpp"

#include "sgaudit/common/error.hpp"

namespace sgaudit::graph {

std::string_view to_string(NodeKind kind) { return kind == NodeKind::Object ? "object" : "attribute"; }

std::string_view to_string(NodeOrigin origin) {
    switch (origin) {
        case NodeOrigin::Extracted: return "extracted";
        case NodeOrigin::UserAdded: return "user_added";
        case NodeOrigin::SuggestionApplied: return "suggestion_applied";
        case NodeOrigin::Duplicated: return "duplicated";
    }
    return "extracted";
}

std::string_view to_string(SelectorKind kind) {
    switch (kind) {
        case SelectorKind::AllPrompts: return "all_prompts";
        case SelectorKind::Prompts: return "prompts";
        case SelectorKind::AllImages: return "all_images";
        case SelectorKind::Images: return "images";
    }
    return "all_images";
}

std::string_view to_string(Lifecycle lifecycle) {
    return lifecycle == Lifecycle::Fixed ? "fixed" : "auto_extended";
}

NodeKind node_kind_from(std::string_view text) {
    if (text == "object") return NodeKind::Object;
    if (text == "attribute") return NodeKind::Attribute;
    throw ValidationError("unknown node kind '" + std::string(text) + "'");
}

NodeOrigin node_origin_from(std::string_view text) {
    for (auto o : {NodeOrigin::Extracted, NodeOrigin::UserAdded, NodeOrigin::SuggestionApplied,
                   NodeOrigin::Duplicated}) {
        if (to_string(o) == text) return o;
    }
    throw ValidationError("unknown node origin '" + std::string(text) + "'");
}

SelectorKind selector_kind_from(std::string_view text) {
    for (auto k : {SelectorKind::AllPrompts, SelectorKind::Prompts, SelectorKind::AllImages,
                   SelectorKind::Images}) {
        if (to_string(k) == text) return k;
    }
    throw ValidationError("unknown scope selector '" + std::string(text) + "'");
}

Lifecycle lifecycle_from(std::string_view text) {
    if (text == "fixed") return Lifecycle::Fixed;
    if (text == "auto_extended") return Lifecycle::AutoExtended;
    throw ValidationError("unknown scope type '" + std::string(text) + "'");
}

namespace {

template <typename IdT>
Json ids_to_json(const std::set<IdT>& ids) {
    Json arr = Json::array();
    for (const auto& i : ids) arr.push_back(i.str());
    return arr;
}

template <typename IdT>
std::set<IdT> ids_from_json(const Json& j, const char* key) {
    std::set<IdT> out;
    if (j.contains(key)) {
        for (const auto& v : j.at(key)) out.insert(IdT(v.get<std::string>()));
    }
    return out;
}

Json selector_json(const Selector& s) {
    Json j{{"selector", to_string(s.kind)}};
    if (s.kind == SelectorKind::Prompts) j["prompts"] = ids_to_json(s.prompts);
    if (s.kind == SelectorKind::Images) j["images"] = ids_to_json(s.images);
    return j;
}

Selector selector_from(const Json& j) {
    Selector s;
    s.kind = selector_kind_from(j.value("selector", std::string("all_images")));
    if (s.kind == SelectorKind::Prompts) s.prompts = ids_from_json<PromptId>(j, "prompts");
    if (s.kind == SelectorKind::Images) s.images = ids_from_json<ImageId>(j, "images");
    return s;
}

Json node_json(const SceneGraph& g, const NodeId& id) {
    const auto& n = g.node(id);
    Json j{{"id", n.id.str()},
           {"name", n.name},
           {"kind", to_string(n.kind)},
           {"frequency", n.frequency},
           {"origin", to_string(n.origin)},
           {"scope", to_json(n.scope)}};
    if (n.candidate_values) j["candidate_values"] = *n.candidate_values;
    Json kids = Json::array();
    for (const auto& c : n.children) kids.push_back(node_json(g, c));
    j["children"] = std::move(kids);
    return j;
}

GraphNode node_from(const Json& j) {
    GraphNode n;
    n.id = NodeId(j.at("id").get<std::string>());
    n.name = j.at("name").get<std::string>();
    n.kind = node_kind_from(j.at("kind").get<std::string>());
    n.frequency = j.value("frequency", std::uint64_t{0});
    n.origin = node_origin_from(j.value("origin", std::string("extracted")));
    n.scope = j.contains("scope") ? scope_from_json(j.at("scope")) : Scope::all_images_auto();
    if (j.contains("candidate_values")) n.candidate_values = j.at("candidate_values").get<std::vector<std::string>>();
    return n;
}

void attach_children(SceneGraph& g, const NodeId& parent, const Json& j) {
    if (!j.contains("children")) return;
    for (const auto& c : j.at("children")) {
        const NodeId& id = g.attach(parent, node_from(c));
        attach_children(g, id, c);
    }
}

}  // namespace

Json to_json(const Scope& scope) {
    Json j = selector_json(scope.selector);
    j["lifecycle"] = to_string(scope.lifecycle);
    if (scope.lifecycle == Lifecycle::Fixed) j["frozen"] = ids_to_json(scope.frozen);
    return j;
}

Scope scope_from_json(const Json& j) {
    Scope s;
    s.selector = selector_from(j);
    s.lifecycle = lifecycle_from(j.value("lifecycle", std::string("auto_extended")));
    if (s.lifecycle == Lifecycle::Fixed) s.frozen = ids_from_json<ImageId>(j, "frozen");
    return s;
}

Json to_json(const ScopeSpec& spec) {
    Json j = selector_json(spec.selector);
    j["lifecycle"] = to_string(spec.lifecycle);
    return j;
}

ScopeSpec scope_spec_from_json(const Json& j) {
    return {selector_from(j), lifecycle_from(j.value("lifecycle", std::string("auto_extended")))};
}

Json to_json(const SceneGraph& graph) {
    return Json{{"first_level", graph.first_level()},
                {"id_prefix", graph.id_prefix()},
                {"next_id", graph.next_id()},
                {"root", node_json(graph, graph.root())}};
}

SceneGraph graph_from_json(const Json& j) {
    try {
        const auto& root_json = j.at("root");
        SceneGraph g = SceneGraph::restore(j.at("first_level").get<std::vector<std::string>>(),
                                           j.value("id_prefix", std::string()),
                                           j.value("next_id", std::uint64_t{1}), node_from(root_json));
        attach_children(g, g.root(), root_json);
        g.validate();
        return g;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed graph document: ") + e.what());
    }
}

Json to_json(const PartialSchema& schema) {
    Json path = Json::array();
    for (const auto& s : schema.path) path.push_back({{"name", s.name}, {"kind", to_string(s.kind)}});
    Json j{{"path", std::move(path)}, {"target_node_id", schema.target_node_id.str()}};
    j["candidate_values"] = schema.candidate_values ? Json(*schema.candidate_values) : Json(nullptr);
    return j;
}

std::string canonical(const SceneGraph& graph) { return to_json(graph).dump(2); }

}  // namespace sgaudit::graph
