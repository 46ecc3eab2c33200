#include "sgaudit/common/error.hpp"
#include "sgaudit/graph/serialize.hpp"
#include "sgaudit/session/store.hpp"

#include "internal.hpp"

#include <algorithm>

namespace sgaudit::session {
namespace {

constexpr int kFormatVersion = 1;

std::string_view to_string(PromptOrigin o) { return o == PromptOrigin::User ? "user" : "suggestion_applied"; }
PromptOrigin prompt_origin_from(const std::string& s) {
    if (s == "user") return PromptOrigin::User;
    if (s == "suggestion_applied") return PromptOrigin::SuggestionApplied;
    throw ValidationError("unknown prompt origin '" + s + "'");
}

SuggestionStatus status_from(const std::string& s) {
    for (auto st : {SuggestionStatus::Proposed, SuggestionStatus::Applied, SuggestionStatus::Dismissed}) {
        if (to_string(st) == s) return st;
    }
    throw ValidationError("unknown suggestion status '" + s + "'");
}

Json pair_json(const std::pair<ImageId, ImageId>& p) { return Json::array({p.first.str(), p.second.str()}); }
std::pair<ImageId, ImageId> pair_from(const Json& j) {
    return {ImageId(j.at(0).get<std::string>()), ImageId(j.at(1).get<std::string>())};
}

Json node_spec_json(const NodeSpec& spec) {
    Json j{{"name", spec.name},
           {"kind", graph::to_string(spec.kind)},
           {"scope", graph::to_json(spec.scope)},
           {"origin", graph::to_string(spec.origin)}};
    j["candidate_values"] = spec.candidate_values ? Json(*spec.candidate_values) : Json(nullptr);
    return j;
}

NodeSpec node_spec_from(const Json& j) {
    NodeSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.kind = graph::node_kind_from(j.value("kind", std::string("attribute")));
    if (j.contains("scope")) spec.scope = graph::scope_spec_from_json(j.at("scope"));
    spec.origin = graph::node_origin_from(j.value("origin", std::string("user_added")));
    if (j.contains("candidate_values") && !j.at("candidate_values").is_null()) {
        spec.candidate_values = j.at("candidate_values").get<std::vector<std::string>>();
    }
    return spec;
}

template <typename T>
Json optional_id(const std::optional<T>& id) {
    return id ? Json(id->str()) : Json(nullptr);
}

template <typename T>
std::optional<T> optional_id_from(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return T(j.at(key).get<std::string>());
}

}  // namespace

std::string_view to_string(SuggestionStatus status) {
    switch (status) {
        case SuggestionStatus::Proposed: return "proposed";
        case SuggestionStatus::Applied: return "applied";
        case SuggestionStatus::Dismissed: return "dismissed";
    }
    return "proposed";
}

Json to_json(const Distribution& d) {
    Json rows = Json::array();
    for (const auto& r : d.rows) {
        Json counts = Json::array();
        for (const auto& c : r.counts) counts.push_back({{"prompt_id", c.prompt_id.str()}, {"count", c.count}});
        rows.push_back({{"value", r.value}, {"counts", std::move(counts)}});
    }
    return {{"node_id", d.node_id.str()}, {"rows", std::move(rows)}, {"total", d.total}};
}

Distribution distribution_from_json(const Json& j) {
    Distribution d;
    d.node_id = NodeId(j.at("node_id").get<std::string>());
    d.total = j.at("total").get<std::uint64_t>();
    for (const auto& r : j.at("rows")) {
        DistributionRow row;
        row.value = r.at("value").get<std::string>();
        for (const auto& c : r.at("counts")) {
            row.counts.push_back({PromptId(c.at("prompt_id").get<std::string>()), c.at("count").get<std::uint64_t>()});
        }
        d.rows.push_back(std::move(row));
    }
    return d;
}

Json to_json(const Bookmark& b) {
    Json j{{"id", b.id.str()}, {"comment", b.comment}, {"created_at", b.created_at}};
    if (const auto* img = std::get_if<ImageTarget>(&b.target)) {
        j["target"] = {{"type", "image"}, {"image_id", img->image_id.str()}};
    } else {
        const auto& c = std::get<ChartTarget>(b.target);
        j["target"] = {{"type", "chart"},
                       {"node_id", c.node_id.str()},
                       {"node_path", c.node_path},
                       {"snapshot", to_json(c.snapshot)}};
    }
    return j;
}

Bookmark bookmark_from_json(const Json& j) {
    Bookmark b;
    b.id = BookmarkId(j.at("id").get<std::string>());
    b.comment = j.at("comment").get<std::string>();
    b.created_at = j.at("created_at").get<Timestamp>();
    const auto& t = j.at("target");
    auto type = t.at("type").get<std::string>();
    if (type == "image") {
        b.target = ImageTarget{ImageId(t.at("image_id").get<std::string>())};
    } else if (type == "chart") {
        b.target = ChartTarget{NodeId(t.at("node_id").get<std::string>()),
                               t.at("node_path").get<std::vector<std::string>>(),
                               distribution_from_json(t.at("snapshot"))};
    } else {
        throw ValidationError("unknown bookmark target '" + type + "'");
    }
    return b;
}

Json to_json(const Suggestion& s) {
    if (const auto* c = std::get_if<CriterionSuggestion>(&s)) {
        return {{"type", "criterion"},
                {"id", c->id.str()},
                {"image_pair", pair_json(c->image_pair)},
                {"node_spec", node_spec_json(c->node_spec)},
                {"parent_path", c->parent_path},
                {"rationale", c->rationale},
                {"confidence", c->confidence},
                {"status", to_string(c->status)},
                {"attempts_used", c->attempts_used},
                {"keywords", c->keywords},
                {"applied_node", optional_id(c->applied_node)}};
    }
    const auto& p = std::get<PromptSubstitution>(s);
    return {{"type", "prompt"},
            {"id", p.id.str()},
            {"source_prompt_id", p.source_prompt_id.str()},
            {"replace_span", p.replace_span},
            {"replacement", p.replacement},
            {"status", to_string(p.status)},
            {"applied_prompt", optional_id(p.applied_prompt)},
            {"duplicated_branch", optional_id(p.duplicated_branch)}};
}

Suggestion suggestion_from_json(const Json& j) {
    auto type = j.at("type").get<std::string>();
    if (type == "criterion") {
        CriterionSuggestion c;
        c.id = SuggestionId(j.at("id").get<std::string>());
        c.image_pair = pair_from(j.at("image_pair"));
        c.node_spec = node_spec_from(j.at("node_spec"));
        c.parent_path = j.at("parent_path").get<std::vector<std::string>>();
        c.rationale = j.at("rationale").get<std::string>();
        c.confidence = j.at("confidence").get<double>();
        c.status = status_from(j.at("status").get<std::string>());
        c.attempts_used = j.at("attempts_used").get<int>();
        c.keywords = j.value("keywords", std::vector<std::string>{});
        c.applied_node = optional_id_from<NodeId>(j, "applied_node");
        return c;
    }
    if (type == "prompt") {
        PromptSubstitution p;
        p.id = SuggestionId(j.at("id").get<std::string>());
        p.source_prompt_id = PromptId(j.at("source_prompt_id").get<std::string>());
        p.replace_span = j.at("replace_span").get<std::string>();
        p.replacement = j.at("replacement").get<std::string>();
        p.status = status_from(j.at("status").get<std::string>());
        p.applied_prompt = optional_id_from<PromptId>(j, "applied_prompt");
        p.duplicated_branch = optional_id_from<NodeId>(j, "duplicated_branch");
        return p;
    }
    throw ValidationError("unknown suggestion type '" + type + "'");
}

Json to_json(const LabelRecord& r) {
    Json j{{"node_id", r.node_id.str()},
           {"image_id", r.image_id.str()},
           {"value", r.value},
           {"labeled_at", r.labeled_at},
           {"status", r.status == LabelStatus::Ok ? "ok" : "error"},
           {"origin", r.origin == LabelOrigin::Auto ? "auto" : "manual"},
           {"retired", r.retired}};
    if (r.status == LabelStatus::Error) j["error"] = r.error;
    return j;
}

namespace {

LabelRecord record_from(const Json& j) {
    LabelRecord r;
    r.node_id = NodeId(j.at("node_id").get<std::string>());
    r.image_id = ImageId(j.at("image_id").get<std::string>());
    r.value = j.at("value").get<std::string>();
    r.labeled_at = j.at("labeled_at").get<std::uint64_t>();
    r.status = j.at("status").get<std::string>() == "ok" ? LabelStatus::Ok : LabelStatus::Error;
    r.origin = j.at("origin").get<std::string>() == "manual" ? LabelOrigin::Manual : LabelOrigin::Auto;
    r.retired = j.at("retired").get<bool>();
    r.error = j.value("error", std::string());
    return r;
}

}  // namespace

Json to_json(const AuditSession& s) {
    Json prompts = Json::array();
    for (const auto& p : s.prompts) {
        prompts.push_back({{"id", p.id.str()},
                           {"text", p.text},
                           {"color_index", p.color_index},
                           {"color", palette_color(p.color_index)},
                           {"requested_count", p.requested_count},
                           {"origin", to_string(p.origin)},
                           {"sub_seed", p.sub_seed}});
    }
    Json images = Json::array();
    for (const auto& [id, img] : s.images) {
        images.push_back({{"id", id.str()},
                          {"prompt_id", img.prompt_id.str()},
                          {"index", img.index},
                          {"digest", img.blob.digest},
                          {"path", img.blob.path},
                          {"width", img.width},
                          {"height", img.height}});
    }
    Json records = Json::array();
    for (const auto& r : s.label_records) records.push_back(to_json(r));
    Json bookmarks = Json::array();
    for (const auto& b : s.bookmarks) bookmarks.push_back(to_json(b));
    Json suggestions = Json::array();
    for (const auto& sg : s.suggestion_history) suggestions.push_back(to_json(sg));
    Json attempts = Json::array();
    for (const auto& a : s.analysis_log) {
        attempts.push_back({{"request", a.request},
                            {"attempt", a.attempt},
                            {"image_pair", pair_json(a.image_pair)},
                            {"confidence", a.confidence},
                            {"outcome", a.outcome}});
    }
    Json sample = Json::array();
    for (const auto& i : s.graph_sample) sample.push_back(i.str());
    return {{"format_version", kFormatVersion},
            {"id", s.id.str()},
            {"created_at", s.created_at},
            {"model_id", s.model_id},
            {"seed", s.seed},
            {"prompts", std::move(prompts)},
            {"images", std::move(images)},
            {"graph", graph::to_json(s.graph)},
            {"graph_built", s.graph_built},
            {"graph_sample", std::move(sample)},
            {"label_records", std::move(records)},
            {"bookmarks", std::move(bookmarks)},
            {"general_notes", s.general_notes},
            {"suggestion_history", std::move(suggestions)},
            {"analysis_log", std::move(attempts)},
            {"counters",
             {{"prompt", s.counters.prompt},
              {"image", s.counters.image},
              {"bookmark", s.counters.bookmark},
              {"suggestion", s.counters.suggestion},
              {"label_seq", s.counters.label_seq},
              {"analysis_request", s.counters.analysis_request}}}};
}

AuditSession session_from_json(const Json& j) {
    try {
        if (j.at("format_version").get<int>() != kFormatVersion) {
            throw ValidationError("unsupported session format version");
        }
        AuditSession s;
        s.id = SessionId(j.at("id").get<std::string>());
        s.created_at = j.at("created_at").get<Timestamp>();
        s.model_id = j.at("model_id").get<std::string>();
        s.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& p : j.at("prompts")) {
            s.prompts.push_back({PromptId(p.at("id").get<std::string>()), p.at("text").get<std::string>(),
                                 p.at("color_index").get<int>(), p.at("requested_count").get<int>(),
                                 prompt_origin_from(p.at("origin").get<std::string>()),
                                 p.at("sub_seed").get<std::uint64_t>()});
        }
        for (const auto& i : j.at("images")) {
            GeneratedImage img;
            img.id = ImageId(i.at("id").get<std::string>());
            img.prompt_id = PromptId(i.at("prompt_id").get<std::string>());
            img.index = i.at("index").get<int>();
            img.blob = {i.at("digest").get<std::string>(), i.at("path").get<std::string>()};
            img.width = i.at("width").get<std::uint32_t>();
            img.height = i.at("height").get<std::uint32_t>();
            if (!s.images.emplace(img.id, img).second) throw ValidationError("duplicate image id " + img.id.str());
        }
        for (const auto& [id, img] : s.images) {
            bool known = std::any_of(s.prompts.begin(), s.prompts.end(),
                                     [&](const Prompt& p) { return p.id == img.prompt_id; });
            if (!known) throw ValidationError("image " + id.str() + " references an unknown prompt");
        }
        s.graph = graph::graph_from_json(j.at("graph"));
        s.graph_built = j.at("graph_built").get<bool>();
        for (const auto& i : j.at("graph_sample")) s.graph_sample.emplace_back(i.get<std::string>());
        for (const auto& r : j.at("label_records")) s.label_records.push_back(record_from(r));
        for (const auto& b : j.at("bookmarks")) s.bookmarks.push_back(bookmark_from_json(b));
        s.general_notes = j.at("general_notes").get<std::string>();
        for (const auto& sg : j.at("suggestion_history")) s.suggestion_history.push_back(suggestion_from_json(sg));
        for (const auto& a : j.at("analysis_log")) {
            s.analysis_log.push_back({a.at("request").get<std::uint64_t>(), a.at("attempt").get<int>(),
                                      pair_from(a.at("image_pair")), a.at("confidence").get<double>(),
                                      a.at("outcome").get<std::string>()});
        }
        const auto& c = j.at("counters");
        s.counters = {c.at("prompt").get<std::uint64_t>(),     c.at("image").get<std::uint64_t>(),
                      c.at("bookmark").get<std::uint64_t>(),   c.at("suggestion").get<std::uint64_t>(),
                      c.at("label_seq").get<std::uint64_t>(),  c.at("analysis_request").get<std::uint64_t>()};
        detail::rebuild_catalog(s);
        return s;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("corrupt session state: ") + e.what());
    }
}

}  // namespace sgaudit::session
