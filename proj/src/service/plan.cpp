#include "sgaudit/service/plan.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/common/text.hpp"
#include "sgaudit/graph/serialize.hpp"
#include "sgaudit/session/store.hpp"

#include <fstream>
#include <sstream>

namespace sgaudit::service {

using nlohmann::json;
using session::AuditSession;

namespace {

graph::SelectorKind selector_kind(const std::string& s) {
    auto kind = graph::selector_kind_from(s);
    if (kind == graph::SelectorKind::Images) throw ValidationError("plan scopes cannot name images");
    return kind;
}

labeling::RelabelMode relabel_mode(const std::string& s) {
    if (s == "all") return labeling::RelabelMode::All;
    if (s == "affected_only") return labeling::RelabelMode::AffectedOnly;
    throw ValidationError("relabel mode must be all or affected_only, not '" + s + "'");
}

PlanStep parse_step(const json& j) {
    const auto op = j.at("op").get<std::string>();
    if (op == "add_prompt") return step::AddPrompt{j.at("text").get<std::string>(), j.value("n", 1)};
    if (op == "add_node") {
        step::AddNode s;
        s.parent_path = j.at("parent_path").get<std::vector<std::string>>();
        s.name = j.at("name").get<std::string>();
        s.kind = graph::node_kind_from(j.value("kind", std::string("attribute")));
        if (j.contains("candidate_values")) s.candidate_values = j.at("candidate_values").get<std::vector<std::string>>();
        if (j.contains("scope")) {
            const auto& sc = j.at("scope");
            s.scope.selector = selector_kind(sc.value("selector", std::string("all_images")));
            s.scope.prompts = sc.value("prompts", std::vector<int>{});
            s.scope.lifecycle = graph::lifecycle_from(sc.value("lifecycle", std::string("auto_extended")));
        }
        return s;
    }
    if (op == "relabel")
        return step::Relabel{j.at("node_path").get<std::vector<std::string>>(),
                             relabel_mode(j.value("mode", std::string("affected_only")))};
    if (op == "request_analysis_support")
        return step::RequestAnalysisSupport{j.value("keywords", std::vector<std::string>{})};
    if (op == "apply_suggestion") return step::ApplySuggestion{j.at("ordinal").get<int>()};
    if (op == "request_prompt_suggestion") return step::RequestPromptSuggestion{};
    if (op == "apply_prompt_suggestion")
        return step::ApplyPromptSuggestion{j.at("ordinal").get<int>(), j.at("n").get<int>()};
    if (op == "bookmark") {
        step::Bookmark b;
        b.comment = j.value("comment", std::string());
        const auto& t = j.at("target");
        if (t.contains("chart")) b.chart = t.at("chart").get<std::vector<std::string>>();
        else if (t.contains("image"))
            b.image = std::pair{t.at("image").at("prompt").get<int>(), t.at("image").value("index", 0)};
        else throw ValidationError("bookmark target needs chart or image");
        return b;
    }
    if (op == "set_notes") return step::SetNotes{j.at("text").get<std::string>()};
    if (op == "export_report") return step::ExportReport{};
    throw ValidationError("unknown op '" + op + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

NodeId node_at(const AuditSession& s, const std::vector<std::string>& path) {
    auto id = s.graph.find_path(path);
    if (!id) throw NotFoundError("no node at " + join(path, "/"));
    return *id;
}

const session::Prompt& prompt_ordinal(const AuditSession& s, int ordinal) {
    if (ordinal < 1 || static_cast<std::size_t>(ordinal) > s.prompts.size())
        throw NotFoundError("no prompt #" + std::to_string(ordinal));
    return s.prompts[static_cast<std::size_t>(ordinal - 1)];
}

template <typename T>
SuggestionId suggestion_ordinal(const AuditSession& s, int ordinal, const char* what) {
    int seen = 0;
    for (const auto& sug : s.suggestion_history)
        if (const auto* x = std::get_if<T>(&sug); x && ++seen == ordinal) return x->id;
    throw NotFoundError(std::string("no ") + what + " #" + std::to_string(ordinal));
}

class Runner {
public:
    Runner(const AuditPlan& plan, const adapters::AdapterSet& adapters, std::filesystem::path out,
           const engine::EngineOptions& options)
        : plan_(plan), adapters_(adapters), out_(std::move(out)), options_(options) {}

    PlanResult run() {
        session::SessionOptions o;
        o.model_id = plan_.model_id;
        o.seed = plan_.seed;
        o.first_level = plan_.first_level;
        o.id = plan_.session_id.empty() ? "s" + sha256_hex("plan-session|" + std::to_string(plan_.seed)).substr(0, 12)
                                        : plan_.session_id;
        o.clock = session::logical_clock();
        result_.session = session::create_session(o);
        std::filesystem::create_directories(out_);
        result_.session_dir = out_ / "session";
        result_.report_md = out_ / "report.md";
        result_.report_json = out_ / "report.json";

        for (std::size_t i = 0; i < plan_.steps.size(); ++i) {
            try {
                result_.step_log.push_back(std::visit([&](const auto& st) { return apply(st); }, plan_.steps[i]));
            } catch (const Error& e) {
                throw PlanStepError(i, e);
            }
        }
        session::save_session(result_.session, result_.session_dir);
        if (!exported_) export_reports();
        return std::move(result_);
    }

private:
    AuditSession& s() { return result_.session; }

    json apply(const step::AddPrompt& st) {
        auto out = engine::add_prompt(s(), adapters_, st.text, st.n, session::PromptOrigin::User, options_);
        return {{"op", "add_prompt"}, {"prompt_id", out.prompt_id.str()}, {"images", out.image_ids.size()},
                {"built_graph", out.built_graph}, {"new_records", out.new_records}};
    }

    json apply(const step::AddNode& st) {
        if (st.parent_path.empty()) throw ValidationError("add_node needs a parent path");
        graph::Selector sel;
        sel.kind = st.scope.selector;
        for (int p : st.scope.prompts) sel.prompts.insert(prompt_ordinal(s(), p).id);
        const graph::ScopeSpec scope{sel, st.scope.lifecycle};
        NodeId parent = node_at(s(), {st.parent_path.front()});
        for (std::size_t i = 1; i < st.parent_path.size(); ++i) {
            auto next = s().graph.find_child(parent, st.parent_path[i]);
            if (!next) {
                graph::NodeSpec obj;
                obj.name = st.parent_path[i];
                obj.scope = scope;
                next = graph::add_node(s().graph, parent, obj, s().catalog);
            }
            parent = *next;
        }
        graph::NodeSpec spec;
        spec.name = st.name;
        spec.kind = st.kind;
        spec.scope = scope;
        spec.candidate_values = st.candidate_values;
        auto out = engine::add_criterion(s(), adapters_, parent, spec, options_);
        return {{"op", "add_node"}, {"node_id", out.node_id.str()}, {"new_records", out.records.size()}};
    }

    json apply(const step::Relabel& st) {
        auto sum = labeling::relabel(s(), node_at(s(), st.node_path), st.mode, *adapters_.labeler,
                                     options_.max_in_flight);
        return {{"op", "relabel"}, {"relabeled", sum.relabeled}, {"retired", sum.retired}};
    }

    json apply(const step::RequestAnalysisSupport& st) {
        auto kws = st.keywords.empty() ? guidance::generate_keywords(s(), adapters_, plan_.guidance) : st.keywords;
        auto r = guidance::audit_analysis_support(s(), adapters_, kws, plan_.guidance);
        return {{"op", "request_analysis_support"},
                {"suggestion", r.suggestion ? json(r.suggestion->str()) : json(nullptr)},
                {"attempts_used", r.attempts_used}};
    }

    json apply(const step::ApplySuggestion& st) {
        auto id = suggestion_ordinal<session::CriterionSuggestion>(s(), st.ordinal, "criterion suggestion");
        auto out = guidance::apply_criterion_suggestion(s(), adapters_, id, options_);
        return {{"op", "apply_suggestion"}, {"node_id", out.node_id.str()}, {"new_records", out.records.size()}};
    }

    json apply(const step::RequestPromptSuggestion&) {
        auto id = guidance::prompt_suggestion(s(), adapters_);
        return {{"op", "request_prompt_suggestion"}, {"suggestion", id.str()}};
    }

    json apply(const step::ApplyPromptSuggestion& st) {
        auto id = suggestion_ordinal<session::PromptSubstitution>(s(), st.ordinal, "prompt suggestion");
        auto out = guidance::apply_prompt_substitution(s(), adapters_, id, st.n, options_);
        return {{"op", "apply_prompt_suggestion"},
                {"prompt_id", out.prompt_id.str()},
                {"duplicated_branch", out.duplicated_branch ? json(out.duplicated_branch->str()) : json(nullptr)},
                {"new_records", out.generation.new_records}};
    }

    json apply(const step::Bookmark& st) {
        session::BookmarkTarget target;
        if (st.chart) {
            auto node = node_at(s(), *st.chart);
            target = session::ChartTarget{node, s().graph.path_names(node), labeling::aggregate_distribution(s(), node)};
        } else {
            auto imgs = s().catalog.images_of(prompt_ordinal(s(), st.image->first).id);
            auto idx = st.image->second;
            if (idx < 0 || static_cast<std::size_t>(idx) >= imgs.size())
                throw NotFoundError("no image #" + std::to_string(idx) + " for prompt #" + std::to_string(st.image->first));
            target = session::ImageTarget{*std::next(imgs.begin(), idx)};
        }
        const auto& b = session::bookmark_item(s(), target, st.comment);
        return {{"op", "bookmark"}, {"bookmark_id", b.id.str()}};
    }

    json apply(const step::SetNotes& st) {
        session::set_general_notes(s(), st.text);
        return {{"op", "set_notes"}};
    }

    json apply(const step::ExportReport&) {
        export_reports();
        return {{"op", "export_report"}};
    }

    void export_reports() {
        auto report = session::export_report(s(), "session/images");
        write_text(result_.report_md, report.markdown);
        write_text(result_.report_json, report.structured.dump(2) + "\n");
        exported_ = true;
    }

    const AuditPlan& plan_;
    const adapters::AdapterSet& adapters_;
    std::filesystem::path out_;
    engine::EngineOptions options_;
    PlanResult result_;
    bool exported_ = false;
};

}  // namespace

PlanStepError::PlanStepError(std::size_t index, const Error& cause)
    : Error(cause.kind(), "step " + std::to_string(index + 1) + " failed: " + cause.what()), index_(index) {}

AuditPlan plan_from_json(const json& j) {
    AuditPlan plan;
    try {
        plan.model_id = j.value("model_id", plan.model_id);
        plan.seed = j.value("seed", std::uint64_t{0});
        plan.session_id = j.value("session_id", std::string());
        plan.first_level = j.value("first_level", plan.first_level);
        if (j.contains("guidance")) {
            const auto& g = j.at("guidance");
            plan.guidance.confidence_threshold = g.value("confidence_threshold", plan.guidance.confidence_threshold);
            plan.guidance.max_attempts = g.value("max_attempts", plan.guidance.max_attempts);
            plan.guidance.keyword_count = g.value("keyword_count", plan.guidance.keyword_count);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("plan header: ") + e.what());
    }
    plan.guidance.validate();
    const auto& steps = j.contains("steps") ? j.at("steps") : json::array();
    for (std::size_t i = 0; i < steps.size(); ++i) {
        try {
            plan.steps.push_back(parse_step(steps[i]));
        } catch (const json::exception& e) {
            throw ValidationError("plan step " + std::to_string(i + 1) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("plan step " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return plan;
}

AuditPlan load_plan(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw NotFoundError("cannot open plan " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw ValidationError("plan " + file.string() + " is not valid JSON");
    return plan_from_json(j);
}

PlanResult run_plan(const AuditPlan& plan, const adapters::AdapterSet& adapters, const std::filesystem::path& out,
                    const engine::EngineOptions& options) {
    return Runner(plan, adapters, out, options).run();
}

}  // namespace sgaudit::service
