#pragma once

#include "sgaudit/adapters/adapters.hpp"
#include "sgaudit/common/error.hpp"
#include "sgaudit/engine/engine.hpp"
#include "sgaudit/guidance/guidance.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sgaudit::service {

/// Scope in plan terms: prompts are 1-based ordinals of earlier add_prompt steps.
struct PlanScope {
    graph::SelectorKind selector = graph::SelectorKind::AllImages;
    std::vector<int> prompts;
    graph::Lifecycle lifecycle = graph::Lifecycle::AutoExtended;
};

namespace step {
struct AddPrompt {
    std::string text;
    int n = 1;
};
struct AddNode {
    std::vector<std::string> parent_path;  // missing objects are created
    std::string name;
    graph::NodeKind kind = graph::NodeKind::Attribute;
    std::optional<std::vector<std::string>> candidate_values;
    PlanScope scope;
};
struct Relabel {
    std::vector<std::string> node_path;
    labeling::RelabelMode mode = labeling::RelabelMode::AffectedOnly;
};
struct RequestAnalysisSupport {
    std::vector<std::string> keywords;  // empty: use generated keywords
};
struct ApplySuggestion {
    int ordinal = 1;  // among criterion suggestions, 1-based
};
struct RequestPromptSuggestion {};
struct ApplyPromptSuggestion {
    int ordinal = 1;  // among prompt substitutions, 1-based
    int n = 1;
};
struct Bookmark {
    std::optional<std::vector<std::string>> chart;  // attribute path
    std::optional<std::pair<int, int>> image;       // (prompt ordinal, 0-based index in its batch)
    std::string comment;
};
struct SetNotes {
    std::string text;
};
struct ExportReport {};
}  // namespace step

using PlanStep = std::variant<step::AddPrompt, step::AddNode, step::Relabel, step::RequestAnalysisSupport,
                              step::ApplySuggestion, step::RequestPromptSuggestion, step::ApplyPromptSuggestion,
                              step::Bookmark, step::SetNotes, step::ExportReport>;

struct AuditPlan {
    std::string model_id = "mock-t2i";
    std::uint64_t seed = 0;
    std::string session_id;  // empty: derived from the seed
    std::vector<std::string> first_level = graph::kDefaultFirstLevel;
    guidance::GuidanceConfig guidance;
    std::vector<PlanStep> steps;
};

/// Throws ValidationError naming the offending step.
AuditPlan plan_from_json(const nlohmann::json& j);
AuditPlan load_plan(const std::filesystem::path& file);

/// A step failed. `step_index` is 0-based; the message names it 1-based.
class PlanStepError : public Error {
public:
    PlanStepError(std::size_t index, const Error& cause);
    std::size_t step_index() const noexcept { return index_; }

private:
    std::size_t index_;
};

struct PlanResult {
    session::AuditSession session;
    std::filesystem::path session_dir;
    std::filesystem::path report_md;
    std::filesystem::path report_json;
    std::vector<nlohmann::json> step_log;  // one summary object per step
};

/// Runs the steps against a fresh session with a logical clock, then writes
/// `out/session/`, `out/report.md` and `out/report.json`. An export_report
/// step writes the reports at that point; otherwise they are written at the
/// end.
PlanResult run_plan(const AuditPlan& plan, const adapters::AdapterSet& adapters, const std::filesystem::path& out,
                    const engine::EngineOptions& options = {});

}  // namespace sgaudit::service
