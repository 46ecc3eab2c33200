#pragma once

#include "sgaudit/engine/engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sgaudit::guidance {

using adapters::AdapterSet;
using session::AuditSession;

struct GuidanceConfig {
    double confidence_threshold = 0.7;
    int max_attempts = 3;
    std::size_t keyword_count = 6;

    void validate() const;  // throws ValidationError
};

/// Normalized, distinct keywords from the criterion suggester. Needs at
/// least one image.
std::vector<std::string> generate_keywords(const AuditSession& session, const AdapterSet& adapters,
                                           const GuidanceConfig& config = {});

struct AnalysisResult {
    std::optional<SuggestionId> suggestion;  // empty: no confident suggestion
    int attempts_used = 0;
};

/// Up to max_attempts rounds of (pick an image pair, ask for a criterion).
/// Only a proposal at or above the threshold enters the suggestion history;
/// every attempt is appended to the analysis log.
AnalysisResult audit_analysis_support(AuditSession& session, const AdapterSet& adapters,
                                      const std::vector<std::string>& keywords, const GuidanceConfig& config = {});

/// The pair analysis support uses for `attempt` (1-based) of `request`.
/// Same-prompt pairs are preferred whenever some prompt has two images.
std::pair<ImageId, ImageId> select_pair(const AuditSession& session, std::uint64_t request, int attempt);

struct CriterionApplied {
    NodeId node_id;
    std::vector<NodeId> created_objects;  // missing parents, top down
    std::vector<session::LabelRecord> records;
};

/// Proposed -> Applied. Creates missing parent objects, adds the attribute
/// and labels it. Throws ConflictError if the suggestion is not Proposed.
CriterionApplied apply_criterion_suggestion(AuditSession& session, const AdapterSet& adapters,
                                            const SuggestionId& id, const engine::EngineOptions& options = {});

/// Proposed -> Dismissed.
void dismiss_suggestion(AuditSession& session, const SuggestionId& id);

/// Asks for a substitution not already in the history. An invalid or
/// repeated answer is retried once, then reported as ValidationError.
SuggestionId prompt_suggestion(AuditSession& session, const AdapterSet& adapters);

struct SubstitutionApplied {
    PromptId prompt_id;
    std::optional<NodeId> duplicated_branch;
    std::string note;  // why nothing was duplicated, if so
    engine::GenerationOutcome generation;
};

/// Adds the edited prompt, duplicates the first object named like the
/// replaced span (scoped to the new prompt) and generates its images.
SubstitutionApplied apply_prompt_substitution(AuditSession& session, const AdapterSet& adapters,
                                              const SuggestionId& id, int n_images,
                                              const engine::EngineOptions& options = {});

/// Completion for the note editor; never modifies the notes. Adapter failures
/// give an empty string.
std::string autocomplete_note(const AuditSession& session, const AdapterSet& adapters, const std::string& cursor_prefix);

const session::Suggestion& find_suggestion(const AuditSession& session, const SuggestionId& id);

}  // namespace sgaudit::guidance
