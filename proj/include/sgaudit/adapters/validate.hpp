#pragma once

#include "sgaudit/adapters/adapters.hpp"

namespace sgaudit::adapters {

struct LabelOutcome {
    std::optional<std::string> value;  // normalized; set on success
    std::string error;                 // set on failure
    int attempts = 0;
};

/// Calls the labeler, normalizes the answer and checks it against the
/// candidate list. An off-list, empty or failed answer is retried once; the
/// second failure becomes an error outcome rather than an exception.
LabelOutcome label_validated(Labeler& labeler, const ImageRef& image, const PartialSchema& schema);

/// Throws SchemaError unless `graph` is a valid tree whose first level matches.
void check_extracted_graph(const SceneGraph& graph, const std::vector<std::string>& first_level);

/// Normalizes the proposal in place. Throws SchemaError if the attribute is
/// malformed or the parent path neither exists nor extends an existing object
/// path by one new object.
void check_criterion_proposal(CriterionProposal& proposal, const GraphSummary& graph);

/// Throws ValidationError unless the span occurs in the source prompt and
/// the replacement differs from it.
void check_prompt_proposal(const PromptProposal& proposal, const std::vector<PromptInfo>& prompts);

}  // namespace sgaudit::adapters
