#include "sgaudit/adapters/validate.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/common/text.hpp"

#include <algorithm>
#include <cmath>

namespace sgaudit::adapters {

namespace {

std::vector<std::string> normalized(const std::vector<std::string>& path) {
    std::vector<std::string> out;
    for (const auto& p : path) out.push_back(normalize(p));
    return out;
}

bool has_path(const std::vector<std::vector<std::string>>& paths, const std::vector<std::string>& want) {
    return std::any_of(paths.begin(), paths.end(), [&](const auto& p) { return normalized(p) == want; });
}

}  // namespace

LabelOutcome label_validated(Labeler& labeler, const ImageRef& image, const PartialSchema& schema) {
    LabelOutcome out;
    for (int attempt = 1; attempt <= 2; ++attempt) {
        out.attempts = attempt;
        std::string raw;
        try {
            raw = labeler.label(image, schema);
        } catch (const Error& e) {
            out.error = e.what();
            continue;
        }
        auto value = normalize(raw);
        if (value.empty()) {
            out.error = "empty label";
            continue;
        }
        if (schema.candidate_values) {
            const auto& c = *schema.candidate_values;
            if (std::find(c.begin(), c.end(), value) == c.end()) {
                out.error = "label '" + value + "' is not one of the candidate values";
                continue;
            }
        }
        out.value = std::move(value);
        out.error.clear();
        return out;
    }
    return out;
}

void check_extracted_graph(const SceneGraph& graph, const std::vector<std::string>& first_level) {
    try {
        graph.validate();
    } catch (const ValidationError& e) {
        throw SchemaError(std::string("extracted graph is invalid: ") + e.what());
    }
    if (normalized(graph.first_level()) != normalized(first_level))
        throw SchemaError("extracted graph does not use the session's first-level nodes");
}

void check_criterion_proposal(CriterionProposal& p, const GraphSummary& graph) {
    p.name = trim(p.name);
    if (normalize(p.name).empty()) throw SchemaError("suggested attribute has no name");
    if (!std::isfinite(p.confidence) || p.confidence < 0.0 || p.confidence > 1.0)
        throw SchemaError("confidence must lie in [0, 1]");
    if (p.candidate_values) {
        if (p.candidate_values->empty()) {
            p.candidate_values.reset();
        } else {
            try {
                p.candidate_values = graph::validate_candidates(*p.candidate_values);
            } catch (const ValidationError& e) {
                throw SchemaError(std::string("suggested candidate values: ") + e.what());
            }
        }
    }
    for (auto& step : p.parent_path) step = trim(step);
    if (p.parent_path.empty()) throw SchemaError("suggestion has no parent path");
    auto want = normalized(p.parent_path);
    if (std::any_of(want.begin(), want.end(), [](const auto& s) { return s.empty(); }))
        throw SchemaError("parent path contains an empty name");
    auto fl = normalized(graph.first_level);
    if (std::find(fl.begin(), fl.end(), want.front()) == fl.end())
        throw SchemaError("parent path must start at a first-level node");
    if (has_path(graph.attribute_paths, want)) throw SchemaError("parent path names an attribute");
    if (want.size() == 1 || has_path(graph.object_paths, want)) return;
    auto prefix = std::vector<std::string>(want.begin(), want.end() - 1);
    if (prefix.size() == 1 || has_path(graph.object_paths, prefix)) return;
    throw SchemaError("parent path '" + join(p.parent_path, "/") + "' does not extend an existing object");
}

void check_prompt_proposal(const PromptProposal& p, const std::vector<PromptInfo>& prompts) {
    auto it = std::find_if(prompts.begin(), prompts.end(), [&](const auto& x) { return x.id == p.source_prompt_id; });
    if (it == prompts.end()) throw ValidationError("suggested source prompt does not exist: " + p.source_prompt_id.str());
    if (p.replace_span.empty() || it->text.find(p.replace_span) == std::string::npos)
        throw ValidationError("span '" + p.replace_span + "' does not occur in the source prompt");
    if (normalize(p.replacement).empty()) throw ValidationError("replacement is empty");
    if (normalize(p.replacement) == normalize(p.replace_span))
        throw ValidationError("replacement must differ from the replaced span");
}

}  // namespace sgaudit::adapters
