#pragma once

#include "sgaudit/common/digest.hpp"
#include "sgaudit/common/ids.hpp"
#include "sgaudit/graph/operations.hpp"
#include "sgaudit/session/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgaudit::adapters {

using graph::PartialSchema;
using graph::SceneGraph;

/// An image handed to an adapter: its id, bytes and the prompt it came from.
struct ImageRef {
    ImageId id;
    std::span<const std::uint8_t> blob;
    std::string prompt_text;
};

/// Compact view of a scene graph for prompting.
struct GraphSummary {
    std::vector<std::string> first_level;
    std::vector<std::vector<std::string>> object_paths;     // below the root, excluding first level
    std::vector<std::vector<std::string>> attribute_paths;  // below the root
};

GraphSummary summarize(const SceneGraph& graph);

struct PromptInfo {
    PromptId id;
    std::string text;
};

struct CriterionRequest {
    ImageRef first;
    ImageRef second;
    std::vector<std::string> keywords;
    GraphSummary graph;
};

struct CriterionProposal {
    std::string name;
    std::optional<std::vector<std::string>> candidate_values;
    std::vector<std::string> parent_path;  // first-level name downward
    std::string rationale;
    double confidence = 0.0;
};

struct SubstitutionTriple {
    PromptId source_prompt_id;
    std::string replace_span;
    std::string replacement;
};

struct PromptProposal {
    PromptId source_prompt_id;
    std::string replace_span;
    std::string replacement;
};

struct NoteContext {
    std::vector<PromptInfo> prompts;
    std::vector<session::Bookmark> bookmarks;  // creation order
    std::map<ImageId, PromptId> image_prompts;  // for image bookmarks
    std::string existing_notes;
    std::string cursor_prefix;
};

class ImageGenerator {
public:
    virtual ~ImageGenerator() = default;
    virtual std::vector<Bytes> generate(const std::string& prompt_text, int n, std::uint64_t sub_seed) = 0;
};

class GraphExtractor {
public:
    virtual ~GraphExtractor() = default;
    /// Returns a single-image scene graph with frequency 1 on every node.
    virtual SceneGraph extract(std::span<const std::uint8_t> blob, const std::vector<std::string>& first_level) = 0;
};

class Labeler {
public:
    virtual ~Labeler() = default;
    /// Raw label text; callers go through label_validated().
    virtual std::string label(const ImageRef& image, const PartialSchema& schema) = 0;
};

class CriterionSuggester {
public:
    virtual ~CriterionSuggester() = default;
    virtual std::vector<std::string> keywords(const GraphSummary& graph, std::size_t count) = 0;
    virtual CriterionProposal suggest(const CriterionRequest& request) = 0;
};

class PromptSuggester {
public:
    virtual ~PromptSuggester() = default;
    virtual PromptProposal suggest(const std::vector<PromptInfo>& prompts, const GraphSummary& graph,
                                   const std::vector<SubstitutionTriple>& history) = 0;
};

class NoteCompleter {
public:
    virtual ~NoteCompleter() = default;
    virtual std::string complete(const NoteContext& context) = 0;
};

enum class AdapterMode { Mock, Remote };

struct AdapterSet {
    AdapterMode mode = AdapterMode::Mock;
    std::shared_ptr<ImageGenerator> generator;
    std::shared_ptr<GraphExtractor> graph_extractor;
    std::shared_ptr<Labeler> labeler;
    std::shared_ptr<CriterionSuggester> criterion_suggester;
    std::shared_ptr<PromptSuggester> prompt_suggester;
    std::shared_ptr<NoteCompleter> note_completer;
};

}  // namespace sgaudit::adapters
