#pragma once

#include "sgaudit/common/digest.hpp"
#include "sgaudit/common/ids.hpp"
#include "sgaudit/graph/operations.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sgaudit::session {

using graph::NodeSpec;
using graph::SceneGraph;

/// Milliseconds since the Unix epoch. Injected so replays can use a logical clock.
using Timestamp = std::int64_t;
using Clock = std::function<Timestamp()>;

Clock system_clock();
/// Returns 0, 1, 2, ... on successive calls.
Clock logical_clock();

enum class PromptOrigin { User, SuggestionApplied };

inline constexpr std::size_t kPaletteSize = 10;
/// Hex colour for a prompt's palette slot.
std::string_view palette_color(int color_index);

struct Prompt {
    PromptId id;
    std::string text;
    int color_index = 0;
    int requested_count = 1;
    PromptOrigin origin = PromptOrigin::User;
    std::uint64_t sub_seed = 0;

    friend bool operator==(const Prompt&, const Prompt&) = default;
};

struct GenerationRequest {
    PromptId prompt_id;
    int n_images = 1;
    std::uint64_t sub_seed = 0;
};

struct BlobRef {
    std::string digest;  // sha-256 hex of the file bytes
    std::string path;    // relative to the session directory
    friend bool operator==(const BlobRef&, const BlobRef&) = default;
};

struct GeneratedImage {
    ImageId id;
    PromptId prompt_id;
    int index = 0;  // position within its generation batch
    BlobRef blob;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    friend bool operator==(const GeneratedImage&, const GeneratedImage&) = default;
};

enum class LabelStatus { Ok, Error };
enum class LabelOrigin { Auto, Manual };

struct LabelRecord {
    NodeId node_id;
    ImageId image_id;
    std::string value;   // normalized; empty for errors
    std::uint64_t labeled_at = 0;  // session-wide sequence number
    LabelStatus status = LabelStatus::Ok;
    std::string error;   // set iff status == Error
    LabelOrigin origin = LabelOrigin::Auto;
    bool retired = false;  // kept as history after its image left the node scope

    bool active_ok() const { return !retired && status == LabelStatus::Ok; }
    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

struct PromptCount {
    PromptId prompt_id;
    std::uint64_t count = 0;
    friend bool operator==(const PromptCount&, const PromptCount&) = default;
};

struct DistributionRow {
    std::string value;
    std::vector<PromptCount> counts;  // prompt order
    std::uint64_t total() const;
    friend bool operator==(const DistributionRow&, const DistributionRow&) = default;
};

struct Distribution {
    NodeId node_id;
    std::vector<DistributionRow> rows;
    std::uint64_t total = 0;
    friend bool operator==(const Distribution&, const Distribution&) = default;
};

struct ImageTarget {
    ImageId image_id;
    friend bool operator==(const ImageTarget&, const ImageTarget&) = default;
};

struct ChartTarget {
    NodeId node_id;
    std::vector<std::string> node_path;  // display names at bookmark time
    Distribution snapshot;
    friend bool operator==(const ChartTarget&, const ChartTarget&) = default;
};

using BookmarkTarget = std::variant<ImageTarget, ChartTarget>;

struct Bookmark {
    BookmarkId id;
    BookmarkTarget target;
    std::string comment;
    Timestamp created_at = 0;
    friend bool operator==(const Bookmark&, const Bookmark&) = default;
};

enum class SuggestionStatus { Proposed, Applied, Dismissed };

struct CriterionSuggestion {
    SuggestionId id;
    std::pair<ImageId, ImageId> image_pair;
    NodeSpec node_spec;  // always an attribute
    std::vector<std::string> parent_path;  // first-level name downward
    std::string rationale;
    double confidence = 0.0;
    SuggestionStatus status = SuggestionStatus::Proposed;
    int attempts_used = 0;
    std::vector<std::string> keywords;
    std::optional<NodeId> applied_node;
};

struct PromptSubstitution {
    SuggestionId id;
    PromptId source_prompt_id;
    std::string replace_span;
    std::string replacement;
    SuggestionStatus status = SuggestionStatus::Proposed;
    std::optional<PromptId> applied_prompt;
    std::optional<NodeId> duplicated_branch;
};

using Suggestion = std::variant<CriterionSuggestion, PromptSubstitution>;

/// Internal record of every analysis-support attempt, including rejected ones.
struct AnalysisAttempt {
    std::uint64_t request = 0;
    int attempt = 0;
    std::pair<ImageId, ImageId> image_pair;
    double confidence = 0.0;
    std::string outcome;  // "accepted", "below_threshold", or an error message
};

struct Counters {
    std::uint64_t prompt = 0;
    std::uint64_t image = 0;
    std::uint64_t bookmark = 0;
    std::uint64_t suggestion = 0;
    std::uint64_t label_seq = 0;
    std::uint64_t analysis_request = 0;
};

/// Root aggregate for one audit. Plain data; operations live in store.hpp and
/// in the labeling and guidance modules. `catalog` and `blobs` are derived or
/// side storage and are not part of the canonical state document.
struct AuditSession {
    SessionId id;
    Timestamp created_at = 0;
    std::string model_id;
    std::uint64_t seed = 0;
    std::vector<Prompt> prompts;
    std::map<ImageId, GeneratedImage> images;
    SceneGraph graph = graph::new_graph();
    bool graph_built = false;
    std::vector<ImageId> graph_sample;  // images the initial scene graph was extracted from
    std::vector<LabelRecord> label_records;
    std::vector<Bookmark> bookmarks;
    std::string general_notes;
    std::vector<Suggestion> suggestion_history;
    std::vector<AnalysisAttempt> analysis_log;
    Counters counters;

    graph::Catalog catalog;
    std::map<std::string, Bytes> blobs;  // digest -> bytes
    Clock clock = system_clock();

    const Prompt& prompt(const PromptId& id) const;  // throws NotFoundError
    const GeneratedImage& image(const ImageId& id) const;
    const Bytes& blob_of(const ImageId& id) const;
    std::string id_prefix() const { return id.str() + "-"; }
};

}  // namespace sgaudit::session
