#pragma once

#include "sgaudit/session/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace sgaudit::session {

using Json = nlohmann::json;

struct SessionOptions {
    std::string model_id = "mock-t2i";
    std::uint64_t seed = 0;
    std::vector<std::string> first_level = graph::kDefaultFirstLevel;
    /// Empty: a random id is drawn.
    std::string id;
    Clock clock;  // defaults to the system clock
    /// Overrides the creation timestamp; otherwise taken from `clock`.
    std::optional<Timestamp> created_at;
};

AuditSession create_session(const SessionOptions& options);

/// Appends a prompt with the next palette slot and returns the generation
/// request (with its derived sub-seed) for the image generator.
std::pair<Prompt, GenerationRequest> add_prompt(AuditSession& session, const std::string& text, int n_images,
                                                PromptOrigin origin = PromptOrigin::User);

struct IngestResult {
    std::vector<ImageId> image_ids;
    /// Nodes whose resolved scope grew (from extend_auto_scopes).
    std::vector<NodeId> affected_nodes;
};

/// Stores the blobs content-addressed, registers them in the catalog and
/// widens auto-extended scopes. Blobs must be PNG.
IngestResult ingest_images(AuditSession& session, const GenerationRequest& request, const std::vector<Bytes>& blobs);

/// `target` for a chart must already carry its distribution snapshot.
const Bookmark& bookmark_item(AuditSession& session, BookmarkTarget target, const std::string& comment);

void set_general_notes(AuditSession& session, std::string text);

/// Writes `dir/state.json` and `dir/images/<digest>.png`.
void save_session(const AuditSession& session, const std::filesystem::path& dir);
/// Throws NotFoundError (no state), ValidationError (corrupt state) or
/// DigestError (blob bytes do not match their digest).
AuditSession load_session(const std::filesystem::path& dir, Clock clock = {});

Json to_json(const AuditSession& session);
AuditSession session_from_json(const Json& j);  // blobs left empty
/// Stable text form of the whole state document.
std::string canonical_state(const AuditSession& session);

Json to_json(const Distribution& d);
Distribution distribution_from_json(const Json& j);
Json to_json(const Bookmark& b);
Bookmark bookmark_from_json(const Json& j);
Json to_json(const Suggestion& s);
Suggestion suggestion_from_json(const Json& j);
Json to_json(const LabelRecord& r);
std::string_view to_string(SuggestionStatus status);

struct Report {
    std::string markdown;
    Json structured;
};

/// General notes first, then one evidence entry per bookmark in creation order.
/// Image links point at `images_dir` (relative to where report.md is written).
Report export_report(const AuditSession& session, const std::string& images_dir = "session/images");

/// Evidence set of a structured report, as bookmarks.
std::vector<Bookmark> import_report_evidence(const Json& structured);

}  // namespace sgaudit::session
