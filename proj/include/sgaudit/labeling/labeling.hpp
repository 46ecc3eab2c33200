#pragma once

#include "sgaudit/adapters/validate.hpp"
#include "sgaudit/session/types.hpp"

#include <optional>
#include <set>
#include <vector>

namespace sgaudit::labeling {

using session::AuditSession;
using session::Distribution;
using session::LabelRecord;

inline constexpr std::size_t kDefaultMaxInFlight = 4;

/// Inputs for one batch of label calls, copied out of the session so the
/// adapter calls can run without holding it.
struct LabelJob {
    NodeId node_id;
    graph::PartialSchema schema;
    struct Item {
        ImageId image_id;
        Bytes blob;
        std::string prompt_text;
    };
    std::vector<Item> items;  // ascending image id
};

LabelJob plan_labeling(const AuditSession& session, const NodeId& node, const std::set<ImageId>& images);

/// Calls the labeler for every item, at most `max_in_flight` at once.
std::vector<adapters::LabelOutcome> run_labeling(const LabelJob& job, adapters::Labeler& labeler,
                                                 std::size_t max_in_flight = kDefaultMaxInFlight);

/// Replaces the node's active record for each item, in ascending image id
/// order. Items whose image has left the node's scope meanwhile are skipped;
/// a node removed meanwhile yields no records.
std::vector<LabelRecord> commit_labeling(AuditSession& session, const LabelJob& job,
                                         const std::vector<adapters::LabelOutcome>& outcomes);

/// Labels every in-scope image that lacks an active Ok record.
std::vector<LabelRecord> label_images(AuditSession& session, const NodeId& node, adapters::Labeler& labeler,
                                      std::size_t max_in_flight = kDefaultMaxInFlight);

/// Images with an off-list Ok label, images with active records now outside
/// the scope, and in-scope images without an active Ok record.
std::set<ImageId> affected_images(const AuditSession& session, const NodeId& node);

enum class RelabelMode { All, AffectedOnly };

struct RelabelSummary {
    std::size_t relabeled = 0;
    std::size_t retired = 0;
    std::set<ImageId> touched;
};

/// All replaces every in-scope record, manual edits included. AffectedOnly
/// touches exactly affected_images(). Both retire out-of-scope records.
RelabelSummary relabel(AuditSession& session, const NodeId& node, RelabelMode mode, adapters::Labeler& labeler,
                       std::size_t max_in_flight = kDefaultMaxInFlight);

/// Replaces the label with a manual one. Throws ValidationError for an
/// off-list or empty value, or an image outside the scope with no record.
const LabelRecord& manual_edit_label(AuditSession& session, const NodeId& node, const ImageId& image,
                                     const std::string& value);

/// Active Ok records of `node` over its current scope.
std::vector<const LabelRecord*> counted_records(const AuditSession& session, const NodeId& node);

/// Rows hold only values with at least one label, in candidate order (then
/// any off-list values by count, descending, then name). Every row lists the
/// same prompts: those with a counted label, in prompt order.
Distribution aggregate_distribution(const AuditSession& session, const NodeId& node);

struct ImageLabel {
    NodeId node_id;
    std::vector<std::string> path;  // display names below the root
    std::string value;
    double share = 0.0;  // fraction of the node's labeled images with this value
};

/// One entry per counted label of the image, in graph preorder.
std::vector<ImageLabel> image_label_summary(const AuditSession& session, const ImageId& image);

std::set<ImageId> images_for_segment(const AuditSession& session, const NodeId& node, const std::string& value,
                                     const std::optional<PromptId>& prompt = std::nullopt);

/// Removes a node and its subtree together with their label records and
/// chart bookmarks. Returns the removed node ids.
std::vector<NodeId> remove_node_cascade(AuditSession& session, const NodeId& node);

}  // namespace sgaudit::labeling
