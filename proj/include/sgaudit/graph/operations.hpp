#pragma once

#include "sgaudit/graph/scene_graph.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sgaudit::graph {

inline const std::vector<std::string> kDefaultFirstLevel{"foreground", "background"};

struct NodeSpec {
    std::string name;
    NodeKind kind = NodeKind::Object;
    ScopeSpec scope{Selector::all_images(), Lifecycle::AutoExtended};
    std::optional<std::vector<std::string>> candidate_values;
    NodeOrigin origin = NodeOrigin::UserAdded;
};

struct NodePatch {
    std::optional<std::string> name;
    std::optional<ScopeSpec> scope;
    /// An empty vector clears the candidate list.
    std::optional<std::vector<std::string>> candidate_values;
};

struct EditOutcome {
    bool relabel_required = false;
};

struct PartialSchema {
    struct Step {
        std::string name;
        NodeKind kind;
        friend bool operator==(const Step&, const Step&) = default;
    };
    std::vector<Step> path;  // root first, target attribute last
    std::optional<std::vector<std::string>> candidate_values;
    NodeId target_node_id;

    /// "image/foreground/doctor/gender"
    std::string path_string() const;
};

SceneGraph new_graph(const std::vector<std::string>& first_level = kDefaultFirstLevel,
                     std::string id_prefix = {});

/// Nodes with the same normalized root path collapse into one; frequencies add.
/// Output ids are fresh, drawn from `id_prefix`.
SceneGraph merge_scene_graphs(const std::vector<SceneGraph>& graphs, std::string id_prefix = {});

/// Keeps `max_leaves` leaves sampled uniformly without replacement (seeded,
/// over leaves sorted by normalized path) together with their ancestors.
SceneGraph prune_leaves(const SceneGraph& graph, std::size_t max_leaves, std::uint64_t seed);

NodeId add_node(SceneGraph& graph, const NodeId& parent, const NodeSpec& spec, const Catalog& catalog);

EditOutcome edit_node(SceneGraph& graph, const NodeId& id, const NodePatch& patch, const Catalog& catalog);

std::vector<NodeId> remove_node(SceneGraph& graph, const NodeId& id);

PartialSchema partial_schema(const SceneGraph& graph, const NodeId& attribute);

/// Deep-copies the descendants of `source` under a new sibling Object named
/// `new_name`. Every copied node gets `new_scope`.
NodeId duplicate_branch(SceneGraph& graph, const NodeId& source, const std::string& new_name,
                        const ScopeSpec& new_scope, const Catalog& catalog);

/// Call after `catalog` has absorbed `new_images` for `prompt`. Returns, in
/// preorder, every node whose resolved scope grew.
std::vector<NodeId> extend_auto_scopes(SceneGraph& graph, const PromptId& prompt,
                                       const std::set<ImageId>& new_images, const Catalog& catalog);

std::set<ImageId> resolve_scope(const SceneGraph& graph, const NodeId& id, const Catalog& catalog);

/// Normalizes candidate values and checks they have >= 2 distinct, non-empty
/// entries. Throws ValidationError.
std::vector<std::string> validate_candidates(const std::vector<std::string>& values);

}  // namespace sgaudit::graph
