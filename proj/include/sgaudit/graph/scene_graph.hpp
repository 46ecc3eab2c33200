#pragma once

#include "sgaudit/common/ids.hpp"
#include "sgaudit/graph/scope.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sgaudit::graph {

enum class NodeKind { Object, Attribute };
enum class NodeOrigin { Extracted, UserAdded, SuggestionApplied, Duplicated };

struct GraphNode {
    NodeId id;
    std::string name;
    NodeKind kind = NodeKind::Object;
    std::vector<NodeId> children;
    Scope scope = Scope::all_images_auto();
    std::optional<std::vector<std::string>> candidate_values;  // Attribute only, normalized
    std::uint64_t frequency = 0;
    NodeOrigin origin = NodeOrigin::Extracted;

    bool is_attribute() const { return kind == NodeKind::Attribute; }
    friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

inline constexpr const char* kRootName = "image";

/// Tree of object and attribute nodes under a synthetic root. The class keeps
/// the parent index consistent; the operations in operations.hpp are
/// responsible for the domain invariants (attribute leaves, sibling names,
/// scope monotonicity).
class SceneGraph {
public:
    /// Root plus one Object per first-level name. Throws ValidationError on
    /// empty or duplicate names.
    static SceneGraph create(const std::vector<std::string>& first_level, std::string id_prefix = {});

    const NodeId& root() const { return root_; }
    const std::vector<std::string>& first_level() const { return first_level_; }
    const std::string& id_prefix() const { return id_prefix_; }
    std::uint64_t next_id() const { return next_id_; }

    std::size_t size() const { return nodes_.size(); }
    bool contains(const NodeId& id) const { return nodes_.contains(id); }
    const GraphNode& node(const NodeId& id) const;  // throws NotFoundError
    GraphNode& node_mut(const NodeId& id);
    const std::map<NodeId, GraphNode>& nodes() const { return nodes_; }

    std::optional<NodeId> parent_of(const NodeId& id) const;
    bool is_first_level(const NodeId& id) const;

    /// Parent first, up to and including the root.
    std::vector<NodeId> ancestors(const NodeId& id) const;
    std::vector<NodeId> preorder() const;
    std::vector<NodeId> subtree(const NodeId& id) const;  // preorder, includes id

    /// Childless nodes other than the root and first-level nodes.
    std::vector<NodeId> leaves() const;

    /// Display names from the root down to `id`.
    std::vector<std::string> path_names(const NodeId& id) const;
    /// Normalized names below the root, used as merge identity.
    std::vector<std::string> normalized_path(const NodeId& id) const;

    std::optional<NodeId> find_child(const NodeId& parent, std::string_view name) const;
    /// `names` starts at a first-level node (the root is implicit).
    std::optional<NodeId> find_path(const std::vector<std::string>& names) const;

    NodeId allocate_id();
    /// Appends `node` as the last child of `parent`. No domain checks.
    const NodeId& attach(const NodeId& parent, GraphNode node);
    /// Removes `id` and its descendants; returns the removed ids in preorder.
    std::vector<NodeId> detach(const NodeId& id);

    /// Throws ValidationError if any structural or domain invariant fails.
    void validate() const;

    /// Used by deserialization, which rebuilds the tree node by node.
    static SceneGraph restore(std::vector<std::string> first_level, std::string id_prefix,
                              std::uint64_t next_id, GraphNode root);
    void set_next_id(std::uint64_t next) { next_id_ = next; }

    friend bool operator==(const SceneGraph&, const SceneGraph&) = default;

private:
    NodeId root_;
    std::map<NodeId, GraphNode> nodes_;
    std::map<NodeId, NodeId> parent_;
    std::vector<std::string> first_level_;
    std::string id_prefix_;
    std::uint64_t next_id_ = 1;
};

}  // namespace sgaudit::graph
