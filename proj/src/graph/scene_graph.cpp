#include "sgaudit/graph/scene_graph.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/common/text.hpp"

#include <functional>
#include <set>

namespace sgaudit::graph {

SceneGraph SceneGraph::create(const std::vector<std::string>& first_level, std::string id_prefix) {
    if (first_level.empty()) throw ValidationError("first level must name at least one node");
    std::set<std::string> seen;
    for (const auto& name : first_level) {
        if (normalize(name).empty()) throw ValidationError("first-level names must be non-empty");
        if (!seen.insert(normalize(name)).second) {
            throw ValidationError("duplicate first-level name '" + name + "'");
        }
    }
    SceneGraph g;
    g.id_prefix_ = std::move(id_prefix);
    for (const auto& name : first_level) g.first_level_.push_back(trim(name));
    GraphNode root;
    root.id = g.allocate_id();
    root.name = kRootName;
    g.root_ = root.id;
    g.nodes_.emplace(root.id, std::move(root));
    for (const auto& name : g.first_level_) {
        GraphNode child;
        child.id = g.allocate_id();
        child.name = name;
        g.attach(g.root_, std::move(child));
    }
    return g;
}

SceneGraph SceneGraph::restore(std::vector<std::string> first_level, std::string id_prefix,
                               std::uint64_t next_id, GraphNode root) {
    SceneGraph g;
    g.first_level_ = std::move(first_level);
    g.id_prefix_ = std::move(id_prefix);
    g.next_id_ = next_id;
    g.root_ = root.id;
    g.nodes_.emplace(root.id, std::move(root));
    return g;
}

const GraphNode& SceneGraph::node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw NotFoundError("unknown node " + id.str());
    return it->second;
}

GraphNode& SceneGraph::node_mut(const NodeId& id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw NotFoundError("unknown node " + id.str());
    return it->second;
}

std::optional<NodeId> SceneGraph::parent_of(const NodeId& id) const {
    auto it = parent_.find(id);
    if (it == parent_.end()) return std::nullopt;
    return it->second;
}

bool SceneGraph::is_first_level(const NodeId& id) const {
    auto p = parent_of(id);
    return p && *p == root_;
}

std::vector<NodeId> SceneGraph::ancestors(const NodeId& id) const {
    std::vector<NodeId> out;
    for (auto p = parent_of(id); p; p = parent_of(*p)) out.push_back(*p);
    return out;
}

std::vector<NodeId> SceneGraph::subtree(const NodeId& id) const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{id};
    node(id);
    while (!stack.empty()) {
        NodeId cur = stack.back();
        stack.pop_back();
        out.push_back(cur);
        const auto& kids = nodes_.at(cur).children;
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::vector<NodeId> SceneGraph::preorder() const { return subtree(root_); }

std::vector<NodeId> SceneGraph::leaves() const {
    std::vector<NodeId> out;
    for (const auto& id : preorder()) {
        if (id == root_ || is_first_level(id)) continue;
        if (nodes_.at(id).children.empty()) out.push_back(id);
    }
    return out;
}

std::vector<std::string> SceneGraph::path_names(const NodeId& id) const {
    std::vector<std::string> out{node(id).name};
    for (const auto& a : ancestors(id)) out.push_back(nodes_.at(a).name);
    return {out.rbegin(), out.rend()};
}

std::vector<std::string> SceneGraph::normalized_path(const NodeId& id) const {
    auto names = path_names(id);
    std::vector<std::string> out;
    for (std::size_t i = 1; i < names.size(); ++i) out.push_back(normalize(names[i]));
    return out;
}

std::optional<NodeId> SceneGraph::find_child(const NodeId& parent, std::string_view name) const {
    auto key = normalize(name);
    for (const auto& c : node(parent).children) {
        if (normalize(nodes_.at(c).name) == key) return c;
    }
    return std::nullopt;
}

std::optional<NodeId> SceneGraph::find_path(const std::vector<std::string>& names) const {
    NodeId cur = root_;
    for (const auto& n : names) {
        auto next = find_child(cur, n);
        if (!next) return std::nullopt;
        cur = *next;
    }
    return cur;
}

NodeId SceneGraph::allocate_id() { return NodeId(id_prefix_ + "n" + padded(next_id_++, 4)); }

const NodeId& SceneGraph::attach(const NodeId& parent, GraphNode node) {
    auto& p = node_mut(parent);
    NodeId id = node.id;
    if (nodes_.contains(id)) throw ValidationError("node id already in use: " + id.str());
    p.children.push_back(id);
    parent_[id] = parent;
    return nodes_.emplace(id, std::move(node)).first->first;
}

std::vector<NodeId> SceneGraph::detach(const NodeId& id) {
    auto removed = subtree(id);
    if (auto p = parent_of(id)) {
        auto& kids = nodes_.at(*p).children;
        std::erase(kids, id);
    }
    for (const auto& r : removed) {
        nodes_.erase(r);
        parent_.erase(r);
    }
    return removed;
}

void SceneGraph::validate() const {
    if (!nodes_.contains(root_)) throw ValidationError("graph has no root");
    if (parent_.contains(root_)) throw ValidationError("root has a parent");

    // Reachability from root covers every node exactly once => tree.
    std::set<NodeId> seen;
    std::function<void(const NodeId&)> walk = [&](const NodeId& id) {
        if (!seen.insert(id).second) throw ValidationError("node reachable twice: " + id.str());
        const auto& n = node(id);
        if (normalize(n.name).empty()) throw ValidationError("node " + id.str() + " has an empty name");
        std::set<std::string> sibling_names;
        for (const auto& c : n.children) {
            auto pit = parent_.find(c);
            if (pit == parent_.end() || pit->second != id) {
                throw ValidationError("parent index out of sync at " + c.str());
            }
            const auto& child = node(c);
            if (!sibling_names.insert(normalize(child.name)).second) {
                throw ValidationError("duplicate sibling name '" + child.name + "' under " + n.name);
            }
            if (child.is_attribute() && n.is_attribute()) {
                throw ValidationError("attribute '" + child.name + "' has an attribute parent");
            }
            walk(c);
        }
        if (n.is_attribute() && !n.children.empty()) {
            throw ValidationError("attribute '" + n.name + "' has children");
        }
        if (n.candidate_values) {
            if (!n.is_attribute()) throw ValidationError("object '" + n.name + "' has candidate values");
            std::set<std::string> distinct;
            for (const auto& v : *n.candidate_values) distinct.insert(normalize(v));
            if (n.candidate_values->size() < 2 || distinct.size() != n.candidate_values->size() ||
                distinct.contains("")) {
                throw ValidationError("invalid candidate values on '" + n.name + "'");
            }
        }
        if (n.scope.selector.kind == SelectorKind::Images && n.scope.lifecycle != Lifecycle::Fixed) {
            throw ValidationError("explicit image scope on '" + n.name + "' must be fixed");
        }
    };
    walk(root_);
    if (seen.size() != nodes_.size()) throw ValidationError("graph contains unreachable nodes");

    const auto& top = node(root_).children;
    if (top.size() != first_level_.size()) throw ValidationError("root children differ from first level");
    for (std::size_t i = 0; i < top.size(); ++i) {
        const auto& n = node(top[i]);
        if (normalize(n.name) != normalize(first_level_[i]) || n.is_attribute()) {
            throw ValidationError("root children differ from first level");
        }
    }
}

}  // namespace sgaudit::graph
