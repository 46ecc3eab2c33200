#include "sgaudit/graph/operations.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/common/text.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace sgaudit::graph {
namespace {

void require_unique_sibling(const SceneGraph& graph, const NodeId& parent, const std::string& name,
                            const std::optional<NodeId>& ignore = std::nullopt) {
    auto clash = graph.find_child(parent, name);
    if (clash && clash != ignore) {
        throw ValidationError("'" + trim(name) + "' already exists under '" + graph.node(parent).name + "'");
    }
}

std::string checked_name(const std::string& name) {
    auto t = trim(name);
    if (t.empty()) throw ValidationError("node name must be non-empty");
    return t;
}

/// Widens each ancestor of `id` so it resolves to a superset of `images`.
std::vector<NodeId> widen_ancestors(SceneGraph& graph, const NodeId& id, const std::set<ImageId>& images,
                                    const Catalog& catalog) {
    std::vector<NodeId> grown;
    for (const auto& a : graph.ancestors(id)) {
        if (widen(graph.node_mut(a).scope, images, catalog)) grown.push_back(a);
    }
    return grown;
}

std::set<ImageId> descendant_union(const SceneGraph& graph, const NodeId& id, const Catalog& catalog) {
    std::set<ImageId> out;
    auto sub = graph.subtree(id);
    for (std::size_t i = 1; i < sub.size(); ++i) {
        auto r = resolve(graph.node(sub[i]).scope, catalog);
        out.insert(r.begin(), r.end());
    }
    return out;
}

}  // namespace

std::string PartialSchema::path_string() const {
    std::vector<std::string> names;
    for (const auto& s : path) names.push_back(s.name);
    return join(names, "/");
}

std::vector<std::string> validate_candidates(const std::vector<std::string>& values) {
    std::vector<std::string> out;
    for (const auto& v : values) {
        auto n = normalize(v);
        if (n.empty()) throw ValidationError("candidate values must be non-empty");
        if (std::find(out.begin(), out.end(), n) != out.end()) {
            throw ValidationError("duplicate candidate value '" + n + "'");
        }
        out.push_back(std::move(n));
    }
    if (out.size() < 2) throw ValidationError("candidate values need at least two entries");
    return out;
}

SceneGraph new_graph(const std::vector<std::string>& first_level, std::string id_prefix) {
    return SceneGraph::create(first_level, std::move(id_prefix));
}

SceneGraph merge_scene_graphs(const std::vector<SceneGraph>& graphs, std::string id_prefix) {
    if (graphs.empty()) throw ValidationError("nothing to merge");
    auto key_of = [](const std::vector<std::string>& names) {
        std::vector<std::string> out;
        for (const auto& n : names) out.push_back(normalize(n));
        return out;
    };
    const auto first_key = key_of(graphs.front().first_level());
    for (const auto& g : graphs) {
        if (key_of(g.first_level()) != first_key) throw ValidationError("graphs disagree on the first level");
    }

    SceneGraph out = SceneGraph::create(graphs.front().first_level(), std::move(id_prefix));
    std::map<std::vector<std::string>, NodeId> by_path;
    by_path[{}] = out.root();
    for (const auto& c : out.node(out.root()).children) by_path[out.normalized_path(c)] = c;

    for (const auto& g : graphs) {
        for (const auto& id : g.preorder()) {
            const auto& src = g.node(id);
            auto path = g.normalized_path(id);
            auto it = by_path.find(path);
            if (it == by_path.end()) {
                std::vector<std::string> parent_path(path.begin(), path.end() - 1);
                const NodeId parent = by_path.at(parent_path);
                auto& parent_node = out.node_mut(parent);
                if (parent_node.is_attribute()) {
                    // Another input uses this path as an inner node.
                    parent_node.kind = NodeKind::Object;
                    parent_node.candidate_values.reset();
                }
                GraphNode copy = src;
                copy.id = out.allocate_id();
                copy.children.clear();
                copy.frequency = 0;
                it = by_path.emplace(path, out.attach(parent, std::move(copy))).first;
            }
            auto& dst = out.node_mut(it->second);
            dst.frequency += src.frequency;
            if (src.kind == NodeKind::Object && dst.is_attribute()) {
                dst.kind = NodeKind::Object;
                dst.candidate_values.reset();
            }
        }
    }
    out.validate();
    return out;
}

SceneGraph prune_leaves(const SceneGraph& graph, std::size_t max_leaves, std::uint64_t seed) {
    if (max_leaves == 0) throw ValidationError("max_leaves must be positive");
    auto leaves = graph.leaves();
    if (leaves.size() <= max_leaves) return graph;

    std::sort(leaves.begin(), leaves.end(), [&](const NodeId& a, const NodeId& b) {
        return graph.normalized_path(a) < graph.normalized_path(b);
    });
    // Partial Fisher-Yates: the first max_leaves slots are the sample.
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < max_leaves; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng() % (leaves.size() - i));
        std::swap(leaves[i], leaves[j]);
    }
    std::set<NodeId> keep{graph.root()};
    for (const auto& c : graph.node(graph.root()).children) keep.insert(c);
    for (std::size_t i = 0; i < max_leaves; ++i) {
        keep.insert(leaves[i]);
        for (const auto& a : graph.ancestors(leaves[i])) keep.insert(a);
    }

    SceneGraph out = graph;
    for (const auto& id : graph.preorder()) {
        if (out.contains(id) && !keep.contains(id)) out.detach(id);
    }
    return out;
}

NodeId add_node(SceneGraph& graph, const NodeId& parent, const NodeSpec& spec, const Catalog& catalog) {
    const auto& p = graph.node(parent);
    if (p.is_attribute()) throw ValidationError("cannot add a child to attribute '" + p.name + "'");
    if (parent == graph.root()) throw ValidationError("the first level is fixed; add nodes below it");
    GraphNode node;
    node.name = checked_name(spec.name);
    require_unique_sibling(graph, parent, node.name);
    node.kind = spec.kind;
    if (spec.candidate_values) {
        if (spec.kind != NodeKind::Attribute) throw ValidationError("only attribute nodes take candidate values");
        node.candidate_values = validate_candidates(*spec.candidate_values);
    }
    node.scope = materialize(spec.scope, catalog);
    node.origin = spec.origin;
    node.id = graph.allocate_id();
    const NodeId id = graph.attach(parent, std::move(node));
    widen_ancestors(graph, id, resolve(graph.node(id).scope, catalog), catalog);
    return id;
}

EditOutcome edit_node(SceneGraph& graph, const NodeId& id, const NodePatch& patch, const Catalog& catalog) {
    const auto& current = graph.node(id);
    if (id == graph.root() || graph.is_first_level(id)) {
        if (patch.name) throw ValidationError("the root and first-level nodes cannot be renamed");
    }
    GraphNode updated = current;
    EditOutcome outcome;
    if (patch.name) {
        updated.name = checked_name(*patch.name);
        require_unique_sibling(graph, *graph.parent_of(id), updated.name, id);
    }
    if (patch.candidate_values) {
        if (!current.is_attribute()) throw ValidationError("only attribute nodes take candidate values");
        std::optional<std::vector<std::string>> next;
        if (!patch.candidate_values->empty()) next = validate_candidates(*patch.candidate_values);
        if (next != current.candidate_values) outcome.relabel_required = true;
        updated.candidate_values = std::move(next);
    }
    if (patch.scope) {
        auto next = materialize(*patch.scope, catalog);
        if (resolve(next, catalog) != resolve(current.scope, catalog) || next.spec() != current.scope.spec()) {
            if (current.is_attribute()) outcome.relabel_required = true;
        }
        updated.scope = std::move(next);
    }
    graph.node_mut(id) = std::move(updated);
    if (patch.scope) {
        // Keep descendants inside the node, and the node inside its ancestors.
        widen(graph.node_mut(id).scope, descendant_union(graph, id, catalog), catalog);
        widen_ancestors(graph, id, resolve(graph.node(id).scope, catalog), catalog);
    }
    return outcome;
}

std::vector<NodeId> remove_node(SceneGraph& graph, const NodeId& id) {
    graph.node(id);
    if (id == graph.root()) throw ValidationError("the root cannot be removed");
    if (graph.is_first_level(id)) throw ValidationError("first-level nodes cannot be removed");
    return graph.detach(id);
}

PartialSchema partial_schema(const SceneGraph& graph, const NodeId& attribute) {
    const auto& n = graph.node(attribute);
    if (!n.is_attribute()) throw ValidationError("'" + n.name + "' is not an attribute node");
    PartialSchema schema;
    auto chain = graph.ancestors(attribute);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        const auto& a = graph.node(*it);
        schema.path.push_back({a.name, a.kind});
    }
    schema.path.push_back({n.name, n.kind});
    schema.candidate_values = n.candidate_values;
    schema.target_node_id = attribute;
    return schema;
}

NodeId duplicate_branch(SceneGraph& graph, const NodeId& source, const std::string& new_name,
                        const ScopeSpec& new_scope, const Catalog& catalog) {
    const auto& src = graph.node(source);
    if (src.is_attribute()) throw ValidationError("only object nodes can be duplicated");
    auto parent = graph.parent_of(source);
    if (!parent) throw ValidationError("the root cannot be duplicated");
    if (*parent == graph.root()) throw ValidationError("first-level nodes cannot be duplicated");
    auto name = checked_name(new_name);
    require_unique_sibling(graph, *parent, name);
    const Scope scope = materialize(new_scope, catalog);

    GraphNode top;
    top.id = graph.allocate_id();
    top.name = name;
    top.kind = NodeKind::Object;
    top.scope = scope;
    top.origin = NodeOrigin::Duplicated;
    const NodeId top_id = graph.attach(*parent, std::move(top));

    std::vector<std::pair<NodeId, NodeId>> pending{{source, top_id}};
    while (!pending.empty()) {
        auto [from, to] = pending.back();
        pending.pop_back();
        const auto children = graph.node(from).children;
        for (const auto& c : children) {
            GraphNode copy = graph.node(c);
            copy.id = graph.allocate_id();
            copy.children.clear();
            copy.scope = scope;
            copy.origin = NodeOrigin::Duplicated;
            pending.emplace_back(c, graph.attach(to, std::move(copy)));
        }
    }
    widen_ancestors(graph, top_id, resolve(scope, catalog), catalog);
    return top_id;
}

std::vector<NodeId> extend_auto_scopes(SceneGraph& graph, const PromptId& prompt,
                                       const std::set<ImageId>& new_images, const Catalog& catalog) {
    if (new_images.empty()) return {};
    std::set<NodeId> grown;
    for (const auto& id : graph.preorder()) {
        const auto& scope = graph.node(id).scope;
        if (scope.lifecycle == Lifecycle::AutoExtended && scope.selector.covers_prompt(prompt)) {
            grown.insert(id);
        }
    }
    // Ancestors of a grown node must still contain it.
    for (const auto& id : std::vector<NodeId>(grown.begin(), grown.end())) {
        for (const auto& a : widen_ancestors(graph, id, new_images, catalog)) grown.insert(a);
    }
    std::vector<NodeId> out;
    for (const auto& id : graph.preorder()) {
        if (grown.contains(id)) out.push_back(id);
    }
    return out;
}

std::set<ImageId> resolve_scope(const SceneGraph& graph, const NodeId& id, const Catalog& catalog) {
    return resolve(graph.node(id).scope, catalog);
}

}  // namespace sgaudit::graph
