#pragma once

#include "sgaudit/graph/operations.hpp"

#include <nlohmann/json.hpp>

namespace sgaudit::graph {

using Json = nlohmann::json;

std::string_view to_string(NodeKind kind);
std::string_view to_string(NodeOrigin origin);
std::string_view to_string(SelectorKind kind);
std::string_view to_string(Lifecycle lifecycle);
NodeKind node_kind_from(std::string_view text);
NodeOrigin node_origin_from(std::string_view text);
SelectorKind selector_kind_from(std::string_view text);
Lifecycle lifecycle_from(std::string_view text);

Json to_json(const Scope& scope);
Scope scope_from_json(const Json& j);
Json to_json(const ScopeSpec& spec);
ScopeSpec scope_spec_from_json(const Json& j);

/// Nested tree document: children appear in stored order, object keys sorted.
Json to_json(const SceneGraph& graph);
SceneGraph graph_from_json(const Json& j);  // validates; throws ValidationError

Json to_json(const PartialSchema& schema);

/// Stable text form used for persistence and replay comparison.
std::string canonical(const SceneGraph& graph);

}  // namespace sgaudit::graph
