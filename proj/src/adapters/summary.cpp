#include "sgaudit/adapters/adapters.hpp"

namespace sgaudit::adapters {

GraphSummary summarize(const SceneGraph& graph) {
    GraphSummary out;
    out.first_level = graph.first_level();
    for (const auto& id : graph.preorder()) {
        if (id == graph.root() || graph.is_first_level(id)) continue;
        auto path = graph.path_names(id);
        path.erase(path.begin());
        if (graph.node(id).is_attribute())
            out.attribute_paths.push_back(std::move(path));
        else
            out.object_paths.push_back(std::move(path));
    }
    return out;
}

}  // namespace sgaudit::adapters
