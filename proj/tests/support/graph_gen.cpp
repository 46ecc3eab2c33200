#include "graph_gen.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/common/text.hpp"

#include <algorithm>

namespace gen {
namespace {

const std::vector<std::string> kNames{"doctor", "nurse", "patient", "coat", "stethoscope", "office",
                                      "window", "desk", "gender", "age", "hair", "lamp",
                                      "Chart", "monitor", "bed", "badge"};
const std::vector<std::string> kValues{"male", "female", "young", "old", "red", "blue", "yes", "no"};

}  // namespace

PromptId World::add_prompt() {
    PromptId p("p" + std::to_string(next_prompt++));
    catalog.add_prompt(p);
    prompts.push_back(p);
    return p;
}

std::set<ImageId> World::add_images(const PromptId& prompt, int count) {
    std::set<ImageId> out;
    for (int i = 0; i < count; ++i) {
        ImageId id("img" + padded(next_image++, 4));
        catalog.add_image(prompt, id);
        image_to_prompt[id] = prompt;
        out.insert(id);
    }
    return out;
}

World random_world(std::mt19937_64& rng) {
    World w;
    int prompts = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < prompts; ++i) w.add_images(w.add_prompt(), static_cast<int>(rng() % 5));
    return w;
}

ScopeSpec random_scope(std::mt19937_64& rng, const World& world) {
    ScopeSpec s;
    s.lifecycle = rng() % 2 ? Lifecycle::Fixed : Lifecycle::AutoExtended;
    switch (rng() % 4) {
        case 0: s.selector = Selector::all_prompts(); break;
        case 1: s.selector = Selector::all_images(); break;
        case 2: {
            std::set<PromptId> ps;
            for (const auto& p : world.prompts) {
                if (rng() % 2) ps.insert(p);
            }
            s.selector = Selector::of_prompts(ps);
            break;
        }
        default: {
            std::set<ImageId> is;
            for (const auto& [img, p] : world.image_to_prompt) {
                if (rng() % 2) is.insert(img);
            }
            s.selector = Selector::of_images(is);
            s.lifecycle = Lifecycle::Fixed;
        }
    }
    return s;
}

NodeSpec random_spec(std::mt19937_64& rng, const World& world, NodeKind kind) {
    NodeSpec spec;
    spec.name = pick(rng, kNames);
    spec.kind = kind;
    spec.scope = random_scope(rng, world);
    if (kind == NodeKind::Attribute && rng() % 3 != 0) {
        std::vector<std::string> cands;
        std::size_t n = 2 + rng() % 3;
        for (std::size_t i = 0; cands.size() < n && i < 20; ++i) {
            auto v = pick(rng, kValues);
            if (std::find(cands.begin(), cands.end(), v) == cands.end()) cands.push_back(v);
        }
        spec.candidate_values = cands;
    }
    return spec;
}

std::optional<NodeId> random_add(std::mt19937_64& rng, World& world) {
    std::vector<NodeId> objects;
    for (const auto& id : world.graph.preorder()) {
        if (!world.graph.node(id).is_attribute()) objects.push_back(id);
    }
    auto parent = pick(rng, objects);
    auto kind = rng() % 2 ? NodeKind::Attribute : NodeKind::Object;
    try {
        return add_node(world.graph, parent, random_spec(rng, world, kind), world.catalog);
    } catch (const ValidationError&) {
        return std::nullopt;
    }
}

SceneGraph random_graph(std::mt19937_64& rng, const std::vector<std::string>& first_level, int max_nodes) {
    SceneGraph g = new_graph(first_level);
    for (auto& [id, n] : g.nodes()) g.node_mut(id).frequency = 1;
    Catalog empty;
    int target = static_cast<int>(rng() % static_cast<unsigned>(max_nodes + 1));
    for (int i = 0; i < target; ++i) {
        std::vector<NodeId> objects;
        for (const auto& id : g.preorder()) {
            if (!g.node(id).is_attribute()) objects.push_back(id);
        }
        NodeSpec spec;
        spec.name = pick(rng, kNames);
        spec.kind = rng() % 4 == 0 ? NodeKind::Attribute : NodeKind::Object;
        spec.origin = NodeOrigin::Extracted;
        try {
            auto id = add_node(g, pick(rng, objects), spec, empty);
            g.node_mut(id).frequency = 1 + rng() % 3;
        } catch (const ValidationError&) {
        }
    }
    return g;
}

}  // namespace gen
