#include "sgaudit/engine/engine.hpp"

#include "sgaudit/adapters/validate.hpp"
#include "sgaudit/common/error.hpp"
#include "sgaudit/common/parallel.hpp"
#include "sgaudit/graph/operations.hpp"
#include "sgaudit/session/store.hpp"

#include <algorithm>
#include <random>
#include <span>

namespace sgaudit::engine {

namespace {

template <typename E>
[[noreturn]] void rethrow_as(const std::string& message) {
    throw E(message);
}

[[noreturn]] void rethrow_with_prompt(const Error& e, const PromptId& prompt) {
    const std::string msg = "generation for prompt " + prompt.str() + " failed: " + e.what();
    switch (e.kind()) {
    case ErrorKind::Transport: rethrow_as<TransportError>(msg);
    case ErrorKind::Timeout: rethrow_as<TimeoutError>(msg);
    case ErrorKind::Schema: rethrow_as<SchemaError>(msg);
    default: rethrow_as<ValidationError>(msg);
    }
}

bool graph_untouched(const AuditSession& s) { return s.graph.size() == 1 + s.graph.first_level().size(); }

}  // namespace

std::vector<Bytes> generate_blobs(const AdapterSet& adapters, const session::Prompt& prompt,
                                  const session::GenerationRequest& request) {
    try {
        return adapters.generator->generate(prompt.text, request.n_images, request.sub_seed);
    } catch (const Error& e) {
        rethrow_with_prompt(e, prompt.id);
    }
}

GenerationOutcome absorb_generation(AuditSession& s, const AdapterSet& adapters,
                                    const session::GenerationRequest& request, const std::vector<Bytes>& blobs,
                                    const EngineOptions& options) {
    GenerationOutcome out;
    out.prompt_id = request.prompt_id;
    auto ingest = session::ingest_images(s, request, blobs);
    out.image_ids = ingest.image_ids;

    if (!s.graph_built) {
        // A graph the auditor already edited by hand is kept as is.
        if (graph_untouched(s) && !out.image_ids.empty()) {
            build_initial_graph(s, adapters, out.image_ids, options);
            out.built_graph = true;
        }
        s.graph_built = true;
    }

    for (const auto& id : ingest.affected_nodes) {
        if (!s.graph.contains(id) || !s.graph.node(id).is_attribute()) continue;
        out.labeled_nodes.push_back(id);
        out.new_records += labeling::label_images(s, id, *adapters.labeler, options.max_in_flight).size();
    }
    return out;
}

GenerationOutcome add_prompt(AuditSession& s, const AdapterSet& adapters, const std::string& text, int n,
                             session::PromptOrigin origin, const EngineOptions& options) {
    auto [prompt, request] = session::add_prompt(s, text, n, origin);
    auto blobs = generate_blobs(adapters, prompt, request);
    return absorb_generation(s, adapters, request, blobs, options);
}

std::vector<ImageId> sample_images(std::vector<ImageId> pool, std::size_t k, std::uint64_t seed) {
    std::sort(pool.begin(), pool.end());
    k = std::min(k, pool.size());
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        auto j = i + rng() % (pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

void build_initial_graph(AuditSession& s, const AdapterSet& adapters, const std::vector<ImageId>& pool,
                         const EngineOptions& options) {
    auto sample = sample_images(pool, options.graph_sample_size, hash64("graph-sample|" + std::to_string(s.seed)));
    const auto first_level = s.graph.first_level();
    auto graphs = parallel_map<graph::SceneGraph>(sample.size(), options.max_in_flight, [&](std::size_t i) {
        auto g = adapters.graph_extractor->extract(s.blob_of(sample[i]), first_level);
        adapters::check_extracted_graph(g, first_level);
        return g;
    });
    auto merged = graph::merge_scene_graphs(graphs, s.id_prefix());
    s.graph = graph::prune_leaves(merged, options.graph_max_leaves, hash64("graph-prune|" + std::to_string(s.seed)));
    s.graph_sample = std::move(sample);
}

CriterionOutcome add_criterion(AuditSession& s, const AdapterSet& adapters, const NodeId& parent,
                               const graph::NodeSpec& spec, const EngineOptions& options) {
    CriterionOutcome out;
    out.node_id = graph::add_node(s.graph, parent, spec, s.catalog);
    if (spec.kind == graph::NodeKind::Attribute)
        out.records = labeling::label_images(s, out.node_id, *adapters.labeler, options.max_in_flight);
    return out;
}

}  // namespace sgaudit::engine
