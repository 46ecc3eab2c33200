#pragma once

#include "sgaudit/adapters/adapters.hpp"
#include "sgaudit/labeling/labeling.hpp"
#include "sgaudit/session/types.hpp"

#include <vector>

namespace sgaudit::engine {

using adapters::AdapterSet;
using session::AuditSession;

struct EngineOptions {
    std::size_t max_in_flight = labeling::kDefaultMaxInFlight;
    std::size_t graph_sample_size = 4;  // images sampled for the initial scene graph
    std::size_t graph_max_leaves = 5;
};

struct GenerationOutcome {
    PromptId prompt_id;
    std::vector<ImageId> image_ids;
    bool built_graph = false;
    std::vector<NodeId> labeled_nodes;  // attributes whose scope grew, in preorder
    std::size_t new_records = 0;
};

/// Calls the generator. Adapter failures are rethrown with the prompt id in
/// the message, keeping their kind.
std::vector<Bytes> generate_blobs(const AdapterSet& adapters, const session::Prompt& prompt,
                                  const session::GenerationRequest& request);

/// Ingests generated blobs, builds the initial scene graph on the session's
/// first generation and labels every attribute whose scope grew.
GenerationOutcome absorb_generation(AuditSession& session, const AdapterSet& adapters,
                                    const session::GenerationRequest& request, const std::vector<Bytes>& blobs,
                                    const EngineOptions& options = {});

/// add_prompt + generate_blobs + absorb_generation.
GenerationOutcome add_prompt(AuditSession& session, const AdapterSet& adapters, const std::string& text, int n,
                             session::PromptOrigin origin = session::PromptOrigin::User,
                             const EngineOptions& options = {});

/// `k` ids drawn without replacement from `pool` (sorted first), seeded.
std::vector<ImageId> sample_images(std::vector<ImageId> pool, std::size_t k, std::uint64_t seed);

/// Extracts a graph from each sampled image, merges them and prunes the
/// result. Replaces the session graph and records the sample.
void build_initial_graph(AuditSession& session, const AdapterSet& adapters, const std::vector<ImageId>& pool,
                         const EngineOptions& options = {});

struct CriterionOutcome {
    NodeId node_id;
    std::vector<session::LabelRecord> records;
};

/// Adds a node; attributes are labeled right away.
CriterionOutcome add_criterion(AuditSession& session, const AdapterSet& adapters, const NodeId& parent,
                               const graph::NodeSpec& spec, const EngineOptions& options = {});

}  // namespace sgaudit::engine
