#pragma once

#include "sgaudit/adapters/adapters.hpp"

namespace sgaudit::adapters {

/// Side length of the square PNGs produced by the mock generator.
inline constexpr std::uint32_t kMockImageSize = 8;

/// Extraction vocabulary: (first-level slot, path below it). The slot is taken
/// modulo the session's first-level size.
struct VocabularyEntry {
    std::size_t first_level_slot;
    std::vector<std::string> path;
};
const std::vector<VocabularyEntry>& mock_extraction_vocabulary();

/// Generic criteria the mock suggester knows how to phrase.
struct CriterionTemplate {
    std::string keyword;
    std::optional<std::string> new_object;  // proposed intermediate object, if any
    std::string attribute;
    std::vector<std::string> candidates;
};
const std::vector<CriterionTemplate>& mock_criterion_templates();

/// Every output is a pure function of the call inputs and the seed.
class MockImageGenerator final : public ImageGenerator {
public:
    explicit MockImageGenerator(std::uint64_t seed) : seed_(seed) {}
    std::vector<Bytes> generate(const std::string& prompt_text, int n, std::uint64_t sub_seed) override;

private:
    std::uint64_t seed_;
};

/// Picks 2-4 vocabulary entries keyed by the blob digest.
class MockGraphExtractor final : public GraphExtractor {
public:
    SceneGraph extract(std::span<const std::uint8_t> blob, const std::vector<std::string>& first_level) override;
};

/// candidates[hash64(image_id + "|" + schema path) % n]; open-ended schemas
/// draw from {present, absent, unclear} the same way.
class MockLabeler final : public Labeler {
public:
    std::string label(const ImageRef& image, const PartialSchema& schema) override;
};

class MockCriterionSuggester final : public CriterionSuggester {
public:
    explicit MockCriterionSuggester(std::uint64_t seed) : seed_(seed) {}
    std::vector<std::string> keywords(const GraphSummary& graph, std::size_t count) override;
    CriterionProposal suggest(const CriterionRequest& request) override;

    /// The hashing key behind suggest(); exposed so tests can recompute it.
    std::string key(const CriterionRequest& request) const;

private:
    std::uint64_t seed_;
};

class MockPromptSuggester final : public PromptSuggester {
public:
    PromptProposal suggest(const std::vector<PromptInfo>& prompts, const GraphSummary& graph,
                           const std::vector<SubstitutionTriple>& history) override;
};

class MockNoteCompleter final : public NoteCompleter {
public:
    std::string complete(const NoteContext& context) override;
};

AdapterSet make_mock_adapters(std::uint64_t seed);

}  // namespace sgaudit::adapters
