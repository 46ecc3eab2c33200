#include "sgaudit/adapters/mock.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/common/png.hpp"
#include "sgaudit/common/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

namespace sgaudit::adapters {

namespace {

void append_u64(Bytes& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

const std::array<std::string, 3> kOpenLabels{"present", "absent", "unclear"};

const std::vector<std::string> kGenericKeywords{
    "gender", "age", "clothing", "stethoscope", "facial expression", "ethnicity", "lighting", "posture",
};

struct Substitution {
    std::string span;
    std::string replacement;
};

const std::vector<Substitution> kSubstitutions{
    {"doctor", "nurse"},   {"nurse", "doctor"},     {"doctor", "surgeon"}, {"ceo", "teacher"},
    {"man", "woman"},      {"woman", "man"},        {"boy", "girl"},       {"girl", "boy"},
    {"cinematic", "candid"}, {"photo", "painting"}, {"young", "elderly"},
};

const std::vector<std::string> kModifiers{"elderly", "young", "smiling", "tired"};

bool contains_word(const std::string& text, const std::string& word) {
    auto ws = words(text);
    return std::find(ws.begin(), ws.end(), word) != ws.end();
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'';
}

/// Original-case occurrence of `word` in `text` as a whole word.
std::optional<std::string> find_word(const std::string& text, const std::string& word) {
    std::string lower(text.size(), ' ');
    std::transform(text.begin(), text.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::size_t pos = 0;
    while ((pos = lower.find(word, pos)) != std::string::npos) {
        bool left = pos == 0 || !is_word_char(lower[pos - 1]);
        std::size_t end = pos + word.size();
        bool right = end == lower.size() || !is_word_char(lower[end]);
        if (left && right) return text.substr(pos, word.size());
        ++pos;
    }
    return std::nullopt;
}

std::string apply(const std::string& text, const std::string& span, const std::string& replacement) {
    auto pos = text.find(span);
    if (pos == std::string::npos) return text;
    return text.substr(0, pos) + replacement + text.substr(pos + span.size());
}

bool in_history(const std::vector<SubstitutionTriple>& history, const PromptId& source, const std::string& span,
                const std::string& replacement) {
    return std::any_of(history.begin(), history.end(), [&](const SubstitutionTriple& t) {
        return t.source_prompt_id == source && normalize(t.replace_span) == normalize(span) &&
               normalize(t.replacement) == normalize(replacement);
    });
}

std::string plural(const std::string& noun) {
    if (noun.empty()) return noun;
    if (noun.back() == 's') return noun + "es";
    return noun + "s";
}

}  // namespace

const std::vector<VocabularyEntry>& mock_extraction_vocabulary() {
    static const std::vector<VocabularyEntry> vocab{
        {0, {"doctor"}},
        {0, {"nurse"}},
        {0, {"patient"}},
        {0, {"doctor", "white coat"}},
        {0, {"doctor", "clipboard"}},
        {0, {"patient", "hospital gown"}},
        {1, {"office"}},
        {1, {"medical equipment"}},
        {1, {"medical equipment", "monitor"}},
        {1, {"window"}},
        {1, {"hospital corridor"}},
        {1, {"bookshelf"}},
    };
    return vocab;
}

const std::vector<CriterionTemplate>& mock_criterion_templates() {
    static const std::vector<CriterionTemplate> table{
        {"stethoscope", std::nullopt, "stethoscope", {"wearing", "not wearing"}},
        {"clothing", "clothing", "clothing color", {"white", "blue", "green", "other"}},
        {"gender", std::nullopt, "gender", {"male", "female"}},
        {"age", std::nullopt, "age", {"young", "middle-aged", "elderly"}},
        {"facial expression", std::nullopt, "facial expression", {"smiling", "neutral", "serious"}},
        {"ethnicity", std::nullopt, "ethnicity", {"white", "black", "asian", "other"}},
    };
    return table;
}

std::vector<Bytes> MockImageGenerator::generate(const std::string& prompt_text, int n, std::uint64_t sub_seed) {
    if (n < 1) throw ValidationError("image count must be at least 1");
    constexpr std::uint32_t side = kMockImageSize;
    const std::string prompt_digest = sha256_hex(prompt_text);
    std::vector<Bytes> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        // Row 0 carries the prompt digest; the last pixel carries the index.
        Bytes rgb;
        rgb.reserve(side * side * 3);
        for (std::size_t k = 0; k < side * 3; ++k)
            rgb.push_back(static_cast<std::uint8_t>(std::stoi(prompt_digest.substr(k * 2 % 64, 2), nullptr, 16)));
        const std::string key = "gen|" + std::to_string(seed_) + "|" + std::to_string(sub_seed) + "|" + prompt_digest +
                                "|" + std::to_string(i);
        for (std::uint64_t block = 0; rgb.size() < side * side * 3; ++block)
            append_u64(rgb, hash64(key + "#" + std::to_string(block)));
        rgb.resize(side * side * 3);
        rgb[rgb.size() - 3] = static_cast<std::uint8_t>(i >> 8);
        rgb[rgb.size() - 2] = static_cast<std::uint8_t>(i);
        rgb[rgb.size() - 1] = 0;
        out.push_back(encode_png_rgb(side, side, rgb));
    }
    return out;
}

SceneGraph MockGraphExtractor::extract(std::span<const std::uint8_t> blob, const std::vector<std::string>& first_level) {
    if (!png_dimensions(blob)) throw ValidationError("blob is not a decodable image");
    const std::string digest = sha256_hex(blob);
    const auto& vocab = mock_extraction_vocabulary();
    const std::size_t want = 2 + hash64("extract|" + digest) % 3;

    std::vector<std::size_t> picked;
    for (std::size_t k = 0; picked.size() < want && k < 64; ++k) {
        std::size_t idx = hash64("extract|" + digest + "|" + std::to_string(k)) % vocab.size();
        if (std::find(picked.begin(), picked.end(), idx) == picked.end()) picked.push_back(idx);
    }

    auto g = SceneGraph::create(first_level);
    for (const auto& id : g.preorder()) g.node_mut(id).frequency = 1;
    for (auto idx : picked) {
        const auto& entry = vocab[idx];
        NodeId parent = g.root();
        parent = *g.find_child(parent, first_level[entry.first_level_slot % first_level.size()]);
        for (const auto& name : entry.path) {
            if (auto existing = g.find_child(parent, name)) {
                parent = *existing;
                continue;
            }
            graph::GraphNode node;
            node.id = g.allocate_id();
            node.name = name;
            node.frequency = 1;
            node.origin = graph::NodeOrigin::Extracted;
            parent = g.attach(parent, std::move(node));
        }
    }
    g.validate();
    return g;
}

std::string MockLabeler::label(const ImageRef& image, const PartialSchema& schema) {
    const auto h = hash64(image.id.str() + "|" + schema.path_string());
    if (schema.candidate_values && !schema.candidate_values->empty())
        return (*schema.candidate_values)[h % schema.candidate_values->size()];
    return kOpenLabels[h % kOpenLabels.size()];
}

std::vector<std::string> MockCriterionSuggester::keywords(const GraphSummary& graph, std::size_t count) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto push = [&](const std::string& w) {
        auto n = normalize(w);
        if (!n.empty() && seen.insert(n).second) out.push_back(n);
    };
    std::vector<std::string> names;
    for (const auto& p : graph.object_paths) names.push_back(p.back());
    const auto rot = hash64("keywords|" + std::to_string(seed_) + "|" + join(names, ",")) % kGenericKeywords.size();
    for (std::size_t i = 0; i < kGenericKeywords.size(); ++i) push(kGenericKeywords[(rot + i) % kGenericKeywords.size()]);
    for (const auto& n : names) push(n);
    if (out.size() > count) out.resize(count);
    return out;
}

std::string MockCriterionSuggester::key(const CriterionRequest& request) const {
    std::vector<std::string> kws;
    for (const auto& k : request.keywords) kws.push_back(normalize(k));
    return "criterion|" + std::to_string(seed_) + "|" + sha256_hex(request.first.blob) + "|" +
           sha256_hex(request.second.blob) + "|" + join(kws, ",");
}

CriterionProposal MockCriterionSuggester::suggest(const CriterionRequest& request) {
    if (request.first.id == request.second.id) throw ValidationError("criterion suggestion needs two distinct images");
    const auto h = hash64(key(request));

    std::string keyword = request.keywords.empty() ? kGenericKeywords[h % kGenericKeywords.size()]
                                                   : normalize(request.keywords[h % request.keywords.size()]);

    // Parent: first object named in either prompt, else a hashed pick.
    std::vector<std::string> parent;
    const auto& objects = request.graph.object_paths;
    for (const auto& path : objects) {
        auto name = normalize(path.back());
        if (contains_word(request.first.prompt_text, name) || contains_word(request.second.prompt_text, name)) {
            parent = path;
            break;
        }
    }
    if (parent.empty() && !objects.empty()) parent = objects[(h >> 8) % objects.size()];
    if (parent.empty()) {
        if (request.graph.first_level.empty()) throw SchemaError("graph summary has no first-level nodes");
        parent = {request.graph.first_level.front()};
    }

    CriterionProposal p;
    p.confidence = static_cast<double>(h % 100) / 100.0;
    const auto& table = mock_criterion_templates();
    auto it = std::find_if(table.begin(), table.end(), [&](const CriterionTemplate& t) { return t.keyword == keyword; });
    if (it != table.end()) {
        p.name = it->attribute;
        p.candidate_values = it->candidates;
        if (it->new_object) parent.push_back(*it->new_object);
    } else {
        p.name = keyword;
    }
    p.parent_path = parent;
    p.rationale = "Images " + request.first.id.str() + " and " + request.second.id.str() + " appear to differ in the " +
                  p.name + " of the " + parent.back() + ".";
    return p;
}

PromptProposal MockPromptSuggester::suggest(const std::vector<PromptInfo>& prompts, const GraphSummary&,
                                            const std::vector<SubstitutionTriple>& history) {
    if (prompts.empty()) throw ValidationError("prompt suggestion needs at least one prompt");
    std::set<std::string> existing;
    for (const auto& p : prompts) existing.insert(normalize(p.text));

    auto usable = [&](const PromptInfo& p, const std::string& span, const std::string& replacement) {
        return !in_history(history, p.id, span, replacement) && !existing.contains(normalize(apply(p.text, span, replacement)));
    };

    for (const auto& p : prompts) {
        for (const auto& sub : kSubstitutions) {
            auto span = find_word(p.text, sub.span);
            if (span && usable(p, *span, sub.replacement)) return {p.id, *span, sub.replacement};
        }
    }
    for (const auto& p : prompts) {
        auto ws = words(p.text);
        if (ws.empty()) continue;
        auto span = find_word(p.text, ws.back());
        if (!span) continue;
        for (const auto& m : kModifiers) {
            auto replacement = m + " " + *span;
            if (usable(p, *span, replacement)) return {p.id, *span, replacement};
        }
    }
    throw ValidationError("no unused prompt substitution left");
}

std::string MockNoteCompleter::complete(const NoteContext& context) {
    std::string sentence;
    if (!context.bookmarks.empty()) {
        const auto& latest = context.bookmarks.back();
        if (const auto* chart = std::get_if<session::ChartTarget>(&latest.target)) {
            const auto& path = chart->node_path;
            const std::string attribute = path.empty() ? "attribute" : path.back();
            const std::string subject = path.size() >= 2 ? plural(path[path.size() - 2]) : "images";
            const auto& snap = chart->snapshot;
            const session::DistributionRow* top = nullptr;
            for (const auto& row : snap.rows)
                if (!top || row.total() > top->total()) top = &row;
            if (!top || snap.total == 0) {
                sentence = "The " + attribute + " chart has no labels yet.";
            } else if (top->total() == snap.total) {
                sentence = "The " + attribute + " chart shows all " + subject + " labeled " + top->value + ".";
            } else {
                sentence = "The " + attribute + " chart shows " + std::to_string(top->total()) + " of " +
                           std::to_string(snap.total) + " " + subject + " labeled " + top->value + ".";
            }
        } else {
            const auto& image = std::get<session::ImageTarget>(latest.target).image_id;
            std::string prompt_text;
            if (auto it = context.image_prompts.find(image); it != context.image_prompts.end())
                for (const auto& p : context.prompts)
                    if (p.id == it->second) prompt_text = p.text;
            sentence = "Image " + image.str() + (prompt_text.empty() ? "" : " from \"" + prompt_text + "\"") +
                       " deserves a closer look.";
        }
    } else if (!trim(context.existing_notes).empty() && !context.prompts.empty()) {
        sentence = "So far " + std::to_string(context.prompts.size()) +
                   (context.prompts.size() == 1 ? " prompt has" : " prompts have") + " been audited.";
    }
    if (sentence.empty() || context.existing_notes.find(sentence) != std::string::npos) return {};
    const auto& prefix = context.cursor_prefix;
    if (!prefix.empty() && !std::isspace(static_cast<unsigned char>(prefix.back()))) sentence = " " + sentence;
    return sentence;
}

AdapterSet make_mock_adapters(std::uint64_t seed) {
    AdapterSet set;
    set.mode = AdapterMode::Mock;
    set.generator = std::make_shared<MockImageGenerator>(seed);
    set.graph_extractor = std::make_shared<MockGraphExtractor>();
    set.labeler = std::make_shared<MockLabeler>();
    set.criterion_suggester = std::make_shared<MockCriterionSuggester>(seed);
    set.prompt_suggester = std::make_shared<MockPromptSuggester>();
    set.note_completer = std::make_shared<MockNoteCompleter>();
    return set;
}

}  // namespace sgaudit::adapters
