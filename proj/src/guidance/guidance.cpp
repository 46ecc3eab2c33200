#include "sgaudit/guidance/guidance.hpp"

#include "sgaudit/adapters/validate.hpp"
#include "sgaudit/common/error.hpp"
#include "sgaudit/common/log.hpp"
#include "sgaudit/common/text.hpp"
#include "sgaudit/graph/operations.hpp"
#include "sgaudit/session/store.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sgaudit::guidance {

using session::CriterionSuggestion;
using session::PromptSubstitution;
using session::SuggestionStatus;

namespace {

std::vector<std::string> clean_keywords(const std::vector<std::string>& raw, std::size_t limit) {
    std::vector<std::string> out;
    for (const auto& k : raw) {
        auto n = normalize(k);
        if (!n.empty() && std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
    if (out.size() > limit) out.resize(limit);
    return out;
}

SuggestionId next_suggestion_id(AuditSession& s) {
    return SuggestionId(s.id_prefix() + "sg" + padded(++s.counters.suggestion, 3));
}

template <typename Session>
auto& find_in(Session& s, const SuggestionId& id) {
    for (auto& sug : s.suggestion_history)
        if (std::visit([](const auto& x) -> const SuggestionId& { return x.id; }, sug) == id) return sug;
    throw NotFoundError("no suggestion " + id.str());
}

void require_proposed(SuggestionStatus status, const SuggestionId& id) {
    if (status != SuggestionStatus::Proposed)
        throw ConflictError("suggestion " + id.str() + " is already " + std::string(session::to_string(status)));
}

std::vector<adapters::PromptInfo> prompt_infos(const AuditSession& s) {
    std::vector<adapters::PromptInfo> out;
    for (const auto& p : s.prompts) out.push_back({p.id, p.text});
    return out;
}

adapters::ImageRef image_ref(const AuditSession& s, const ImageId& id) {
    return {id, s.blob_of(id), s.prompt(s.image(id).prompt_id).text};
}

bool same_triple(const PromptSubstitution& h, const adapters::PromptProposal& p) {
    return h.source_prompt_id == p.source_prompt_id && normalize(h.replace_span) == normalize(p.replace_span) &&
           normalize(h.replacement) == normalize(p.replacement);
}

}  // namespace

void GuidanceConfig::validate() const {
    if (!(confidence_threshold > 0.0 && confidence_threshold <= 1.0))
        throw ValidationError("confidence threshold must lie in (0, 1]");
    if (max_attempts < 1) throw ValidationError("max_attempts must be positive");
    if (keyword_count < 1) throw ValidationError("keyword_count must be positive");
}

const session::Suggestion& find_suggestion(const AuditSession& s, const SuggestionId& id) {
    return find_in(s, id);
}

std::vector<std::string> generate_keywords(const AuditSession& s, const AdapterSet& adapters,
                                           const GuidanceConfig& config) {
    config.validate();
    if (s.images.empty()) throw ValidationError("keywords need at least one generated image");
    auto raw = adapters.criterion_suggester->keywords(adapters::summarize(s.graph), config.keyword_count);
    return clean_keywords(raw, config.keyword_count);
}

std::pair<ImageId, ImageId> select_pair(const AuditSession& s, std::uint64_t request, int attempt) {
    std::mt19937_64 rng(hash64("pair|" + std::to_string(s.seed) + "|" + std::to_string(request) + "|" +
                               std::to_string(attempt)));
    std::vector<std::vector<ImageId>> groups;
    for (const auto& p : s.prompts) {
        auto imgs = s.catalog.images_of(p.id);
        if (imgs.size() >= 2) groups.emplace_back(imgs.begin(), imgs.end());
    }
    std::vector<ImageId> pool;
    if (!groups.empty()) {
        pool = groups[rng() % groups.size()];
    } else {
        auto all = s.catalog.all_images();
        pool.assign(all.begin(), all.end());
    }
    if (pool.size() < 2) throw ValidationError("analysis support needs at least two images");
    auto i = rng() % pool.size();
    auto j = rng() % (pool.size() - 1);
    if (j >= i) ++j;
    return {pool[i], pool[j]};
}

AnalysisResult audit_analysis_support(AuditSession& s, const AdapterSet& adapters,
                                      const std::vector<std::string>& keywords, const GuidanceConfig& config) {
    config.validate();
    if (s.images.size() < 2) throw ValidationError("analysis support needs at least two images");
    const auto request = ++s.counters.analysis_request;
    const auto summary = adapters::summarize(s.graph);
    const auto kws = clean_keywords(keywords, std::max<std::size_t>(keywords.size(), 1));

    AnalysisResult result;
    for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
        result.attempts_used = attempt;
        auto pair = select_pair(s, request, attempt);
        session::AnalysisAttempt log{request, attempt, pair, 0.0, {}};
        adapters::CriterionProposal p;
        try {
            p = adapters.criterion_suggester->suggest({image_ref(s, pair.first), image_ref(s, pair.second), kws, summary});
            adapters::check_criterion_proposal(p, summary);
        } catch (const Error& e) {
            log.outcome = e.what();
            s.analysis_log.push_back(std::move(log));
            continue;
        }
        log.confidence = p.confidence;
        if (p.confidence < config.confidence_threshold) {
            log.outcome = "below_threshold";
            s.analysis_log.push_back(std::move(log));
            continue;
        }
        log.outcome = "accepted";
        s.analysis_log.push_back(std::move(log));

        CriterionSuggestion c;
        c.id = next_suggestion_id(s);
        c.image_pair = pair;
        std::set<PromptId> prompts{s.catalog.prompt_of(pair.first), s.catalog.prompt_of(pair.second)};
        c.node_spec = {p.name, graph::NodeKind::Attribute,
                       {graph::Selector::of_prompts(prompts), graph::Lifecycle::AutoExtended}, p.candidate_values,
                       graph::NodeOrigin::SuggestionApplied};
        c.parent_path = p.parent_path;
        c.rationale = p.rationale;
        c.confidence = p.confidence;
        c.attempts_used = attempt;
        c.keywords = kws;
        s.suggestion_history.emplace_back(c);
        result.suggestion = c.id;
        return result;
    }
    return result;
}

CriterionApplied apply_criterion_suggestion(AuditSession& s, const AdapterSet& adapters, const SuggestionId& id,
                                            const engine::EngineOptions& options) {
    auto* c = std::get_if<CriterionSuggestion>(&find_in(s, id));
    if (!c) throw ValidationError(id.str() + " is not a criterion suggestion");
    require_proposed(c->status, id);
    if (c->parent_path.empty()) throw ValidationError("suggestion has no parent path");

    // Work on a copy so a failure leaves the graph untouched.
    auto g = s.graph;
    CriterionApplied out;
    auto top = g.find_child(g.root(), c->parent_path.front());
    if (!top) throw ValidationError("'" + c->parent_path.front() + "' is not a first-level node");
    NodeId parent = *top;
    for (std::size_t i = 1; i < c->parent_path.size(); ++i) {
        const auto& name = c->parent_path[i];
        if (auto existing = g.find_child(parent, name)) {
            if (g.node(*existing).is_attribute()) throw ValidationError("'" + name + "' is an attribute");
            parent = *existing;
            continue;
        }
        graph::NodeSpec obj{trim(name), graph::NodeKind::Object, c->node_spec.scope, std::nullopt,
                            graph::NodeOrigin::SuggestionApplied};
        parent = graph::add_node(g, parent, obj, s.catalog);
        out.created_objects.push_back(parent);
    }
    out.node_id = graph::add_node(g, parent, c->node_spec, s.catalog);
    s.graph = std::move(g);

    c->status = SuggestionStatus::Applied;
    c->applied_node = out.node_id;
    out.records = labeling::label_images(s, out.node_id, *adapters.labeler, options.max_in_flight);
    return out;
}

void dismiss_suggestion(AuditSession& s, const SuggestionId& id) {
    std::visit(
        [&](auto& x) {
            require_proposed(x.status, id);
            x.status = SuggestionStatus::Dismissed;
        },
        find_in(s, id));
}

SuggestionId prompt_suggestion(AuditSession& s, const AdapterSet& adapters) {
    if (s.prompts.empty()) throw ValidationError("prompt suggestion needs at least one prompt");
    const auto infos = prompt_infos(s);
    std::vector<adapters::SubstitutionTriple> history;
    std::vector<const PromptSubstitution*> past;
    for (const auto& sug : s.suggestion_history)
        if (const auto* p = std::get_if<PromptSubstitution>(&sug)) {
            history.push_back({p->source_prompt_id, p->replace_span, p->replacement});
            past.push_back(p);
        }
    const auto summary = adapters::summarize(s.graph);

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        adapters::PromptProposal p;
        try {
            p = adapters.prompt_suggester->suggest(infos, summary, history);
            adapters::check_prompt_proposal(p, infos);
        } catch (const ValidationError& e) {
            last_error = e.what();
            continue;
        } catch (const SchemaError& e) {
            last_error = e.what();
            continue;
        }
        if (std::any_of(past.begin(), past.end(), [&](const auto* h) { return same_triple(*h, p); })) {
            last_error = "suggested substitution repeats an earlier one";
            continue;
        }
        PromptSubstitution sub;
        sub.id = next_suggestion_id(s);
        sub.source_prompt_id = p.source_prompt_id;
        sub.replace_span = p.replace_span;
        sub.replacement = trim(p.replacement);
        s.suggestion_history.emplace_back(sub);
        return sub.id;
    }
    throw ValidationError("no valid prompt suggestion: " + last_error);
}

SubstitutionApplied apply_prompt_substitution(AuditSession& s, const AdapterSet& adapters, const SuggestionId& id,
                                              int n_images, const engine::EngineOptions& options) {
    auto* sub = std::get_if<PromptSubstitution>(&find_in(s, id));
    if (!sub) throw ValidationError(id.str() + " is not a prompt substitution");
    require_proposed(sub->status, id);
    if (n_images < 1) throw ValidationError("image count must be at least 1");
    const auto& source = s.prompt(sub->source_prompt_id);
    auto pos = source.text.find(sub->replace_span);
    if (pos == std::string::npos) throw ValidationError("span no longer occurs in the source prompt");
    const std::string text = source.text.substr(0, pos) + sub->replacement + source.text.substr(pos + sub->replace_span.size());

    std::optional<NodeId> match;
    const auto span = normalize(sub->replace_span);
    for (const auto& nid : s.graph.preorder()) {
        const auto& n = s.graph.node(nid);
        if (nid == s.graph.root() || s.graph.is_first_level(nid) || n.is_attribute()) continue;
        if (normalize(n.name) == span) {
            match = nid;
            break;
        }
    }

    // Undo state for a failed generation call.
    auto saved_prompts = s.prompts;
    auto saved_counters = s.counters;
    auto saved_graph = s.graph;
    auto saved_catalog = s.catalog;

    SubstitutionApplied out;
    auto [prompt, request] = session::add_prompt(s, text, n_images, session::PromptOrigin::SuggestionApplied);
    out.prompt_id = prompt.id;
    if (match) {
        auto parent = *s.graph.parent_of(*match);
        if (s.graph.find_child(parent, sub->replacement)) {
            out.note = "an object named '" + sub->replacement + "' already exists; no branch duplicated";
        } else {
            graph::ScopeSpec scope{graph::Selector::of_prompts({prompt.id}), graph::Lifecycle::AutoExtended};
            out.duplicated_branch = graph::duplicate_branch(s.graph, *match, sub->replacement, scope, s.catalog);
        }
    } else {
        out.note = "no object named '" + sub->replace_span + "' in the scene graph; no branch duplicated";
    }

    std::vector<Bytes> blobs;
    try {
        blobs = engine::generate_blobs(adapters, prompt, request);
    } catch (...) {
        s.prompts = std::move(saved_prompts);
        s.counters = saved_counters;
        s.graph = std::move(saved_graph);
        s.catalog = std::move(saved_catalog);
        throw;
    }
    sub->status = SuggestionStatus::Applied;
    sub->applied_prompt = prompt.id;
    sub->duplicated_branch = out.duplicated_branch;
    out.generation = engine::absorb_generation(s, adapters, request, blobs, options);
    return out;
}

std::string autocomplete_note(const AuditSession& s, const AdapterSet& adapters, const std::string& cursor_prefix) {
    adapters::NoteContext ctx;
    ctx.prompts = prompt_infos(s);
    ctx.bookmarks = s.bookmarks;
    for (const auto& b : s.bookmarks)
        if (const auto* img = std::get_if<session::ImageTarget>(&b.target))
            if (s.catalog.has_image(img->image_id)) ctx.image_prompts[img->image_id] = s.catalog.prompt_of(img->image_id);
    ctx.existing_notes = s.general_notes;
    ctx.cursor_prefix = cursor_prefix;
    try {
        return adapters.note_completer->complete(ctx);
    } catch (const Error& e) {
        log_warning(std::string("note completion failed: ") + e.what());
        return {};
    }
}

}  // namespace sgaudit::guidance
