#pragma once

#include "sgaudit/common/ids.hpp"

#include <map>
#include <set>
#include <vector>

namespace sgaudit::graph {

/// Prompt -> images mapping for one session. Scopes are resolved against it.
class Catalog {
public:
    void add_prompt(const PromptId& prompt);
    void add_image(const PromptId& prompt, const ImageId& image);

    bool has_prompt(const PromptId& prompt) const { return by_prompt_.contains(prompt); }
    bool has_image(const ImageId& image) const { return prompt_of_.contains(image); }
    const PromptId& prompt_of(const ImageId& image) const;  // throws NotFoundError

    std::set<ImageId> images_of(const PromptId& prompt) const;
    std::set<ImageId> all_images() const;
    const std::map<PromptId, std::set<ImageId>>& by_prompt() const { return by_prompt_; }

private:
    std::map<PromptId, std::set<ImageId>> by_prompt_;
    std::map<ImageId, PromptId> prompt_of_;
};

enum class SelectorKind { AllPrompts, Prompts, AllImages, Images };
enum class Lifecycle { Fixed, AutoExtended };

struct Selector {
    SelectorKind kind = SelectorKind::AllImages;
    std::set<PromptId> prompts;  // kind == Prompts
    std::set<ImageId> images;    // kind == Images

    static Selector all_prompts() { return {SelectorKind::AllPrompts, {}, {}}; }
    static Selector all_images() { return {SelectorKind::AllImages, {}, {}}; }
    static Selector of_prompts(std::set<PromptId> p) { return {SelectorKind::Prompts, std::move(p), {}}; }
    static Selector of_images(std::set<ImageId> i) { return {SelectorKind::Images, {}, std::move(i)}; }

    bool covers_prompt(const PromptId& prompt) const;
    friend bool operator==(const Selector&, const Selector&) = default;
};

/// What a caller asks for. A Fixed spec is frozen against the catalog when it
/// is materialized into a Scope.
struct ScopeSpec {
    Selector selector;
    Lifecycle lifecycle = Lifecycle::AutoExtended;

    friend bool operator==(const ScopeSpec&, const ScopeSpec&) = default;
};

struct Scope {
    Selector selector;
    Lifecycle lifecycle = Lifecycle::AutoExtended;
    std::set<ImageId> frozen;  // meaningful iff lifecycle == Fixed

    static Scope all_images_auto() { return {Selector::all_images(), Lifecycle::AutoExtended, {}}; }

    ScopeSpec spec() const { return {selector, lifecycle}; }
    friend bool operator==(const Scope&, const Scope&) = default;
};

/// Validates the spec (Images selectors must be Fixed; referenced prompts and
/// images must exist) and freezes Fixed scopes.
Scope materialize(const ScopeSpec& spec, const Catalog& catalog);

std::set<ImageId> resolve(const Scope& scope, const Catalog& catalog);

/// Makes `scope` resolve to a superset of `images`. Fixed scopes grow their
/// frozen set; AutoExtended scopes that would exclude some of the images become
/// a Fixed explicit-image union. Returns true if the resolution changed.
bool widen(Scope& scope, const std::set<ImageId>& images, const Catalog& catalog);

}  // namespace sgaudit::graph
