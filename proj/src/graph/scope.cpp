#include "sgaudit/graph/scope.hpp"

#include "sgaudit/common/error.hpp"

#include <algorithm>

namespace sgaudit::graph {

void Catalog::add_prompt(const PromptId& prompt) { by_prompt_.try_emplace(prompt); }

void Catalog::add_image(const PromptId& prompt, const ImageId& image) {
    by_prompt_[prompt].insert(image);
    prompt_of_[image] = prompt;
}

const PromptId& Catalog::prompt_of(const ImageId& image) const {
    auto it = prompt_of_.find(image);
    if (it == prompt_of_.end()) throw NotFoundError("unknown image " + image.str());
    return it->second;
}

std::set<ImageId> Catalog::images_of(const PromptId& prompt) const {
    auto it = by_prompt_.find(prompt);
    return it == by_prompt_.end() ? std::set<ImageId>{} : it->second;
}

std::set<ImageId> Catalog::all_images() const {
    std::set<ImageId> out;
    for (const auto& [image, prompt] : prompt_of_) out.insert(image);
    return out;
}

bool Selector::covers_prompt(const PromptId& prompt) const {
    switch (kind) {
        case SelectorKind::AllPrompts:
        case SelectorKind::AllImages: return true;
        case SelectorKind::Prompts: return prompts.contains(prompt);
        case SelectorKind::Images: return false;
    }
    return false;
}

namespace {

std::set<ImageId> evaluate(const Selector& selector, const Catalog& catalog) {
    switch (selector.kind) {
        case SelectorKind::AllPrompts:
        case SelectorKind::AllImages: return catalog.all_images();
        case SelectorKind::Prompts: {
            std::set<ImageId> out;
            for (const auto& p : selector.prompts) {
                auto imgs = catalog.images_of(p);
                out.insert(imgs.begin(), imgs.end());
            }
            return out;
        }
        case SelectorKind::Images: {
            std::set<ImageId> out;
            for (const auto& i : selector.images) {
                if (catalog.has_image(i)) out.insert(i);
            }
            return out;
        }
    }
    return {};
}

}  // namespace

Scope materialize(const ScopeSpec& spec, const Catalog& catalog) {
    if (spec.selector.kind == SelectorKind::Images && spec.lifecycle != Lifecycle::Fixed) {
        throw ValidationError("an explicit image selection must use a fixed scope");
    }
    for (const auto& p : spec.selector.prompts) {
        if (!catalog.has_prompt(p)) throw ValidationError("scope references unknown prompt " + p.str());
    }
    for (const auto& i : spec.selector.images) {
        if (!catalog.has_image(i)) throw ValidationError("scope references unknown image " + i.str());
    }
    Scope scope{spec.selector, spec.lifecycle, {}};
    if (spec.lifecycle == Lifecycle::Fixed) scope.frozen = evaluate(spec.selector, catalog);
    return scope;
}

std::set<ImageId> resolve(const Scope& scope, const Catalog& catalog) {
    if (scope.lifecycle == Lifecycle::Fixed) return scope.frozen;
    return evaluate(scope.selector, catalog);
}

bool widen(Scope& scope, const std::set<ImageId>& images, const Catalog& catalog) {
    if (images.empty()) return false;
    auto current = resolve(scope, catalog);
    if (std::includes(current.begin(), current.end(), images.begin(), images.end())) return false;
    current.insert(images.begin(), images.end());
    if (scope.lifecycle == Lifecycle::Fixed) {
        scope.frozen = current;
        if (scope.selector.kind == SelectorKind::Images) scope.selector.images = current;
    } else {
        scope = Scope{Selector::of_images(current), Lifecycle::Fixed, current};
    }
    return true;
}

}  // namespace sgaudit::graph
