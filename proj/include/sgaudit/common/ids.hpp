#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace sgaudit {

/// Opaque string identifier tagged by the entity it names, so a node id can
/// never be passed where an image id is expected.
template <typename Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Id&, const Id&) = default;
    friend bool operator==(const Id&, const Id&) = default;

    friend std::ostream& operator<<(std::ostream& os, const Id& id) { return os << id.value_; }

private:
    std::string value_;
};

using SessionId = Id<struct SessionTag>;
using PromptId = Id<struct PromptTag>;
using ImageId = Id<struct ImageTag>;
using NodeId = Id<struct NodeTag>;
using BookmarkId = Id<struct BookmarkTag>;
using SuggestionId = Id<struct SuggestionTag>;

}  // namespace sgaudit

template <typename Tag>
struct std::hash<sgaudit::Id<Tag>> {
    std::size_t operator()(const sgaudit::Id<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
