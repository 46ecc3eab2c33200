#pragma once

#include "sgaudit/adapters/adapters.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace sgaudit::adapters {

inline constexpr int kProtocolVersion = 1;

/// Capability names double as endpoint paths ("/generate", ...).
inline const std::vector<std::string> kCapabilities{
    "generate", "extract", "label", "suggest-criterion", "suggest-prompt", "complete",
};

struct RemoteConfig {
    std::string base_url;                         // e.g. http://127.0.0.1:9000/v1
    std::map<std::string, std::string> endpoints;  // capability -> full URL, overrides base_url
    std::string bearer_token;
    int timeout_ms = 60000;
    std::filesystem::path template_dir;

    /// SGAUDIT_REMOTE_URL, SGAUDIT_REMOTE_<CAPABILITY>_URL (e.g.
    /// SGAUDIT_REMOTE_SUGGEST_PROMPT_URL), SGAUDIT_REMOTE_TOKEN,
    /// SGAUDIT_REMOTE_TIMEOUT_MS and SGAUDIT_TEMPLATE_DIR.
    static RemoteConfig from_env();

    std::string url_for(const std::string& capability) const;  // throws ValidationError if unset
};

/// Instruction templates, one "<name>.txt" per capability plus "keywords.txt".
/// Placeholders look like {{name}}.
class TemplateSet {
public:
    static TemplateSet load(const std::filesystem::path& dir);  // throws IoError
    std::string render(const std::string& name, const std::map<std::string, std::string>& values) const;

private:
    std::map<std::string, std::string> templates_;
};

std::filesystem::path default_template_dir();

/// POSTs versioned JSON documents. Maps failures onto TransportError,
/// TimeoutError and SchemaError.
class RemoteClient {
public:
    explicit RemoteClient(RemoteConfig config);
    nlohmann::json post(const std::string& capability, nlohmann::json body) const;
    const RemoteConfig& config() const { return config_; }

private:
    RemoteConfig config_;
};

/// Parses the nested {name, kind, candidate_values?, children} tree returned by
/// /extract. Throws SchemaError on any structural problem.
SceneGraph graph_from_wire(const nlohmann::json& root, const std::vector<std::string>& first_level);
nlohmann::json to_wire(const GraphSummary& summary);

AdapterSet make_remote_adapters(const RemoteConfig& config);

}  // namespace sgaudit::adapters
