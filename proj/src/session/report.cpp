#include "sgaudit/common/error.hpp"
#include "sgaudit/common/text.hpp"
#include "sgaudit/session/store.hpp"

#include <algorithm>
#include <sstream>

namespace sgaudit::session {
namespace {

constexpr const char* kReportFormat = "sgaudit-report";

std::string prompt_label(const AuditSession& s, const PromptId& id) {
    for (const auto& p : s.prompts) {
        if (p.id == id) return "P" + std::to_string(p.color_index + 1) + " \"" + p.text + "\"";
    }
    return id.str();
}

void write_table(std::ostream& os, const AuditSession& s, const Distribution& d) {
    std::vector<PromptId> columns;
    for (const auto& row : d.rows) {
        for (const auto& c : row.counts) {
            if (std::find(columns.begin(), columns.end(), c.prompt_id) == columns.end()) columns.push_back(c.prompt_id);
        }
    }
    os << "| Label |";
    for (const auto& c : columns) os << " " << prompt_label(s, c) << " |";
    os << " Total |\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) os << "---:|";
    os << "---:|\n";
    for (const auto& row : d.rows) {
        os << "| " << row.value << " |";
        for (const auto& c : columns) {
            std::uint64_t n = 0;
            for (const auto& pc : row.counts) {
                if (pc.prompt_id == c) n = pc.count;
            }
            os << " " << n << " |";
        }
        os << " " << row.total() << " |\n";
    }
    os << "\nLabelled images: " << d.total << "\n";
}

}  // namespace

Report export_report(const AuditSession& s, const std::string& images_dir) {
    std::ostringstream md;
    md << "# Audit report\n\n";
    md << "- Session: `" << s.id << "`\n";
    md << "- Model: `" << s.model_id << "`\n";
    md << "- Seed: " << s.seed << "\n\n";

    if (!s.prompts.empty()) {
        md << "## Prompts\n\n| Prompt | Text | Colour | Images |\n|---|---|---|---:|\n";
        for (const auto& p : s.prompts) {
            md << "| P" << p.color_index + 1 << " | " << p.text << " | " << palette_color(p.color_index) << " | "
               << s.catalog.images_of(p.id).size() << " |\n";
        }
        md << "\n";
    }

    md << "## General notes\n\n";
    md << (s.general_notes.empty() ? std::string("_No general notes._") : s.general_notes) << "\n";

    Json evidence = Json::array();
    if (!s.bookmarks.empty()) md << "\n## Evidence\n";
    int n = 0;
    for (const auto& b : s.bookmarks) {
        ++n;
        Json entry{{"bookmark", to_json(b)}};
        if (const auto* img = std::get_if<ImageTarget>(&b.target)) {
            md << "\n### " << n << ". Image `" << img->image_id << "`\n\n";
            auto it = s.images.find(img->image_id);
            if (it != s.images.end()) {
                const auto& gi = it->second;
                auto file = images_dir + "/" + gi.blob.digest + ".png";
                md << "![" << gi.id << "](" << file << ")\n\n";
                md << "From " << prompt_label(s, gi.prompt_id) << ", image " << gi.index + 1 << " of its batch.\n";
                entry["image"] = {{"prompt_id", gi.prompt_id.str()}, {"digest", gi.blob.digest}, {"file", file}};
            }
        } else {
            const auto& chart = std::get<ChartTarget>(b.target);
            md << "\n### " << n << ". Chart: " << join(chart.node_path, " / ") << "\n\n";
            write_table(md, s, chart.snapshot);
        }
        md << "\n**Comment:**\n\n" << b.comment << "\n";
        evidence.push_back(std::move(entry));
    }

    Json prompts = Json::array();
    for (const auto& p : s.prompts) {
        prompts.push_back({{"id", p.id.str()}, {"text", p.text}, {"color", palette_color(p.color_index)}});
    }
    Json structured{{"format", kReportFormat},
                    {"version", 1},
                    {"session_id", s.id.str()},
                    {"model_id", s.model_id},
                    {"seed", s.seed},
                    {"general_notes", s.general_notes},
                    {"prompts", std::move(prompts)},
                    {"evidence", std::move(evidence)}};
    return {md.str(), std::move(structured)};
}

std::vector<Bookmark> import_report_evidence(const Json& structured) {
    try {
        if (structured.at("format").get<std::string>() != kReportFormat) {
            throw ValidationError("not a structured audit report");
        }
        std::vector<Bookmark> out;
        for (const auto& e : structured.at("evidence")) out.push_back(bookmark_from_json(e.at("bookmark")));
        return out;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed report: ") + e.what());
    }
}

}  // namespace sgaudit::session
