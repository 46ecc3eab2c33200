#include "sgaudit/labeling/labeling.hpp"

#include "sgaudit/adapters/validate.hpp"
#include "sgaudit/common/error.hpp"
#include "sgaudit/common/parallel.hpp"
#include "sgaudit/common/text.hpp"
#include "sgaudit/graph/operations.hpp"

#include <algorithm>
#include <map>

namespace sgaudit::labeling {

using session::LabelOrigin;
using session::LabelStatus;

namespace {

const graph::GraphNode& require_attribute(const AuditSession& s, const NodeId& node) {
    const auto& n = s.graph.node(node);
    if (!n.is_attribute()) throw ValidationError("'" + n.name + "' is not an attribute");
    return n;
}

/// Index of the non-retired record for (node, image), if any.
std::optional<std::size_t> active_record(const AuditSession& s, const NodeId& node, const ImageId& image) {
    for (std::size_t i = 0; i < s.label_records.size(); ++i) {
        const auto& r = s.label_records[i];
        if (!r.retired && r.node_id == node && r.image_id == image) return i;
    }
    return std::nullopt;
}

bool on_list(const graph::GraphNode& n, const std::string& value) {
    if (!n.candidate_values) return true;
    const auto& c = *n.candidate_values;
    return std::find(c.begin(), c.end(), value) != c.end();
}

std::size_t retire_out_of_scope(AuditSession& s, const NodeId& node, const std::set<ImageId>& scope) {
    std::size_t n = 0;
    for (auto& r : s.label_records) {
        if (r.retired || r.node_id != node || scope.contains(r.image_id)) continue;
        r.retired = true;
        ++n;
    }
    return n;
}

std::vector<LabelRecord> label_set(AuditSession& s, const NodeId& node, const std::set<ImageId>& images,
                                   adapters::Labeler& labeler, std::size_t max_in_flight) {
    if (images.empty()) return {};
    auto job = plan_labeling(s, node, images);
    auto outcomes = run_labeling(job, labeler, max_in_flight);
    return commit_labeling(s, job, outcomes);
}

}  // namespace

LabelJob plan_labeling(const AuditSession& s, const NodeId& node, const std::set<ImageId>& images) {
    require_attribute(s, node);
    LabelJob job;
    job.node_id = node;
    job.schema = graph::partial_schema(s.graph, node);
    for (const auto& id : images) {
        const auto& img = s.image(id);
        job.items.push_back({id, s.blob_of(id), s.prompt(img.prompt_id).text});
    }
    return job;
}

std::vector<adapters::LabelOutcome> run_labeling(const LabelJob& job, adapters::Labeler& labeler,
                                                 std::size_t max_in_flight) {
    return parallel_map<adapters::LabelOutcome>(job.items.size(), max_in_flight, [&](std::size_t i) {
        const auto& item = job.items[i];
        return adapters::label_validated(labeler, {item.image_id, item.blob, item.prompt_text}, job.schema);
    });
}

std::vector<LabelRecord> commit_labeling(AuditSession& s, const LabelJob& job,
                                         const std::vector<adapters::LabelOutcome>& outcomes) {
    if (outcomes.size() != job.items.size()) throw ValidationError("label outcome count does not match the job");
    if (!s.graph.contains(job.node_id) || !s.graph.node(job.node_id).is_attribute()) return {};
    const auto& n = s.graph.node(job.node_id);
    const auto scope = graph::resolve_scope(s.graph, job.node_id, s.catalog);

    std::vector<std::size_t> order(job.items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return job.items[a].image_id < job.items[b].image_id; });

    std::vector<LabelRecord> committed;
    for (auto i : order) {
        const auto& item = job.items[i];
        if (!scope.contains(item.image_id)) continue;
        LabelRecord r;
        r.node_id = job.node_id;
        r.image_id = item.image_id;
        const auto& out = outcomes[i];
        // Candidates may have changed while the job ran.
        if (out.value && on_list(n, *out.value)) {
            r.value = *out.value;
        } else {
            r.status = LabelStatus::Error;
            r.error = out.value ? "label '" + *out.value + "' is no longer a candidate value" : out.error;
        }
        r.labeled_at = ++s.counters.label_seq;
        if (auto existing = active_record(s, job.node_id, item.image_id))
            s.label_records.erase(s.label_records.begin() + static_cast<std::ptrdiff_t>(*existing));
        s.label_records.push_back(r);
        committed.push_back(std::move(r));
    }
    return committed;
}

std::vector<LabelRecord> label_images(AuditSession& s, const NodeId& node, adapters::Labeler& labeler,
                                      std::size_t max_in_flight) {
    require_attribute(s, node);
    std::set<ImageId> todo;
    for (const auto& id : graph::resolve_scope(s.graph, node, s.catalog)) {
        auto r = active_record(s, node, id);
        if (!r || s.label_records[*r].status != LabelStatus::Ok) todo.insert(id);
    }
    return label_set(s, node, todo, labeler, max_in_flight);
}

std::set<ImageId> affected_images(const AuditSession& s, const NodeId& node) {
    const auto& n = require_attribute(s, node);
    const auto scope = graph::resolve_scope(s.graph, node, s.catalog);
    std::set<ImageId> out;
    std::set<ImageId> labeled_ok;
    for (const auto& r : s.label_records) {
        if (r.retired || r.node_id != node) continue;
        if (!scope.contains(r.image_id)) {
            out.insert(r.image_id);
        } else if (r.status == LabelStatus::Ok) {
            if (on_list(n, r.value))
                labeled_ok.insert(r.image_id);
            else
                out.insert(r.image_id);
        }
    }
    for (const auto& id : scope)
        if (!labeled_ok.contains(id)) out.insert(id);
    return out;
}

RelabelSummary relabel(AuditSession& s, const NodeId& node, RelabelMode mode, adapters::Labeler& labeler,
                       std::size_t max_in_flight) {
    require_attribute(s, node);
    const auto scope = graph::resolve_scope(s.graph, node, s.catalog);
    RelabelSummary summary;
    std::set<ImageId> to_label;
    if (mode == RelabelMode::All) {
        to_label = scope;
        summary.touched = scope;
        for (const auto& r : s.label_records)
            if (!r.retired && r.node_id == node && !scope.contains(r.image_id)) summary.touched.insert(r.image_id);
    } else {
        summary.touched = affected_images(s, node);
        for (const auto& id : summary.touched)
            if (scope.contains(id)) to_label.insert(id);
    }
    summary.retired = retire_out_of_scope(s, node, scope);
    summary.relabeled = label_set(s, node, to_label, labeler, max_in_flight).size();
    return summary;
}

const LabelRecord& manual_edit_label(AuditSession& s, const NodeId& node, const ImageId& image,
                                     const std::string& value) {
    const auto& n = require_attribute(s, node);
    s.image(image);
    auto v = normalize(value);
    if (v.empty()) throw ValidationError("label value is empty");
    if (!on_list(n, v)) throw ValidationError("'" + v + "' is not one of the candidate values");
    auto existing = active_record(s, node, image);
    if (!existing && !graph::resolve_scope(s.graph, node, s.catalog).contains(image))
        throw ValidationError("image " + image.str() + " is outside the scope of '" + n.name + "'");
    if (existing) s.label_records.erase(s.label_records.begin() + static_cast<std::ptrdiff_t>(*existing));
    LabelRecord r;
    r.node_id = node;
    r.image_id = image;
    r.value = v;
    r.origin = LabelOrigin::Manual;
    r.labeled_at = ++s.counters.label_seq;
    s.label_records.push_back(std::move(r));
    return s.label_records.back();
}

std::vector<const LabelRecord*> counted_records(const AuditSession& s, const NodeId& node) {
    require_attribute(s, node);
    const auto scope = graph::resolve_scope(s.graph, node, s.catalog);
    std::vector<const LabelRecord*> out;
    for (const auto& r : s.label_records)
        if (r.node_id == node && r.active_ok() && scope.contains(r.image_id)) out.push_back(&r);
    return out;
}

Distribution aggregate_distribution(const AuditSession& s, const NodeId& node) {
    const auto& n = require_attribute(s, node);
    Distribution d;
    d.node_id = node;
    std::map<std::string, std::map<PromptId, std::uint64_t>> counts;
    std::map<std::string, std::uint64_t> totals;
    std::set<PromptId> seen_prompts;
    for (const auto* r : counted_records(s, node)) {
        const auto& p = s.catalog.prompt_of(r->image_id);
        ++counts[r->value][p];
        ++totals[r->value];
        seen_prompts.insert(p);
        ++d.total;
    }

    std::vector<std::string> values;
    if (n.candidate_values)
        for (const auto& c : *n.candidate_values)
            if (totals.contains(c)) values.push_back(c);
    std::vector<std::string> rest;
    for (const auto& [v, t] : totals)
        if (std::find(values.begin(), values.end(), v) == values.end()) rest.push_back(v);
    std::stable_sort(rest.begin(), rest.end(), [&](const auto& a, const auto& b) { return totals[a] > totals[b]; });
    values.insert(values.end(), rest.begin(), rest.end());

    for (const auto& v : values) {
        session::DistributionRow row;
        row.value = v;
        for (const auto& p : s.prompts)
            if (seen_prompts.contains(p.id)) row.counts.push_back({p.id, counts[v][p.id]});
        d.rows.push_back(std::move(row));
    }
    return d;
}

std::vector<ImageLabel> image_label_summary(const AuditSession& s, const ImageId& image) {
    s.image(image);
    std::vector<ImageLabel> out;
    for (const auto& id : s.graph.preorder()) {
        if (!s.graph.node(id).is_attribute()) continue;
        auto records = counted_records(s, id);
        auto it = std::find_if(records.begin(), records.end(), [&](const auto* r) { return r->image_id == image; });
        if (it == records.end()) continue;
        const auto& value = (*it)->value;
        auto same = std::count_if(records.begin(), records.end(), [&](const auto* r) { return r->value == value; });
        auto path = s.graph.path_names(id);
        path.erase(path.begin());
        out.push_back({id, std::move(path), value, static_cast<double>(same) / static_cast<double>(records.size())});
    }
    return out;
}

std::set<ImageId> images_for_segment(const AuditSession& s, const NodeId& node, const std::string& value,
                                     const std::optional<PromptId>& prompt) {
    const auto v = normalize(value);
    std::set<ImageId> out;
    for (const auto* r : counted_records(s, node)) {
        if (r->value != v) continue;
        if (prompt && s.catalog.prompt_of(r->image_id) != *prompt) continue;
        out.insert(r->image_id);
    }
    return out;
}

std::vector<NodeId> remove_node_cascade(AuditSession& s, const NodeId& node) {
    auto removed = graph::remove_node(s.graph, node);
    const std::set<NodeId> gone(removed.begin(), removed.end());
    std::erase_if(s.label_records, [&](const LabelRecord& r) { return gone.contains(r.node_id); });
    std::erase_if(s.bookmarks, [&](const session::Bookmark& b) {
        const auto* chart = std::get_if<session::ChartTarget>(&b.target);
        return chart && gone.contains(chart->node_id);
    });
    return removed;
}

}  // namespace sgaudit::labeling
