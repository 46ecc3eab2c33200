#include "doctest.h"

#include "fixtures.hpp"
#include "oracles.hpp"

#include "sgaudit/adapters/mock.hpp"
#include "sgaudit/common/error.hpp"
#include "sgaudit/graph/operations.hpp"
#include "sgaudit/labeling/labeling.hpp"
#include "sgaudit/session/store.hpp"

#include <chrono>
#include <thread>

using namespace sgaudit;
using namespace sgaudit::labeling;
using session::AuditSession;
using session::LabelStatus;

namespace {

/// Always answers the same string.
class ConstantLabeler final : public adapters::Labeler {
public:
    explicit ConstantLabeler(std::string v) : v_(std::move(v)) {}
    std::string label(const adapters::ImageRef&, const graph::PartialSchema&) override { return v_; }

private:
    std::string v_;
};

/// Finishes later for lower image ids, so completion order is reversed.
class SlowFirstLabeler final : public adapters::Labeler {
public:
    std::string label(const adapters::ImageRef& image, const graph::PartialSchema& s) override {
        auto n = std::stoi(image.id.str().substr(image.id.str().size() - 2));
        std::this_thread::sleep_for(std::chrono::milliseconds(40 - 2 * n));
        return adapters::MockLabeler().label(image, s);
    }
};

struct Doctor {
    AuditSession s;
    PromptId p1;
    NodeId doctor;
    NodeId gender;

    explicit Doctor(int n = 15, std::vector<std::string> candidates = {"male", "female"}) {
        session::SessionOptions o;
        o.id = "slab";
        o.clock = session::logical_clock();
        s = session::create_session(o);
        auto [p, req] = session::add_prompt(s, "A cinematic photo of a doctor", n);
        p1 = p.id;
        session::ingest_images(s, req, fixtures::pngs(n));
        auto fg = *s.graph.find_path({"foreground"});
        doctor = graph::add_node(s.graph, fg, fixtures::object("doctor"), s.catalog);
        gender = add_attribute(doctor, "gender", candidates);
    }

    NodeId add_attribute(const NodeId& parent, const std::string& name,
                         std::optional<std::vector<std::string>> candidates,
                         graph::ScopeSpec scope = {graph::Selector::all_images(), graph::Lifecycle::AutoExtended}) {
        graph::NodeSpec spec{name, graph::NodeKind::Attribute, scope, std::move(candidates)};
        return graph::add_node(s.graph, parent, spec, s.catalog);
    }

    PromptId add_prompt(const std::string& text, int n, int salt) {
        auto [p, req] = session::add_prompt(s, text, n);
        session::ingest_images(s, req, fixtures::pngs(n, salt));
        return p.id;
    }

    std::vector<ImageId> images() const {
        auto all = s.catalog.all_images();
        return {all.begin(), all.end()};
    }

    void set_candidates(const NodeId& node, std::vector<std::string> c) {
        graph::NodePatch patch;
        patch.candidate_values = std::move(c);
        graph::edit_node(s.graph, node, patch, s.catalog);
    }

    void set_images(const NodeId& node, std::set<ImageId> images) {
        graph::NodePatch patch;
        patch.scope = graph::ScopeSpec{graph::Selector::of_images(std::move(images)), graph::Lifecycle::Fixed};
        graph::edit_node(s.graph, node, patch, s.catalog);
    }
};

std::set<ImageId> affected_oracle(const AuditSession& s, const NodeId& node) {
    const auto& n = s.graph.node(node);
    auto scope = graph::resolve_scope(s.graph, node, s.catalog);
    std::set<ImageId> ok_on_list;
    std::set<ImageId> out;
    for (const auto& r : s.label_records) {
        if (r.retired || r.node_id != node) continue;
        bool in_scope = scope.contains(r.image_id);
        bool listed = !n.candidate_values ||
                      std::count(n.candidate_values->begin(), n.candidate_values->end(), r.value) > 0;
        if (!in_scope) out.insert(r.image_id);
        else if (r.status == LabelStatus::Ok && listed) ok_on_list.insert(r.image_id);
        else out.insert(r.image_id);
    }
    for (const auto& i : scope)
        if (!ok_on_list.contains(i)) out.insert(i);
    return out;
}

}  // namespace

TEST_SUITE("label_images") {
    TEST_CASE("fifteen gender labels follow the mock hash") {
        Doctor d;
        adapters::MockLabeler mock;
        auto records = label_images(d.s, d.gender, mock);
        REQUIRE(records.size() == 15);
        for (const auto& r : records) {
            CHECK(r.status == LabelStatus::Ok);
            CHECK(r.value == oracle::mock_label(r.image_id.str(), "image/foreground/doctor/gender", {"male", "female"}));
        }
    }
    TEST_CASE("second call labels nothing") {
        Doctor d;
        adapters::MockLabeler mock;
        label_images(d.s, d.gender, mock);
        CHECK(label_images(d.s, d.gender, mock).empty());
        CHECK(d.s.label_records.size() == 15);
    }
    TEST_CASE("empty scope labels nothing") {
        Doctor d;
        auto [p2, req] = session::add_prompt(d.s, "A cinematic photo of a nurse", 3);
        (void)req;
        auto node = d.add_attribute(d.doctor, "age", std::nullopt,
                                    {graph::Selector::of_prompts({p2.id}), graph::Lifecycle::AutoExtended});
        adapters::MockLabeler mock;
        CHECK(label_images(d.s, node, mock).empty());
    }
    TEST_CASE("commit order is ascending image id even when completion order is reversed") {
        Doctor d(12);
        SlowFirstLabeler slow;
        auto records = label_images(d.s, d.gender, slow, 4);
        REQUIRE(records.size() == 12);
        for (std::size_t i = 1; i < records.size(); ++i) {
            CHECK(records[i - 1].image_id < records[i].image_id);
            CHECK(records[i - 1].labeled_at < records[i].labeled_at);
        }
    }
    TEST_CASE("persistent off-list answers become visible error records and are retried next time") {
        Doctor d(5);
        ConstantLabeler bad("unknown");
        auto records = label_images(d.s, d.gender, bad);
        REQUIRE(records.size() == 5);
        for (const auto& r : records) {
            CHECK(r.status == LabelStatus::Error);
            CHECK_FALSE(r.error.empty());
        }
        CHECK(aggregate_distribution(d.s, d.gender).total == 0);
        adapters::MockLabeler mock;
        CHECK(label_images(d.s, d.gender, mock).size() == 5);
        CHECK(d.s.label_records.size() == 5);
    }
    TEST_CASE("object nodes cannot be labeled") {
        Doctor d(2);
        adapters::MockLabeler mock;
        CHECK_THROWS_AS(label_images(d.s, d.doctor, mock), ValidationError);
    }
}

TEST_SUITE("affected_images") {
    TEST_CASE("narrowed candidates flag exactly the images with the dropped value") {
        Doctor d(15, {"male", "female", "ambiguous"});
        ConstantLabeler male("male");
        label_images(d.s, d.gender, male);
        auto imgs = d.images();
        manual_edit_label(d.s, d.gender, imgs[3], "ambiguous");
        manual_edit_label(d.s, d.gender, imgs[9], "ambiguous");
        d.set_candidates(d.gender, {"male", "female"});
        auto got = affected_images(d.s, d.gender);
        CHECK(got == std::set<ImageId>{imgs[3], imgs[9]});
        CHECK(got == affected_oracle(d.s, d.gender));
    }
    TEST_CASE("nothing changed gives the empty set") {
        Doctor d;
        adapters::MockLabeler mock;
        label_images(d.s, d.gender, mock);
        CHECK(affected_images(d.s, d.gender).empty());
    }
    TEST_CASE("shrunk scope flags the labeled images it dropped") {
        Doctor d;
        adapters::MockLabeler mock;
        label_images(d.s, d.gender, mock);
        auto imgs = d.images();
        std::set<ImageId> keep(imgs.begin() + 3, imgs.end());
        d.set_images(d.gender, keep);
        CHECK(affected_images(d.s, d.gender) == std::set<ImageId>{imgs[0], imgs[1], imgs[2]});
    }
    TEST_CASE("unlabeled in-scope images are affected") {
        Doctor d(4);
        CHECK(affected_images(d.s, d.gender).size() == 4);
    }
}

TEST_SUITE("relabel") {
    TEST_CASE("affected-only with nothing affected is a no-op") {
        Doctor d;
        adapters::MockLabeler mock;
        label_images(d.s, d.gender, mock);
        auto before = d.s.label_records;
        auto sum = relabel(d.s, d.gender, RelabelMode::AffectedOnly, mock);
        CHECK(sum.relabeled == 0);
        CHECK(sum.retired == 0);
        CHECK(d.s.label_records == before);
    }
    TEST_CASE("all relabels every in-scope image") {
        Doctor d;
        adapters::MockLabeler mock;
        label_images(d.s, d.gender, mock);
        auto sum = relabel(d.s, d.gender, RelabelMode::All, mock);
        CHECK(sum.relabeled == 15);
        CHECK(d.s.label_records.size() == 15);
        for (const auto& r : d.s.label_records) CHECK(r.labeled_at > 15);
    }
    TEST_CASE("affected-only touches exactly the affected set and retires out-of-scope records") {
        Doctor d(15, {"male", "female", "ambiguous"});
        adapters::MockLabeler mock;
        ConstantLabeler male("male");
        label_images(d.s, d.gender, male);
        auto imgs = d.images();
        manual_edit_label(d.s, d.gender, imgs[5], "ambiguous");
        d.set_candidates(d.gender, {"male", "female"});
        d.set_images(d.gender, std::set<ImageId>(imgs.begin() + 2, imgs.end()));
        auto expected = affected_oracle(d.s, d.gender);
        CHECK(expected == std::set<ImageId>{imgs[0], imgs[1], imgs[5]});
        auto before = d.s.label_records;
        auto sum = relabel(d.s, d.gender, RelabelMode::AffectedOnly, mock);
        CHECK(sum.touched == expected);
        CHECK(sum.retired == 2);
        CHECK(sum.relabeled == 1);
        for (const auto& old : before)
            if (!expected.contains(old.image_id))
                CHECK(std::find(d.s.label_records.begin(), d.s.label_records.end(), old) != d.s.label_records.end());
        auto retired = std::count_if(d.s.label_records.begin(), d.s.label_records.end(), [](auto& r) { return r.retired; });
        CHECK(retired == 2);
    }
}

TEST_SUITE("manual_edit_label") {
    TEST_CASE("fixing one label moves one count") {
        Doctor d;
        ConstantLabeler male("male");
        label_images(d.s, d.gender, male);
        manual_edit_label(d.s, d.gender, d.images()[0], "Female");
        auto dist = aggregate_distribution(d.s, d.gender);
        REQUIRE(dist.rows.size() == 2);
        CHECK(dist.rows[0].value == "male");
        CHECK(dist.rows[0].total() == 14);
        CHECK(dist.rows[1].total() == 1);
    }
    TEST_CASE("off-list value is rejected") {
        Doctor d(2);
        CHECK_THROWS_AS(manual_edit_label(d.s, d.gender, d.images()[0], "unknown"), ValidationError);
    }
    TEST_CASE("manual record survives affected-only and is overwritten by all") {
        Doctor d(6);
        adapters::MockLabeler mock;
        label_images(d.s, d.gender, mock);
        auto img = d.images()[2];
        auto flipped = d.s.label_records[2].value == "male" ? "female" : "male";
        auto seq = manual_edit_label(d.s, d.gender, img, flipped).labeled_at;
        relabel(d.s, d.gender, RelabelMode::AffectedOnly, mock);
        auto find = [&] {
            return *std::find_if(d.s.label_records.begin(), d.s.label_records.end(),
                                 [&](auto& r) { return r.image_id == img && !r.retired; });
        };
        CHECK(find().origin == session::LabelOrigin::Manual);
        CHECK(find().labeled_at == seq);
        relabel(d.s, d.gender, RelabelMode::All, mock);
        CHECK(find().origin == session::LabelOrigin::Auto);
    }
    TEST_CASE("image outside the scope without a record is rejected") {
        Doctor d(4);
        auto imgs = d.images();
        d.set_images(d.gender, {imgs[0]});
        CHECK_THROWS_AS(manual_edit_label(d.s, d.gender, imgs[1], "male"), ValidationError);
    }
}

TEST_SUITE("aggregate_distribution") {
    TEST_CASE("all doctors male") {
        Doctor d;
        ConstantLabeler male("male");
        label_images(d.s, d.gender, male);
        auto dist = aggregate_distribution(d.s, d.gender);
        REQUIRE(dist.rows.size() == 1);
        CHECK(dist.rows[0].value == "male");
        CHECK(dist.rows[0].counts == std::vector<session::PromptCount>{{d.p1, 15}});
        CHECK(dist.total == 15);
    }
    TEST_CASE("no records") {
        Doctor d;
        auto dist = aggregate_distribution(d.s, d.gender);
        CHECK(dist.rows.empty());
        CHECK(dist.total == 0);
    }
    TEST_CASE("two prompts match a brute-force group count") {
        Doctor d(15, {"young", "middle-aged", "elderly"});
        auto p2 = d.add_prompt("A cinematic photo of a nurse", 15, 3);
        adapters::MockLabeler mock;
        label_images(d.s, d.gender, mock);
        auto dist = aggregate_distribution(d.s, d.gender);
        std::map<std::pair<std::string, PromptId>, std::uint64_t> brute;
        for (const auto& r : d.s.label_records) ++brute[{r.value, d.s.catalog.prompt_of(r.image_id)}];
        CHECK(dist.total == 30);
        std::uint64_t sum = 0;
        for (const auto& row : dist.rows) {
            REQUIRE(row.counts.size() == 2);
            CHECK(row.counts[0].prompt_id == d.p1);
            CHECK(row.counts[1].prompt_id == p2);
            for (const auto& c : row.counts) {
                CHECK(c.count == brute[{row.value, c.prompt_id}]);
                sum += c.count;
            }
        }
        CHECK(sum == 30);
        // candidate order
        std::vector<std::string> order;
        for (const auto& row : dist.rows) order.push_back(row.value);
        std::vector<std::string> expected;
        for (std::string v : {"young", "middle-aged", "elderly"})
            if (std::count_if(brute.begin(), brute.end(), [&](auto& kv) { return kv.first.first == v; })) expected.push_back(v);
        CHECK(order == expected);
    }
    TEST_CASE("open-ended rows sort by count then name") {
        Doctor d(6);
        auto mood = d.add_attribute(d.doctor, "mood", std::nullopt);
        auto imgs = d.images();
        for (int i = 0; i < 6; ++i) manual_edit_label(d.s, mood, imgs[i], i < 2 ? "calm" : (i < 4 ? "busy" : (i < 5 ? "tired" : "angry")));
        std::vector<std::string> order;
        for (const auto& row : aggregate_distribution(d.s, mood).rows) order.push_back(row.value);
        CHECK(order == std::vector<std::string>{"busy", "calm", "angry", "tired"});
    }
}

TEST_SUITE("image views") {
    TEST_CASE("label summary lists each labeled attribute with its share") {
        Doctor d(4);
        auto steth = d.add_attribute(d.doctor, "stethoscope", std::vector<std::string>{"wearing", "not wearing"});
        auto imgs = d.images();
        for (int i = 0; i < 4; ++i) {
            manual_edit_label(d.s, d.gender, imgs[i], "male");
            manual_edit_label(d.s, steth, imgs[i], i == 0 ? "wearing" : "not wearing");
        }
        auto summary = image_label_summary(d.s, imgs[0]);
        REQUIRE(summary.size() == 2);
        CHECK(summary[0].path == std::vector<std::string>{"foreground", "doctor", "gender"});
        CHECK(summary[0].value == "male");
        CHECK(summary[0].share == doctest::Approx(1.0));
        CHECK(summary[1].value == "wearing");
        CHECK(summary[1].share == doctest::Approx(0.25));
        manual_edit_label(d.s, steth, imgs[1], "wearing");
        CHECK(image_label_summary(d.s, imgs[0])[1].share == doctest::Approx(0.5));
    }
    TEST_CASE("unlabeled image has no summary") {
        Doctor d(2);
        CHECK(image_label_summary(d.s, d.images()[0]).empty());
    }
    TEST_CASE("segments return the matching images and partition each prompt") {
        Doctor d(10);
        auto p2 = d.add_prompt("A cinematic photo of a nurse", 10, 4);
        adapters::MockLabeler mock;
        label_images(d.s, d.gender, mock);
        CHECK(images_for_segment(d.s, d.gender, "robot").empty());
        for (const auto& p : {d.p1, p2}) {
            auto male = images_for_segment(d.s, d.gender, "male", p);
            auto female = images_for_segment(d.s, d.gender, "female", p);
            std::set<ImageId> both = male;
            both.insert(female.begin(), female.end());
            CHECK(both.size() == male.size() + female.size());
            CHECK(both == d.s.catalog.images_of(p));
            for (const auto& i : male)
                CHECK(oracle::mock_label(i.str(), "image/foreground/doctor/gender", {"male", "female"}) == "male");
        }
    }
}

TEST_CASE("removing a node drops its records and chart bookmarks") {
    Doctor d(3);
    adapters::MockLabeler mock;
    label_images(d.s, d.gender, mock);
    session::ChartTarget chart{d.gender, d.s.graph.path_names(d.gender), aggregate_distribution(d.s, d.gender)};
    session::bookmark_item(d.s, chart, "c");
    session::bookmark_item(d.s, session::ImageTarget{d.images()[0]}, "i");
    auto removed = remove_node_cascade(d.s, d.doctor);
    CHECK(removed.size() == 2);
    CHECK(d.s.label_records.empty());
    REQUIRE(d.s.bookmarks.size() == 1);
    CHECK(std::holds_alternative<session::ImageTarget>(d.s.bookmarks[0].target));
}
