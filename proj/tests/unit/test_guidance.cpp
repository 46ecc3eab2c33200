#include "doctest.h"

#include "fixtures.hpp"

#include "oracles.hpp"
#include "scripted.hpp"

#include "sgaudit/adapters/mock.hpp"
#include "sgaudit/common/error.hpp"
#include "sgaudit/common/text.hpp"
#include "sgaudit/graph/operations.hpp"
#include "sgaudit/guidance/guidance.hpp"
#include "sgaudit/labeling/labeling.hpp"
#include "sgaudit/session/store.hpp"

#include <random>

using namespace sgaudit;
using namespace sgaudit::guidance;
using session::AuditSession;
using session::CriterionSuggestion;
using session::PromptSubstitution;
using session::SuggestionStatus;

namespace {

/// Session with 15 doctor images and foreground/doctor/gender labeled.
struct Scenario {
    AuditSession s;
    adapters::AdapterSet set;
    PromptId p1;
    NodeId doctor;
    NodeId gender;

    explicit Scenario(std::uint64_t seed = 17, int n = 15) {
        session::SessionOptions o;
        o.id = "sgd";
        o.seed = seed;
        o.clock = session::logical_clock();
        s = session::create_session(o);
        set = adapters::make_mock_adapters(seed);
        p1 = engine::add_prompt(s, set, "A cinematic photo of a doctor", n).prompt_id;
        doctor = ensure_object({"foreground", "doctor"});
        graph::NodeSpec g{"gender", graph::NodeKind::Attribute,
                          {graph::Selector::of_prompts({p1}), graph::Lifecycle::AutoExtended},
                          std::vector<std::string>{"male", "female"}};
        gender = engine::add_criterion(s, set, doctor, g).node_id;
    }

    NodeId ensure_object(const std::vector<std::string>& path) {
        NodeId at = *s.graph.find_path({path.front()});
        for (std::size_t i = 1; i < path.size(); ++i) {
            auto next = s.graph.find_child(at, path[i]);
            at = next ? *next : graph::add_node(s.graph, at, fixtures::object(path[i]), s.catalog);
        }
        return at;
    }

    const CriterionSuggestion& criterion(const SuggestionId& id) {
        return std::get<CriterionSuggestion>(find_suggestion(s, id));
    }
};

}  // namespace

TEST_SUITE("generate_keywords") {
    TEST_CASE("mock keywords come from the generic list and the graph's object names") {
        Scenario sc;
        auto k = generate_keywords(sc.s, sc.set);
        CHECK(k.size() == 6);
        std::vector<std::string> names{"gender", "age", "clothing", "stethoscope", "facial expression", "ethnicity",
                                       "lighting", "posture"};
        for (const auto& p : adapters::summarize(sc.s.graph).object_paths) names.push_back(normalize(p.back()));
        for (const auto& w : k) CHECK(std::find(names.begin(), names.end(), w) != names.end());
    }
    TEST_CASE("duplicates are removed and the count is capped") {
        Scenario sc;
        sc.set.criterion_suggester = std::make_shared<scripted::CriterionSuggester>(std::vector<double>{0.9});
        GuidanceConfig cfg;
        cfg.keyword_count = 3;
        CHECK(generate_keywords(sc.s, sc.set, cfg) == std::vector<std::string>{"gender", "age", "clothing"});
    }
    TEST_CASE("a session without images is rejected") {
        session::SessionOptions o;
        auto s = session::create_session(o);
        CHECK_THROWS_AS(generate_keywords(s, adapters::make_mock_adapters(1)), ValidationError);
    }
}

TEST_SUITE("audit_analysis_support") {
    TEST_CASE("second attempt over the threshold is returned") {
        Scenario sc;
        auto sug = std::make_shared<scripted::CriterionSuggester>(std::vector<double>{0.2, 0.81, 0.95});
        sc.set.criterion_suggester = sug;
        auto r = audit_analysis_support(sc.s, sc.set, {"stethoscope"});
        REQUIRE(r.suggestion);
        CHECK(r.attempts_used == 2);
        CHECK(sug->calls == 2);
        const auto& c = sc.criterion(*r.suggestion);
        CHECK(c.status == SuggestionStatus::Proposed);
        CHECK(c.attempts_used == 2);
        CHECK(c.confidence == doctest::Approx(0.81));
        CHECK(c.image_pair.first != c.image_pair.second);
        CHECK(sc.s.analysis_log.size() == 2);
        CHECK(sc.s.analysis_log[0].outcome == "below_threshold");
    }
    TEST_CASE("all attempts below the threshold give no suggestion after exactly three calls") {
        Scenario sc;
        auto sug = std::make_shared<scripted::CriterionSuggester>(std::vector<double>{0.2, 0.5, 0.69, 0.99});
        sc.set.criterion_suggester = sug;
        auto r = audit_analysis_support(sc.s, sc.set, {});
        CHECK_FALSE(r.suggestion);
        CHECK(r.attempts_used == 3);
        CHECK(sug->calls == 3);
        CHECK(sc.s.suggestion_history.empty());
        CHECK(sc.s.analysis_log.size() == 3);
    }
    TEST_CASE("custom keyword reaches the adapter call") {
        Scenario sc;
        auto sug = std::make_shared<scripted::CriterionSuggester>(std::vector<double>{0.9});
        sc.set.criterion_suggester = sug;
        audit_analysis_support(sc.s, sc.set, {"Clothing"});
        REQUIRE(sug->seen_keywords.size() == 1);
        CHECK(sug->seen_keywords[0] == std::vector<std::string>{"clothing"});
    }
    TEST_CASE("adapter failure counts as a failed attempt") {
        Scenario sc;
        auto sug = std::make_shared<scripted::CriterionSuggester>(std::vector<double>{-1, 0.9});
        sc.set.criterion_suggester = sug;
        auto r = audit_analysis_support(sc.s, sc.set, {});
        CHECK(r.attempts_used == 2);
        CHECK(sc.s.analysis_log[0].outcome == "suggester unavailable");
    }
    TEST_CASE("pairs come from one prompt when possible") {
        Scenario sc(17, 3);
        engine::add_prompt(sc.s, sc.set, "a nurse", 1);
        for (std::uint64_t req = 1; req < 40; ++req) {
            auto [a, b] = select_pair(sc.s, req, 1);
            CHECK(a != b);
            CHECK(sc.s.catalog.prompt_of(a) == sc.p1);
            CHECK(sc.s.catalog.prompt_of(b) == sc.p1);
        }
    }
    TEST_CASE("mock confidences follow the digest formula and the loop stops at the first confident attempt") {
        bool saw_second_attempt = false;
        for (std::uint64_t seed = 0; seed < 60; ++seed) {
            Scenario sc(seed, 6);
            const std::vector<std::string> kws{"stethoscope"};
            auto r = audit_analysis_support(sc.s, sc.set, kws);
            int first_ok = 0;
            for (const auto& a : sc.s.analysis_log) {
                auto key = "criterion|" + std::to_string(seed) + "|" + oracle::sha_hex(sc.s.blob_of(a.image_pair.first)) +
                           "|" + oracle::sha_hex(sc.s.blob_of(a.image_pair.second)) + "|stethoscope";
                double expected = static_cast<double>(oracle::sha_prefix64(key) % 100) / 100.0;
                CHECK(a.confidence == doctest::Approx(expected));
                if (!first_ok && expected >= 0.7) first_ok = a.attempt;
            }
            if (first_ok) {
                REQUIRE(r.suggestion);
                CHECK(r.attempts_used == first_ok);
                CHECK(sc.criterion(*r.suggestion).node_spec.name == "stethoscope");
                if (first_ok == 2) saw_second_attempt = true;
            } else {
                CHECK_FALSE(r.suggestion);
                CHECK(sc.s.analysis_log.size() == 3);
            }
        }
        CHECK(saw_second_attempt);
    }
    TEST_CASE("property: no sub-threshold suggestion is ever proposed and calls never exceed max_attempts") {
        std::mt19937_64 rng(5);
        Scenario base(3, 4);
        for (int c = 0; c < 250; ++c) {
            auto s = base.s;
            std::vector<double> conf;
            for (int i = 0; i < 5; ++i) conf.push_back(rng() % 10 == 0 ? -1.0 : static_cast<double>(rng() % 101) / 100.0);
            auto sug = std::make_shared<scripted::CriterionSuggester>(conf);
            auto set = base.set;
            set.criterion_suggester = sug;
            GuidanceConfig cfg;
            cfg.confidence_threshold = static_cast<double>(1 + rng() % 100) / 100.0;
            cfg.max_attempts = 1 + static_cast<int>(rng() % 5);
            auto r = audit_analysis_support(s, set, {}, cfg);
            CHECK(sug->calls <= static_cast<std::size_t>(cfg.max_attempts));
            for (const auto& h : s.suggestion_history)
                CHECK(std::get<CriterionSuggestion>(h).confidence >= cfg.confidence_threshold);
            if (!r.suggestion) {
                CHECK(s.suggestion_history.empty());
                CHECK(r.attempts_used == cfg.max_attempts);
            }
        }
    }
}

TEST_SUITE("apply_criterion_suggestion") {
    TEST_CASE("stethoscope under the doctor labels all fifteen images") {
        Scenario sc;
        sc.set.criterion_suggester = std::make_shared<scripted::CriterionSuggester>(std::vector<double>{0.9});
        auto id = *audit_analysis_support(sc.s, sc.set, {}).suggestion;
        auto out = apply_criterion_suggestion(sc.s, sc.set, id);
        CHECK(out.created_objects.empty());
        CHECK(*sc.s.graph.parent_of(out.node_id) == sc.doctor);
        CHECK(out.records.size() == 15);
        CHECK(sc.criterion(id).status == SuggestionStatus::Applied);
        CHECK(sc.criterion(id).applied_node == out.node_id);
        CHECK(sc.s.graph.node(out.node_id).origin == graph::NodeOrigin::SuggestionApplied);
        CHECK_THROWS_AS(apply_criterion_suggestion(sc.s, sc.set, id), ConflictError);
    }
    TEST_CASE("a new intermediate object is created") {
        Scenario sc;
        sc.set.criterion_suggester = std::make_shared<scripted::CriterionSuggester>(
            std::vector<double>{0.9}, "clothing color", std::vector<std::string>{"foreground", "doctor", "clothing"});
        auto before = sc.s.graph;
        auto id = *audit_analysis_support(sc.s, sc.set, {"clothing"}).suggestion;
        auto out = apply_criterion_suggestion(sc.s, sc.set, id);
        CHECK(sc.s.graph.size() == before.size() + 2);
        std::set<std::vector<std::string>> added;
        for (const auto& [nid, n] : sc.s.graph.nodes())
            if (!before.contains(nid)) added.insert(oracle::path_of(sc.s.graph, nid));
        CHECK(added == std::set<std::vector<std::string>>{{"foreground", "doctor", "clothing"},
                                                           {"foreground", "doctor", "clothing", "clothing color"}});
        CHECK(out.created_objects.size() == 1);
    }
    TEST_CASE("invalid parent path leaves the graph alone") {
        Scenario sc;
        sc.set.criterion_suggester = std::make_shared<scripted::CriterionSuggester>(
            std::vector<double>{0.9}, "tone", std::vector<std::string>{"foreground", "doctor", "gender", "x"});
        // The proposal check rejects it before it becomes a suggestion.
        CHECK_FALSE(audit_analysis_support(sc.s, sc.set, {}).suggestion);
    }
    TEST_CASE("dismissed suggestions cannot be applied") {
        Scenario sc;
        sc.set.criterion_suggester = std::make_shared<scripted::CriterionSuggester>(std::vector<double>{0.9});
        auto id = *audit_analysis_support(sc.s, sc.set, {}).suggestion;
        dismiss_suggestion(sc.s, id);
        CHECK_THROWS_AS(apply_criterion_suggestion(sc.s, sc.set, id), ConflictError);
        CHECK_THROWS_AS(dismiss_suggestion(sc.s, id), ConflictError);
    }
}

TEST_SUITE("prompt suggestions") {
    TEST_CASE("doctor becomes nurse, then something else") {
        Scenario sc;
        auto a = prompt_suggestion(sc.s, sc.set);
        const auto& sub = std::get<PromptSubstitution>(find_suggestion(sc.s, a));
        CHECK(sub.replace_span == "doctor");
        CHECK(sub.replacement == "nurse");
        auto b = prompt_suggestion(sc.s, sc.set);
        const auto& sub2 = std::get<PromptSubstitution>(find_suggestion(sc.s, b));
        CHECK_FALSE((sub2.replace_span == "doctor" && sub2.replacement == "nurse"));
    }
    TEST_CASE("a span missing from the prompt fails after one retry") {
        Scenario sc;
        auto bad = std::make_shared<scripted::PromptSuggester>("surgeon", "nurse");
        sc.set.prompt_suggester = bad;
        CHECK_THROWS_AS(prompt_suggestion(sc.s, sc.set), ValidationError);
        CHECK(bad->calls == 2);
        CHECK(sc.s.suggestion_history.empty());
    }
    TEST_CASE("a repeated triple is refused") {
        Scenario sc;
        sc.set.prompt_suggester = std::make_shared<scripted::PromptSuggester>("doctor", "nurse");
        prompt_suggestion(sc.s, sc.set);
        CHECK_THROWS_AS(prompt_suggestion(sc.s, sc.set), ValidationError);
    }
}

TEST_SUITE("apply_prompt_substitution") {
    TEST_CASE("doctor to nurse duplicates both criteria and labels thirty new records") {
        Scenario sc;
        sc.set.criterion_suggester = std::make_shared<scripted::CriterionSuggester>(std::vector<double>{0.9});
        auto steth = apply_criterion_suggestion(sc.s, sc.set, *audit_analysis_support(sc.s, sc.set, {}).suggestion).node_id;
        const auto records_before = sc.s.label_records.size();
        CHECK(records_before == 30);

        auto sub = prompt_suggestion(sc.s, sc.set);
        auto out = apply_prompt_substitution(sc.s, sc.set, sub, 15);
        REQUIRE(out.duplicated_branch);
        const auto& g = sc.s.graph;
        CHECK(g.node(*out.duplicated_branch).name == "nurse");
        CHECK(oracle::structure(g, *out.duplicated_branch, false) == oracle::structure(g, sc.doctor, false));
        CHECK(sc.s.prompt(out.prompt_id).text == "A cinematic photo of a nurse");
        CHECK(sc.s.prompt(out.prompt_id).origin == session::PromptOrigin::SuggestionApplied);
        CHECK(sc.s.label_records.size() - records_before == 30);
        CHECK(out.generation.new_records == 30);

        auto nurse_imgs = sc.s.catalog.images_of(out.prompt_id);
        for (const auto& nid : g.subtree(*out.duplicated_branch))
            CHECK(graph::resolve_scope(g, nid, sc.s.catalog) == nurse_imgs);

        for (const auto& [orig, name] : {std::pair{sc.gender, "gender"}, std::pair{steth, "stethoscope"}}) {
            auto copy = *g.find_child(*out.duplicated_branch, name);
            auto d_orig = labeling::aggregate_distribution(sc.s, orig);
            auto d_copy = labeling::aggregate_distribution(sc.s, copy);
            CHECK(d_orig.total == 15);
            CHECK(d_copy.total == 15);
            std::set<PromptId> colors;
            for (const auto* d : {&d_orig, &d_copy})
                for (const auto& row : d->rows)
                    for (const auto& c : row.counts) colors.insert(c.prompt_id);
            CHECK(colors == std::set<PromptId>{sc.p1, out.prompt_id});
            // counts match the mock hash over the nurse images
            std::map<std::string, std::uint64_t> want;
            auto path = "image/foreground/nurse/" + std::string(name);
            const auto& cands = *g.node(copy).candidate_values;
            for (const auto& i : nurse_imgs) ++want[oracle::mock_label(i.str(), path, cands)];
            for (const auto& row : d_copy.rows) CHECK(row.total() == want[row.value]);
        }
        CHECK_THROWS_AS(apply_prompt_substitution(sc.s, sc.set, sub, 15), ConflictError);
    }
    TEST_CASE("a span matching no object adds the prompt without duplication") {
        Scenario sc;
        sc.set.prompt_suggester = std::make_shared<scripted::PromptSuggester>("cinematic", "candid");
        auto size = sc.s.graph.size();
        auto out = apply_prompt_substitution(sc.s, sc.set, prompt_suggestion(sc.s, sc.set), 4);
        CHECK_FALSE(out.duplicated_branch);
        CHECK_FALSE(out.note.empty());
        CHECK(sc.s.graph.size() == size);
        CHECK(sc.s.prompt(out.prompt_id).text == "A candid photo of a doctor");
        CHECK(sc.s.catalog.images_of(out.prompt_id).size() == 4);
    }
    TEST_CASE("generation failure rolls the prompt back and keeps the suggestion open") {
        struct Down final : adapters::ImageGenerator {
            std::vector<Bytes> generate(const std::string&, int, std::uint64_t) override { throw TransportError("down"); }
        };
        Scenario sc;
        auto sub = prompt_suggestion(sc.s, sc.set);
        auto prompts = sc.s.prompts.size();
        auto size = sc.s.graph.size();
        sc.set.generator = std::make_shared<Down>();
        CHECK_THROWS_AS(apply_prompt_substitution(sc.s, sc.set, sub, 3), TransportError);
        CHECK(sc.s.prompts.size() == prompts);
        CHECK(sc.s.graph.size() == size);
        CHECK(std::get<PromptSubstitution>(find_suggestion(sc.s, sub)).status == SuggestionStatus::Proposed);
    }
}

TEST_SUITE("autocomplete_note") {
    TEST_CASE("completion after bookmarking the gender chart mentions gender") {
        Scenario sc;
        session::ChartTarget chart{sc.gender, sc.s.graph.path_names(sc.gender),
                                   labeling::aggregate_distribution(sc.s, sc.gender)};
        session::bookmark_item(sc.s, chart, "all male?");
        auto text = autocomplete_note(sc.s, sc.set, "");
        CHECK(text.find("gender") != std::string::npos);
        CHECK(text.find("doctors") != std::string::npos);
        CHECK(sc.s.general_notes.empty());
        CHECK(autocomplete_note(sc.s, sc.set, "") == text);
    }
    TEST_CASE("empty session completes to nothing") {
        session::SessionOptions o;
        CHECK(autocomplete_note(session::create_session(o), adapters::make_mock_adapters(0), "").empty());
    }
}
