#include "doctest.h"

#include "graph_gen.hpp"
#include "oracles.hpp"

#include "sgaudit/common/error.hpp"
#include "sgaudit/graph/operations.hpp"
#include "sgaudit/graph/serialize.hpp"

using namespace sgaudit;
using namespace sgaudit::graph;

namespace {

NodeSpec object(const std::string& name) {
    NodeSpec s;
    s.name = name;
    s.kind = NodeKind::Object;
    return s;
}

NodeSpec attribute(const std::string& name, std::optional<std::vector<std::string>> cands = std::nullopt,
                   ScopeSpec scope = {Selector::all_images(), Lifecycle::AutoExtended}) {
    NodeSpec s;
    s.name = name;
    s.kind = NodeKind::Attribute;
    s.candidate_values = std::move(cands);
    s.scope = std::move(scope);
    return s;
}

NodeId fg(const SceneGraph& g) { return *g.find_path({"foreground"}); }

struct Fixture {
    gen::World w;
    PromptId p1, p2;
    std::set<ImageId> p1_images, p2_images;
    Fixture() {
        p1 = w.add_prompt();
        p1_images = w.add_images(p1, 15);
        p2 = w.add_prompt();
        p2_images = w.add_images(p2, 4);
    }
};

}  // namespace

TEST_SUITE("new_graph") {
    TEST_CASE("default first level gives root plus foreground and background") {
        auto g = new_graph();
        CHECK(g.size() == 3);
        CHECK(g.node(g.root()).name == "image");
        CHECK(g.path_names(*g.find_path({"background"})) == std::vector<std::string>{"image", "background"});
        for (const auto& [id, n] : g.nodes()) {
            CHECK(n.frequency == 0);
            CHECK(n.scope == Scope::all_images_auto());
        }
    }
    TEST_CASE("single name") { CHECK(new_graph({"a"}).size() == 2); }
    TEST_CASE("duplicates rejected") {
        CHECK_THROWS_AS(new_graph({"a", "a"}), ValidationError);
        CHECK_THROWS_AS(new_graph({"a", " A "}), ValidationError);
        CHECK_THROWS_AS(new_graph({}), ValidationError);
    }
}

TEST_SUITE("merge_scene_graphs") {
    TEST_CASE("singleton merge keeps paths and frequencies") {
        std::mt19937_64 rng(11);
        auto g = gen::random_graph(rng, kDefaultFirstLevel, 12);
        auto m = merge_scene_graphs({g});
        CHECK(oracle::path_frequencies({m}) == oracle::path_frequencies({g}));
        CHECK(oracle::structure(m, m.root()) == oracle::structure(g, g.root()));
    }
    TEST_CASE("shared doctor path sums to 2") {
        Catalog empty;
        auto a = new_graph();
        auto b = new_graph();
        for (auto* g : {&a, &b}) {
            auto id = add_node(*g, fg(*g), object("doctor"), empty);
            g->node_mut(id).frequency = 1;
        }
        add_node(b, fg(b), object("office"), empty);
        auto m = merge_scene_graphs({a, b});
        auto expected = oracle::path_frequencies({a, b});
        CHECK(expected.at({"foreground", "doctor"}) == 2);
        auto doctor = m.find_path({"foreground", "doctor"});
        REQUIRE(doctor);
        CHECK(m.node(*doctor).frequency == expected.at({"foreground", "doctor"}));
        CHECK(m.node(fg(m)).children.size() == 2);  // doctor then office, first-seen order
        CHECK(m.node(m.node(fg(m)).children[0]).name == "doctor");
    }
    TEST_CASE("case and whitespace differences collapse") {
        Catalog empty;
        auto a = new_graph();
        auto b = new_graph();
        add_node(a, fg(a), object("Doctor"), empty);
        add_node(b, fg(b), object(" doctor "), empty);
        auto m = merge_scene_graphs({a, b});
        CHECK(m.node(fg(m)).children.size() == 1);
        CHECK(m.node(m.node(fg(m)).children[0]).name == "Doctor");
    }
    TEST_CASE("same name under different parents stays separate") {
        Catalog empty;
        auto a = new_graph();
        add_node(a, fg(a), object("lamp"), empty);
        add_node(a, *a.find_path({"background"}), object("lamp"), empty);
        auto m = merge_scene_graphs({a, a});
        CHECK(m.find_path({"foreground", "lamp"}) != m.find_path({"background", "lamp"}));
    }
    TEST_CASE("mismatched first level rejected") {
        CHECK_THROWS_AS(merge_scene_graphs({new_graph(), new_graph({"a", "b"})}), ValidationError);
    }
}

TEST_SUITE("prune_leaves") {
    SceneGraph nine_leaves() {
        Catalog empty;
        auto g = new_graph();
        auto doctor = add_node(g, fg(g), object("doctor"), empty);
        for (auto n : {"coat", "badge", "stethoscope"}) add_node(g, doctor, object(n), empty);
        add_node(g, fg(g), object("patient"), empty);
        auto bg = *g.find_path({"background"});
        for (auto n : {"office", "window", "desk", "lamp", "bed"}) add_node(g, bg, object(n), empty);
        return g;
    }

    TEST_CASE("under the limit returns the input") {
        Catalog empty;
        auto g = new_graph();
        for (auto n : {"a", "b", "c"}) add_node(g, fg(g), object(n), empty);
        CHECK(prune_leaves(g, 5, 1) == g);
    }
    TEST_CASE("nine leaves prune to five with ancestors") {
        auto g = nine_leaves();
        REQUIRE(g.leaves().size() == 9);
        auto p = prune_leaves(g, 5, 42);
        p.validate();
        CHECK(p.leaves().size() == 5);
        for (const auto& leaf : p.leaves()) {
            CHECK(g.contains(leaf));
            CHECK(g.node(leaf).children.empty());
            for (const auto& a : g.ancestors(leaf)) CHECK(p.contains(a));
        }
        CHECK(p.find_path({"foreground"}));
        CHECK(p.find_path({"background"}));
    }
    TEST_CASE("same seed gives the same output") {
        auto g = nine_leaves();
        CHECK(canonical(prune_leaves(g, 5, 9)) == canonical(prune_leaves(g, 5, 9)));
    }
    TEST_CASE("zero rejected") { CHECK_THROWS_AS(prune_leaves(nine_leaves(), 0, 1), ValidationError); }
}

TEST_SUITE("add_node") {
    TEST_CASE("gender under doctor widens every ancestor") {
        Fixture f;
        auto& g = f.w.graph;
        // Make the ancestors narrow so widening is observable.
        auto doctor = add_node(g, fg(g), object("doctor"), f.w.catalog);
        NodePatch narrow;
        narrow.scope = ScopeSpec{Selector::of_prompts({f.p2}), Lifecycle::Fixed};
        edit_node(g, doctor, narrow, f.w.catalog);
        REQUIRE(resolve_scope(g, doctor, f.w.catalog) == f.p2_images);

        auto gender = add_node(g, doctor,
                               attribute("gender", std::vector<std::string>{"male", "female"},
                                         {Selector::of_prompts({f.p1}), Lifecycle::AutoExtended}),
                               f.w.catalog);
        CHECK(g.node(gender).origin == NodeOrigin::UserAdded);
        CHECK(g.node(doctor).children.back() == gender);
        auto images = resolve_scope(g, gender, f.w.catalog);
        CHECK(images == f.p1_images);
        for (const auto& a : g.ancestors(gender)) {
            auto r = resolve_scope(g, a, f.w.catalog);
            CHECK(std::includes(r.begin(), r.end(), images.begin(), images.end()));
        }
        // Doctor kept its own p2 images and gained p1's.
        auto doctor_images = resolve_scope(g, doctor, f.w.catalog);
        CHECK(doctor_images.size() == 19);
    }
    TEST_CASE("empty scope leaves ancestors alone") {
        Fixture f;
        auto& g = f.w.graph;
        auto doctor = add_node(g, fg(g), object("doctor"), f.w.catalog);
        NodePatch narrow;
        narrow.scope = ScopeSpec{Selector::of_prompts({f.p2}), Lifecycle::Fixed};
        edit_node(g, doctor, narrow, f.w.catalog);
        auto before = g.node(doctor).scope;
        add_node(g, doctor, attribute("age", std::nullopt, {Selector::of_images({}), Lifecycle::Fixed}),
                 f.w.catalog);
        CHECK(g.node(doctor).scope == before);
    }
    TEST_CASE("attribute parent rejected") {
        Fixture f;
        auto& g = f.w.graph;
        auto gender = add_node(g, fg(g), attribute("gender"), f.w.catalog);
        CHECK_THROWS_AS(add_node(g, gender, attribute("x"), f.w.catalog), ValidationError);
    }
    TEST_CASE("invalid specs rejected") {
        Fixture f;
        auto& g = f.w.graph;
        add_node(g, fg(g), object("doctor"), f.w.catalog);
        CHECK_THROWS_AS(add_node(g, fg(g), object(" DOCTOR"), f.w.catalog), ValidationError);
        CHECK_THROWS_AS(add_node(g, fg(g), object("  "), f.w.catalog), ValidationError);
        CHECK_THROWS_AS(add_node(g, fg(g), attribute("g", std::vector<std::string>{"male"}), f.w.catalog),
                        ValidationError);
        CHECK_THROWS_AS(
            add_node(g, fg(g), attribute("g", std::vector<std::string>{"Male", "male "}), f.w.catalog),
            ValidationError);
        CHECK_THROWS_AS(add_node(g, NodeId("nope"), object("x"), f.w.catalog), NotFoundError);
        CHECK_THROWS_AS(
            add_node(g, fg(g), attribute("g", std::nullopt, {Selector::of_images({}), Lifecycle::AutoExtended}),
                     f.w.catalog),
            ValidationError);
        CHECK_THROWS_AS(add_node(g, fg(g),
                                 attribute("g", std::nullopt,
                                           {Selector::of_prompts({PromptId("p99")}), Lifecycle::AutoExtended}),
                                 f.w.catalog),
                        ValidationError);
    }
    TEST_CASE("candidate values are stored normalized") {
        Fixture f;
        auto& g = f.w.graph;
        auto id = add_node(g, fg(g), attribute("gender", std::vector<std::string>{" Male", "FEMALE"}), f.w.catalog);
        CHECK(*g.node(id).candidate_values == std::vector<std::string>{"male", "female"});
    }
}

TEST_SUITE("edit_node") {
    TEST_CASE("relabel flag") {
        Fixture f;
        auto& g = f.w.graph;
        auto doctor = add_node(g, fg(g), object("doctor"), f.w.catalog);
        auto gender = add_node(g, doctor, attribute("gender", std::vector<std::string>{"male", "female"}),
                               f.w.catalog);
        NodePatch rename;
        rename.name = "sex";
        CHECK_FALSE(edit_node(g, gender, rename, f.w.catalog).relabel_required);
        CHECK(g.node(gender).name == "sex");

        NodePatch cands;
        cands.candidate_values = std::vector<std::string>{"male", "female", "ambiguous"};
        CHECK(edit_node(g, gender, cands, f.w.catalog).relabel_required);

        NodePatch same = cands;
        CHECK_FALSE(edit_node(g, gender, same, f.w.catalog).relabel_required);

        NodePatch scope;
        scope.scope = ScopeSpec{Selector::of_prompts({f.p1}), Lifecycle::AutoExtended};
        CHECK(edit_node(g, gender, scope, f.w.catalog).relabel_required);

        NodePatch object_scope;
        object_scope.scope = ScopeSpec{Selector::of_prompts({f.p2}), Lifecycle::AutoExtended};
        CHECK_FALSE(edit_node(g, doctor, object_scope, f.w.catalog).relabel_required);
        // Doctor must still contain its child's images.
        auto child = resolve_scope(g, gender, f.w.catalog);
        auto parent = resolve_scope(g, doctor, f.w.catalog);
        CHECK(std::includes(parent.begin(), parent.end(), child.begin(), child.end()));
    }
    TEST_CASE("sibling collision rejected") {
        Fixture f;
        auto& g = f.w.graph;
        add_node(g, fg(g), object("doctor"), f.w.catalog);
        auto nurse = add_node(g, fg(g), object("nurse"), f.w.catalog);
        NodePatch p;
        p.name = "Doctor";
        CHECK_THROWS_AS(edit_node(g, nurse, p, f.w.catalog), ValidationError);
        CHECK(g.node(nurse).name == "nurse");
    }
    TEST_CASE("candidates on an object rejected") {
        Fixture f;
        NodePatch p;
        p.candidate_values = std::vector<std::string>{"a", "b"};
        CHECK_THROWS_AS(edit_node(f.w.graph, fg(f.w.graph), p, f.w.catalog), ValidationError);
    }
}

TEST_SUITE("remove_node") {
    TEST_CASE("subtree counts") {
        Fixture f;
        auto& g = f.w.graph;
        auto doctor = add_node(g, fg(g), object("doctor"), f.w.catalog);
        add_node(g, doctor, attribute("gender"), f.w.catalog);
        auto steth = add_node(g, doctor, attribute("stethoscope"), f.w.catalog);
        CHECK(remove_node(g, steth).size() == 1);
        add_node(g, doctor, attribute("stethoscope"), f.w.catalog);
        auto removed = remove_node(g, doctor);
        CHECK(removed.size() == 3);
        CHECK(removed.front() == doctor);
        CHECK(g.size() == 3);
        g.validate();
    }
    TEST_CASE("root and first level protected") {
        auto g = new_graph();
        CHECK_THROWS_AS(remove_node(g, g.root()), ValidationError);
        CHECK_THROWS_AS(remove_node(g, fg(g)), ValidationError);
    }
}

TEST_SUITE("partial_schema") {
    TEST_CASE("gender under doctor") {
        Fixture f;
        auto& g = f.w.graph;
        auto doctor = add_node(g, fg(g), object("doctor"), f.w.catalog);
        auto gender = add_node(g, doctor, attribute("gender", std::vector<std::string>{"male", "female"}),
                               f.w.catalog);
        auto s = partial_schema(g, gender);
        CHECK(s.path_string() == "image/foreground/doctor/gender");
        CHECK(s.path.back().kind == NodeKind::Attribute);
        for (std::size_t i = 0; i + 1 < s.path.size(); ++i) CHECK(s.path[i].kind == NodeKind::Object);
        CHECK(*s.candidate_values == std::vector<std::string>{"male", "female"});
        CHECK(s.target_node_id == gender);
    }
    TEST_CASE("attribute under first level has three entries") {
        Fixture f;
        auto id = add_node(f.w.graph, fg(f.w.graph), attribute("lighting"), f.w.catalog);
        CHECK(partial_schema(f.w.graph, id).path.size() == 3);
    }
    TEST_CASE("object rejected") {
        Fixture f;
        CHECK_THROWS_AS(partial_schema(f.w.graph, fg(f.w.graph)), ValidationError);
        CHECK_THROWS_AS(partial_schema(f.w.graph, NodeId("x")), NotFoundError);
    }
}

TEST_SUITE("duplicate_branch") {
    TEST_CASE("doctor becomes nurse") {
        Fixture f;
        auto& g = f.w.graph;
        auto doctor = add_node(g, fg(g), object("doctor"), f.w.catalog);
        add_node(g, doctor, attribute("gender", std::vector<std::string>{"male", "female"}), f.w.catalog);
        add_node(g, doctor, attribute("stethoscope", std::vector<std::string>{"wearing", "not wearing"}),
                 f.w.catalog);
        ScopeSpec nurse_scope{Selector::of_prompts({f.p2}), Lifecycle::AutoExtended};
        auto nurse = duplicate_branch(g, doctor, "nurse", nurse_scope, f.w.catalog);
        g.validate();
        CHECK(g.parent_of(nurse) == g.parent_of(doctor));
        CHECK(g.node(nurse).origin == NodeOrigin::Duplicated);
        CHECK(oracle::structure(g, nurse, false) == oracle::structure(g, doctor, false));
        for (const auto& id : g.subtree(nurse)) {
            CHECK(resolve_scope(g, id, f.w.catalog) == f.p2_images);
            for (const auto& d : g.subtree(doctor)) CHECK(id != d);
        }
    }
    TEST_CASE("childless object") {
        Fixture f;
        auto& g = f.w.graph;
        auto desk = add_node(g, fg(g), object("desk"), f.w.catalog);
        auto copy = duplicate_branch(g, desk, "table", {Selector::all_images(), Lifecycle::AutoExtended}, f.w.catalog);
        CHECK(g.node(copy).children.empty());
    }
    TEST_CASE("errors") {
        Fixture f;
        auto& g = f.w.graph;
        auto doctor = add_node(g, fg(g), object("doctor"), f.w.catalog);
        auto gender = add_node(g, doctor, attribute("gender"), f.w.catalog);
        ScopeSpec s{Selector::all_images(), Lifecycle::AutoExtended};
        CHECK_THROWS_AS(duplicate_branch(g, gender, "sex", s, f.w.catalog), ValidationError);
        CHECK_THROWS_AS(duplicate_branch(g, doctor, "DOCTOR", s, f.w.catalog), ValidationError);
        CHECK_THROWS_AS(duplicate_branch(g, NodeId("zz"), "x", s, f.w.catalog), NotFoundError);
    }
}

TEST_SUITE("extend_auto_scopes and resolve_scope") {
    TEST_CASE("all fixed lists nothing") {
        gen::World w;
        auto p = w.add_prompt();
        w.add_images(p, 3);
        auto& g = w.graph;
        for (const auto& id : g.preorder()) g.node_mut(id).scope = materialize({Selector::all_images(), Lifecycle::Fixed}, w.catalog);
        auto fresh = w.add_images(p, 5);
        CHECK(extend_auto_scopes(g, p, fresh, w.catalog).empty());
    }
    TEST_CASE("auto all-prompts node grows by five") {
        Fixture f;
        auto& g = f.w.graph;
        auto gender = add_node(g, fg(g), attribute("gender", std::nullopt, {Selector::all_prompts(), Lifecycle::AutoExtended}),
                               f.w.catalog);
        auto before = resolve_scope(g, gender, f.w.catalog);
        auto fresh = f.w.add_images(f.p2, 5);
        auto affected = extend_auto_scopes(g, f.p2, fresh, f.w.catalog);
        CHECK(std::find(affected.begin(), affected.end(), gender) != affected.end());
        CHECK(resolve_scope(g, gender, f.w.catalog).size() == before.size() + 5);
    }
    TEST_CASE("selector miss") {
        Fixture f;
        auto& g = f.w.graph;
        auto gender = add_node(g, fg(g),
                               attribute("gender", std::nullopt, {Selector::of_prompts({f.p1}), Lifecycle::AutoExtended}),
                               f.w.catalog);
        auto fresh = f.w.add_images(f.p2, 5);
        auto affected = extend_auto_scopes(g, f.p2, fresh, f.w.catalog);
        CHECK(std::find(affected.begin(), affected.end(), gender) == affected.end());
    }
    TEST_CASE("fixed ancestor of an auto child widens to keep containment") {
        Fixture f;
        auto& g = f.w.graph;
        auto doctor = add_node(g, fg(g), object("doctor"), f.w.catalog);
        NodePatch fix;
        fix.scope = ScopeSpec{Selector::of_prompts({f.p1}), Lifecycle::Fixed};
        edit_node(g, doctor, fix, f.w.catalog);
        auto gender = add_node(g, doctor,
                               attribute("gender", std::nullopt, {Selector::of_prompts({f.p2}), Lifecycle::AutoExtended}),
                               f.w.catalog);
        auto fresh = f.w.add_images(f.p2, 2);
        auto affected = extend_auto_scopes(g, f.p2, fresh, f.w.catalog);
        CHECK(std::find(affected.begin(), affected.end(), doctor) != affected.end());
        auto r = resolve_scope(g, doctor, f.w.catalog);
        CHECK(std::includes(r.begin(), r.end(), fresh.begin(), fresh.end()));
        CHECK(resolve_scope(g, gender, f.w.catalog).size() == 6);
    }
    TEST_CASE("resolution examples") {
        Fixture f;
        auto& g = f.w.graph;
        CHECK(resolve_scope(g, g.root(), f.w.catalog).size() == 19);
        auto fixed = add_node(g, fg(g),
                              attribute("a", std::nullopt,
                                        {Selector::of_images({*f.p1_images.begin(), *f.p2_images.begin()}), Lifecycle::Fixed}),
                              f.w.catalog);
        auto before = resolve_scope(g, fixed, f.w.catalog);
        f.w.add_images(f.p1, 3);
        CHECK(resolve_scope(g, fixed, f.w.catalog) == before);
        CHECK(before.size() == 2);
        auto p2only = add_node(g, fg(g), attribute("b", std::nullopt, {Selector::of_prompts({f.p2}), Lifecycle::AutoExtended}),
                               f.w.catalog);
        CHECK(resolve_scope(g, p2only, f.w.catalog) == oracle::filter_by_prompts(f.w.image_to_prompt, {f.p2}));
        CHECK_THROWS_AS(resolve_scope(g, NodeId("x"), f.w.catalog), NotFoundError);
    }
}

TEST_CASE("graph serialization round trip") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        auto w = gen::random_world(rng);
        for (int k = 0; k < 10; ++k) gen::random_add(rng, w);
        auto text = canonical(w.graph);
        auto back = graph_from_json(Json::parse(text));
        CHECK(back == w.graph);
        CHECK(canonical(back) == text);
    }
}

TEST_CASE("malformed graph documents are rejected") {
    auto j = to_json(new_graph());
    j["root"]["children"][0]["children"] = Json::array(
        {Json{{"id", "x1"}, {"name", "gender"}, {"kind", "attribute"},
              {"children", Json::array({Json{{"id", "x2"}, {"name", "y"}, {"kind", "attribute"}}})}}});
    CHECK_THROWS_AS(graph_from_json(j), ValidationError);
    CHECK_THROWS_AS(graph_from_json(Json::object()), ValidationError);
}
