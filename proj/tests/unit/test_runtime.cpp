#include "doctest.h"

#include "mpst/runtime.hpp"
#include "mpst/syntax.hpp"
#include "mpst/typecheck.hpp"
#include "support/corpus.hpp"
#include "support/programs.hpp"

#include <random>

using namespace mpst;

namespace {

Config load(const std::string& source) { return initial_config(parse_program(source).body); }

Config load_corpus(const std::string& name) { return load(test::read_corpus(name)); }

std::vector<std::string> kinds(const std::vector<Step>& steps)
{
    std::vector<std::string> out;
    for (const auto& s : steps) out.push_back(step_kind_name(s.label.kind));
    return out;
}

std::vector<std::string> sync_labels(const Trace& t)
{
    std::vector<std::string> out;
    for (const auto& s : t.steps)
        if (s.kind == StepKind::Sync) out.push_back(s.label);
    return out;
}

std::string error_code(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

}  // namespace

TEST_CASE("link opens a session with empty queues")
{
    Config c = load("type G = 1=>2:1<Int>;end; chan a : G; /a[2..2](s).s<<<1>;end | a[2](s).s>>(x);end");
    auto steps = enabled_steps(c);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].label.kind == StepKind::Link);
    const Config& n = steps[0].next;
    REQUIRE(n.queues.size() == 1);
    CHECK(n.queues.begin()->second.empty());
    CHECK(n.soup.size() == 2);
    CHECK(n.sessions.at(1).participants == 2);
    // the runtime name is fresh with respect to the source name
    CHECK(n.queues.begin()->first != "s");
}

TEST_CASE("send enqueues the evaluated value")
{
    Config c = load("type G = 1=>2:1<Int>;end; chan a : G; /a[2..2](s).s<<<2+3>;end | a[2](s).s>>(x);end");
    Config linked = enabled_steps(c).at(0).next;
    auto steps = enabled_steps(linked);
    REQUIRE(steps.size() == 1);
    CHECK(steps[0].label.kind == StepKind::Send);
    const auto& q = steps[0].next.queues.at(steps[0].label.chans.at(0));
    REQUIRE(q.size() == 1);
    CHECK(q.front().msg == Message{ValuesMsg{{int_value(5)}}});
}

TEST_CASE("a sync needs every participant of the session")
{
    Config c = load(
        "type T[1,3] = {^a: end}; chan a : T;"
        "/a[2..3](s).sync((s),3){^a: end} | a[2](s).sync((s),3){^a: end} | a[3](s).s>>(x);end");
    auto linked = enabled_steps(c);
    REQUIRE(linked.size() == 1);
    CHECK(kinds(enabled_steps(linked[0].next)).empty());
}

TEST_CASE("a sync has one successor per common label")
{
    Config c = load(
        "type T[1,2] = {^a: end, #b: end, #c: end}; chan a : T;"
        "/a[2..2](s).sync((s),2){^a: end, #b: end, #c: end} | a[2](s).sync((s),2){^a: end, #c: succ}");
    auto after = enabled_steps(enabled_steps(c).at(0).next);
    REQUIRE(after.size() == 2);
    CHECK(after[0].label.label == "a");
    CHECK(after[1].label.label == "c");
    CHECK(after[0].redex == after[1].redex);
    CHECK(after[1].next.success);
    CHECK_FALSE(after[0].next.success);
    CHECK(after[0].label.sync_index == 1);
}

TEST_CASE("rand{end} takes one step and terminates")
{
    UniformPolicy pol(0);
    Trace t = run(initial_config(parse_process("rand{end}")), pol, 100);
    REQUIRE(t.steps.size() == 1);
    CHECK(t.steps[0].kind == StepKind::Rand);
    CHECK(t.verdict == Verdict::Terminated);
    CHECK_FALSE(t.success);
}

TEST_CASE("disjoint sync offers are stuck")
{
    Config c = load(
        "type T[1,2] = {^a: end}; chan a : T;"
        "/a[2..2](s).sync((s),2){#a: end} | a[2](s).sync((s),2){#b: end}");
    UniformPolicy pol(0);
    Trace t = run(c, pol, 100);
    CHECK(t.verdict == Verdict::Stuck);
    CHECK(t.steps.size() == 1);
    CHECK(config_faults(t.final).size() == 1);
}

TEST_CASE("healthcare runs to termination with common labels")
{
    Config c = load_corpus("healthcare.mps");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CAPTURE(seed);
        UniformPolicy pol(seed);
        Trace t = run(c, pol, 1000);
        CHECK(t.verdict == Verdict::Terminated);
        auto labels = sync_labels(t);
        REQUIRE(labels.size() == 2);
        CHECK((labels[0] == "CaseD" || labels[0] == "CaseN"));
        CHECK(labels[1].substr(0, 5) == labels[0]);
        CHECK(labels[1].size() == 6);
    }
    UniformPolicy pol(0);
    Trace t = run(c, pol, 1000);
    // the trace for seed 0, in full
    std::string text = format_trace(t);
    CHECK(text.find("1, Link, d#1 s#1 r#1, *, a\n") == 0);
    CHECK(text.find(", Sync, d#1 s#1 r#1, *, ") != std::string::npos);
    CHECK(text.find("verdict: terminated") != std::string::npos);
}

TEST_CASE("runs are deterministic for a seed")
{
    Config c = load_corpus("healthcare.mps");
    for (std::uint64_t seed : {1u, 7u, 42u}) {
        UniformPolicy a(seed), b(seed);
        CHECK(format_trace(run(c, a, 1000)) == format_trace(run(c, b, 1000)));
    }
    std::set<std::string> seen;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        UniformPolicy p(seed);
        auto ls = sync_labels(run(c, p, 1000));
        seen.insert(ls[0] + "/" + ls[1]);
    }
    CHECK(seen.size() == 4);
}

TEST_CASE("fuel bounds a run")
{
    Config c = load("type G = rec t.1=>2:1<Int>;t; chan a : G;"
                    "def P(n: Int; (s)) = s<<<n>;P(n+1; (s)) and Q(; (s)) = s>>(x);Q(; (s)) in"
                    "(/a[2..2](s).P(0; (s)) | a[2](s).Q(; (s)))");
    UniformPolicy pol(0);
    Trace t = run(c, pol, 50);
    CHECK(t.verdict == Verdict::FuelExhausted);
    CHECK(t.steps.size() == 50);
}

TEST_CASE("queues are FIFO")
{
    Config c = load("type G = 1=>2:1<Int>;1=>2:1<Int>;1=>2:1<Int>;end; chan a : G;"
                    "/a[2..2](s).s<<<1>;s<<<2>;s<<<3>;end | a[2](s).s>>(x);s>>(y);s>>(z);end");
    // every interleaving receives 1, 2, 3 in order
    auto g = explore(c);
    for (const auto& n : g.nodes)
        for (const auto& [l, _] : n.edges)
            if (l.kind == StepKind::Recv) {
                const auto& q = n.config.queues.at(l.chans[0]);
                CHECK(l.payload == render(std::get<ValuesMsg>(q.front().msg).values[0]));
            }
    std::vector<std::string> recvd;
    UniformPolicy pol(3);
    for (const auto& s : run(c, pol, 100).steps)
        if (s.kind == StepKind::Recv) recvd.push_back(s.payload);
    CHECK(recvd == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("explore the healthcare program")
{
    auto g = explore(load_corpus("healthcare.mps"), {200, 200000});
    CHECK(g.faults.empty());
    CHECK(g.stuck == 0);
    CHECK(g.terminal >= 1);
    CHECK_FALSE(g.truncated);
    auto traces = decision_traces(g);
    CHECK(traces == std::set<std::vector<std::string>>{
                        {"CaseD", "CaseDD"}, {"CaseD", "CaseDN"}, {"CaseN", "CaseND"}, {"CaseN", "CaseNN"}});
}

TEST_CASE("explore the no-sync variant")
{
    auto g = explore(load_corpus("nosync.mps"));
    CHECK(g.faults.empty());
    CHECK(g.stuck == 0);
    std::set<std::vector<std::string>> cases;
    for (auto t : decision_traces(g)) {
        t.erase(std::unique(t.begin(), t.end()), t.end());
        cases.insert(t);
    }
    CHECK(cases.size() == 4);
    CHECK(cases.count({"CaseN", "CaseNN"}) == 1);
}

TEST_CASE("explore end")
{
    auto g = explore(initial_config(parse_process("end")));
    CHECK(g.nodes.size() == 1);
    CHECK(g.terminal == 1);
}

TEST_CASE("explore enforces the node bound")
{
    Config c = load("type G = rec t.1=>2:1<Int>;t; chan a : G;"
                    "def P(n: Int; (s)) = s<<<n>;P(n+1; (s)) and Q(; (s)) = s>>(x);Q(; (s)) in"
                    "(/a[2..2](s).P(0; (s)) | a[2](s).Q(; (s)))");
    CHECK(error_code([&] { explore(c, {1000, 50}); }) == "E-BOUND");
    auto g = explore(c, {10, 100000});
    CHECK(g.truncated);
}

TEST_CASE("recursion reaches success")
{
    Config c = load("type G = rec t.{^more: 1=>2:1<Int>;t, ^stop: end}; chan a : G;"
                    "def P(n: Int; (s)) = sync((s),2){^more: s<<<n>;P(n+1; (s)), ^stop: succ} in "
                    "def Q(; (s)) = sync((s),2){^more: s>>(x);Q(; (s)), ^stop: end} in"
                    "(/a[2..2](s).P(0; (s)) | a[2](s).Q(; (s)))");
    auto g = explore(c, {30, 100000});
    CHECK(g.success_reachable);
    CHECK(g.faults.empty());
    std::vector<ScriptRecord> script{{1, 1, "more", {}}, {1, 2, "more", {}}, {1, 3, "stop", {}}};
    ScriptedPolicy pol(script, 0);
    Trace t = run(c, pol, 1000);
    CHECK(t.verdict == Verdict::Terminated);
    CHECK(t.success);
    CHECK(sync_labels(t) == std::vector<std::string>{"more", "more", "stop"});
}

TEST_CASE("delegation moves the role")
{
    Config c = load_corpus("delegation.mps");
    typecheck(parse_program(test::read_corpus("delegation.mps")));
    UniformPolicy pol(0);
    Trace t = run(c, pol, 200);
    CHECK(t.verdict == Verdict::Terminated);
    bool deleg = false, srec = false;
    for (const auto& s : t.steps) {
        deleg = deleg || s.kind == StepKind::Deleg;
        srec = srec || s.kind == StepKind::SRec;
    }
    CHECK(deleg);
    CHECK(srec);
    auto g = explore(c);
    CHECK(g.faults.empty());
    CHECK(g.stuck == 0);
}

TEST_CASE("scripts")
{
    auto recs = parse_script("// comment\n1, 1, CaseN\n\n1, 2, CaseNN // trailing\n2, 1, go, x=3, y=\"hi\", z=true\n");
    REQUIRE(recs.size() == 3);
    CHECK(recs[1].label == "CaseNN");
    CHECK(recs[2].args.at("x") == int_value(3));
    CHECK(recs[2].args.at("y") == string_value("hi"));
    CHECK(recs[2].args.at("z") == bool_value(true));
    CHECK(error_code([] { parse_script("1, CaseN"); }) == "E-SCRIPT");
    CHECK(error_code([] { parse_script("x, 1, CaseN"); }) == "E-SCRIPT");

    Config c = load_corpus("healthcare.mps");
    ScriptedPolicy pol(recs, 0);
    Trace t = run(c, pol, 1000);
    CHECK(sync_labels(t) == std::vector<std::string>{"CaseN", "CaseNN"});

    ScriptedPolicy bad(parse_script("1, 1, CaseDD"), 0);
    CHECK(error_code([&] { run(c, bad, 1000); }) == "E-SCRIPT");
}

TEST_CASE("guisync binds policy arguments")
{
    const std::string src =
        "type T = {^go: 1=>2:1<Int>;end}; chan a : T;"
        "/a[2..2](s).guisync((s),2){^go(n: Int): s<<<n>;end} | a[2](s).guisync((s),2){^go(m: Int): s>>(x);end}";
    typecheck(parse_program(src));
    Config c = load(src);
    UniformPolicy uni(0);
    Trace t = run(c, uni, 100);
    CHECK(t.verdict == Verdict::Terminated);
    std::string sent;
    for (const auto& s : t.steps)
        if (s.kind == StepKind::Send) sent = s.payload;
    CHECK(sent == "0");

    ScriptedPolicy scripted(parse_script("1, 1, go, n=7"), 0);
    t = run(c, scripted, 100);
    for (const auto& s : t.steps)
        if (s.kind == StepKind::Send) sent = s.payload;
    CHECK(sent == "7");
    ScriptedPolicy unknown(parse_script("1, 1, go, q=7"), 0);
    CHECK(error_code([&] { run(c, unknown, 100); }) == "E-SCRIPT");
}

TEST_CASE("classifying steps")
{
    std::set<std::string> chans{"in_2", "out_2"}, defs{"C"};
    StepLabel l;
    l.kind = StepKind::Label;
    l.chans = {"in_2#1"};
    CHECK(is_conduction(l, chans, defs));
    l.kind = StepKind::Send;
    CHECK_FALSE(is_conduction(l, chans, defs));
    l.kind = StepKind::Branch;
    l.chans = {"s_1#1"};
    CHECK_FALSE(is_conduction(l, chans, defs));
    StepLabel d;
    d.kind = StepKind::Def;
    d.def_name = "C";
    CHECK(is_conduction(d, chans, defs));
    d.def_name = "P";
    CHECK_FALSE(is_conduction(d, chans, defs));
    CHECK(base_name("s_1#12") == "s_1");
    CHECK(base_name("s_1") == "s_1");
}

TEST_CASE("if and rand expressions")
{
    UniformPolicy pol(0);
    Trace t = run(initial_config(parse_process("if 1 < 2 then succ else end")), pol, 10);
    CHECK(t.steps.at(0).kind == StepKind::IfT);
    CHECK(t.success);
    auto steps = enabled_steps(initial_config(parse_process("if rand{true, false} then succ else end")));
    CHECK(kinds(steps) == std::vector<std::string>{"IfT", "IfF"});
    CHECK(steps[0].redex == steps[1].redex);
    CHECK(error_code([] { enabled_steps(initial_config(parse_process("if x then end else end"))); }) == "E-EVAL");
}

TEST_CASE("restriction names are fresh")
{
    auto c = initial_config(parse_process("(nu b) end | (nu b) /b[2..2](s).end"));
    REQUIRE(c.soup.size() == 1);
    CHECK(render(c.soup[0].proc).find("b#v2") != std::string::npos);
}

TEST_CASE("a receive race admitted by the linearity check")
{
    // 3 may consume the message meant for 2
    const std::string src = "type G = 1=>2:1<Int>;2=>3:1<Int>;end; chan a : G;"
                            "/a[2..3](s).s<<<1>;end | a[2](s).s>>(x);s<<<2>;end | a[3](s).s>>(y);end";
    typecheck(parse_program(src));
    auto g = explore(load(src));
    CHECK(g.stuck > 0);
}

TEST_CASE("random typed programs explore without faults")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 25; ++i) {
        auto g = test::random_protocol(rng, 3, 3, 5, true);
        std::string src = test::synthesise_program(rng, g);
        CAPTURE(src);
        typecheck(parse_program(src));
        auto res = explore(load(src), {60, 100000});
        CHECK(res.faults.empty());
        CHECK(res.stuck == 0);
    }
}
