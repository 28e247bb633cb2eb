// Acceptance checks P1-P9: one PASS/FAIL line per criterion, exit status 1
// when any fails.

#include "mpst/erasure.hpp"
#include "mpst/procmatrix.hpp"
#include "mpst/runtime.hpp"
#include "mpst/syntax.hpp"
#include "mpst/typecheck.hpp"
#include "mpst/types.hpp"
#include "support/corpus.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/programs.hpp"
#include "support/traces.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <random>
#include <sstream>

using namespace mpst;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what)
{
    if (!cond) throw Failed(what);
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

int cli(const std::string& args)
{
    int status = std::system((std::string(MPST_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Program corpus_program(const std::string& name) { return parse_program(test::read_corpus(name), name); }

// Drops `label` from the first sync of the leftmost request.
ProcPtr drop_first_sync_label(const ProcPtr& p, const std::string& label)
{
    if (const auto* par = as<Par>(p)) return make_proc(Par{drop_first_sync_label(par->left, label), par->right});
    if (const auto* r = as<Request>(p)) {
        Request out = *r;
        out.body = drop_first_sync_label(r->body, label);
        return make_proc(out);
    }
    if (const auto* s = as<Sync>(p)) {
        Sync out = *s;
        out.branches.erase(std::remove_if(out.branches.begin(), out.branches.end(),
                                          [&](const SyncBranch& b) { return b.label == label; }),
                           out.branches.end());
        return make_proc(out);
    }
    return p;
}

std::vector<GlobalPtr> random_protocols(std::uint64_t seed, int count, bool race_free)
{
    std::mt19937_64 rng(seed);
    std::vector<GlobalPtr> out;
    while (static_cast<int>(out.size()) < count) out.push_back(test::random_protocol(rng, 3, 3, 5, race_free));
    return out;
}

std::vector<std::string> random_programs(std::uint64_t seed, int count, bool race_free)
{
    std::mt19937_64 rng(seed);
    std::vector<std::string> out;
    for (const auto& g : random_protocols(seed, count, race_free)) out.push_back(test::synthesise_program(rng, g));
    return out;
}

// ---------------------------------------------------------------------------

Outcome p1()
{
    Program prog = corpus_program("healthcare.mps");
    auto start = std::chrono::steady_clock::now();
    typecheck(prog);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    require(ms < 1000, "typecheck took " + std::to_string(ms) + " ms");

    Program mutated = prog;
    mutated.body = drop_first_sync_label(prog.body, "CaseN");
    require(!(mutated.body == prog.body), "mutation did not change the patient");
    std::string code = error_code([&] { typecheck(mutated); });
    require(code == "E-SYNC-MAND", "mutated patient gave '" + code + "'");

    int ok = cli("check " + test::corpus_path("healthcare.mps"));
    int bad = cli("check " + test::corpus_path("healthcare_nomand.mps"));
    require(ok == 0, "check exited " + std::to_string(ok));
    require(bad == 1, "check without CaseN exited " + std::to_string(bad));
    return {true, "typechecks in " + std::to_string(ms) + " ms, check exits 0; without CaseN: E-SYNC-MAND, exit 1"};
}

Outcome p2()
{
    auto decls = parse_type_file(test::read_corpus("healthcare_types.mpt"));
    require(decls.size() == 1, "expected one type declaration");
    LocalPtr projected = project(decls[0].type, 1);
    LocalPtr expected = parse_local_type(test::read_corpus("healthcare_patient.mlt"));
    require(projected == expected, "projection differs: " + render(projected));
    return {true, "project(G,1) == parsed patient local type (AST equality)"};
}

Outcome p3()
{
    Program prog = corpus_program("healthcare.mps");
    GlobalPtr g = prog.types[0].type;
    Dimensions d = dimensions(g);
    ProcPtr c = conductor(g, d, {"d", "s", "r"}, "a", "cond");
    size_t count = conductor_case_count(c);
    size_t oracle = test::sum_paths(g, d.participants).size();
    require(count == 64, "conductor has " + std::to_string(count) + " cases");
    require(oracle == 64, "oracle counts " + std::to_string(oracle));
    return {true, "64 leaf case combinations (oracle over the type: " + std::to_string(oracle) + ")"};
}

Outcome p4()
{
    Program prog = corpus_program("healthcare.mps");
    ErasedProgram e = erase(prog);
    typecheck(e.translated_env, e.program.body);
    typecheck(parse_program(render(e.program)));
    Dimensions td = dimensions(translate_global(prog.types[0].type));
    require(td.channels == 9 && td.participants == 4,
            "translated dims (" + std::to_string(td.channels) + "," + std::to_string(td.participants) + ")");
    const auto& shared = e.translated_env.shared.at("a");
    require(shared.dims.channels == 9 && shared.dims.participants == 4, "translate_env dims differ");

    int checked = 0;
    for (const auto& src : random_programs(404, 60, false)) {
        Program p = parse_program(src);
        require(test::detail::has_sum(p.types[0].type), "generated protocol without a sum");
        require(dimensions(p.types[0].type).participants <= 3, "more than 3 participants");
        typecheck(p);
        ErasedProgram ep = erase(p);
        try {
            typecheck(ep.translated_env, ep.program.body);
        } catch (const Error& err) {
            throw Failed("erasure of generated program " + std::to_string(checked) + " fails: " +
                         format_diagnostic(err.diagnostics().front()) + "\n" + src);
        }
        ++checked;
    }
    return {true, "healthcare erasure typechecks, dims (9,4); " + std::to_string(checked) +
                      " generated programs keep their types"};
}

Outcome p5()
{
    Program prog = corpus_program("healthcare.mps");
    ErasedProgram e = erase(prog);
    test::Observer src_obs, er_obs{e.conductor_chans, e.conductor_defs};
    Config src = initial_config(prog.body), er = initial_config(e.program.body);
    std::set<std::vector<std::string>> decisions;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        UniformPolicy p(seed);
        Trace t = run(src, p, 1000);
        require(t.verdict == Verdict::Terminated, "source run " + std::to_string(seed) + " did not terminate");
        auto obs = test::observations(t, src_obs);
        require(find_run(er, obs, er_obs, true), "seed " + std::to_string(seed) + ": source trace not matched");

        UniformPolicy q(seed);
        Trace u = run(er, q, 5000);
        require(u.verdict == Verdict::Terminated, "erased run " + std::to_string(seed) + " did not terminate");
        auto back = test::observations(u, er_obs);
        require(find_run(src, back, src_obs, true), "seed " + std::to_string(seed) + ": erased trace not replayed");
        std::vector<std::string> d;
        for (const auto& o : back)
            if (o.rfind("Decide", 0) == 0) d.push_back(o);
        decisions.insert(d);
    }
    return {true, "100 seeds: source traces matched by erased runs and erased traces replayed in the source (" +
                      std::to_string(decisions.size()) + " distinct decision sequences)"};
}

struct CorpusEntry {
    std::string name;
    Program program;
};

std::vector<CorpusEntry> typed_corpus()
{
    std::vector<CorpusEntry> out;
    for (const char* f : {"healthcare.mps", "nosync.mps", "delegation.mps", "recursion.mps"}) {
        Program p = corpus_program(f);
        typecheck(p);
        out.push_back({f, p});
    }
    int i = 0;
    for (const auto& src : random_programs(606, 20, true)) {
        Program p = parse_program(src);
        typecheck(p);
        out.push_back({"generated#" + std::to_string(i++), p});
    }
    return out;
}

Outcome p6()
{
    auto corpus = typed_corpus();
    std::vector<CorpusEntry> all = corpus;
    for (const auto& c : corpus) {
        if (error_code([&] { erase(c.program); }) == "E-ERASE-DELEG") continue;
        all.push_back({"erased " + c.name, erase(c.program).program});
    }
    size_t nodes = 0;
    for (const auto& c : all) {
        ExploreResult r = explore(initial_config(elaborate(typecheck(c.program))), {200, 400000});
        nodes += r.nodes.size();
        require(r.stuck == 0, c.name + ": " + std::to_string(r.stuck) + " stuck configurations");
        if (!r.faults.empty()) throw Failed(c.name + ": " + r.faults.front());
    }
    return {true, std::to_string(all.size()) + " typed programs explored to depth 200 (" + std::to_string(nodes) +
                      " configurations): no stuck or faulty configuration"};
}

// Every maximal run terminates: the explored graph is complete, acyclic and
// has no stuck node.
bool all_runs_terminate(const ExploreResult& r)
{
    if (r.truncated || r.stuck) return false;
    std::vector<int> mark(r.nodes.size(), 0);  // 0 new, 1 on stack, 2 done
    std::function<bool(size_t)> cyclic = [&](size_t n) {
        mark[n] = 1;
        for (const auto& [label, to] : r.nodes[n].edges) {
            if (mark[to] == 1) return true;
            if (mark[to] == 0 && cyclic(to)) return true;
        }
        mark[n] = 2;
        return false;
    };
    return r.nodes.empty() || !cyclic(0);
}

Outcome p7()
{
    int terminating = 0, compared = 0, skipped = 0;
    for (const auto& c : typed_corpus()) {
        if (error_code([&] { erase(c.program); }) == "E-ERASE-DELEG") {
            ++skipped;
            continue;
        }
        ErasedProgram e = erase(c.program);
        Config src = initial_config(c.program.body), er = initial_config(e.program.body);
        ExploreResult rs = explore(src, {200, 400000});
        ExploreResult re = explore(er, {600, 400000});
        require(rs.success_reachable == re.success_reachable, c.name + ": success reachability differs");
        ++compared;
        if (!all_runs_terminate(rs)) continue;
        ++terminating;
        require(all_runs_terminate(re), c.name + ": erasure has a non-terminating run");
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            UniformPolicy p(seed);
            Trace t = run(er, p, 20000);
            require(t.verdict == Verdict::Terminated, c.name + ": erased run " + std::to_string(seed) + " is " +
                                                          verdict_name(t.verdict));
        }
    }
    return {true, std::to_string(terminating) + " terminating programs have terminating erasures; success "
                                                "reachability agrees on " +
                      std::to_string(compared) + " programs (" + std::to_string(skipped) +
                      " with delegation not erasable)"};
}

// Independent reading of the matrix: actions, their predecessors, and who
// writes or reads them.
struct Oracle {
    std::vector<std::string> roles;
    std::map<int, std::set<int>> preds;
    std::map<int, std::string> names;
    std::map<int, std::map<std::string, char>> access;

    explicit Oracle(const nlohmann::json& j)
    {
        for (const auto& r : j["roles"]) roles.push_back(r);
        for (const auto& a : j["actions"]) {
            int id = a["id"];
            names[id] = a["name"];
            for (const auto& p : a["preds"]) preds[id].insert(p.get<int>());
            for (const auto& [role, x] : a["access"].items()) access[id][role] = x.get<std::string>()[0];
        }
    }

    char mode(int id, const std::string& role) const
    {
        auto it = access.at(id).find(role);
        return it == access.at(id).end() ? 'N' : it->second;
    }

    std::set<int> enabled(const std::set<int>& st) const
    {
        std::set<int> out;
        for (const auto& [id, ps] : preds)
            if (std::includes(st.begin(), st.end(), ps.begin(), ps.end())) out.insert(id);
        for (const auto& [id, n] : names)
            if (!preds.count(id)) out.insert(id);
        return out;
    }

    std::set<int> after(std::set<int> st, int id) const
    {
        std::set<int> gone{id};
        for (bool grew = true; grew;) {
            grew = false;
            for (const auto& [a, ps] : preds)
                for (int p : ps)
                    if (gone.count(p) && gone.insert(a).second) grew = true;
        }
        for (int g : gone) st.erase(g);
        st.insert(id);
        return st;
    }
};

Outcome p8()
{
    std::string text = test::read_corpus("workflow_matrix.json");
    Oracle o(nlohmann::json::parse(text));
    GlobalPtr g = encode(load_matrix(text));
    require(coherence_errors(g).empty(), "encoding is not coherent");

    // brute-force walk of the matrix
    std::set<std::set<int>> states{{}};
    std::deque<std::set<int>> todo{{}};
    while (!todo.empty()) {
        auto st = todo.front();
        todo.pop_front();
        if (st.size() == o.names.size()) continue;
        for (int id : o.enabled(st))
            if (auto next = o.after(st, id); states.insert(next).second) todo.push_back(next);
    }
    require(states.size() == 4, "walker found " + std::to_string(states.size()) + " states");

    // the type walked alongside the matrix
    std::set<std::set<int>> met;
    std::map<std::string, GlobalPtr> binders;
    std::set<std::pair<std::set<int>, std::string>> seen;
    std::vector<std::pair<std::set<int>, GlobalPtr>> stack{{{}, g}};
    bool state1_checked = false, body_checked = false;
    while (!stack.empty()) {
        auto [st, t] = stack.back();
        stack.pop_back();
        while (const auto* mu = as<GMu>(t)) {
            binders[mu->var] = t;
            t = mu->body;
        }
        if (const auto* v = as<GVar>(t)) t = as<GMu>(binders.at(v->name))->body;
        if (!seen.insert({st, render(t)}).second) continue;
        met.insert(st);
        if (st.size() == o.names.size()) {
            require(as<GEnd>(t) != nullptr, "completed state does not end");
            continue;
        }
        const auto* sum = as<GSum>(t);
        if (!sum) {
            std::string name;
            for (int i : st) name += " " + std::to_string(i);
            throw Failed("no sum at workflow state {" + name + " }: " + render(t));
        }
        std::map<std::string, int> expected;
        for (int id : o.enabled(st))
            for (const auto& r : o.roles)
                if (o.mode(id, r) == 'W') expected[r + o.names.at(id)] = id;
        std::set<std::string> labels;
        for (const auto& b : sum->branches) {
            require(b.mandatory, "optional branch " + b.label);
            require(expected.count(b.label), "unexpected branch " + b.label);
            labels.insert(b.label);
            int id = expected.at(b.label);
            int writer = 0;
            for (size_t r = 0; r < o.roles.size(); ++r)
                if (b.label == o.roles[r] + o.names.at(id)) writer = static_cast<int>(r) + 1;
            GlobalPtr cont = b.body;
            for (size_t q = 1; q <= o.roles.size(); ++q) {
                if (static_cast<int>(q) == writer || o.mode(id, o.roles[q - 1]) == 'N') continue;
                const auto* x = as<GExchange>(cont);
                require(x && x->from == writer && x->to == static_cast<int>(q) && x->chan == static_cast<int>(q),
                        b.label + " does not send to participant " + std::to_string(q));
                cont = x->cont;
            }
            stack.push_back({o.after(st, id), cont});
            if (b.label == "PatientData") {
                std::string body = render(b.body);
                require(body.rfind("1=>2:2<String>;1=>3:3<String>;", 0) == 0, "PatientData body is " + body);
                body_checked = true;
            }
        }
        require(labels.size() == expected.size(), "missing branches");
        if (st == std::set<int>{1}) {
            require(labels == std::set<std::string>{"PatientData", "DoctorSchedule", "NurseSchedule"},
                    "state {1} has other branches");
            state1_checked = true;
        }
    }
    require(met == states, "the type visits other states than the walker");
    require(state1_checked && body_checked, "state {1} not reached in the type");
    return {true, "4 reachable states; {1} offers PatientData, DoctorSchedule, NurseSchedule (all mandatory); "
                  "coherent; type and brute-force walker agree"};
}

Outcome p9()
{
    size_t terms = 0;
    for (const char* f : {"healthcare.mps", "nosync.mps", "delegation.mps", "recursion.mps"}) {
        Program p = corpus_program(f);
        require(parse_program(render(p)) == p, std::string(f) + " does not round-trip");
        ++terms;
    }
    for (const char* f : {"healthcare_types.mpt"}) {
        for (const auto& d : parse_type_file(test::read_corpus(f))) {
            require(parse_global_type(render(d.type)) == d.type, std::string(f) + " does not round-trip");
            ++terms;
        }
    }
    LocalPtr l = parse_local_type(test::read_corpus("healthcare_patient.mlt"));
    require(parse_local_type(render(l)) == l, "patient local type does not round-trip");
    ++terms;
    GlobalPtr pm = encode(load_matrix(test::read_corpus("workflow_matrix.json")));
    require(parse_global_type(render(pm)) == pm, "matrix encoding does not round-trip");
    ++terms;

    std::mt19937_64 rng(9);
    for (int i = 0; i < 1000; ++i) {
        auto p = test::random_process(rng, 4);
        require(parse_process(render(p)) == p, "process does not round-trip: " + render(p));
        auto g = test::random_global(rng, 4);
        require(parse_global_type(render(g)) == g, "global type does not round-trip: " + render(g));
        auto t = test::random_local(rng, 4);
        require(parse_local_type(render(t)) == t, "local type does not round-trip: " + render(t));
        terms += 3;
    }
    for (const auto& src : random_programs(909, 50, false)) {
        Program p = parse_program(src);
        require(parse_program(render(p)) == p, "program does not round-trip");
        ++terms;
    }
    return {true, std::to_string(terms) + " terms round-trip through render and parse"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"P1", p1}, {"P2", p2}, {"P3", p3}, {"P4", p4}, {"P5", p5},
        {"P6", p6}, {"P7", p7}, {"P8", p8}, {"P9", p9},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        auto start = std::chrono::steady_clock::now();
        try {
            o = check();
        } catch (const Failed& e) {
            o = {false, e.what()};
        } catch (const Error& e) {
            o = {false, format_diagnostic(e.diagnostics().front())};
        } catch (const std::exception& e) {
            o = {false, e.what()};
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %s: %s [%lld ms]\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    static_cast<long long>(ms));
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures ? 1 : 0;
}
