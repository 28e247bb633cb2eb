#include "mpst/erasure.hpp"
#include "mpst/syntax.hpp"
#include "util.hpp"

#include <json.hpp>

#include <algorithm>
#include <regex>

namespace mpst {

using detail::overloaded;

std::vector<std::string> conductor_channels(const std::vector<std::string>& session_chans, int n, const std::string& tag)
{
    const std::string base = session_chans.empty() ? "" : session_chans.front() + tag;
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) {
        out.push_back("in" + tag + base + std::to_string(i));
        out.push_back("out" + tag + base + std::to_string(i));
    }
    return out;
}

namespace {

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

class ConductorGen {
public:
    ConductorGen(std::vector<std::string> chans, std::string prefix, std::vector<std::string>* defs)
        : chans_(std::move(chans)), prefix_(std::move(prefix)), defs_(defs)
    {
    }

    ProcPtr gen(const LocalPtr& t)
    {
        return std::visit(
            overloaded{
                [&](const LBranch& x) {
                    Branch b{chan(x.chan), {}};
                    for (const auto& l : x.branches) b.branches.push_back({l.label, gen(l.body)});
                    return make_proc(b);
                },
                [&](const LSelect& x) {
                    if (x.branches.size() == 1)
                        return make_proc(Select{chan(x.chan), x.branches[0].label, gen(x.branches[0].body)});
                    Rand r;
                    for (const auto& l : x.branches) r.branches.push_back(make_proc(Select{chan(x.chan), l.label, gen(l.body)}));
                    return make_proc(r);
                },
                [&](const LMu& x) {
                    std::string name = prefix_ + "_" + x.var;
                    for (int k = 2; std::find(used_.begin(), used_.end(), name) != used_.end(); ++k)
                        name = prefix_ + "_" + x.var + std::to_string(k);
                    used_.push_back(name);
                    if (defs_) defs_->push_back(name);
                    auto saved = vars_;
                    vars_[x.var] = name;
                    ProcPtr body = gen(x.body);
                    vars_ = saved;
                    Definition d{name, {}, {chans_}, body};
                    return make_proc(Def{{d}, make_proc(Call{name, {}, {chans_}})});
                },
                [&](const LVar& x) { return make_proc(Call{vars_.at(x.name), {}, {chans_}}); },
                [&](const LEnd&) { return inact(); },
                [&](const auto&) -> ProcPtr {
                    throw Error("E-ERASE", "the conductor's projection exchanges values: " + render(t));
                },
            },
            t->node);
    }

private:
    const std::string& chan(int k) { return chans_.at(static_cast<size_t>(k - 1)); }

    std::vector<std::string> chans_;
    std::string prefix_;
    std::vector<std::string>* defs_;
    std::map<std::string, std::string> vars_;
    std::vector<std::string> used_;
};

}  // namespace

ProcPtr conductor(const GlobalPtr& g, Dimensions dims, const std::vector<std::string>& session_chans,
                  const std::string& shared, const std::string& def_prefix, std::vector<std::string>* defs,
                  const std::string& tag)
{
    const int n = dims.participants;
    LocalPtr local = project(translate_global(g, dims), n + 1);
    auto chans = concat(session_chans, conductor_channels(session_chans, n, tag));
    ConductorGen gen(chans, def_prefix, defs);
    return make_proc(Accept{shared, n + 1, chans, gen.gen(local)});
}

namespace {

class Eraser {
public:
    explicit Eraser(std::string tag) : tag_(std::move(tag)) {}

    ProcPtr erase(const Derivation& d)
    {
        auto sub = [&](size_t i) { return erase(d.premises.at(i)); };
        const ProcPtr& p = d.process;
        Process::Node node = std::visit(
            overloaded{
                [&](const Sync& n) -> Process::Node {
                    if (n.gui)
                        throw Error("E-ERASE-GUISYNC", "guisync has no erasure (its arguments come from outside the session)",
                                    p->span);
                    std::vector<std::string> offered;
                    Branch b{io(d.chans, d.participant, "in"), {}};
                    for (size_t i = 0; i < n.branches.size(); ++i) {
                        offered.push_back(n.branches[i].label);
                        b.branches.push_back({n.branches[i].label, sub(i)});
                    }
                    std::string cases;
                    try {
                        cases = cases_label(offered);
                    } catch (Error& e) {
                        throw Error("E-LABELCHARS", e.diagnostics().front().message, p->span);
                    }
                    return Select{io(d.chans, d.participant, "out"), cases, make_proc(b)};
                },
                [&](const Rand& n) -> Process::Node {
                    Rand out = n;
                    for (size_t i = 0; i < out.branches.size(); ++i) out.branches[i] = sub(i);
                    return out;
                },
                [&](const Request& n) -> Process::Node {
                    const int parts = d.dims.participants;
                    auto cc = conductor_channels(n.session_chans, parts, tag_);
                    chans_.insert(cc.begin(), cc.end());
                    std::vector<std::string> defs;
                    std::string prefix = "cond" + tag_ + n.chan + tag_ + std::to_string(++conductors_);
                    ProcPtr c = conductor(d.global, d.dims, n.session_chans, n.chan, prefix, &defs, tag_);
                    defs_.insert(defs.begin(), defs.end());
                    ProcPtr req = make_proc(Request{n.chan, parts + 1, concat(n.session_chans, cc), sub(0)}, p->span);
                    return Par{c, req};
                },
                [&](const Accept& n) -> Process::Node {
                    auto cc = conductor_channels(n.session_chans, d.dims.participants, tag_);
                    return Accept{n.chan, n.participant, concat(n.session_chans, cc), sub(0)};
                },
                [&](const Send& n) -> Process::Node { return Send{n.chan, n.exprs, sub(0)}; },
                [&](const Recv& n) -> Process::Node { return Recv{n.chan, n.vars, sub(0)}; },
                [&](const Delegate&) -> Process::Node {
                    throw Error("E-ERASE-DELEG", "delegation cannot be erased", p->span);
                },
                [&](const DelegRecv&) -> Process::Node {
                    throw Error("E-ERASE-DELEG", "delegation cannot be erased", p->span);
                },
                [&](const Select& n) -> Process::Node {
                    ProcPtr notify = make_proc(Select{io(d.chans, d.participant, "out"), n.label, sub(0)});
                    return Select{n.chan, n.label, notify};
                },
                [&](const Branch& n) -> Process::Node {
                    Branch out = n;
                    for (size_t i = 0; i < out.branches.size(); ++i) out.branches[i].body = sub(i);
                    return out;
                },
                [&](const If& n) -> Process::Node { return If{n.cond, sub(0), sub(1)}; },
                [&](const Par&) -> Process::Node { return Par{sub(0), sub(1)}; },
                [&](const Restrict& n) -> Process::Node { return Restrict{n.name, sub(0)}; },
                [&](const Def& n) -> Process::Node {
                    Def out = n;
                    for (size_t i = 0; i < out.defs.size(); ++i) {
                        auto& df = out.defs[i];
                        df.body = sub(i);
                        const auto& sig = d.sigs.at(i);
                        for (size_t j = 0; j < df.session_params.size(); ++j)
                            df.session_params[j] = concat(
                                df.session_params[j],
                                conductor_channels(df.session_params[j], sig.sessions.at(j).participants, tag_));
                    }
                    out.body = sub(out.defs.size());
                    return out;
                },
                [&](const Call& n) -> Process::Node {
                    Call out = n;
                    const auto& sig = d.sigs.at(0);
                    for (size_t j = 0; j < out.session_args.size(); ++j)
                        out.session_args[j] = concat(
                            out.session_args[j], conductor_channels(out.session_args[j], sig.sessions.at(j).participants, tag_));
                    return out;
                },
                [&](const auto& n) -> Process::Node { return n; },
            },
            p->node);
        return make_proc(std::move(node), p->span);
    }

    std::set<std::string> chans_;
    std::set<std::string> defs_;

private:
    std::string io(const std::vector<std::string>& chans, int participant, const std::string& dir) const
    {
        const std::string base = chans.empty() ? "" : chans.front() + tag_;
        return dir + tag_ + base + std::to_string(participant);
    }

    std::string tag_;
    int conductors_ = 0;
};

// A separator for generated names that no identifier of the source starts with.
std::string fresh_tag(const std::string& text)
{
    static const std::regex ident("[A-Za-z_][A-Za-z0-9_]*");
    std::set<std::string> ids;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), ident); it != std::sregex_iterator(); ++it)
        ids.insert(it->str());
    std::string tag = "_";
    auto clash = [&](const std::string& t) {
        for (const std::string& pre : {"in" + t, "out" + t, "cond" + t})
            for (const auto& id : ids)
                if (id.compare(0, pre.size(), pre) == 0) return true;
        return false;
    };
    while (clash(tag)) tag += "_";
    return tag;
}

ErasedProgram finish(const Derivation& d, const std::vector<TypeDecl>& types, const std::vector<ChanDecl>& chans)
{
    ErasedProgram out;
    Eraser e(fresh_tag(render(d.process)));
    out.program.body = e.erase(d);
    out.conductor_chans = std::move(e.chans_);
    out.conductor_defs = std::move(e.defs_);
    out.translated_env = d.gamma ? translate_env(*d.gamma) : GlobalEnv{};
    for (const auto& t : types) {
        TypeDecl td = out.translated_env.types.count(t.name) ? out.translated_env.types.at(t.name) : t;
        td.span = t.span;
        out.program.types.push_back(td);
    }
    out.program.chans = chans;
    return out;
}

}  // namespace

ErasedProgram erase(const Derivation& d)
{
    std::vector<TypeDecl> types;
    std::vector<ChanDecl> chans;
    if (d.gamma) {
        for (const auto& [name, t] : d.gamma->types) types.push_back(t);
        for (const auto& [name, s] : d.gamma->shared) chans.push_back(ChanDecl{name, s.type_name, {}});
    }
    return finish(d, types, chans);
}

ErasedProgram erase(const Program& prog) { return finish(typecheck(prog), prog.types, prog.chans); }

std::string manifest_json(const ErasedProgram& e)
{
    nlohmann::json j;
    j["conductorChans"] = std::vector<std::string>(e.conductor_chans.begin(), e.conductor_chans.end());
    j["conductorDefs"] = std::vector<std::string>(e.conductor_defs.begin(), e.conductor_defs.end());
    return j.dump(2);
}

size_t conductor_case_count(const ProcPtr& conductor)
{
    using Paths = std::set<std::vector<size_t>>;
    std::function<Paths(const ProcPtr&)> walk = [&](const ProcPtr& p) -> Paths {
        return std::visit(overloaded{
                              [&](const Branch& b) {
                                  Paths out;
                                  for (size_t i = 0; i < b.branches.size(); ++i)
                                      for (auto path : walk(b.branches[i].body)) {
                                          path.insert(path.begin(), i);
                                          out.insert(std::move(path));
                                      }
                                  return out;
                              },
                              [&](const Rand& r) {
                                  Paths out;
                                  for (const auto& b : r.branches) {
                                      auto more = walk(b);
                                      out.insert(more.begin(), more.end());
                                  }
                                  return out;
                              },
                              [&](const Select& s) { return walk(s.cont); },
                              [&](const Accept& a) { return walk(a.body); },
                              [&](const Def& d) { return walk(d.body); },
                              [&](const auto&) { return Paths{std::vector<size_t>{}}; },
                          },
                          p->node);
    };
    return walk(conductor).size();
}

}  // namespace mpst
