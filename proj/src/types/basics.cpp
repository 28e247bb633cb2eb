#include "mpst/syntax.hpp"
#include "mpst/types.hpp"
#include "util.hpp"

#include <algorithm>

namespace mpst {

using detail::overloaded;

namespace {

void collect(const GlobalPtr& g, Dimensions& d, std::set<int>& ps)
{
    std::visit(overloaded{
                   [&](const GExchange& n) {
                       d.channels = std::max(d.channels, n.chan);
                       ps.insert(n.from);
                       ps.insert(n.to);
                       collect(n.cont, d, ps);
                   },
                   [&](const GBranch& n) {
                       d.channels = std::max(d.channels, n.chan);
                       ps.insert(n.from);
                       ps.insert(n.to);
                       for (const auto& b : n.branches) collect(b.body, d, ps);
                   },
                   [&](const GMu& n) { collect(n.body, d, ps); },
                   [&](const GVar&) {},
                   [&](const GEnd&) {},
                   [&](const GSum& n) {
                       for (const auto& b : n.branches) collect(b.body, d, ps);
                   },
               },
               g->node);
}

}  // namespace

Dimensions dimensions(const GlobalPtr& g)
{
    Dimensions d;
    std::set<int> ps;
    collect(g, d, ps);
    d.participants = ps.empty() ? 0 : *ps.rbegin();
    return d;
}

std::set<int> participants(const GlobalPtr& g)
{
    Dimensions d;
    std::set<int> ps;
    collect(g, d, ps);
    return ps;
}

LocalPtr substitute(const LocalPtr& t, const std::string& var, const LocalPtr& with)
{
    return std::visit(
        overloaded{
            [&](const LSend& n) { return make_local(LSend{n.chan, n.msg, substitute(n.cont, var, with)}, t->span); },
            [&](const LRecv& n) { return make_local(LRecv{n.chan, n.msg, substitute(n.cont, var, with)}, t->span); },
            [&](const LSelect& n) {
                LSelect out{n.chan, {}};
                for (const auto& b : n.branches) out.branches.push_back({b.label, substitute(b.body, var, with)});
                return make_local(std::move(out), t->span);
            },
            [&](const LBranch& n) {
                LBranch out{n.chan, {}};
                for (const auto& b : n.branches) out.branches.push_back({b.label, substitute(b.body, var, with)});
                return make_local(std::move(out), t->span);
            },
            [&](const LMu& n) {
                if (n.var == var) return t;
                return make_local(LMu{n.var, substitute(n.body, var, with)}, t->span);
            },
            [&](const LVar& n) { return n.name == var ? with : t; },
            [&](const LEnd&) { return t; },
            [&](const LSum& n) {
                LSum out;
                for (const auto& b : n.branches)
                    out.branches.push_back({b.label, b.mandatory, substitute(b.body, var, with)});
                return make_local(std::move(out), t->span);
            },
        },
        t->node);
}

GlobalPtr substitute(const GlobalPtr& g, const std::string& var, const GlobalPtr& with)
{
    return std::visit(
        overloaded{
            [&](const GExchange& n) {
                return make_global(GExchange{n.from, n.to, n.chan, n.msg, substitute(n.cont, var, with)}, g->span);
            },
            [&](const GBranch& n) {
                GBranch out{n.from, n.to, n.chan, {}};
                for (const auto& b : n.branches) out.branches.push_back({b.label, substitute(b.body, var, with)});
                return make_global(std::move(out), g->span);
            },
            [&](const GMu& n) {
                if (n.var == var) return g;
                return make_global(GMu{n.var, substitute(n.body, var, with)}, g->span);
            },
            [&](const GVar& n) { return n.name == var ? with : g; },
            [&](const GEnd&) { return g; },
            [&](const GSum& n) {
                GSum out;
                for (const auto& b : n.branches)
                    out.branches.push_back({b.label, b.mandatory, substitute(b.body, var, with)});
                return make_global(std::move(out), g->span);
            },
        },
        g->node);
}

LocalPtr unfold(const LocalPtr& t)
{
    LocalPtr cur = t;
    // guardedness bounds this loop by the number of nested binders
    while (const LMu* mu = as<LMu>(cur)) cur = substitute(mu->body, mu->var, cur);
    return cur;
}

GlobalPtr unfold(const GlobalPtr& g)
{
    GlobalPtr cur = g;
    while (const GMu* mu = as<GMu>(cur)) cur = substitute(mu->body, mu->var, cur);
    return cur;
}

bool is_end(const LocalPtr& t) { return std::holds_alternative<LEnd>(unfold(t)->node); }

std::string render(const SessionEntry& e)
{
    return "(" + detail::join(e.chans) + "): " + render(e.type) + "@(" + std::to_string(e.participant) + "," +
           std::to_string(e.participants) + ")";
}

std::string render(const SessionEnv& env)
{
    std::vector<std::string> parts;
    for (const auto& e : env) parts.push_back(render(e));
    return "{" + detail::join(parts, ", ") + "}";
}

Dimensions declared_dimensions(const TypeDecl& d)
{
    Dimensions own = dimensions(d.type);
    if (!d.dims) return own;
    return {std::max(own.channels, d.dims->first), std::max(own.participants, d.dims->second)};
}

GlobalEnv env_from_program(const Program& prog)
{
    GlobalEnv env;
    std::vector<Diagnostic> errs;
    for (const auto& d : prog.types) {
        if (!env.types.emplace(d.name, d).second) {
            errs.push_back({"E-DUP", "type '" + d.name + "' declared twice", d.span, {}});
            continue;
        }
        for (auto diag : coherence_errors(d.type)) {
            if (!diag.span.valid()) diag.span = d.span;
            diag.message = "type '" + d.name + "': " + diag.message;
            errs.push_back(std::move(diag));
        }
    }
    for (const auto& c : prog.chans) {
        auto it = env.types.find(c.type_name);
        if (it == env.types.end()) {
            errs.push_back({"E-UNBOUND", "unknown type '" + c.type_name + "'", c.span, {}});
            continue;
        }
        if (env.shared.count(c.name)) {
            errs.push_back({"E-DUP", "channel '" + c.name + "' declared twice", c.span, {}});
            continue;
        }
        env.shared[c.name] = SharedDecl{c.type_name, it->second.type, declared_dimensions(it->second)};
    }
    if (!errs.empty()) throw Error(std::move(errs));
    return env;
}

}  // namespace mpst
