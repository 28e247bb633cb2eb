#include "mpst/syntax.hpp"
#include "mpst/typecheck.hpp"
#include "util.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace mpst {

using detail::overloaded;

const char* rule_name(Rule r)
{
    switch (r) {
    case Rule::Mcast: return "Mcast";
    case Rule::Macc: return "Macc";
    case Rule::Sync: return "Sync";
    case Rule::Rand: return "Rand";
    case Rule::Send: return "Send";
    case Rule::Rcv: return "Rcv";
    case Rule::Sel: return "Sel";
    case Rule::Branch: return "Branch";
    case Rule::Conc: return "Conc";
    case Rule::If: return "If";
    case Rule::Deleg: return "Deleg";
    case Rule::SRec: return "SRec";
    case Rule::Def: return "Def";
    case Rule::Call: return "Call";
    case Rule::Inact: return "Inact";
    case Rule::Res: return "Res";
    case Rule::Succ: return "Succ";
    }
    return "?";
}

namespace {

using EnvPtr = std::shared_ptr<const GlobalEnv>;

struct Abort {};

struct Scope;
using ScopePtr = std::shared_ptr<Scope>;

struct DefInfo {
    Definition def;
    EnvPtr gamma;
    ScopePtr scope;
    std::optional<ProcSig> sig;
    std::optional<Derivation> body;
};

struct Scope {
    std::map<std::string, std::shared_ptr<DefInfo>> defs;
    ScopePtr parent;

    std::shared_ptr<DefInfo> find(const std::string& name) const
    {
        for (const Scope* s = this; s; s = s->parent.get()) {
            auto it = s->defs.find(name);
            if (it != s->defs.end()) return it->second;
        }
        return nullptr;
    }
};

std::string vec(const std::vector<std::string>& chans) { return "(" + detail::join(chans) + ")"; }

EnvPtr bind_value(const EnvPtr& g, const std::string& name, const SimpleType& sort)
{
    auto next = std::make_shared<GlobalEnv>(*g);
    next->values[name] = sort;
    next->shared.erase(name);
    if (sort.sort == BaseSort::Shared) {
        auto it = next->types.find(sort.name);
        if (it != next->types.end())
            next->shared[name] = SharedDecl{sort.name, it->second.type, declared_dimensions(it->second)};
    }
    return next;
}

class Checker {
public:
    std::vector<Diagnostic> errors;

    Derivation check(const EnvPtr& g, const ScopePtr& sc, const ProcPtr& p, const SessionEnv& delta)
    {
        Derivation d;
        d.gamma = g;
        d.process = p;
        d.delta = delta;
        std::visit(overloaded{
                       [&](const Inact&) { finish(d, Rule::Inact); },
                       [&](const Success&) { finish(d, Rule::Succ); },
                       [&](const Sync& n) { sync(d, sc, n); },
                       [&](const Rand& n) {
                           d.rule = Rule::Rand;
                           for (const auto& b : n.branches) premise(d, [&] { return check(g, sc, b, delta); });
                       },
                       [&](const Request& n) { open(d, sc, n.chan, 1, n.n, n.session_chans, n.body, Rule::Mcast); },
                       [&](const Accept& n) {
                           open(d, sc, n.chan, n.participant, 0, n.session_chans, n.body, Rule::Macc);
                       },
                       [&](const Send& n) { send(d, sc, n); },
                       [&](const Recv& n) { recv(d, sc, n); },
                       [&](const Delegate& n) { deleg(d, sc, n); },
                       [&](const DelegRecv& n) { srec(d, sc, n); },
                       [&](const Select& n) { select(d, sc, n); },
                       [&](const Branch& n) { branch(d, sc, n); },
                       [&](const If& n) {
                           d.rule = Rule::If;
                           SimpleType t = expr_type(*g, n.cond, Rule::If);
                           if (t.sort != BaseSort::Bool)
                               fail("E-TYPE", "condition has type " + render(t) + ", expected Bool", n.cond->span,
                                    Rule::If);
                           premise(d, [&] { return check(g, sc, n.then_branch, delta); });
                           premise(d, [&] { return check(g, sc, n.else_branch, delta); });
                       },
                       [&](const Par& n) { par(d, sc, n); },
                       [&](const Restrict& n) {
                           d.rule = Rule::Res;
                           if (!g->shared.count(n.name))
                               fail("E-UNBOUND", "restricted name '" + n.name + "' has no declared type", p->span,
                                    Rule::Res);
                           premise(d, [&] { return check(g, sc, n.body, delta); });
                       },
                       [&](const Def& n) { def(d, sc, n); },
                       [&](const Call& n) { call(d, sc, n); },
                       [&](const Queue&) {
                           fail("E-TYPE", "message queues cannot occur in source programs", p->span, Rule::Inact);
                       },
                   },
                   p->node);
        return d;
    }

    // Checks the definitions never reached from a call: only those without
    // session parameters have a known signature.
    void close_scope(const ScopePtr& sc, const SourceSpan& span)
    {
        for (auto& [name, info] : sc->defs) {
            if (info->sig) continue;
            if (!info->def.session_params.empty()) {
                report("E-DEF",
                       "definition '" + name + "' is never called, so the types of its session parameters are unknown",
                       info->def.body->span.valid() ? info->def.body->span : span, Rule::Def);
                continue;
            }
            ProcSig sig;
            bool ok = true;
            for (const auto& v : info->def.value_params) {
                if (!v.sort) {
                    report("E-DEF", "parameter '" + v.name + "' of uncalled definition '" + name + "' needs a sort",
                           span, Rule::Def);
                    ok = false;
                    continue;
                }
                sig.value_sorts.push_back(*v.sort);
            }
            if (ok) resolve(*info, sig, {});
        }
    }

private:
    [[noreturn]] void fail(const std::string& code, const std::string& msg, const SourceSpan& span, Rule r)
    {
        report(code, msg, span, r);
        throw Abort{};
    }

    void report(const std::string& code, const std::string& msg, const SourceSpan& span, Rule r)
    {
        errors.push_back({code, msg, span, std::string("rule ") + rule_name(r)});
    }

    template <class F>
    void premise(Derivation& d, F f)
    {
        try {
            d.premises.push_back(f());
        } catch (const Abort&) {
        }
    }

    void finish(Derivation& d, Rule r)
    {
        d.rule = r;
        for (const auto& e : d.delta)
            if (!is_end(e.type))
                report("E-INCOMPLETE", "session " + vec(e.chans) + " ends with remaining type " + render(e.type),
                       d.process->span, r);
    }

    SimpleType value_type(const GlobalEnv& g, const Value& v, const SourceSpan& span, Rule r)
    {
        switch (v.index()) {
        case 0: return {BaseSort::Bool, ""};
        case 1: return {BaseSort::Int, ""};
        case 2: return {BaseSort::String, ""};
        default: {
            const auto& name = std::get<NameValue>(v).name;
            auto it = g.shared.find(name);
            if (it == g.shared.end()) fail("E-UNBOUND", "unbound shared name '" + name + "'", span, r);
            return {BaseSort::Shared, it->second.type_name};
        }
        }
    }

    SimpleType expr_type(const GlobalEnv& g, const ExprPtr& e, Rule r)
    {
        const SimpleType int_t{BaseSort::Int, ""}, bool_t{BaseSort::Bool, ""};
        auto expect = [&](const ExprPtr& x, const SimpleType& want) {
            SimpleType t = expr_type(g, x, r);
            if (!(t == want))
                fail("E-TYPE", "expression " + render(x) + " has type " + render(t) + ", expected " + render(want),
                     x->span, r);
        };
        return std::visit(
            overloaded{
                [&](const Lit& n) { return value_type(g, n.value, e->span, r); },
                [&](const VarRef& n) -> SimpleType {
                    if (auto it = g.values.find(n.name); it != g.values.end()) return it->second;
                    if (auto it = g.shared.find(n.name); it != g.shared.end())
                        return {BaseSort::Shared, it->second.type_name};
                    fail("E-UNBOUND", "unbound variable '" + n.name + "'", e->span, r);
                },
                [&](const Unary& n) {
                    expect(n.operand, bool_t);
                    return bool_t;
                },
                [&](const Binary& n) -> SimpleType {
                    switch (n.op) {
                    case BinaryOp::And:
                    case BinaryOp::Or:
                        expect(n.lhs, bool_t);
                        expect(n.rhs, bool_t);
                        return bool_t;
                    case BinaryOp::Add:
                    case BinaryOp::Sub:
                        expect(n.lhs, int_t);
                        expect(n.rhs, int_t);
                        return int_t;
                    case BinaryOp::Lt:
                    case BinaryOp::Le:
                        expect(n.lhs, int_t);
                        expect(n.rhs, int_t);
                        return bool_t;
                    case BinaryOp::Eq:
                        expect(n.rhs, expr_type(g, n.lhs, r));
                        return bool_t;
                    }
                    return bool_t;
                },
                [&](const RandExpr& n) {
                    SimpleType t = value_type(g, n.values.front(), e->span, r);
                    for (const auto& v : n.values)
                        if (!(value_type(g, v, e->span, r) == t))
                            fail("E-TYPE", "values of " + render(e) + " differ in type", e->span, r);
                    return t;
                },
            },
            e->node);
    }

    // Entry of Δ holding channel `s`, and s's 1-based index in its vector.
    std::pair<size_t, int> locate(const Derivation& d, const std::string& s, Rule r)
    {
        for (size_t i = 0; i < d.delta.size(); ++i) {
            const auto& cs = d.delta[i].chans;
            auto it = std::find(cs.begin(), cs.end(), s);
            if (it != cs.end()) return {i, static_cast<int>(it - cs.begin()) + 1};
        }
        if (d.gamma->values.count(s) || d.gamma->shared.count(s))
            fail("E-CHAN", "'" + s + "' is not a session channel", d.process->span, r);
        fail("E-UNBOUND", "unbound session channel '" + s + "'", d.process->span, r);
    }

    size_t locate_vector(const Derivation& d, const std::vector<std::string>& chans, Rule r)
    {
        for (size_t i = 0; i < d.delta.size(); ++i)
            if (d.delta[i].chans == chans) return i;
        auto [i, k] = locate(d, chans.front(), r);
        (void)k;
        fail("E-ARITY", "channels " + vec(chans) + " do not name the session " + vec(d.delta[i].chans),
             d.process->span, r);
    }

    // The entry's type, unfolded, must have head H on channel k.
    template <class H>
    const H& expect_head(Derivation& d, size_t entry, int k, const char* what, Rule r)
    {
        d.rule = r;
        d.participant = d.delta[entry].participant;
        d.chans = d.delta[entry].chans;
        d.session_type = d.delta[entry].type;
        LocalPtr head = unfold(d.delta[entry].type);
        head_ = head;
        const H* h = as<H>(head);
        if (!h)
            fail("E-CHAN", std::string("expected ") + what + " on channel " + std::to_string(k) + " of " + vec(d.chans) +
                               ", but the session type is " + render(d.delta[entry].type),
                 d.process->span, r);
        if (h->chan != k)
            fail("E-CHAN", std::string(what) + " on channel " + std::to_string(k) + " of " + vec(d.chans) +
                               ", but the session type expects channel " + std::to_string(h->chan) + ": " +
                               render(d.delta[entry].type),
                 d.process->span, r);
        return *h;
    }

    SessionEnv with_type(const SessionEnv& delta, size_t entry, const LocalPtr& t)
    {
        SessionEnv next = delta;
        next[entry].type = t;
        return next;
    }

    void fresh_vector(const Derivation& d, const std::vector<std::string>& chans, Rule r)
    {
        std::set<std::string> seen;
        for (const auto& c : chans) {
            if (!seen.insert(c).second)
                fail("E-CHAN", "channel name '" + c + "' repeated in " + vec(chans), d.process->span, r);
            for (const auto& e : d.delta)
                if (std::count(e.chans.begin(), e.chans.end(), c))
                    fail("E-CHAN", "channel name '" + c + "' already names session " + vec(e.chans), d.process->span,
                         r);
        }
    }

    LocalPtr projection(const GlobalPtr& g, int p, const SourceSpan& span, Rule r)
    {
        auto key = std::make_pair(g.get(), p);
        auto it = proj_cache_.find(key);
        if (it != proj_cache_.end()) return it->second;
        try {
            return proj_cache_[key] = project(g, p);
        } catch (const Error& e) {
            for (const auto& diag : e.diagnostics()) report(diag.code, diag.message, span, r);
            throw Abort{};
        }
    }

    void open(Derivation& d, const ScopePtr& sc, const std::string& a, int p, int n,
              const std::vector<std::string>& chans, const ProcPtr& body, Rule r)
    {
        d.rule = r;
        auto it = d.gamma->shared.find(a);
        if (it == d.gamma->shared.end()) fail("E-UNBOUND", "unbound shared name '" + a + "'", d.process->span, r);
        const SharedDecl& sd = it->second;
        if (static_cast<int>(chans.size()) != sd.dims.channels)
            fail("E-ARITY",
                 "session on '" + a + "' names " + std::to_string(chans.size()) + " channels, but " + sd.type_name +
                     " uses " + std::to_string(sd.dims.channels),
                 d.process->span, r);
        if (r == Rule::Mcast && n != sd.dims.participants)
            fail("E-ARITY",
                 "request on '" + a + "' is for " + std::to_string(n) + " participants, but " + sd.type_name +
                     " has " + std::to_string(sd.dims.participants),
                 d.process->span, r);
        if (r == Rule::Macc && (p < 2 || p > sd.dims.participants))
            fail("E-ARITY",
                 "accept on '" + a + "' as participant " + std::to_string(p) + ", but " + sd.type_name + " has " +
                     std::to_string(sd.dims.participants) + " participants",
                 d.process->span, r);
        fresh_vector(d, chans, r);
        d.shared = a;
        d.global = sd.type;
        d.dims = sd.dims;
        d.participant = p;
        d.chans = chans;
        d.session_type = projection(sd.type, p, d.process->span, r);
        SessionEnv next = d.delta;
        next.push_back({chans, d.session_type, p, sd.dims.participants});
        premise(d, [&] { return check(d.gamma, sc, body, next); });
    }

    void sync(Derivation& d, const ScopePtr& sc, const Sync& n)
    {
        d.rule = Rule::Sync;
        size_t entry = locate_vector(d, n.chans, Rule::Sync);
        const SessionEntry& e = d.delta[entry];
        if (n.n != e.participants)
            fail("E-ARITY",
                 "sync on " + vec(n.chans) + " for " + std::to_string(n.n) + " participants, but the session has " +
                     std::to_string(e.participants),
                 d.process->span, Rule::Sync);
        d.participant = e.participant;
        d.chans = e.chans;
        d.session_type = e.type;
        LocalPtr head = unfold(e.type);
        const LSum* sum = as<LSum>(head);
        if (!sum)
            fail("E-CHAN", "sync on " + vec(n.chans) + ", but the session type is " + render(e.type), d.process->span,
                 Rule::Sync);
        auto find = [&](const std::string& l) -> const LSumBranch* {
            for (const auto& b : sum->branches)
                if (b.label == l) return &b;
            return nullptr;
        };
        for (const auto& b : sum->branches) {
            bool offered = std::any_of(n.branches.begin(), n.branches.end(),
                                       [&](const SyncBranch& sb) { return sb.label == b.label; });
            if (b.mandatory && !offered)
                report("E-SYNC-MAND", "mandatory label '" + b.label + "' not offered", d.process->span, Rule::Sync);
        }
        for (const auto& sb : n.branches) {
            d.labels.push_back(sb.label);
            const LSumBranch* tb = find(sb.label);
            if (!tb) {
                report("E-SYNC-EXTRA", "label '" + sb.label + "' is not among the labels of " + render(e.type),
                       sb.body->span, Rule::Sync);
                continue;
            }
            EnvPtr g = d.gamma;
            for (const auto& a : sb.args) {
                if (!a.sort) fail("E-TYPE", "argument '" + a.name + "' needs a sort", sb.body->span, Rule::Sync);
                g = bind_value(g, a.name, *a.sort);
            }
            premise(d, [&] { return check(g, sc, sb.body, with_type(d.delta, entry, tb->body)); });
        }
    }

    void send(Derivation& d, const ScopePtr& sc, const Send& n)
    {
        auto [entry, k] = locate(d, n.chan, Rule::Send);
        const LSend& t = expect_head<LSend>(d, entry, k, "send", Rule::Send);
        if (t.msg.is_session())
            fail("E-CHAN", "channel " + std::to_string(k) + " expects a delegated session, not values", d.process->span,
                 Rule::Send);
        const auto& sorts = t.msg.sorts();
        if (sorts.size() != n.exprs.size())
            fail("E-TYPE",
                 "send of " + std::to_string(n.exprs.size()) + " values where the type expects " + render(t.msg),
                 d.process->span, Rule::Send);
        for (size_t i = 0; i < sorts.size(); ++i) {
            SimpleType s = expr_type(*d.gamma, n.exprs[i], Rule::Send);
            if (!(s == sorts[i]))
                fail("E-TYPE",
                     "sent expression " + render(n.exprs[i]) + " has type " + render(s) + ", expected " +
                         render(sorts[i]),
                     n.exprs[i]->span, Rule::Send);
        }
        LocalPtr cont = t.cont;
        premise(d, [&] { return check(d.gamma, sc, n.cont, with_type(d.delta, entry, cont)); });
    }

    void recv(Derivation& d, const ScopePtr& sc, const Recv& n)
    {
        auto [entry, k] = locate(d, n.chan, Rule::Rcv);
        const LRecv& t = expect_head<LRecv>(d, entry, k, "receive", Rule::Rcv);
        if (t.msg.is_session())
            fail("E-CHAN", "channel " + std::to_string(k) + " carries a delegated session, not values",
                 d.process->span, Rule::Rcv);
        const auto& sorts = t.msg.sorts();
        if (sorts.size() != n.vars.size())
            fail("E-TYPE",
                 "receive into " + std::to_string(n.vars.size()) + " variables where the type expects " +
                     render(t.msg),
                 d.process->span, Rule::Rcv);
        EnvPtr g = d.gamma;
        for (size_t i = 0; i < sorts.size(); ++i) {
            if (n.vars[i].sort && !(*n.vars[i].sort == sorts[i]))
                fail("E-TYPE",
                     "variable '" + n.vars[i].name + "' declared " + render(*n.vars[i].sort) + ", received " +
                         render(sorts[i]),
                     d.process->span, Rule::Rcv);
            g = bind_value(g, n.vars[i].name, sorts[i]);
        }
        LocalPtr cont = t.cont;
        premise(d, [&] { return check(g, sc, n.cont, with_type(d.delta, entry, cont)); });
    }

    void deleg(Derivation& d, const ScopePtr& sc, const Delegate& n)
    {
        auto [entry, k] = locate(d, n.chan, Rule::Deleg);
        const LSend& t = expect_head<LSend>(d, entry, k, "delegation", Rule::Deleg);
        if (!t.msg.is_session())
            fail("E-CHAN", "channel " + std::to_string(k) + " expects values, not a session", d.process->span,
                 Rule::Deleg);
        const SessionAt& at = t.msg.session();
        size_t del = locate_vector(d, n.chans, Rule::Deleg);
        if (del == entry) fail("E-CHAN", "a session cannot be delegated over itself", d.process->span, Rule::Deleg);
        const SessionEntry& de = d.delta[del];
        if (static_cast<int>(n.chans.size()) != at.channels || de.participant != at.participant ||
            de.participants != at.participants || !type_equal(de.type, at.type))
            fail("E-CHAN", "delegated session " + render(de) + " does not match " + render(t.msg), d.process->span,
                 Rule::Deleg);
        SessionEnv next = with_type(d.delta, entry, t.cont);
        next.erase(next.begin() + static_cast<long>(del));
        premise(d, [&] { return check(d.gamma, sc, n.cont, next); });
    }

    void srec(Derivation& d, const ScopePtr& sc, const DelegRecv& n)
    {
        auto [entry, k] = locate(d, n.chan, Rule::SRec);
        const LRecv& t = expect_head<LRecv>(d, entry, k, "session receive", Rule::SRec);
        if (!t.msg.is_session())
            fail("E-CHAN", "channel " + std::to_string(k) + " carries values, not a session", d.process->span,
                 Rule::SRec);
        const SessionAt& at = t.msg.session();
        if (static_cast<int>(n.chans.size()) != at.channels)
            fail("E-ARITY",
                 "received session binds " + std::to_string(n.chans.size()) + " channels, expected " +
                     std::to_string(at.channels),
                 d.process->span, Rule::SRec);
        fresh_vector(d, n.chans, Rule::SRec);
        SessionEnv next = with_type(d.delta, entry, t.cont);
        next.push_back({n.chans, at.type, at.participant, at.participants});
        premise(d, [&] { return check(d.gamma, sc, n.cont, next); });
    }

    void select(Derivation& d, const ScopePtr& sc, const Select& n)
    {
        auto [entry, k] = locate(d, n.chan, Rule::Sel);
        const LSelect& t = expect_head<LSelect>(d, entry, k, "selection", Rule::Sel);
        auto it = std::find_if(t.branches.begin(), t.branches.end(),
                               [&](const LLabeled& b) { return b.label == n.label; });
        if (it == t.branches.end())
            fail("E-CHAN", "label '" + n.label + "' is not offered by " + render(head_), d.process->span, Rule::Sel);
        d.labels = {n.label};
        LocalPtr cont = it->body;
        premise(d, [&] { return check(d.gamma, sc, n.cont, with_type(d.delta, entry, cont)); });
    }

    void branch(Derivation& d, const ScopePtr& sc, const Branch& n)
    {
        auto [entry, k] = locate(d, n.chan, Rule::Branch);
        const LBranch& t = expect_head<LBranch>(d, entry, k, "branching", Rule::Branch);
        LocalPtr head = head_;
        for (const auto& tb : t.branches)
            if (std::none_of(n.branches.begin(), n.branches.end(),
                             [&](const Labeled& b) { return b.label == tb.label; }))
                report("E-CHAN", "branching misses label '" + tb.label + "' of " + render(head), d.process->span,
                       Rule::Branch);
        for (const auto& b : n.branches) {
            auto it = std::find_if(t.branches.begin(), t.branches.end(),
                                   [&](const LLabeled& tb) { return tb.label == b.label; });
            if (it == t.branches.end()) {
                report("E-CHAN", "label '" + b.label + "' is not offered by " + render(head), b.body->span,
                       Rule::Branch);
                continue;
            }
            d.labels.push_back(b.label);
            LocalPtr cont = it->body;
            premise(d, [&] { return check(d.gamma, sc, b.body, with_type(d.delta, entry, cont)); });
        }
    }

    void par(Derivation& d, const ScopePtr& sc, const Par& n)
    {
        d.rule = Rule::Conc;
        auto fl = free_names(n.left), fr = free_names(n.right);
        SessionEnv left, right;
        for (const auto& e : d.delta) {
            bool l = false, r = false;
            for (const auto& c : e.chans) {
                l = l || fl.count(c);
                r = r || fr.count(c);
            }
            if (l && r)
                fail("E-SPLIT", "session " + vec(e.chans) + " is used on both sides of a parallel composition",
                     d.process->span, Rule::Conc);
            (r ? right : left).push_back(e);
        }
        premise(d, [&] { return check(d.gamma, sc, n.left, left); });
        premise(d, [&] { return check(d.gamma, sc, n.right, right); });
    }

    void def(Derivation& d, const ScopePtr& sc, const Def& n)
    {
        d.rule = Rule::Def;
        auto scope = std::make_shared<Scope>();
        scope->parent = sc;
        for (const auto& df : n.defs) {
            if (scope->defs.count(df.name))
                fail("E-DEF", "process '" + df.name + "' defined twice", d.process->span, Rule::Def);
            auto info = std::make_shared<DefInfo>();
            info->def = df;
            info->gamma = d.gamma;
            info->scope = scope;
            scope->defs[df.name] = info;
        }
        std::optional<Derivation> body;
        try {
            body = check(d.gamma, scope, n.body, d.delta);
        } catch (const Abort&) {
        }
        close_scope(scope, d.process->span);
        for (const auto& df : n.defs) {
            const auto& info = scope->defs[df.name];
            if (info->body) d.premises.push_back(*info->body);
            d.sigs.push_back(info->sig.value_or(ProcSig{}));
        }
        if (body) d.premises.push_back(std::move(*body));
    }

    void resolve(DefInfo& info, const ProcSig& sig, const SourceSpan& span)
    {
        info.sig = sig;
        const Definition& df = info.def;
        auto g = std::make_shared<GlobalEnv>(*info.gamma);
        g->procs[df.name] = sig;
        EnvPtr env = g;
        for (size_t i = 0; i < df.value_params.size(); ++i)
            env = bind_value(env, df.value_params[i].name, sig.value_sorts[i]);
        SessionEnv delta;
        for (size_t i = 0; i < df.session_params.size(); ++i) {
            const SessionParam& sp = sig.sessions[i];
            if (static_cast<int>(df.session_params[i].size()) != sp.channels) {
                report("E-ARITY",
                       "parameter " + vec(df.session_params[i]) + " of '" + df.name + "' has " +
                           std::to_string(df.session_params[i].size()) + " channels, the argument " +
                           std::to_string(sp.channels),
                       span, Rule::Call);
                return;
            }
            delta.push_back({df.session_params[i], sp.type, sp.participant, sp.participants});
        }
        try {
            info.body = check(env, info.scope, df.body, delta);
        } catch (const Abort&) {
        }
    }

    void call(Derivation& d, const ScopePtr& sc, const Call& n)
    {
        d.rule = Rule::Call;
        auto info = sc ? sc->find(n.name) : nullptr;
        if (!info) fail("E-UNBOUND", "unknown process '" + n.name + "'", d.process->span, Rule::Call);
        const Definition& df = info->def;
        if (n.args.size() != df.value_params.size() || n.session_args.size() != df.session_params.size())
            fail("E-DEF",
                 "'" + n.name + "' takes " + std::to_string(df.value_params.size()) + " values and " +
                     std::to_string(df.session_params.size()) + " sessions",
                 d.process->span, Rule::Call);
        std::vector<SimpleType> arg_sorts;
        for (const auto& a : n.args) arg_sorts.push_back(expr_type(*d.gamma, a, Rule::Call));
        std::vector<size_t> used;
        for (const auto& sa : n.session_args) {
            size_t i = locate_vector(d, sa, Rule::Call);
            if (std::count(used.begin(), used.end(), i))
                fail("E-SPLIT", "session " + vec(sa) + " passed twice", d.process->span, Rule::Call);
            used.push_back(i);
        }
        if (!info->sig) {
            ProcSig sig;
            for (size_t i = 0; i < df.value_params.size(); ++i)
                sig.value_sorts.push_back(df.value_params[i].sort.value_or(arg_sorts[i]));
            for (size_t i : used) {
                const auto& e = d.delta[i];
                sig.sessions.push_back({e.type, e.participant, e.participants, static_cast<int>(e.chans.size())});
            }
            resolve(*info, sig, d.process->span);
        }
        const ProcSig& sig = *info->sig;
        for (size_t i = 0; i < arg_sorts.size(); ++i)
            if (!(arg_sorts[i] == sig.value_sorts[i]))
                fail("E-TYPE",
                     "argument " + render(n.args[i]) + " has type " + render(arg_sorts[i]) + ", '" + n.name +
                         "' expects " + render(sig.value_sorts[i]),
                     n.args[i]->span, Rule::Call);
        for (size_t j = 0; j < used.size(); ++j) {
            const auto& e = d.delta[used[j]];
            const SessionParam& sp = sig.sessions[j];
            if (e.participant != sp.participant || e.participants != sp.participants ||
                static_cast<int>(e.chans.size()) != sp.channels || !type_equal(e.type, sp.type))
                fail("E-CHAN",
                     "session " + render(e) + " does not match parameter type " + render(sp.type) + " of '" + n.name +
                         "'",
                     d.process->span, Rule::Call);
        }
        for (size_t i = 0; i < d.delta.size(); ++i)
            if (!std::count(used.begin(), used.end(), i) && !is_end(d.delta[i].type))
                report("E-INCOMPLETE",
                       "session " + vec(d.delta[i].chans) + " is not passed to '" + n.name +
                           "' and has remaining type " + render(d.delta[i].type),
                       d.process->span, Rule::Call);
        d.sigs = {sig};
        auto g = std::make_shared<GlobalEnv>(*d.gamma);
        g->procs[n.name] = sig;
        d.gamma = g;
    }

    LocalPtr head_;
    std::map<std::pair<const GlobalType*, int>, LocalPtr> proj_cache_;
};

}  // namespace

Derivation typecheck(const GlobalEnv& gamma, const ProcPtr& p)
{
    Checker c;
    std::optional<Derivation> d;
    try {
        d = c.check(std::make_shared<const GlobalEnv>(gamma), nullptr, p, {});
    } catch (const Abort&) {
    }
    if (!c.errors.empty()) throw Error(std::move(c.errors));
    return std::move(*d);
}

Derivation typecheck(const Program& prog) { return typecheck(env_from_program(prog), prog.body); }

void check_role(const GlobalPtr& g, int role, const ProcPtr& p, const GlobalEnv& gamma)
{
    int declared = 0;
    std::string chan;
    if (const auto* r = as<Request>(p)) {
        declared = 1;
        chan = r->chan;
    } else if (const auto* a = as<Accept>(p)) {
        declared = a->participant;
        chan = a->chan;
    } else {
        throw Error("E-ROLE", "expected a single request or accept", p->span);
    }
    if (declared != role)
        throw Error("E-ROLE",
                    "process acts as participant " + std::to_string(declared) + ", not " + std::to_string(role),
                    p->span);
    check_coherent(g);
    GlobalEnv env = gamma;
    env.types["G"] = TypeDecl{"G", g, std::nullopt, {}};
    env.shared[chan] = SharedDecl{"G", g, dimensions(g)};
    typecheck(env, p);
}

}  // namespace mpst
