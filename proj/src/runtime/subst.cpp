#include "internal.hpp"
#include "mpst/syntax.hpp"
#include "util.hpp"

#include <algorithm>

namespace mpst::detail {

namespace {

Subst without(const Subst& s, const std::vector<std::string>& names)
{
    Subst out = s;
    for (const auto& n : names) out.erase(n);
    return out;
}

std::string rename(const std::string& name, const Subst& s)
{
    auto it = s.find(name);
    if (it != s.end())
        if (const auto* nv = std::get_if<NameValue>(&it->second)) return nv->name;
    return name;
}

std::vector<std::string> rename(const std::vector<std::string>& names, const Subst& s)
{
    std::vector<std::string> out;
    for (const auto& n : names) out.push_back(rename(n, s));
    return out;
}

ExprPtr subst_expr(const ExprPtr& e, const Subst& s)
{
    return std::visit(overloaded{
                          [&](const VarRef& n) {
                              auto it = s.find(n.name);
                              return it == s.end() ? e : make_expr(Lit{it->second}, e->span);
                          },
                          [&](const Unary& n) { return make_expr(Unary{n.op, subst_expr(n.operand, s)}, e->span); },
                          [&](const Binary& n) {
                              return make_expr(Binary{n.op, subst_expr(n.lhs, s), subst_expr(n.rhs, s)}, e->span);
                          },
                          [&](const auto&) { return e; },
                      },
                      e->node);
}

std::vector<ExprPtr> subst_exprs(const std::vector<ExprPtr>& es, const Subst& s)
{
    std::vector<ExprPtr> out;
    for (const auto& e : es) out.push_back(subst_expr(e, s));
    return out;
}

std::vector<std::string> param_names(const std::vector<Param>& ps)
{
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.name);
    return out;
}

}  // namespace

ProcPtr subst(const ProcPtr& p, const Subst& s)
{
    if (s.empty()) return p;
    Process::Node node = std::visit(
        overloaded{
            [&](const Sync& n) -> Process::Node {
                Sync out = n;
                out.chans = rename(n.chans, s);
                for (auto& b : out.branches) b.body = subst(b.body, without(s, param_names(b.args)));
                return out;
            },
            [&](const Rand& n) -> Process::Node {
                Rand out = n;
                for (auto& b : out.branches) b = subst(b, s);
                return out;
            },
            [&](const Request& n) -> Process::Node {
                return Request{rename(n.chan, s), n.n, n.session_chans, subst(n.body, without(s, n.session_chans))};
            },
            [&](const Accept& n) -> Process::Node {
                return Accept{rename(n.chan, s), n.participant, n.session_chans,
                              subst(n.body, without(s, n.session_chans))};
            },
            [&](const Send& n) -> Process::Node {
                return Send{rename(n.chan, s), subst_exprs(n.exprs, s), subst(n.cont, s)};
            },
            [&](const Recv& n) -> Process::Node {
                return Recv{rename(n.chan, s), n.vars, subst(n.cont, without(s, param_names(n.vars)))};
            },
            [&](const Delegate& n) -> Process::Node {
                return Delegate{rename(n.chan, s), rename(n.chans, s), subst(n.cont, s)};
            },
            [&](const DelegRecv& n) -> Process::Node {
                return DelegRecv{rename(n.chan, s), n.chans, subst(n.cont, without(s, n.chans))};
            },
            [&](const Select& n) -> Process::Node { return Select{rename(n.chan, s), n.label, subst(n.cont, s)}; },
            [&](const Branch& n) -> Process::Node {
                Branch out{rename(n.chan, s), n.branches};
                for (auto& b : out.branches) b.body = subst(b.body, s);
                return out;
            },
            [&](const If& n) -> Process::Node {
                return If{subst_expr(n.cond, s), subst(n.then_branch, s), subst(n.else_branch, s)};
            },
            [&](const Par& n) -> Process::Node { return Par{subst(n.left, s), subst(n.right, s)}; },
            [&](const Restrict& n) -> Process::Node { return Restrict{n.name, subst(n.body, without(s, {n.name}))}; },
            [&](const Def& n) -> Process::Node {
                Def out = n;
                for (auto& d : out.defs) {
                    auto bound = param_names(d.value_params);
                    for (const auto& v : d.session_params) bound.insert(bound.end(), v.begin(), v.end());
                    d.body = subst(d.body, without(s, bound));
                }
                out.body = subst(n.body, s);
                return out;
            },
            [&](const Call& n) -> Process::Node {
                Call out{n.name, subst_exprs(n.args, s), {}};
                for (const auto& v : n.session_args) out.session_args.push_back(rename(v, s));
                return out;
            },
            [&](const Queue& n) -> Process::Node { return Queue{rename(n.chan, s), n.messages}; },
            [&](const auto& n) -> Process::Node { return n; },
        },
        p->node);
    return make_proc(std::move(node), p->span);
}

std::vector<Value> eval_all(const ExprPtr& e)
{
    auto add = [](std::vector<Value>& out, Value v) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
    };
    auto fail = [&](const std::string& msg) -> std::vector<Value> { throw Error("E-EVAL", msg, e->span); };
    return std::visit(
        overloaded{
            [&](const Lit& n) { return std::vector<Value>{n.value}; },
            [&](const VarRef& n) { return fail("unbound variable '" + n.name + "'"); },
            [&](const RandExpr& n) {
                std::vector<Value> out;
                for (const auto& v : n.values) add(out, v);
                return out;
            },
            [&](const Unary& n) {
                std::vector<Value> out;
                for (const auto& v : eval_all(n.operand)) {
                    const bool* b = std::get_if<bool>(&v);
                    if (!b) return fail("'not' applied to " + render(v));
                    add(out, bool_value(!*b));
                }
                return out;
            },
            [&](const Binary& n) {
                std::vector<Value> out;
                auto ls = eval_all(n.lhs), rs = eval_all(n.rhs);
                for (const auto& l : ls) {
                    for (const auto& r : rs) {
                        if (n.op == BinaryOp::Eq) {
                            add(out, bool_value(l == r));
                            continue;
                        }
                        if (n.op == BinaryOp::And || n.op == BinaryOp::Or) {
                            const bool* a = std::get_if<bool>(&l);
                            const bool* b = std::get_if<bool>(&r);
                            if (!a || !b) return fail("boolean operator on " + render(l) + " and " + render(r));
                            add(out, bool_value(n.op == BinaryOp::And ? (*a && *b) : (*a || *b)));
                            continue;
                        }
                        const auto* a = std::get_if<std::int64_t>(&l);
                        const auto* b = std::get_if<std::int64_t>(&r);
                        if (!a || !b) return fail("integer operator on " + render(l) + " and " + render(r));
                        switch (n.op) {
                        case BinaryOp::Add: add(out, int_value(*a + *b)); break;
                        case BinaryOp::Sub: add(out, int_value(*a - *b)); break;
                        case BinaryOp::Lt: add(out, bool_value(*a < *b)); break;
                        default: add(out, bool_value(*a <= *b)); break;
                        }
                    }
                }
                return out;
            },
        },
        e->node);
}

void spawn(Config& c, std::vector<Thread>& out, Thread t)
{
    const ProcPtr p = t.proc;
    if (as<Inact>(p)) return;
    if (as<Success>(p)) {
        c.success = true;
        out.push_back(std::move(t));
        return;
    }
    if (const auto* n = as<Par>(p)) {
        Thread r = t;
        t.proc = n->left;
        r.proc = n->right;
        spawn(c, out, std::move(t));
        spawn(c, out, std::move(r));
        return;
    }
    if (const auto* n = as<Restrict>(p)) {
        std::string fresh = n->name + "#v" + std::to_string(c.next_name++);
        t.proc = subst(n->body, {{n->name, name_value(fresh)}});
        spawn(c, out, std::move(t));
        return;
    }
    if (const auto* n = as<Def>(p)) {
        auto frame = std::make_shared<DefFrame>();
        frame->defs = n->defs;
        frame->parent = t.frame;
        frame->key = (t.frame ? t.frame->key : "") + "{" + render(make_proc(Def{n->defs, inact()})) + "}";
        t.frame = frame;
        t.proc = n->body;
        spawn(c, out, std::move(t));
        return;
    }
    out.push_back(std::move(t));
}

int role_of(const Config& c, const Thread& t, const std::string& chan)
{
    auto it = c.chan_session.find(chan);
    if (it == c.chan_session.end()) return 0;
    auto r = t.roles.find(it->second);
    return r == t.roles.end() ? 0 : r->second;
}

}  // namespace mpst::detail
