#include "mpst/syntax.hpp"
#include "mpst/types.hpp"
#include "util.hpp"

#include <algorithm>
#include <optional>

namespace mpst {

using detail::overloaded;

namespace {

bool free_in(const LocalPtr& t, const std::string& var)
{
    return std::visit(overloaded{
                          [&](const LSend& n) { return free_in(n.cont, var); },
                          [&](const LRecv& n) { return free_in(n.cont, var); },
                          [&](const LSelect& n) {
                              return std::any_of(n.branches.begin(), n.branches.end(),
                                                 [&](const LLabeled& b) { return free_in(b.body, var); });
                          },
                          [&](const LBranch& n) {
                              return std::any_of(n.branches.begin(), n.branches.end(),
                                                 [&](const LLabeled& b) { return free_in(b.body, var); });
                          },
                          [&](const LMu& n) { return n.var != var && free_in(n.body, var); },
                          [&](const LVar& n) { return n.name == var; },
                          [&](const LEnd&) { return false; },
                          [&](const LSum& n) {
                              return std::any_of(n.branches.begin(), n.branches.end(),
                                                 [&](const LSumBranch& b) { return free_in(b.body, var); });
                          },
                      },
                      t->node);
}

std::optional<std::vector<LLabeled>> merge_same_labels(const std::vector<LLabeled>& a, const std::vector<LLabeled>& b);

// Merge of the projections of two branches for a participant that does not
// take part in the choice. Identical behaviour merges trivially; two
// branchings on the same channel merge into the union of their labels.
std::optional<LocalPtr> merge(const LocalPtr& a, const LocalPtr& b)
{
    if (a == b || type_equal(a, b)) return a;
    const auto& na = a->node;
    const auto& nb = b->node;
    if (na.index() != nb.index()) return std::nullopt;

    if (const auto* x = std::get_if<LBranch>(&na)) {
        const auto& y = std::get<LBranch>(nb);
        if (x->chan != y.chan) return std::nullopt;
        LBranch out{x->chan, x->branches};
        for (const auto& yb : y.branches) {
            auto it = std::find_if(out.branches.begin(), out.branches.end(),
                                   [&](const LLabeled& l) { return l.label == yb.label; });
            if (it == out.branches.end()) {
                out.branches.push_back(yb);
                continue;
            }
            auto m = merge(it->body, yb.body);
            if (!m) return std::nullopt;
            it->body = *m;
        }
        return make_local(std::move(out));
    }
    if (const auto* x = std::get_if<LSelect>(&na)) {
        const auto& y = std::get<LSelect>(nb);
        if (x->chan != y.chan) return std::nullopt;
        auto bs = merge_same_labels(x->branches, y.branches);
        if (!bs) return std::nullopt;
        return make_local(LSelect{x->chan, std::move(*bs)});
    }
    if (const auto* x = std::get_if<LSend>(&na)) {
        const auto& y = std::get<LSend>(nb);
        if (x->chan != y.chan || !type_equal(x->msg, y.msg)) return std::nullopt;
        auto k = merge(x->cont, y.cont);
        if (!k) return std::nullopt;
        return make_local(LSend{x->chan, x->msg, *k});
    }
    if (const auto* x = std::get_if<LRecv>(&na)) {
        const auto& y = std::get<LRecv>(nb);
        if (x->chan != y.chan || !type_equal(x->msg, y.msg)) return std::nullopt;
        auto k = merge(x->cont, y.cont);
        if (!k) return std::nullopt;
        return make_local(LRecv{x->chan, x->msg, *k});
    }
    if (const auto* x = std::get_if<LSum>(&na)) {
        const auto& y = std::get<LSum>(nb);
        if (x->branches.size() != y.branches.size()) return std::nullopt;
        LSum out;
        for (const auto& xb : x->branches) {
            auto it = std::find_if(y.branches.begin(), y.branches.end(),
                                   [&](const LSumBranch& l) { return l.label == xb.label; });
            if (it == y.branches.end() || it->mandatory != xb.mandatory) return std::nullopt;
            auto m = merge(xb.body, it->body);
            if (!m) return std::nullopt;
            out.branches.push_back({xb.label, xb.mandatory, *m});
        }
        return make_local(std::move(out));
    }
    if (const auto* x = std::get_if<LMu>(&na)) {
        const auto& y = std::get<LMu>(nb);
        if (x->var != y.var) return std::nullopt;
        auto m = merge(x->body, y.body);
        if (!m) return std::nullopt;
        return make_local(LMu{x->var, *m});
    }
    return std::nullopt;
}

std::optional<std::vector<LLabeled>> merge_same_labels(const std::vector<LLabeled>& a, const std::vector<LLabeled>& b)
{
    if (a.size() != b.size()) return std::nullopt;
    std::vector<LLabeled> out;
    for (const auto& x : a) {
        auto it = std::find_if(b.begin(), b.end(), [&](const LLabeled& l) { return l.label == x.label; });
        if (it == b.end()) return std::nullopt;
        auto m = merge(x.body, it->body);
        if (!m) return std::nullopt;
        out.push_back({x.label, *m});
    }
    return out;
}

LocalPtr proj(const GlobalPtr& g, int p)
{
    return std::visit(
        overloaded{
            [&](const GExchange& n) {
                LocalPtr k = proj(n.cont, p);
                if (p == n.from) return make_local(LSend{n.chan, n.msg, k});
                if (p == n.to) return make_local(LRecv{n.chan, n.msg, k});
                return k;
            },
            [&](const GBranch& n) {
                std::vector<LLabeled> bs;
                for (const auto& b : n.branches) bs.push_back({b.label, proj(b.body, p)});
                if (p == n.from) return make_local(LSelect{n.chan, std::move(bs)});
                if (p == n.to) return make_local(LBranch{n.chan, std::move(bs)});
                LocalPtr acc = bs.front().body;
                for (size_t i = 1; i < bs.size(); ++i) {
                    auto m = merge(acc, bs[i].body);
                    if (!m)
                        throw Error("E-UNDEF-PROJ",
                                    "projection onto participant " + std::to_string(p) + " undefined: branches '" +
                                        bs.front().label + "' and '" + bs[i].label + "' of " +
                                        std::to_string(n.from) + "=>" + std::to_string(n.to) + ":" +
                                        std::to_string(n.chan) + " differ for an uninvolved participant",
                                    g->span);
                    acc = *m;
                }
                return acc;
            },
            [&](const GMu& n) {
                LocalPtr body = proj(n.body, p);
                if (const LVar* v = as<LVar>(body); v && v->name == n.var) return lend();
                if (!free_in(body, n.var)) return body;
                return make_local(LMu{n.var, body});
            },
            [&](const GVar& n) { return make_local(LVar{n.name}); },
            [&](const GEnd&) { return lend(); },
            [&](const GSum& n) {
                LSum out;
                for (const auto& b : n.branches) out.branches.push_back({b.label, b.mandatory, proj(b.body, p)});
                return make_local(std::move(out));
            },
        },
        g->node);
}

}  // namespace

LocalPtr project(const GlobalPtr& g, int p)
{
    if (p < 1) throw Error("E-UNDEF-PROJ", "participant ids start at 1", g->span);
    return proj(g, p);
}

}  // namespace mpst
