#pragma once

// Random coherent protocols and well-typed programs implementing them, one
// process per participant, synthesised from the projections.

#include "mpst/syntax.hpp"
#include "mpst/types.hpp"
#include "support/generators.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mpst::test {

inline std::string join_list(const std::vector<std::string>& xs)
{
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
    return out;
}

namespace detail {

inline GlobalPtr protocol(Rng& rng, int n, int max_labels, int depth, std::vector<std::string>& bound, bool guarded)
{
    static const std::vector<std::string> pool = {"a", "b", "c", "go", "ok", "no"};
    auto labels = [&](int count) {
        std::vector<std::string> all = pool;
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(static_cast<size_t>(count));
        return all;
    };
    if (depth <= 0) {
        if (guarded && !bound.empty() && coin(rng, 0.3)) return make_global(GVar{pick(rng, bound)});
        return gend();
    }
    int p = uniform(rng, 1, n);
    int q = uniform(rng, 1, n - 1);
    if (q >= p) ++q;
    int roll = uniform(rng, 0, 9);
    if (roll < 4) {
        std::vector<SimpleType> sorts;
        for (int i = uniform(rng, 0, 2); i > 0; --i) sorts.push_back(SimpleType{pick(rng, std::vector<BaseSort>{BaseSort::Int, BaseSort::Bool, BaseSort::String}), ""});
        return make_global(GExchange{p, q, uniform(rng, 1, 3), MsgType{sorts},
                                     protocol(rng, n, max_labels, depth - 1, bound, true)});
    }
    if (roll < 5) {
        GBranch b{p, q, uniform(rng, 1, 3), {}};
        for (const auto& l : labels(uniform(rng, 1, 2)))
            b.branches.push_back({l, protocol(rng, n, max_labels, depth - 1, bound, true)});
        return make_global(b);
    }
    if (roll < 6 && bound.size() < 2) {
        std::string v = "t" + std::to_string(bound.size());
        bound.push_back(v);
        GlobalPtr body = protocol(rng, n, max_labels, depth - 1, bound, false);
        bound.pop_back();
        return make_global(GMu{v, body});
    }
    GSum s;
    auto ls = labels(uniform(rng, 1, max_labels));
    for (size_t i = 0; i < ls.size(); ++i)
        s.branches.push_back({ls[i], i == 0 || coin(rng), protocol(rng, n, max_labels, depth - 1, bound, true)});
    std::shuffle(s.branches.begin(), s.branches.end(), rng);
    return make_global(s);
}

inline bool has_sum(const GlobalPtr& g)
{
    if (as<GSum>(g)) return true;
    if (const auto* e = as<GExchange>(g)) return has_sum(e->cont);
    if (const auto* b = as<GBranch>(g)) {
        for (const auto& x : b->branches)
            if (has_sum(x.body)) return true;
        return false;
    }
    if (const auto* m = as<GMu>(g)) return has_sum(m->body);
    return false;
}

inline void directions(const GlobalPtr& g, std::map<int, std::set<std::pair<int, int>>>& out)
{
    if (const auto* e = as<GExchange>(g)) {
        out[e->chan].insert({e->from, e->to});
        directions(e->cont, out);
    } else if (const auto* b = as<GBranch>(g)) {
        out[b->chan].insert({b->from, b->to});
        for (const auto& x : b->branches) directions(x.body, out);
    } else if (const auto* s = as<GSum>(g)) {
        for (const auto& x : s->branches) directions(x.body, out);
    } else if (const auto* m = as<GMu>(g)) {
        directions(m->body, out);
    }
}

}  // namespace detail

/// Every channel carries messages from one sender to one receiver only. The
/// shared-participant linearity check admits receive races on a channel used
/// by several pairs (1=>2:1<Int>;2=>3:1<Int>;end lets 3 take 1's message);
/// with a single pair per channel FIFO order makes runs race free.
inline bool fixed_directions(const GlobalPtr& g)
{
    std::map<int, std::set<std::pair<int, int>>> d;
    detail::directions(g, d);
    return std::all_of(d.begin(), d.end(), [](const auto& kv) { return kv.second.size() == 1; });
}

/// A coherent global type with at least one sum, 2..max_participants
/// participants, at least one channel, and at most `max_labels` labels per sum.
inline GlobalPtr random_protocol(Rng& rng, int max_participants = 3, int max_labels = 3, int depth = 5,
                                 bool race_free = false)
{
    for (;;) {
        int n = uniform(rng, 2, max_participants);
        std::vector<std::string> bound;
        GlobalPtr g = detail::protocol(rng, n, max_labels, depth, bound, false);
        Dimensions d = dimensions(g);
        if (d.channels < 1 || d.participants < 2 || !detail::has_sum(g)) continue;
        if (race_free && !fixed_directions(g)) continue;
        if (coherence_errors(g).empty()) return g;
    }
}

class Synthesiser {
public:
    Synthesiser(Rng& rng, int m, int n) : rng_(rng), n_(n)
    {
        for (int k = 1; k <= m; ++k) chans_.push_back("s" + std::to_string(k));
    }

    std::string process(const LocalPtr& t)
    {
        std::map<std::string, std::string> defs;
        return proc(t, defs);
    }

    std::string vector() const { return "(" + join_list(chans_) + ")"; }

private:
    std::string literal(const SimpleType& s)
    {
        switch (s.sort) {
        case BaseSort::Int: return std::to_string(uniform(rng_, 0, 9));
        case BaseSort::Bool: return coin(rng_) ? "true" : "false";
        default: return coin(rng_) ? "\"v\"" : "\"w\"";
        }
    }

    std::string chan(int k) const { return chans_.at(static_cast<size_t>(k - 1)); }

    std::string proc(const LocalPtr& t, std::map<std::string, std::string>& defs)
    {
        if (as<LEnd>(t)) return coin(rng_, 0.2) ? "succ" : "end";
        if (const auto* s = as<LSend>(t)) {
            std::vector<std::string> es;
            for (const auto& sort : s->msg.sorts()) es.push_back(literal(sort));
            return chan(s->chan) + "<<<" + join_list(es) + ">;" + proc(s->cont, defs);
        }
        if (const auto* r = as<LRecv>(t)) {
            std::vector<std::string> xs;
            for (size_t i = 0; i < r->msg.sorts().size(); ++i) xs.push_back("v" + std::to_string(++vars_));
            return chan(r->chan) + ">>(" + join_list(xs) + ");" + proc(r->cont, defs);
        }
        if (const auto* s = as<LSelect>(t)) {
            std::vector<std::string> arms;
            for (const auto& b : s->branches) arms.push_back(chan(s->chan) + "<:" + b.label + ";" + proc(b.body, defs));
            return arms.size() == 1 ? arms[0] : "rand{" + join_list(arms) + "}";
        }
        if (const auto* b = as<LBranch>(t)) {
            std::vector<std::string> arms;
            for (const auto& x : b->branches) arms.push_back(x.label + ": " + proc(x.body, defs));
            return chan(b->chan) + ":>{" + join_list(arms) + "}";
        }
        if (const auto* s = as<LSum>(t)) {
            std::vector<std::string> arms;
            for (const auto& x : s->branches)
                if (x.mandatory || coin(rng_, 0.6)) arms.push_back(std::string(x.mandatory ? "^" : "#") + x.label + ": " + proc(x.body, defs));
            return "sync(" + vector() + "," + std::to_string(n_) + "){" + join_list(arms) + "}";
        }
        if (const auto* m = as<LMu>(t)) {
            std::string name = "X" + std::to_string(++procs_);
            auto inner = defs;
            inner[m->var] = name;
            return "def " + name + "(; " + vector() + ") = " + proc(m->body, inner) + " in " + name + "(; " +
                   vector() + ")";
        }
        const auto& v = std::get<LVar>(t->node);
        return defs.at(v.name) + "(; " + vector() + ")";
    }

    Rng& rng_;
    int n_;
    std::vector<std::string> chans_;
    int vars_ = 0;
    int procs_ = 0;
};

/// Program text declaring `g` as type G on shared name `a`, with one process
/// per participant obtained from the projections.
inline std::string synthesise_program(Rng& rng, const GlobalPtr& g)
{
    Dimensions d = dimensions(g);
    Synthesiser syn(rng, d.channels, d.participants);
    std::string out = "type G = " + render(g) + ";\nchan a : G;\n";
    for (int p = 1; p <= d.participants; ++p) {
        std::string body = syn.process(project(g, p));
        if (p == 1)
            out += "/a[2.." + std::to_string(d.participants) + "]" + syn.vector() + ".(" + body + ")\n";
        else
            out += "| a[" + std::to_string(p) + "]" + syn.vector() + ".(" + body + ")\n";
    }
    return out;
}

}  // namespace mpst::test
