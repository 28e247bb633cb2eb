#include "mpst/syntax.hpp"
#include "mpst/types.hpp"
#include "util.hpp"

#include <cstdint>
#include <map>

namespace mpst {

using detail::overloaded;

namespace {

using Mask = std::uint64_t;

Mask bit(int p) { return Mask{1} << p; }

// Linearity: along every path, two actions on the same channel must be
// linked by a chain of actions where consecutive ones share a participant.
// `reach[k]` holds the participants causally after the last action on k.
class Linearity {
public:
    explicit Linearity(int n) : all_(n >= 63 ? ~Mask{0} : ((bit(n + 1) - 1) & ~Mask{1})) {}

    std::vector<Diagnostic> run(const GlobalPtr& g)
    {
        visit(g, {});
        return std::move(errors_);
    }

private:
    using State = std::map<int, Mask>;

    void act(State& st, int from, int to, int chan, const SourceSpan& span)
    {
        Mask who = bit(from) | bit(to);
        auto it = st.find(chan);
        if (it != st.end() && (it->second & who) == 0 && reported_.insert(chan).second) {
            errors_.push_back({"E-RACE",
                               "actions on channel " + std::to_string(chan) +
                                   " are not causally ordered (path: " + detail::join(path_, " . ") +
                                   "); conservative linearity check",
                               span,
                               "coherence"});
        }
        for (auto& [k, m] : st)
            if (m & who) m |= who;
        st[chan] = who;
    }

    void visit(const GlobalPtr& g, State st)
    {
        std::visit(overloaded{
                       [&](const GExchange& n) {
                           path_.push_back(std::to_string(n.from) + "=>" + std::to_string(n.to) + ":" +
                                           std::to_string(n.chan));
                           act(st, n.from, n.to, n.chan, g->span);
                           visit(n.cont, st);
                           path_.pop_back();
                       },
                       [&](const GBranch& n) {
                           act(st, n.from, n.to, n.chan, g->span);
                           for (const auto& b : n.branches) {
                               path_.push_back(std::to_string(n.from) + "=>" + std::to_string(n.to) + ":" +
                                               std::to_string(n.chan) + "{" + b.label + "}");
                               visit(b.body, st);
                               path_.pop_back();
                           }
                       },
                       [&](const GMu& n) {
                           if (!memo_[g.get()].insert(st).second) return;
                           auto saved = binders_[n.var];
                           binders_[n.var] = g;
                           visit(n.body, st);
                           binders_[n.var] = saved;
                       },
                       [&](const GVar& n) {
                           auto it = binders_.find(n.name);
                           if (it != binders_.end()) visit(it->second, st);
                       },
                       [&](const GEnd&) {},
                       [&](const GSum& n) {
                           // a synchronisation involves every participant
                           for (auto& [k, m] : st)
                               if (m) m |= all_;
                           for (const auto& b : n.branches) {
                               path_.push_back(b.label);
                               visit(b.body, st);
                               path_.pop_back();
                           }
                       },
                   },
                   g->node);
    }

    Mask all_;
    std::vector<Diagnostic> errors_;
    std::set<int> reported_;
    std::vector<std::string> path_;
    std::map<const GlobalType*, std::set<State>> memo_;
    std::map<std::string, GlobalPtr> binders_;
};

}  // namespace

std::vector<Diagnostic> coherence_errors(const GlobalPtr& g)
{
    std::vector<Diagnostic> errs;
    Dimensions d = dimensions(g);
    for (int p = 1; p <= d.participants; ++p) {
        try {
            project(g, p);
        } catch (const Error& e) {
            for (const auto& diag : e.diagnostics()) errs.push_back(diag);
        }
    }
    for (auto& diag : Linearity(d.participants).run(g)) errs.push_back(std::move(diag));
    return errs;
}

void check_coherent(const GlobalPtr& g)
{
    auto errs = coherence_errors(g);
    if (!errs.empty()) throw Error(std::move(errs));
}

}  // namespace mpst
