#include "mpst/syntax.hpp"
#include "mpst/typecheck.hpp"
#include "util.hpp"

#include <algorithm>
#include <optional>
#include <tuple>

namespace mpst {

namespace {

bool env_equal(SessionEnv a, SessionEnv b)
{
    if (a.size() != b.size()) return false;
    auto key = [](const SessionEntry& x, const SessionEntry& y) {
        return std::tie(x.chans, x.participant) < std::tie(y.chans, y.participant);
    };
    std::sort(a.begin(), a.end(), key);
    std::sort(b.begin(), b.end(), key);
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].chans != b[i].chans || a[i].participant != b[i].participant ||
            a[i].participants != b[i].participants || !type_equal(a[i].type, b[i].type))
            return false;
    return true;
}

class Validator {
public:
    std::vector<Diagnostic> errors;

    void visit(const Derivation& d)
    {
        node(d);
        for (const auto& p : d.premises) visit(p);
    }

private:
    bool bad(const Derivation& d, const std::string& msg)
    {
        errors.push_back({"E-DERIV", msg, d.process->span, std::string("rule ") + rule_name(d.rule)});
        return false;
    }

    bool arity(const Derivation& d, size_t n)
    {
        if (d.premises.size() == n) return true;
        return bad(d, "expected " + std::to_string(n) + " premises, found " + std::to_string(d.premises.size()));
    }

    bool child(const Derivation& d, size_t i, const ProcPtr& p)
    {
        if (d.premises[i].process.same_node(p) || d.premises[i].process == p) return true;
        return bad(d, "premise " + std::to_string(i) + " concludes about the wrong process");
    }

    bool same_env(const Derivation& d, const Derivation& prem, const SessionEnv& want)
    {
        if (env_equal(prem.delta, want)) return true;
        return bad(d, "premise environment " + render(prem.delta) + " differs from " + render(want));
    }

    // The entry of d.delta acted on, and its index.
    std::optional<size_t> entry(const Derivation& d)
    {
        for (size_t i = 0; i < d.delta.size(); ++i)
            if (d.delta[i].chans == d.chans) return i;
        bad(d, "session " + detail::join(d.chans) + " is not in the environment");
        return std::nullopt;
    }

    int index(const std::vector<std::string>& chans, const std::string& s)
    {
        auto it = std::find(chans.begin(), chans.end(), s);
        return it == chans.end() ? 0 : static_cast<int>(it - chans.begin()) + 1;
    }

    SessionEnv with_type(SessionEnv env, size_t i, const LocalPtr& t)
    {
        env[i].type = t;
        return env;
    }

    template <class H>
    const H* head(const Derivation& d, size_t e, const std::string& chan)
    {
        held_ = unfold(d.delta[e].type);
        const H* h = as<H>(held_);
        if (!h || h->chan != index(d.chans, chan)) {
            bad(d, "session type " + render(d.delta[e].type) + " does not match the prefix on " + chan);
            return nullptr;
        }
        return h;
    }

    void node(const Derivation& d)
    {
        const ProcPtr& p = d.process;
        switch (d.rule) {
        case Rule::Inact:
        case Rule::Succ: {
            bool kind = d.rule == Rule::Inact ? as<Inact>(p) != nullptr : as<Success>(p) != nullptr;
            if (!kind) bad(d, "conclusion is not an inaction");
            arity(d, 0);
            for (const auto& e : d.delta)
                if (!is_end(e.type)) bad(d, "session " + render(e) + " is not finished");
            return;
        }
        case Rule::Mcast:
        case Rule::Macc: {
            const std::vector<std::string>* chans = nullptr;
            const ProcPtr* body = nullptr;
            std::string a;
            int p_ = 0, n = d.dims.participants;
            if (const auto* r = as<Request>(p); r && d.rule == Rule::Mcast) {
                chans = &r->session_chans, body = &r->body, a = r->chan, p_ = 1, n = r->n;
            } else if (const auto* c = as<Accept>(p); c && d.rule == Rule::Macc) {
                chans = &c->session_chans, body = &c->body, a = c->chan, p_ = c->participant;
            } else {
                bad(d, "conclusion is not a session initiation");
                return;
            }
            auto it = d.gamma->shared.find(a);
            if (it == d.gamma->shared.end() || !(it->second.type == d.global)) {
                bad(d, "'" + a + "' is not bound to the recorded global type");
                return;
            }
            if (static_cast<int>(chans->size()) != it->second.dims.channels || n != it->second.dims.participants ||
                p_ < 1 || p_ > n)
                bad(d, "session dimensions do not match the global type");
            if (!arity(d, 1) || !child(d, 0, *body)) return;
            SessionEnv want = d.delta;
            want.push_back({*chans, project(d.global, p_), p_, it->second.dims.participants});
            same_env(d, d.premises[0], want);
            return;
        }
        case Rule::Send:
        case Rule::Rcv:
        case Rule::Sel:
        case Rule::Deleg:
        case Rule::SRec: prefix(d); return;
        case Rule::Branch: {
            const auto* n = as<Branch>(p);
            if (!n) {
                bad(d, "conclusion is not a branching");
                return;
            }
            auto e = entry(d);
            if (!e) return;
            const LBranch* h = head<LBranch>(d, *e, n->chan);
            if (!h || !arity(d, n->branches.size())) return;
            if (h->branches.size() != n->branches.size()) bad(d, "branch labels differ from the type's");
            for (size_t i = 0; i < n->branches.size(); ++i) {
                auto it = std::find_if(h->branches.begin(), h->branches.end(),
                                       [&](const LLabeled& b) { return b.label == n->branches[i].label; });
                if (it == h->branches.end()) {
                    bad(d, "label '" + n->branches[i].label + "' not in the type");
                    continue;
                }
                if (child(d, i, n->branches[i].body)) same_env(d, d.premises[i], with_type(d.delta, *e, it->body));
            }
            return;
        }
        case Rule::Sync: {
            const auto* n = as<Sync>(p);
            if (!n) {
                bad(d, "conclusion is not a sync");
                return;
            }
            auto e = entry(d);
            if (!e) return;
            if (n->chans != d.chans || n->n != d.delta[*e].participants) bad(d, "sync names the wrong session");
            held_ = unfold(d.delta[*e].type);
            const LSum* sum = as<LSum>(held_);
            if (!sum) {
                bad(d, "session type is not a sum");
                return;
            }
            if (!arity(d, n->branches.size())) return;
            for (const auto& b : sum->branches)
                if (b.mandatory && std::none_of(n->branches.begin(), n->branches.end(),
                                                [&](const SyncBranch& s) { return s.label == b.label; }))
                    bad(d, "mandatory label '" + b.label + "' not offered");
            for (size_t i = 0; i < n->branches.size(); ++i) {
                auto it = std::find_if(sum->branches.begin(), sum->branches.end(),
                                       [&](const LSumBranch& b) { return b.label == n->branches[i].label; });
                if (it == sum->branches.end()) {
                    bad(d, "offered label '" + n->branches[i].label + "' not in the sum");
                    continue;
                }
                if (child(d, i, n->branches[i].body)) same_env(d, d.premises[i], with_type(d.delta, *e, it->body));
            }
            return;
        }
        case Rule::Rand: {
            const auto* n = as<Rand>(p);
            if (!n) {
                bad(d, "conclusion is not a rand");
                return;
            }
            if (!arity(d, n->branches.size())) return;
            for (size_t i = 0; i < n->branches.size(); ++i)
                if (child(d, i, n->branches[i])) same_env(d, d.premises[i], d.delta);
            return;
        }
        case Rule::If: {
            const auto* n = as<If>(p);
            if (!n) {
                bad(d, "conclusion is not a conditional");
                return;
            }
            if (!arity(d, 2)) return;
            if (child(d, 0, n->then_branch)) same_env(d, d.premises[0], d.delta);
            if (child(d, 1, n->else_branch)) same_env(d, d.premises[1], d.delta);
            return;
        }
        case Rule::Conc: {
            const auto* n = as<Par>(p);
            if (!n) {
                bad(d, "conclusion is not a parallel composition");
                return;
            }
            if (!arity(d, 2) || !child(d, 0, n->left) || !child(d, 1, n->right)) return;
            for (const auto& l : d.premises[0].delta)
                for (const auto& r : d.premises[1].delta)
                    if (l.chans == r.chans) bad(d, "premise environments share session " + detail::join(l.chans));
            SessionEnv joined = d.premises[0].delta;
            joined.insert(joined.end(), d.premises[1].delta.begin(), d.premises[1].delta.end());
            if (!env_equal(joined, d.delta)) bad(d, "premise environments do not compose to the conclusion's");
            return;
        }
        case Rule::Res: {
            const auto* n = as<Restrict>(p);
            if (!n) {
                bad(d, "conclusion is not a restriction");
                return;
            }
            if (!d.gamma->shared.count(n->name)) bad(d, "restricted name has no type");
            if (arity(d, 1) && child(d, 0, n->body)) same_env(d, d.premises[0], d.delta);
            return;
        }
        case Rule::Def: {
            const auto* n = as<Def>(p);
            if (!n) {
                bad(d, "conclusion is not a definition");
                return;
            }
            if (!arity(d, n->defs.size() + 1)) return;
            for (size_t i = 0; i < n->defs.size(); ++i) child(d, i, n->defs[i].body);
            if (child(d, n->defs.size(), n->body)) same_env(d, d.premises.back(), d.delta);
            return;
        }
        case Rule::Call: {
            const auto* n = as<Call>(p);
            if (!n) {
                bad(d, "conclusion is not a call");
                return;
            }
            arity(d, 0);
            auto it = d.gamma->procs.find(n->name);
            if (it == d.gamma->procs.end() || d.sigs.size() != 1) {
                bad(d, "process '" + n->name + "' has no signature");
                return;
            }
            const ProcSig& sig = it->second;
            if (sig.sessions.size() != n->session_args.size()) {
                bad(d, "session argument count differs from the signature");
                return;
            }
            std::vector<bool> used(d.delta.size());
            for (size_t j = 0; j < n->session_args.size(); ++j) {
                bool found = false;
                for (size_t i = 0; i < d.delta.size(); ++i) {
                    if (d.delta[i].chans != n->session_args[j]) continue;
                    found = true;
                    used[i] = true;
                    if (!type_equal(d.delta[i].type, sig.sessions[j].type) ||
                        d.delta[i].participant != sig.sessions[j].participant)
                        bad(d, "argument session " + render(d.delta[i]) + " does not match the signature");
                }
                if (!found) bad(d, "argument session not in the environment");
            }
            for (size_t i = 0; i < d.delta.size(); ++i)
                if (!used[i] && !is_end(d.delta[i].type)) bad(d, "unfinished session not passed to the call");
            return;
        }
        }
    }

    void prefix(const Derivation& d)
    {
        const ProcPtr& p = d.process;
        auto e = entry(d);
        if (!e || !arity(d, 1)) return;
        const SessionEnv& delta = d.delta;
        const Derivation& prem = d.premises[0];
        switch (d.rule) {
        case Rule::Send: {
            const auto* n = as<Send>(p);
            if (!n) break;
            const LSend* h = head<LSend>(d, *e, n->chan);
            if (!h || h->msg.is_session() || h->msg.sorts().size() != n->exprs.size()) {
                bad(d, "send does not match its type");
                return;
            }
            if (child(d, 0, n->cont)) same_env(d, prem, with_type(delta, *e, h->cont));
            return;
        }
        case Rule::Rcv: {
            const auto* n = as<Recv>(p);
            if (!n) break;
            const LRecv* h = head<LRecv>(d, *e, n->chan);
            if (!h || h->msg.is_session() || h->msg.sorts().size() != n->vars.size()) {
                bad(d, "receive does not match its type");
                return;
            }
            for (size_t i = 0; i < n->vars.size(); ++i) {
                auto it = prem.gamma->values.find(n->vars[i].name);
                if (it == prem.gamma->values.end() || !(it->second == h->msg.sorts()[i]))
                    bad(d, "received variable '" + n->vars[i].name + "' is not bound at its sort");
            }
            if (child(d, 0, n->cont)) same_env(d, prem, with_type(delta, *e, h->cont));
            return;
        }
        case Rule::Sel: {
            const auto* n = as<Select>(p);
            if (!n) break;
            const LSelect* h = head<LSelect>(d, *e, n->chan);
            if (!h) return;
            auto it = std::find_if(h->branches.begin(), h->branches.end(),
                                   [&](const LLabeled& b) { return b.label == n->label; });
            if (it == h->branches.end()) {
                bad(d, "selected label not in the type");
                return;
            }
            if (child(d, 0, n->cont)) same_env(d, prem, with_type(delta, *e, it->body));
            return;
        }
        case Rule::Deleg: {
            const auto* n = as<Delegate>(p);
            if (!n) break;
            const LSend* h = head<LSend>(d, *e, n->chan);
            if (!h || !h->msg.is_session()) {
                bad(d, "delegation does not match its type");
                return;
            }
            SessionEnv want = with_type(delta, *e, h->cont);
            auto it = std::find_if(want.begin(), want.end(), [&](const SessionEntry& x) { return x.chans == n->chans; });
            if (it == want.end() || !type_equal(it->type, h->msg.session().type)) {
                bad(d, "delegated session does not match");
                return;
            }
            want.erase(it);
            if (child(d, 0, n->cont)) same_env(d, prem, want);
            return;
        }
        case Rule::SRec: {
            const auto* n = as<DelegRecv>(p);
            if (!n) break;
            const LRecv* h = head<LRecv>(d, *e, n->chan);
            if (!h || !h->msg.is_session()) {
                bad(d, "session receive does not match its type");
                return;
            }
            const SessionAt& at = h->msg.session();
            SessionEnv want = with_type(delta, *e, h->cont);
            want.push_back({n->chans, at.type, at.participant, at.participants});
            if (child(d, 0, n->cont)) same_env(d, prem, want);
            return;
        }
        default: break;
        }
        bad(d, "conclusion does not match the rule");
    }

    LocalPtr held_;
};

}  // namespace

std::vector<Diagnostic> validate_derivation(const Derivation& d)
{
    Validator v;
    v.visit(d);
    return std::move(v.errors);
}

}  // namespace mpst
