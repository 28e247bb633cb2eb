#include "internal.hpp"
#include "mpst/syntax.hpp"
#include "util.hpp"

#include <algorithm>

namespace mpst {

using detail::overloaded;
using detail::role_of;
using detail::spawn;
using detail::subst;

const char* step_kind_name(StepKind k)
{
    switch (k) {
    case StepKind::Link: return "Link";
    case StepKind::Send: return "Send";
    case StepKind::Recv: return "Recv";
    case StepKind::Label: return "Label";
    case StepKind::Branch: return "Branch";
    case StepKind::Deleg: return "Deleg";
    case StepKind::SRec: return "SRec";
    case StepKind::IfT: return "IfT";
    case StepKind::IfF: return "IfF";
    case StepKind::Def: return "Def";
    case StepKind::Rand: return "Rand";
    case StepKind::Sync: return "Sync";
    }
    return "?";
}

std::string format_step(size_t index, const StepLabel& s)
{
    std::string chans;
    for (size_t i = 0; i < s.chans.size(); ++i) chans += (i ? " " : "") + s.chans[i];
    if (chans.empty()) chans = "-";
    std::string who = s.participant ? std::to_string(s.participant) : "*";
    return std::to_string(index) + ", " + step_kind_name(s.kind) + ", " + chans + ", " + who + ", " + s.payload;
}

Config initial_config(const ProcPtr& p)
{
    Config c;
    spawn(c, c.soup, Thread{p, nullptr, {}});
    return c;
}

bool terminated(const Config& c)
{
    return std::all_of(c.soup.begin(), c.soup.end(), [](const Thread& t) { return as<Success>(t.proc) != nullptr; });
}

namespace {

std::string thread_key(const Thread& t)
{
    std::string k = render(t.proc);
    if (t.frame) k += " @" + t.frame->key;
    for (const auto& [sid, p] : t.roles) k += " [" + std::to_string(sid) + ":" + std::to_string(p) + "]";
    return k;
}

std::string render_item(const QueueItem& q)
{
    std::string s = render(q.msg);
    if (q.role) s += "@" + std::to_string(q.role);
    return s;
}

std::string queue_text(const std::deque<QueueItem>& q)
{
    std::string s;
    for (size_t i = 0; i < q.size(); ++i) s += (i ? " . " : "") + render_item(q[i]);
    return s;
}

}  // namespace

std::string config_key(const Config& c)
{
    std::vector<std::string> threads;
    for (const auto& t : c.soup) threads.push_back(thread_key(t));
    std::sort(threads.begin(), threads.end());
    std::string k;
    for (const auto& t : threads) k += t + "\n";
    k += "--\n";
    for (const auto& [name, q] : c.queues) k += name + ": " + queue_text(q) + "\n";
    return k;
}

std::string render(const Config& c)
{
    std::string out;
    for (const auto& t : c.soup) out += "  " + render(t.proc) + "\n";
    for (const auto& [name, q] : c.queues) out += "  " + name + ": [" + queue_text(q) + "]\n";
    return out;
}

namespace detail {

std::optional<SyncRedex> sync_redex(const Config& c, size_t i)
{
    const auto* s = as<Sync>(c.soup[i].proc);
    if (!s || s->chans.empty()) return std::nullopt;
    auto sit = c.chan_session.find(s->chans.front());
    if (sit == c.chan_session.end()) return std::nullopt;
    const int sid = sit->second;
    const int n = s->n;
    SyncRedex r;
    r.session = sid;
    r.threads.assign(static_cast<size_t>(std::max(n, 0)), SIZE_MAX);
    for (size_t j = 0; j < c.soup.size(); ++j) {
        const auto* o = as<Sync>(c.soup[j].proc);
        if (!o || o->chans != s->chans || o->n != n) continue;
        auto role = c.soup[j].roles.find(sid);
        if (role == c.soup[j].roles.end() || role->second < 1 || role->second > n) continue;
        auto& slot = r.threads[static_cast<size_t>(role->second - 1)];
        if (slot == SIZE_MAX) slot = j;
    }
    if (std::count(r.threads.begin(), r.threads.end(), SIZE_MAX)) return std::nullopt;
    if (std::find(r.threads.begin(), r.threads.end(), i) == r.threads.end()) return std::nullopt;
    std::vector<std::string> common;
    for (size_t p = 0; p < r.threads.size(); ++p) {
        std::vector<std::string> offered;
        for (const auto& b : as<Sync>(c.soup[r.threads[p]].proc)->branches) offered.push_back(b.label);
        std::sort(offered.begin(), offered.end());
        if (p == 0) {
            common = offered;
        } else {
            std::vector<std::string> both;
            std::set_intersection(common.begin(), common.end(), offered.begin(), offered.end(),
                                  std::back_inserter(both));
            common = std::move(both);
        }
    }
    r.common = std::move(common);
    return r;
}

SyncRequest sync_request(const Config& c, const SyncRedex& r)
{
    SyncRequest req;
    req.session = r.session;
    const SessionInfo& info = c.sessions.at(r.session);
    req.sync_index = info.syncs + 1;
    req.shared = info.shared;
    const auto* first = as<Sync>(c.soup[r.threads.front()].proc);
    req.chans = first->chans;
    for (size_t t : r.threads) {
        std::vector<std::string> offered, mandatory;
        auto& own = req.own_args.emplace_back();
        for (const auto& b : as<Sync>(c.soup[t].proc)->branches) {
            offered.push_back(b.label);
            if (b.mandatory) mandatory.push_back(b.label);
            if (!b.args.empty()) own[b.label] = b.args;
            for (const auto& a : b.args) {
                auto& ps = req.args[b.label];
                if (std::none_of(ps.begin(), ps.end(), [&](const Param& x) { return x.name == a.name; }))
                    ps.push_back(a);
            }
        }
        req.offered.push_back(offered);
        req.mandatory.push_back(mandatory);
    }
    req.common = r.common;
    return req;
}

Step fire_sync(const Config& c, const SyncRedex& r, const std::string& label, const std::map<std::string, Value>& args)
{
    Step st;
    st.label.kind = StepKind::Sync;
    st.label.chans = as<Sync>(c.soup[r.threads.front()].proc)->chans;
    st.label.session = r.session;
    st.label.label = label;
    st.label.sync_index = c.sessions.at(r.session).syncs + 1;
    st.label.payload = label;

    Config next = c;
    next.soup.clear();
    next.sessions[r.session].syncs++;
    std::map<size_t, Thread> replaced;
    for (size_t t : r.threads) {
        Thread th = c.soup[t];
        const auto* s = as<Sync>(th.proc);
        auto b = std::find_if(s->branches.begin(), s->branches.end(),
                              [&](const SyncBranch& x) { return x.label == label; });
        Subst bind;
        for (const auto& a : b->args) {
            auto it = args.find(a.name);
            Value v = it != args.end() ? it->second : default_value(a.sort.value_or(SimpleType{}));
            bind[a.name] = v;
            st.label.args[a.name] = v;
        }
        th.proc = subst(b->body, bind);
        replaced[t] = std::move(th);
    }
    for (const auto& [name, v] : st.label.args) st.label.payload += ", " + name + "=" + render(v);
    for (size_t j = 0; j < c.soup.size(); ++j) {
        auto it = replaced.find(j);
        if (it == replaced.end())
            next.soup.push_back(c.soup[j]);
        else
            spawn(next, next.soup, it->second);
    }
    st.next = std::move(next);
    return st;
}

}  // namespace detail

namespace {

using detail::Subst;

// Every combination of one outcome per expression.
std::vector<std::vector<Value>> outcomes(const std::vector<ExprPtr>& es)
{
    std::vector<std::vector<Value>> out{{}};
    for (const auto& e : es) {
        std::vector<std::vector<Value>> next;
        for (const auto& v : detail::eval_all(e))
            for (const auto& prefix : out) {
                auto row = prefix;
                row.push_back(v);
                next.push_back(std::move(row));
            }
        out = std::move(next);
    }
    return out;
}

std::string values_text(const std::vector<Value>& vs)
{
    std::string s;
    for (size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + render(vs[i]);
    return s;
}

class Stepper {
public:
    explicit Stepper(const Config& c) : c_(c) {}

    std::vector<Step> all()
    {
        for (size_t i = 0; i < c_.soup.size(); ++i) {
            redex_ = i;
            thread(i);
        }
        return std::move(out_);
    }

private:
    // A successor replacing thread i with `ts` (already normalised by spawn).
    void emit(StepLabel label, Config next) { out_.push_back(Step{std::move(label), std::move(next), redex_}); }

    Config replace(size_t i, const std::vector<Thread>& ts, Config next)
    {
        std::vector<Thread> soup;
        for (size_t j = 0; j < next.soup.size(); ++j) {
            if (j != i) {
                soup.push_back(next.soup[j]);
                continue;
            }
            for (const auto& t : ts) spawn(next, soup, t);
        }
        next.soup = std::move(soup);
        return next;
    }

    StepLabel label(StepKind k, const Thread& t, const std::string& chan)
    {
        StepLabel l;
        l.kind = k;
        if (!chan.empty()) {
            l.chans = {chan};
            auto it = c_.chan_session.find(chan);
            if (it != c_.chan_session.end()) l.session = it->second;
            l.participant = role_of(c_, t, chan);
        } else if (t.roles.size() == 1) {
            l.session = t.roles.begin()->first;
            l.participant = t.roles.begin()->second;
        }
        return l;
    }

    void thread(size_t i)
    {
        const Thread& t = c_.soup[i];
        std::visit(overloaded{
                       [&](const Request& n) { link(i, n); },
                       [&](const Send& n) {
                           if (!c_.queues.count(n.chan)) return;
                           for (const auto& vs : outcomes(n.exprs)) {
                               Config next = c_;
                               next.queues[n.chan].push_back({ValuesMsg{vs}, 0});
                               Thread th = t;
                               th.proc = n.cont;
                               StepLabel l = label(StepKind::Send, t, n.chan);
                               l.payload = values_text(vs);
                               emit(l, replace(i, {th}, std::move(next)));
                           }
                       },
                       [&](const Recv& n) {
                           const QueueItem* head = front(n.chan);
                           const auto* vm = head ? std::get_if<ValuesMsg>(&head->msg) : nullptr;
                           if (!vm || vm->values.size() != n.vars.size()) return;
                           Subst s;
                           for (size_t k = 0; k < n.vars.size(); ++k) s[n.vars[k].name] = vm->values[k];
                           Thread th = t;
                           th.proc = subst(n.cont, s);
                           StepLabel l = label(StepKind::Recv, t, n.chan);
                           l.payload = values_text(vm->values);
                           Config next = c_;
                           next.queues[n.chan].pop_front();
                           emit(l, replace(i, {th}, std::move(next)));
                       },
                       [&](const Select& n) {
                           if (!c_.queues.count(n.chan)) return;
                           Config next = c_;
                           next.queues[n.chan].push_back({LabelMsg{n.label}, 0});
                           Thread th = t;
                           th.proc = n.cont;
                           StepLabel l = label(StepKind::Label, t, n.chan);
                           l.label = l.payload = n.label;
                           emit(l, replace(i, {th}, std::move(next)));
                       },
                       [&](const Branch& n) {
                           const QueueItem* head = front(n.chan);
                           const auto* lm = head ? std::get_if<LabelMsg>(&head->msg) : nullptr;
                           if (!lm) return;
                           auto b = std::find_if(n.branches.begin(), n.branches.end(),
                                                 [&](const Labeled& x) { return x.label == lm->label; });
                           if (b == n.branches.end()) return;
                           Thread th = t;
                           th.proc = b->body;
                           StepLabel l = label(StepKind::Branch, t, n.chan);
                           l.label = l.payload = lm->label;
                           Config next = c_;
                           next.queues[n.chan].pop_front();
                           emit(l, replace(i, {th}, std::move(next)));
                       },
                       [&](const Delegate& n) {
                           if (!c_.queues.count(n.chan)) return;
                           for (const auto& ch : n.chans)
                               if (!c_.chan_session.count(ch)) return;
                           Thread th = t;
                           int sid = c_.chan_session.at(n.chans.front());
                           int role = 0;
                           if (auto it = th.roles.find(sid); it != th.roles.end()) {
                               role = it->second;
                               th.roles.erase(it);
                           }
                           th.proc = n.cont;
                           Config next = c_;
                           next.queues[n.chan].push_back({ChansMsg{n.chans}, role});
                           StepLabel l = label(StepKind::Deleg, t, n.chan);
                           l.payload = "((" + detail::join(n.chans) + "))";
                           emit(l, replace(i, {th}, std::move(next)));
                       },
                       [&](const DelegRecv& n) {
                           const QueueItem* head = front(n.chan);
                           const auto* cm = head ? std::get_if<ChansMsg>(&head->msg) : nullptr;
                           if (!cm || cm->chans.size() != n.chans.size()) return;
                           Subst s;
                           for (size_t k = 0; k < n.chans.size(); ++k) s[n.chans[k]] = name_value(cm->chans[k]);
                           Thread th = t;
                           th.proc = subst(n.cont, s);
                           if (auto it = c_.chan_session.find(cm->chans.front()); it != c_.chan_session.end())
                               th.roles[it->second] = head->role;
                           StepLabel l = label(StepKind::SRec, t, n.chan);
                           l.payload = "((" + detail::join(cm->chans) + "))";
                           Config next = c_;
                           next.queues[n.chan].pop_front();
                           emit(l, replace(i, {th}, std::move(next)));
                       },
                       [&](const If& n) {
                           for (const auto& v : detail::eval_all(n.cond)) {
                               const bool* b = std::get_if<bool>(&v);
                               if (!b) throw Error("E-EVAL", "condition evaluated to " + render(v), n.cond->span);
                               Thread th = t;
                               th.proc = *b ? n.then_branch : n.else_branch;
                               emit(label(*b ? StepKind::IfT : StepKind::IfF, t, ""), replace(i, {th}, c_));
                           }
                       },
                       [&](const Call& n) { call(i, n); },
                       [&](const Rand& n) {
                           for (size_t k = 0; k < n.branches.size(); ++k) {
                               Thread th = t;
                               th.proc = n.branches[k];
                               const auto* sel = as<Select>(n.branches[k]);
                               StepLabel l = label(StepKind::Rand, t, sel ? sel->chan : "");
                               l.choice = static_cast<int>(k);
                               l.payload = std::to_string(k);
                               if (sel) l.label = sel->label;
                               emit(l, replace(i, {th}, c_));
                           }
                       },
                       [&](const Sync&) {
                           auto r = detail::sync_redex(c_, i);
                           if (!r || i != *std::min_element(r->threads.begin(), r->threads.end())) return;
                           for (const auto& h : r->common) {
                               Step st = detail::fire_sync(c_, *r, h, {});
                               st.redex = redex_;
                               out_.push_back(std::move(st));
                           }
                       },
                       [&](const auto&) {},
                   },
                   t.proc->node);
    }

    const QueueItem* front(const std::string& chan) const
    {
        auto it = c_.queues.find(chan);
        if (it == c_.queues.end() || it->second.empty()) return nullptr;
        return &it->second.front();
    }

    void link(size_t i, const Request& req)
    {
        // accepting threads for each participant 2..n, every combination
        std::vector<std::vector<size_t>> candidates;
        for (int p = 2; p <= req.n; ++p) {
            std::vector<size_t> cs;
            for (size_t j = 0; j < c_.soup.size(); ++j) {
                const auto* a = as<Accept>(c_.soup[j].proc);
                if (a && a->chan == req.chan && a->participant == p &&
                    a->session_chans.size() == req.session_chans.size())
                    cs.push_back(j);
            }
            if (cs.empty()) return;
            candidates.push_back(std::move(cs));
        }
        std::vector<size_t> pick(candidates.size(), 0);
        for (;;) {
            std::vector<size_t> chosen;
            for (size_t k = 0; k < candidates.size(); ++k) chosen.push_back(candidates[k][pick[k]]);
            fire_link(i, req, chosen);
            size_t k = 0;
            while (k < pick.size() && ++pick[k] == candidates[k].size()) pick[k++] = 0;
            if (k == pick.size()) break;
        }
    }

    void fire_link(size_t i, const Request& req, const std::vector<size_t>& accepts)
    {
        Config next = c_;
        const int sid = next.next_session++;
        SessionInfo info;
        info.id = sid;
        info.shared = req.chan;
        info.participants = req.n;
        for (const auto& s : req.session_chans) {
            std::string rt = s + "#" + std::to_string(sid);
            info.chans.push_back(rt);
            next.queues[rt];
            next.chan_session[rt] = sid;
        }
        auto start = [&](const Thread& t, const std::vector<std::string>& names, const ProcPtr& body, int p) {
            Subst s;
            for (size_t k = 0; k < names.size(); ++k) s[names[k]] = name_value(info.chans[k]);
            Thread th = t;
            th.proc = subst(body, s);
            th.roles[sid] = p;
            return th;
        };
        std::vector<Thread> started{start(c_.soup[i], req.session_chans, req.body, 1)};
        for (size_t k = 0; k < accepts.size(); ++k) {
            const auto* a = as<Accept>(c_.soup[accepts[k]].proc);
            started.push_back(start(c_.soup[accepts[k]], a->session_chans, a->body, a->participant));
        }
        std::vector<Thread> soup;
        for (size_t j = 0; j < next.soup.size(); ++j) {
            if (j == i)
                for (const auto& t : started) spawn(next, soup, t);
            else if (std::find(accepts.begin(), accepts.end(), j) == accepts.end())
                soup.push_back(next.soup[j]);
        }
        next.soup = std::move(soup);
        next.sessions[sid] = info;
        StepLabel l;
        l.kind = StepKind::Link;
        l.chans = info.chans;
        l.session = sid;
        l.participants = info.participants;
        l.payload = req.chan;
        emit(l, std::move(next));
    }

    void call(size_t i, const Call& n)
    {
        const Thread& t = c_.soup[i];
        FramePtr found;
        const Definition* def = nullptr;
        for (FramePtr f = t.frame; f && !def; f = f->parent) {
            for (const auto& d : f->defs)
                if (d.name == n.name) {
                    def = &d;
                    found = f;
                    break;
                }
        }
        if (!def) throw Error("E-EVAL", "unknown process '" + n.name + "'", t.proc->span);
        if (def->value_params.size() != n.args.size() || def->session_params.size() != n.session_args.size())
            throw Error("E-EVAL", "wrong number of arguments to '" + n.name + "'", t.proc->span);
        for (const auto& vs : outcomes(n.args)) {
            Subst s;
            for (size_t k = 0; k < vs.size(); ++k) s[def->value_params[k].name] = vs[k];
            for (size_t k = 0; k < n.session_args.size(); ++k)
                for (size_t m = 0; m < def->session_params[k].size() && m < n.session_args[k].size(); ++m)
                    s[def->session_params[k][m]] = name_value(n.session_args[k][m]);
            Thread th = t;
            th.proc = subst(def->body, s);
            th.frame = found;
            StepLabel l = label(StepKind::Def, t, "");
            l.def_name = n.name;
            l.payload = n.name;
            if (!vs.empty()) l.payload += "(" + values_text(vs) + ")";
            emit(l, replace(i, {th}, c_));
        }
    }

    const Config& c_;
    std::vector<Step> out_;
    size_t redex_ = 0;
};

}  // namespace

std::vector<Step> enabled_steps(const Config& c) { return Stepper(c).all(); }

std::vector<std::string> config_faults(const Config& c)
{
    std::vector<std::string> faults;
    auto head = [&](const std::string& chan) -> const QueueItem* {
        auto it = c.queues.find(chan);
        if (it == c.queues.end() || it->second.empty()) return nullptr;
        return &it->second.front();
    };
    auto sort_ok = [](const Value& v, const SimpleType& s) {
        switch (s.sort) {
        case BaseSort::Int: return std::holds_alternative<std::int64_t>(v);
        case BaseSort::Bool: return std::holds_alternative<bool>(v);
        case BaseSort::String: return std::holds_alternative<std::string>(v);
        case BaseSort::Shared: return std::holds_alternative<NameValue>(v);
        }
        return false;
    };
    for (size_t i = 0; i < c.soup.size(); ++i) {
        const ProcPtr& p = c.soup[i].proc;
        std::string who = "thread " + std::to_string(i) + ": ";
        if (const auto* n = as<Recv>(p)) {
            if (const auto* h = head(n->chan)) {
                const auto* vm = std::get_if<ValuesMsg>(&h->msg);
                if (!vm || vm->values.size() != n->vars.size()) {
                    faults.push_back(who + "receive on " + n->chan + " finds " + render(h->msg));
                } else {
                    for (size_t k = 0; k < n->vars.size(); ++k)
                        if (n->vars[k].sort && !sort_ok(vm->values[k], *n->vars[k].sort))
                            faults.push_back(who + "value " + render(vm->values[k]) + " for " + n->vars[k].name +
                                             ": " + render(*n->vars[k].sort));
                }
            }
        } else if (const auto* n = as<Branch>(p)) {
            if (const auto* h = head(n->chan)) {
                const auto* lm = std::get_if<LabelMsg>(&h->msg);
                if (!lm || std::none_of(n->branches.begin(), n->branches.end(),
                                        [&](const Labeled& b) { return b.label == lm->label; }))
                    faults.push_back(who + "branching on " + n->chan + " finds " + render(h->msg));
            }
        } else if (const auto* n = as<DelegRecv>(p)) {
            if (const auto* h = head(n->chan)) {
                const auto* cm = std::get_if<ChansMsg>(&h->msg);
                if (!cm || cm->chans.size() != n->chans.size())
                    faults.push_back(who + "session receive on " + n->chan + " finds " + render(h->msg));
            }
        } else if (as<Sync>(p)) {
            auto r = detail::sync_redex(c, i);
            if (r && r->common.empty() && i == *std::min_element(r->threads.begin(), r->threads.end()))
                faults.push_back(who + "all participants of session " + std::to_string(r->session) +
                                 " are at a sync without a common label");
        }
    }
    return faults;
}

}  // namespace mpst
