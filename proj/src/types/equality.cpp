#include "mpst/syntax.hpp"
#include "mpst/types.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace mpst {

namespace {

class Bisim {
public:
    bool equal(const LocalPtr& a0, const LocalPtr& b0)
    {
        if (a0 == b0) return true;
        LocalPtr a = a0;
        LocalPtr b = b0;
        if (as<LMu>(a) || as<LMu>(b)) {
            // coinduction: a pair met again under unfolding is assumed equal
            auto key = std::make_pair(render(a), render(b));
            if (!seen_.insert(key).second) return true;
            a = unfold(a);
            b = unfold(b);
        }
        if (a->node.index() != b->node.index()) return false;

        if (const auto* x = as<LSend>(a)) {
            const auto* y = as<LSend>(b);
            return x->chan == y->chan && msg_equal(x->msg, y->msg) && equal(x->cont, y->cont);
        }
        if (const auto* x = as<LRecv>(a)) {
            const auto* y = as<LRecv>(b);
            return x->chan == y->chan && msg_equal(x->msg, y->msg) && equal(x->cont, y->cont);
        }
        if (const auto* x = as<LSelect>(a)) {
            const auto* y = as<LSelect>(b);
            return x->chan == y->chan && labelled_equal(x->branches, y->branches);
        }
        if (const auto* x = as<LBranch>(a)) {
            const auto* y = as<LBranch>(b);
            return x->chan == y->chan && labelled_equal(x->branches, y->branches);
        }
        if (const auto* x = as<LSum>(a)) {
            const auto* y = as<LSum>(b);
            if (x->branches.size() != y->branches.size()) return false;
            for (const auto& xb : x->branches) {
                auto it = std::find_if(y->branches.begin(), y->branches.end(),
                                       [&](const LSumBranch& l) { return l.label == xb.label; });
                if (it == y->branches.end() || it->mandatory != xb.mandatory || !equal(xb.body, it->body))
                    return false;
            }
            return true;
        }
        if (const auto* x = as<LVar>(a)) return x->name == as<LVar>(b)->name;
        return true;  // end
    }

    bool msg_equal(const MsgType& a, const MsgType& b)
    {
        if (a.is_session() != b.is_session()) return false;
        if (!a.is_session()) return a.sorts() == b.sorts();
        const auto& x = a.session();
        const auto& y = b.session();
        if (x.participant != y.participant || x.channels != y.channels || x.participants != y.participants)
            return false;
        Bisim inner;
        return inner.equal(x.type, y.type);
    }

private:
    bool labelled_equal(const std::vector<LLabeled>& xs, const std::vector<LLabeled>& ys)
    {
        if (xs.size() != ys.size()) return false;
        for (const auto& x : xs) {
            auto it = std::find_if(ys.begin(), ys.end(), [&](const LLabeled& l) { return l.label == x.label; });
            if (it == ys.end() || !equal(x.body, it->body)) return false;
        }
        return true;
    }

    std::set<std::pair<std::string, std::string>> seen_;
};

}  // namespace

bool type_equal(const LocalPtr& a, const LocalPtr& b)
{
    Bisim bs;
    return bs.equal(a, b);
}

bool type_equal(const MsgType& a, const MsgType& b)
{
    Bisim bs;
    return bs.msg_equal(a, b);
}

}  // namespace mpst
