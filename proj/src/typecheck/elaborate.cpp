#include "mpst/typecheck.hpp"
#include "util.hpp"

#include <algorithm>

namespace mpst {

using detail::overloaded;

ProcPtr elaborate(const Derivation& d)
{
    auto sub = [&](size_t i) { return elaborate(d.premises.at(i)); };
    const ProcPtr& p = d.process;
    Process::Node node = std::visit(
        overloaded{
            [&](const Sync& n) -> Process::Node {
                Sync out = n;
                LocalPtr head = unfold(d.session_type);
                const LSum* sum = as<LSum>(head);
                for (size_t i = 0; i < out.branches.size(); ++i) {
                    auto& b = out.branches[i];
                    b.body = sub(i);
                    auto it = std::find_if(sum->branches.begin(), sum->branches.end(),
                                           [&](const LSumBranch& x) { return x.label == b.label; });
                    b.mandatory = it->mandatory;
                }
                return out;
            },
            [&](const Rand& n) -> Process::Node {
                Rand out = n;
                for (size_t i = 0; i < out.branches.size(); ++i) out.branches[i] = sub(i);
                return out;
            },
            [&](const Request& n) -> Process::Node {
                Request out = n;
                out.body = sub(0);
                return out;
            },
            [&](const Accept& n) -> Process::Node {
                Accept out = n;
                out.body = sub(0);
                return out;
            },
            [&](const Send& n) -> Process::Node {
                Send out = n;
                out.cont = sub(0);
                return out;
            },
            [&](const Recv& n) -> Process::Node {
                Recv out = n;
                LocalPtr head = unfold(d.session_type);
                const auto& sorts = as<LRecv>(head)->msg.sorts();
                for (size_t i = 0; i < out.vars.size(); ++i) out.vars[i].sort = sorts[i];
                out.cont = sub(0);
                return out;
            },
            [&](const Delegate& n) -> Process::Node {
                Delegate out = n;
                out.cont = sub(0);
                return out;
            },
            [&](const DelegRecv& n) -> Process::Node {
                DelegRecv out = n;
                out.cont = sub(0);
                return out;
            },
            [&](const Select& n) -> Process::Node {
                Select out = n;
                out.cont = sub(0);
                return out;
            },
            [&](const Branch& n) -> Process::Node {
                Branch out = n;
                for (size_t i = 0; i < out.branches.size(); ++i) out.branches[i].body = sub(i);
                return out;
            },
            [&](const If& n) -> Process::Node {
                If out = n;
                out.then_branch = sub(0);
                out.else_branch = sub(1);
                return out;
            },
            [&](const Par& n) -> Process::Node {
                Par out = n;
                out.left = sub(0);
                out.right = sub(1);
                return out;
            },
            [&](const Restrict& n) -> Process::Node {
                Restrict out = n;
                out.body = sub(0);
                return out;
            },
            [&](const Def& n) -> Process::Node {
                Def out = n;
                for (size_t i = 0; i < out.defs.size(); ++i) {
                    auto& df = out.defs[i];
                    df.body = sub(i);
                    for (size_t j = 0; j < df.value_params.size(); ++j)
                        df.value_params[j].sort = d.sigs.at(i).value_sorts.at(j);
                }
                out.body = sub(out.defs.size());
                return out;
            },
            [&](const auto& n) -> Process::Node { return n; },
        },
        p->node);
    return make_proc(std::move(node), p->span);
}

}  // namespace mpst
