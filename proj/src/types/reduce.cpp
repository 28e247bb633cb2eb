#include "mpst/syntax.hpp"
#include "mpst/types.hpp"

#include <algorithm>
#include <set>

namespace mpst {

namespace {

const LLabeled* find_label(const std::vector<LLabeled>& bs, const std::string& l)
{
    auto it = std::find_if(bs.begin(), bs.end(), [&](const LLabeled& b) { return b.label == l; });
    return it == bs.end() ? nullptr : &*it;
}

}  // namespace

std::vector<SessionEnv> type_reduce(const SessionEnv& env)
{
    std::vector<SessionEnv> out;
    std::set<std::string> seen;
    auto emit = [&](SessionEnv next) {
        if (seen.insert(render(next)).second) out.push_back(std::move(next));
    };

    std::vector<LocalPtr> heads;
    for (const auto& e : env) heads.push_back(unfold(e.type));

    for (size_t i = 0; i < env.size(); ++i) {
        for (size_t j = 0; j < env.size(); ++j) {
            if (i == j || env[i].chans != env[j].chans) continue;
            if (const auto* s = as<LSend>(heads[i])) {
                const auto* r = as<LRecv>(heads[j]);
                if (r && r->chan == s->chan && type_equal(s->msg, r->msg)) {
                    SessionEnv next = env;
                    next[i].type = s->cont;
                    next[j].type = r->cont;
                    emit(std::move(next));
                }
            }
            if (const auto* s = as<LSelect>(heads[i])) {
                const auto* b = as<LBranch>(heads[j]);
                if (!b || b->chan != s->chan) continue;
                for (const auto& sb : s->branches) {
                    const LLabeled* bb = find_label(b->branches, sb.label);
                    if (!bb) continue;
                    SessionEnv next = env;
                    next[i].type = sb.body;
                    next[j].type = bb->body;
                    emit(std::move(next));
                }
            }
        }
    }

    // symmetric sums: all n endpoints of one vector step together
    std::set<std::vector<std::string>> vectors;
    for (const auto& e : env) vectors.insert(e.chans);
    for (const auto& v : vectors) {
        std::vector<size_t> members;
        for (size_t i = 0; i < env.size(); ++i)
            if (env[i].chans == v) members.push_back(i);
        const int n = env[members.front()].participants;
        std::set<int> roles;
        bool all_sums = true;
        for (size_t i : members) {
            roles.insert(env[i].participant);
            all_sums = all_sums && as<LSum>(heads[i]) != nullptr;
        }
        if (!all_sums || static_cast<int>(roles.size()) != n || static_cast<int>(members.size()) != n) continue;
        for (const auto& b : as<LSum>(heads[members.front()])->branches) {
            SessionEnv next = env;
            bool common = true;
            for (size_t i : members) {
                const auto& bs = as<LSum>(heads[i])->branches;
                auto it = std::find_if(bs.begin(), bs.end(), [&](const LSumBranch& x) { return x.label == b.label; });
                if (it == bs.end()) {
                    common = false;
                    break;
                }
                next[i].type = it->body;
            }
            if (common) emit(std::move(next));
        }
    }
    return out;
}

}  // namespace mpst
