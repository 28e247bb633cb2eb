#include "internal.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace mpst {

ExploreResult explore(const Config& init, const ExploreOptions& opts)
{
    ExploreResult g;
    std::unordered_map<std::string, size_t> index;
    auto add = [&](Config c, int depth) {
        auto [it, fresh] = index.emplace(config_key(c), g.nodes.size());
        if (fresh) {
            if (g.nodes.size() >= opts.max_nodes)
                throw Error("E-BOUND", "more than " + std::to_string(opts.max_nodes) + " configurations reachable");
            g.success_reachable = g.success_reachable || c.success;
            g.nodes.push_back(ExploreNode{std::move(c), depth, {}, {}});
        }
        return it->second;
    };
    add(init, 0);
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        g.nodes[i].faults = config_faults(g.nodes[i].config);
        for (const auto& f : g.nodes[i].faults) g.faults.push_back("node " + std::to_string(i) + ": " + f);
        auto steps = enabled_steps(g.nodes[i].config);
        if (steps.empty()) {
            if (terminated(g.nodes[i].config))
                ++g.terminal;
            else
                ++g.stuck;
            continue;
        }
        if (g.nodes[i].depth >= opts.depth) {
            g.truncated = true;
            continue;
        }
        const int depth = g.nodes[i].depth + 1;
        for (auto& s : steps) {
            size_t j = add(std::move(s.next), depth);
            g.nodes[i].edges.emplace_back(std::move(s.label), j);
        }
    }
    return g;
}

std::set<std::vector<std::string>> decision_traces(const ExploreResult& g)
{
    using Traces = std::set<std::vector<std::string>>;
    std::vector<std::optional<Traces>> memo(g.nodes.size());
    std::vector<char> on_stack(g.nodes.size(), 0);
    std::function<const Traces&(size_t)> visit = [&](size_t n) -> const Traces& {
        static const Traces none;
        if (memo[n]) return *memo[n];
        if (on_stack[n]) return none;
        on_stack[n] = 1;
        Traces out;
        const auto& node = g.nodes[n];
        if (node.edges.empty() && terminated(node.config)) out.insert(std::vector<std::string>{});
        for (const auto& [label, next] : node.edges) {
            const bool decision = label.kind == StepKind::Label || label.kind == StepKind::Sync;
            for (const auto& suffix : visit(next)) {
                std::vector<std::string> t;
                if (decision) t.push_back(label.label);
                t.insert(t.end(), suffix.begin(), suffix.end());
                out.insert(std::move(t));
            }
        }
        on_stack[n] = 0;
        memo[n] = std::move(out);
        return *memo[n];
    };
    if (g.nodes.empty()) return {};
    return visit(0);
}

bool find_run(const Config& init, const std::vector<std::string>& obs,
              const std::function<std::optional<std::string>(const StepLabel&)>& observe, bool to_end,
              size_t max_nodes)
{
    std::unordered_set<std::string> seen;
    std::vector<std::pair<Config, size_t>> stack{{init, 0}};
    while (!stack.empty()) {
        auto [c, idx] = std::move(stack.back());
        stack.pop_back();
        if (!seen.insert(std::to_string(idx) + "|" + config_key(c)).second) continue;
        if (seen.size() > max_nodes)
            throw Error("E-BOUND", "more than " + std::to_string(max_nodes) + " states searched");
        auto steps = enabled_steps(c);
        if (idx == obs.size() && (!to_end || (steps.empty() && terminated(c)))) return true;
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
            auto o = observe(it->label);
            if (!o)
                stack.emplace_back(std::move(it->next), idx);
            else if (idx < obs.size() && *o == obs[idx])
                stack.emplace_back(std::move(it->next), idx + 1);
        }
    }
    return false;
}

}  // namespace mpst
