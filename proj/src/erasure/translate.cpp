#include "mpst/erasure.hpp"
#include "mpst/syntax.hpp"
#include "util.hpp"

#include <algorithm>

namespace mpst {

using detail::overloaded;

std::string cases_label(std::vector<std::string> labels)
{
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (const auto& l : labels)
        if (l.empty() || l.find('_') != std::string::npos || !is_valid_label(l))
            throw Error("E-LABELCHARS", "label '" + l + "' cannot be encoded in a cases label");
    return "cases_" + detail::join(labels, "_");
}

std::vector<std::string> decode_cases_label(const std::string& label)
{
    const std::string prefix = "cases_";
    if (label.compare(0, prefix.size(), prefix) != 0 || !is_valid_label(label))
        throw Error("E-LABELCHARS", "'" + label + "' is not a cases label");
    std::vector<std::string> out;
    std::string rest = label.substr(prefix.size());
    size_t start = 0;
    while (start < rest.size()) {
        size_t cut = rest.find('_', start);
        if (cut == std::string::npos) cut = rest.size();
        out.push_back(rest.substr(start, cut - start));
        start = cut + 1;
    }
    return out;
}

Dimensions translated_dimensions(Dimensions d) { return {d.channels + 2 * d.participants, d.participants + 1}; }

namespace {

// Every M ∪ S for S ⊆ L, ordered by cases label.
std::vector<std::vector<std::string>> offer_sets(const GSum& s)
{
    std::vector<std::string> optional, mandatory;
    for (const auto& b : s.branches) (b.mandatory ? mandatory : optional).push_back(b.label);
    std::vector<std::vector<std::string>> out;
    for (size_t bits = 0; bits < (size_t{1} << optional.size()); ++bits) {
        std::vector<std::string> set = mandatory;
        for (size_t i = 0; i < optional.size(); ++i)
            if (bits & (size_t{1} << i)) set.push_back(optional[i]);
        if (set.empty()) continue;
        std::sort(set.begin(), set.end());
        out.push_back(std::move(set));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return cases_label(a) < cases_label(b); });
    return out;
}

class Translator {
public:
    explicit Translator(Dimensions d) : m_(d.channels), n_(d.participants) {}

    GlobalPtr tr(const GlobalPtr& g)
    {
        return std::visit(
            overloaded{
                [&](const GExchange& x) { return make_global(GExchange{x.from, x.to, x.chan, x.msg, tr(x.cont)}, g->span); },
                [&](const GBranch& x) {
                    GBranch out{x.from, x.to, x.chan, {}};
                    for (const auto& b : x.branches) {
                        GBranch notify{x.from, n_ + 1, m_ + 2 * x.from, {{b.label, tr(b.body)}}};
                        out.branches.push_back({b.label, make_global(notify)});
                    }
                    return make_global(out, g->span);
                },
                [&](const GMu& x) { return make_global(GMu{x.var, tr(x.body)}, g->span); },
                [&](const GVar&) { return g; },
                [&](const GEnd&) { return g; },
                [&](const GSum& x) {
                    for (const auto& b : x.branches) cases_label({b.label});
                    std::map<std::string, GlobalPtr> bodies;
                    for (const auto& b : x.branches) bodies[b.label] = tr(b.body);
                    std::vector<std::vector<std::string>> chosen;
                    return offers(offer_sets(x), chosen, bodies);
                },
            },
            g->node);
    }

private:
    GlobalPtr offers(const std::vector<std::vector<std::string>>& sets, std::vector<std::vector<std::string>>& chosen,
                     const std::map<std::string, GlobalPtr>& bodies)
    {
        const int i = static_cast<int>(chosen.size()) + 1;
        if (i > n_) return replies(chosen, bodies);
        GBranch b{i, n_ + 1, m_ + 2 * i, {}};
        for (const auto& s : sets) {
            chosen.push_back(s);
            b.branches.push_back({cases_label(s), offers(sets, chosen, bodies)});
            chosen.pop_back();
        }
        return make_global(b);
    }

    GlobalPtr replies(const std::vector<std::vector<std::string>>& chosen, const std::map<std::string, GlobalPtr>& bodies)
    {
        std::vector<std::string> common = chosen.front();
        for (const auto& s : chosen) {
            std::vector<std::string> both;
            std::set_intersection(common.begin(), common.end(), s.begin(), s.end(), std::back_inserter(both));
            common = std::move(both);
        }
        GBranch top{n_ + 1, 1, m_ + 1, {}};
        for (const auto& l : common) {
            GlobalPtr body = bodies.at(l);
            for (int i = n_; i >= 2; --i) body = make_global(GBranch{n_ + 1, i, m_ + 2 * i - 1, {{l, body}}});
            top.branches.push_back({l, body});
        }
        return make_global(top);
    }

    int m_;
    int n_;
};

}  // namespace

GlobalPtr translate_global(const GlobalPtr& g, Dimensions dims) { return Translator(dims).tr(g); }

GlobalPtr translate_global(const GlobalPtr& g) { return translate_global(g, dimensions(g)); }

GlobalEnv translate_env(const GlobalEnv& gamma)
{
    GlobalEnv out = gamma;
    for (auto& [name, decl] : out.types) {
        Dimensions d = declared_dimensions(decl);
        Dimensions t = translated_dimensions(d);
        decl.type = translate_global(decl.type, d);
        decl.dims = std::make_pair(t.channels, t.participants);
    }
    for (auto& [name, sd] : out.shared) {
        sd.type = translate_global(sd.type, sd.dims);
        sd.dims = translated_dimensions(sd.dims);
    }
    return out;
}

}  // namespace mpst
