#pragma once

// Independent counting oracles over global types.

#include "mpst/types.hpp"

#include <set>
#include <string>
#include <vector>

namespace mpst::test {

// Arm-index sequences through the sums of G for n participants: each
// participant picks one of its offer sets, then every common label continues.
inline std::set<std::vector<size_t>> sum_paths(const GlobalPtr& g, int n)
{
    using Paths = std::set<std::vector<size_t>>;
    if (const auto* e = as<GExchange>(g)) return sum_paths(e->cont, n);
    if (const auto* b = as<GBranch>(g)) {
        Paths out;
        for (size_t i = 0; i < b->branches.size(); ++i)
            for (auto p : sum_paths(b->branches[i].body, n)) {
                p.insert(p.begin(), i);
                out.insert(p);
            }
        return out;
    }
    if (const auto* s = as<GSum>(g)) {
        std::vector<std::string> opt, mand;
        for (const auto& b : s->branches) (b.mandatory ? mand : opt).push_back(b.label);
        const size_t k = size_t{1} << opt.size();
        Paths out;
        // choices as a base-k number with n digits
        size_t total = 1;
        for (int i = 0; i < n; ++i) total *= k;
        for (size_t code = 0; code < total; ++code) {
            std::vector<size_t> digits;
            std::set<std::string> common(opt.begin(), opt.end());
            for (size_t c = code, i = 0; i < static_cast<size_t>(n); ++i, c /= k) {
                size_t bits = c % k;
                digits.push_back(bits);
                for (size_t j = 0; j < opt.size(); ++j)
                    if (!(bits & (size_t{1} << j))) common.erase(opt[j]);
            }
            common.insert(mand.begin(), mand.end());
            for (const auto& b : s->branches)
                if (common.count(b.label))
                    for (auto p : sum_paths(b.body, n)) {
                        p.insert(p.begin(), digits.begin(), digits.end());
                        out.insert(p);
                    }
        }
        return out;
    }
    return {std::vector<size_t>{}};
}

}  // namespace mpst::test
