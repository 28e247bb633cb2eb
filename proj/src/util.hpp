#pragma once

#include <string>
#include <vector>

namespace mpst::detail {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

inline std::string join(const std::vector<std::string>& xs, const std::string& sep = ",")
{
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

}  // namespace mpst::detail
