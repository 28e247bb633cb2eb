#include "mpst/diagnostics.hpp"

#include <tuple>

namespace mpst {

bool SourceSpan::contains(const SourceSpan& inner) const
{
    if (!valid() || !inner.valid()) return false;
    auto before = [](int l1, int c1, int l2, int c2) { return std::tie(l1, c1) <= std::tie(l2, c2); };
    return before(start_line, start_col, inner.start_line, inner.start_col) &&
           before(inner.end_line, inner.end_col, end_line, end_col);
}

SourceSpan SourceSpan::join(const SourceSpan& a, const SourceSpan& b)
{
    if (!a.valid()) return b;
    if (!b.valid()) return a;
    SourceSpan s = a;
    if (std::tie(b.start_line, b.start_col) < std::tie(s.start_line, s.start_col)) {
        s.start_line = b.start_line;
        s.start_col = b.start_col;
    }
    if (std::tie(b.end_line, b.end_col) > std::tie(s.end_line, s.end_col)) {
        s.end_line = b.end_line;
        s.end_col = b.end_col;
    }
    return s;
}

std::string format_diagnostic(const Diagnostic& d)
{
    std::string out;
    if (d.span.valid())
        out = d.span.file + ":" + std::to_string(d.span.start_line) + ":" + std::to_string(d.span.start_col) + ": ";
    out += d.code + ": " + d.message;
    if (!d.context.empty()) out += " [" + d.context + "]";
    return out;
}

namespace {

std::string summary(const std::vector<Diagnostic>& ds)
{
    std::string out;
    for (const auto& d : ds) {
        if (!out.empty()) out += "\n";
        out += format_diagnostic(d);
    }
    return out;
}

}  // namespace

Error::Error(Diagnostic d) : Error(std::vector<Diagnostic>{std::move(d)}) {}

Error::Error(std::vector<Diagnostic> ds) : std::runtime_error(summary(ds)), diagnostics_(std::move(ds))
{
    if (diagnostics_.empty()) diagnostics_.push_back({"E-INTERNAL", "unspecified error", {}, {}});
}

Error::Error(std::string code, std::string message, SourceSpan span)
    : Error(Diagnostic{std::move(code), std::move(message), std::move(span), {}})
{
}

}  // namespace mpst
