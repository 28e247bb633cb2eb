#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mpst {

struct SourceSpan {
    std::string file;
    int start_line = 0;
    int start_col = 0;
    int end_line = 0;
    int end_col = 0;

    bool valid() const { return start_line > 0; }

    /// True when `inner` lies between this span's start and end (inclusive).
    bool contains(const SourceSpan& inner) const;

    static SourceSpan join(const SourceSpan& a, const SourceSpan& b);
};

struct Diagnostic {
    std::string code;
    std::string message;
    SourceSpan span;
    std::string context;  // typing rule or phase that raised it, may be empty
};

/// `file:line:col: CODE: message` (location omitted when the span is unset).
std::string format_diagnostic(const Diagnostic& d);

class Error : public std::runtime_error {
public:
    explicit Error(Diagnostic d);
    explicit Error(std::vector<Diagnostic> ds);
    Error(std::string code, std::string message, SourceSpan span = {});

    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
    const std::string& code() const { return diagnostics_.front().code; }

private:
    std::vector<Diagnostic> diagnostics_;
};

}  // namespace mpst
