#include "lexer.hpp"

#include <cctype>

namespace mpst::detail {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Cursor {
    std::string_view text;
    std::string file;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    char peek(size_t ahead = 0) const { return pos + ahead < text.size() ? text[pos + ahead] : '\0'; }
    bool starts(std::string_view s) const { return text.substr(pos, s.size()) == s; }

    void advance(size_t n = 1)
    {
        for (size_t i = 0; i < n && pos < text.size(); ++i) {
            if (text[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++pos;
        }
    }
};

}  // namespace

const char* token_name(Tok t)
{
    switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string literal";
    case Tok::Send3: return "'<<<'";
    case Tok::Send2: return "'<<'";
    case Tok::Recv2: return "'>>'";
    case Tok::SelectOp: return "'<:'";
    case Tok::BranchOp: return "':>'";
    case Tok::Arrow: return "'=>'";
    case Tok::DotDot: return "'..'";
    case Tok::EqEq: return "'=='";
    case Tok::Le: return "'<='";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Lt: return "'<'";
    case Tok::Gt: return "'>'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Dot: return "'.'";
    case Tok::Colon: return "':'";
    case Tok::Bar: return "'|'";
    case Tok::Slash: return "'/'";
    case Tok::Hash: return "'#'";
    case Tok::Caret: return "'^'";
    case Tok::At: return "'@'";
    case Tok::Assign: return "'='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Eof: return "end of input";
    }
    return "?";
}

std::vector<Token> lex(std::string_view text, const std::string& file)
{
    static const struct {
        std::string_view spelling;
        Tok kind;
    } punct[] = {
        {"<<<", Tok::Send3}, {"<<", Tok::Send2},  {">>", Tok::Recv2},    {"<:", Tok::SelectOp},
        {":>", Tok::BranchOp}, {"=>", Tok::Arrow}, {"..", Tok::DotDot},  {"==", Tok::EqEq},
        {"<=", Tok::Le},      {"(", Tok::LParen},  {")", Tok::RParen},   {"{", Tok::LBrace},
        {"}", Tok::RBrace},   {"[", Tok::LBracket}, {"]", Tok::RBracket}, {"<", Tok::Lt},
        {">", Tok::Gt},       {",", Tok::Comma},   {";", Tok::Semi},     {".", Tok::Dot},
        {":", Tok::Colon},    {"|", Tok::Bar},     {"/", Tok::Slash},    {"#", Tok::Hash},
        {"^", Tok::Caret},    {"@", Tok::At},      {"=", Tok::Assign},   {"+", Tok::Plus},
        {"-", Tok::Minus},
    };

    Cursor c{text, file};
    std::vector<Token> out;
    auto here = [&] { return SourceSpan{file, c.line, c.col, c.line, c.col}; };

    while (true) {
        // whitespace and comments
        while (true) {
            char ch = c.peek();
            if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
                c.advance();
            } else if (c.starts("//")) {
                while (c.peek() != '\n' && c.peek() != '\0') c.advance();
            } else {
                break;
            }
        }
        SourceSpan span = here();
        if (c.pos >= text.size()) {
            out.push_back({Tok::Eof, "", span});
            break;
        }
        char ch = c.peek();
        Token tok;
        if (ident_start(ch)) {
            size_t start = c.pos;
            while (ident_char(c.peek())) c.advance();
            tok = {Tok::Ident, std::string(text.substr(start, c.pos - start)), span};
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            size_t start = c.pos;
            while (std::isdigit(static_cast<unsigned char>(c.peek()))) c.advance();
            if (ident_start(c.peek()))
                throw Error("E-PARSE", "malformed number", span);
            tok = {Tok::Int, std::string(text.substr(start, c.pos - start)), span};
        } else if (ch == '"') {
            c.advance();
            std::string s;
            while (true) {
                char d = c.peek();
                if (d == '\0' || d == '\n') throw Error("E-PARSE", "unterminated string literal", span);
                if (d == '"') {
                    c.advance();
                    break;
                }
                if (d == '\\') {
                    c.advance();
                    char e = c.peek();
                    switch (e) {
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    default: throw Error("E-PARSE", "unknown escape in string literal", here());
                    }
                    c.advance();
                    continue;
                }
                s += d;
                c.advance();
            }
            tok = {Tok::String, std::move(s), span};
        } else {
            bool matched = false;
            for (const auto& p : punct) {
                if (c.starts(p.spelling)) {
                    c.advance(p.spelling.size());
                    tok = {p.kind, std::string(p.spelling), span};
                    matched = true;
                    break;
                }
            }
            if (!matched)
                throw Error("E-PARSE", std::string("unexpected character '") + ch + "'", span);
        }
        // end position is the last character of the token
        tok.span.end_line = c.line;
        tok.span.end_col = c.col > 1 ? c.col - 1 : c.col;
        out.push_back(std::move(tok));
    }
    return out;
}

}  // namespace mpst::detail
