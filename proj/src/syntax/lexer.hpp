#pragma once

#include "mpst/diagnostics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mpst::detail {

enum class Tok {
    Ident,
    Int,
    String,
    Send3,      // <<<
    Send2,      // <<
    Recv2,      // >>
    SelectOp,   // <:
    BranchOp,   // :>
    Arrow,      // =>
    DotDot,     // ..
    EqEq,       // ==
    Le,         // <=
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Lt,
    Gt,
    Comma,
    Semi,
    Dot,
    Colon,
    Bar,
    Slash,
    Hash,
    Caret,
    At,
    Assign,
    Plus,
    Minus,
    Eof,
};

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
};

std::vector<Token> lex(std::string_view text, const std::string& file);

const char* token_name(Tok t);

}  // namespace mpst::detail
