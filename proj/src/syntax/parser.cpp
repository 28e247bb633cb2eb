#include "lexer.hpp"
#include "mpst/syntax.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_set>

namespace mpst {

using detail::Tok;
using detail::Token;

namespace {

const std::unordered_set<std::string> kKeywords = {
    "end", "succ", "rec", "sync", "guisync", "rand", "if",  "then", "else", "def",    "and",
    "in",  "not",  "or",  "true", "false",   "nu",   "type", "chan", "Int", "Bool", "String",
};

bool plain_label(std::string_view s)
{
    if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

class Parser {
public:
    Parser(std::string_view text, const std::string& file) : toks_(detail::lex(text, file)) {}

    // ---------------------------------------------------------------- helpers

    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at(Tok t, size_t k = 0) const { return peek(k).kind == t; }
    bool at_kw(std::string_view kw, size_t k = 0) const { return at(Tok::Ident, k) && peek(k).text == kw; }

    const Token& next()
    {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        last_ = t.span;
        return t;
    }

    [[noreturn]] void fail(const std::string& msg, const SourceSpan& span) const { throw Error("E-PARSE", msg, span); }

    [[noreturn]] void unexpected(const std::string& wanted) const
    {
        const Token& t = peek();
        std::string got = t.kind == Tok::Eof ? "end of input" : "'" + t.text + "'";
        fail("expected " + wanted + ", found " + got, t.span);
    }

    const Token& expect(Tok t)
    {
        if (!at(t)) unexpected(detail::token_name(t));
        return next();
    }

    void expect_kw(std::string_view kw)
    {
        if (!at_kw(kw)) unexpected("'" + std::string(kw) + "'");
        next();
    }

    bool accept(Tok t)
    {
        if (!at(t)) return false;
        next();
        return true;
    }

    SourceSpan from(const SourceSpan& start) const { return SourceSpan::join(start, last_); }

    std::string ident(const char* what = "identifier")
    {
        if (!at(Tok::Ident) || kKeywords.count(peek().text)) unexpected(what);
        return next().text;
    }

    std::string label()
    {
        if (!at(Tok::Ident)) unexpected("label");
        const Token& t = next();
        if (!is_valid_label(t.text))
            throw Error("E-LABEL", "label '" + t.text + "' must match [A-Za-z][A-Za-z0-9]*", t.span);
        return t.text;
    }

    int integer(const char* what = "integer")
    {
        if (!at(Tok::Int)) unexpected(what);
        const Token& t = next();
        int v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size()) fail("integer out of range", t.span);
        return v;
    }

    int positive(const char* what)
    {
        SourceSpan s = peek().span;
        int v = integer(what);
        if (v < 1) fail(std::string(what) + " must be at least 1", s);
        return v;
    }

    void finish()
    {
        if (!at(Tok::Eof)) unexpected("end of input");
    }

    template <class F>
    void comma_list(Tok close, F&& item)
    {
        if (at(close)) return;
        do {
            item();
        } while (accept(Tok::Comma));
    }

    std::vector<std::string> name_list()
    {
        std::vector<std::string> out;
        expect(Tok::LParen);
        comma_list(Tok::RParen, [&] { out.push_back(ident("channel name")); });
        expect(Tok::RParen);
        return out;
    }

    void check_unique(std::vector<std::pair<std::string, SourceSpan>> labels, const char* what)
    {
        std::set<std::string> seen;
        for (auto& [l, span] : labels)
            if (!seen.insert(l).second) fail(std::string("duplicate ") + what + " label '" + l + "'", span);
    }

    // ------------------------------------------------------------ expressions

    Value literal_value()
    {
        if (at(Tok::Int)) return int_value(int64_token(false));
        if (at(Tok::Minus)) {
            next();
            return int_value(int64_token(true));
        }
        if (at(Tok::String)) return string_value(next().text);
        if (at_kw("true")) {
            next();
            return bool_value(true);
        }
        if (at_kw("false")) {
            next();
            return bool_value(false);
        }
        unexpected("literal value");
    }

    std::int64_t int64_token(bool negate)
    {
        if (!at(Tok::Int)) unexpected("integer");
        const Token& t = next();
        std::string text = negate ? "-" + t.text : t.text;
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || p != text.data() + text.size()) fail("integer out of range", t.span);
        return v;
    }

    ExprPtr expr() { return or_expr(); }

    ExprPtr or_expr()
    {
        SourceSpan start = peek().span;
        ExprPtr lhs = and_expr();
        while (at_kw("or")) {
            next();
            ExprPtr rhs = and_expr();
            lhs = make_expr(Binary{BinaryOp::Or, lhs, rhs}, from(start));
        }
        return lhs;
    }

    ExprPtr and_expr()
    {
        SourceSpan start = peek().span;
        ExprPtr lhs = cmp_expr();
        while (at_kw("and")) {
            next();
            ExprPtr rhs = cmp_expr();
            lhs = make_expr(Binary{BinaryOp::And, lhs, rhs}, from(start));
        }
        return lhs;
    }

    ExprPtr cmp_expr()
    {
        SourceSpan start = peek().span;
        ExprPtr lhs = add_expr();
        std::optional<BinaryOp> op;
        if (at(Tok::EqEq)) op = BinaryOp::Eq;
        else if (at(Tok::Lt)) op = BinaryOp::Lt;
        else if (at(Tok::Le)) op = BinaryOp::Le;
        if (!op) return lhs;
        next();
        ExprPtr rhs = add_expr();
        return make_expr(Binary{*op, lhs, rhs}, from(start));
    }

    ExprPtr add_expr()
    {
        SourceSpan start = peek().span;
        ExprPtr lhs = unary_expr();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            BinaryOp op = next().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            ExprPtr rhs = unary_expr();
            lhs = make_expr(Binary{op, lhs, rhs}, from(start));
        }
        return lhs;
    }

    ExprPtr unary_expr()
    {
        SourceSpan start = peek().span;
        if (at_kw("not")) {
            next();
            ExprPtr e = unary_expr();
            return make_expr(Unary{UnaryOp::Not, e}, from(start));
        }
        return primary_expr();
    }

    ExprPtr primary_expr()
    {
        SourceSpan start = peek().span;
        if (at(Tok::LParen)) {
            next();
            ExprPtr e = expr();
            expect(Tok::RParen);
            // widen to the parentheses so spans nest
            return make_expr(e->node, from(start));
        }
        if (at_kw("rand")) {
            next();
            expect(Tok::LBrace);
            std::vector<Value> vals;
            comma_list(Tok::RBrace, [&] { vals.push_back(literal_value()); });
            expect(Tok::RBrace);
            if (vals.empty()) fail("rand expression needs at least one value", from(start));
            return make_expr(RandExpr{std::move(vals)}, from(start));
        }
        if (at(Tok::Ident) && !kKeywords.count(peek().text))
            return make_expr(VarRef{next().text}, from(start));
        Value v = literal_value();
        return make_expr(Lit{std::move(v)}, from(start));
    }

    // ------------------------------------------------------------------ types

    SimpleType simple_type()
    {
        if (!at(Tok::Ident)) unexpected("sort");
        const std::string& t = peek().text;
        if (t == "Int") return next(), SimpleType{BaseSort::Int, ""};
        if (t == "Bool") return next(), SimpleType{BaseSort::Bool, ""};
        if (t == "String") return next(), SimpleType{BaseSort::String, ""};
        return SimpleType{BaseSort::Shared, ident("sort")};
    }

    // after the opening '<'
    MsgType msg_type()
    {
        MsgType m;
        if (at(Tok::LBracket)) {
            next();
            LocalPtr t = local_type();
            expect(Tok::RBracket);
            expect(Tok::At);
            expect(Tok::LParen);
            SessionAt sa;
            sa.type = t;
            sa.participant = positive("participant");
            expect(Tok::Comma);
            sa.channels = positive("channel count");
            expect(Tok::Comma);
            sa.participants = positive("participant count");
            expect(Tok::RParen);
            if (sa.participant > sa.participants) fail("participant exceeds participant count", last_);
            m.payload = std::move(sa);
        } else {
            std::vector<SimpleType> sorts;
            comma_list(Tok::Gt, [&] { sorts.push_back(simple_type()); });
            m.payload = std::move(sorts);
        }
        expect(Tok::Gt);
        return m;
    }

    void type_sep()
    {
        if (!accept(Tok::Semi) && !accept(Tok::Dot)) unexpected("';'");
    }

    GlobalPtr global_type()
    {
        SourceSpan start = peek().span;
        if (at(Tok::LParen)) {
            next();
            GlobalPtr g = global_type();
            expect(Tok::RParen);
            return make_global(g->node, from(start));
        }
        if (at_kw("end")) {
            next();
            return make_global(GEnd{}, from(start));
        }
        if (at_kw("rec")) {
            next();
            std::string v = ident("recursion variable");
            type_sep_dot();
            GlobalPtr body = global_type();
            return make_global(GMu{v, body}, from(start));
        }
        if (at(Tok::LBrace)) {
            next();
            GSum sum;
            std::vector<std::pair<std::string, SourceSpan>> seen;
            comma_list(Tok::RBrace, [&] {
                bool mand = sum_marker();
                SourceSpan ls = peek().span;
                std::string l = label();
                seen.emplace_back(l, ls);
                expect(Tok::Colon);
                sum.branches.push_back({l, mand, global_type()});
            });
            expect(Tok::RBrace);
            check_unique(seen, "sum");
            check_sum(sum.branches, from(start));
            return make_global(std::move(sum), from(start));
        }
        if (at(Tok::Int)) {
            int p = positive("participant");
            expect(Tok::Arrow);
            int q = positive("participant");
            expect(Tok::Colon);
            int k = positive("channel");
            if (p == q) fail("sender and receiver must differ", from(start));
            if (at(Tok::Lt)) {
                next();
                MsgType m = msg_type();
                type_sep();
                GlobalPtr cont = global_type();
                return make_global(GExchange{p, q, k, std::move(m), cont}, from(start));
            }
            expect(Tok::LBrace);
            GBranch b{p, q, k, {}};
            std::vector<std::pair<std::string, SourceSpan>> seen;
            comma_list(Tok::RBrace, [&] {
                SourceSpan ls = peek().span;
                std::string l = label();
                seen.emplace_back(l, ls);
                expect(Tok::Colon);
                b.branches.push_back({l, global_type()});
            });
            expect(Tok::RBrace);
            if (b.branches.empty()) fail("branching needs at least one label", from(start));
            check_unique(seen, "branch");
            return make_global(std::move(b), from(start));
        }
        if (at(Tok::Ident) && !kKeywords.count(peek().text)) return make_global(GVar{next().text}, from(start));
        unexpected("global type");
    }

    LocalPtr local_type()
    {
        SourceSpan start = peek().span;
        if (at(Tok::LParen)) {
            next();
            LocalPtr t = local_type();
            expect(Tok::RParen);
            return make_local(t->node, from(start));
        }
        if (at_kw("end")) {
            next();
            return make_local(LEnd{}, from(start));
        }
        if (at_kw("rec")) {
            next();
            std::string v = ident("recursion variable");
            type_sep_dot();
            LocalPtr body = local_type();
            return make_local(LMu{v, body}, from(start));
        }
        if (at(Tok::LBrace)) {
            next();
            LSum sum;
            std::vector<std::pair<std::string, SourceSpan>> seen;
            comma_list(Tok::RBrace, [&] {
                bool mand = sum_marker();
                SourceSpan ls = peek().span;
                std::string l = label();
                seen.emplace_back(l, ls);
                expect(Tok::Colon);
                sum.branches.push_back({l, mand, local_type()});
            });
            expect(Tok::RBrace);
            check_unique(seen, "sum");
            check_sum(sum.branches, from(start));
            return make_local(std::move(sum), from(start));
        }
        if (at(Tok::Int)) {
            int k = positive("channel");
            if (at(Tok::Send3) || at(Tok::Recv2)) {
                bool send = next().kind == Tok::Send3;
                if (!send) expect(Tok::Lt);
                MsgType m = msg_type();
                type_sep();
                LocalPtr cont = local_type();
                if (send) return make_local(LSend{k, std::move(m), cont}, from(start));
                return make_local(LRecv{k, std::move(m), cont}, from(start));
            }
            bool select;
            if (at(Tok::SelectOp)) select = true;
            else if (at(Tok::BranchOp)) select = false;
            else unexpected("'<<<', '>>', '<:' or ':>'");
            next();
            expect(Tok::LBrace);
            std::vector<LLabeled> branches;
            std::vector<std::pair<std::string, SourceSpan>> seen;
            comma_list(Tok::RBrace, [&] {
                SourceSpan ls = peek().span;
                std::string l = label();
                seen.emplace_back(l, ls);
                expect(Tok::Colon);
                branches.push_back({l, local_type()});
            });
            expect(Tok::RBrace);
            if (branches.empty()) fail("branching needs at least one label", from(start));
            check_unique(seen, "branch");
            if (select) return make_local(LSelect{k, std::move(branches)}, from(start));
            return make_local(LBranch{k, std::move(branches)}, from(start));
        }
        if (at(Tok::Ident) && !kKeywords.count(peek().text)) return make_local(LVar{next().text}, from(start));
        unexpected("local type");
    }

    void type_sep_dot()
    {
        if (!accept(Tok::Dot) && !accept(Tok::Semi)) unexpected("'.'");
    }

    bool sum_marker()
    {
        if (accept(Tok::Caret)) return true;
        if (accept(Tok::Hash)) return false;
        unexpected("'#' or '^'");
    }

    template <class B>
    void check_sum(const std::vector<B>& branches, const SourceSpan& span)
    {
        if (branches.empty()) fail("sum needs at least one label", span);
        if (std::none_of(branches.begin(), branches.end(), [](const B& b) { return b.mandatory; }))
            throw Error("E-EMPTYMAND", "sum has no mandatory label (mark at least one with '^')", span);
    }

    // -------------------------------------------------------------- processes

    ProcPtr proc()
    {
        SourceSpan start = peek().span;
        ProcPtr lhs = prefix();
        while (at(Tok::Bar)) {
            next();
            ProcPtr rhs = prefix();
            lhs = make_proc(Par{lhs, rhs}, from(start));
        }
        return lhs;
    }

    // continuation after a prefix; omitted continuations mean inaction
    ProcPtr cont()
    {
        if (accept(Tok::Semi) || accept(Tok::Dot)) return prefix();
        return make_proc(Inact{}, last_);
    }

    std::vector<Param> params(bool require_sort)
    {
        std::vector<Param> out;
        comma_list(Tok::RParen, [&] {
            Param p{ident("variable"), std::nullopt};
            if (accept(Tok::Colon)) p.sort = simple_type();
            else if (require_sort) unexpected("':'");
            out.push_back(std::move(p));
        });
        return out;
    }

    ProcPtr prefix()
    {
        SourceSpan start = peek().span;
        if (at(Tok::Int) && peek().text == "0") {
            next();
            return make_proc(Inact{}, from(start));
        }
        if (at_kw("end")) {
            next();
            return make_proc(Inact{}, from(start));
        }
        if (at_kw("succ")) {
            next();
            return make_proc(Success{}, from(start));
        }
        if (at(Tok::LParen)) {
            next();
            if (at_kw("nu")) {
                next();
                std::string n = ident("name");
                expect(Tok::RParen);
                ProcPtr body = prefix();
                return make_proc(Restrict{n, body}, from(start));
            }
            ProcPtr p = proc();
            expect(Tok::RParen);
            return make_proc(p->node, from(start));
        }
        if (at(Tok::Slash)) {
            next();
            std::string a = ident("shared channel");
            expect(Tok::LBracket);
            SourceSpan lo = peek().span;
            if (integer("participant") != 2) fail("request ranges must start at participant 2", lo);
            expect(Tok::DotDot);
            SourceSpan hs = peek().span;
            int n = integer("participant count");
            if (n < 2) fail("participant count must be at least 2", hs);
            expect(Tok::RBracket);
            auto chans = name_list();
            expect(Tok::Dot);
            ProcPtr body = prefix();
            return make_proc(Request{a, n, std::move(chans), body}, from(start));
        }
        if (at_kw("sync") || at_kw("guisync")) {
            bool gui = next().text == "guisync";
            expect(Tok::LParen);
            auto chans = name_list();
            expect(Tok::Comma);
            int n = positive("participant count");
            expect(Tok::RParen);
            expect(Tok::LBrace);
            Sync s{std::move(chans), n, gui, {}};
            std::vector<std::pair<std::string, SourceSpan>> seen;
            comma_list(Tok::RBrace, [&] {
                SyncBranch b;
                b.mandatory = sum_marker();
                SourceSpan ls = peek().span;
                b.label = label();
                seen.emplace_back(b.label, ls);
                if (gui && accept(Tok::LParen)) {
                    b.args = params(true);
                    expect(Tok::RParen);
                }
                expect(Tok::Colon);
                b.body = proc();
                s.branches.push_back(std::move(b));
            });
            expect(Tok::RBrace);
            if (s.branches.empty()) fail("sync needs at least one label", from(start));
            check_unique(seen, "sync");
            return make_proc(std::move(s), from(start));
        }
        if (at_kw("rand")) {
            next();
            expect(Tok::LBrace);
            Rand r;
            comma_list(Tok::RBrace, [&] { r.branches.push_back(proc()); });
            expect(Tok::RBrace);
            if (r.branches.empty()) fail("rand needs at least one branch", from(start));
            return make_proc(std::move(r), from(start));
        }
        if (at_kw("if")) {
            next();
            ExprPtr c = expr();
            expect_kw("then");
            ProcPtr t = proc();
            expect_kw("else");
            ProcPtr e = prefix();
            return make_proc(If{c, t, e}, from(start));
        }
        if (at_kw("def")) {
            next();
            Def d;
            std::vector<std::pair<std::string, SourceSpan>> seen;
            do {
                SourceSpan ns = peek().span;
                Definition def;
                def.name = ident("process name");
                seen.emplace_back(def.name, ns);
                expect(Tok::LParen);
                if (!at(Tok::Semi)) def.value_params = params(false);
                if (accept(Tok::Semi)) {
                    comma_list(Tok::RParen, [&] { def.session_params.push_back(name_list()); });
                }
                expect(Tok::RParen);
                expect(Tok::Assign);
                def.body = proc();
                d.defs.push_back(std::move(def));
            } while (at_kw("and") && (next(), true));
            expect_kw("in");
            d.body = prefix();
            check_unique(seen, "definition");
            return make_proc(std::move(d), from(start));
        }
        if (at(Tok::Ident) && !kKeywords.count(peek().text)) {
            std::string name = next().text;
            switch (peek().kind) {
            case Tok::LBracket: {
                next();
                int p = positive("participant");
                expect(Tok::RBracket);
                auto chans = name_list();
                expect(Tok::Dot);
                ProcPtr body = prefix();
                return make_proc(Accept{name, p, std::move(chans), body}, from(start));
            }
            case Tok::LParen: {
                next();
                Call c{name, {}, {}};
                if (!at(Tok::Semi)) comma_list(Tok::RParen, [&] { c.args.push_back(expr()); });
                if (accept(Tok::Semi)) {
                    comma_list(Tok::RParen, [&] { c.session_args.push_back(name_list()); });
                }
                expect(Tok::RParen);
                return make_proc(std::move(c), from(start));
            }
            case Tok::Send3: {
                next();
                std::vector<ExprPtr> es;
                comma_list(Tok::Gt, [&] { es.push_back(expr()); });
                expect(Tok::Gt);
                ProcPtr k = cont();
                return make_proc(Send{name, std::move(es), k}, from(start));
            }
            case Tok::Send2: {
                next();
                expect(Tok::LParen);
                auto chans = name_list();
                expect(Tok::RParen);
                ProcPtr k = cont();
                return make_proc(Delegate{name, std::move(chans), k}, from(start));
            }
            case Tok::Recv2: {
                next();
                expect(Tok::LParen);
                if (at(Tok::LParen)) {
                    auto chans = name_list();
                    expect(Tok::RParen);
                    ProcPtr k = cont();
                    return make_proc(DelegRecv{name, std::move(chans), k}, from(start));
                }
                auto vars = params(false);
                expect(Tok::RParen);
                ProcPtr k = cont();
                return make_proc(Recv{name, std::move(vars), k}, from(start));
            }
            case Tok::SelectOp: {
                next();
                std::string l = label();
                ProcPtr k = cont();
                return make_proc(Select{name, l, k}, from(start));
            }
            case Tok::BranchOp: {
                next();
                expect(Tok::LBrace);
                Branch b{name, {}};
                std::vector<std::pair<std::string, SourceSpan>> seen;
                comma_list(Tok::RBrace, [&] {
                    SourceSpan ls = peek().span;
                    std::string l = label();
                    seen.emplace_back(l, ls);
                    expect(Tok::Colon);
                    b.branches.push_back({l, proc()});
                });
                expect(Tok::RBrace);
                if (b.branches.empty()) fail("branching needs at least one label", from(start));
                check_unique(seen, "branch");
                return make_proc(std::move(b), from(start));
            }
            default:
                unexpected("'[', '(', '<<<', '<<', '>>', '<:' or ':>' after '" + name + "'");
            }
        }
        unexpected("process");
    }

    // --------------------------------------------------------------- programs

    TypeDecl type_decl()
    {
        SourceSpan start = peek().span;
        expect_kw("type");
        TypeDecl d;
        d.name = ident("type name");
        if (accept(Tok::LBracket)) {
            int m = integer("channel count");
            expect(Tok::Comma);
            int n = integer("participant count");
            expect(Tok::RBracket);
            d.dims = std::make_pair(m, n);
        }
        expect(Tok::Assign);
        d.type = global_type();
        expect(Tok::Semi);
        d.span = from(start);
        return d;
    }

    Program program()
    {
        Program prog;
        while (at_kw("type")) prog.types.push_back(type_decl());
        while (at_kw("chan")) {
            SourceSpan start = peek().span;
            next();
            ChanDecl c;
            c.name = ident("channel name");
            expect(Tok::Colon);
            c.type_name = ident("type name");
            expect(Tok::Semi);
            c.span = from(start);
            prog.chans.push_back(std::move(c));
        }
        prog.body = proc();
        finish();
        return prog;
    }

    std::vector<TypeDecl> type_file()
    {
        std::vector<TypeDecl> out;
        if (at_kw("type")) {
            while (at_kw("type")) out.push_back(type_decl());
        } else {
            SourceSpan start = peek().span;
            GlobalPtr g = global_type();
            accept(Tok::Semi);
            out.push_back(TypeDecl{"G", g, std::nullopt, from(start)});
        }
        finish();
        return out;
    }

private:
    SourceSpan last_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
};

// ------------------------------------------------------------ well-formedness

// Collects recursion variables reachable without passing a communication
// prefix or sum; a binder whose own variable is among them is unguarded.
void check_global(const GlobalPtr& g, std::vector<std::string>& bound, std::set<std::string>& unguarded)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, GExchange>) {
                std::set<std::string> inner;
                check_global(n.cont, bound, inner);
            } else if constexpr (std::is_same_v<T, GBranch>) {
                for (const auto& b : n.branches) {
                    std::set<std::string> inner;
                    check_global(b.body, bound, inner);
                }
            } else if constexpr (std::is_same_v<T, GSum>) {
                for (const auto& b : n.branches) {
                    std::set<std::string> inner;
                    check_global(b.body, bound, inner);
                }
            } else if constexpr (std::is_same_v<T, GMu>) {
                bound.push_back(n.var);
                std::set<std::string> inner;
                check_global(n.body, bound, inner);
                bound.pop_back();
                if (inner.count(n.var))
                    throw Error("E-UNGUARDED", "recursion variable '" + n.var + "' is not guarded", g->span);
                inner.erase(n.var);
                unguarded.insert(inner.begin(), inner.end());
            } else if constexpr (std::is_same_v<T, GVar>) {
                if (std::find(bound.begin(), bound.end(), n.name) == bound.end())
                    throw Error("E-PARSE", "unbound recursion variable '" + n.name + "'", g->span);
                unguarded.insert(n.name);
            }
        },
        g->node);
}

void check_local(const LocalPtr& t, std::vector<std::string>& bound, std::set<std::string>& unguarded)
{
    auto guarded = [&](const LocalPtr& k) {
        std::set<std::string> inner;
        check_local(k, bound, inner);
    };
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, LSend> || std::is_same_v<T, LRecv>) {
                if (n.msg.is_session()) {
                    std::vector<std::string> none;
                    std::set<std::string> inner;
                    check_local(n.msg.session().type, none, inner);
                }
                guarded(n.cont);
            } else if constexpr (std::is_same_v<T, LSelect> || std::is_same_v<T, LBranch>) {
                for (const auto& b : n.branches) guarded(b.body);
            } else if constexpr (std::is_same_v<T, LSum>) {
                for (const auto& b : n.branches) guarded(b.body);
            } else if constexpr (std::is_same_v<T, LMu>) {
                bound.push_back(n.var);
                std::set<std::string> inner;
                check_local(n.body, bound, inner);
                bound.pop_back();
                if (inner.count(n.var))
                    throw Error("E-UNGUARDED", "recursion variable '" + n.var + "' is not guarded", t->span);
                inner.erase(n.var);
                unguarded.insert(inner.begin(), inner.end());
            } else if constexpr (std::is_same_v<T, LVar>) {
                if (std::find(bound.begin(), bound.end(), n.name) == bound.end())
                    throw Error("E-PARSE", "unbound recursion variable '" + n.name + "'", t->span);
                unguarded.insert(n.name);
            }
        },
        t->node);
}

void check_msgs_in_global(const GlobalPtr& g)
{
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, GExchange>) {
                if (n.msg.is_session()) {
                    std::vector<std::string> none;
                    std::set<std::string> inner;
                    check_local(n.msg.session().type, none, inner);
                }
                check_msgs_in_global(n.cont);
            } else if constexpr (std::is_same_v<T, GBranch>) {
                for (const auto& b : n.branches) check_msgs_in_global(b.body);
            } else if constexpr (std::is_same_v<T, GSum>) {
                for (const auto& b : n.branches) check_msgs_in_global(b.body);
            } else if constexpr (std::is_same_v<T, GMu>) {
                check_msgs_in_global(n.body);
            }
        },
        g->node);
}

void validate(const GlobalPtr& g)
{
    std::vector<std::string> bound;
    std::set<std::string> unguarded;
    check_global(g, bound, unguarded);
    check_msgs_in_global(g);
}

void validate(const LocalPtr& t)
{
    std::vector<std::string> bound;
    std::set<std::string> unguarded;
    check_local(t, bound, unguarded);
}

}  // namespace

bool is_valid_label(std::string_view label)
{
    if (plain_label(label)) return true;
    constexpr std::string_view prefix = "cases_";
    if (label.substr(0, prefix.size()) != prefix) return false;
    std::string_view rest = label.substr(prefix.size());
    if (rest.empty()) return true;
    while (true) {
        size_t cut = rest.find('_');
        if (!plain_label(rest.substr(0, cut))) return false;
        if (cut == std::string_view::npos) return true;
        rest = rest.substr(cut + 1);
    }
}

Program parse_program(std::string_view text, const std::string& file)
{
    Parser p(text, file);
    Program prog = p.program();
    for (const auto& d : prog.types) validate(d.type);
    return prog;
}

ProcPtr parse_process(std::string_view text, const std::string& file)
{
    Parser p(text, file);
    ProcPtr proc = p.proc();
    p.finish();
    return proc;
}

GlobalPtr parse_global_type(std::string_view text, const std::string& file)
{
    Parser p(text, file);
    GlobalPtr g = p.global_type();
    p.finish();
    validate(g);
    return g;
}

LocalPtr parse_local_type(std::string_view text, const std::string& file)
{
    Parser p(text, file);
    LocalPtr t = p.local_type();
    p.finish();
    validate(t);
    return t;
}

ExprPtr parse_expr(std::string_view text, const std::string& file)
{
    Parser p(text, file);
    ExprPtr e = p.expr();
    p.finish();
    return e;
}

std::vector<TypeDecl> parse_type_file(std::string_view text, const std::string& file)
{
    Parser p(text, file);
    auto decls = p.type_file();
    for (const auto& d : decls) validate(d.type);
    return decls;
}

}  // namespace mpst
