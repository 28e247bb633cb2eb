#pragma once

// Concrete syntax: parser and canonical printer.
//
// Processes
//   /a[2..n](s1,...,sm).P      request          a[p](s1,...,sm).P   accept
//   s<<<e1,...,ek>;P           send             s>>(x1,...,xk);P    receive
//   s<<((t1,...));P            delegate         s>>((t1,...));P     session receive
//   s<:l;P                     select           s:>{l: P, ...}      branch
//   sync((s1,...),n){#l: P, ^m: Q}              guisync((..),n){#l(x: Int): P}
//   rand{P, ...}   if e then P else Q   P | Q   end | 0   succ   (nu a)P
//   def X(x: Int; (s1,s2)) = P and Y(...) = Q in R      X(e; (s1,s2))
// Global types
//   1=>2:1<Int>;G   1=>2:1{a: G, b: G}   rec t.G   t   end   {#l: G, ^m: G}
// Local types
//   1<<<Int>;T   1>><Int>;T   1<:{a: T}   1:>{a: T}   rec t.T   t   end   {#l: T, ^m: T}
// Program files: `type N = G;`* `chan a : N;`* process.   Comments: `//`.

#include "mpst/ast.hpp"

#include <set>
#include <string>
#include <string_view>

namespace mpst {

Program parse_program(std::string_view text, const std::string& file = "<input>");
ProcPtr parse_process(std::string_view text, const std::string& file = "<input>");
GlobalPtr parse_global_type(std::string_view text, const std::string& file = "<input>");
LocalPtr parse_local_type(std::string_view text, const std::string& file = "<input>");
ExprPtr parse_expr(std::string_view text, const std::string& file = "<input>");

/// A `.mpt` file: either a list of `type N = G;` declarations or one bare
/// global type (returned as a single declaration named "G").
std::vector<TypeDecl> parse_type_file(std::string_view text, const std::string& file = "<input>");

/// Labels are `[A-Za-z][A-Za-z0-9]*`, plus the reserved `cases_l1_..._lk`
/// form produced by erasure.
bool is_valid_label(std::string_view label);

std::string render(const Process& p);
std::string render(const ProcPtr& p);
std::string render(const GlobalType& g);
std::string render(const GlobalPtr& g);
std::string render(const LocalType& t);
std::string render(const LocalPtr& t);
std::string render(const Expr& e);
std::string render(const ExprPtr& e);
std::string render(const Value& v);
std::string render(const SimpleType& s);
std::string render(const MsgType& m);
std::string render(const Message& m);
std::string render(const Program& prog);

/// Channel names (session and shared) occurring free in `p`.
std::set<std::string> free_names(const ProcPtr& p);

/// Multi-line layout of a process for human consumption; parses back to the
/// same tree as `render`.
std::string render_pretty(const ProcPtr& p);

}  // namespace mpst
