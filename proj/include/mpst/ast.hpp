#pragma once

// Immutable syntax trees for processes, expressions, global and local types.
//
// Nodes are shared through `Rc<T>`, whose equality is structural, so two
// trees compare equal iff they have the same shape and leaves. Source spans
// are carried on nodes but never take part in equality.

#include "mpst/diagnostics.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mpst {

template <class T>
class Rc {
public:
    Rc() = default;
    Rc(T value) : ptr_(std::make_shared<const T>(std::move(value))) {}

    const T& operator*() const { return *ptr_; }
    const T* operator->() const { return ptr_.get(); }
    const T* get() const { return ptr_.get(); }
    explicit operator bool() const { return static_cast<bool>(ptr_); }

    bool operator==(const Rc& other) const
    {
        if (ptr_ == other.ptr_) return true;
        if (!ptr_ || !other.ptr_) return false;
        return *ptr_ == *other.ptr_;
    }

    bool same_node(const Rc& other) const { return ptr_ == other.ptr_; }

private:
    std::shared_ptr<const T> ptr_;
};

// ---------------------------------------------------------------------------
// Values and expressions

/// A shared channel name used as a first-class value.
struct NameValue {
    std::string name;
    bool operator==(const NameValue&) const = default;
};

using Value = std::variant<bool, std::int64_t, std::string, NameValue>;

inline Value bool_value(bool b) { return Value{std::in_place_index<0>, b}; }
inline Value int_value(std::int64_t i) { return Value{std::in_place_index<1>, i}; }
inline Value string_value(std::string s) { return Value{std::in_place_index<2>, std::move(s)}; }
inline Value name_value(std::string s) { return Value{std::in_place_index<3>, NameValue{std::move(s)}}; }

enum class UnaryOp { Not };
enum class BinaryOp { And, Or, Add, Sub, Eq, Lt, Le };

struct Expr;
using ExprPtr = Rc<Expr>;

struct Lit {
    Value value;
    bool operator==(const Lit&) const = default;
};
struct VarRef {
    std::string name;
    bool operator==(const VarRef&) const = default;
};
struct Unary {
    UnaryOp op;
    ExprPtr operand;
    bool operator==(const Unary&) const = default;
};
struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
    bool operator==(const Binary&) const = default;
};
/// `rand{v1, ..., vn}`: one of the listed values, chosen at evaluation time.
struct RandExpr {
    std::vector<Value> values;
    bool operator==(const RandExpr&) const = default;
};

struct Expr {
    using Node = std::variant<Lit, VarRef, Unary, Binary, RandExpr>;
    Node node;
    SourceSpan span;
    bool operator==(const Expr& o) const { return node == o.node; }
};

// ---------------------------------------------------------------------------
// Types

enum class BaseSort { Int, Bool, String, Shared };

/// Int | Bool | String | <Name>, the last being the shared-channel sort ⟨G⟩
/// of the global type declared as Name.
struct SimpleType {
    BaseSort sort = BaseSort::Int;
    std::string name;
    bool operator==(const SimpleType&) const = default;
};

struct LocalType;
using LocalPtr = Rc<LocalType>;
struct GlobalType;
using GlobalPtr = Rc<GlobalType>;

/// T@(p,m,n): a delegated session endpoint.
struct SessionAt {
    LocalPtr type;
    int participant = 1;
    int channels = 1;
    int participants = 1;
    bool operator==(const SessionAt&) const = default;
};

struct MsgType {
    std::variant<std::vector<SimpleType>, SessionAt> payload;
    bool operator==(const MsgType&) const = default;

    bool is_session() const { return payload.index() == 1; }
    const std::vector<SimpleType>& sorts() const { return std::get<0>(payload); }
    const SessionAt& session() const { return std::get<1>(payload); }
};

struct GLabeled {
    std::string label;
    GlobalPtr body;
    bool operator==(const GLabeled&) const = default;
};
struct GSumBranch {
    std::string label;
    bool mandatory = false;
    GlobalPtr body;
    bool operator==(const GSumBranch&) const = default;
};

/// from → to : chan ⟨msg⟩ . cont
struct GExchange {
    int from;
    int to;
    int chan;
    MsgType msg;
    GlobalPtr cont;
    bool operator==(const GExchange&) const = default;
};
/// from → to : chan {l: G_l}
struct GBranch {
    int from;
    int to;
    int chan;
    std::vector<GLabeled> branches;
    bool operator==(const GBranch&) const = default;
};
struct GMu {
    std::string var;
    GlobalPtr body;
    bool operator==(const GMu&) const = default;
};
struct GVar {
    std::string name;
    bool operator==(const GVar&) const = default;
};
struct GEnd {
    bool operator==(const GEnd&) const = default;
};
/// Symmetric sum {l: G_l}_{L;M}; `mandatory` marks membership in M.
struct GSum {
    std::vector<GSumBranch> branches;
    bool operator==(const GSum&) const = default;
};

struct GlobalType {
    using Node = std::variant<GExchange, GBranch, GMu, GVar, GEnd, GSum>;
    Node node;
    SourceSpan span;
    bool operator==(const GlobalType& o) const { return node == o.node; }
};

struct LLabeled {
    std::string label;
    LocalPtr body;
    bool operator==(const LLabeled&) const = default;
};
struct LSumBranch {
    std::string label;
    bool mandatory = false;
    LocalPtr body;
    bool operator==(const LSumBranch&) const = default;
};

struct LSend {
    int chan;
    MsgType msg;
    LocalPtr cont;
    bool operator==(const LSend&) const = default;
};
struct LRecv {
    int chan;
    MsgType msg;
    LocalPtr cont;
    bool operator==(const LRecv&) const = default;
};
struct LSelect {
    int chan;
    std::vector<LLabeled> branches;
    bool operator==(const LSelect&) const = default;
};
struct LBranch {
    int chan;
    std::vector<LLabeled> branches;
    bool operator==(const LBranch&) const = default;
};
struct LMu {
    std::string var;
    LocalPtr body;
    bool operator==(const LMu&) const = default;
};
struct LVar {
    std::string name;
    bool operator==(const LVar&) const = default;
};
struct LEnd {
    bool operator==(const LEnd&) const = default;
};
struct LSum {
    std::vector<LSumBranch> branches;
    bool operator==(const LSum&) const = default;
};

struct LocalType {
    using Node = std::variant<LSend, LRecv, LSelect, LBranch, LMu, LVar, LEnd, LSum>;
    Node node;
    SourceSpan span;
    bool operator==(const LocalType& o) const { return node == o.node; }
};

// ---------------------------------------------------------------------------
// Processes

struct Process;
using ProcPtr = Rc<Process>;

/// A binder with an optional sort annotation (`x` or `x: Int`).
struct Param {
    std::string name;
    std::optional<SimpleType> sort;
    bool operator==(const Param&) const = default;
};

struct SyncBranch {
    std::string label;
    // Advisory marker (`^` vs `#`); typing ignores it. Elaboration sets it
    // from the session type so choice front-ends can badge mandatory labels.
    bool mandatory = false;
    std::vector<Param> args;  // guisync only
    ProcPtr body;
    bool operator==(const SyncBranch&) const = default;
};

struct Labeled {
    std::string label;
    ProcPtr body;
    bool operator==(const Labeled&) const = default;
};

struct Inact {
    bool operator==(const Inact&) const = default;
};
/// The success marker ✓.
struct Success {
    bool operator==(const Success&) const = default;
};
/// sync((s̃),n){l: P_l} and, with `gui` set, guisync.
struct Sync {
    std::vector<std::string> chans;
    int n = 0;
    bool gui = false;
    std::vector<SyncBranch> branches;
    bool operator==(const Sync&) const = default;
};
struct Rand {
    std::vector<ProcPtr> branches;
    bool operator==(const Rand&) const = default;
};
/// /a[2..n](s̃).P
struct Request {
    std::string chan;
    int n = 2;
    std::vector<std::string> session_chans;
    ProcPtr body;
    bool operator==(const Request&) const = default;
};
/// a[p](s̃).P
struct Accept {
    std::string chan;
    int participant = 2;
    std::vector<std::string> session_chans;
    ProcPtr body;
    bool operator==(const Accept&) const = default;
};
struct Send {
    std::string chan;
    std::vector<ExprPtr> exprs;
    ProcPtr cont;
    bool operator==(const Send&) const = default;
};
struct Recv {
    std::string chan;
    std::vector<Param> vars;
    ProcPtr cont;
    bool operator==(const Recv&) const = default;
};
struct Delegate {
    std::string chan;
    std::vector<std::string> chans;
    ProcPtr cont;
    bool operator==(const Delegate&) const = default;
};
struct DelegRecv {
    std::string chan;
    std::vector<std::string> chans;
    ProcPtr cont;
    bool operator==(const DelegRecv&) const = default;
};
struct Select {
    std::string chan;
    std::string label;
    ProcPtr cont;
    bool operator==(const Select&) const = default;
};
struct Branch {
    std::string chan;
    std::vector<Labeled> branches;
    bool operator==(const Branch&) const = default;
};
struct If {
    ExprPtr cond;
    ProcPtr then_branch;
    ProcPtr else_branch;
    bool operator==(const If&) const = default;
};
struct Par {
    ProcPtr left;
    ProcPtr right;
    bool operator==(const Par&) const = default;
};
struct Restrict {
    std::string name;
    ProcPtr body;
    bool operator==(const Restrict&) const = default;
};
struct Definition {
    std::string name;
    std::vector<Param> value_params;
    std::vector<std::vector<std::string>> session_params;
    ProcPtr body;
    bool operator==(const Definition&) const = default;
};
struct Def {
    std::vector<Definition> defs;
    ProcPtr body;
    bool operator==(const Def&) const = default;
};
struct Call {
    std::string name;
    std::vector<ExprPtr> args;
    std::vector<std::vector<std::string>> session_args;
    bool operator==(const Call&) const = default;
};

struct LabelMsg {
    std::string label;
    bool operator==(const LabelMsg&) const = default;
};
struct ValuesMsg {
    std::vector<Value> values;
    bool operator==(const ValuesMsg&) const = default;
};
struct ChansMsg {
    std::vector<std::string> chans;
    bool operator==(const ChansMsg&) const = default;
};
/// h ::= l | ṽ | s̃
using Message = std::variant<LabelMsg, ValuesMsg, ChansMsg>;

/// s: h̃, runtime only; the parser never produces it.
struct Queue {
    std::string chan;
    std::vector<Message> messages;
    bool operator==(const Queue&) const = default;
};

struct Process {
    using Node = std::variant<Inact, Success, Sync, Rand, Request, Accept, Send, Recv, Delegate, DelegRecv,
                              Select, Branch, If, Par, Restrict, Def, Call, Queue>;
    Node node;
    SourceSpan span;
    bool operator==(const Process& o) const { return node == o.node; }
};

template <class T>
const T* as(const ProcPtr& p)
{
    return std::get_if<T>(&p->node);
}
template <class T>
const T* as(const GlobalPtr& g)
{
    return std::get_if<T>(&g->node);
}
template <class T>
const T* as(const LocalPtr& t)
{
    return std::get_if<T>(&t->node);
}

inline ProcPtr make_proc(Process::Node n, SourceSpan span = {}) { return ProcPtr(Process{std::move(n), std::move(span)}); }
inline ExprPtr make_expr(Expr::Node n, SourceSpan span = {}) { return ExprPtr(Expr{std::move(n), std::move(span)}); }
inline GlobalPtr make_global(GlobalType::Node n, SourceSpan span = {})
{
    return GlobalPtr(GlobalType{std::move(n), std::move(span)});
}
inline LocalPtr make_local(LocalType::Node n, SourceSpan span = {})
{
    return LocalPtr(LocalType{std::move(n), std::move(span)});
}

inline ProcPtr inact() { return make_proc(Inact{}); }
inline GlobalPtr gend() { return make_global(GEnd{}); }
inline LocalPtr lend() { return make_local(LEnd{}); }

// ---------------------------------------------------------------------------
// Program files

struct TypeDecl {
    std::string name;
    GlobalPtr type;
    /// Reserved (channels, participants) when larger than the type's own
    /// maxima; written `type T[m,n] = G;`.
    std::optional<std::pair<int, int>> dims;
    SourceSpan span;
    bool operator==(const TypeDecl& o) const { return name == o.name && type == o.type && dims == o.dims; }
};

struct ChanDecl {
    std::string name;
    std::string type_name;
    SourceSpan span;
    bool operator==(const ChanDecl& o) const { return name == o.name && type_name == o.type_name; }
};

struct Program {
    std::vector<TypeDecl> types;
    std::vector<ChanDecl> chans;
    ProcPtr body;
    bool operator==(const Program&) const = default;
};

}  // namespace mpst
