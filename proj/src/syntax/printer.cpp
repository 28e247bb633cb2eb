#include "mpst/syntax.hpp"

#include <sstream>

namespace mpst {

namespace {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

std::string join(const std::vector<std::string>& xs, const char* sep = ",")
{
    std::string out;
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        default: out += c;
        }
    }
    return out + "\"";
}

const char* op_text(BinaryOp op)
{
    switch (op) {
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    }
    return "?";
}

std::string params_text(const std::vector<Param>& ps)
{
    std::vector<std::string> parts;
    for (const auto& p : ps) parts.push_back(p.sort ? p.name + ": " + render(*p.sort) : p.name);
    return join(parts, ", ");
}

std::string sessions_text(const std::vector<std::vector<std::string>>& vs)
{
    std::vector<std::string> parts;
    for (const auto& v : vs) parts.push_back("(" + join(v) + ")");
    return join(parts, ", ");
}

std::string exprs_text(const std::vector<ExprPtr>& es)
{
    std::vector<std::string> parts;
    for (const auto& e : es) parts.push_back(render(e));
    return join(parts, ", ");
}

// Process printer; `pretty` breaks labelled alternatives onto indented lines.
class ProcPrinter {
public:
    explicit ProcPrinter(bool pretty) : pretty_(pretty) {}

    void proc(const ProcPtr& p, int depth)
    {
        std::visit(
            overloaded{
                [&](const Par& n) {
                    proc(n.left, depth);
                    out_ << " | ";
                    prefix(n.right, depth);
                },
                [&](const auto&) { node(p, depth); },
            },
            p->node);
    }

    void prefix(const ProcPtr& p, int depth)
    {
        if (std::holds_alternative<Par>(p->node)) {
            out_ << "(";
            proc(p, depth + 1);
            out_ << ")";
        } else {
            node(p, depth);
        }
    }

    std::string str() const { return out_.str(); }

private:
    void newline(int depth)
    {
        out_ << "\n" << std::string(static_cast<size_t>(depth) * 2, ' ');
    }

    // `{a: P, b: Q}` with one alternative per line when pretty
    template <class Items, class F>
    void block(const Items& items, int depth, F&& item)
    {
        out_ << "{";
        for (size_t i = 0; i < items.size(); ++i) {
            if (i) out_ << ",";
            if (pretty_) newline(depth + 1);
            else if (i) out_ << " ";
            item(items[i]);
        }
        if (pretty_) newline(depth);
        out_ << "}";
    }

    void node(const ProcPtr& p, int depth)
    {
        std::visit(
            overloaded{
                [&](const Inact&) { out_ << "end"; },
                [&](const Success&) { out_ << "succ"; },
                [&](const Sync& n) {
                    out_ << (n.gui ? "guisync" : "sync") << "((" << join(n.chans) << ")," << n.n << ")";
                    block(n.branches, depth, [&](const SyncBranch& b) {
                        out_ << (b.mandatory ? "^" : "#") << b.label;
                        if (n.gui && !b.args.empty()) out_ << "(" << params_text(b.args) << ")";
                        out_ << ": ";
                        proc(b.body, depth + 1);
                    });
                },
                [&](const Rand& n) {
                    out_ << "rand";
                    block(n.branches, depth, [&](const ProcPtr& b) { proc(b, depth + 1); });
                },
                [&](const Request& n) {
                    out_ << "/" << n.chan << "[2.." << n.n << "](" << join(n.session_chans) << ").";
                    step(n.body, depth);
                },
                [&](const Accept& n) {
                    out_ << n.chan << "[" << n.participant << "](" << join(n.session_chans) << ").";
                    step(n.body, depth);
                },
                [&](const Send& n) {
                    out_ << n.chan << "<<<" << exprs_text(n.exprs) << ">;";
                    step(n.cont, depth);
                },
                [&](const Recv& n) {
                    out_ << n.chan << ">>(" << params_text(n.vars) << ");";
                    step(n.cont, depth);
                },
                [&](const Delegate& n) {
                    out_ << n.chan << "<<((" << join(n.chans) << "));";
                    step(n.cont, depth);
                },
                [&](const DelegRecv& n) {
                    out_ << n.chan << ">>((" << join(n.chans) << "));";
                    step(n.cont, depth);
                },
                [&](const Select& n) {
                    out_ << n.chan << "<:" << n.label << ";";
                    step(n.cont, depth);
                },
                [&](const Branch& n) {
                    out_ << n.chan << ":>";
                    block(n.branches, depth, [&](const Labeled& b) {
                        out_ << b.label << ": ";
                        proc(b.body, depth + 1);
                    });
                },
                [&](const If& n) {
                    out_ << "if " << render(n.cond) << " then ";
                    proc(n.then_branch, depth);
                    if (pretty_) newline(depth);
                    else out_ << " ";
                    out_ << "else ";
                    prefix(n.else_branch, depth);
                },
                [&](const Par&) { prefix(p, depth); },
                [&](const Restrict& n) {
                    out_ << "(nu " << n.name << ")";
                    prefix(n.body, depth);
                },
                [&](const Def& n) {
                    out_ << "def ";
                    for (size_t i = 0; i < n.defs.size(); ++i) {
                        const auto& d = n.defs[i];
                        if (i) {
                            if (pretty_) newline(depth);
                            else out_ << " ";
                            out_ << "and ";
                        }
                        out_ << d.name << "(" << params_text(d.value_params);
                        if (!d.session_params.empty())
                            out_ << "; " << sessions_text(d.session_params);
                        out_ << ") = ";
                        if (pretty_) newline(depth + 1);
                        proc(d.body, depth + 1);
                    }
                    if (pretty_) newline(depth);
                    else out_ << " ";
                    out_ << "in ";
                    prefix(n.body, depth);
                },
                [&](const Call& n) {
                    out_ << n.name << "(" << exprs_text(n.args);
                    if (!n.session_args.empty()) out_ << "; " << sessions_text(n.session_args);
                    out_ << ")";
                },
                [&](const Queue& n) {
                    std::vector<std::string> msgs;
                    for (const auto& m : n.messages) msgs.push_back(render(m));
                    out_ << n.chan << ": [" << join(msgs, ", ") << "]";
                },
            },
            p->node);
    }

    void step(const ProcPtr& k, int depth)
    {
        if (pretty_ && !std::holds_alternative<Inact>(k->node)) newline(depth);
        prefix(k, depth);
    }

    bool pretty_;
    std::ostringstream out_;
};

std::string msg_text(const MsgType& m)
{
    if (m.is_session()) {
        const auto& s = m.session();
        return "<[" + render(s.type) + "]@(" + std::to_string(s.participant) + "," + std::to_string(s.channels) +
               "," + std::to_string(s.participants) + ")>";
    }
    std::vector<std::string> parts;
    for (const auto& s : m.sorts()) parts.push_back(render(s));
    return "<" + join(parts, ", ") + ">";
}

}  // namespace

std::string render(const Value& v)
{
    return std::visit(overloaded{
                          [](bool b) -> std::string { return b ? "true" : "false"; },
                          [](std::int64_t i) { return std::to_string(i); },
                          [](const std::string& s) { return quote(s); },
                          [](const NameValue& n) { return n.name; },
                      },
                      v);
}

std::string render(const Expr& e)
{
    return std::visit(overloaded{
                          [](const Lit& n) { return render(n.value); },
                          [](const VarRef& n) { return n.name; },
                          [](const Unary& n) { return "not " + render(n.operand); },
                          [](const Binary& n) {
                              return "(" + render(n.lhs) + " " + op_text(n.op) + " " + render(n.rhs) + ")";
                          },
                          [](const RandExpr& n) {
                              std::vector<std::string> parts;
                              for (const auto& v : n.values) parts.push_back(render(v));
                              return "rand{" + join(parts, ", ") + "}";
                          },
                      },
                      e.node);
}

std::string render(const ExprPtr& e) { return render(*e); }

std::string render(const SimpleType& s)
{
    switch (s.sort) {
    case BaseSort::Int: return "Int";
    case BaseSort::Bool: return "Bool";
    case BaseSort::String: return "String";
    case BaseSort::Shared: return s.name;
    }
    return "?";
}

std::string render(const MsgType& m) { return msg_text(m); }

std::string render(const Message& m)
{
    return std::visit(overloaded{
                          [](const LabelMsg& l) { return l.label; },
                          [](const ValuesMsg& v) {
                              std::vector<std::string> parts;
                              for (const auto& x : v.values) parts.push_back(render(x));
                              return "<" + join(parts, ", ") + ">";
                          },
                          [](const ChansMsg& c) { return "((" + join(c.chans) + "))"; },
                      },
                      m);
}

std::string render(const GlobalType& g)
{
    return std::visit(overloaded{
                          [](const GExchange& n) {
                              return std::to_string(n.from) + "=>" + std::to_string(n.to) + ":" +
                                     std::to_string(n.chan) + msg_text(n.msg) + ";" + render(n.cont);
                          },
                          [](const GBranch& n) {
                              std::vector<std::string> parts;
                              for (const auto& b : n.branches) parts.push_back(b.label + ": " + render(b.body));
                              return std::to_string(n.from) + "=>" + std::to_string(n.to) + ":" +
                                     std::to_string(n.chan) + "{" + join(parts, ", ") + "}";
                          },
                          [](const GMu& n) { return "rec " + n.var + "." + render(n.body); },
                          [](const GVar& n) { return n.name; },
                          [](const GEnd&) { return std::string("end"); },
                          [](const GSum& n) {
                              std::vector<std::string> parts;
                              for (const auto& b : n.branches)
                                  parts.push_back((b.mandatory ? "^" : "#") + b.label + ": " + render(b.body));
                              return "{" + join(parts, ", ") + "}";
                          },
                      },
                      g.node);
}

std::string render(const GlobalPtr& g) { return render(*g); }

std::string render(const LocalType& t)
{
    auto labelled = [](const std::vector<LLabeled>& bs) {
        std::vector<std::string> parts;
        for (const auto& b : bs) parts.push_back(b.label + ": " + render(b.body));
        return "{" + join(parts, ", ") + "}";
    };
    return std::visit(overloaded{
                          [](const LSend& n) {
                              // msg_text starts with '<', so "<<" + it gives the `<<<` token
                              return std::to_string(n.chan) + "<<" + msg_text(n.msg) + ";" + render(n.cont);
                          },
                          [](const LRecv& n) {
                              return std::to_string(n.chan) + ">>" + msg_text(n.msg) + ";" + render(n.cont);
                          },
                          [&](const LSelect& n) { return std::to_string(n.chan) + "<:" + labelled(n.branches); },
                          [&](const LBranch& n) { return std::to_string(n.chan) + ":>" + labelled(n.branches); },
                          [](const LMu& n) { return "rec " + n.var + "." + render(n.body); },
                          [](const LVar& n) { return n.name; },
                          [](const LEnd&) { return std::string("end"); },
                          [](const LSum& n) {
                              std::vector<std::string> parts;
                              for (const auto& b : n.branches)
                                  parts.push_back((b.mandatory ? "^" : "#") + b.label + ": " + render(b.body));
                              return "{" + join(parts, ", ") + "}";
                          },
                      },
                      t.node);
}

std::string render(const LocalPtr& t) { return render(*t); }

std::string render(const Process& p) { return render(ProcPtr(p)); }

std::string render(const ProcPtr& p)
{
    ProcPrinter pr(false);
    pr.proc(p, 0);
    return pr.str();
}

std::string render_pretty(const ProcPtr& p)
{
    ProcPrinter pr(true);
    pr.proc(p, 0);
    return pr.str();
}

std::string render(const Program& prog)
{
    std::string out;
    for (const auto& d : prog.types) {
        out += "type " + d.name;
        if (d.dims) out += "[" + std::to_string(d.dims->first) + "," + std::to_string(d.dims->second) + "]";
        out += " = " + render(d.type) + ";\n";
    }
    for (const auto& c : prog.chans) out += "chan " + c.name + " : " + c.type_name + ";\n";
    if (!prog.types.empty() || !prog.chans.empty()) out += "\n";
    out += render_pretty(prog.body) + "\n";
    return out;
}

}  // namespace mpst
