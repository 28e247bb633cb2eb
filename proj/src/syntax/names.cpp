#include "mpst/syntax.hpp"
#include "util.hpp"

namespace mpst {

using detail::overloaded;

namespace {

void collect(const ProcPtr& p, std::set<std::string>& out);

void collect_under(const ProcPtr& p, const std::vector<std::string>& bound, std::set<std::string>& out)
{
    std::set<std::string> inner;
    collect(p, inner);
    for (const auto& b : bound) inner.erase(b);
    out.insert(inner.begin(), inner.end());
}

void collect(const ProcPtr& p, std::set<std::string>& out)
{
    std::visit(overloaded{
                   [&](const Inact&) {},
                   [&](const Success&) {},
                   [&](const Sync& n) {
                       out.insert(n.chans.begin(), n.chans.end());
                       for (const auto& b : n.branches) collect(b.body, out);
                   },
                   [&](const Rand& n) {
                       for (const auto& b : n.branches) collect(b, out);
                   },
                   [&](const Request& n) {
                       out.insert(n.chan);
                       collect_under(n.body, n.session_chans, out);
                   },
                   [&](const Accept& n) {
                       out.insert(n.chan);
                       collect_under(n.body, n.session_chans, out);
                   },
                   [&](const Send& n) {
                       out.insert(n.chan);
                       collect(n.cont, out);
                   },
                   [&](const Recv& n) {
                       out.insert(n.chan);
                       std::vector<std::string> vars;
                       for (const auto& v : n.vars) vars.push_back(v.name);
                       collect_under(n.cont, vars, out);
                   },
                   [&](const Delegate& n) {
                       out.insert(n.chan);
                       out.insert(n.chans.begin(), n.chans.end());
                       collect(n.cont, out);
                   },
                   [&](const DelegRecv& n) {
                       out.insert(n.chan);
                       collect_under(n.cont, n.chans, out);
                   },
                   [&](const Select& n) {
                       out.insert(n.chan);
                       collect(n.cont, out);
                   },
                   [&](const Branch& n) {
                       out.insert(n.chan);
                       for (const auto& b : n.branches) collect(b.body, out);
                   },
                   [&](const If& n) {
                       collect(n.then_branch, out);
                       collect(n.else_branch, out);
                   },
                   [&](const Par& n) {
                       collect(n.left, out);
                       collect(n.right, out);
                   },
                   [&](const Restrict& n) { collect_under(n.body, {n.name}, out); },
                   [&](const Def& n) {
                       for (const auto& d : n.defs) {
                           std::vector<std::string> bound;
                           for (const auto& v : d.value_params) bound.push_back(v.name);
                           for (const auto& s : d.session_params) bound.insert(bound.end(), s.begin(), s.end());
                           collect_under(d.body, bound, out);
                       }
                       collect(n.body, out);
                   },
                   [&](const Call& n) {
                       for (const auto& s : n.session_args) out.insert(s.begin(), s.end());
                   },
                   [&](const Queue& n) { out.insert(n.chan); },
               },
               p->node);
}

}  // namespace

std::set<std::string> free_names(const ProcPtr& p)
{
    std::set<std::string> out;
    collect(p, out);
    return out;
}

}  // namespace mpst
