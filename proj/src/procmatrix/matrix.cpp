#include "mpst/procmatrix.hpp"
#include "mpst/syntax.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <functional>

namespace mpst {

using nlohmann::json;

const MatrixAction& ProcessMatrix::action(int id) const
{
    for (const auto& a : actions)
        if (a.id == id) return a;
    throw Error("E-UNKNOWNPRED", "no action with id " + std::to_string(id));
}

Access ProcessMatrix::access(const MatrixAction& a, const std::string& role) const
{
    auto it = a.access.find(role);
    return it == a.access.end() ? Access::None : it->second;
}

namespace {

SimpleType sort_named(const std::string& s, const SourceSpan& span)
{
    if (s == "Int") return {BaseSort::Int, ""};
    if (s == "Bool") return {BaseSort::Bool, ""};
    if (s == "String") return {BaseSort::String, ""};
    throw Error("E-PARSE", "unknown data type '" + s + "' (expected Int, Bool or String)", span);
}

}  // namespace

ProcessMatrix load_matrix(const std::string& json_text, const std::string& file)
{
    const SourceSpan span{file, 1, 1, 1, 1};
    ProcessMatrix m;
    try {
        json doc = json::parse(json_text);
        for (const auto& r : doc.at("roles")) m.roles.push_back(r.get<std::string>());
        for (const auto& ja : doc.at("actions")) {
            MatrixAction a;
            a.id = ja.at("id").get<int>();
            a.name = ja.at("name").get<std::string>();
            for (const auto& p : ja.value("preds", json::array())) a.preds.insert(p.get<int>());
            for (const auto& [role, v] : ja.at("access").items()) {
                std::string s = v.get<std::string>();
                if (s == "R")
                    a.access[role] = Access::Read;
                else if (s == "W")
                    a.access[role] = Access::Write;
                else if (s == "N")
                    a.access[role] = Access::None;
                else
                    throw Error("E-BADACCESS", "action " + std::to_string(a.id) + ": access '" + s + "' for " + role +
                                                   " (expected R, W or N)", span);
            }
            a.data = sort_named(ja.value("dataType", std::string("String")), span);
            m.actions.push_back(std::move(a));
        }
    } catch (const json::exception& e) {
        throw Error("E-PARSE", std::string("matrix document: ") + e.what(), span);
    }
    try {
        validate_matrix(m);
    } catch (const Error& e) {
        Diagnostic d = e.diagnostics().front();
        d.span = span;
        throw Error(d);
    }
    return m;
}

void validate_matrix(const ProcessMatrix& m)
{
    std::set<std::string> roles;
    for (const auto& r : m.roles)
        if (!roles.insert(r).second) throw Error("E-DUPID", "role '" + r + "' listed twice");
    std::set<int> ids;
    for (const auto& a : m.actions)
        if (!ids.insert(a.id).second) throw Error("E-DUPID", "action id " + std::to_string(a.id) + " used twice");
    for (const auto& a : m.actions) {
        for (const auto& [role, _] : a.access)
            if (!roles.count(role))
                throw Error("E-BADACCESS", "action " + std::to_string(a.id) + " gives access to unknown role '" + role + "'");
        for (int p : a.preds)
            if (!ids.count(p))
                throw Error("E-UNKNOWNPRED", "action " + std::to_string(a.id) + " has unknown predecessor " + std::to_string(p));
        if (std::none_of(m.roles.begin(), m.roles.end(), [&](const std::string& r) { return m.access(a, r) == Access::Write; }))
            throw Error("E-NOWRITER", "action " + std::to_string(a.id) + " (" + a.name + ") has no role with W");
    }
    // depth-first search for a predecessor cycle
    std::map<int, int> colour;
    std::function<void(int)> visit = [&](int id) {
        colour[id] = 1;
        for (int p : m.action(id).preds) {
            if (colour[p] == 1)
                throw Error("E-CYCLE", "actions " + std::to_string(id) + " and " + std::to_string(p) + " lie on a predecessor cycle");
            if (colour[p] == 0) visit(p);
        }
        colour[id] = 2;
    };
    for (const auto& a : m.actions)
        if (colour[a.id] == 0) visit(a.id);
}

std::set<int> executable(const ProcessMatrix& m, const WorkflowState& st)
{
    std::set<int> out;
    for (const auto& a : m.actions)
        if (std::includes(st.begin(), st.end(), a.preds.begin(), a.preds.end())) out.insert(a.id);
    return out;
}

WorkflowState successor(const ProcessMatrix& m, const WorkflowState& st, int id)
{
    std::set<int> removed;
    std::vector<int> todo{id};
    while (!todo.empty()) {
        int cur = todo.back();
        todo.pop_back();
        for (const auto& a : m.actions)
            if (a.preds.count(cur) && removed.insert(a.id).second) todo.push_back(a.id);
    }
    WorkflowState out;
    for (int x : st)
        if (!removed.count(x)) out.insert(x);
    out.insert(id);
    return out;
}

std::string matrix_label(const std::string& role, const MatrixAction& a)
{
    std::string out;
    for (char c : role + a.name)
        if (std::isalnum(static_cast<unsigned char>(c))) out += c;
    if (out.empty() || !std::isalpha(static_cast<unsigned char>(out[0]))) out = "A" + out;
    return out;
}

std::string state_name(const WorkflowState& st)
{
    std::string out = "state";
    for (int id : st) out += "_" + std::to_string(id);
    return out;
}

namespace {

class Encoder {
public:
    explicit Encoder(const ProcessMatrix& m) : m_(m) {}

    GlobalPtr state(const WorkflowState& st)
    {
        if (st.size() == m_.actions.size()) return gend();
        const std::string name = state_name(st);
        if (open_.count(st)) {
            used_.insert(st);
            return make_global(GVar{name});
        }
        open_.insert(st);
        GSum sum;
        for (int id : executable(m_, st)) {
            const MatrixAction& a = m_.action(id);
            for (size_t r = 0; r < m_.roles.size(); ++r) {
                if (m_.access(a, m_.roles[r]) != Access::Write) continue;
                sum.branches.push_back({matrix_label(m_.roles[r], a), true, send(a, static_cast<int>(r) + 1, st)});
            }
        }
        open_.erase(st);
        GlobalPtr body = make_global(sum);
        if (used_.erase(st)) body = make_global(GMu{name, body});
        return body;
    }

private:
    GlobalPtr send(const MatrixAction& a, int writer, const WorkflowState& st)
    {
        GlobalPtr cont = state(successor(m_, st, a.id));
        for (int q = static_cast<int>(m_.roles.size()); q >= 1; --q) {
            if (q == writer || m_.access(a, m_.roles[q - 1]) == Access::None) continue;
            cont = make_global(GExchange{writer, q, q, MsgType{std::vector<SimpleType>{a.data}}, cont});
        }
        return cont;
    }

    const ProcessMatrix& m_;
    std::set<WorkflowState> open_;
    std::set<WorkflowState> used_;
};

}  // namespace

GlobalPtr encode(const ProcessMatrix& m)
{
    validate_matrix(m);
    return Encoder(m).state({});
}

}  // namespace mpst
