#include "internal.hpp"
#include "mpst/syntax.hpp"

#include <algorithm>
#include <sstream>

namespace mpst {

const char* verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Terminated: return "terminated";
    case Verdict::Stuck: return "stuck";
    case Verdict::FuelExhausted: return "fuel-exhausted";
    }
    return "?";
}

Value default_value(const SimpleType& s)
{
    switch (s.sort) {
    case BaseSort::Int: return int_value(0);
    case BaseSort::Bool: return bool_value(false);
    case BaseSort::String: return string_value("");
    case BaseSort::Shared: return name_value("");
    }
    return int_value(0);
}

namespace {

std::map<std::string, Value> defaults_for(const SyncRequest& req, const std::string& label)
{
    std::map<std::string, Value> out;
    if (auto it = req.args.find(label); it != req.args.end())
        for (const auto& p : it->second) out[p.name] = default_value(p.sort.value_or(SimpleType{}));
    return out;
}

}  // namespace

SyncChoice UniformPolicy::choose_sync(const SyncRequest& req)
{
    const std::string& l = req.common.at(choose_index(req.common.size()));
    return {l, defaults_for(req, l)};
}

size_t UniformPolicy::choose_index(size_t n)
{
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng_);
}

std::vector<ScriptRecord> parse_script(const std::string& text, const std::string& file)
{
    std::vector<ScriptRecord> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        SourceSpan span{file, lineno, 1, lineno, static_cast<int>(line.size()) + 1};
        if (auto c = line.find("//"); c != std::string::npos) line.erase(c);
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream fs(line);
        for (std::string f; std::getline(fs, f, ',');) fields.push_back(trim(f));
        if (fields.size() < 3) throw Error("E-SCRIPT", "expected 'session, syncIndex, label[, arg=value...]'", span);
        ScriptRecord r;
        try {
            r.session = std::stoi(fields[0]);
            r.sync_index = std::stoi(fields[1]);
        } catch (const std::exception&) {
            throw Error("E-SCRIPT", "session and sync index must be integers", span);
        }
        r.label = fields[2];
        if (!is_valid_label(r.label)) throw Error("E-SCRIPT", "invalid label '" + r.label + "'", span);
        for (size_t k = 3; k < fields.size(); ++k) {
            auto eq = fields[k].find('=');
            if (eq == std::string::npos) throw Error("E-SCRIPT", "expected arg=value, got '" + fields[k] + "'", span);
            std::string name = trim(fields[k].substr(0, eq)), val = trim(fields[k].substr(eq + 1));
            Value v = string_value(val);
            try {
                ExprPtr e = parse_expr(val, file);
                if (const auto* lit = std::get_if<Lit>(&e->node)) v = lit->value;
            } catch (const Error&) {
            }
            r.args[name] = v;
        }
        out.push_back(std::move(r));
    }
    return out;
}

SyncChoice ScriptedPolicy::choose_sync(const SyncRequest& req)
{
    auto rec = std::find_if(records_.begin(), records_.end(), [&](const ScriptRecord& r) {
        return r.session == req.session && r.sync_index == req.sync_index;
    });
    if (rec == records_.end()) {
        // no record: seeded uniform choice
        const std::string& l = req.common.at(choose_index(req.common.size()));
        return {l, defaults_for(req, l)};
    }
    if (std::find(req.common.begin(), req.common.end(), rec->label) == req.common.end()) {
        std::string offered;
        for (const auto& l : req.common) offered += (offered.empty() ? "" : ", ") + l;
        throw Error("E-SCRIPT", "label '" + rec->label + "' is not common to session " + std::to_string(req.session) +
                                    " sync " + std::to_string(req.sync_index) + " (common: {" + offered + "})");
    }
    SyncChoice c{rec->label, defaults_for(req, rec->label)};
    for (const auto& [name, v] : rec->args) {
        if (!c.args.count(name))
            throw Error("E-SCRIPT", "label '" + rec->label + "' has no argument '" + name + "'");
        c.args[name] = v;
    }
    return c;
}

size_t ScriptedPolicy::choose_index(size_t n)
{
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng_);
}

Trace run(const Config& init, ChoicePolicy& policy, size_t fuel, const std::function<void(const StepLabel&)>& on_step)
{
    Trace t;
    Config c = init;
    for (size_t used = 0;; ++used) {
        auto steps = enabled_steps(c);
        if (steps.empty()) {
            t.verdict = terminated(c) ? Verdict::Terminated : Verdict::Stuck;
            break;
        }
        if (used == fuel) {
            t.verdict = Verdict::FuelExhausted;
            break;
        }
        const size_t redex = steps.front().redex;
        size_t n = 0;
        while (n < steps.size() && steps[n].redex == redex) ++n;
        Step chosen;
        if (steps.front().label.kind == StepKind::Sync) {
            auto r = detail::sync_redex(c, redex);
            SyncChoice ch = policy.choose_sync(detail::sync_request(c, *r));
            if (std::find(r->common.begin(), r->common.end(), ch.label) == r->common.end())
                throw Error("E-SCRIPT", "label '" + ch.label + "' is not a common label");
            chosen = detail::fire_sync(c, *r, ch.label, ch.args);
        } else {
            chosen = std::move(steps[n > 1 ? policy.choose_index(n) : 0]);
        }
        if (on_step) on_step(chosen.label);
        t.steps.push_back(chosen.label);
        c = std::move(chosen.next);
    }
    t.success = c.success;
    t.final = std::move(c);
    return t;
}

std::string format_trace(const Trace& t)
{
    std::string out;
    for (size_t i = 0; i < t.steps.size(); ++i) out += format_step(i + 1, t.steps[i]) + "\n";
    out += std::string("verdict: ") + verdict_name(t.verdict) + (t.success ? ", success" : "") + "\n";
    return out;
}

std::string base_name(const std::string& runtime_name)
{
    return runtime_name.substr(0, runtime_name.find('#'));
}

bool is_conduction(const StepLabel& s, const std::set<std::string>& conductor_chans,
                   const std::set<std::string>& conductor_defs)
{
    if (s.kind == StepKind::Def) return conductor_defs.count(s.def_name) > 0;
    if (s.kind != StepKind::Label && s.kind != StepKind::Branch) return false;
    return !s.chans.empty() && conductor_chans.count(base_name(s.chans.front())) > 0;
}

}  // namespace mpst
