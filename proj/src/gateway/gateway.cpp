#include "mpst/gateway.hpp"
#include "mpst/syntax.hpp"

#include <algorithm>
#include <chrono>

namespace mpst {

namespace {

int id_field(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key)) throw Error("E-PARSE", std::string("decision lacks '") + key + "'");
    const auto& v = j.at(key);
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_string()) {
        try {
            size_t used = 0;
            int n = std::stoi(v.get<std::string>(), &used);
            if (used == v.get<std::string>().size()) return n;
        } catch (const std::exception&) {
        }
    }
    throw Error("E-PARSE", std::string("'") + key + "' is not an id");
}

}  // namespace

std::optional<Value> json_value(const nlohmann::json& j, const SimpleType& sort)
{
    switch (sort.sort) {
    case BaseSort::Int:
        if (j.is_number_integer()) return int_value(j.get<std::int64_t>());
        return std::nullopt;
    case BaseSort::Bool:
        if (j.is_boolean()) return bool_value(j.get<bool>());
        return std::nullopt;
    case BaseSort::String:
        if (j.is_string()) return string_value(j.get<std::string>());
        return std::nullopt;
    case BaseSort::Shared:
        if (j.is_string()) return name_value(j.get<std::string>());
        return std::nullopt;
    }
    return std::nullopt;
}

nlohmann::json to_json(const PendingChoice& p)
{
    nlohmann::json offered = nlohmann::json::array();
    for (const auto& o : p.offered) {
        nlohmann::json args = nlohmann::json::array();
        for (const auto& [name, sort] : o.args) args.push_back({{"name", name}, {"type", render(sort)}});
        offered.push_back({{"label", o.label}, {"mandatory", o.mandatory}, {"args", args}});
    }
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : p.received_log) log.push_back({{"channel", e.channel}, {"value", e.value}});
    return {{"sessionId", p.session_id},
            {"syncId", std::to_string(p.sync_id)},
            {"participant", std::to_string(p.participant)},
            {"offered", offered},
            {"receivedLog", log}};
}

nlohmann::json to_json(const Resolution& r)
{
    return {{"sid", r.session_id}, {"syncId", std::to_string(r.sync_id)}, {"label", r.label}};
}

Decision decision_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw Error("E-PARSE", "decision must be an object");
    Decision d;
    if (!j.contains("sessionId")) throw Error("E-PARSE", "decision lacks 'sessionId'");
    const auto& sid = j.at("sessionId");
    if (sid.is_string())
        d.session_id = sid.get<std::string>();
    else if (sid.is_number_integer())
        d.session_id = std::to_string(sid.get<int>());
    else
        throw Error("E-PARSE", "'sessionId' is not an id");
    d.sync_id = id_field(j, "syncId");
    d.participant = id_field(j, "participant");
    if (j.contains("accepted")) {
        if (!j.at("accepted").is_array()) throw Error("E-PARSE", "'accepted' must be an array");
        for (const auto& l : j.at("accepted")) {
            if (!l.is_string()) throw Error("E-PARSE", "labels must be strings");
            d.accepted.insert(l.get<std::string>());
        }
    }
    if (j.contains("values")) {
        if (!j.at("values").is_object()) throw Error("E-PARSE", "'values' must be an object");
        for (const auto& [label, args] : j.at("values").items()) {
            if (!args.is_object()) throw Error("E-PARSE", "values for '" + label + "' must be an object");
            for (const auto& [name, v] : args.items()) d.values[label][name] = v;
        }
    }
    return d;
}

void Gateway::open_session(const std::string& id, int participants)
{
    std::lock_guard lock(mu_);
    auto& s = sessions_[id];
    s.participants = std::max(s.participants, participants);
    cv_.notify_all();
}

std::vector<std::string> Gateway::sessions() const
{
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

const Gateway::Session& Gateway::session(const std::string& id, int participant) const
{
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error("E-NOSESSION", "no session '" + id + "'");
    if (participant < 1 || participant > it->second.participants)
        throw Error("E-NOPART", "session '" + id + "' has no participant " + std::to_string(participant));
    return it->second;
}

std::optional<PendingChoice> Gateway::pending(const std::string& id, int participant) const
{
    std::lock_guard lock(mu_);
    const Session& s = session(id, participant);
    if (!s.blocked) return std::nullopt;
    PendingChoice pc;
    pc.session_id = id;
    pc.sync_id = s.sync_id;
    pc.participant = participant;
    const auto& offered = s.request.offered[participant - 1];
    const auto& mandatory = s.request.mandatory[participant - 1];
    const auto& own = s.request.own_args[participant - 1];
    for (const auto& l : offered) {
        OfferedLabel o{l, std::find(mandatory.begin(), mandatory.end(), l) != mandatory.end(), {}};
        if (auto it = own.find(l); it != own.end())
            for (const auto& a : it->second) o.args.push_back({a.name, a.sort.value_or(SimpleType{})});
        pc.offered.push_back(std::move(o));
    }
    if (auto it = s.log.find(participant); it != s.log.end()) pc.received_log = it->second;
    return pc;
}

SubmitResult Gateway::submit(const Decision& d)
{
    std::lock_guard lock(mu_);
    session(d.session_id, d.participant);
    Session& s = sessions_.at(d.session_id);
    if (!s.blocked || d.sync_id != s.sync_id)
        throw Error("E-STALE", "sync " + std::to_string(d.sync_id) + " of session '" + d.session_id +
                                   "' is not pending (current " + std::to_string(s.sync_id) + ")");
    const auto& offered = s.request.offered[d.participant - 1];
    const auto& own = s.request.own_args[d.participant - 1];
    std::map<std::string, std::map<std::string, nlohmann::json>> values;
    for (const auto& l : d.accepted) {
        if (std::find(offered.begin(), offered.end(), l) == offered.end())
            throw Error("E-BADLABEL", "label '" + l + "' is not offered to participant " +
                                          std::to_string(d.participant));
        auto it = own.find(l);
        if (it == own.end()) continue;
        for (const auto& a : it->second) {
            auto lv = d.values.find(l);
            if (lv == d.values.end() || !lv->second.count(a.name))
                throw Error("E-MISSINGARG", "no value for '" + a.name + "' of label '" + l + "'");
            const auto& v = lv->second.at(a.name);
            if (!json_value(v, a.sort.value_or(SimpleType{})))
                throw Error("E-MISSINGARG", "value for '" + a.name + "' of label '" + l + "' is not of sort " +
                                                render(a.sort.value_or(SimpleType{})));
            values[l][a.name] = v;
        }
    }
    s.accepted[d.participant] = d.accepted;
    s.values[d.participant] = std::move(values);

    std::set<std::string> common = s.accepted[1];
    for (int p = 2; p <= s.participants; ++p) {
        std::set<std::string> both;
        const auto& mine = s.accepted[p];
        std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(),
                              std::inserter(both, both.end()));
        common = std::move(both);
    }
    if (common.empty()) return {};

    SyncChoice choice{*common.begin(), {}};
    for (int p = 1; p <= s.participants; ++p) {
        const auto& own_args = s.request.own_args[p - 1];
        auto it = own_args.find(choice.label);
        if (it == own_args.end()) continue;
        for (const auto& a : it->second)
            if (!choice.args.count(a.name))
                choice.args[a.name] = *json_value(s.values[p][choice.label][a.name], a.sort.value_or(SimpleType{}));
    }
    Resolution r{d.session_id, s.sync_id, choice.label};
    s.outcome = std::move(choice);
    s.blocked = false;
    s.sync_id++;
    s.accepted.clear();
    s.values.clear();
    events_.push_back(r);
    cv_.notify_all();
    return {r};
}

SyncChoice Gateway::await(const std::string& id, const SyncRequest& req)
{
    std::unique_lock lock(mu_);
    if (closed_) throw Error("E-CLOSED", "gateway is shut down");
    Session& s = sessions_[id];
    s.participants = std::max(s.participants, static_cast<int>(req.offered.size()));
    s.sync_id = req.sync_index;
    s.request = req;
    s.accepted.clear();
    s.values.clear();
    s.outcome.reset();
    s.blocked = true;
    cv_.notify_all();
    cv_.wait(lock, [&] { return closed_ || s.outcome.has_value(); });
    if (!s.outcome) throw Error("E-CLOSED", "gateway shut down while session '" + id + "' was waiting");
    SyncChoice out = std::move(*s.outcome);
    s.outcome.reset();
    return out;
}

void Gateway::record(const std::string& id, int participant, LogEntry entry)
{
    std::lock_guard lock(mu_);
    sessions_[id].log[participant].push_back(std::move(entry));
}

std::vector<Resolution> Gateway::events_after(size_t after, int timeout_ms) const
{
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, std::chrono::milliseconds(timeout_ms), [&] { return closed_ || events_.size() > after; });
    if (events_.size() <= after) return {};
    return {events_.begin() + static_cast<std::ptrdiff_t>(after), events_.end()};
}

bool Gateway::closed() const
{
    std::lock_guard lock(mu_);
    return closed_;
}

void Gateway::shutdown()
{
    std::lock_guard lock(mu_);
    closed_ = true;
    for (auto& [id, s] : sessions_) s.blocked = false;
    cv_.notify_all();
}

SyncChoice GatewayPolicy::choose_sync(const SyncRequest& req) { return gw_.await(std::to_string(req.session), req); }

size_t GatewayPolicy::choose_index(size_t n) { return std::uniform_int_distribution<size_t>(0, n - 1)(rng_); }

void GatewayPolicy::observe(const StepLabel& s)
{
    if (s.kind == StepKind::Link) gw_.open_session(std::to_string(s.session), s.participants);
    if (s.kind == StepKind::Recv && s.session && s.participant && !s.chans.empty())
        gw_.record(std::to_string(s.session), s.participant, {base_name(s.chans.front()), s.payload});
}

}  // namespace mpst
