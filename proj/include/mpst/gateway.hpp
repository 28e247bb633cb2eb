#pragma once

// Session gateway: exposes the sync choices a running interpreter is blocked
// on and resolves them once every participant accepts a common label.

#include "mpst/runtime.hpp"

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace mpst {

struct OfferedLabel {
    std::string label;
    bool mandatory = false;
    std::vector<std::pair<std::string, SimpleType>> args;
};

struct LogEntry {
    std::string channel;
    std::string value;
};

struct PendingChoice {
    std::string session_id;
    int sync_id = 0;
    int participant = 0;
    std::vector<OfferedLabel> offered;
    std::vector<LogEntry> received_log;
};

struct Decision {
    std::string session_id;
    int sync_id = 0;
    int participant = 0;
    std::set<std::string> accepted;
    std::map<std::string, std::map<std::string, nlohmann::json>> values;
};

struct Resolution {
    std::string session_id;
    int sync_id = 0;
    std::string label;
};

struct SubmitResult {
    std::optional<Resolution> resolved;
};

class Gateway {
public:
    /// Registers a session of `participants` participants. Idempotent.
    void open_session(const std::string& id, int participants);

    std::vector<std::string> sessions() const;

    /// Throws E-NOSESSION, E-NOPART.
    std::optional<PendingChoice> pending(const std::string& session, int participant) const;

    /// Throws E-NOSESSION, E-NOPART, E-STALE, E-BADLABEL, E-MISSINGARG.
    SubmitResult submit(const Decision& d);

    /// Publishes a blocking sync and waits until it is resolved. Throws
    /// E-CLOSED after shutdown.
    SyncChoice await(const std::string& session, const SyncRequest& req);

    /// Appends to a participant's received-data log.
    void record(const std::string& session, int participant, LogEntry entry);

    /// Resolution events numbered from 0; blocks up to `timeout_ms` for one
    /// past `after` when none is available yet.
    std::vector<Resolution> events_after(size_t after, int timeout_ms) const;

    /// Wakes every blocked waiter; pending choices are withdrawn.
    void shutdown();
    bool closed() const;

private:
    struct Session {
        int participants = 0;
        int sync_id = 0;
        bool blocked = false;
        SyncRequest request;
        std::map<int, std::set<std::string>> accepted;
        std::map<int, std::map<std::string, std::map<std::string, nlohmann::json>>> values;
        std::optional<SyncChoice> outcome;
        std::map<int, std::vector<LogEntry>> log;
    };

    const Session& session(const std::string& id, int participant) const;

    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    std::map<std::string, Session> sessions_;
    std::vector<Resolution> events_;
    bool closed_ = false;
};

/// Value of a sort from its JSON form; nullopt when the JSON does not fit.
std::optional<Value> json_value(const nlohmann::json& j, const SimpleType& sort);

nlohmann::json to_json(const PendingChoice& p);
nlohmann::json to_json(const Resolution& r);
/// Throws E-PARSE on malformed input.
Decision decision_from_json(const nlohmann::json& j);

/// Interactive choice policy: sync choices go through the gateway, rand
/// choices come from a seeded source. Feed every step to `observe`.
class GatewayPolicy : public ChoicePolicy {
public:
    GatewayPolicy(Gateway& gw, std::uint64_t seed) : gw_(gw), rng_(seed) {}
    SyncChoice choose_sync(const SyncRequest& req) override;
    size_t choose_index(size_t n) override;
    void observe(const StepLabel& s);

private:
    Gateway& gw_;
    std::mt19937_64 rng_;
};

/// HTTP front-end for the JSON protocol, with resolutions pushed as
/// server-sent events on GET /events.
class GatewayServer {
public:
    explicit GatewayServer(Gateway& gw);
    ~GatewayServer();
    GatewayServer(const GatewayServer&) = delete;
    GatewayServer& operator=(const GatewayServer&) = delete;

    /// Binds (port 0 picks a free one) and returns the port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks serving requests.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mpst
