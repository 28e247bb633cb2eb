#pragma once

// Small-step interpreter with asynchronous queues, a session registry, choice
// policies and bounded state-space exploration.

#include "mpst/ast.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace mpst {

// ---------------------------------------------------------------------------
// Configurations

/// Definitions in scope for a thread, innermost first.
struct DefFrame {
    std::vector<Definition> defs;
    std::shared_ptr<const DefFrame> parent;
    std::string key;  // canonical text of this frame and its parents
};
using FramePtr = std::shared_ptr<const DefFrame>;

struct Thread {
    ProcPtr proc;
    FramePtr frame;
    std::map<int, int> roles;  // session id -> participant played
};

struct QueueItem {
    Message msg;
    int role = 0;  // delegated sessions: the participant the receiver takes over
    bool operator==(const QueueItem&) const = default;
};

struct SessionInfo {
    int id = 0;
    std::string shared;
    std::vector<std::string> chans;  // runtime names
    int participants = 0;
    int syncs = 0;  // synchronisations completed so far
};

struct Config {
    std::vector<Thread> soup;
    std::map<std::string, std::deque<QueueItem>> queues;
    std::map<int, SessionInfo> sessions;
    std::map<std::string, int> chan_session;
    int next_session = 1;
    int next_name = 1;
    bool success = false;  // a ✓ has been observed
};

/// The configuration running `p` with no sessions open.
Config initial_config(const ProcPtr& p);

/// No thread left except ✓.
bool terminated(const Config& c);

/// Canonical text of a configuration; equal keys mean equal states.
std::string config_key(const Config& c);

std::string render(const Config& c);

// ---------------------------------------------------------------------------
// Steps

enum class StepKind { Link, Send, Recv, Label, Branch, Deleg, SRec, IfT, IfF, Def, Rand, Sync };

const char* step_kind_name(StepKind k);

struct StepLabel {
    StepKind kind = StepKind::Link;
    std::vector<std::string> chans;  // subject channel(s), runtime names; Rand: the selecting channel, if any
    int session = 0;                 // 0 when the step is outside any session
    int participant = 0;             // 0 when several participants act together
    std::string payload;
    std::string label;     // Label, Branch, Sync: the label; Rand: first selection of the chosen branch
    std::string def_name;  // Def
    int sync_index = 0;    // Sync: 1-based ordinal within the session
    int choice = 0;        // Rand: branch index
    int participants = 0;  // Link: size of the new session
    std::map<std::string, Value> args;  // guisync arguments bound
};

/// `step#, kind, channel, participant, payload`
std::string format_step(size_t index, const StepLabel& s);

struct Step {
    StepLabel label;
    Config next;
    size_t redex = 0;  // steps sharing a redex are alternative outcomes of one choice
};

/// Every one-step successor, redexes in soup order. Alternatives of one redex
/// (rand branches, common sync labels, outcomes of rand expressions) are
/// adjacent and share `redex`.
std::vector<Step> enabled_steps(const Config& c);

/// Communication faults visible in `c`: a queue head that its consumer cannot
/// take, a value of the wrong sort for an annotated receive, or a sync whose
/// participants are all present without a common label.
std::vector<std::string> config_faults(const Config& c);

// ---------------------------------------------------------------------------
// Choice policies

struct SyncRequest {
    int session = 0;
    int sync_index = 0;
    std::string shared;
    std::vector<std::string> chans;
    std::vector<std::vector<std::string>> offered;  // per participant, index p-1
    std::vector<std::vector<std::string>> mandatory;
    std::vector<std::string> common;  // sorted
    std::map<std::string, std::vector<Param>> args;  // guisync parameters per label
    std::vector<std::map<std::string, std::vector<Param>>> own_args;  // per participant, index p-1
};

struct SyncChoice {
    std::string label;
    std::map<std::string, Value> args;
};

class ChoicePolicy {
public:
    virtual ~ChoicePolicy() = default;
    virtual SyncChoice choose_sync(const SyncRequest& req) = 0;
    /// Index in [0, n) for a rand process or a rand expression.
    virtual size_t choose_index(size_t n) = 0;
};

/// Default argument for a sort: 0, false, "".
Value default_value(const SimpleType& s);

class UniformPolicy : public ChoicePolicy {
public:
    explicit UniformPolicy(std::uint64_t seed) : rng_(seed) {}
    SyncChoice choose_sync(const SyncRequest& req) override;
    size_t choose_index(size_t n) override;

private:
    std::mt19937_64 rng_;
};

struct ScriptRecord {
    int session = 0;
    int sync_index = 0;
    std::string label;
    std::map<std::string, Value> args;
};

/// Lines `session, syncIndex, label[, arg=value...]`; `//` comments.
std::vector<ScriptRecord> parse_script(const std::string& text, const std::string& file = "<script>");

/// Sync choices from a script (E-SCRIPT when missing or not offered); rand
/// choices from a seeded source.
class ScriptedPolicy : public ChoicePolicy {
public:
    ScriptedPolicy(std::vector<ScriptRecord> records, std::uint64_t seed) : records_(std::move(records)), rng_(seed) {}
    SyncChoice choose_sync(const SyncRequest& req) override;
    size_t choose_index(size_t n) override;

private:
    std::vector<ScriptRecord> records_;
    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Runs

enum class Verdict { Terminated, Stuck, FuelExhausted };

const char* verdict_name(Verdict v);

struct Trace {
    std::vector<StepLabel> steps;
    Config final;
    Verdict verdict = Verdict::Terminated;
    bool success = false;
};

/// Repeatedly fires the first enabled redex, resolving its alternatives with
/// the policy. A step may also be observed through `on_step`.
Trace run(const Config& init, ChoicePolicy& policy, size_t fuel,
          const std::function<void(const StepLabel&)>& on_step = {});

std::string format_trace(const Trace& t);

// ---------------------------------------------------------------------------
// Classification of erased-program steps

/// Conduction steps: label or branch on a conductor channel, or unfolding a
/// conductor definition. Names are compared without their runtime suffix.
bool is_conduction(const StepLabel& s, const std::set<std::string>& conductor_chans,
                   const std::set<std::string>& conductor_defs);

/// `d#3` -> `d`
std::string base_name(const std::string& runtime_name);

// ---------------------------------------------------------------------------
// Exploration

struct ExploreOptions {
    int depth = 200;
    size_t max_nodes = 200000;
};

struct ExploreNode {
    Config config;
    int depth = 0;
    std::vector<std::pair<StepLabel, size_t>> edges;
    std::vector<std::string> faults;
};

struct ExploreResult {
    std::vector<ExploreNode> nodes;
    bool truncated = false;  // some node at the depth bound still had successors
    size_t terminal = 0;     // nodes with no successor that are terminated
    size_t stuck = 0;        // nodes with no successor that are not
    bool success_reachable = false;
    std::vector<std::string> faults;  // "node N: ..." for every faulty node
};

/// Breadth-first exploration from `init`. Throws Error(E-BOUND) when more
/// than `max_nodes` distinct configurations are reached.
ExploreResult explore(const Config& init, const ExploreOptions& opts = {});

/// Distinct sequences of decision labels (selections and sync labels) along
/// paths from the root to terminal nodes.
std::set<std::vector<std::string>> decision_traces(const ExploreResult& g);

/// Is there a run from `init` whose observable steps are exactly `obs`?
/// `observe` maps a step to its observation, or nullopt for silent steps.
/// With `to_end`, the run must also reach a terminated configuration.
bool find_run(const Config& init, const std::vector<std::string>& obs,
              const std::function<std::optional<std::string>(const StepLabel&)>& observe, bool to_end,
              size_t max_nodes = 500000);

}  // namespace mpst
