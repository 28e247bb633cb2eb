#pragma once

#include "mpst/runtime.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mpst::detail {

using Subst = std::map<std::string, Value>;

/// Capture-free substitution of values for variables and of names (given as
/// NameValue) for channel identifiers.
ProcPtr subst(const ProcPtr& p, const Subst& s);

/// Every value `e` may evaluate to (several when it contains rand). Throws
/// Error(E-EVAL).
std::vector<Value> eval_all(const ExprPtr& e);

/// Adds `t` to `out` in normal form: parallel compositions split, inaction
/// dropped, restrictions freshened, definitions pushed onto the frame.
void spawn(Config& c, std::vector<Thread>& out, Thread t);

struct SyncRedex {
    int session = 0;
    std::vector<size_t> threads;  // by participant, index p-1
    std::vector<std::string> common;
};

/// The sync redex thread `i` takes part in, when every participant of its
/// session sits at a sync on the same channels.
std::optional<SyncRedex> sync_redex(const Config& c, size_t i);

SyncRequest sync_request(const Config& c, const SyncRedex& r);

/// Fires the sync with `label`, binding guisync arguments from `args`
/// (defaults for the missing ones).
Step fire_sync(const Config& c, const SyncRedex& r, const std::string& label, const std::map<std::string, Value>& args);

int role_of(const Config& c, const Thread& t, const std::string& chan);

}  // namespace mpst::detail
