#pragma once

// Projection, coherence, equi-recursive equality and reduction of session
// environments.

#include "mpst/ast.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace mpst {

struct Dimensions {
    int channels = 0;
    int participants = 0;
    bool operator==(const Dimensions&) const = default;
};

/// Largest channel index and participant id occurring in `g` (0 when absent).
Dimensions dimensions(const GlobalPtr& g);

std::set<int> participants(const GlobalPtr& g);

/// G ↾ p. Throws Error(E-UNDEF-PROJ) when the projection is undefined.
LocalPtr project(const GlobalPtr& g, int p);

/// All coherence violations of `g`: undefined projections for any p ≤ n and
/// linearity races. Empty means coherent.
std::vector<Diagnostic> coherence_errors(const GlobalPtr& g);

/// Throws Error with every coherence diagnostic when `g` is not coherent.
void check_coherent(const GlobalPtr& g);

/// Bisimilarity of closed, guarded local types under unfolding.
bool type_equal(const LocalPtr& a, const LocalPtr& b);
bool type_equal(const MsgType& a, const MsgType& b);

/// One-level unfolding of leading recursion binders.
LocalPtr unfold(const LocalPtr& t);
GlobalPtr unfold(const GlobalPtr& g);

LocalPtr substitute(const LocalPtr& t, const std::string& var, const LocalPtr& with);
GlobalPtr substitute(const GlobalPtr& g, const std::string& var, const GlobalPtr& with);

/// True when the type has no communication before reaching `end`.
bool is_end(const LocalPtr& t);

// ---------------------------------------------------------------------------
// Environments

/// s̃ : T@(p,n)
struct SessionEntry {
    std::vector<std::string> chans;
    LocalPtr type;
    int participant = 1;
    int participants = 1;
    bool operator==(const SessionEntry&) const = default;
};

/// Δ. Several entries may share a channel vector when the environment
/// describes more than one endpoint of a session (as after [Conc]).
using SessionEnv = std::vector<SessionEntry>;

std::string render(const SessionEntry& e);
std::string render(const SessionEnv& env);

/// Δ → Δ′: every environment reachable by one type-level communication.
std::vector<SessionEnv> type_reduce(const SessionEnv& env);

/// A shared name a : ⟨G⟩. `dims` may exceed dimensions(G) when the session
/// reserves channels or participants that G does not use (translated types).
struct SharedDecl {
    std::string type_name;
    GlobalPtr type;
    Dimensions dims;
};

struct SessionParam {
    LocalPtr type;
    int participant = 1;
    int participants = 1;
    int channels = 1;
};

/// X : S̃ T̃
struct ProcSig {
    std::vector<SimpleType> value_sorts;
    std::vector<SessionParam> sessions;
};

/// Γ
struct GlobalEnv {
    std::map<std::string, TypeDecl> types;
    std::map<std::string, SharedDecl> shared;
    std::map<std::string, ProcSig> procs;
    std::map<std::string, SimpleType> values;
};

/// Γ built from a program's `type` and `chan` declarations. Checks every
/// declared type for coherence.
GlobalEnv env_from_program(const Program& prog);

/// Dimensions recorded for a declaration: its own, or the reserved ones.
Dimensions declared_dimensions(const TypeDecl& d);

}  // namespace mpst
