#pragma once

// The judgement Γ ⊢ P ▷ Δ, producing a derivation tree.

#include "mpst/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mpst {

enum class Rule { Mcast, Macc, Sync, Rand, Send, Rcv, Sel, Branch, Conc, If, Deleg, SRec, Def, Call, Inact, Res, Succ };

const char* rule_name(Rule r);

struct Derivation {
    Rule rule = Rule::Inact;
    std::shared_ptr<const GlobalEnv> gamma;
    ProcPtr process;
    SessionEnv delta;
    std::vector<Derivation> premises;

    // Side data, meaningful for the rules noted.
    std::string shared;                  // Mcast, Macc: the shared name a
    GlobalPtr global;                    // Mcast, Macc
    Dimensions dims;                     // Mcast, Macc: (m, n)
    int participant = 0;                 // Mcast, Macc, Sync, Sel, Branch, Send, Rcv, Deleg, SRec
    std::vector<std::string> chans;      // the session vector the rule acts on
    LocalPtr session_type;               // type of `chans` before the step
    std::vector<std::string> labels;     // Sync: offered labels L''
    std::vector<ProcSig> sigs;           // Def: one per definition; Call: the callee's
};

/// Γ ⊢ P ▷ ∅. Throws Error carrying every diagnostic found.
Derivation typecheck(const GlobalEnv& gamma, const ProcPtr& p);

/// Builds Γ from the program's declarations and checks its body.
Derivation typecheck(const Program& prog);

/// Checks the single request or accept in `p` as participant `role` of `g`.
/// `p` must use `a` as its shared name.
void check_role(const GlobalPtr& g, int role, const ProcPtr& p, const GlobalEnv& gamma = {});

/// Re-checks every node against its rule using only the node and its
/// premises' conclusions. Returns the violations found.
std::vector<Diagnostic> validate_derivation(const Derivation& d);

/// The checked process with receive sorts and sync mandatory markers filled
/// in from the types.
ProcPtr elaborate(const Derivation& d);

}  // namespace mpst
