#pragma once

// Erasure of symmetric synchronisation into conducted branching: processes
// are rewritten along their typing derivation, each session gains a
// conductor participant, and global types are translated to match.

#include "mpst/ast.hpp"
#include "mpst/typecheck.hpp"
#include "mpst/types.hpp"

#include <set>
#include <string>
#include <vector>

namespace mpst {

/// `cases_` followed by the labels, sorted and joined by `_`.
std::string cases_label(std::vector<std::string> labels);

/// Inverse of cases_label. Throws Error(E-LABELCHARS) on anything else.
std::vector<std::string> decode_cases_label(const std::string& label);

/// ⟦G⟧ for a session with `dims` (m channels, n participants): sums become
/// cases labels sent to participant n+1 on m+2i and answers on m+2i-1;
/// branchings also notify participant n+1 on m+2p.
GlobalPtr translate_global(const GlobalPtr& g, Dimensions dims);
GlobalPtr translate_global(const GlobalPtr& g);

/// Dimensions of a translated session: (m+2n, n+1).
Dimensions translated_dimensions(Dimensions d);

/// Every shared name and type declaration translated pointwise.
GlobalEnv translate_env(const GlobalEnv& gamma);

/// Names of the conductor channels of a session: in_1, out_1, ..., in_n,
/// out_n, derived from the first session channel.
std::vector<std::string> conductor_channels(const std::vector<std::string>& session_chans, int n,
                                            const std::string& tag = "_");

/// The conductor a[n+1](s̃, in_1, out_1, ...). C, generated from the
/// projection of the translated type on participant n+1. `def_prefix` names
/// its recursive definitions; the names used are added to `defs`.
ProcPtr conductor(const GlobalPtr& g, Dimensions dims, const std::vector<std::string>& session_chans,
                  const std::string& shared, const std::string& def_prefix, std::vector<std::string>* defs = nullptr,
                  const std::string& tag = "_");

struct ErasedProgram {
    Program program;
    std::set<std::string> conductor_chans;  // source-level names of every in/out channel introduced
    std::set<std::string> conductor_defs;   // recursive definitions of the conductors
    GlobalEnv translated_env;
};

/// 𝓔⟦D⟧ for a derivation of a closed program. Throws E-ERASE-DELEG for
/// delegation, E-ERASE-GUISYNC for guisync, E-LABELCHARS for sum labels that
/// cannot be encoded. Declarations come from the derivation's Γ.
ErasedProgram erase(const Derivation& d);

/// Typechecks `prog` and erases it, keeping its declaration order.
ErasedProgram erase(const Program& prog);

/// `{"conductorChans": [...], "conductorDefs": [...]}`
std::string manifest_json(const ErasedProgram& e);

/// Leaf case combinations of a conductor: distinct sequences of branch arms
/// taken along root-to-leaf paths, rand choices not counted.
size_t conductor_case_count(const ProcPtr& conductor);

}  // namespace mpst
