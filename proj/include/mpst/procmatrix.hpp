#pragma once

// Process Matrix workflow tables and their encoding as global types with
// symmetric sums.

#include "mpst/ast.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace mpst {

enum class Access { Read, Write, None };

struct MatrixAction {
    int id = 0;
    std::string name;
    std::set<int> preds;
    std::map<std::string, Access> access;  // roles missing here have no access
    SimpleType data;
};

struct ProcessMatrix {
    std::vector<std::string> roles;  // participant p is roles[p-1]
    std::vector<MatrixAction> actions;

    const MatrixAction& action(int id) const;
    Access access(const MatrixAction& a, const std::string& role) const;
};

using WorkflowState = std::set<int>;  // executed action ids

/// Parses and validates the JSON document. Errors: E-PARSE (not the matrix
/// schema), E-DUPID (repeated action id or role), E-BADACCESS (unknown role
/// or access value), E-UNKNOWNPRED, E-CYCLE, E-NOWRITER.
ProcessMatrix load_matrix(const std::string& json_text, const std::string& file = "<matrix>");

/// Throws the first validation error of `m`, as load_matrix does.
void validate_matrix(const ProcessMatrix& m);

/// Ids whose predecessors have all been executed.
std::set<int> executable(const ProcessMatrix& m, const WorkflowState& st);

/// `st` with `id` executed and every transitive dependent of `id` removed.
WorkflowState successor(const ProcessMatrix& m, const WorkflowState& st, int id);

/// Label for role `role` executing `a`: role name then action name, letters
/// and digits only.
std::string matrix_label(const std::string& role, const MatrixAction& a);

/// `state_1_2` for {1,2}; `state` for the empty state.
std::string state_name(const WorkflowState& st);

/// The global type of the workflow, starting from the empty state.
GlobalPtr encode(const ProcessMatrix& m);

}  // namespace mpst
