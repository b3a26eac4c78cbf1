#pragma once

#include <string>
#include <vector>

#include "grappa/gsl/ast.hpp"
#include "grappa/gsl/interp.hpp"
#include "grappa/types.hpp"

namespace grappa::gsl {

struct validation_issue {
  std::string code;     // e.g. "WrongReturnShape"
  std::string message;
  span where;
  int probe = -1;       // index of the probe state that tripped it, if any
};

struct validation_report {
  bool ok = false;  // true exactly when `issues` is empty
  std::vector<validation_issue> issues;
  std::vector<validation_issue> warnings;  // e.g. unknown object names
  std::vector<double> probe_scores;        // score per probe on the first pass
  std::vector<std::string> referenced_objects;  // names seen in perception calls
};

// Report-only dry run: checks the entry exists with arity 2 and a usable
// default hidden map, evaluates every probe against a perception stub, checks
// return shape / finiteness, and chains a second evaluation per probe to
// confirm hidden-state value types stay stable.  Never throws for script
// defects; those become issues.
validation_report validate_format(const program& prog,
                                  const std::vector<robot_state>& probes,
                                  const std::vector<std::string>& known_objects,
                                  const eval_budget& budget = {});

// Default probe set: the 8 corners of the workspace plus its center.
std::vector<robot_state> default_probe_states(const workspace_bounds& bounds);

std::string render_report(const validation_report& report);

}  // namespace grappa::gsl
