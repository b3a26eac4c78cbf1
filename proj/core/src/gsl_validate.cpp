#include "grappa/gsl/validate.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "grappa/errors.hpp"
#include "grappa/gsl/parser.hpp"
#include "grappa/grounding.hpp"

namespace grappa::gsl {

namespace {

const char* fault_code(eval_fault fault) {
  switch (fault) {
    case eval_fault::non_finite: return "NonFiniteScore";
    case eval_fault::wrong_return_shape: return "WrongReturnShape";
    case eval_fault::hidden_type: return "HiddenStateType";
    default: return "RuntimeIssue";
  }
}

bool same_hidden_types(const hidden_state& a, const hidden_state& b,
                       std::string& detail) {
  for (const auto& [key, v] : a) {
    auto it = b.find(key);
    if (it == b.end()) {
      detail = "key '" + key + "' disappeared between steps";
      return false;
    }
    if (v.index() != it->second.index()) {
      detail = "key '" + key + "' changed type between steps";
      return false;
    }
  }
  for (const auto& [key, v] : b) {
    if (a.find(key) == a.end()) {
      detail = "key '" + key + "' appeared only on the second step";
      return false;
    }
  }
  return true;
}

}  // namespace

validation_report validate_format(const program& prog,
                                  const std::vector<robot_state>& probes,
                                  const std::vector<std::string>& known_objects,
                                  const eval_budget& budget) {
  validation_report report;

  if (!prog.has_entry()) {
    report.issues.push_back({"MissingEntry",
                             "program defines no 'guidance' function",
                             span{}, -1});
    report.ok = false;
    return report;
  }
  const fn_decl& entry = prog.functions[prog.entry];
  if (entry.params.size() != 2) {
    report.issues.push_back(
        {"WrongArity",
         "'guidance' must take (state, prev), found " +
             std::to_string(entry.params.size()) + " parameter(s)",
         entry.where, -1});
    report.ok = false;
    return report;
  }
  if (entry.params[1].default_value && prog.default_hidden.empty()) {
    auto folded = try_const_eval(*entry.params[1].default_value);
    if (!folded.has_value() || !folded->is_map()) {
      report.issues.push_back(
          {"BadDefault",
           "default for '" + entry.params[1].name +
               "' must be a constant map of booleans and numbers",
           entry.params[1].default_value->where, -1});
    } else if (!folded->as_map().entries.empty()) {
      report.issues.push_back(
          {"BadDefault",
           "default hidden map may only hold booleans and finite numbers "
           "under identifier keys",
           entry.params[1].default_value->where, -1});
    }
  }

  std::set<std::string> seen_objects;
  perception_fn stub = stub_perception();

  for (std::size_t i = 0; i < probes.size(); ++i) {
    int probe = static_cast<int>(i);
    try {
      eval_outcome first = evaluate(prog, probes[i], prog.default_hidden, stub, budget);
      report.probe_scores.push_back(first.score);
      for (const auto& call : first.perception_calls) {
        seen_objects.insert(call.object);
      }
      eval_outcome second =
          evaluate(prog, probes[i], first.next_hidden, stub, budget);
      for (const auto& call : second.perception_calls) {
        seen_objects.insert(call.object);
      }
      std::string detail;
      if (!same_hidden_types(first.next_hidden, second.next_hidden, detail)) {
        report.issues.push_back({"TypeUnstable", detail, entry.where, probe});
      }
    } catch (const eval_error& e) {
      report.issues.push_back({fault_code(e.fault()), e.what(), e.where(), probe});
    } catch (const budget_exceeded_error& e) {
      report.issues.push_back({"BudgetExceeded", e.what(), span{}, probe});
    } catch (const perception_lost_error& e) {
      report.issues.push_back({"RuntimeIssue", e.what(), span{}, probe});
    }
  }

  std::set<std::string> known;
  for (const auto& name : known_objects) {
    known.insert(normalize_object_name(name));
  }
  for (const auto& object : seen_objects) {
    report.referenced_objects.push_back(object);
    if (known.find(normalize_object_name(object)) == known.end()) {
      report.warnings.push_back(
          {"UnknownObject",
           "object '" + object + "' is not in the known-object list",
           span{}, -1});
    }
  }

  report.ok = report.issues.empty();
  return report;
}

std::vector<robot_state> default_probe_states(const workspace_bounds& bounds) {
  std::vector<robot_state> probes;
  for (double x : bounds.x) {
    for (double y : bounds.y) {
      for (double z : bounds.z) {
        robot_state s;
        s.position = {x, y, z};
        probes.push_back(s);
      }
    }
  }
  robot_state center;
  center.position = bounds.center();
  probes.push_back(center);
  return probes;
}

std::string render_report(const validation_report& report) {
  std::ostringstream out;
  out << (report.ok ? "ok" : "invalid") << "\n";
  for (const auto& issue : report.issues) {
    out << "issue " << issue.code;
    if (issue.where.line > 0) out << " at " << to_string(issue.where);
    if (issue.probe >= 0) out << " (probe " << issue.probe << ")";
    out << ": " << issue.message << "\n";
  }
  for (const auto& warning : report.warnings) {
    out << "warning " << warning.code << ": " << warning.message << "\n";
  }
  return out.str();
}

}  // namespace grappa::gsl
