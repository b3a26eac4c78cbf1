#include "grappa/gsl/interp.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "grappa/gsl/parser.hpp"

namespace grappa::gsl {

namespace {

constexpr int kMaxCallDepth = 16;
constexpr double kPi = 3.141592653589793238462643383279502884;

struct return_value {
  value primary;
  std::optional<value> secondary;
};

double require_number(const value& v, span where, const char* what) {
  if (!v.is_number()) {
    throw eval_error(where, eval_fault::type,
                     std::string(what) + " must be a number, got " + v.type_name());
  }
  return v.as_number();
}

bool require_bool(const value& v, span where, const char* what) {
  if (!v.is_bool()) {
    throw eval_error(where, eval_fault::type,
                     std::string(what) + " must be a boolean, got " + v.type_name());
  }
  return v.as_bool();
}

const std::vector<double>& require_vector(const value& v, span where,
                                          const char* what) {
  if (!v.is_vector()) {
    throw eval_error(where, eval_fault::type,
                     std::string(what) + " must be a vector, got " + v.type_name());
  }
  return v.as_vector();
}

double checked(double v, span where, const char* what) {
  if (!std::isfinite(v)) {
    throw eval_error(where, eval_fault::non_finite,
                     std::string(what) + " produced a non-finite value");
  }
  return v;
}

std::size_t require_index(double raw, std::size_t len, span where) {
  double rounded = std::nearbyint(raw);
  if (std::fabs(raw - rounded) > 1e-9) {
    throw eval_error(where, eval_fault::index, "index must be an integer");
  }
  if (rounded < 0.0 || rounded >= static_cast<double>(len)) {
    throw eval_error(where, eval_fault::index,
                     "index " + std::to_string(static_cast<long long>(rounded)) +
                         " out of range for length " + std::to_string(len));
  }
  return static_cast<std::size_t>(rounded);
}

class interpreter {
 public:
  interpreter(const program& prog, const perception_fn& perception,
              const eval_budget& budget)
      : prog_(prog), perception_(perception), budget_(budget) {}

  eval_outcome run(const robot_state& state, const hidden_state& hidden) {
    if (!prog_.has_entry()) {
      throw eval_error(span{}, eval_fault::unknown_function,
                       "program has no 'guidance' entry");
    }
    const fn_decl& entry = prog_.functions[prog_.entry];
    if (entry.params.size() != 2) {
      throw eval_error(entry.where, eval_fault::arity,
                       "'guidance' must take exactly (state, prev)");
    }

    std::vector<value> args;
    auto arr = state.to_array();
    args.emplace_back(std::vector<double>(arr.begin(), arr.end()));
    value_map prev;
    for (const auto& [key, hv] : hidden) {
      if (std::holds_alternative<bool>(hv)) {
        prev.set(key, value(std::get<bool>(hv)));
      } else {
        prev.set(key, value(std::get<double>(hv)));
      }
    }
    args.emplace_back(std::move(prev));

    return_value ret = call_decl(entry, std::move(args), entry.where);
    if (!ret.secondary.has_value()) {
      throw eval_error(entry.where, eval_fault::wrong_return_shape,
                       "'guidance' must return a (score, hidden) pair");
    }

    eval_outcome out;
    if (!ret.primary.is_number()) {
      throw eval_error(entry.where, eval_fault::wrong_return_shape,
                       std::string("score must be a number, got ") +
                           ret.primary.type_name());
    }
    out.score = checked(ret.primary.as_number(), entry.where, "score");

    if (!ret.secondary->is_map()) {
      throw eval_error(entry.where, eval_fault::wrong_return_shape,
                       std::string("hidden state must be a map, got ") +
                           ret.secondary->type_name());
    }
    for (const auto& [key, v] : ret.secondary->as_map().entries) {
      if (!valid_hidden_key(key)) {
        throw eval_error(entry.where, eval_fault::hidden_type,
                         "hidden key '" + key + "' is not an identifier");
      }
      if (v.is_bool()) {
        out.next_hidden[key] = v.as_bool();
      } else if (v.is_number()) {
        out.next_hidden[key] =
            checked(v.as_number(), entry.where, "hidden value");
      } else {
        throw eval_error(entry.where, eval_fault::hidden_type,
                         "hidden value '" + key +
                             "' must be a boolean or number, got " +
                             std::string(v.type_name()));
      }
    }
    out.perception_calls = std::move(calls_);
    out.ops_used = ops_;
    return out;
  }

 private:
  struct frame {
    // name/value pairs plus scope markers; lookups walk backwards
    std::vector<std::pair<std::string, value>> vars;
    std::vector<std::size_t> scope_marks;
  };

  void tick() {
    if (++ops_ > budget_.max_ops) {
      throw budget_exceeded_error("more than " +
                                  std::to_string(budget_.max_ops) + " operations");
    }
  }

  value* lookup(frame& f, const std::string& name) {
    for (auto it = f.vars.rbegin(); it != f.vars.rend(); ++it) {
      if (it->first == name) return &it->second;
    }
    return nullptr;
  }

  return_value call_decl(const fn_decl& fn, std::vector<value> args, span where) {
    if (++depth_ > kMaxCallDepth) {
      --depth_;
      throw eval_error(where, eval_fault::call_depth,
                       "call depth limit of " + std::to_string(kMaxCallDepth) +
                           " exceeded (recursion is not allowed)");
    }
    if (args.size() > fn.params.size()) {
      --depth_;
      throw eval_error(where, eval_fault::arity,
                       "'" + fn.name + "' takes " +
                           std::to_string(fn.params.size()) + " arguments, got " +
                           std::to_string(args.size()));
    }
    frame f;
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
      if (i < args.size()) {
        f.vars.emplace_back(fn.params[i].name, std::move(args[i]));
      } else if (fn.params[i].default_value) {
        auto folded = try_const_eval(*fn.params[i].default_value);
        if (!folded.has_value()) {
          --depth_;
          throw eval_error(fn.params[i].default_value->where, eval_fault::type,
                           "default value must be a constant");
        }
        f.vars.emplace_back(fn.params[i].name, std::move(*folded));
      } else {
        --depth_;
        throw eval_error(where, eval_fault::arity,
                         "missing argument '" + fn.params[i].name + "' for '" +
                             fn.name + "'");
      }
    }
    std::optional<return_value> ret;
    try {
      ret = exec_block(f, fn.body);
    } catch (...) {
      --depth_;
      throw;
    }
    --depth_;
    if (!ret.has_value()) {
      throw eval_error(fn.where, eval_fault::wrong_return_shape,
                       "'" + fn.name + "' ended without returning");
    }
    return std::move(*ret);
  }

  std::optional<return_value> exec_block(frame& f, const block& b) {
    f.scope_marks.push_back(f.vars.size());
    std::optional<return_value> ret;
    for (const auto& s : b.stmts) {
      ret = exec_stmt(f, *s);
      if (ret.has_value()) break;
    }
    f.vars.resize(f.scope_marks.back());
    f.scope_marks.pop_back();
    return ret;
  }

  std::optional<return_value> exec_stmt(frame& f, const stmt& s) {
    tick();
    if (const auto* let = std::get_if<let_stmt>(&s.node)) {
      value v = eval(f, *let->value);
      f.vars.emplace_back(let->name, std::move(v));
      return std::nullopt;
    }
    if (const auto* assign = std::get_if<assign_stmt>(&s.node)) {
      value v = eval(f, *assign->value);
      assign_into(f, *assign->target, std::move(v));
      return std::nullopt;
    }
    if (const auto* cond = std::get_if<if_stmt>(&s.node)) {
      bool taken = require_bool(eval(f, *cond->cond), cond->cond->where,
                                "if condition");
      if (taken) return exec_block(f, cond->then_body);
      if (cond->else_body.has_value()) return exec_block(f, *cond->else_body);
      return std::nullopt;
    }
    if (const auto* loop = std::get_if<for_stmt>(&s.node)) {
      value iterable = eval(f, *loop->iterable);
      const auto& items =
          require_vector(iterable, loop->iterable->where, "for iterable");
      if (items.size() > budget_.max_loop_iters) {
        throw budget_exceeded_error("loop of " + std::to_string(items.size()) +
                                    " iterations exceeds the limit of " +
                                    std::to_string(budget_.max_loop_iters));
      }
      for (double item : items) {
        f.scope_marks.push_back(f.vars.size());
        f.vars.emplace_back(loop->var, value(item));
        std::optional<return_value> ret;
        for (const auto& body_stmt : loop->body.stmts) {
          ret = exec_stmt(f, *body_stmt);
          if (ret.has_value()) break;
        }
        f.vars.resize(f.scope_marks.back());
        f.scope_marks.pop_back();
        if (ret.has_value()) return ret;
      }
      return std::nullopt;
    }
    if (const auto* ret = std::get_if<return_stmt>(&s.node)) {
      return_value out;
      out.primary = eval(f, *ret->value);
      if (ret->second) out.secondary = eval(f, *ret->second);
      return out;
    }
    const auto& es = std::get<expr_stmt>(s.node);
    eval(f, *es.value);
    return std::nullopt;
  }

  void assign_into(frame& f, const expr& target, value v) {
    if (const auto* id = std::get_if<identifier>(&target.node)) {
      value* slot = lookup(f, id->name);
      if (slot == nullptr) {
        throw eval_error(target.where, eval_fault::unknown_variable,
                         "assignment to undeclared variable '" + id->name +
                             "' (use 'let' first)");
      }
      *slot = std::move(v);
      return;
    }
    const auto* idx = std::get_if<index_expr>(&target.node);
    if (idx == nullptr) {
      throw eval_error(target.where, eval_fault::type,
                       "cannot assign to this expression");
    }
    value* container = resolve_lvalue(f, *idx->object);
    value key = eval(f, *idx->index);
    if (container->is_map()) {
      if (!key.is_string()) {
        throw eval_error(idx->index->where, eval_fault::key,
                         "map keys must be strings");
      }
      std::get<value_map>(container->v).set(key.as_string(), std::move(v));
      return;
    }
    if (container->is_vector()) {
      auto& vec = std::get<std::vector<double>>(container->v);
      std::size_t i = require_index(
          require_number(key, idx->index->where, "vector index"), vec.size(),
          idx->index->where);
      vec[i] = checked(require_number(v, target.where, "vector element"),
                       target.where, "vector element");
      return;
    }
    throw eval_error(target.where, eval_fault::type,
                     std::string("cannot index into ") + container->type_name());
  }

  // Resolves the container an indexed assignment writes into.  Intermediate
  // hops must already exist.
  value* resolve_lvalue(frame& f, const expr& e) {
    if (const auto* id = std::get_if<identifier>(&e.node)) {
      value* slot = lookup(f, id->name);
      if (slot == nullptr) {
        throw eval_error(e.where, eval_fault::unknown_variable,
                         "unknown variable '" + id->name + "'");
      }
      return slot;
    }
    if (const auto* idx = std::get_if<index_expr>(&e.node)) {
      value* container = resolve_lvalue(f, *idx->object);
      value key = eval(f, *idx->index);
      if (container->is_map()) {
        if (!key.is_string()) {
          throw eval_error(idx->index->where, eval_fault::key,
                           "map keys must be strings");
        }
        value* inner = std::get<value_map>(container->v).find(key.as_string());
        if (inner == nullptr) {
          throw eval_error(idx->index->where, eval_fault::key,
                           "map has no key '" + key.as_string() + "'");
        }
        return inner;
      }
      throw eval_error(e.where, eval_fault::type,
                       std::string("cannot index into ") + container->type_name());
    }
    throw eval_error(e.where, eval_fault::type,
                     "cannot assign to this expression");
  }

  value eval(frame& f, const expr& e) {
    tick();
    if (const auto* n = std::get_if<number_lit>(&e.node)) return value(n->value);
    if (const auto* b = std::get_if<bool_lit>(&e.node)) return value(b->value);
    if (const auto* s = std::get_if<string_lit>(&e.node)) return value(s->value);
    if (const auto* id = std::get_if<identifier>(&e.node)) {
      value* slot = lookup(f, id->name);
      if (slot == nullptr) {
        throw eval_error(e.where, eval_fault::unknown_variable,
                         "unknown variable '" + id->name + "'");
      }
      return *slot;
    }
    if (const auto* vec = std::get_if<vector_lit>(&e.node)) {
      std::vector<double> out;
      out.reserve(vec->items.size());
      for (const auto& item : vec->items) {
        out.push_back(require_number(eval(f, *item), item->where,
                                     "vector element"));
      }
      return value(std::move(out));
    }
    if (const auto* map = std::get_if<map_lit>(&e.node)) {
      value_map out;
      for (const auto& [key, item] : map->entries) {
        out.set(key, eval(f, *item));
      }
      return value(std::move(out));
    }
    if (const auto* u = std::get_if<unary_expr>(&e.node)) {
      value operand = eval(f, *u->operand);
      if (u->op == unary_op::negate) {
        return value(-require_number(operand, e.where, "unary '-' operand"));
      }
      return value(!require_bool(operand, e.where, "'not' operand"));
    }
    if (const auto* b = std::get_if<binary_expr>(&e.node)) return eval_binary(f, e, *b);
    if (const auto* idx = std::get_if<index_expr>(&e.node)) {
      value object = eval(f, *idx->object);
      value key = eval(f, *idx->index);
      if (object.is_vector()) {
        const auto& vec = object.as_vector();
        std::size_t i = require_index(
            require_number(key, idx->index->where, "vector index"), vec.size(),
            idx->index->where);
        return value(vec[i]);
      }
      if (object.is_map()) {
        if (!key.is_string()) {
          throw eval_error(idx->index->where, eval_fault::key,
                           "map keys must be strings");
        }
        const value* found = object.as_map().find(key.as_string());
        if (found == nullptr) {
          throw eval_error(idx->index->where, eval_fault::key,
                           "map has no key '" + key.as_string() + "'");
        }
        return *found;
      }
      throw eval_error(e.where, eval_fault::type,
                       std::string("cannot index into ") + object.type_name());
    }
    if (const auto* sl = std::get_if<slice_expr>(&e.node)) {
      value object = eval(f, *sl->object);
      const auto& vec = require_vector(object, sl->object->where,
                                       "slice target");
      double lo_raw = require_number(eval(f, *sl->lo), sl->lo->where, "slice start");
      double hi_raw = require_number(eval(f, *sl->hi), sl->hi->where, "slice end");
      std::size_t lo = require_index(lo_raw, vec.size() + 1, sl->lo->where);
      std::size_t hi = require_index(hi_raw, vec.size() + 1, sl->hi->where);
      if (lo > hi) {
        throw eval_error(e.where, eval_fault::index,
                         "slice start is past the slice end");
      }
      return value(std::vector<double>(vec.begin() + lo, vec.begin() + hi));
    }
    const auto& call = std::get<call_expr>(e.node);
    std::vector<value> args;
    args.reserve(call.args.size());
    for (const auto& arg : call.args) args.push_back(eval(f, *arg));
    const fn_decl* user = prog_.find(call.callee);
    if (user != nullptr) {
      return_value ret = call_decl(*user, std::move(args), e.where);
      if (ret.secondary.has_value()) {
        throw eval_error(e.where, eval_fault::type,
                         "pair return used as a plain value");
      }
      return std::move(ret.primary);
    }
    return call_builtin(call.callee, args, e.where);
  }

  value eval_binary(frame& f, const expr& e, const binary_expr& b) {
    if (b.op == binary_op::logic_and || b.op == binary_op::logic_or) {
      bool lhs = require_bool(eval(f, *b.lhs), b.lhs->where, "logical operand");
      if (b.op == binary_op::logic_and && !lhs) return value(false);
      if (b.op == binary_op::logic_or && lhs) return value(true);
      return value(require_bool(eval(f, *b.rhs), b.rhs->where, "logical operand"));
    }
    value lv = eval(f, *b.lhs);
    value rv = eval(f, *b.rhs);
    if (b.op == binary_op::eq || b.op == binary_op::ne) {
      bool equal;
      if (lv.is_number() && rv.is_number()) equal = lv.as_number() == rv.as_number();
      else if (lv.is_bool() && rv.is_bool()) equal = lv.as_bool() == rv.as_bool();
      else if (lv.is_string() && rv.is_string()) equal = lv.as_string() == rv.as_string();
      else {
        throw eval_error(e.where, eval_fault::type,
                         std::string("cannot compare ") + lv.type_name() +
                             " with " + rv.type_name());
      }
      return value(b.op == binary_op::eq ? equal : !equal);
    }
    double lhs = require_number(lv, b.lhs->where, "arithmetic operand");
    double rhs = require_number(rv, b.rhs->where, "arithmetic operand");
    switch (b.op) {
      case binary_op::add: return value(checked(lhs + rhs, e.where, "'+'"));
      case binary_op::sub: return value(checked(lhs - rhs, e.where, "'-'"));
      case binary_op::mul: return value(checked(lhs * rhs, e.where, "'*'"));
      case binary_op::div: return value(checked(lhs / rhs, e.where, "'/'"));
      case binary_op::lt: return value(lhs < rhs);
      case binary_op::le: return value(lhs <= rhs);
      case binary_op::gt: return value(lhs > rhs);
      case binary_op::ge: return value(lhs >= rhs);
      default: break;
    }
    throw eval_error(e.where, eval_fault::type, "unsupported operator");
  }

  value perception_builtin(const std::string& name, geometry_kind kind,
                           const std::vector<value>& args, span where) {
    if (args.size() != 1 || !args[0].is_string()) {
      throw eval_error(where, eval_fault::arity,
                       name + " takes one object name");
    }
    calls_.push_back({name, args[0].as_string()});
    auto xyz = perception_(kind, args[0].as_string());
    return value(std::vector<double>(xyz.begin(), xyz.end()));
  }

  value call_builtin(const std::string& name, const std::vector<value>& args,
                     span where) {
    auto want = [&](std::size_t n) {
      if (args.size() != n) {
        throw eval_error(where, eval_fault::arity,
                         name + " takes " + std::to_string(n) + " argument" +
                             (n == 1 ? "" : "s") + ", got " +
                             std::to_string(args.size()));
      }
    };
    auto num = [&](std::size_t i, const char* what) {
      return require_number(args[i], where, what);
    };

    if (name == "get_position") {
      return perception_builtin(name, geometry_kind::position, args, where);
    }
    if (name == "get_size") {
      return perception_builtin(name, geometry_kind::size, args, where);
    }
    if (name == "get_orientation") {
      return perception_builtin(name, geometry_kind::orientation, args, where);
    }
    if (name == "abs") {
      want(1);
      return value(std::fabs(num(0, "abs argument")));
    }
    if (name == "min") {
      want(2);
      return value(std::min(num(0, "min argument"), num(1, "min argument")));
    }
    if (name == "max") {
      want(2);
      return value(std::max(num(0, "max argument"), num(1, "max argument")));
    }
    if (name == "clamp") {
      want(3);
      double x = num(0, "clamp value");
      double lo = num(1, "clamp bound");
      double hi = num(2, "clamp bound");
      if (lo > hi) {
        throw eval_error(where, eval_fault::type, "clamp bounds are inverted");
      }
      return value(std::min(std::max(x, lo), hi));
    }
    if (name == "sqrt") {
      want(1);
      return value(checked(std::sqrt(num(0, "sqrt argument")), where, "sqrt"));
    }
    if (name == "cos") {
      want(1);
      return value(std::cos(num(0, "cos argument")));
    }
    if (name == "sin") {
      want(1);
      return value(std::sin(num(0, "sin argument")));
    }
    if (name == "radians") {
      want(1);
      return value(num(0, "radians argument") * kPi / 180.0);
    }
    if (name == "degrees") {
      want(1);
      return value(num(0, "degrees argument") * 180.0 / kPi);
    }
    if (name == "norm") {
      want(1);
      const auto& v = require_vector(args[0], where, "norm argument");
      double sum = 0.0;
      for (double x : v) sum += x * x;
      return value(checked(std::sqrt(sum), where, "norm"));
    }
    if (name == "dist") {
      want(2);
      const auto& a = require_vector(args[0], where, "dist argument");
      const auto& b = require_vector(args[1], where, "dist argument");
      if (a.size() != b.size()) {
        throw eval_error(where, eval_fault::type,
                         "dist arguments must have the same length");
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
      }
      return value(checked(std::sqrt(sum), where, "dist"));
    }
    if (name == "dot") {
      want(2);
      const auto& a = require_vector(args[0], where, "dot argument");
      const auto& b = require_vector(args[1], where, "dot argument");
      if (a.size() != b.size()) {
        throw eval_error(where, eval_fault::type,
                         "dot arguments must have the same length");
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
      return value(checked(sum, where, "dot"));
    }
    if (name == "range") {
      if (args.size() < 1 || args.size() > 3) {
        throw eval_error(where, eval_fault::arity,
                         "range takes (stop), (start, stop), or "
                         "(start, stop, step)");
      }
      double start = args.size() == 1 ? 0.0 : num(0, "range start");
      double stop = args.size() == 1 ? num(0, "range stop") : num(1, "range stop");
      double step = args.size() == 3 ? num(2, "range step") : 1.0;
      if (step == 0.0) {
        throw eval_error(where, eval_fault::type, "range step must not be zero");
      }
      double count_d = std::ceil((stop - start) / step);
      if (count_d < 0.0) count_d = 0.0;
      if (count_d > static_cast<double>(budget_.max_loop_iters)) {
        throw budget_exceeded_error("range of " + std::to_string(count_d) +
                                    " elements exceeds the loop limit");
      }
      std::vector<double> out;
      auto count = static_cast<std::size_t>(count_d);
      out.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        out.push_back(start + step * static_cast<double>(i));
      }
      return value(std::move(out));
    }
    if (name == "len") {
      want(1);
      if (args[0].is_vector()) {
        return value(static_cast<double>(args[0].as_vector().size()));
      }
      if (args[0].is_map()) {
        return value(static_cast<double>(args[0].as_map().size()));
      }
      throw eval_error(where, eval_fault::type,
                       "len takes a vector or a map");
    }
    throw eval_error(where, eval_fault::unknown_function,
                     "unknown function '" + name + "'");
  }

  const program& prog_;
  const perception_fn& perception_;
  eval_budget budget_;
  std::size_t ops_ = 0;
  int depth_ = 0;
  std::vector<perception_call> calls_;
};

}  // namespace

const value* value_map::find(const std::string& key) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), key,
      [](const auto& entry, const std::string& k) { return entry.first < k; });
  if (it != entries.end() && it->first == key) return &it->second;
  return nullptr;
}

value* value_map::find(const std::string& key) {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), key,
      [](const auto& entry, const std::string& k) { return entry.first < k; });
  if (it != entries.end() && it->first == key) return &it->second;
  return nullptr;
}

void value_map::set(const std::string& key, value v) {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), key,
      [](const auto& entry, const std::string& k) { return entry.first < k; });
  if (it != entries.end() && it->first == key) {
    it->second = std::move(v);
  } else {
    entries.insert(it, {key, std::move(v)});
  }
}

const char* value::type_name() const {
  switch (v.index()) {
    case 0: return "number";
    case 1: return "boolean";
    case 2: return "string";
    case 3: return "vector";
    case 4: return "map";
  }
  return "unknown";
}

eval_outcome evaluate(const program& prog, const robot_state& state,
                      const hidden_state& hidden,
                      const perception_fn& perception,
                      const eval_budget& budget) {
  return interpreter(prog, perception, budget).run(state, hidden);
}

perception_fn stub_perception() {
  return [](geometry_kind kind, const std::string&) -> std::array<double, 3> {
    if (kind == geometry_kind::size) return {0.1, 0.1, 0.1};
    return {0.0, 0.0, 0.0};
  };
}

}  // namespace grappa::gsl
