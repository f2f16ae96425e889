#include <cerrno>
#include <climits>
#include <cmath>
#include <cstdlib>

#include "interp_impl.hpp"

namespace edagent::miniscript {

namespace {

bool integral(const Value& v) { return v.is_int() || v.is_bool(); }
std::int64_t int_of(const Value& v) { return v.is_bool() ? v.as_bool() : v.as_int(); }

void no_keywords(Interpreter& in, const CallArgs& args, Span span, const char* fn) {
  if (!args.keywords.empty()) {
    in.fault(FaultKind::TypeFault, span,
             std::string(fn) + "() got an unexpected keyword argument '" + args.keywords[0].first + "'");
  }
}

void arity(Interpreter& in, const CallArgs& args, Span span, const char* fn, std::size_t lo,
           std::size_t hi) {
  no_keywords(in, args, span, fn);
  const std::size_t n = args.positional.size();
  if (n < lo || n > hi) {
    std::string expect = lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi);
    in.fault(FaultKind::TypeFault, span,
             std::string(fn) + "() takes " + expect + " arguments (" + std::to_string(n) + " given)");
  }
}

std::int64_t as_index(Interpreter& in, const Value& v, Span span) {
  if (!integral(v)) {
    in.fault(FaultKind::TypeFault, span,
             "'" + std::string(type_name(v)) + "' object cannot be interpreted as an integer");
  }
  return int_of(v);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n\r\f\v");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\n\r\f\v");
  return s.substr(b, e - b + 1);
}

Value extreme(Interpreter& in, CallArgs& args, Span span, const char* fn, int want) {
  no_keywords(in, args, span, fn);
  std::vector<Value> candidates;
  if (args.positional.size() == 1) {
    const Value& it = args.positional[0];
    if (it.is_list()) {
      candidates = it.as_list()->items;
    } else if (it.is_map()) {
      for (const auto& [k, v] : it.as_map()->entries) candidates.emplace_back(k);
    } else {
      in.fault(FaultKind::TypeFault, span, "'" + std::string(type_name(it)) + "' object is not iterable");
    }
  } else if (args.positional.size() >= 2) {
    candidates = args.positional;
  } else {
    in.fault(FaultKind::TypeFault, span, std::string(fn) + "() expected at least 1 argument");
  }
  if (candidates.empty()) in.fault(FaultKind::TypeFault, span, std::string(fn) + "() arg is an empty sequence");
  in.tick(span, static_cast<std::int64_t>(candidates.size()));
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (in.compare(candidates[i], candidates[best], span) == want) best = i;
  }
  return candidates[best];
}

}  // namespace

void install_standard_builtins(Interpreter& in) {
  in.define_builtin("range", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "range", 1, 3);
    std::int64_t start = 0;
    std::int64_t stop = 0;
    std::int64_t step = 1;
    if (args.positional.size() == 1) {
      stop = as_index(in, args.positional[0], span);
    } else {
      start = as_index(in, args.positional[0], span);
      stop = as_index(in, args.positional[1], span);
      if (args.positional.size() == 3) step = as_index(in, args.positional[2], span);
    }
    if (step == 0) in.fault(FaultKind::TypeFault, span, "range() arg 3 must not be zero");
    // Element count computed in long double to avoid overflow on extreme bounds.
    long double count = 0;
    if (step > 0 && stop > start) {
      count = std::floor((static_cast<long double>(stop) - start - 1) / step) + 1;
    } else if (step < 0 && stop < start) {
      count = std::floor((static_cast<long double>(start) - stop - 1) / -static_cast<long double>(step)) + 1;
    }
    if (count > static_cast<long double>(in.remaining_steps())) {
      in.fault(FaultKind::StepBudgetExceeded, span, "range() larger than the remaining step budget");
    }
    const auto n = static_cast<std::int64_t>(count);
    in.tick(span, n);
    auto list = make_list();
    list->items.reserve(static_cast<std::size_t>(n));
    std::int64_t v = start;
    for (std::int64_t i = 0; i < n; ++i, v += step) list->items.emplace_back(v);
    return Value(list);
  });

  in.define_builtin("len", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "len", 1, 1);
    const Value& v = args.positional[0];
    if (v.is_text()) return Value(static_cast<std::int64_t>(v.as_text().size()));
    if (v.is_list()) return Value(static_cast<std::int64_t>(v.as_list()->items.size()));
    if (v.is_map()) return Value(static_cast<std::int64_t>(v.as_map()->entries.size()));
    in.fault(FaultKind::TypeFault, span, "object of type '" + std::string(type_name(v)) + "' has no len()");
  });

  in.define_builtin("print", [](Interpreter& in, CallArgs& args, Span span) {
    std::string sep = " ";
    std::string end = "\n";
    for (const auto& [name, value] : args.keywords) {
      if (name != "sep" && name != "end") {
        in.fault(FaultKind::TypeFault, span, "print() got an unexpected keyword argument '" + name + "'");
      }
      if (!value.is_text() && !value.is_null()) {
        in.fault(FaultKind::TypeFault, span, name + " must be None or a string");
      }
      if (value.is_text()) (name == "sep" ? sep : end) = value.as_text();
    }
    std::string line;
    for (std::size_t i = 0; i < args.positional.size(); ++i) {
      if (i) line += sep;
      line += in.display(args.positional[i], span);
    }
    line += end;
    in.emit(line);
    return Value{};
  });

  in.define_builtin("min", [](Interpreter& in, CallArgs& args, Span span) {
    return extreme(in, args, span, "min", -1);
  });
  in.define_builtin("max", [](Interpreter& in, CallArgs& args, Span span) {
    return extreme(in, args, span, "max", 1);
  });

  in.define_builtin("abs", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "abs", 1, 1);
    const Value& v = args.positional[0];
    if (integral(v)) {
      const std::int64_t x = int_of(v);
      if (x == INT64_MIN) in.fault(FaultKind::TypeFault, span, "integer overflow");
      return Value(x < 0 ? -x : x);
    }
    if (v.is_real()) return Value(std::fabs(v.as_real()));
    in.fault(FaultKind::TypeFault, span, "bad operand type for abs(): '" + std::string(type_name(v)) + "'");
  });

  in.define_builtin("str", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "str", 0, 1);
    if (args.positional.empty()) return Value(std::string());
    return Value(in.display(args.positional[0], span));
  });

  in.define_builtin("bool", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "bool", 0, 1);
    return Value(!args.positional.empty() && truthy(args.positional[0]));
  });

  in.define_builtin("int", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "int", 0, 1);
    if (args.positional.empty()) return Value(std::int64_t{0});
    const Value& v = args.positional[0];
    if (integral(v)) return Value(int_of(v));
    if (v.is_real()) {
      const double d = std::trunc(v.as_real());
      if (!std::isfinite(d) || d >= 9.2233720368547758e18 || d < -9.2233720368547758e18) {
        in.fault(FaultKind::TypeFault, span, "cannot convert " + format_real(v.as_real()) + " to int");
      }
      return Value(static_cast<std::int64_t>(d));
    }
    if (v.is_text()) {
      std::string s = trim(v.as_text());
      errno = 0;
      char* endp = nullptr;
      const long long r = std::strtoll(s.c_str(), &endp, 10);
      if (s.empty() || *endp != '\0' || errno == ERANGE) {
        in.fault(FaultKind::TypeFault, span, "invalid literal for int(): " + in.repr(v, span));
      }
      return Value(static_cast<std::int64_t>(r));
    }
    in.fault(FaultKind::TypeFault, span, "int() argument must be a string or a number");
  });

  in.define_builtin("float", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "float", 0, 1);
    if (args.positional.empty()) return Value(0.0);
    const Value& v = args.positional[0];
    if (v.is_number()) return Value(v.to_double());
    if (v.is_text()) {
      std::string s = trim(v.as_text());
      char* endp = nullptr;
      const double r = std::strtod(s.c_str(), &endp);
      if (s.empty() || *endp != '\0' || s.find_first_of("xX") != std::string::npos) {
        in.fault(FaultKind::TypeFault, span, "could not convert string to float: " + in.repr(v, span));
      }
      return Value(r);
    }
    in.fault(FaultKind::TypeFault, span, "float() argument must be a string or a number");
  });

  in.define_builtin("round", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "round", 1, 2);
    const Value& v = args.positional[0];
    if (!v.is_number()) {
      in.fault(FaultKind::TypeFault, span, "type " + std::string(type_name(v)) + " doesn't define __round__");
    }
    const bool has_digits = args.positional.size() == 2 && !args.positional[1].is_null();
    if (!has_digits) {
      if (integral(v)) return Value(int_of(v));
      const double r = std::nearbyint(v.as_real());
      if (!std::isfinite(r) || r >= 9.2233720368547758e18 || r < -9.2233720368547758e18) {
        in.fault(FaultKind::TypeFault, span, "cannot convert " + format_real(v.as_real()) + " to int");
      }
      return Value(static_cast<std::int64_t>(r));
    }
    const std::int64_t nd = as_index(in, args.positional[1], span);
    if (integral(v)) {
      if (nd >= 0) return Value(int_of(v));
      const double scale = std::pow(10.0, static_cast<double>(-nd));
      return Value(static_cast<std::int64_t>(std::nearbyint(static_cast<double>(int_of(v)) / scale) * scale));
    }
    const double x = v.as_real();
    if (!std::isfinite(x) || nd > 300 || nd < -300) return Value(x);
    const double scale = std::pow(10.0, static_cast<double>(nd));
    const double scaled = x * scale;
    if (!std::isfinite(scaled)) return Value(x);
    return Value(std::nearbyint(scaled) / scale);
  });

  in.define_builtin("sum", [](Interpreter& in, CallArgs& args, Span span) {
    arity(in, args, span, "sum", 1, 2);
    if (!args.positional[0].is_list()) {
      in.fault(FaultKind::TypeFault, span,
               "'" + std::string(type_name(args.positional[0])) + "' object is not iterable");
    }
    Value total = args.positional.size() == 2 ? args.positional[1] : Value(std::int64_t{0});
    const std::vector<Value> items = args.positional[0].as_list()->items;
    in.tick(span, static_cast<std::int64_t>(items.size()));
    for (const auto& item : items) {
      if (!item.is_number() || !total.is_number()) {
        in.fault(FaultKind::TypeFault, span,
                 "unsupported operand type(s) for +: '" + std::string(type_name(total)) + "' and '" +
                     std::string(type_name(item)) + "'");
      }
      if (integral(total) && integral(item)) {
        std::int64_t r = 0;
        if (__builtin_add_overflow(int_of(total), int_of(item), &r)) {
          in.fault(FaultKind::TypeFault, span, "integer overflow");
        }
        total = Value(r);
      } else {
        total = Value(total.to_double() + item.to_double());
      }
    }
    return total;
  });
}

}  // namespace edagent::miniscript
