#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "edagent/flowsim/flowsim.hpp"
#include "edagent/miniscript/ast.hpp"

namespace edagent::miniscript {

struct Value;
struct ListData;
struct MapData;
struct FunctionData;
struct BuiltinData;
struct FlowHandleData;

using ListPtr = std::shared_ptr<ListData>;
using MapPtr = std::shared_ptr<MapData>;
using FunctionPtr = std::shared_ptr<const FunctionData>;
using BuiltinPtr = std::shared_ptr<const BuiltinData>;
using FlowHandlePtr = std::shared_ptr<FlowHandleData>;

/// Dynamically typed script value. Lists, maps and flow handles have
/// reference semantics, everything else is copied.
struct Value {
  using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string, ListPtr, MapPtr,
                               FunctionPtr, BuiltinPtr, FlowHandlePtr>;
  Storage v;

  Value() = default;
  Value(std::monostate) {}
  Value(bool b) : v(b) {}
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(std::int64_t{i}) {}
  Value(double d) : v(d) {}
  Value(std::string s) : v(std::move(s)) {}
  Value(const char* s) : v(std::string(s)) {}
  Value(ListPtr p) : v(std::move(p)) {}
  Value(MapPtr p) : v(std::move(p)) {}
  Value(FunctionPtr p) : v(std::move(p)) {}
  Value(BuiltinPtr p) : v(std::move(p)) {}
  Value(FlowHandlePtr p) : v(std::move(p)) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v); }
  bool is_real() const { return std::holds_alternative<double>(v); }
  bool is_number() const { return is_int() || is_real() || is_bool(); }
  bool is_text() const { return std::holds_alternative<std::string>(v); }
  bool is_list() const { return std::holds_alternative<ListPtr>(v); }
  bool is_map() const { return std::holds_alternative<MapPtr>(v); }
  bool is_function() const { return std::holds_alternative<FunctionPtr>(v); }
  bool is_builtin() const { return std::holds_alternative<BuiltinPtr>(v); }
  bool is_flow_handle() const { return std::holds_alternative<FlowHandlePtr>(v); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  double as_real() const { return std::get<double>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  const std::string& as_text() const { return std::get<std::string>(v); }
  const ListPtr& as_list() const { return std::get<ListPtr>(v); }
  const MapPtr& as_map() const { return std::get<MapPtr>(v); }
  const FunctionPtr& as_function() const { return std::get<FunctionPtr>(v); }
  const BuiltinPtr& as_builtin() const { return std::get<BuiltinPtr>(v); }
  const FlowHandlePtr& as_flow_handle() const { return std::get<FlowHandlePtr>(v); }

  /// Integer, Real or Boolean widened to double. Precondition: is_number().
  double to_double() const;
};

// Both containers tear down their children iteratively so that deeply
// nested values cannot exhaust the native stack.
struct ListData {
  std::vector<Value> items;
  ~ListData();
};

/// Text-keyed map that remembers insertion order.
struct MapData {
  std::vector<std::pair<std::string, Value>> entries;
  std::unordered_map<std::string, std::size_t> index;  // key -> position in entries

  Value* find(std::string_view key);
  const Value* find(std::string_view key) const;
  void set(std::string key, Value value);
  ~MapData();
};

/// A `def` closed over its evaluated defaults. Points into the Program,
/// which must outlive every Value that refers to it.
struct FunctionData {
  const DefStmt* def = nullptr;
  std::vector<Value> defaults;  // parallel to def->params; null slot when no default
  std::vector<bool> has_default;
};

class Interpreter;

struct CallArgs {
  std::vector<Value> positional;
  std::vector<std::pair<std::string, Value>> keywords;
};

using BuiltinFn = std::function<Value(Interpreter&, CallArgs&, Span)>;

struct BuiltinData {
  std::string name;
  BuiltinFn fn;
};

/// Handle returned by chateda(); holds the session once setup() has run.
struct FlowHandleData {
  int id = 0;
  std::optional<flowsim::FlowSession> session;
};

ListPtr make_list(std::vector<Value> items = {});
MapPtr make_map();
BuiltinPtr make_builtin(std::string name, BuiltinFn fn);

/// Names the runtime type as it appears in fault messages ("int", "list", ...).
std::string_view type_name(const Value& v);

bool truthy(const Value& v);

/// Shortest round-trip text for a double in the conventional script form:
/// "0.1", "1.0", "1e+16", "1e-05", "nan", "inf".
std::string format_real(double value);

/// Double-quoted literal that the lexer reads back as the same text.
std::string quote_string(std::string_view s);

/// Charged once per element visited; lets callers bound the work done by
/// printing or comparing large nested values. May throw.
using ChargeFn = std::function<void(std::int64_t)>;

/// print()/str() text. Self-referencing containers print as [...] / {...}.
/// Throws std::length_error past 256 levels of nesting.
std::string to_display(const Value& v, const ChargeFn& charge = {});
/// Text used inside containers (strings quoted).
std::string to_repr(const Value& v, const ChargeFn& charge = {});

/// Structural equality with Integer/Real/Boolean compared numerically.
/// Throws std::length_error when nesting exceeds 256 levels.
bool values_equal(const Value& a, const Value& b, const ChargeFn& charge = {});

/// JSON rendering for reports. Functions and builtins become their display
/// text; self-references become null.
nlohmann::ordered_json to_json(const Value& v);
/// Inverse of to_json for plain data (null, bool, number, text, array, object).
Value from_json(const nlohmann::ordered_json& j);

}  // namespace edagent::miniscript
