#include "edagent/miniscript/value.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace edagent::miniscript {

double Value::to_double() const {
  if (is_int()) return static_cast<double>(as_int());
  if (is_bool()) return as_bool() ? 1.0 : 0.0;
  return as_real();
}

namespace {

thread_local std::vector<Value>* pending_release = nullptr;

void release_iteratively(std::vector<Value>& children) {
  if (pending_release) {
    for (auto& c : children) pending_release->push_back(std::move(c));
    return;
  }
  std::vector<Value> work = std::move(children);
  pending_release = &work;
  while (!work.empty()) {
    Value v = std::move(work.back());
    work.pop_back();
  }
  pending_release = nullptr;
}

}  // namespace

ListData::~ListData() { release_iteratively(items); }

MapData::~MapData() {
  std::vector<Value> children;
  children.reserve(entries.size());
  for (auto& e : entries) children.push_back(std::move(e.second));
  release_iteratively(children);
}

Value* MapData::find(std::string_view key) {
  auto it = index.find(std::string(key));
  return it == index.end() ? nullptr : &entries[it->second].second;
}

const Value* MapData::find(std::string_view key) const {
  auto it = index.find(std::string(key));
  return it == index.end() ? nullptr : &entries[it->second].second;
}

void MapData::set(std::string key, Value value) {
  if (Value* slot = find(key)) {
    *slot = std::move(value);
    return;
  }
  index.emplace(key, entries.size());
  entries.emplace_back(std::move(key), std::move(value));
}

ListPtr make_list(std::vector<Value> items) {
  auto l = std::make_shared<ListData>();
  l->items = std::move(items);
  return l;
}

MapPtr make_map() { return std::make_shared<MapData>(); }

BuiltinPtr make_builtin(std::string name, BuiltinFn fn) {
  auto b = std::make_shared<BuiltinData>();
  b->name = std::move(name);
  b->fn = std::move(fn);
  return b;
}

std::string_view type_name(const Value& v) {
  switch (v.v.index()) {
    case 0: return "NoneType";
    case 1: return "bool";
    case 2: return "int";
    case 3: return "float";
    case 4: return "str";
    case 5: return "list";
    case 6: return "dict";
    case 7: return "function";
    case 8: return "builtin_function";
    case 9: return "chateda";
  }
  return "?";
}

bool truthy(const Value& v) {
  if (v.is_null()) return false;
  if (v.is_bool()) return v.as_bool();
  if (v.is_int()) return v.as_int() != 0;
  if (v.is_real()) return v.as_real() != 0.0;
  if (v.is_text()) return !v.as_text().empty();
  if (v.is_list()) return !v.as_list()->items.empty();
  if (v.is_map()) return !v.as_map()->entries.empty();
  return true;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return std::signbit(value) ? "-0.0" : "0.0";

  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  std::string sci(buf, res.ptr);
  // sci looks like "-1.2345e+02"
  std::string sign;
  if (sci[0] == '-') {
    sign = "-";
    sci.erase(0, 1);
  }
  const auto epos = sci.find('e');
  std::string mantissa = sci.substr(0, epos);
  const int exp = std::stoi(sci.substr(epos + 1));
  std::string digits;
  for (char c : mantissa) {
    if (c != '.') digits += c;
  }
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();

  std::string out = sign;
  if (exp >= -4 && exp < 16) {
    if (exp >= 0) {
      const auto int_len = static_cast<std::size_t>(exp) + 1;
      if (digits.size() <= int_len) {
        out += digits + std::string(int_len - digits.size(), '0') + ".0";
      } else {
        out += digits.substr(0, int_len) + "." + digits.substr(int_len);
      }
    } else {
      out += "0." + std::string(static_cast<std::size_t>(-exp - 1), '0') + digits;
    }
    return out;
  }
  out += digits.substr(0, 1);
  if (digits.size() > 1) out += "." + digits.substr(1);
  out += exp < 0 ? "e-" : "e+";
  const std::string e = std::to_string(exp < 0 ? -exp : exp);
  if (e.size() < 2) out += '0';
  out += e;
  return out;
}

namespace {

std::string python_string_repr(const std::string& s) {
  const bool use_double = s.find('\'') != std::string::npos && s.find('"') == std::string::npos;
  const char q = use_double ? '"' : '\'';
  std::string out(1, q);
  for (const char c : s) {
    if (c == q || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else if (c == '\r') {
      out += "\\r";
    } else if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
      static const char* hex = "0123456789abcdef";
      out += "\\x";
      out += hex[(static_cast<unsigned char>(c) >> 4) & 0xf];
      out += hex[static_cast<unsigned char>(c) & 0xf];
    } else {
      out += c;
    }
  }
  out += q;
  return out;
}

class Printer {
 public:
  explicit Printer(const ChargeFn& charge) : charge_(charge) {}

  void print(const Value& v, bool quoted, std::string& out) {
    if (charge_) charge_(1);
    if (stack_.size() > 256) throw std::length_error("maximum nesting depth exceeded in str()");
    if (v.is_text()) {
      out += quoted ? python_string_repr(v.as_text()) : v.as_text();
      return;
    }
    if (v.is_list()) {
      const ListData* l = v.as_list().get();
      if (on_stack(l)) {
        out += "[...]";
        return;
      }
      stack_.push_back(l);
      out += '[';
      for (std::size_t i = 0; i < l->items.size(); ++i) {
        if (i) out += ", ";
        print(l->items[i], true, out);
      }
      out += ']';
      stack_.pop_back();
      return;
    }
    if (v.is_map()) {
      const MapData* m = v.as_map().get();
      if (on_stack(m)) {
        out += "{...}";
        return;
      }
      stack_.push_back(m);
      out += '{';
      for (std::size_t i = 0; i < m->entries.size(); ++i) {
        if (i) out += ", ";
        out += python_string_repr(m->entries[i].first);
        out += ": ";
        print(m->entries[i].second, true, out);
      }
      out += '}';
      stack_.pop_back();
      return;
    }
    out += scalar(v);
  }

  static std::string scalar(const Value& v) {
    if (v.is_null()) return "None";
    if (v.is_bool()) return v.as_bool() ? "True" : "False";
    if (v.is_int()) return std::to_string(v.as_int());
    if (v.is_real()) return format_real(v.as_real());
    if (v.is_function()) return "<function " + v.as_function()->def->name + ">";
    if (v.is_builtin()) return "<built-in function " + v.as_builtin()->name + ">";
    if (v.is_flow_handle()) return "<chateda session " + std::to_string(v.as_flow_handle()->id) + ">";
    return "?";
  }

 private:
  bool on_stack(const void* p) const {
    for (const void* q : stack_) {
      if (q == p) return true;
    }
    return false;
  }

  const ChargeFn& charge_;
  std::vector<const void*> stack_;
};

bool equal_impl(const Value& a, const Value& b, const ChargeFn& charge, int depth) {
  if (depth > 256) throw std::length_error("maximum nesting depth exceeded in comparison");
  if (charge) charge(1);
  if (a.is_number() && b.is_number()) {
    if (a.is_real() || b.is_real()) return a.to_double() == b.to_double();
    const std::int64_t x = a.is_bool() ? a.as_bool() : a.as_int();
    const std::int64_t y = b.is_bool() ? b.as_bool() : b.as_int();
    return x == y;
  }
  if (a.v.index() != b.v.index()) return false;
  if (a.is_null()) return true;
  if (a.is_text()) return a.as_text() == b.as_text();
  if (a.is_list()) {
    const auto& x = a.as_list()->items;
    const auto& y = b.as_list()->items;
    if (a.as_list() == b.as_list()) return true;
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!equal_impl(x[i], y[i], charge, depth + 1)) return false;
    }
    return true;
  }
  if (a.is_map()) {
    if (a.as_map() == b.as_map()) return true;
    const auto& x = a.as_map()->entries;
    const MapData& y = *b.as_map();
    if (x.size() != y.entries.size()) return false;
    for (const auto& [k, v] : x) {
      const Value* other = y.find(k);
      if (!other || !equal_impl(v, *other, charge, depth + 1)) return false;
    }
    return true;
  }
  if (a.is_function()) return a.as_function() == b.as_function();
  if (a.is_builtin()) return a.as_builtin() == b.as_builtin();
  if (a.is_flow_handle()) return a.as_flow_handle() == b.as_flow_handle();
  return false;
}

nlohmann::ordered_json json_impl(const Value& v, std::vector<const void*>& stack) {
  if (v.is_null() || stack.size() > 256) return nullptr;
  if (v.is_bool()) return v.as_bool();
  if (v.is_int()) return v.as_int();
  if (v.is_real()) {
    if (!std::isfinite(v.as_real())) return format_real(v.as_real());
    return v.as_real();
  }
  if (v.is_text()) return v.as_text();
  auto seen = [&](const void* p) {
    for (const void* q : stack) {
      if (q == p) return true;
    }
    return false;
  };
  if (v.is_list()) {
    const ListData* l = v.as_list().get();
    if (seen(l)) return nullptr;
    stack.push_back(l);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& item : l->items) arr.push_back(json_impl(item, stack));
    stack.pop_back();
    return arr;
  }
  if (v.is_map()) {
    const MapData* m = v.as_map().get();
    if (seen(m)) return nullptr;
    stack.push_back(m);
    auto obj = nlohmann::ordered_json::object();
    for (const auto& [k, item] : m->entries) obj[k] = json_impl(item, stack);
    stack.pop_back();
    return obj;
  }
  return Printer::scalar(v);
}

}  // namespace

std::string to_display(const Value& v, const ChargeFn& charge) {
  std::string out;
  Printer(charge).print(v, false, out);
  return out;
}

std::string to_repr(const Value& v, const ChargeFn& charge) {
  std::string out;
  Printer(charge).print(v, true, out);
  return out;
}

bool values_equal(const Value& a, const Value& b, const ChargeFn& charge) {
  return equal_impl(a, b, charge, 0);
}

nlohmann::ordered_json to_json(const Value& v) {
  std::vector<const void*> stack;
  return json_impl(v, stack);
}

Value from_json(const nlohmann::ordered_json& j) {
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::null: return Value{};
    case nlohmann::ordered_json::value_t::boolean: return Value(j.get<bool>());
    case nlohmann::ordered_json::value_t::number_integer:
    case nlohmann::ordered_json::value_t::number_unsigned: return Value(j.get<std::int64_t>());
    case nlohmann::ordered_json::value_t::number_float: return Value(j.get<double>());
    case nlohmann::ordered_json::value_t::string: return Value(j.get<std::string>());
    case nlohmann::ordered_json::value_t::array: {
      auto l = make_list();
      for (const auto& item : j) l->items.push_back(from_json(item));
      return Value(l);
    }
    case nlohmann::ordered_json::value_t::object: {
      auto m = make_map();
      for (const auto& [k, item] : j.items()) m->set(k, from_json(item));
      return Value(m);
    }
    default: return Value{};
  }
}

}  // namespace edagent::miniscript
