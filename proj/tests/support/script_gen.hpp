#pragma once

// Random program text drawn from the script grammar. Programs always parse;
// at run time they may loop forever, recurse without bound, or fault.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace scriptgen {

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::string program() {
    out_ = kPrelude;
    const int n = pick(1, 8);
    for (int i = 0; i < n; ++i) stmt(0, 0);
    return out_;
  }

 private:
  static constexpr const char* kPrelude =
      "a = 1\nb = 2.5\nc = 0\ni = 3\nn = 4\nxs = [1, 2]\nd = {\"k0\": 1}\ns = \"ab\"\n"
      "def f(x):\n    return x\n"
      "def g(x, k=1):\n    return k\n";

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(int percent) { return pick(1, 100) <= percent; }

  std::string name() {
    static const char* names[] = {"a", "b", "c", "i", "n", "xs", "d", "s"};
    return names[pick(0, 7)];
  }

  std::string literal() {
    switch (pick(0, 7)) {
      case 0: return std::to_string(pick(0, 10));
      case 1: return std::to_string(pick(0, 1'000'000));
      case 2: return "9223372036854775807";
      case 3: return std::to_string(pick(0, 99)) + "." + std::to_string(pick(0, 99));
      case 4: return chance(50) ? "\"ab\"" : "'x y'";
      case 5: return chance(50) ? "True" : "False";
      case 6: return "None";
      default: return "1e-3";
    }
  }

  std::string expr(int depth) {
    if (depth > 3) return chance(50) ? literal() : name();
    switch (pick(0, 13)) {
      case 0:
      case 1: return literal();
      case 2:
      case 3: return name();
      case 4: {
        static const char* ops[] = {"+", "-", "*", "/", "//", "%", "**"};
        return "(" + expr(depth + 1) + " " + ops[pick(0, 6)] + " " + expr(depth + 1) + ")";
      }
      case 5: {
        static const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
        std::string e = expr(depth + 1) + " " + ops[pick(0, 5)] + " " + expr(depth + 1);
        if (chance(30)) e += " < " + expr(depth + 1);
        return "(" + e + ")";
      }
      case 6: return "(" + expr(depth + 1) + (chance(50) ? " and " : " or ") + expr(depth + 1) + ")";
      case 7: return chance(50) ? "-" + expr(depth + 1) : "(not " + expr(depth + 1) + ")";
      case 8: {
        std::string e = "[";
        const int n = pick(0, 3);
        for (int i = 0; i < n; ++i) e += (i ? ", " : "") + expr(depth + 1);
        return e + "]";
      }
      case 9: {
        std::string e = "{";
        const int n = pick(0, 2);
        for (int i = 0; i < n; ++i) e += std::string(i ? ", " : "") + "\"k" + std::to_string(i) + "\": " + expr(depth + 1);
        return e + "}";
      }
      case 10: {
        static const char* fns[] = {"len", "abs", "str", "int", "float", "range", "min", "max", "round"};
        return std::string(fns[pick(0, 8)]) + "(" + expr(depth + 1) + ")";
      }
      case 11: return name() + "[" + expr(depth + 1) + "]";
      case 12: return "f(" + expr(depth + 1) + ")";
      default: return "g(" + expr(depth + 1) + ", k=" + expr(depth + 1) + ")";
    }
  }

  void line(int indent, const std::string& text) {
    out_.append(static_cast<std::size_t>(indent) * 4, ' ');
    out_ += text;
    out_ += '\n';
  }

  void block(int indent, int loops, bool in_def) {
    const int n = pick(1, 3);
    for (int i = 0; i < n; ++i) stmt(indent, loops, in_def);
  }

  void stmt(int indent, int loops, bool in_def = false) {
    const int roll = indent > 3 ? pick(0, 5) : pick(0, 13);
    switch (roll) {
      case 0:
      case 1:
      case 2: line(indent, name() + " = " + expr(0)); return;
      case 3: line(indent, "print(" + expr(0) + ")"); return;
      case 4: line(indent, name() + "[" + expr(1) + "] = " + expr(1)); return;
      case 5:
        if (loops > 0 && chance(50)) {
          line(indent, chance(50) ? "break" : "continue");
        } else if (in_def && chance(50)) {
          line(indent, "return " + expr(0));
        } else {
          line(indent, chance(50) ? "pass" : "xs.append(" + expr(1) + ")");
        }
        return;
      case 6:
      case 7:
        line(indent, "if " + expr(0) + ":");
        block(indent + 1, loops, in_def);
        if (chance(40)) {
          line(indent, "elif " + expr(0) + ":");
          block(indent + 1, loops, in_def);
        }
        if (chance(50)) {
          line(indent, "else:");
          block(indent + 1, loops, in_def);
        }
        return;
      case 8:
        line(indent, "while " + expr(0) + ":");
        block(indent + 1, loops + 1, in_def);
        return;
      case 9:
        line(indent, "for " + name() + " in " + (chance(50) ? "range(" + expr(1) + ")" : expr(0)) + ":");
        block(indent + 1, loops + 1, in_def);
        return;
      case 10:
      case 11: {
        const bool is_f = chance(50);
        line(indent, is_f ? "def f(x):" : "def g(x, k=" + literal() + "):");
        block(indent + 1, 0, true);
        if (chance(70)) line(indent + 1, "return " + expr(0));
        return;
      }
      case 12: line(indent, chance(50) ? "import numpy as np" : "from math import floor"); return;
      default: line(indent, "xs = [" + expr(1) + ", " + expr(1) + "]"); return;
    }
  }

  std::mt19937_64 rng_;
  std::string out_;
};

}  // namespace scriptgen
