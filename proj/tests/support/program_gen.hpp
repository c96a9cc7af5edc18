#pragma once

// Random Java methods that use one deprecated API in assorted syntactic
// roles. Every generated program runs under the trace interpreter with the
// stubs returned alongside it.

#include <random>
#include <string>
#include <vector>

#include "guardpatch/api_mapping.hpp"
#include "oracle/trace_interpreter.hpp"

namespace gen {

using guardpatch::ApiMapping;
using oracle::Stubs;
using oracle::Value;

struct Program {
  std::string text;
  std::string method = "run";
  std::size_t sites = 0;
  Stubs stubs;
};

inline bool int_like(const std::string& t) {
  return t == "int" || t == "Integer" || t == "long" || t == "Long" || t == "short";
}

inline Value stub_value(const std::string& type, const std::string& tag) {
  if (int_like(type)) return Value::integer(11);
  if (type == "String") return Value::string("id-" + tag);
  if (type == "boolean" || type == "Boolean") return Value::boolean(true);
  if (type == "void") return Value::null();
  return Value::object(tag + "-result");
}

/// Stubs shared by every generated program for `api`. The replacement
/// method answers exactly like the deprecated one.
inline Stubs base_stubs(const ApiMapping& api) {
  Stubs s;
  s[api.deprecated_method] = stub_value(api.return_type, api.deprecated_method);
  s[api.replacement_method] = s[api.deprecated_method];
  s["findReceiver"] = Value::object("found");
  s["compute"] = Value::integer(7);
  s["makeArg"] = Value::object("made");
  s["log"] = Value::null();
  s["itsNoon"] = Value::null();
  return s;
}

class Generator {
 public:
  Generator(const ApiMapping& api, std::uint32_t seed) : api_(api), rng_(seed) {}

  Program program(int min_sites = 1, int max_sites = 3) {
    Program p;
    p.stubs = base_stubs(api_);
    fresh_ = 0;
    std::vector<std::string> body = {
        "int counter = " + std::to_string(pick(0, 5)) + ";",
        "String note = \"n\";",
        std::string("boolean flag = ") + (coin() ? "true" : "false") + ";",
    };
    const int sites = pick(min_sites, max_sites);
    for (int k = 0; k < sites; ++k) {
      if (coin()) body.push_back(filler());
      body.push_back(maybe_nested(site_statement()));
    }
    if (coin()) body.push_back(filler());
    p.sites = static_cast<std::size_t>(sites);

    p.text = "public class Gen {\n    private " + api_.class_simple_name() + " field;\n\n    void " + p.method +
             "(" + api_.class_simple_name() + " recv, Context context) {\n";
    for (const auto& line : body) p.text += indent(line, "        ") + "\n";
    p.text += "    }\n}\n";
    return p;
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return pick(0, 1) == 1; }

 private:
  static std::string indent(const std::string& text, const std::string& pad) {
    std::string out = pad;
    for (char c : text) {
      out += c;
      if (c == '\n') out += pad;
    }
    return out;
  }

  std::string filler() {
    switch (pick(0, 3)) {
      case 0: return "counter = counter + " + std::to_string(pick(1, 4)) + ";";
      case 1: return "log(\"step\" + counter);";
      case 2: return "note = note + \"x\";";
      default: return "int local" + std::to_string(fresh_++) + " = counter * 2;";
    }
  }

  std::string arg_for(const std::string& type, bool allow_calls) {
    if (int_like(type)) {
      switch (pick(0, allow_calls ? 3 : 2)) {
        case 0: return std::to_string(pick(0, 20));
        case 1: return "counter";
        case 2: return "counter + 1";
        default: return "compute()";
      }
    }
    if (type == "String") return coin() ? "\"s\"" : "note";
    if (type == "boolean" || type == "Boolean") return coin() ? "true" : "flag";
    switch (pick(0, allow_calls ? 2 : 1)) {
      case 0: return "context";
      case 1: return "this.context";
      default: return "makeArg()";
    }
  }

  // Java evaluates the receiver before the arguments while normal form
  // hoists arguments first; a call in the receiver keeps the arguments pure.
  std::string call_text() {
    std::string recv;
    bool receiver_calls = false;
    switch (pick(0, 4)) {
      case 0:
      case 1: recv = "recv"; break;
      case 2: recv = "this.field"; break;
      case 3:
        recv = "findReceiver()";
        receiver_calls = true;
        break;
      default: recv = "((" + api_.class_simple_name() + ") recv)"; break;
    }
    std::string out = recv + "." + api_.deprecated_method + "(";
    for (std::size_t i = 0; i < api_.param_types.size(); ++i)
      out += (i ? ", " : "") + arg_for(api_.param_types[i], !receiver_calls);
    return out + ")";
  }

  std::string site_statement() {
    const std::string c = call_text();
    const std::string& t = api_.return_type;
    if (t == "void") {
      switch (pick(0, 2)) {
        case 0: return c + ";";
        case 1: return "if (flag) {\n    " + c + ";\n}";
        default: return "if (counter > 2) {\n    log(\"big\");\n} else {\n    " + c + ";\n}";
      }
    }
    const std::string v = "v" + std::to_string(fresh_++);
    switch (pick(0, 5)) {
      case 0: return c + ";";
      case 1: return t + " " + v + " = " + c + ";";
      case 2: return "log(\"value \" + " + c + ");";
      case 3: return "if (flag)\n    note = \"\" + " + c + ";";
      default: break;
    }
    if (int_like(t)) {
      if (coin()) return "if (" + c + " > 11) {\n    itsNoon();\n}";
      return "counter = counter + " + c + ";";
    }
    if (t == "String") {
      if (coin()) return "if (" + c + " != null) {\n    log(\"ok\");\n}";
      return "note = \"\" + " + c + ";";
    }
    if (t == "boolean") return "flag = !" + c + ";";
    return "log(\"\" + " + c + ");";
  }

  std::string maybe_nested(const std::string& stmt) {
    if (pick(0, 3) == 0) return "if (counter >= 0) {\n" + indent(stmt, "    ") + "\n}";
    return stmt;
  }

  const ApiMapping& api_;
  std::mt19937 rng_;
  int fresh_ = 0;
};

}  // namespace gen
