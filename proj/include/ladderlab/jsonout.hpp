#pragma once

// Deterministic JSON document builder.  Object keys keep insertion order and
// doubles are always printed with "%.17g", so identical inputs produce
// byte-identical output — a property the command-line tool's tests rely on.
// Only output is supported; inputs are parsed with the vendored json library.

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace ladderlab {

class JsonValue {
 public:
  static JsonValue null() { return JsonValue(Kind::Null); }
  static JsonValue boolean(bool b) {
    JsonValue v(Kind::Bool);
    v.bool_ = b;
    return v;
  }
  static JsonValue number(double d) {
    JsonValue v(Kind::Number);
    v.num_ = d;
    return v;
  }
  static JsonValue integer(long long i) {
    JsonValue v(Kind::Integer);
    v.int_ = i;
    return v;
  }
  static JsonValue string(std::string s) {
    JsonValue v(Kind::String);
    v.str_ = std::move(s);
    return v;
  }
  static JsonValue array() { return JsonValue(Kind::Array); }
  static JsonValue object() { return JsonValue(Kind::Object); }

  JsonValue& push(JsonValue v) {
    items_.push_back(std::move(v));
    return *this;
  }
  JsonValue& set(const std::string& key, JsonValue v) {
    keys_.push_back(key);
    items_.push_back(std::move(v));
    return *this;
  }
  JsonValue& set(const std::string& key, double d) { return set(key, number(d)); }
  JsonValue& set(const std::string& key, long long i) { return set(key, integer(i)); }
  JsonValue& set(const std::string& key, int i) {
    return set(key, integer(static_cast<long long>(i)));
  }
  JsonValue& set(const std::string& key, bool b) { return set(key, boolean(b)); }
  JsonValue& set(const std::string& key, const std::string& s) {
    return set(key, string(s));
  }
  JsonValue& set(const std::string& key, const char* s) {
    return set(key, string(s));
  }

  std::string dump(int indent = 2) const {
    std::string out;
    write(out, indent, 0);
    if (indent >= 0) out += '\n';
    return out;
  }

 private:
  enum class Kind { Null, Bool, Number, Integer, String, Array, Object };

  explicit JsonValue(Kind k) : kind_(k) {}

  static std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out += buf;
          } else {
            out += c;
          }
      }
    }
    return out;
  }

  static std::string format_number(double d) {
    if (!std::isfinite(d)) return "null";  // JSON has no inf/nan
    if (d == 0.0) d = 0.0;                 // print -0.0 as 0
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
  }

  void write(std::string& out, int indent, int depth) const {
    auto newline = [&](int d) {
      if (indent < 0) return;
      out += '\n';
      out.append(static_cast<std::size_t>(indent) * d, ' ');
    };
    switch (kind_) {
      case Kind::Null: out += "null"; return;
      case Kind::Bool: out += bool_ ? "true" : "false"; return;
      case Kind::Number: out += format_number(num_); return;
      case Kind::Integer: out += std::to_string(int_); return;
      case Kind::String:
        out += '"';
        out += escape(str_);
        out += '"';
        return;
      case Kind::Array: {
        if (items_.empty()) {
          out += "[]";
          return;
        }
        out += '[';
        for (std::size_t i = 0; i < items_.size(); ++i) {
          if (i) out += ',';
          newline(depth + 1);
          items_[i].write(out, indent, depth + 1);
        }
        newline(depth);
        out += ']';
        return;
      }
      case Kind::Object: {
        if (items_.empty()) {
          out += "{}";
          return;
        }
        out += '{';
        for (std::size_t i = 0; i < items_.size(); ++i) {
          if (i) out += ',';
          newline(depth + 1);
          out += '"';
          out += escape(keys_[i]);
          out += "\": ";
          items_[i].write(out, indent, depth + 1);
        }
        newline(depth);
        out += '}';
        return;
      }
    }
  }

  Kind kind_;
  bool bool_ = false;
  double num_ = 0.0;
  long long int_ = 0;
  std::string str_;
  std::vector<std::string> keys_;
  std::vector<JsonValue> items_;
};

}  // namespace ladderlab
