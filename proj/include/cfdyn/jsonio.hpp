#pragma once

#include <charconv>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cfdyn {

// shortest round-trip decimal representation (CSV output)
inline std::string format_shortest(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// fixed 17-significant-digit formatting (JSON reports; reproducible byte
// for byte across runs)
inline std::string format_17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Minimal ordered JSON value for report output. Insertion order of object
// keys is preserved so identical runs serialize identically.
class JsonValue {
 public:
  JsonValue() : kind_(Kind::null) {}
  JsonValue(double x) : kind_(Kind::number), num_(x) {}
  JsonValue(int x) : kind_(Kind::integer), int_(x) {}
  JsonValue(long x) : kind_(Kind::integer), int_(x) {}
  JsonValue(bool b) : kind_(Kind::boolean), bool_(b) {}
  JsonValue(const char* s) : kind_(Kind::string), str_(s) {}
  JsonValue(std::string s) : kind_(Kind::string), str_(std::move(s)) {}

  static JsonValue object() {
    JsonValue v;
    v.kind_ = Kind::object;
    return v;
  }
  static JsonValue array() {
    JsonValue v;
    v.kind_ = Kind::array;
    return v;
  }

  JsonValue& set(const std::string& key, JsonValue v) {
    members_.emplace_back(key, std::move(v));
    return *this;
  }
  JsonValue& push(JsonValue v) {
    items_.push_back(std::move(v));
    return *this;
  }

  std::string dump(int indent = 0, int depth = 0) const {
    switch (kind_) {
      case Kind::null: return "null";
      case Kind::boolean: return bool_ ? "true" : "false";
      case Kind::integer: return std::to_string(int_);
      case Kind::number: return format_17(num_);
      case Kind::string: return quote(str_);
      case Kind::array: {
        std::string out = "[";
        for (std::size_t i = 0; i < items_.size(); ++i) {
          if (i) out += indent ? ", " : ",";
          out += items_[i].dump(indent, depth + 1);
        }
        return out + "]";
      }
      case Kind::object: {
        std::string pad(indent * (depth + 1), ' ');
        std::string out = "{";
        for (std::size_t i = 0; i < members_.size(); ++i) {
          if (i) out += ",";
          if (indent) out += "\n" + pad;
          out += quote(members_[i].first) + (indent ? ": " : ":");
          out += members_[i].second.dump(indent, depth + 1);
        }
        if (indent && !members_.empty())
          out += "\n" + std::string(indent * depth, ' ');
        return out + "}";
      }
    }
    return "null";
  }

 private:
  enum class Kind { null, boolean, integer, number, string, array, object };

  static std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
      }
    }
    return out + "\"";
  }

  Kind kind_;
  double num_ = 0.0;
  long int_ = 0;
  bool bool_ = false;
  std::string str_;
  std::vector<std::pair<std::string, JsonValue>> members_;
  std::vector<JsonValue> items_;
};

}  // namespace cfdyn
