#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace subpflow {

/// Execution policy for grid kernels. `serial` is the reference path kept for
/// testing; `parallel` runs the same loops under OpenMP. Both produce
/// bit-identical results: reductions accumulate per-plane partials that are
/// combined in a fixed order regardless of thread count.
enum class Exec { serial, parallel };

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad input data: dimension mismatches, out-of-range parameters.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Explicit time stepping blew past the growth guard.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, int step, double time, double max_abs)
      : Error(what), step_index(step), t(time), max_abs_u(max_abs) {}
  int step_index = 0;
  double t = 0.0;
  double max_abs_u = 0.0;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/// Formats a double with 17 significant digits (round-trip exact, stable
/// across runs). All floats in emitted JSON-lines and CSV go through this.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

/// Minimal one-line JSON object builder for JSON-lines output. Keys are
/// emitted in insertion order so records are byte-stable.
class JsonLine {
 public:
  JsonLine() : out_("{") {}

  JsonLine& field(std::string_view key, double v) {
    append_key(key);
    out_ += format_double(v);
    return *this;
  }
  JsonLine& field(std::string_view key, int v) {
    append_key(key);
    out_ += std::to_string(v);
    return *this;
  }
  JsonLine& field(std::string_view key, long v) {
    append_key(key);
    out_ += std::to_string(v);
    return *this;
  }
  JsonLine& field(std::string_view key, bool v) {
    append_key(key);
    out_ += v ? "true" : "false";
    return *this;
  }
  JsonLine& field(std::string_view key, const char* v) {
    return field(key, std::string_view(v));
  }
  JsonLine& field(std::string_view key, std::string_view v) {
    append_key(key);
    out_ += '"';
    for (char c : v) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        case '\r': out_ += "\\r"; break;
        default: out_ += c;
      }
    }
    out_ += '"';
    return *this;
  }
  /// Inserts a pre-serialized JSON value (nested object or array).
  JsonLine& raw(std::string_view key, std::string_view json) {
    append_key(key);
    out_.append(json);
    return *this;
  }

  template <class Iter>
  JsonLine& array(std::string_view key, Iter begin, Iter end) {
    append_key(key);
    out_ += '[';
    bool first = true;
    for (Iter it = begin; it != end; ++it) {
      if (!first) out_ += ',';
      first = false;
      out_ += format_double(static_cast<double>(*it));
    }
    out_ += ']';
    return *this;
  }

  std::string str() const { return out_ + "}"; }

 private:
  void append_key(std::string_view key) {
    if (out_.size() > 1) out_ += ',';
    out_ += '"';
    out_.append(key);
    out_ += "\":";
  }
  std::string out_;
};

}  // namespace subpflow
