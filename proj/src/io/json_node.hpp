#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "lightpos/errors.hpp"
#include "lightpos/geom.hpp"
#include "lightpos/rss.hpp"

namespace lightpos::detail {

using nlohmann::json;

// A JSON node together with its path, for diagnostics.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError((path_.empty() ? std::string("<root>") : path_) + ": " + what);
  }

  bool has(const char* key) const { return value_.is_object() && value_.contains(key); }

  Node at(const char* key) const {
    if (!value_.is_object()) fail("expected an object");
    const auto it = value_.find(key);
    const std::string p = path_.empty() ? key : path_ + "." + key;
    if (it == value_.end()) throw InputError(p + ": required field is missing");
    return Node(*it, p);
  }

  Node at(std::size_t i) const {
    return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t array_size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  void only_keys(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, v] : value_.items()) {
      if (!ok.count(key)) {
        throw InputError((path_.empty() ? key : path_ + "." + key) + ": unknown field");
      }
    }
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double number_or(const char* key, double fallback) const {
    return has(key) ? at(key).number() : fallback;
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_integer() || value_.get<long long>() < 0) {
      fail("expected a non-negative integer");
    }
    return value_.get<std::uint64_t>();
  }

  Vec3 vec3() const {
    if (array_size() != 3) fail("expected [x, y, z]");
    return {at(std::size_t{0}).number(), at(std::size_t{1}).number(),
            at(std::size_t{2}).number()};
  }

  // [x, y] leaves z to the receiver base height (NaN marker).
  Vec3 point() const {
    const auto n = array_size();
    if (n == 2) {
      return {at(std::size_t{0}).number(), at(std::size_t{1}).number(),
              std::numeric_limits<double>::quiet_NaN()};
    }
    if (n != 3) fail("expected [x, y] or [x, y, z]");
    return vec3();
  }

  const std::string& path() const { return path_; }

 private:
  const json& value_;
  std::string path_;
};

inline json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                     ": malformed JSON");
  }
}

inline EmissionProfile parse_profile(const Node& n) {
  const auto kind = n.at("kind").string();
  if (kind == "cosine") {
    n.only_keys({"kind", "gamma"});
    const double gamma = n.number_or("gamma", 1.0);
    try {
      return EmissionProfile::cosine_power(gamma);
    } catch (const InputError& e) {
      n.fail(e.what());
    }
  }
  if (kind == "polynomial") {
    n.only_keys({"kind", "coefficients"});
    const auto c = n.at("coefficients");
    std::vector<double> coeffs;
    for (std::size_t i = 0; i < c.array_size(); ++i) coeffs.push_back(c.at(i).number());
    try {
      return EmissionProfile::polynomial(std::move(coeffs));
    } catch (const InputError& e) {
      n.fail(e.what());
    }
  }
  n.at("kind").fail("expected \"cosine\" or \"polynomial\"");
}

}  // namespace lightpos::detail
