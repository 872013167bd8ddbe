// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#ifndef SLIPWAY_CONFIG_HPP
#define SLIPWAY_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace slipway {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat key-value store backing every on-disk configuration file. Keys are
// dotted paths ("vessel.m11"), values are kept as the literal strings that
// were parsed so that a load/save round trip is exact.
class Config {
 public:
  Config() = default;

  static Config load(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin = "<string>");

  void save(const std::string& path) const;
  std::string to_string() const;

  bool has(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);
  void set_bool(const std::string& key, bool value);

  // Applies one "key=value" override, as given on a command line.
  void apply_override(const std::string& assignment);

  // Entries of other replace or extend entries of this config.
  void merge(const Config& other);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  const std::string* find(const std::string& key) const;
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace slipway

#endif  // SLIPWAY_CONFIG_HPP
