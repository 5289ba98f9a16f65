#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace curvflow {

class config_parse_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Flat key = value configuration with [section] prefixes; '#' comments.
// CLI flags override file keys.  Canonical form and hash are stable so that
// identical configurations produce identical artifact bytes.
class RunConfig {
public:
  RunConfig() = default;
  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;

  const std::map<std::string, std::string>& kv() const { return kv_; }

  std::string canonical() const;  // sorted "key = value" lines
  std::string hash_hex() const;   // FNV-1a of the canonical form

private:
  std::map<std::string, std::string> kv_;
};

}  // namespace curvflow
