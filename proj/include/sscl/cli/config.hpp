#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sscl::cli {

enum class ValueType { String, Path, Int, Double, Bool };

struct KeySpec {
  std::string name;
  ValueType type;
  std::string default_value;
  std::string help;
  std::vector<std::string> commands;  // subcommands that read this key
};

// Every recognised key with its type and default.
const std::vector<KeySpec>& key_table();
const KeySpec* find_key(const std::string& name);
std::vector<const KeySpec*> keys_for(const std::string& command);

// Resolved, type-checked key/value settings. Text form:
//
//   # comment
//   version = 1
//   batch_size = 32
//
// Unknown keys, a missing or unsupported version and badly typed values are
// all Error{Config}.
class RunConfig {
 public:
  static constexpr int kVersion = 1;

  RunConfig();  // defaults only

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  // Later calls win; used for flag overrides.
  void set(const std::string& key, const std::string& value);

  const std::string& raw(const std::string& key) const;
  std::string str(const std::string& key) const { return raw(key); }
  std::filesystem::path path(const std::string& key) const { return raw(key); }
  std::int64_t integer(const std::string& key) const;
  std::uint64_t seed() const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  bool has(const std::string& key) const { return !raw(key).empty(); }

  // Throws Error{Config} naming the first required key left empty.
  void require(const std::vector<std::string>& keys) const;

  // Keys read by `command`, in table order.
  std::map<std::string, std::string> resolved(const std::string& command) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace sscl::cli
