#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xsd {

/// Ordered `key=value` text records. Lines starting with '#' are comments.
class KeyValues {
 public:
  void set(std::string key, std::string value);
  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  long long get_int(std::string_view key) const;
  double get_double(std::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string str() const;
  static KeyValues parse(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static KeyValues load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::vector<std::string> split(std::string_view text, char sep);
std::string join_ints(const std::vector<int>& values, char sep = ',');
std::vector<int> parse_ints(std::string_view text, char sep = ',');

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace xsd
