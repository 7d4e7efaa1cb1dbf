#include "xsd/manifest.hpp"

#include "xsd/core_data.hpp"
#include "xsd/glm.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace xsd {

void KeyValues::set(std::string key, std::string value) {
  if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
    throw Error("invalid manifest entry '" + key + "'");
  }
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValues::has(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const std::string& KeyValues::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw Error("manifest is missing key '" + std::string(key) + "'");
}

std::string KeyValues::get_or(std::string_view key, std::string fallback) const {
  return has(key) ? get(key) : fallback;
}

long long KeyValues::get_int(std::string_view key) const {
  const auto& v = get(key);
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw Error("manifest key '" + std::string(key) + "' is not an integer: '" + v + "'");
  }
  return out;
}

double KeyValues::get_double(std::string_view key) const { return parse_double(get(key)); }

std::string KeyValues::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + '=' + v + '\n';
  return out;
}

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error("malformed manifest line '" + std::string(line) + "'");
    kv.set(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  return kv;
}

void KeyValues::save(const std::filesystem::path& path) const { write_file(path, str()); }

KeyValues KeyValues::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto end = text.find(sep, pos);
    out.emplace_back(text.substr(pos, end == std::string_view::npos ? text.npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

std::string join_ints(const std::vector<int>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> parse_ints(std::string_view text, char sep) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (const auto& tok : split(text, sep)) {
    int v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
      throw Error("malformed integer '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace xsd
