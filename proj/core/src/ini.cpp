#include "meso/ini.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "meso/error.hpp"

namespace meso {

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == sep) {
      auto item = trim_view(text.substr(start, i - start));
      if (!item.empty()) out.emplace_back(item);
      start = i + 1;
    }
  }
  return out;
}

double parse_double_field(std::string_view text, std::size_t line, std::string_view key) {
  std::string buf(trim_view(text));
  char* end = nullptr;
  double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size())
    throw ParseError(line, "malformed number '" + buf + "' for key '" + std::string(key) + "'");
  return v;
}

IniDocument IniDocument::parse(std::string_view text) {
  IniDocument doc;
  std::string current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = trim_view(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      current = std::string(trim_view(line.substr(1, line.size() - 2)));
      if (current.empty()) throw ParseError(line_no, "empty section name");
      auto& sec = doc.section_for_write(current);
      if (sec.line == 0) sec.line = line_no;
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    std::string key(trim_view(line.substr(0, eq)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    std::string value(trim_view(line.substr(eq + 1)));
    auto& sec = doc.section_for_write(current);
    auto it = std::find_if(sec.entries.begin(), sec.entries.end(), [&](const Entry& e) { return e.key == key; });
    if (it != sec.entries.end()) throw ParseError(line_no, "duplicate key '" + key + "'");
    sec.entries.push_back({key, value, line_no});
    if (eol == text.size()) break;
  }
  return doc;
}

IniDocument IniDocument::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

IniDocument::Section& IniDocument::section_for_write(std::string_view name) {
  for (auto& s : sections_)
    if (s.name == name) return s;
  sections_.push_back({std::string(name), 0, {}});
  return sections_.back();
}

const IniDocument::Section* IniDocument::section(std::string_view name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

const IniDocument::Entry* IniDocument::find(std::string_view section_name, std::string_view key) const {
  const Section* s = section(section_name);
  if (!s) return nullptr;
  for (const auto& e : s->entries)
    if (e.key == key) return &e;
  return nullptr;
}

void IniDocument::set(std::string_view section_name, std::string_view key, std::string value) {
  auto& sec = section_for_write(section_name);
  for (auto& e : sec.entries)
    if (e.key == key) {
      e.value = std::move(value);
      return;
    }
  sec.entries.push_back({std::string(key), std::move(value), 0});
}

std::string IniDocument::get_string(std::string_view s, std::string_view key, std::string fallback) const {
  const Entry* e = find(s, key);
  return e ? e->value : std::move(fallback);
}

double IniDocument::get_double(std::string_view s, std::string_view key, double fallback) const {
  const Entry* e = find(s, key);
  return e ? parse_double_field(e->value, e->line, key) : fallback;
}

long IniDocument::get_int(std::string_view s, std::string_view key, long fallback) const {
  const Entry* e = find(s, key);
  if (!e) return fallback;
  char* end = nullptr;
  long v = std::strtol(e->value.c_str(), &end, 10);
  if (e->value.empty() || end != e->value.c_str() + e->value.size())
    throw ParseError(e->line, "malformed integer '" + e->value + "' for key '" + std::string(key) + "'");
  return v;
}

bool IniDocument::get_bool(std::string_view s, std::string_view key, bool fallback) const {
  const Entry* e = find(s, key);
  if (!e) return fallback;
  std::string v = e->value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ParseError(e->line, "malformed boolean '" + e->value + "' for key '" + std::string(key) + "'");
}

std::vector<double> IniDocument::get_doubles(std::string_view s, std::string_view key,
                                             std::vector<double> fallback) const {
  const Entry* e = find(s, key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(e->value)) out.push_back(parse_double_field(item, e->line, key));
  return out;
}

void IniDocument::require_known(std::string_view section_name,
                                const std::vector<std::string_view>& allowed_keys) const {
  const Section* s = section(section_name);
  if (!s) return;
  for (const auto& e : s->entries)
    if (std::find(allowed_keys.begin(), allowed_keys.end(), e.key) == allowed_keys.end())
      throw ConfigError("unknown key '" + e.key + "' in section [" + std::string(section_name) + "] (line " +
                        std::to_string(e.line) + ")");
}

void IniDocument::require_sections(const std::vector<std::string_view>& allowed) const {
  for (const auto& s : sections_)
    if (std::find(allowed.begin(), allowed.end(), s.name) == allowed.end())
      throw ConfigError("unknown section [" + s.name + "] (line " + std::to_string(s.line) + ")");
}

std::string IniDocument::dump() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& s : sections_) {
    if (!first) out << '\n';
    first = false;
    if (!s.name.empty()) out << '[' << s.name << "]\n";
    for (const auto& e : s.entries) out << e.key << " = " << e.value << '\n';
  }
  return out.str();
}

}  // namespace meso
