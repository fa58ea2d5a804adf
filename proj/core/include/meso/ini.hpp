#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace meso {

/// INI-style configuration text: `[Section]` headers and `key = value` lines. Full-line
/// comments start with `#` or `;`. Keys that appear before any header land in section "".
/// Order of sections and keys is preserved so that `dump()` is deterministic.
class IniDocument {
 public:
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;  // 0 for values set programmatically
  };
  struct Section {
    std::string name;
    std::size_t line = 0;
    std::vector<Entry> entries;
  };

  static IniDocument parse(std::string_view text);
  static IniDocument read(const std::filesystem::path& path);

  const std::vector<Section>& sections() const noexcept { return sections_; }
  const Section* section(std::string_view name) const;
  const Entry* find(std::string_view section, std::string_view key) const;

  /// Inserts or overwrites a value (used for command-line overrides).
  void set(std::string_view section, std::string_view key, std::string value);

  std::string get_string(std::string_view section, std::string_view key, std::string fallback) const;
  /// Numeric accessors throw ParseError carrying the line of a malformed value.
  double get_double(std::string_view section, std::string_view key, double fallback) const;
  long get_int(std::string_view section, std::string_view key, long fallback) const;
  bool get_bool(std::string_view section, std::string_view key, bool fallback) const;
  std::vector<double> get_doubles(std::string_view section, std::string_view key,
                                  std::vector<double> fallback) const;

  /// Rejects sections or keys outside the allowed sets, naming the offender.
  void require_known(std::string_view section, const std::vector<std::string_view>& allowed_keys) const;
  void require_sections(const std::vector<std::string_view>& allowed) const;

  std::string dump() const;

 private:
  Section& section_for_write(std::string_view name);
  std::vector<Section> sections_;
};

double parse_double_field(std::string_view text, std::size_t line, std::string_view key);
std::vector<std::string> split_list(std::string_view text, char sep = ',');
std::string_view trim_view(std::string_view s);

}  // namespace meso
