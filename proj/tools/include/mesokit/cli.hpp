#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meso/ini.hpp"
#include "meso/table.hpp"

namespace mesokit::cli {

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// 64-bit FNV-1a over the bytes of a file. meso::IoError when it cannot be read.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

struct OutputRecord {
  std::string path;  ///< relative to the output directory
  std::uintmax_t bytes = 0;
  std::uint64_t checksum = 0;
};

/// State shared by a subcommand and the manifest writer.
struct RunContext {
  std::string subcommand;
  meso::IniDocument config;  ///< effective configuration after file, flags and --set overrides
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool gnuplot = false;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> seeds;  ///< seeds actually used, by role
  std::vector<std::string> outputs;          ///< relative paths, in the order written

  std::filesystem::path path_of(const std::string& relative) const { return out_dir / relative; }
  /// Writes a comma CSV (plus a whitespace `.dat` twin when gnuplot is set) and records it.
  void emit(const meso::Table& table, const std::string& relative);
  /// Records a file the subcommand wrote by other means.
  void record(const std::string& relative);
};

/// Writes manifest.json into ctx.out_dir: subcommand, configuration snapshot, seeds, inputs,
/// wall-clock seconds and one checksum per recorded output.
std::vector<OutputRecord> write_manifest(const RunContext& ctx, double wall_seconds);

/// Parses argv, runs the selected subcommand and returns an exit code. Diagnostics go to `err`,
/// help and usage to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mesokit::cli
