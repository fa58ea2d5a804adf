#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "meso/error.hpp"
#include "mesokit/cli.hpp"

namespace mesokit::cli {

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw meso::IoError("cannot open '" + path.string() + "' for checksumming");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char s[17];
  std::snprintf(s, sizeof s, "%016llx", static_cast<unsigned long long>(value));
  return s;
}

void RunContext::emit(const meso::Table& table, const std::string& relative) {
  meso::emit_plot_data(table, path_of(relative), false);
  record(relative);
  if (gnuplot) {
    const std::string dat = std::filesystem::path(relative).replace_extension(".dat").string();
    meso::emit_plot_data(table, path_of(dat), true);
    record(dat);
  }
}

void RunContext::record(const std::string& relative) { outputs.push_back(relative); }

std::vector<OutputRecord> write_manifest(const RunContext& ctx, double wall_seconds) {
  std::vector<OutputRecord> records;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& rel : ctx.outputs) {
    const auto p = ctx.path_of(rel);
    OutputRecord r{rel, std::filesystem::file_size(p), fnv1a64_file(p)};
    files.push_back({{"path", r.path}, {"bytes", r.bytes}, {"fnv1a64", hex64(r.checksum)}});
    records.push_back(std::move(r));
  }
  nlohmann::ordered_json m;
  m["tool"] = "mesokit";
  m["subcommand"] = ctx.subcommand;
  m["config_file"] = ctx.config_path.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(ctx.config_path.string());
  m["config"] = ctx.config.dump();
  m["seeds"] = ctx.seeds;
  m["inputs"] = ctx.inputs;
  m["out_dir"] = ctx.out_dir.string();
  m["wall_clock_seconds"] = wall_seconds;
  m["outputs"] = std::move(files);

  const auto path = ctx.path_of("manifest.json");
  std::ofstream out(path);
  if (!out) throw meso::IoError("cannot write '" + path.string() + "'");
  out << m.dump(2) << '\n';
  if (!out) throw meso::IoError("write failed for '" + path.string() + "'");
  return records;
}

}  // namespace mesokit::cli
