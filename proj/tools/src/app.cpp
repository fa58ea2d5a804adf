#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <map>

#include "commands.hpp"
#include "meso/error.hpp"
#include "mesokit/cli.hpp"

namespace mesokit::cli {

namespace {

struct CommonFlags {
  std::string config;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool gnuplot = false;
};

void add_common(CLI::App& sub, CommonFlags& f) {
  sub.add_option("--config", f.config, "INI configuration file");
  sub.add_option("--out-dir", f.out_dir, "Directory for outputs and manifest.json")->capture_default_str();
  sub.add_option("--seed", f.seed, "Seed written into the subcommand's seed setting");
  sub.add_option("--set", f.overrides, "Override a setting: section.key=value (repeatable)");
  sub.add_flag("--gnuplot", f.gnuplot, "Also write whitespace-separated .dat twins of every CSV");
}

// "section.key=value", split at the first dot. A key without a dot goes to the unnamed section;
// the graph settings' dotted keys in that section are written with a leading dot (".a.0.func=...").
void apply_override(meso::IniDocument& doc, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected section.key=value, got '" + text + "'");
  const std::string lhs = text.substr(0, eq), value = text.substr(eq + 1);
  const auto dot = lhs.find('.');
  if (dot == std::string::npos)
    doc.set("", lhs, value);
  else
    doc.set(lhs.substr(0, dot), lhs.substr(dot + 1), value);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mesokit: mesoscale model identification tools", "mesokit"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::map<std::string, std::string> inputs;

  using Handler = std::function<void(RunContext&)>;
  std::vector<std::pair<CLI::App*, Handler>> subs;
  auto add = [&](const char* name, const char* help, Handler h) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(*s, flags);
    subs.emplace_back(s, std::move(h));
    return s;
  };

  add("dns", "Simulate Allen-Cahn (1D) or Schnakenberg (2D) dynamics", run_dns);
  auto* vsi = add("vsi", "Stepwise identification from an operator library (y.csv, chi.csv)", run_vsi);
  vsi->add_option("--chi", inputs["chi"], "Operator matrix CSV, one labeled column per operator")->required();
  vsi->add_option("--y", inputs["y"], "Target CSV with a single column")->required();
  auto* graph = add("graph", "Algebraic and nonlocal differential operations on scattered CSV data", run_graph);
  graph->add_option("--input", inputs["data"], "Input CSV (default: the settings' load path)");
  auto* idnn = add("idnn", "Train an integrable network on derivative data", run_idnn);
  idnn->add_option("--data", inputs["data"], "Training CSV (default: idnn.data)");
  add("active-learning", "Active-learning workflow on the synthetic four-variable free energy", run_active_learning);
  auto* rom = add("allen-cahn-rom", "Allen-Cahn ensemble, phase averages and reduced-order identification",
                  run_allen_cahn_rom);
  std::size_t trajectories = 0;
  rom->add_option("--trajectories", trajectories, "Ensemble size (overrides ensemble.trajectories)");

  if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
    err << "mesokit: unknown subcommand '" << argv[1] << "'\n";
    out << app.help();
    return kExitUsage;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "mesokit: " << e.what() << "\n";
    out << app.help();
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  RunContext ctx;
  ctx.subcommand = chosen->get_name();
  ctx.out_dir = flags.out_dir;
  ctx.gnuplot = flags.gnuplot;
  ctx.seed = flags.seed;
  for (const auto& [k, v] : inputs)
    if (!v.empty()) ctx.inputs[k] = v;

  const auto start = std::chrono::steady_clock::now();
  try {
    if (!flags.config.empty()) {
      ctx.config_path = flags.config;
      ctx.config = meso::IniDocument::read(flags.config);
    }
    try {
      for (const auto& o : flags.overrides) apply_override(ctx.config, o);
    } catch (const CLI::ValidationError& e) {
      err << "mesokit: " << e.what() << "\n";
      return kExitUsage;
    }
    if (flags.seed) {
      const auto [section, key] = seed_slot(ctx.subcommand);
      if (!section.empty()) ctx.config.set(section, key, std::to_string(*flags.seed));
    }
    if (rom->parsed() && trajectories > 0) ctx.config.set("ensemble", "trajectories", std::to_string(trajectories));

    for (auto& [sub, handler] : subs)
      if (sub == chosen) handler(ctx);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(ctx, seconds);
  } catch (const meso::Error& e) {
    err << "mesokit " << ctx.subcommand << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "mesokit " << ctx.subcommand << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::out_of_range& e) {
    err << "mesokit " << ctx.subcommand << ": " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace mesokit::cli
