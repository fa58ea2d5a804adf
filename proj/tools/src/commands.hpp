#pragma once

#include <string>
#include <utility>

#include "mesokit/cli.hpp"

namespace mesokit::cli {

void run_dns(RunContext& ctx);
void run_vsi(RunContext& ctx);
void run_graph(RunContext& ctx);
void run_idnn(RunContext& ctx);
void run_active_learning(RunContext& ctx);
void run_allen_cahn_rom(RunContext& ctx);

/// Section and key that receive --seed for a subcommand; empty section when the subcommand
/// draws no random numbers.
std::pair<std::string, std::string> seed_slot(const std::string& subcommand);

}  // namespace mesokit::cli
