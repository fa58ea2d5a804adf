#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "meso/graph/graph.hpp"
#include "meso/ini.hpp"
#include "meso/table.hpp"

namespace meso::graph {

struct AlgebraicOp {
  std::string expression;
  std::string label;
};

/// CSV-in/CSV-out pipeline settings. In a settings file the nested structure is flattened with
/// dots and list entries are numbered, for example
///
///     data_filename = func_val.csv
///     algebraic_operations.0.func = x_1 + x_2 + x_3
///     algebraic_operations.0.labels = u_3
///     differential_operations.0.function = u_3
///     differential_operations.0.manifold = x_1, x_2, x_3
struct PipelineSettings {
  std::filesystem::path cwd = ".";
  std::string directories_load = "data";
  std::string directories_dump = "result";
  std::string data_filename = "func_val.csv";
  std::string output_filename = "data.csv";
  /// Highest derivative order any differential operation may request.
  int model_order = 2;
  /// Number of independent variables; the input must hold exactly the columns x_1 .. x_p.
  std::size_t model_p = 3;
  std::vector<AlgebraicOp> algebraic_operations;
  std::vector<DiffOpSpec> differential_operations;

  std::filesystem::path input_path() const { return cwd / directories_load / data_filename; }
  std::filesystem::path output_path() const { return cwd / directories_dump / output_filename; }
};

PipelineSettings parse_pipeline_settings(const IniDocument& doc);
std::string dump_pipeline_settings(const PipelineSettings& settings);

/// Algebraic operations in order, then differential operations in order. Each differential
/// operation builds a k-NN graph over its manifold columns.
Table apply_pipeline(const Table& input, const PipelineSettings& settings);

/// Reads input_path(), applies the pipeline and writes output_path(), which is returned.
std::filesystem::path run_pipeline(const PipelineSettings& settings);

}  // namespace meso::graph
