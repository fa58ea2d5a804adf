#include "meso/graph/pipeline.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

#include "meso/error.hpp"
#include "meso/graph/expression.hpp"

namespace meso::graph {

namespace {

long parse_long(const IniDocument::Entry& e) {
  char* end = nullptr;
  const long v = std::strtol(e.value.c_str(), &end, 10);
  if (e.value.empty() || end != e.value.c_str() + e.value.size())
    throw ParseError(e.line, "malformed integer '" + e.value + "' for key '" + e.key + "'");
  return v;
}

std::size_t parse_index(const IniDocument::Entry& e, const std::string& text) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size() || v < 0)
    throw ParseError(e.line, "malformed list index '" + text + "' in key '" + e.key + "'");
  return static_cast<std::size_t>(v);
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace

PipelineSettings parse_pipeline_settings(const IniDocument& doc) {
  doc.require_sections({""});
  PipelineSettings s;
  std::map<std::size_t, AlgebraicOp> alg;
  std::map<std::size_t, DiffOpSpec> diff;
  const auto* root = doc.section("");
  if (!root) return s;

  for (const auto& e : root->entries) {
    const auto dot = e.key.find('.');
    const std::string head = e.key.substr(0, dot);
    if (dot == std::string::npos) {
      if (head == "cwd") s.cwd = e.value;
      else if (head == "directories_load") s.directories_load = e.value;
      else if (head == "directories_dump") s.directories_dump = e.value;
      else if (head == "data_filename") s.data_filename = e.value;
      else if (head == "output_filename") s.output_filename = e.value;
      else if (head == "model_order") s.model_order = static_cast<int>(parse_long(e));
      else if (head == "model_p") {
        const long p = parse_long(e);
        if (p < 1) throw ConfigError("model_p must be >= 1");
        s.model_p = static_cast<std::size_t>(p);
      } else
        throw ConfigError("unknown settings key '" + e.key + "' (line " + std::to_string(e.line) + ")");
      continue;
    }
    const auto dot2 = e.key.find('.', dot + 1);
    if (dot2 == std::string::npos)
      throw ConfigError("settings key '" + e.key + "' needs the form <list>.<index>.<field>");
    const std::size_t idx = parse_index(e, e.key.substr(dot + 1, dot2 - dot - 1));
    const std::string field = e.key.substr(dot2 + 1);

    if (head == "algebraic_operations") {
      auto& op = alg[idx];
      if (field == "func" || field == "expression") op.expression = e.value;
      else if (field == "labels" || field == "label") op.label = e.value;
      else throw ConfigError("unknown settings key '" + e.key + "' (line " + std::to_string(e.line) + ")");
    } else if (head == "differential_operations") {
      auto& op = diff[idx];
      if (field == "function") op.function = e.value;
      else if (field == "variable") op.variable = split_list(e.value);
      else if (field == "weight") op.weight = e.value;
      else if (field == "adjacency") op.adjacency = e.value;
      else if (field == "manifold") op.manifold = split_list(e.value);
      else if (field == "accuracy") op.accuracy = static_cast<int>(parse_long(e));
      else if (field == "order") op.order = static_cast<int>(parse_long(e));
      else if (field == "operation") op.operation = e.value;
      else if (field == "label") op.label = e.value;
      else if (field == "neighbors") {
        const long k = parse_long(e);
        if (k < 0) throw ConfigError("neighbors must be >= 0");
        op.neighbors = static_cast<std::size_t>(k);
      } else if (field == "dimension") {
        op.dimension.clear();
        for (const auto& item : split_list(e.value)) {
          IniDocument::Entry tmp{e.key, item, e.line};
          const long d = parse_long(tmp);
          if (d < 0) throw ConfigError("dimension indices must be >= 0");
          op.dimension.push_back(static_cast<std::size_t>(d));
        }
      } else
        throw ConfigError("unknown settings key '" + e.key + "' (line " + std::to_string(e.line) + ")");
    } else {
      throw ConfigError("unknown settings key '" + e.key + "' (line " + std::to_string(e.line) + ")");
    }
  }
  for (auto& [i, op] : alg) {
    if (op.expression.empty() || op.label.empty())
      throw ConfigError("algebraic_operations." + std::to_string(i) + " needs both func and labels");
    s.algebraic_operations.push_back(std::move(op));
  }
  for (auto& [i, op] : diff) {
    op.validate();
    s.differential_operations.push_back(std::move(op));
  }
  return s;
}

std::string dump_pipeline_settings(const PipelineSettings& s) {
  IniDocument doc;
  doc.set("", "cwd", s.cwd.string());
  doc.set("", "directories_load", s.directories_load);
  doc.set("", "directories_dump", s.directories_dump);
  doc.set("", "data_filename", s.data_filename);
  doc.set("", "output_filename", s.output_filename);
  doc.set("", "model_order", std::to_string(s.model_order));
  doc.set("", "model_p", std::to_string(s.model_p));
  for (std::size_t i = 0; i < s.algebraic_operations.size(); ++i) {
    const std::string p = "algebraic_operations." + std::to_string(i) + ".";
    doc.set("", p + "func", s.algebraic_operations[i].expression);
    doc.set("", p + "labels", s.algebraic_operations[i].label);
  }
  for (std::size_t i = 0; i < s.differential_operations.size(); ++i) {
    const auto& op = s.differential_operations[i];
    const std::string p = "differential_operations." + std::to_string(i) + ".";
    doc.set("", p + "function", op.function);
    if (!op.variable.empty()) doc.set("", p + "variable", join(op.variable));
    doc.set("", p + "weight", op.weight);
    doc.set("", p + "adjacency", op.adjacency);
    doc.set("", p + "manifold", join(op.manifold));
    doc.set("", p + "accuracy", std::to_string(op.accuracy));
    std::vector<std::string> dims;
    for (auto d : op.dimension) dims.push_back(std::to_string(d));
    doc.set("", p + "dimension", join(dims));
    doc.set("", p + "order", std::to_string(op.order));
    doc.set("", p + "operation", op.operation);
    if (op.neighbors > 0) doc.set("", p + "neighbors", std::to_string(op.neighbors));
    if (!op.label.empty()) doc.set("", p + "label", op.label);
  }
  return doc.dump();
}

Table apply_pipeline(const Table& input, const PipelineSettings& settings) {
  for (std::size_t a = 1; a <= settings.model_p; ++a)
    if (!input.has("x_" + std::to_string(a)))
      throw DataError("model_p = " + std::to_string(settings.model_p) + " but column x_" + std::to_string(a) +
                      " is missing");
  if (input.has("x_" + std::to_string(settings.model_p + 1)))
    throw DataError("model_p = " + std::to_string(settings.model_p) + " but the data has column x_" +
                    std::to_string(settings.model_p + 1));
  for (const auto& op : settings.differential_operations) {
    op.validate();
    if (op.order > settings.model_order)
      throw ConfigError("differential operation on '" + op.function + "' has order " + std::to_string(op.order) +
                        " above model_order " + std::to_string(settings.model_order));
  }

  Table t = input;
  for (const auto& op : settings.algebraic_operations) t = algebraic_op(t, op.expression, op.label);

  for (const auto& op : settings.differential_operations) {
    if (!t.has(op.function)) throw DataError("differential operation: no column '" + op.function + "'");
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(op.manifold.size()));
    for (std::size_t c = 0; c < op.manifold.size(); ++c) {
      if (!t.has(op.manifold[c])) throw DataError("manifold column '" + op.manifold[c] + "' is missing");
      const auto& col = t.column(op.manifold[c]);
      for (std::size_t r = 0; r < t.rows(); ++r) pts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = col[r];
    }
    Graph g = build_graph(pts, op.neighborhood_size());
    const auto& u = t.column(op.function);
    g.set_state(op.function, Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())));
    const Eigen::VectorXd d = nonlocal_partial(g, op);
    t.set_column(op.output_label(), std::vector<double>(d.data(), d.data() + d.size()));
  }
  return t;
}

std::filesystem::path run_pipeline(const PipelineSettings& settings) {
  const auto in = settings.input_path();
  if (!std::filesystem::exists(in)) throw IoError("input file not found: '" + in.string() + "'");
  const Table result = apply_pipeline(read_csv(in), settings);
  const auto out = settings.output_path();
  emit_plot_data(result, out);
  return out;
}

}  // namespace meso::graph
