#include "commands.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string_view>

#include "meso/al/workflow.hpp"
#include "meso/dns/solvers.hpp"
#include "meso/error.hpp"
#include "meso/graph/pipeline.hpp"
#include "meso/nn/training.hpp"
#include "meso/obs/observables.hpp"
#include "meso/obs/rom.hpp"
#include "meso/sysid/stepwise.hpp"
#include "meso/weak/operators.hpp"

namespace mesokit::cli {

using meso::IniDocument;
using meso::Table;

std::pair<std::string, std::string> seed_slot(const std::string& subcommand) {
  if (subcommand == "dns") return {"dns", "seed"};
  if (subcommand == "idnn") return {"idnn", "seed"};
  if (subcommand == "active-learning") return {"workflow", "seed"};
  if (subcommand == "allen-cahn-rom") return {"ensemble", "seed"};
  return {};
}

namespace {

std::size_t get_count(const IniDocument& doc, std::string_view section, std::string_view key, std::size_t fallback) {
  const long v = doc.get_int(section, key, static_cast<long>(fallback));
  if (v < 0) throw meso::ConfigError(std::string(section) + "." + std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const IniDocument& doc, std::string_view section) {
  const auto* e = doc.find(section, "seed");
  if (!e) return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(e->value, &used);
    if (used != e->value.size() || e->value.front() == '-') throw std::invalid_argument("seed");
    return v;
  } catch (const std::exception&) {
    throw meso::ParseError(e->line, std::string(section) + ".seed must be a non-negative integer, got '" +
                                        e->value + "'");
  }
}

std::string get_required(const IniDocument& doc, std::string_view section, std::string_view key) {
  const auto* e = doc.find(section, key);
  if (!e || e->value.empty())
    throw meso::ConfigError("missing required setting " + std::string(section) + "." + std::string(key));
  return e->value;
}

meso::dns::AllenCahnParams allen_cahn_params(const IniDocument& doc, std::size_t default_save_every) {
  doc.require_known("allen_cahn", {"mobility", "lambda", "dt", "steps", "nodes", "length", "save_every",
                                   "newton_tol", "newton_max_iter"});
  meso::dns::AllenCahnParams p;
  p.mobility = doc.get_double("allen_cahn", "mobility", p.mobility);
  p.lambda = doc.get_double("allen_cahn", "lambda", p.lambda);
  p.dt = doc.get_double("allen_cahn", "dt", p.dt);
  p.steps = get_count(doc, "allen_cahn", "steps", p.steps);
  p.nodes = get_count(doc, "allen_cahn", "nodes", p.nodes);
  p.length = doc.get_double("allen_cahn", "length", p.length);
  p.save_every = get_count(doc, "allen_cahn", "save_every", default_save_every);
  p.newton_tol = doc.get_double("allen_cahn", "newton_tol", p.newton_tol);
  p.newton_max_iter = static_cast<int>(doc.get_int("allen_cahn", "newton_max_iter", p.newton_max_iter));
  p.validate();
  return p;
}

std::array<double, 4> four_values(const IniDocument& doc, std::string_view key, const std::array<double, 4>& fallback) {
  const auto v = doc.get_doubles("schnakenberg", key, {fallback.begin(), fallback.end()});
  if (v.size() != 4) throw meso::ConfigError("schnakenberg." + std::string(key) + " needs 4 rates (1, c1, c2, c1^2 c2)");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<std::string> series_outputs(const std::vector<std::filesystem::path>& written, const RunContext& ctx) {
  std::vector<std::string> rel;
  for (const auto& p : written) rel.push_back(std::filesystem::relative(p, ctx.out_dir).generic_string());
  return rel;
}

void allen_cahn_dns(RunContext& ctx, std::uint64_t seed) {
  const auto p = allen_cahn_params(ctx.config, 1);
  const auto series = meso::dns::solve_allen_cahn_1d(p, meso::dns::allen_cahn_initial_condition(p, seed));
  for (const auto& r : series_outputs(meso::dns::write_series({&series}, ctx.path_of("series")), ctx)) ctx.record(r);
  ctx.emit(meso::obs::observable_table(series, p.lambda), "observables.csv");
}

void schnakenberg_dns(RunContext& ctx, std::uint64_t seed) {
  const IniDocument& doc = ctx.config;
  doc.require_known("schnakenberg", {"d11", "d12", "d21", "d22", "r1", "r2", "dt", "steps", "nodes", "length",
                                     "save_every", "save_pairs", "steady_tol", "amplitude", "library",
                                     "library_target"});
  meso::dns::SchnakenbergParams p;
  p.D[0][0] = doc.get_double("schnakenberg", "d11", p.D[0][0]);
  p.D[0][1] = doc.get_double("schnakenberg", "d12", p.D[0][1]);
  p.D[1][0] = doc.get_double("schnakenberg", "d21", p.D[1][0]);
  p.D[1][1] = doc.get_double("schnakenberg", "d22", p.D[1][1]);
  p.R[0] = four_values(doc, "r1", p.R[0]);
  p.R[1] = four_values(doc, "r2", p.R[1]);
  p.dt = doc.get_double("schnakenberg", "dt", p.dt);
  p.steps = get_count(doc, "schnakenberg", "steps", p.steps);
  p.nodes = get_count(doc, "schnakenberg", "nodes", p.nodes);
  p.length = doc.get_double("schnakenberg", "length", p.length);
  p.save_every = get_count(doc, "schnakenberg", "save_every", p.save_every);
  p.save_pairs = doc.get_bool("schnakenberg", "save_pairs", p.save_pairs);
  p.steady_tol = doc.get_double("schnakenberg", "steady_tol", p.steady_tol);
  p.validate();
  const double amplitude = doc.get_double("schnakenberg", "amplitude", 0.01);

  const auto [c1_0, c2_0] = meso::dns::schnakenberg_initial_state(p, seed, amplitude);
  const auto [c1, c2] = meso::dns::solve_schnakenberg_2d(p, c1_0, c2_0);
  for (const auto& r : series_outputs(meso::dns::write_series({&c1, &c2}, ctx.path_of("series")), ctx)) ctx.record(r);

  if (!doc.get_bool("schnakenberg", "library", false)) return;
  const std::size_t target = get_count(doc, "schnakenberg", "library_target", 0);
  if (target > 1) throw meso::ConfigError("schnakenberg.library_target must be 0 or 1");
  // Only saved snapshots one step apart give a single-step backward difference.
  const auto specs = meso::weak::reaction_diffusion_library();
  meso::weak::AssemblyOptions opts;
  opts.lagged_reaction = true;
  std::vector<meso::weak::OperatorLibrary> samples;
  for (std::size_t n = 1; n < c1.size(); ++n)
    if (c1.time(n) - c1.time(n - 1) < 1.5 * p.dt)
      samples.push_back(meso::weak::assemble_library({&c1, &c2}, target, n, specs, opts));
  if (samples.empty())
    throw meso::PreconditionError("no saved snapshot pair is one time step apart; set schnakenberg.save_pairs = true");
  meso::weak::write_library(meso::weak::pool_time_samples(samples), ctx.path_of("library"));
  for (const char* f : {"library/y.csv", "library/chi.csv", "library/dof_map.csv"}) ctx.record(f);
}

}  // namespace

void run_dns(RunContext& ctx) {
  ctx.config.require_sections({"dns", "allen_cahn", "schnakenberg"});
  ctx.config.require_known("dns", {"model", "seed"});
  const std::uint64_t seed = get_seed(ctx.config, "dns");
  ctx.seeds["initial_condition"] = std::to_string(seed);
  const std::string model = ctx.config.get_string("dns", "model", "allen_cahn");
  if (model == "allen_cahn")
    allen_cahn_dns(ctx, seed);
  else if (model == "schnakenberg")
    schnakenberg_dns(ctx, seed);
  else
    throw meso::ConfigError("dns.model: unknown model '" + model + "' (expected allen_cahn or schnakenberg)");
}

void run_vsi(RunContext& ctx) {
  ctx.config.require_sections({"VSI", "StepwiseRegression"});
  const auto cfg = meso::sysid::parse_config(ctx.config);
  const auto lib = meso::weak::read_library(ctx.inputs.at("y"), ctx.inputs.at("chi"));
  const auto problem = meso::sysid::make_problem(lib, cfg);
  const auto trace = meso::sysid::stepwise_eliminate(problem, cfg);

  std::filesystem::create_directories(ctx.out_dir);
  meso::sysid::write_trace_csv(trace, ctx.path_of("trace.csv"));
  ctx.record("trace.csv");
  meso::sysid::write_model_csv(trace, ctx.path_of("model.csv"));
  ctx.record("model.csv");
  Table loss(std::vector<std::string>{"iteration", "terms", "loss"});
  for (std::size_t i = 0; i < trace.iterations.size(); ++i)
    loss.add_row(std::vector<double>{static_cast<double>(i + 1),
                                     static_cast<double>(trace.iterations[i].active.size()), trace.iterations[i].loss});
  ctx.emit(loss, "loss.csv");

  if (trace.identified_model().active.size() >= 2) {
    const auto report = meso::sysid::confirmation_test(problem, trace, cfg);
    Table conf(std::vector<std::string>{"target_column", "max_relative_error", "pass"});
    for (const auto& e : report.entries) {
      const auto it = std::find(problem.labels.begin(), problem.labels.end(), e.target_label);
      conf.add_row(std::vector<double>{static_cast<double>(it - problem.labels.begin()), e.max_relative_error,
                                       e.pass ? 1.0 : 0.0});
    }
    ctx.emit(conf, "confirmation.csv");
  }
}

void run_graph(RunContext& ctx) {
  const auto settings = meso::graph::parse_pipeline_settings(ctx.config);
  std::filesystem::path input;
  if (auto it = ctx.inputs.find("data"); it != ctx.inputs.end()) {
    input = it->second;
  } else {
    input = settings.input_path();
    if (input.is_relative() && !ctx.config_path.empty()) input = ctx.config_path.parent_path() / input;
    ctx.inputs["data"] = input.string();
  }
  const Table out = meso::graph::apply_pipeline(meso::read_csv(input), settings);
  ctx.emit(out, settings.output_filename);
}

void run_idnn(RunContext& ctx) {
  const IniDocument& doc = ctx.config;
  doc.require_sections({"idnn", "training"});
  doc.require_known("idnn", {"data", "inputs", "gradients", "values", "hidden", "activation", "transform", "seed"});
  doc.require_known("training", {"learning_rate", "epochs", "batch_size", "optimizer", "lr_decay", "rho", "epsilon",
                                 "weight_value", "weight_gradient", "weight_hessian"});
  const std::uint64_t seed = get_seed(doc, "idnn");
  ctx.seeds["initialization"] = std::to_string(seed);
  ctx.seeds["shuffling"] = std::to_string(seed);

  std::filesystem::path data_path;
  if (auto it = ctx.inputs.find("data"); it != ctx.inputs.end()) {
    data_path = it->second;
  } else {
    data_path = get_required(doc, "idnn", "data");
    if (data_path.is_relative() && !ctx.config_path.empty()) data_path = ctx.config_path.parent_path() / data_path;
    ctx.inputs["data"] = data_path.string();
  }
  const Table data = meso::read_csv(data_path);
  const auto inputs = meso::split_list(get_required(doc, "idnn", "inputs"));
  const auto gradients = meso::split_list(doc.get_string("idnn", "gradients", ""));
  const std::string values = doc.get_string("idnn", "values", "");
  if (gradients.empty() && values.empty())
    throw meso::ConfigError("idnn needs gradient columns (idnn.gradients) or a value column (idnn.values)");
  if (!gradients.empty() && gradients.size() != inputs.size())
    throw meso::ConfigError("idnn.gradients must list one column per input (" + std::to_string(inputs.size()) + ")");

  const auto d = static_cast<Eigen::Index>(inputs.size());
  const auto n = static_cast<Eigen::Index>(data.rows());
  meso::nn::TrainingData td;
  td.inputs.resize(d, n);
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto& c = data.column(inputs[static_cast<std::size_t>(k)]);
    for (Eigen::Index r = 0; r < n; ++r) td.inputs(k, r) = c[static_cast<std::size_t>(r)];
  }
  if (!gradients.empty()) {
    td.gradients.resize(d, n);
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto& c = data.column(gradients[static_cast<std::size_t>(k)]);
      for (Eigen::Index r = 0; r < n; ++r) td.gradients(k, r) = c[static_cast<std::size_t>(r)];
    }
  }
  if (!values.empty()) {
    const auto& c = data.column(values);
    td.values = Eigen::Map<const Eigen::VectorXd>(c.data(), n);
  }

  std::vector<std::size_t> hidden;
  for (double w : doc.get_doubles("idnn", "hidden", {20, 20})) {
    if (!(w >= 1) || w != std::floor(w)) throw meso::ConfigError("idnn.hidden widths must be positive integers");
    hidden.push_back(static_cast<std::size_t>(w));
  }
  const auto activation = meso::nn::parse_activation(doc.get_string("idnn", "activation", "softplus"));
  const std::string transform = doc.get_string("idnn", "transform", "");
  meso::nn::IDNN model = transform.empty()
                             ? meso::nn::IDNN(inputs.size(), hidden, activation, seed)
                             : meso::nn::IDNN(meso::nn::InputTransform::parse(transform, inputs.size()), hidden,
                                              activation, seed);

  meso::nn::TrainConfig tc;
  tc.learning_rate = doc.get_double("training", "learning_rate", tc.learning_rate);
  tc.epochs = get_count(doc, "training", "epochs", tc.epochs);
  tc.batch_size = get_count(doc, "training", "batch_size", tc.batch_size);
  tc.optimizer = meso::nn::parse_optimizer(doc.get_string("training", "optimizer", to_string(tc.optimizer)));
  tc.lr_decay = doc.get_double("training", "lr_decay", tc.lr_decay);
  tc.rho = doc.get_double("training", "rho", tc.rho);
  tc.epsilon = doc.get_double("training", "epsilon", tc.epsilon);
  tc.weight_value = doc.get_double("training", "weight_value", values.empty() ? 0.0 : 1.0);
  tc.weight_gradient = doc.get_double("training", "weight_gradient", gradients.empty() ? 0.0 : 1.0);
  tc.weight_hessian = doc.get_double("training", "weight_hessian", 0.0);
  tc.seed = seed;
  tc.validate();

  // With value data the trained quantity is the dense net itself, otherwise its input gradient.
  const auto result = gradients.empty() ? meso::nn::train(model.net(), td, tc) : meso::nn::train_idnn(model, td, tc);

  std::filesystem::create_directories(ctx.out_dir);
  meso::nn::save_net(model.net(), ctx.path_of("idnn.txt"));
  ctx.record("idnn.txt");

  Table loss(std::vector<std::string>{"epoch", "loss"});
  for (std::size_t e = 0; e < result.loss_history.size(); ++e)
    loss.add_row(std::vector<double>{static_cast<double>(e + 1), result.loss_history[e]});
  ctx.emit(loss, "loss.csv");

  std::vector<std::string> names = inputs;
  names.emplace_back("Y");
  for (const auto& x : inputs) names.push_back("dY/d" + x);
  const bool curvature = meso::nn::has_second_derivative(activation);
  if (curvature) names.emplace_back("convex");
  Table pred(names);
  const Eigen::VectorXd y = meso::nn::forward_batch(model.net(), td.inputs);
  const Eigen::MatrixXd g = model.evaluate_batch(td.inputs);
  std::vector<bool> convex;
  if (curvature) convex = meso::nn::is_convex(model, td.inputs);
  std::vector<double> row;
  for (Eigen::Index r = 0; r < n; ++r) {
    row.assign(td.inputs.col(r).data(), td.inputs.col(r).data() + d);
    row.push_back(y(r));
    for (Eigen::Index k = 0; k < d; ++k) row.push_back(g(k, r));
    if (curvature) row.push_back(convex[static_cast<std::size_t>(r)] ? 1.0 : 0.0);
    pred.add_row(row);
  }
  ctx.emit(pred, "predictions.csv");
}

void run_active_learning(RunContext& ctx) {
  const auto cfg = meso::al::parse_workflow_config(ctx.config);
  ctx.seeds["workflow"] = std::to_string(cfg.seed);
  meso::al::ActiveLearning al(meso::al::synthetic_oracle(), cfg);
  std::filesystem::create_directories(ctx.out_dir);
  al.run(ctx.out_dir);
  for (std::size_t r = 0; r < cfg.rounds; ++r) ctx.record("slice_round_" + std::to_string(r) + ".csv");
  for (const char* f : {"rounds.csv", "dataset.csv", "idnn.txt"}) ctx.record(f);
}

void run_allen_cahn_rom(RunContext& ctx) {
  IniDocument& doc = ctx.config;
  doc.require_sections({"allen_cahn", "ensemble", "VSI", "StepwiseRegression"});
  doc.require_known("ensemble", {"trajectories", "seed", "threads", "neighborhood", "accuracy", "neighbors"});
  // The reduced-model tables report the whole elimination path unless told otherwise.
  if (!doc.find("StepwiseRegression", "full_path")) doc.set("StepwiseRegression", "full_path", "true");
  const auto sysid_cfg = meso::sysid::parse_config(doc);

  meso::obs::EnsembleConfig ec;
  ec.dns = allen_cahn_params(doc, ec.dns.save_every);
  ec.trajectories = get_count(doc, "ensemble", "trajectories", ec.trajectories);
  ec.seed = get_seed(doc, "ensemble");
  ec.threads = get_count(doc, "ensemble", "threads", 0);
  ctx.seeds["ensemble"] = std::to_string(ec.seed);

  meso::obs::DerivativeOptions dopt;
  const std::string hood = doc.get_string("ensemble", "neighborhood", "pooled");
  if (hood == "pooled")
    dopt.neighborhood = meso::obs::Neighborhood::pooled;
  else if (hood == "trajectory")
    dopt.neighborhood = meso::obs::Neighborhood::trajectory;
  else
    throw meso::ConfigError("ensemble.neighborhood: expected pooled or trajectory, got '" + hood + "'");
  dopt.accuracy = static_cast<int>(doc.get_int("ensemble", "accuracy", dopt.accuracy));
  dopt.neighbors = get_count(doc, "ensemble", "neighbors", dopt.neighbors);

  const Table table =
      meso::obs::add_time_derivative(meso::obs::functional_derivatives(meso::obs::simulate_ensemble(ec), dopt));
  ctx.emit(table, "observables.csv");

  const auto bases = meso::obs::build_basis_sets(table);
  Table summary(std::vector<std::string>{"basis", "identified_iteration", "terms", "loss", "final_loss"});
  const std::vector<std::pair<std::string, const std::vector<std::string>*>> sets{
      {"B1", &bases.b1}, {"B2", &bases.b2}, {"B3", &bases.b3}};
  for (std::size_t b = 0; b < sets.size(); ++b) {
    const auto& [name, basis] = sets[b];
    const auto trace = meso::obs::identify_reduced_model(table, *basis, sysid_cfg);
    ctx.emit(meso::obs::trace_table(trace), "table_" + name + ".csv");
    Table loss(std::vector<std::string>{"iteration", "terms", "loss"});
    for (std::size_t i = 0; i < trace.iterations.size(); ++i)
      loss.add_row(std::vector<double>{static_cast<double>(i + 1),
                                       static_cast<double>(trace.iterations[i].active.size()),
                                       trace.iterations[i].loss});
    ctx.emit(loss, "loss_" + name + ".csv");
    meso::sysid::write_model_csv(trace, ctx.path_of("model_" + name + ".csv"));
    ctx.record("model_" + name + ".csv");
    const auto& id = trace.identified_model();
    summary.add_row(std::vector<double>{static_cast<double>(b + 1), static_cast<double>(trace.identified + 1),
                                        static_cast<double>(id.active.size()), id.loss,
                                        trace.iterations.back().loss});
  }
  ctx.emit(summary, "summary.csv");
}

}  // namespace mesokit::cli
