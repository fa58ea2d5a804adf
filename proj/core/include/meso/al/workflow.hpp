#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "meso/al/oracle.hpp"
#include "meso/ini.hpp"
#include "meso/nn/training.hpp"
#include "meso/table.hpp"

namespace meso::al {

struct SearchConfig {
  bool enabled = true;
  std::vector<std::vector<std::size_t>> candidates{{20, 20}, {32, 32}, {20, 20, 20}};
  std::size_t epochs = 100;
  double validation_fraction = 0.2;
};

struct WorkflowConfig {
  std::size_t rounds = 12;
  std::uint64_t seed = 1;
  std::size_t global_batch = 200;
  std::size_t local_batch = 200;
  double convexity_fraction = 0.5;    // share of the local batch given to the convexity stream
  double perturbation = 0.02;         // Gaussian σ of local samples, as a fraction of each axis range
  std::size_t screening = 1000;       // surrogate-only candidates screened for convexity
  double convex_pool = 0.1;           // centers come from this lowest-energy share of the convex candidates
  std::size_t refine_steps = 10;      // damped Newton steps on the surrogate applied to each convexity center
  double duplicate_radius = 0.0;      // drop new points closer than this to existing ones; 0 = off
  std::vector<std::size_t> hidden{20, 20};
  nn::Activation activation = nn::Activation::softplus;
  bool symmetric_transform = true;    // feed [η₀, η₁², ..., η_{d−1}²] to the net
  /// epochs == 0 leaves the parameters untouched; surrogate_training then only scores the current net.
  nn::TrainConfig training{0.01, 200, 20, nn::Optimizer::rmsprop, 0, 1.0, 1.0, 1.0, 0.9, 1e-7, 0.0};
  SearchConfig search;
  std::size_t slice_resolution = 41;
  double well_radius = 0.05;

  /// ConfigError on out-of-range values.
  void validate() const;
};

/// Sections [workflow], [network], [training], [hyperparameter_search]. Unknown sections or keys
/// raise ConfigError; malformed numbers raise ParseError with the line.
WorkflowConfig parse_workflow_config(const IniDocument& doc);
WorkflowConfig parse_workflow_config(std::string_view text);
IniDocument dump_workflow_config(const WorkflowConfig& cfg);

enum class SampleSource { global = 0, convexity = 1, error = 2 };
std::string to_string(SampleSource s);

/// Accumulated (η̂, μ̂) pairs as columns, with the round and stream that produced each one.
struct Dataset {
  Eigen::MatrixXd eta;
  Eigen::MatrixXd mu;
  std::vector<SampleSource> source;
  std::vector<std::size_t> round;

  std::size_t size() const noexcept { return source.size(); }
  void append(const Eigen::MatrixXd& new_eta, const Eigen::MatrixXd& new_mu, SampleSource src, std::size_t rnd);
  /// Columns round, source (0 global, 1 convexity, 2 error), eta_i..., mu_i....
  Table to_table() const;
};

/// Seeded Latin-hypercube batch: column j of the result is one point; every axis has exactly
/// one point per stratum of width (upper − lower)/n.
Eigen::MatrixXd latin_hypercube(std::size_t n, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                std::mt19937_64& rng);

struct LocalSample {
  std::size_t convexity = 0;
  std::size_t error = 0;
  bool error_fallback = false;  // all error scores vanished; centers drawn uniformly
};

struct SearchResult {
  std::vector<std::vector<std::size_t>> candidates;
  std::vector<double> validation_loss;
  std::size_t selected = 0;
};

struct RoundLog {
  std::size_t round = 0;
  std::size_t dataset_size = 0;
  std::size_t added_global = 0;
  std::size_t added_convexity = 0;
  std::size_t added_error = 0;
  double train_loss = 0.0;
  std::vector<std::size_t> hidden;
  std::vector<bool> well_flags;
  std::size_t wells_convex = 0;
  double in_well_fraction = 0.0;
};

/// Exploration / training / exploitation loop around an IDNN surrogate.
class ActiveLearning {
 public:
  ActiveLearning(Oracle oracle, WorkflowConfig cfg);

  const Oracle& oracle() const noexcept { return oracle_; }
  const WorkflowConfig& config() const noexcept { return cfg_; }
  const Dataset& dataset() const noexcept { return data_; }
  const nn::IDNN& idnn() const noexcept { return idnn_; }
  nn::IDNN& idnn() noexcept { return idnn_; }
  const std::vector<RoundLog>& logs() const noexcept { return logs_; }
  bool trained() const noexcept { return trained_; }
  double last_loss() const noexcept { return last_loss_; }

  /// Appends a Latin-hypercube batch of cfg.global_batch points; returns the number accepted.
  std::size_t global_sampling(std::size_t index);
  /// Trains each candidate width list on an 80/20 split and makes the winner the working IDNN.
  /// ConfigError on an empty grid; PreconditionError when there is too little data to split.
  SearchResult hyperparameter_search(std::size_t rnd);
  /// train_idnn on the whole dataset, continuing from the current parameters.
  double surrogate_training(std::size_t rnd);
  /// Convexity stream around the lowest-energy surrogate-convex screening points and error stream
  /// around the dataset points the surrogate fits worst. PreconditionError before the first training.
  LocalSample local_sampling(std::size_t index);

  /// The listing's loop: global_sampling(2r), hyperparameter search at r == 1,
  /// surrogate_training(r), local_sampling(2r+1). With a non-empty out_dir, writes
  /// slice_round_<r>.csv each round, then rounds.csv, dataset.csv and idnn.txt.
  void run(const std::filesystem::path& out_dir = {});

  /// Convexity of the surrogate at each tracked well.
  std::vector<bool> well_flags() const;
  /// Share of dataset points within cfg.well_radius of any oracle well.
  double in_well_fraction(std::size_t max_round) const;
  /// η₀ × η₁ grid at η₂ = ... = 0: columns eta0, eta1, f_surrogate and, when the oracle knows it, f_oracle.
  Table slice() const;
  Table log_table() const;

 private:
  std::mt19937_64 stream(std::size_t index, std::size_t salt) const;
  nn::IDNN make_idnn(const std::vector<std::size_t>& hidden, std::uint64_t seed) const;
  std::size_t accept(Eigen::MatrixXd& eta) const;
  Eigen::VectorXd perturb(const Eigen::VectorXd& center, std::mt19937_64& rng) const;
  Eigen::VectorXd refine(Eigen::VectorXd x) const;
  nn::TrainingData training_data(const std::vector<std::size_t>& cols) const;

  Oracle oracle_;
  WorkflowConfig cfg_;
  Dataset data_;
  nn::IDNN idnn_;
  std::vector<RoundLog> logs_;
  bool trained_ = false;
  double last_loss_ = 0.0;
  RoundLog pending_;
};

}  // namespace meso::al
