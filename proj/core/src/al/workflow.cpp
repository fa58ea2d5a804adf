#include "meso/al/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "meso/error.hpp"

namespace meso::al {

void WorkflowConfig::validate() const {
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (global_batch < 1) throw ConfigError("global_batch must be >= 1");
  if (!(convexity_fraction >= 0.0 && convexity_fraction <= 1.0)) throw ConfigError("convexity_fraction must lie in [0, 1]");
  if (!(perturbation > 0.0)) throw ConfigError("perturbation must be > 0");
  if (screening < 1) throw ConfigError("screening must be >= 1");
  if (!(convex_pool > 0.0 && convex_pool <= 1.0)) throw ConfigError("convex_pool must lie in (0, 1]");
  if (!(duplicate_radius >= 0.0)) throw ConfigError("duplicate_radius must be >= 0");
  if (hidden.empty()) throw ConfigError("network.hidden needs at least one layer");
  for (auto h : hidden)
    if (h == 0) throw ConfigError("network.hidden widths must be >= 1");
  if (training.epochs > 0) training.validate();
  if (search.enabled) {
    if (search.candidates.empty()) throw ConfigError("hyperparameter_search.candidates is empty");
    for (const auto& c : search.candidates)
      if (c.empty() || std::find(c.begin(), c.end(), std::size_t{0}) != c.end())
        throw ConfigError("hyperparameter_search candidates need positive widths");
    if (search.epochs < 1) throw ConfigError("hyperparameter_search.epochs must be >= 1");
    if (!(search.validation_fraction > 0.0 && search.validation_fraction < 1.0))
      throw ConfigError("hyperparameter_search.validation_fraction must lie in (0, 1)");
  }
  if (slice_resolution < 2) throw ConfigError("slice_resolution must be >= 2");
  if (!(well_radius > 0.0)) throw ConfigError("well_radius must be > 0");
}

namespace {

std::size_t non_negative(const IniDocument& doc, std::string_view sec, std::string_view key, std::size_t fallback) {
  const long v = doc.get_int(sec, key, static_cast<long>(fallback));
  if (v < 0) throw ConfigError(std::string(sec) + "." + std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::vector<std::size_t> parse_widths(std::string_view text, std::size_t line, std::string_view key) {
  std::vector<std::size_t> w;
  for (const auto& item : split_list(text, ',')) {
    const double v = parse_double_field(item, line, key);
    if (v < 1 || v != std::floor(v)) throw ParseError(line, "width '" + item + "' for key '" + std::string(key) + "' must be a positive integer");
    w.push_back(static_cast<std::size_t>(v));
  }
  return w;
}

std::string join_widths(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

}  // namespace

WorkflowConfig parse_workflow_config(const IniDocument& doc) {
  doc.require_sections({"workflow", "network", "training", "hyperparameter_search"});
  doc.require_known("workflow", {"rounds", "seed", "global_batch", "local_batch", "convexity_fraction", "perturbation",
                                 "screening", "convex_pool", "refine_steps", "duplicate_radius", "slice_resolution", "well_radius"});
  doc.require_known("network", {"hidden", "activation", "transform"});
  doc.require_known("training", {"learning_rate", "epochs", "batch_size", "optimizer", "lr_decay"});
  doc.require_known("hyperparameter_search", {"enabled", "candidates", "epochs", "validation_fraction"});

  WorkflowConfig c;
  c.rounds = non_negative(doc, "workflow", "rounds", c.rounds);
  c.seed = non_negative(doc, "workflow", "seed", c.seed);
  c.global_batch = non_negative(doc, "workflow", "global_batch", c.global_batch);
  c.local_batch = non_negative(doc, "workflow", "local_batch", c.local_batch);
  c.convexity_fraction = doc.get_double("workflow", "convexity_fraction", c.convexity_fraction);
  c.perturbation = doc.get_double("workflow", "perturbation", c.perturbation);
  c.screening = non_negative(doc, "workflow", "screening", c.screening);
  c.convex_pool = doc.get_double("workflow", "convex_pool", c.convex_pool);
  c.refine_steps = non_negative(doc, "workflow", "refine_steps", c.refine_steps);
  c.duplicate_radius = doc.get_double("workflow", "duplicate_radius", c.duplicate_radius);
  c.slice_resolution = non_negative(doc, "workflow", "slice_resolution", c.slice_resolution);
  c.well_radius = doc.get_double("workflow", "well_radius", c.well_radius);

  if (const auto* e = doc.find("network", "hidden")) c.hidden = parse_widths(e->value, e->line, "hidden");
  c.activation = nn::parse_activation(doc.get_string("network", "activation", nn::to_string(c.activation)));
  const std::string transform = doc.get_string("network", "transform", c.symmetric_transform ? "symmetric" : "identity");
  if (transform == "symmetric")
    c.symmetric_transform = true;
  else if (transform == "identity" || transform == "none")
    c.symmetric_transform = false;
  else
    throw ConfigError("network.transform: unknown value '" + transform + "' (expected symmetric or identity)");

  c.training.learning_rate = doc.get_double("training", "learning_rate", c.training.learning_rate);
  c.training.epochs = non_negative(doc, "training", "epochs", c.training.epochs);
  c.training.batch_size = non_negative(doc, "training", "batch_size", c.training.batch_size);
  c.training.optimizer = nn::parse_optimizer(doc.get_string("training", "optimizer", nn::to_string(c.training.optimizer)));
  c.training.lr_decay = doc.get_double("training", "lr_decay", c.training.lr_decay);

  c.search.enabled = doc.get_bool("hyperparameter_search", "enabled", c.search.enabled);
  if (const auto* e = doc.find("hyperparameter_search", "candidates")) {
    c.search.candidates.clear();
    for (const auto& item : split_list(e->value, ';')) c.search.candidates.push_back(parse_widths(item, e->line, "candidates"));
  }
  c.search.epochs = non_negative(doc, "hyperparameter_search", "epochs", c.search.epochs);
  c.search.validation_fraction = doc.get_double("hyperparameter_search", "validation_fraction", c.search.validation_fraction);
  c.validate();
  return c;
}

WorkflowConfig parse_workflow_config(std::string_view text) { return parse_workflow_config(IniDocument::parse(text)); }

IniDocument dump_workflow_config(const WorkflowConfig& c) {
  IniDocument doc;
  doc.set("workflow", "rounds", std::to_string(c.rounds));
  doc.set("workflow", "seed", std::to_string(c.seed));
  doc.set("workflow", "global_batch", std::to_string(c.global_batch));
  doc.set("workflow", "local_batch", std::to_string(c.local_batch));
  doc.set("workflow", "convexity_fraction", format_number(c.convexity_fraction));
  doc.set("workflow", "perturbation", format_number(c.perturbation));
  doc.set("workflow", "screening", std::to_string(c.screening));
  doc.set("workflow", "convex_pool", format_number(c.convex_pool));
  doc.set("workflow", "refine_steps", std::to_string(c.refine_steps));
  doc.set("workflow", "duplicate_radius", format_number(c.duplicate_radius));
  doc.set("workflow", "slice_resolution", std::to_string(c.slice_resolution));
  doc.set("workflow", "well_radius", format_number(c.well_radius));
  doc.set("network", "hidden", join_widths(c.hidden));
  doc.set("network", "activation", nn::to_string(c.activation));
  doc.set("network", "transform", c.symmetric_transform ? "symmetric" : "identity");
  doc.set("training", "learning_rate", format_number(c.training.learning_rate));
  doc.set("training", "epochs", std::to_string(c.training.epochs));
  doc.set("training", "batch_size", std::to_string(c.training.batch_size));
  doc.set("training", "optimizer", nn::to_string(c.training.optimizer));
  doc.set("training", "lr_decay", format_number(c.training.lr_decay));
  doc.set("hyperparameter_search", "enabled", c.search.enabled ? "true" : "false");
  std::string cands;
  for (std::size_t i = 0; i < c.search.candidates.size(); ++i) cands += (i ? "; " : "") + join_widths(c.search.candidates[i]);
  doc.set("hyperparameter_search", "candidates", cands);
  doc.set("hyperparameter_search", "epochs", std::to_string(c.search.epochs));
  doc.set("hyperparameter_search", "validation_fraction", format_number(c.search.validation_fraction));
  return doc;
}

std::string to_string(SampleSource s) {
  switch (s) {
    case SampleSource::global: return "global";
    case SampleSource::convexity: return "convexity";
    case SampleSource::error: return "error";
  }
  return "?";
}

void Dataset::append(const Eigen::MatrixXd& new_eta, const Eigen::MatrixXd& new_mu, SampleSource src, std::size_t rnd) {
  if (new_eta.cols() == 0) return;
  if (new_eta.cols() != new_mu.cols() || new_eta.rows() != new_mu.rows())
    throw ShapeError("eta and mu batches differ in shape");
  if (eta.size() == 0) {
    eta.resize(new_eta.rows(), 0);
    mu.resize(new_mu.rows(), 0);
  }
  if (new_eta.rows() != eta.rows()) throw ShapeError("batch dimension differs from the dataset");
  const auto n0 = eta.cols();
  eta.conservativeResize(Eigen::NoChange, n0 + new_eta.cols());
  mu.conservativeResize(Eigen::NoChange, n0 + new_mu.cols());
  eta.rightCols(new_eta.cols()) = new_eta;
  mu.rightCols(new_mu.cols()) = new_mu;
  source.insert(source.end(), static_cast<std::size_t>(new_eta.cols()), src);
  round.insert(round.end(), static_cast<std::size_t>(new_eta.cols()), rnd);
}

Table Dataset::to_table() const {
  Table t;
  std::vector<double> r(size()), s(size());
  for (std::size_t i = 0; i < size(); ++i) {
    r[i] = static_cast<double>(round[i]);
    s[i] = static_cast<double>(static_cast<int>(source[i]));
  }
  t.add_column("round", r);
  t.add_column("source", s);
  for (Eigen::Index k = 0; k < eta.rows(); ++k) {
    const Eigen::VectorXd row = eta.row(k).transpose();
    t.add_column("eta_" + std::to_string(k), std::vector<double>(row.data(), row.data() + row.size()));
  }
  for (Eigen::Index k = 0; k < mu.rows(); ++k) {
    const Eigen::VectorXd row = mu.row(k).transpose();
    t.add_column("mu_" + std::to_string(k), std::vector<double>(row.data(), row.data() + row.size()));
  }
  return t;
}

Eigen::MatrixXd latin_hypercube(std::size_t n, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                std::mt19937_64& rng) {
  const auto d = lower.size();
  Eigen::MatrixXd pts(d, static_cast<Eigen::Index>(n));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  for (Eigen::Index k = 0; k < d; ++k) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double width = (upper(k) - lower(k)) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j)
      pts(k, static_cast<Eigen::Index>(j)) =
          std::min(upper(k), lower(k) + width * (static_cast<double>(perm[j]) + u(rng)));
  }
  return pts;
}

ActiveLearning::ActiveLearning(Oracle oracle, WorkflowConfig cfg) : oracle_(std::move(oracle)), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (oracle_.dim() == 0) throw ConfigError("oracle has no dimensions");
  idnn_ = make_idnn(cfg_.hidden, cfg_.seed);
}

std::mt19937_64 ActiveLearning::stream(std::size_t index, std::size_t salt) const {
  std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

nn::IDNN ActiveLearning::make_idnn(const std::vector<std::size_t>& hidden, std::uint64_t seed) const {
  const std::size_t d = oracle_.dim();
  if (!cfg_.symmetric_transform) return nn::IDNN(d, hidden, cfg_.activation, seed);
  std::vector<nn::InputTransform::Component> comps{nn::InputTransform::identity(0)};
  for (std::size_t k = 1; k < d; ++k) comps.push_back(nn::InputTransform::square(k));
  return nn::IDNN(nn::InputTransform(d, std::move(comps)), hidden, cfg_.activation, seed);
}

std::size_t ActiveLearning::accept(Eigen::MatrixXd& eta) const {
  if (cfg_.duplicate_radius <= 0.0) return static_cast<std::size_t>(eta.cols());
  const double r2 = cfg_.duplicate_radius * cfg_.duplicate_radius;
  Eigen::Index kept = 0;
  for (Eigen::Index c = 0; c < eta.cols(); ++c) {
    bool close = false;
    for (Eigen::Index j = 0; j < data_.eta.cols() && !close; ++j) close = (data_.eta.col(j) - eta.col(c)).squaredNorm() < r2;
    for (Eigen::Index j = 0; j < kept && !close; ++j) close = (eta.col(j) - eta.col(c)).squaredNorm() < r2;
    if (!close) eta.col(kept++) = eta.col(c);
  }
  eta.conservativeResize(Eigen::NoChange, kept);
  return static_cast<std::size_t>(kept);
}

Eigen::VectorXd ActiveLearning::perturb(const Eigen::VectorXd& center, std::mt19937_64& rng) const {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd p = center;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double range = oracle_.upper()(k) - oracle_.lower()(k);
    p(k) = std::clamp(p(k) + cfg_.perturbation * range * n(rng), oracle_.lower()(k), oracle_.upper()(k));
  }
  return p;
}

// Newton iteration toward the nearest surrogate minimum; stops where the surrogate Hessian
// loses positive definiteness. Steps are capped at a tenth of the narrowest axis.
Eigen::VectorXd ActiveLearning::refine(Eigen::VectorXd x) const {
  const double cap = 0.1 * (oracle_.upper() - oracle_.lower()).minCoeff();
  for (std::size_t s = 0; s < cfg_.refine_steps; ++s) {
    Eigen::LLT<Eigen::MatrixXd> llt(idnn_.hessian(x));
    if (llt.info() != Eigen::Success) break;
    Eigen::VectorXd step = llt.solve(idnn_.evaluate(x));
    const double n = step.norm();
    if (!std::isfinite(n)) break;
    if (n > cap) step *= cap / n;
    x = (x - step).cwiseMax(oracle_.lower()).cwiseMin(oracle_.upper());
    if (n < 1e-10) break;
  }
  return x;
}

std::size_t ActiveLearning::global_sampling(std::size_t index) {
  auto rng = stream(index, 1);
  Eigen::MatrixXd eta = latin_hypercube(cfg_.global_batch, oracle_.lower(), oracle_.upper(), rng);
  const std::size_t n = accept(eta);
  data_.append(eta, oracle_.mu_batch(eta), SampleSource::global, index / 2);
  pending_.added_global += n;
  return n;
}

nn::TrainingData ActiveLearning::training_data(const std::vector<std::size_t>& cols) const {
  nn::TrainingData td;
  td.inputs.resize(data_.eta.rows(), static_cast<Eigen::Index>(cols.size()));
  td.gradients.resize(data_.mu.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    td.inputs.col(static_cast<Eigen::Index>(i)) = data_.eta.col(static_cast<Eigen::Index>(cols[i]));
    td.gradients.col(static_cast<Eigen::Index>(i)) = data_.mu.col(static_cast<Eigen::Index>(cols[i]));
  }
  return td;
}

SearchResult ActiveLearning::hyperparameter_search(std::size_t rnd) {
  if (cfg_.search.candidates.empty()) throw ConfigError("hyperparameter search grid is empty");
  const std::size_t n = data_.size();
  const auto n_val = static_cast<std::size_t>(std::llround(cfg_.search.validation_fraction * static_cast<double>(n)));
  if (n_val < 1 || n_val >= n) throw PreconditionError("not enough data for a validation split (" + std::to_string(n) + " points)");
  auto rng = stream(rnd, 2);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::vector<std::size_t> val(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
  const std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
  const auto train_data = training_data(train);
  const auto val_data = training_data(val);

  nn::TrainConfig tc = cfg_.training;
  tc.epochs = cfg_.search.epochs;
  tc.seed = cfg_.seed + rnd;
  SearchResult result;
  result.candidates = cfg_.search.candidates;
  std::vector<nn::IDNN> trained;
  for (std::size_t c = 0; c < result.candidates.size(); ++c) {
    nn::IDNN cand = make_idnn(result.candidates[c], cfg_.seed + 100 + c);
    nn::train_idnn(cand, train_data, tc);
    result.validation_loss.push_back(nn::evaluate_loss(cand.net(), val_data, tc));
    trained.push_back(std::move(cand));
  }
  result.selected = static_cast<std::size_t>(
      std::min_element(result.validation_loss.begin(), result.validation_loss.end()) - result.validation_loss.begin());
  idnn_ = std::move(trained[result.selected]);
  cfg_.hidden = result.candidates[result.selected];
  trained_ = true;
  return result;
}

double ActiveLearning::surrogate_training(std::size_t rnd) {
  if (data_.size() == 0) throw PreconditionError("surrogate training needs data");
  std::vector<std::size_t> all(data_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto td = training_data(all);
  nn::TrainConfig tc = cfg_.training;
  tc.seed = cfg_.seed + 1000 + rnd;
  if (tc.epochs == 0) {
    tc.epochs = 1;
    last_loss_ = nn::evaluate_loss(idnn_.net(), td, tc);
    trained_ = true;
    return last_loss_;
  }
  last_loss_ = nn::train_idnn(idnn_, td, tc).final_loss;
  trained_ = true;
  return last_loss_;
}

LocalSample ActiveLearning::local_sampling(std::size_t index) {
  if (!trained_) throw PreconditionError("local sampling needs a trained surrogate");
  LocalSample out;
  const auto quota_conv = static_cast<std::size_t>(std::llround(cfg_.convexity_fraction * static_cast<double>(cfg_.local_batch)));
  const std::size_t quota_err = cfg_.local_batch - quota_conv;
  const std::size_t rnd = index / 2;

  // (a) perturbations around the lowest-energy screening points where the surrogate is convex.
  if (quota_conv > 0) {
    auto rng = stream(index, 3);
    const Eigen::MatrixXd screen = latin_hypercube(cfg_.screening, oracle_.lower(), oracle_.upper(), rng);
    const auto flags = nn::is_convex(idnn_, screen);
    std::vector<std::size_t> convex;
    for (std::size_t i = 0; i < flags.size(); ++i)
      if (flags[i]) convex.push_back(i);
    if (!convex.empty()) {
      const Eigen::VectorXd f = nn::forward_batch(nn::antiderivative(idnn_), screen);
      std::stable_sort(convex.begin(), convex.end(), [&](std::size_t a, std::size_t b) {
        return f(static_cast<Eigen::Index>(a)) < f(static_cast<Eigen::Index>(b));
      });
      const auto pool = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(cfg_.convex_pool * static_cast<double>(convex.size()))));
      std::vector<Eigen::VectorXd> centers;
      for (std::size_t i = 0; i < pool; ++i) centers.push_back(refine(screen.col(static_cast<Eigen::Index>(convex[i]))));
      std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
      Eigen::MatrixXd eta(oracle_.dim(), static_cast<Eigen::Index>(quota_conv));
      for (std::size_t j = 0; j < quota_conv; ++j) eta.col(static_cast<Eigen::Index>(j)) = perturb(centers[pick(rng)], rng);
      out.convexity = accept(eta);
      data_.append(eta, oracle_.mu_batch(eta), SampleSource::convexity, rnd);
    }
  }

  // (b) perturbations around the dataset points with the largest surrogate gradient error.
  if (quota_err > 0 && data_.size() > 0) {
    auto rng = stream(index, 4);
    const Eigen::MatrixXd pred = idnn_.evaluate_batch(data_.eta);
    const Eigen::VectorXd score = (pred - data_.mu).colwise().norm().transpose();
    std::vector<std::size_t> order(data_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> centers;
    const double scale = std::max(1.0, data_.mu.cwiseAbs().maxCoeff());
    if (score.maxCoeff() <= 1e-12 * scale) {
      out.error_fallback = true;
      std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
      for (std::size_t j = 0; j < quota_err; ++j) centers.push_back(pick(rng));
    } else {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return score(static_cast<Eigen::Index>(a)) > score(static_cast<Eigen::Index>(b));
      });
      for (std::size_t j = 0; j < quota_err; ++j) centers.push_back(order[j % order.size()]);
    }
    Eigen::MatrixXd eta(oracle_.dim(), static_cast<Eigen::Index>(quota_err));
    for (std::size_t j = 0; j < quota_err; ++j)
      eta.col(static_cast<Eigen::Index>(j)) = perturb(data_.eta.col(static_cast<Eigen::Index>(centers[j])), rng);
    out.error = accept(eta);
    data_.append(eta, oracle_.mu_batch(eta), SampleSource::error, rnd);
  }
  pending_.added_convexity += out.convexity;
  pending_.added_error += out.error;
  return out;
}

std::vector<bool> ActiveLearning::well_flags() const {
  const auto& wells = oracle_.tracked_wells.empty() ? oracle_.wells : oracle_.tracked_wells;
  if (wells.empty()) return {};
  Eigen::MatrixXd pts(oracle_.dim(), static_cast<Eigen::Index>(wells.size()));
  for (std::size_t i = 0; i < wells.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = wells[i];
  return nn::is_convex(idnn_, pts);
}

double ActiveLearning::in_well_fraction(std::size_t max_round) const {
  std::size_t total = 0, inside = 0;
  const double r2 = cfg_.well_radius * cfg_.well_radius;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_.round[i] > max_round) continue;
    ++total;
    for (const auto& w : oracle_.wells)
      if ((data_.eta.col(static_cast<Eigen::Index>(i)) - w).squaredNorm() <= r2) {
        ++inside;
        break;
      }
  }
  return total == 0 ? 0.0 : static_cast<double>(inside) / static_cast<double>(total);
}

Table ActiveLearning::slice() const {
  const std::size_t n = cfg_.slice_resolution;
  const auto d = static_cast<Eigen::Index>(oracle_.dim());
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(n * n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double a = static_cast<double>(i) / static_cast<double>(n - 1), b = static_cast<double>(j) / static_cast<double>(n - 1);
      const auto c = static_cast<Eigen::Index>(i * n + j);
      pts(0, c) = oracle_.lower()(0) + a * (oracle_.upper()(0) - oracle_.lower()(0));
      if (d > 1) pts(1, c) = oracle_.lower()(1) + b * (oracle_.upper()(1) - oracle_.lower()(1));
      for (Eigen::Index k = 2; k < d; ++k) pts(k, c) = std::clamp(0.0, oracle_.lower()(k), oracle_.upper()(k));
    }
  const Eigen::VectorXd f = nn::forward_batch(nn::antiderivative(idnn_), pts);
  auto row_vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  Table t;
  t.add_column("eta0", row_vec(pts.row(0).transpose()));
  t.add_column("eta1", row_vec(d > 1 ? Eigen::VectorXd(pts.row(1).transpose()) : Eigen::VectorXd::Zero(pts.cols())));
  t.add_column("f_surrogate", row_vec(f));
  if (oracle_.has_energy()) {
    Eigen::VectorXd fo(pts.cols());
    for (Eigen::Index c = 0; c < pts.cols(); ++c) fo(c) = oracle_.energy(Eigen::VectorXd(pts.col(c)));
    t.add_column("f_oracle", row_vec(fo));
  }
  return t;
}

Table ActiveLearning::log_table() const {
  Table t;
  const std::size_t nw = logs_.empty() ? 0 : logs_.front().well_flags.size();
  std::vector<std::vector<double>> cols(8 + nw);
  for (const auto& l : logs_) {
    cols[0].push_back(static_cast<double>(l.round));
    cols[1].push_back(static_cast<double>(l.dataset_size));
    cols[2].push_back(static_cast<double>(l.added_global));
    cols[3].push_back(static_cast<double>(l.added_convexity));
    cols[4].push_back(static_cast<double>(l.added_error));
    cols[5].push_back(l.train_loss);
    cols[6].push_back(static_cast<double>(l.wells_convex));
    cols[7].push_back(l.in_well_fraction);
    for (std::size_t w = 0; w < nw; ++w) cols[8 + w].push_back(l.well_flags[w] ? 1.0 : 0.0);
  }
  const char* names[] = {"round", "dataset_size", "added_global", "added_convexity", "added_error",
                         "train_loss", "wells_convex", "in_well_fraction"};
  for (std::size_t i = 0; i < 8; ++i) t.add_column(names[i], cols[i]);
  for (std::size_t w = 0; w < nw; ++w) t.add_column("well_" + std::to_string(w) + "_convex", cols[8 + w]);
  return t;
}

void ActiveLearning::run(const std::filesystem::path& out_dir) {
  for (std::size_t rnd = 0; rnd < cfg_.rounds; ++rnd) {
    pending_ = RoundLog{};
    pending_.round = rnd;
    global_sampling(2 * rnd);
    if (rnd == 1 && cfg_.search.enabled) hyperparameter_search(rnd);
    pending_.train_loss = surrogate_training(rnd);
    if (cfg_.local_batch > 0) local_sampling(2 * rnd + 1);

    pending_.dataset_size = data_.size();
    pending_.hidden = cfg_.hidden;
    pending_.well_flags = well_flags();
    pending_.wells_convex = static_cast<std::size_t>(std::count(pending_.well_flags.begin(), pending_.well_flags.end(), true));
    pending_.in_well_fraction = in_well_fraction(rnd);
    logs_.push_back(pending_);
    if (!out_dir.empty())
      emit_plot_data(slice(), out_dir / ("slice_round_" + std::to_string(rnd) + ".csv"), false);
  }
  if (!out_dir.empty()) {
    write_csv(log_table(), out_dir / "rounds.csv");
    write_csv(data_.to_table(), out_dir / "dataset.csv");
    nn::save_net(idnn_.net(), out_dir / "idnn.txt");
  }
}

}  // namespace meso::al
