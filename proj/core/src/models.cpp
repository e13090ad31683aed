#include "arfdx/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "arfdx/error.hpp"
#include "arfdx/eval.hpp"
#include "arfdx/rng.hpp"

namespace arfdx {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kEhrLinear: return "ehr_linear";
    case ModelKind::kEhrTwoLayer: return "ehr_two_layer";
    case ModelKind::kImageLinear: return "image_linear";
    case ModelKind::kCombinedDirect: return "combined_direct";
    case ModelKind::kCombinedHidden: return "combined_hidden";
  }
  return "unknown";
}

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::kEhr: return "ehr";
    case ModelFamily::kImage: return "image";
    case ModelFamily::kCombined: return "combined";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (ModelKind k : kAllModelKinds) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown model kind '" + std::string(name) + "'");
}

ModelFamily parse_model_family(std::string_view name) {
  for (ModelFamily f : {ModelFamily::kEhr, ModelFamily::kImage, ModelFamily::kCombined}) {
    if (to_string(f) == name) return f;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown model family '" + std::string(name) + "'");
}

ModelFamily family_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::kEhrLinear:
    case ModelKind::kEhrTwoLayer: return ModelFamily::kEhr;
    case ModelKind::kImageLinear: return ModelFamily::kImage;
    default: return ModelFamily::kCombined;
  }
}

std::vector<ModelKind> architectures(ModelFamily family) {
  switch (family) {
    case ModelFamily::kEhr: return {ModelKind::kEhrLinear, ModelKind::kEhrTwoLayer};
    case ModelFamily::kImage: return {ModelKind::kImageLinear};
    case ModelFamily::kCombined: return {ModelKind::kCombinedDirect, ModelKind::kCombinedHidden};
  }
  return {};
}

bool uses_ehr(ModelKind kind) { return kind != ModelKind::kImageLinear; }
bool uses_image(ModelKind kind) { return family_of(kind) != ModelFamily::kEhr; }
bool has_hidden_layer(ModelKind kind) {
  return kind == ModelKind::kEhrTwoLayer || kind == ModelKind::kCombinedHidden;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

Eigen::VectorXd ModelParams::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) flat[k++] = l.weights(r, c);
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) flat[k++] = l.bias[i];
  }
  return flat;
}

void ModelParams::assign_flat(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
    throw Error(ErrorCode::kShapeMismatch, "flat parameter vector has wrong length");
  }
  Eigen::Index k = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = flat[k++];
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = flat[k++];
  }
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  for (const auto& l : layers) {
    z.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  }
  return z;
}

bool ModelParams::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const DenseLayer& l) { return l.weights.allFinite() && l.bias.allFinite(); });
}

std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(const ModelSpec& spec) {
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  std::size_t out_in = 0;
  if (has_hidden_layer(spec.kind)) {
    shapes.emplace_back(spec.hidden, spec.ehr_dim);
    out_in += spec.hidden;
  } else if (uses_ehr(spec.kind)) {
    out_in += spec.ehr_dim;
  }
  if (uses_image(spec.kind)) out_in += spec.emb_dim;
  shapes.emplace_back(ModelSpec::kOutputs, out_in);
  return shapes;
}

ModelParams zero_params(const ModelSpec& spec) {
  ModelParams p;
  for (auto [rows, cols] : layer_shapes(spec)) {
    p.layers.push_back({Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)),
                        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows))});
  }
  return p;
}

ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p = zero_params(spec);
  for (auto& l : p.layers) {
    const double bound = l.weights.cols() > 0 ? 1.0 / std::sqrt(static_cast<double>(l.weights.cols())) : 0.0;
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = u(rng);
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = u(rng);
  }
  return p;
}

void check_shapes(const ModelSpec& spec, const ModelParams& params) {
  const auto shapes = layer_shapes(spec);
  if (params.layers.size() != shapes.size()) {
    throw Error(ErrorCode::kShapeMismatch, "layer count does not match " + std::string(to_string(spec.kind)));
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& l = params.layers[i];
    if (static_cast<std::size_t>(l.weights.rows()) != shapes[i].first ||
        static_cast<std::size_t>(l.weights.cols()) != shapes[i].second ||
        static_cast<std::size_t>(l.bias.size()) != shapes[i].first) {
      throw Error(ErrorCode::kShapeMismatch, "layer " + std::to_string(i) + " has the wrong shape");
    }
  }
}

namespace {

struct ForwardPass {
  Eigen::MatrixXd hidden_pre;  // n x hidden, empty without a hidden layer
  Eigen::MatrixXd fused;       // n x (output-layer input)
  Eigen::MatrixXd probs;       // n x 3
};

void check_inputs(const ModelSpec& spec, const Eigen::MatrixXd& ehr, const Eigen::MatrixXd& emb) {
  if (uses_ehr(spec.kind) && static_cast<std::size_t>(ehr.cols()) != spec.ehr_dim) {
    throw Error(ErrorCode::kShapeMismatch, "EHR input width " + std::to_string(ehr.cols()) + " != " +
                                               std::to_string(spec.ehr_dim));
  }
  if (uses_image(spec.kind) && static_cast<std::size_t>(emb.cols()) != spec.emb_dim) {
    throw Error(ErrorCode::kShapeMismatch, "embedding width " + std::to_string(emb.cols()) + " != " +
                                               std::to_string(spec.emb_dim));
  }
  if (uses_ehr(spec.kind) && uses_image(spec.kind) && ehr.rows() != emb.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "EHR and embedding batches differ in length");
  }
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

ForwardPass run_forward(const ModelSpec& spec, const ModelParams& params, const Eigen::MatrixXd& ehr,
                        const Eigen::MatrixXd& emb) {
  check_shapes(spec, params);
  check_inputs(spec, ehr, emb);
  ForwardPass fp;
  const Eigen::Index n = uses_image(spec.kind) ? emb.rows() : ehr.rows();
  Eigen::MatrixXd ehr_part;
  if (has_hidden_layer(spec.kind)) {
    const auto& h = params.layers.front();
    fp.hidden_pre = (ehr * h.weights.transpose()).rowwise() + h.bias.transpose();
    ehr_part = fp.hidden_pre.cwiseMax(0.0);
  } else if (uses_ehr(spec.kind)) {
    ehr_part = ehr;
  }
  const Eigen::Index emb_cols = uses_image(spec.kind) ? emb.cols() : 0;
  fp.fused.resize(n, emb_cols + ehr_part.cols());
  if (emb_cols) fp.fused.leftCols(emb_cols) = emb;
  if (ehr_part.cols()) fp.fused.rightCols(ehr_part.cols()) = ehr_part;
  const auto& out = params.layers.back();
  fp.probs = sigmoid((fp.fused * out.weights.transpose()).rowwise() + out.bias.transpose());
  return fp;
}

}  // namespace

Eigen::MatrixXd forward(const ModelSpec& spec, const ModelParams& params, const Eigen::MatrixXd& ehr,
                        const Eigen::MatrixXd& emb) {
  return run_forward(spec, params, ehr, emb).probs;
}

Eigen::Vector3d forward(const ModelSpec& spec, const ModelParams& params, const Eigen::VectorXd& ehr,
                        const Eigen::VectorXd& emb) {
  const Eigen::MatrixXd ehr_row = ehr.transpose();
  const Eigen::MatrixXd emb_row = emb.transpose();
  const Eigen::MatrixXd probs = forward(spec, params, ehr_row, emb_row);
  return probs.row(0).transpose();
}

double loss(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& labels) {
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "loss: probabilities and labels differ in shape");
  }
  if (probs.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      const double p = std::clamp(probs(i, k), kProbabilityClamp, 1.0 - kProbabilityClamp);
      const double y = labels(i, k);
      total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
  }
  return total / static_cast<double>(probs.rows());
}

LossAndGradient loss_and_gradient(const ModelSpec& spec, const ModelParams& params, const Batch& batch) {
  const ForwardPass fp = run_forward(spec, params, batch.ehr, batch.emb);
  const auto n = fp.probs.rows();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  if (batch.labels.rows() != n || batch.labels.cols() != static_cast<Eigen::Index>(ModelSpec::kOutputs)) {
    throw Error(ErrorCode::kShapeMismatch, "labels must be n x 3");
  }
  LossAndGradient out;
  out.loss = loss(fp.probs, batch.labels);
  out.gradient = params.zeros_like();

  // d(mean BCE)/d(logit) = (p - y) / n
  const Eigen::MatrixXd d_logits = (fp.probs - batch.labels) / static_cast<double>(n);
  auto& g_out = out.gradient.layers.back();
  g_out.weights = d_logits.transpose() * fp.fused;
  g_out.bias = d_logits.colwise().sum().transpose();

  if (has_hidden_layer(spec.kind)) {
    const auto& w_out = params.layers.back().weights;
    const Eigen::Index hidden = fp.hidden_pre.cols();
    const Eigen::MatrixXd d_hidden = d_logits * w_out.rightCols(hidden);
    const Eigen::MatrixXd d_pre =
        d_hidden.cwiseProduct(fp.hidden_pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    auto& g_hidden = out.gradient.layers.front();
    g_hidden.weights = d_pre.transpose() * batch.ehr;
    g_hidden.bias = d_pre.colwise().sum().transpose();
  }
  return out;
}

ModelParams backward(const ModelSpec& spec, const ModelParams& params, const Batch& batch) {
  return loss_and_gradient(spec, params, batch).gradient;
}

void sgd_step(ModelParams& params, ModelParams& velocity, const ModelParams& grads, const HyperParams& hp) {
  if (params.layers.size() != velocity.layers.size() || params.layers.size() != grads.layers.size()) {
    throw Error(ErrorCode::kShapeMismatch, "sgd_step: parameter structures differ");
  }
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    auto& p = params.layers[i];
    auto& v = velocity.layers[i];
    const auto& g = grads.layers[i];
    if (p.weights.rows() != g.weights.rows() || p.weights.cols() != g.weights.cols() ||
        v.weights.rows() != g.weights.rows() || v.weights.cols() != g.weights.cols() ||
        p.bias.size() != g.bias.size() || v.bias.size() != g.bias.size()) {
      throw Error(ErrorCode::kShapeMismatch, "sgd_step: layer shapes differ");
    }
    v.weights = hp.momentum * v.weights + (g.weights + hp.weight_decay * p.weights);
    v.bias = hp.momentum * v.bias + (g.bias + hp.weight_decay * p.bias);
    p.weights -= hp.learning_rate * v.weights;
    p.bias -= hp.learning_rate * v.bias;
  }
  if (!params.all_finite() || !velocity.all_finite()) {
    throw Error(ErrorCode::kDiverged, "non-finite parameter after SGD update");
  }
}

bool EarlyStopping::update(std::size_t epoch, double metric) {
  if (metric > best_) {
    best_ = metric;
    best_epoch_ = epoch;
    since_best_ = 0;
    return false;
  }
  ++since_best_;
  return since_best_ >= patience_;
}

Eigen::Vector3d predict_patient(const ModelSpec& spec, const ModelParams& params, const PatientExample& patient) {
  if (!uses_image(spec.kind)) return forward(spec, params, patient.ehr, Eigen::VectorXd());
  if (patient.images.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "patient " + patient.patient_id + " has no image embeddings");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(patient.images.size());
  Eigen::MatrixXd emb(n, static_cast<Eigen::Index>(spec.emb_dim));
  Eigen::MatrixXd ehr;
  if (uses_ehr(spec.kind)) ehr = patient.ehr.transpose().replicate(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<std::size_t>(patient.images[static_cast<std::size_t>(i)].size()) != spec.emb_dim) {
      throw Error(ErrorCode::kShapeMismatch, "embedding width mismatch for " + patient.patient_id);
    }
    emb.row(i) = patient.images[static_cast<std::size_t>(i)].transpose();
  }
  return forward(spec, params, ehr, emb).colwise().mean().transpose();
}

Eigen::MatrixXd predict(const ModelSpec& spec, const ModelParams& params, std::span<const PatientExample> patients) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(patients.size()), 3);
  for (std::size_t i = 0; i < patients.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = predict_patient(spec, params, patients[i]).transpose();
  }
  return out;
}

double macro_auroc(const Eigen::MatrixXd& probs, std::span<const PatientExample> patients) {
  PerDiagnosis<double> per{};
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    std::vector<double> scores(patients.size());
    std::vector<int> labels(patients.size());
    for (std::size_t i = 0; i < patients.size(); ++i) {
      scores[i] = probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      labels[i] = patients[i].labels[static_cast<Eigen::Index>(k)] > 0.5 ? 1 : 0;
    }
    per[k] = auroc(scores, labels);
  }
  return macro_average(per);
}

namespace {

// Flattened training samples.
struct SampleMatrix {
  Eigen::MatrixXd ehr;
  Eigen::MatrixXd emb;
  Eigen::MatrixXd labels;
};

SampleMatrix build_samples(const ModelSpec& spec, std::span<const PatientExample> patients) {
  std::size_t n = 0;
  for (const auto& p : patients) n += uses_image(spec.kind) ? p.images.size() : 1;
  SampleMatrix s;
  const auto rows = static_cast<Eigen::Index>(n);
  s.ehr.resize(rows, uses_ehr(spec.kind) ? static_cast<Eigen::Index>(spec.ehr_dim) : 0);
  s.emb.resize(rows, uses_image(spec.kind) ? static_cast<Eigen::Index>(spec.emb_dim) : 0);
  s.labels.resize(rows, 3);
  Eigen::Index r = 0;
  auto add = [&](const PatientExample& p, const Eigen::VectorXd* image) {
    if (uses_ehr(spec.kind)) {
      if (static_cast<std::size_t>(p.ehr.size()) != spec.ehr_dim) {
        throw Error(ErrorCode::kShapeMismatch, "EHR width mismatch for " + p.patient_id);
      }
      s.ehr.row(r) = p.ehr.transpose();
    }
    if (image) {
      if (static_cast<std::size_t>(image->size()) != spec.emb_dim) {
        throw Error(ErrorCode::kShapeMismatch, "embedding width mismatch for " + p.patient_id);
      }
      s.emb.row(r) = image->transpose();
    }
    s.labels.row(r) = p.labels.transpose();
    ++r;
  };
  for (const auto& p : patients) {
    if (uses_image(spec.kind)) {
      for (const auto& img : p.images) add(p, &img);
    } else {
      add(p, nullptr);
    }
  }
  return s;
}

Batch gather(const SampleMatrix& s, std::span<const Eigen::Index> rows) {
  const std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  Batch b;
  b.ehr = s.ehr(idx, Eigen::all);
  b.emb = s.emb(idx, Eigen::all);
  b.labels = s.labels(idx, Eigen::all);
  return b;
}

}  // namespace

TrainedModel train(const ModelSpec& spec, const HyperParams& hp, std::span<const PatientExample> train_set,
                   std::span<const PatientExample> val_set, std::uint64_t seed) {
  if (hp.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be positive");
  const SampleMatrix samples = build_samples(spec, train_set);
  if (samples.labels.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "empty training set");

  TrainedModel model;
  model.spec = spec;
  model.hyper = hp;
  model.seed = seed;
  model.params = init_params(spec, derive_seed(seed, "init"));
  Rng shuffle_rng(derive_seed(seed, "shuffle"));

  ModelParams params = model.params;
  ModelParams velocity = params.zeros_like();
  EarlyStopping stopper(hp.patience);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(samples.labels.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t len = std::min(hp.batch_size, order.size() - start);
      const Batch batch = gather(samples, std::span(order).subspan(start, len));
      const LossAndGradient lg = loss_and_gradient(spec, params, batch);
      loss_sum += lg.loss * static_cast<double>(len);
      try {
        sgd_step(params, velocity, lg.gradient, hp);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kDiverged) {
          throw Error(ErrorCode::kDiverged, "training diverged in epoch " + std::to_string(epoch));
        }
        throw;
      }
    }
    const double val_auroc = macro_auroc(predict(spec, params, val_set), val_set);
    model.history.epochs.push_back({epoch, loss_sum / static_cast<double>(order.size()), val_auroc});
    const bool stop = stopper.update(epoch, val_auroc);
    if (stopper.improved()) model.params = params;
    if (stop) break;
  }
  model.history.best_epoch = stopper.best_epoch();
  model.history.best_val_macro_auroc = stopper.best_metric();
  return model;
}

std::vector<SweepCandidate> enumerate_sweep(ModelFamily family, const HyperGrid& grid, std::size_t ehr_dim,
                                            std::size_t emb_dim, std::size_t hidden) {
  std::vector<SweepCandidate> out;
  for (double lr : grid.learning_rates) {
    for (double mom : grid.momenta) {
      for (double wd : grid.weight_decays) {
        for (ModelKind kind : architectures(family)) {
          out.push_back({ModelSpec{kind, ehr_dim, emb_dim, hidden},
                         HyperParams{lr, mom, wd, grid.batch_size, grid.patience, grid.max_epochs}});
        }
      }
    }
  }
  return out;
}

SweepResult sweep(std::span<const SweepCandidate> candidates, std::span<const PatientExample> train_set,
                  std::span<const PatientExample> val_set, std::uint64_t seed, std::size_t threads) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep grid is empty");
  std::vector<std::optional<TrainedModel>> models(candidates.size());
  std::vector<std::exception_ptr> failures(candidates.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      try {
        models[i] = train(candidates[i].spec, candidates[i].hyper, train_set, val_set, derive_seed(seed, i));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDiverged) failures[i] = std::current_exception();
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, candidates.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  SweepResult result;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    SweepEntry entry{candidates[i]};
    if (models[i]) {
      entry.val_macro_auroc = models[i]->history.best_val_macro_auroc;
      entry.best_epoch = models[i]->history.best_epoch;
      entry.epochs_run = models[i]->history.epochs.size();
      if (!best || entry.val_macro_auroc > result.entries[*best].val_macro_auroc) best = i;
    } else {
      entry.diverged = true;
    }
    result.entries.push_back(entry);
  }
  if (!best) throw Error(ErrorCode::kDiverged, "every sweep configuration diverged");
  result.best_index = *best;
  result.best = std::move(*models[*best]);
  return result;
}

}  // namespace arfdx
