#pragma once

// Late-fusion diagnosis classifiers over binary EHR features and frozen image
// embeddings, trained with minibatch SGD + momentum and early stopping on
// validation macro-AUROC.
//
// Every architecture is "optional ReLU hidden layer on the EHR input, then a
// sigmoid output layer over [embedding | EHR part]":
//
//   EhrLinear       sigma(W x + b)
//   EhrTwoLayer     sigma(W2 relu(W1 x + b1) + b2)
//   ImageLinear     sigma(W e + b)
//   CombinedDirect  sigma(W [e | x] + b)
//   CombinedHidden  sigma(W2 [e | relu(W1 x + b1)] + b2)

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "arfdx/types.hpp"

namespace arfdx {

enum class ModelKind { kEhrLinear, kEhrTwoLayer, kImageLinear, kCombinedDirect, kCombinedHidden };
enum class ModelFamily { kEhr, kImage, kCombined };

inline constexpr std::array<ModelKind, 5> kAllModelKinds{
    ModelKind::kEhrLinear, ModelKind::kEhrTwoLayer, ModelKind::kImageLinear, ModelKind::kCombinedDirect,
    ModelKind::kCombinedHidden};

std::string_view to_string(ModelKind kind);
std::string_view to_string(ModelFamily family);
ModelKind parse_model_kind(std::string_view name);
ModelFamily parse_model_family(std::string_view name);

ModelFamily family_of(ModelKind kind);
// Architectures swept for a family, in sweep order.
std::vector<ModelKind> architectures(ModelFamily family);

bool uses_ehr(ModelKind kind);
bool uses_image(ModelKind kind);
bool has_hidden_layer(ModelKind kind);

struct ModelSpec {
  static constexpr std::size_t kOutputs = kNumDiagnoses;

  ModelKind kind = ModelKind::kEhrLinear;
  std::size_t ehr_dim = 0;
  std::size_t emb_dim = 0;
  std::size_t hidden = 100;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Hidden layer first (when present), output layer last.
struct ModelParams {
  std::vector<DenseLayer> layers;

  std::size_t parameter_count() const;
  Eigen::VectorXd flatten() const;  // per layer: weights row-major, then bias
  void assign_flat(const Eigen::VectorXd& flat);
  ModelParams zeros_like() const;
  bool all_finite() const;
};

// Shapes of the layers implied by a spec, as (rows, cols) of each weight.
std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(const ModelSpec& spec);

ModelParams zero_params(const ModelSpec& spec);
// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) for weights and biases.
ModelParams init_params(const ModelSpec& spec, std::uint64_t seed);

// Throws ShapeMismatch when params do not fit the spec.
void check_shapes(const ModelSpec& spec, const ModelParams& params);

// Batch inputs: one row per sample. Unused modalities may be 0-column.
struct Batch {
  Eigen::MatrixXd ehr;
  Eigen::MatrixXd emb;
  Eigen::MatrixXd labels;  // n x 3 of {0, 1}
};

// n x 3 sigmoid probabilities.
Eigen::MatrixXd forward(const ModelSpec& spec, const ModelParams& params, const Eigen::MatrixXd& ehr,
                        const Eigen::MatrixXd& emb);

// Single sample; pass an empty vector for an unused modality.
Eigen::Vector3d forward(const ModelSpec& spec, const ModelParams& params, const Eigen::VectorXd& ehr,
                        const Eigen::VectorXd& emb);

inline constexpr double kProbabilityClamp = 1e-7;

// Batch mean of the summed per-output binary cross-entropy; probabilities are
// clamped to [1e-7, 1 - 1e-7]. Weight decay is not included.
double loss(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& labels);

struct LossAndGradient {
  double loss = 0.0;
  ModelParams gradient;
};

// Exact gradient of the batch-mean cross-entropy.
LossAndGradient loss_and_gradient(const ModelSpec& spec, const ModelParams& params, const Batch& batch);
ModelParams backward(const ModelSpec& spec, const ModelParams& params, const Batch& batch);

struct HyperParams {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t batch_size = 32;
  std::size_t patience = 5;
  std::size_t max_epochs = 100;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

// v <- momentum * v + (g + weight_decay * theta); theta <- theta - lr * v.
// Throws Diverged when any updated entry is non-finite.
void sgd_step(ModelParams& params, ModelParams& velocity, const ModelParams& grads, const HyperParams& hp);

// Stop once `patience` consecutive epochs fail to beat the best metric.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when training should stop after this epoch.
  bool update(std::size_t epoch, double metric);
  bool improved() const { return since_best_ == 0; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_metric() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t since_best_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_macro_auroc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_macro_auroc = 0.0;
};

// One patient: binary EHR features and the embeddings of every image in the
// selected study.
struct PatientExample {
  std::string patient_id;
  Eigen::VectorXd ehr;
  std::vector<Eigen::VectorXd> images;
  Eigen::Vector3d labels = Eigen::Vector3d::Zero();
};

struct TrainedModel {
  ModelSpec spec;
  HyperParams hyper;
  ModelParams params;
  TrainHistory history;
  std::uint64_t seed = 0;
};

// Mean over the patient's images (EHR-only kinds ignore images).
Eigen::Vector3d predict_patient(const ModelSpec& spec, const ModelParams& params, const PatientExample& patient);

// n x 3 per-patient probabilities.
Eigen::MatrixXd predict(const ModelSpec& spec, const ModelParams& params, std::span<const PatientExample> patients);

double macro_auroc(const Eigen::MatrixXd& probs, std::span<const PatientExample> patients);

// Image kinds contribute one training sample per image, EHR kinds one per
// patient. Returns the best-validation checkpoint.
TrainedModel train(const ModelSpec& spec, const HyperParams& hp, std::span<const PatientExample> train_set,
                   std::span<const PatientExample> val_set, std::uint64_t seed);

struct HyperGrid {
  std::vector<double> learning_rates{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 3.0};
  std::vector<double> momenta{0.8, 0.9};
  std::vector<double> weight_decays{1e-4, 1e-3, 1e-2, 1e-1};
  std::size_t batch_size = 32;
  std::size_t patience = 5;
  std::size_t max_epochs = 100;
};

struct SweepCandidate {
  ModelSpec spec;
  HyperParams hyper;
};

// Learning-rate major, then momentum, then weight decay, then architecture.
std::vector<SweepCandidate> enumerate_sweep(ModelFamily family, const HyperGrid& grid, std::size_t ehr_dim,
                                            std::size_t emb_dim, std::size_t hidden = 100);

struct SweepEntry {
  SweepCandidate candidate;
  double val_macro_auroc = -std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  bool diverged = false;
};

struct SweepResult {
  TrainedModel best;
  std::size_t best_index = 0;
  std::vector<SweepEntry> entries;
};

// Trains every candidate (in parallel up to `threads`), picks the highest
// validation macro-AUROC, earlier candidates win ties.
SweepResult sweep(std::span<const SweepCandidate> candidates, std::span<const PatientExample> train_set,
                  std::span<const PatientExample> val_set, std::uint64_t seed, std::size_t threads = 1);

// Checkpoint JSON: spec, row-major parameter arrays, hyperparameters, seed and
// best validation metrics. Loading validates shapes against the spec.
std::string checkpoint_to_json(const TrainedModel& model);
TrainedModel checkpoint_from_json(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace arfdx
