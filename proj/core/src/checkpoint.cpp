#include <nlohmann/json.hpp>

#include "arfdx/error.hpp"
#include "arfdx/io.hpp"
#include "arfdx/models.hpp"

namespace arfdx {

using nlohmann::json;
using nlohmann::ordered_json;

std::string checkpoint_to_json(const TrainedModel& model) {
  ordered_json j;
  j["format"] = "arfdx-checkpoint-1";
  j["spec"] = {{"kind", to_string(model.spec.kind)},
               {"ehr_dim", model.spec.ehr_dim},
               {"emb_dim", model.spec.emb_dim},
               {"hidden", model.spec.hidden},
               {"outputs", ModelSpec::kOutputs}};
  j["hyper"] = {{"learning_rate", model.hyper.learning_rate}, {"momentum", model.hyper.momentum},
                {"weight_decay", model.hyper.weight_decay},   {"batch_size", model.hyper.batch_size},
                {"patience", model.hyper.patience},           {"max_epochs", model.hyper.max_epochs}};
  j["seed"] = model.seed;
  j["best_validation"] = {{"macro_auroc", model.history.best_val_macro_auroc},
                          {"best_epoch", model.history.best_epoch},
                          {"epochs_run", model.history.epochs.size()}};
  j["layers"] = ordered_json::array();
  for (const auto& l : model.params.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    }
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    j["layers"].push_back({{"rows", l.weights.rows()}, {"cols", l.weights.cols()}, {"weights", w}, {"bias", b}});
  }
  j["history"] = ordered_json::array();
  for (const auto& e : model.history.epochs) {
    j["history"].push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_macro_auroc", e.val_macro_auroc}});
  }
  return j.dump(1);
}

TrainedModel checkpoint_from_json(std::string_view text) {
  TrainedModel m;
  try {
    const json j = json::parse(skip_comment_header(text));
    const auto& spec = j.at("spec");
    m.spec.kind = parse_model_kind(spec.at("kind").get<std::string>());
    m.spec.ehr_dim = spec.at("ehr_dim").get<std::size_t>();
    m.spec.emb_dim = spec.at("emb_dim").get<std::size_t>();
    m.spec.hidden = spec.at("hidden").get<std::size_t>();
    if (spec.value("outputs", ModelSpec::kOutputs) != ModelSpec::kOutputs) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint must have 3 outputs");
    }
    const auto& h = j.at("hyper");
    m.hyper.learning_rate = h.at("learning_rate").get<double>();
    m.hyper.momentum = h.at("momentum").get<double>();
    m.hyper.weight_decay = h.at("weight_decay").get<double>();
    m.hyper.batch_size = h.at("batch_size").get<std::size_t>();
    m.hyper.patience = h.at("patience").get<std::size_t>();
    m.hyper.max_epochs = h.at("max_epochs").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& bv = j.at("best_validation");
    m.history.best_val_macro_auroc = bv.at("macro_auroc").get<double>();
    m.history.best_epoch = bv.at("best_epoch").get<std::size_t>();
    for (const auto& e : j.value("history", json::array())) {
      m.history.epochs.push_back(
          {e.at("epoch").get<std::size_t>(), e.at("train_loss").get<double>(), e.at("val_macro_auroc").get<double>()});
    }
    for (const auto& l : j.at("layers")) {
      const auto rows = l.at("rows").get<Eigen::Index>();
      const auto cols = l.at("cols").get<Eigen::Index>();
      const auto w = l.at("weights").get<std::vector<double>>();
      const auto b = l.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows) {
        throw Error(ErrorCode::kShapeMismatch, "checkpoint layer arrays do not match rows x cols");
      }
      DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
        layer.bias[r] = b[static_cast<std::size_t>(r)];
      }
      m.params.layers.push_back(std::move(layer));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("checkpoint: ") + e.what());
  }
  check_shapes(m.spec, m.params);
  if (!m.params.all_finite()) throw Error(ErrorCode::kFormatError, "checkpoint holds non-finite parameters");
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model) {
  write_file_atomic(path, checkpoint_to_json(model));
}

TrainedModel load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("missing checkpoint " + path.string());
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace arfdx
