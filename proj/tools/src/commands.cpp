#include "commands.hpp"

#include <charconv>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "arfdx/cli/pipeline.hpp"
#include "arfdx/csv.hpp"
#include "arfdx/error.hpp"
#include "arfdx/explain.hpp"
#include "arfdx/io.hpp"
#include "arfdx/rng.hpp"
#include "arfdx/synth.hpp"

namespace arfdx::cli {

namespace {

namespace fs = std::filesystem;
using Row = std::vector<std::string>;

std::string hex64(std::uint64_t v) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + 16, v, 16);
  std::string s(buf, ptr);
  return std::string(16 - s.size(), '0') + s;
}

std::string num(double v) { return csv::format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::string provenance(const Context& ctx) {
  const std::string& seed = ctx.config.get("run.seed");
  return "# arfdx " ARFDX_VERSION " command=" + ctx.command + " seed=" + (seed.empty() ? "none" : seed) +
         " config=" + hex64(ctx.config.hash()) + "\n";
}

void write_text(const Context& ctx, const fs::path& path, const std::string& body) {
  write_file_atomic(path, provenance(ctx) + body);
}

void write_csv(const Context& ctx, const fs::path& path, const Row& header, const std::vector<Row>& rows) {
  std::string body = csv::format_row(header);
  for (const auto& r : rows) body += csv::format_row(r);
  write_text(ctx, path, body);
}

struct Table {
  fs::path path;
  std::vector<std::string> header;
  std::vector<Row> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCode::kFormatError, path.string() + ": missing column '" + name + "'");
  }
};

Table read_table(const fs::path& path) {
  auto records = csv::parse(read_text_file(path));
  if (records.empty()) throw Error(ErrorCode::kFormatError, path.string() + ": no header row");
  Table t{path, std::move(records.front()), {}};
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.header.size()) {
      throw Error(ErrorCode::kFormatError, path.string() + ": record " + std::to_string(i) + " has " +
                                               std::to_string(records[i].size()) + " fields");
    }
    t.rows.push_back(std::move(records[i]));
  }
  return t;
}

std::size_t parse_index(const std::string& s, const fs::path& where) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kFormatError, where.string() + ": bad integer '" + s + "'");
  }
  return v;
}

CohortConfig cohort_config(const RunConfig& c) {
  CohortConfig cfg;
  cfg.onset_horizon = hours(static_cast<std::int64_t>(c.get_size("cohort.onset_horizon_hours")));
  cfg.min_window = hours(static_cast<std::int64_t>(c.get_size("cohort.min_window_hours")));
  cfg.post_surgical_buffer = hours(static_cast<std::int64_t>(c.get_size("cohort.post_surgical_buffer_hours")));
  return cfg;
}

std::vector<PatientStay> load_cohort(const Context& ctx) {
  const auto& c = ctx.config;
  std::istringstream in(read_text_file(c.path("cohort", "cohort.ndjson")));
  auto result = parse_cohort(in, cohort_config(c));
  std::ostringstream rejects;
  for (const auto& r : result.rejects) rejects << r.line_number << '\t' << r.reason << '\n';
  write_text(ctx, c.out_dir() / "cohort.rejects", rejects.str());
  if (!result.rejects.empty()) {
    ctx.out << ctx.command << ": " << result.rejects.size() << " cohort lines rejected (see "
            << (c.out_dir() / "cohort.rejects").string() << ")\n";
  }
  return std::move(result.stays);
}

std::map<std::string, PatientStay> stays_by_id(const Context& ctx) {
  std::map<std::string, PatientStay> out;
  for (auto& s : load_cohort(ctx)) {
    std::string id = s.patient_id;
    if (!out.emplace(id, std::move(s)).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate patient_id " + id);
    }
  }
  return out;
}

const PatientStay& find_stay(const std::map<std::string, PatientStay>& stays, const std::string& id) {
  auto it = stays.find(id);
  if (it == stays.end()) throw Error(ErrorCode::kInvalidArgument, "patient " + id + " is not in the cohort");
  return it->second;
}

fs::path labels_path(const Context& ctx) { return ctx.config.out_dir() / "labels.csv"; }
fs::path splits_path(const Context& ctx) { return ctx.config.out_dir() / "splits.csv"; }
fs::path features_path(const Context& ctx, std::size_t k) {
  return ctx.config.out_dir() / ("features_split" + std::to_string(k) + ".ndjson");
}
fs::path featurizer_path(const Context& ctx, std::size_t k) {
  return ctx.config.out_dir() / ("featurizer_split" + std::to_string(k) + ".json");
}
fs::path model_path(const Context& ctx, ModelFamily family, std::size_t k) {
  return ctx.config.out_dir() / "models" /
         (std::string(to_string(family)) + "_split" + std::to_string(k) + ".json");
}

// Labels of the configured source; patients without one are left out.
std::map<std::string, DiagnosisLabels> load_labels(const Context& ctx) {
  const std::string& source = ctx.config.get("labels.source");
  if (source != "chart_review" && source != "code_med") {
    throw ConfigError("labels.source must be chart_review or code_med, got '" + source + "'");
  }
  const Table t = read_table(labels_path(ctx));
  const std::string prefix = source == "chart_review" ? "chart_" : "code_med_";
  const std::size_t id_col = t.column("patient_id");
  PerDiagnosis<std::size_t> cols{};
  for (Diagnosis d : kAllDiagnoses) cols[index_of(d)] = t.column(prefix + std::string(diagnosis_name(d)));
  std::map<std::string, DiagnosisLabels> out;
  for (const auto& r : t.rows) {
    if (r[cols[0]].empty()) continue;
    DiagnosisLabels l;
    l.source = source == "chart_review" ? LabelSource::kChartReview : LabelSource::kCodeMed;
    for (std::size_t k = 0; k < kNumDiagnoses; ++k) l.assigned[k] = r[cols[k]] == "1";
    out.emplace(r[id_col], l);
  }
  return out;
}

std::vector<SplitAssignment> load_splits(const Context& ctx) {
  const Table t = read_table(splits_path(ctx));
  const std::size_t s_col = t.column("split"), id_col = t.column("patient_id"), r_col = t.column("role");
  std::map<std::size_t, std::map<std::string, Role>> by_split;
  for (const auto& r : t.rows) {
    Role role;
    if (r[r_col] == "train") role = Role::kTrain;
    else if (r[r_col] == "val") role = Role::kVal;
    else if (r[r_col] == "test") role = Role::kTest;
    else throw Error(ErrorCode::kFormatError, t.path.string() + ": unknown role '" + r[r_col] + "'");
    by_split[parse_index(r[s_col], t.path)][r[id_col]] = role;
  }
  std::vector<SplitAssignment> out;
  for (auto& [index, members] : by_split) {
    if (index != out.size()) throw Error(ErrorCode::kFormatError, t.path.string() + ": split indices not contiguous");
    SplitAssignment s;
    s.index = index;
    for (auto& [id, role] : members) {
      s.patient_ids.push_back(id);
      s.roles.push_back(role);
    }
    out.push_back(std::move(s));
  }
  if (out.size() != kNumSplits) {
    throw Error(ErrorCode::kFormatError, t.path.string() + ": expected " + std::to_string(kNumSplits) + " splits");
  }
  return out;
}

FittedFeaturizer load_featurizer(const Context& ctx, std::size_t k) {
  return FittedFeaturizer::from_json(read_text_file(featurizer_path(ctx, k)));
}

std::map<std::string, FeatureVector> load_features(const Context& ctx, std::size_t k, std::size_t dim) {
  const fs::path path = features_path(ctx, k);
  std::istringstream in(read_text_file(path));
  std::map<std::string, FeatureVector> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line.front() == '#') continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.emplace(j.at("patient_id").get<std::string>(),
                  FeatureVector::from_hex(j.at("features").get<std::string>(), dim));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormatError, path.string() + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

// Everything needed to build model inputs for one split.
struct SplitInputs {
  FittedFeaturizer featurizer;
  std::vector<PatientExample> train, val, test;
};

class Workspace {
 public:
  Workspace(const Context& ctx, bool need_images) : ctx_(ctx) {
    stays_ = stays_by_id(ctx);
    labels_ = load_labels(ctx);
    splits_ = load_splits(ctx);
    if (need_images) embeddings_ = load_embeddings(ctx.config.path("embeddings", "embeddings.bin"));
  }

  const std::vector<SplitAssignment>& splits() const { return splits_; }
  const std::map<std::string, PatientStay>& stays() const { return stays_; }
  std::size_t emb_dim() const { return embedding_width(embeddings_); }

  SplitInputs inputs(std::size_t k) const {
    SplitInputs in;
    in.featurizer = load_featurizer(ctx_, k);
    const auto features = load_features(ctx_, k, in.featurizer.dim);
    const auto& split = splits_.at(k);
    for (std::size_t i = 0; i < split.patient_ids.size(); ++i) {
      const std::string& id = split.patient_ids[i];
      auto f = features.find(id);
      if (f == features.end()) {
        throw Error(ErrorCode::kFormatError, features_path(ctx_, k).string() + ": no features for " + id);
      }
      auto l = labels_.find(id);
      if (l == labels_.end()) throw Error(ErrorCode::kFormatError, "no label for patient " + id);
      PatientExample ex;
      ex.patient_id = id;
      ex.ehr = to_eigen(f->second);
      if (!embeddings_.empty()) ex.images = study_embeddings(find_stay(stays_, id), embeddings_);
      ex.labels = to_eigen(l->second);
      switch (split.roles[i]) {
        case Role::kTrain: in.train.push_back(std::move(ex)); break;
        case Role::kVal: in.val.push_back(std::move(ex)); break;
        case Role::kTest: in.test.push_back(std::move(ex)); break;
      }
    }
    return in;
  }

 private:
  const Context& ctx_;
  std::map<std::string, PatientStay> stays_;
  std::map<std::string, DiagnosisLabels> labels_;
  std::vector<SplitAssignment> splits_;
  EmbeddingMap embeddings_;
};

std::vector<ModelFamily> families(const RunConfig& c) {
  std::vector<ModelFamily> out;
  for (const auto& name : c.get_list("train.families")) {
    try {
      out.push_back(parse_model_family(name));
    } catch (const Error&) {
      throw ConfigError("train.families: unknown family '" + name + "'");
    }
  }
  if (out.empty()) throw ConfigError("train.families is empty");
  return out;
}

bool needs_images(const std::vector<ModelFamily>& fams) {
  for (auto f : fams) {
    if (f != ModelFamily::kEhr) return true;
  }
  return false;
}

std::string label_cell(const std::optional<DiagnosisLabels>& l, std::size_t k) {
  if (!l) return "";
  return l->assigned[k] ? "1" : "0";
}

Row agreement_row(const std::string& kind, Diagnosis d, const AgreementTable& table) {
  Row r{kind, std::string(diagnosis_name(d))};
  try {
    const Agreement a = cohen_kappa(table);
    r.push_back(num(a.kappa));
    r.push_back(num(a.raw_agreement));
  } catch (const Error&) {
    r.push_back("NA");
    r.push_back(table.total() == 0 ? "NA" : num(double(table.both_yes + table.both_no) / double(table.total())));
  }
  for (std::size_t v : {table.both_yes, table.first_only, table.second_only, table.both_no}) r.push_back(num(v));
  return r;
}

}  // namespace

void cmd_synth(const Context& ctx) {
  const auto& c = ctx.config;
  SynthSpec spec = default_synth_spec(c.get_size("synth.n_patients"), derive_seed(c.seed(), "synth"),
                                      c.get_double("synth.ehr_signal"), c.get_double("synth.emb_signal"),
                                      c.get_size("synth.n_numeric_vars"), c.get_size("synth.emb_dim"));
  const auto prevalences = c.get_doubles("synth.prevalences");
  const auto shifts = c.get_doubles("synth.missing_shift");
  if (prevalences.size() != kNumDiagnoses) throw ConfigError("synth.prevalences needs three values");
  if (shifts.size() != kNumDiagnoses) throw ConfigError("synth.missing_shift needs three values");
  for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
    spec.prevalences[k] = prevalences[k];
    spec.missing_shift[k] = shifts[k];
  }
  spec.missing_base = c.get_double("synth.missing_base");
  spec.reviewer_noise = c.get_double("synth.reviewer_noise");
  spec.two_image_fraction = c.get_double("synth.two_image_fraction");

  const SynthCohort cohort = generate(spec);
  const fs::path dir = c.out_dir();
  std::ostringstream ndjson;
  write_cohort(ndjson, cohort.stays);
  write_text(ctx, dir / "cohort.ndjson", ndjson.str());
  save_embeddings(dir / "embeddings.bin", cohort.embeddings);
  write_text(ctx, dir / "truth.csv", truth_csv(cohort));
  write_text(ctx, dir / "ruleset.json", ruleset_to_json(cohort.ruleset));
  write_text(ctx, dir / "featurizer.json", featurizer_config_to_json(cohort.featurizer_config));
  ctx.out << "synth: " << cohort.stays.size() << " patients, " << cohort.embeddings.size() << " images -> "
          << dir.string() << "\n";
}

void cmd_label(const Context& ctx) {
  const auto& c = ctx.config;
  const PhenotypeRuleset ruleset = load_ruleset(c.path("ruleset", "ruleset.json"));
  const LabeledCohort cohort = select_cohort(load_cohort(ctx), cohort_config(c), ruleset);

  std::vector<Row> rows;
  std::vector<std::vector<ChartReview>> reviews;
  PerDiagnosis<AgreementTable> chart_vs_code{};
  for (std::size_t i = 0; i < cohort.stays.size(); ++i) {
    const auto& stay = cohort.stays[i];
    const auto& l = cohort.labels[i];
    Row r{stay.patient_id, num(stay.reviews.size())};
    for (std::size_t k = 0; k < kNumDiagnoses; ++k) r.push_back(label_cell(l.chart, k));
    for (std::size_t k = 0; k < kNumDiagnoses; ++k) r.push_back(l.code_med.assigned[k] ? "1" : "0");
    rows.push_back(std::move(r));
    if (stay.reviews.size() >= 2) reviews.push_back(stay.reviews);
    if (l.chart) {
      for (std::size_t k = 0; k < kNumDiagnoses; ++k) {
        const bool a = l.chart->assigned[k], b = l.code_med.assigned[k];
        auto& t = chart_vs_code[k];
        if (a && b) ++t.both_yes;
        else if (a) ++t.first_only;
        else if (b) ++t.second_only;
        else ++t.both_no;
      }
    }
  }
  Row header{"patient_id", "n_reviews"};
  for (const char* prefix : {"chart_", "code_med_"}) {
    for (Diagnosis d : kAllDiagnoses) header.push_back(prefix + std::string(diagnosis_name(d)));
  }
  write_csv(ctx, labels_path(ctx), header, rows);

  std::vector<Row> agreement;
  if (!reviews.empty()) {
    const auto inter = rater_agreement(reviews);
    for (Diagnosis d : kAllDiagnoses) agreement.push_back(agreement_row("inter_rater", d, inter[index_of(d)].table));
  }
  for (Diagnosis d : kAllDiagnoses) {
    agreement.push_back(agreement_row("chart_vs_code_med", d, chart_vs_code[index_of(d)]));
  }
  write_csv(ctx, c.out_dir() / "agreement.csv",
            {"comparison", "diagnosis", "kappa", "raw_agreement", "both_yes", "first_only", "second_only", "both_no"},
            agreement);
  ctx.out << "label: " << cohort.stays.size() << " included, " << cohort.excluded << " excluded\n";
}

void cmd_split(const Context& ctx) {
  const auto labels = load_labels(ctx);
  std::vector<std::string> ids;
  for (const auto& [id, l] : labels) ids.push_back(id);
  const auto splits = make_splits(ids, derive_seed(ctx.config.seed(), "split"));
  std::vector<Row> rows;
  for (const auto& s : splits) {
    for (std::size_t i = 0; i < s.patient_ids.size(); ++i) {
      rows.push_back({num(s.index), s.patient_ids[i], std::string(to_string(s.roles[i]))});
    }
  }
  write_csv(ctx, splits_path(ctx), {"split", "patient_id", "role"}, rows);
  ctx.out << "split: " << ids.size() << " patients into " << splits.size() << " splits\n";
}

void cmd_featurize(const Context& ctx) {
  const auto& c = ctx.config;
  FeaturizerConfig fcfg = featurizer_config_from_json(read_text_file(c.path("featurizer", "featurizer.json")));
  fcfg.bins_per_var = c.get_size("featurize.bins_per_var");
  fcfg.validate();
  const CohortConfig ccfg = cohort_config(c);
  const auto stays = stays_by_id(ctx);
  const auto labels = load_labels(ctx);
  const auto splits = load_splits(ctx);

  std::map<std::string, WindowValues> values;
  for (const auto& s : splits) {
    for (const auto& id : s.patient_ids) {
      if (values.count(id)) continue;
      const PatientStay& stay = find_stay(stays, id);
      values.emplace(id, extract_window_values(stay, fcfg, observation_window(stay, ccfg)));
    }
  }

  std::vector<Row> missingness;
  for (const auto& s : splits) {
    std::vector<WindowValues> train_values;
    const auto train_ids = s.ids_with(Role::kTrain);
    for (const auto& id : train_ids) train_values.push_back(values.at(id));
    const FittedFeaturizer f = fit(train_values, fcfg);

    std::string ndjson;
    for (const auto& id : s.patient_ids) {
      ndjson += nlohmann::json{{"patient_id", id}, {"features", encode(values.at(id), f).to_hex()}}.dump() + "\n";
    }
    write_text(ctx, features_path(ctx, s.index), ndjson);
    write_text(ctx, featurizer_path(ctx, s.index), f.to_json());

    std::vector<FeatureVector> encoded;
    std::vector<DiagnosisLabels> train_labels;
    for (const auto& id : train_ids) {
      encoded.push_back(encode(values.at(id), f));
      train_labels.push_back(labels.at(id));
    }
    for (const auto& m : missingness_correlation(encoded, train_labels, f)) {
      for (Diagnosis d : kAllDiagnoses) {
        const auto& r = m.spearman[index_of(d)];
        missingness.push_back({num(s.index), m.variable, std::string(diagnosis_name(d)), r ? num(*r) : "NA"});
      }
    }
  }
  write_csv(ctx, c.out_dir() / "missingness.csv", {"split", "variable", "diagnosis", "spearman"}, missingness);
  ctx.out << "featurize: " << values.size() << " patients, " << splits.size() << " splits\n";
}

void cmd_train(const Context& ctx) {
  const auto& c = ctx.config;
  const auto fams = families(c);
  HyperGrid grid;
  grid.learning_rates = c.get_doubles("train.learning_rates");
  grid.momenta = c.get_doubles("train.momenta");
  grid.weight_decays = c.get_doubles("train.weight_decays");
  grid.batch_size = c.get_size("train.batch_size");
  grid.patience = c.get_size("train.patience");
  grid.max_epochs = c.get_size("train.max_epochs");
  const std::size_t hidden = c.get_size("train.hidden");
  const std::uint64_t seed = derive_seed(c.seed(), "train");
  const Workspace ws(ctx, needs_images(fams));

  std::vector<Row> log;
  for (const auto& s : ws.splits()) {
    const SplitInputs in = ws.inputs(s.index);
    for (ModelFamily fam : fams) {
      const auto candidates = enumerate_sweep(fam, grid, in.featurizer.dim, ws.emb_dim(), hidden);
      const std::uint64_t run_seed = derive_seed(derive_seed(seed, to_string(fam)), s.index);
      const SweepResult result = sweep(candidates, in.train, in.val, run_seed, ctx.threads);
      write_text(ctx, model_path(ctx, fam, s.index), checkpoint_to_json(result.best));
      for (std::size_t i = 0; i < result.entries.size(); ++i) {
        const auto& e = result.entries[i];
        const auto& h = e.candidate.hyper;
        log.push_back({std::string(to_string(fam)), num(s.index), num(i), std::string(to_string(e.candidate.spec.kind)),
                       num(h.learning_rate), num(h.momentum), num(h.weight_decay),
                       e.diverged ? "NA" : num(e.val_macro_auroc), num(e.best_epoch), num(e.epochs_run),
                       e.diverged ? "1" : "0", i == result.best_index ? "1" : "0"});
      }
      ctx.out << "train: " << to_string(fam) << " split " << s.index << " val macro-AUROC "
              << num(result.best.history.best_val_macro_auroc) << " (" << to_string(result.best.spec.kind) << ")\n";
    }
  }
  write_csv(ctx, c.out_dir() / "sweep.csv",
            {"model", "split", "candidate", "architecture", "learning_rate", "momentum", "weight_decay",
             "val_macro_auroc", "best_epoch", "epochs_run", "diverged", "selected"},
            log);
}

void cmd_evaluate(const Context& ctx) {
  const auto& c = ctx.config;
  const auto fams = families(c);
  const std::uint64_t seed = derive_seed(c.seed(), "physician");
  // Checkpoints are checked up front so a missing one fails before any work.
  for (ModelFamily fam : fams) {
    for (std::size_t k = 0; k < kNumSplits; ++k) {
      if (!fs::exists(model_path(ctx, fam, k))) {
        throw IoError("missing checkpoint " + model_path(ctx, fam, k).string());
      }
    }
  }
  const Workspace ws(ctx, needs_images(fams));

  std::vector<Row> metrics, roc, calib, physician, summary;
  std::map<std::pair<ModelFamily, std::string>, std::vector<double>> per_split;
  auto metric = [&](ModelFamily fam, std::size_t k, const std::string& diag, const std::string& name, double v) {
    metrics.push_back({std::string(to_string(fam)), num(k), diag, name, num(v)});
    per_split[{fam, diag + "\x1f" + name}].push_back(v);
  };
  for (const auto& s : ws.splits()) {
    const SplitInputs in = ws.inputs(s.index);
    for (ModelFamily fam : fams) {
      const std::string model_name(to_string(fam));
      const TrainedModel model = load_checkpoint(model_path(ctx, fam, s.index));
      const PredictionSet test = prediction_set(predict(model.spec, model.params, in.test), in.test);
      const PredictionSet val = prediction_set(predict(model.spec, model.params, in.val), in.val);
      const MetricsReport report = evaluate_predictions(test, val);
      for (Diagnosis d : kAllDiagnoses) {
        const std::size_t k = index_of(d);
        const std::string dn(diagnosis_name(d));
        const auto& m = report.per_diagnosis[k];
        metric(fam, s.index, dn, "auroc", m.auroc);
        metric(fam, s.index, dn, "aupr", m.aupr);
        metric(fam, s.index, dn, "prevalence", m.prevalence);
        metric(fam, s.index, dn, "ece", m.calibration.ece);
        metric(fam, s.index, dn, "calibration_slope", m.calibration.line.slope);
        metric(fam, s.index, dn, "calibration_intercept", m.calibration.line.intercept);
        metric(fam, s.index, dn, "ece_recalibrated", m.ece_recalibrated);
        if (m.operating_point) {
          const auto& op = *m.operating_point;
          metric(fam, s.index, dn, "threshold", op.threshold);
          metric(fam, s.index, dn, "sensitivity", op.sensitivity);
          metric(fam, s.index, dn, "specificity", op.specificity);
          metric(fam, s.index, dn, "ppv", op.ppv);
          metric(fam, s.index, dn, "dor", op.dor.value);
          metric(fam, s.index, dn, "dor_corrected", op.dor.corrected ? 1.0 : 0.0);
        }
        for (const auto& p : roc_curve(test.scores[k], test.labels[k])) {
          roc.push_back({model_name, num(s.index), dn, num(p.threshold), num(p.fpr), num(p.tpr)});
        }
        for (std::size_t b = 0; b < kCalibrationBins; ++b) {
          const auto& bin = m.calibration.bins[b];
          calib.push_back({model_name, num(s.index), dn, num(b + 1), num(bin.mean_prediction),
                           num(bin.observed_fraction), num(bin.count)});
        }
      }
      metric(fam, s.index, "macro", "auroc", report.macro_auroc);
      metric(fam, s.index, "macro", "aupr", report.macro_aupr);
      metric(fam, s.index, "macro", "ece", report.macro_ece);

      std::vector<PhysicianCase> cases;
      for (std::size_t i = 0; i < in.test.size(); ++i) {
        const auto& stay = find_stay(ws.stays(), in.test[i].patient_id);
        if (stay.reviews.size() < 3) continue;
        PhysicianCase pc{stay.reviews, {}};
        for (std::size_t k = 0; k < kNumDiagnoses; ++k) pc.model_probs[k] = test.scores[k][i];
        cases.push_back(std::move(pc));
      }
      Rng rng(derive_seed(derive_seed(seed, to_string(fam)), s.index));
      try {
        const PhysicianComparison pc = physician_comparison(cases, rng);
        for (Diagnosis d : kAllDiagnoses) {
          physician.push_back({model_name, num(s.index), std::string(diagnosis_name(d)), num(pc.patients),
                               num(pc.physician_auroc[index_of(d)]), num(pc.model_auroc[index_of(d)])});
        }
        physician.push_back(
            {model_name, num(s.index), "macro", num(pc.patients), num(pc.physician_macro), num(pc.model_macro)});
      } catch (const Error& e) {
        physician.push_back({model_name, num(s.index), "macro", num(cases.size()), "NA", "NA"});
        ctx.out << "evaluate: physician comparison skipped for " << model_name << " split " << s.index << ": "
                << e.what() << "\n";
      }
    }
  }

  for (const auto& [key, values] : per_split) {
    const auto sep = key.second.find('\x1f');
    if (values.size() != kNumSplits) continue;
    const SplitSummary sm = summarize_splits(values);
    summary.push_back({std::string(to_string(key.first)), key.second.substr(0, sep), key.second.substr(sep + 1),
                       num(sm.median), num(sm.min), num(sm.max)});
  }

  const fs::path dir = c.out_dir();
  write_csv(ctx, dir / "metrics.csv", {"model", "split", "diagnosis", "metric", "value"}, metrics);
  write_csv(ctx, dir / "summary.csv", {"model", "diagnosis", "metric", "median", "min", "max"}, summary);
  write_csv(ctx, dir / "roc_points.csv", {"model", "split", "diagnosis", "threshold", "fpr", "tpr"}, roc);
  write_csv(ctx, dir / "calibration_points.csv",
            {"model", "split", "diagnosis", "bin", "mean_prediction", "observed_fraction", "count"}, calib);
  write_csv(ctx, dir / "physician.csv",
            {"model", "split", "diagnosis", "patients", "physician_auroc", "model_auroc"}, physician);
  ctx.out << "evaluate: wrote metrics for " << fams.size() << " model families\n";
}

void cmd_explain(const Context& ctx) {
  const auto& c = ctx.config;
  ModelFamily fam;
  try {
    fam = parse_model_family(c.get("explain.model"));
  } catch (const Error&) {
    throw ConfigError("explain.model: unknown family '" + c.get("explain.model") + "'");
  }
  if (fam == ModelFamily::kImage) throw ConfigError("explain.model must use EHR features");
  for (std::size_t k = 0; k < kNumSplits; ++k) {
    if (!fs::exists(model_path(ctx, fam, k))) throw IoError("missing checkpoint " + model_path(ctx, fam, k).string());
  }
  const std::size_t reps = c.get_size("explain.repetitions");
  const double threshold = c.get_double("explain.correlation_threshold");
  const std::uint64_t seed = derive_seed(c.seed(), "explain");
  const Workspace ws(ctx, fam != ModelFamily::kEhr);

  // Groups come from the first split's training rows and are shared by all splits.
  const FittedFeaturizer f0 = load_featurizer(ctx, 0);
  const auto features0 = load_features(ctx, 0, f0.dim);
  std::vector<FeatureVector> train_rows;
  for (const auto& id : ws.splits()[0].ids_with(Role::kTrain)) train_rows.push_back(features0.at(id));
  const auto groups = correlation_groups(variable_signals(train_rows, f0), threshold);

  PerDiagnosis<std::vector<std::vector<double>>> drops;
  for (const auto& s : ws.splits()) {
    const SplitInputs in = ws.inputs(s.index);
    const TrainedModel model = load_checkpoint(model_path(ctx, fam, s.index));
    Eigen::MatrixXd ehr(static_cast<Eigen::Index>(in.test.size()), static_cast<Eigen::Index>(in.featurizer.dim));
    for (std::size_t i = 0; i < in.test.size(); ++i) ehr.row(static_cast<Eigen::Index>(i)) = in.test[i].ehr.transpose();
    for (Diagnosis d : kAllDiagnoses) {
      std::vector<int> labels;
      for (const auto& p : in.test) labels.push_back(p.labels[static_cast<Eigen::Index>(index_of(d))] > 0.5 ? 1 : 0);
      const Scorer scorer = make_scorer(model, in.test, d);
      const std::uint64_t run_seed = derive_seed(derive_seed(seed, diagnosis_name(d)), s.index);
      drops[index_of(d)].push_back(permutation_importance(scorer, ehr, labels, groups, in.featurizer, run_seed, reps));
    }
  }

  std::vector<Row> rows;
  for (Diagnosis d : kAllDiagnoses) {
    const ImportanceReport report = aggregate_ranks(d, groups, drops[index_of(d)]);
    for (const auto& g : report.groups) {
      std::string per_split;
      for (std::size_t i = 0; i < g.split_drops.size(); ++i) {
        if (i) per_split += ';';
        per_split += num(g.split_drops[i]);
      }
      rows.push_back({std::string(diagnosis_name(d)), g.group.id, num(g.mean_rank), num(g.mean_drop), per_split});
    }
    ctx.out << "explain: " << diagnosis_name(d) << " top groups:";
    for (const auto& id : report.top5) ctx.out << ' ' << id;
    ctx.out << "\n";
  }
  write_csv(ctx, c.out_dir() / "importance.csv",
            {"diagnosis", "group_members", "mean_rank", "mean_drop", "per_split_drops"}, rows);
}

}  // namespace arfdx::cli
