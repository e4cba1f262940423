// tabinr command-line tool: mask synthesis, training, imputation, test-time
// adaptation, benchmark sweeps, ablations, and report aggregation.
//
// Exit codes: 0 success, 2 bad arguments, 3 IO failure, 4 data validation
// failure. These are stable; scripts may rely on them.

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tabinr/baselines.hpp"
#include "tabinr/metrics.hpp"
#include "tabinr/missingness.hpp"
#include "tabinr/model.hpp"
#include "tabinr/rng.hpp"
#include "tabinr/synthetic.hpp"
#include "tabinr/table.hpp"
#include "tabinr/tta.hpp"

using nlohmann::json;
using namespace tabinr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgs = 2;
constexpr int kExitIo = 3;
constexpr int kExitData = 4;

// Thrown for filesystem-level problems so main can map them to exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

EncodedTable load_dataset(const std::string& data_path, const std::string& schema_path) {
  TableSchema schema = schema_from_json(read_file(schema_path));
  std::istringstream csv(read_file(data_path));
  return load_table(csv, schema);
}

// Parse data against the checkpoint's schema so category lists line up with
// the training run even when the file declares none and the new data only
// covers a subset of the categories.
EncodedTable load_dataset_for_model(const std::string& data_path, const std::string& schema_path,
                                    const TabInrModel& model) {
  TableSchema declared = schema_from_json(read_file(schema_path));
  if (declared.columns.size() != model.schema.columns.size())
    throw std::invalid_argument("checkpoint schema does not match --schema");
  for (size_t j = 0; j < declared.columns.size(); ++j) {
    const auto& d = declared.columns[j];
    const auto& m = model.schema.columns[j];
    if (d.name != m.name || d.kind != m.kind ||
        (!d.categories.empty() && d.categories != m.categories))
      throw std::invalid_argument("checkpoint schema does not match --schema");
  }
  std::istringstream csv(read_file(data_path));
  return load_table(csv, model.schema);
}

// Architecture defaults, overridable from a JSON object.
TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  if (j.contains("latent_dim")) cfg.latent_dim = j.at("latent_dim").get<int>();
  if (j.contains("hidden_layers")) cfg.hidden_layers = j.at("hidden_layers").get<int>();
  if (j.contains("hidden_units")) cfg.hidden_units = j.at("hidden_units").get<int>();
  if (j.contains("dropout")) cfg.dropout = j.at("dropout").get<double>();
  if (j.contains("activation"))
    cfg.activation.kind = activation_from_string(j.at("activation").get<std::string>());
  if (j.contains("omega0")) cfg.activation.omega0 = j.at("omega0").get<double>();
  if (j.contains("beta")) cfg.activation.beta = j.at("beta").get<double>();
  if (j.contains("lr")) cfg.lr = j.at("lr").get<double>();
  if (j.contains("eta_min")) cfg.eta_min = j.at("eta_min").get<double>();
  if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
  if (j.contains("batch_rows")) cfg.batch_rows = j.at("batch_rows").get<int>();
  if (j.contains("masking_ratio")) cfg.masking_ratio = j.at("masking_ratio").get<double>();
  if (j.contains("masking_strategy"))
    cfg.masking_strategy = j.at("masking_strategy").get<std::string>() == "per_epoch_corruption"
                               ? MaskingStrategy::per_epoch_corruption
                               : MaskingStrategy::holdout;
  if (j.contains("early_stop_patience"))
    cfg.early_stop_patience = j.at("early_stop_patience").get<int>();
  if (j.contains("stop_train_loss")) cfg.stop_train_loss = j.at("stop_train_loss").get<double>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"latent_dim", cfg.latent_dim},
              {"hidden_layers", cfg.hidden_layers},
              {"hidden_units", cfg.hidden_units},
              {"dropout", cfg.dropout},
              {"activation", activation_to_string(cfg.activation.kind)},
              {"omega0", cfg.activation.omega0},
              {"beta", cfg.activation.beta},
              {"lr", cfg.lr},
              {"eta_min", cfg.eta_min},
              {"epochs", cfg.epochs},
              {"batch_rows", cfg.batch_rows},
              {"masking_ratio", cfg.masking_ratio},
              {"masking_strategy", cfg.masking_strategy == MaskingStrategy::holdout
                                       ? "holdout"
                                       : "per_epoch_corruption"},
              {"early_stop_patience", cfg.early_stop_patience},
              {"stop_train_loss", cfg.stop_train_loss},
              {"seed", cfg.seed}};
}

// Synthetic stand-ins so sweeps run without the UCI files.
EncodedTable make_synthetic(const json& spec, std::uint64_t seed) {
  const std::string kind = spec.at("synthetic").get<std::string>();
  const int rows = spec.value("rows", 500);
  const int cols = spec.value("cols", 8);
  if (kind == "rank1") return synth_rank1(rows, cols, seed, spec.value("noise", 0.01));
  if (kind == "correlated_gaussian")
    return synth_correlated_gaussian(rows, cols, seed, spec.value("factors", 2),
                                     spec.value("noise", 0.3));
  if (kind == "logistic_categorical")
    return synth_logistic_categorical(rows, spec.value("numeric", cols),
                                      spec.value("categorical", 2),
                                      spec.value("categories", 3), seed);
  throw std::invalid_argument("unknown synthetic kind: " + kind);
}

EncodedTable resolve_dataset(const json& spec, std::uint64_t seed) {
  if (spec.contains("synthetic")) return make_synthetic(spec, seed);
  return load_dataset(spec.at("data").get<std::string>(),
                      spec.at("schema").get<std::string>());
}

// Raw prediction scores for masked cells (logits for one-hot columns), used
// for AUROC before winner-takes-all decoding.
Matrix tabinr_scores(const TabInrModel& model, const EncodedTable& scaled,
                     const BoolMask& mask) {
  std::vector<Cell> wanted;
  for (int i = 0; i < scaled.rows(); ++i)
    for (int j = 0; j < scaled.cols(); ++j)
      if (mask(i, j)) wanted.push_back(Cell{i, j, !scaled.is_numeric[j], 0.0});
  Matrix scores = Matrix::Zero(scaled.rows(), scaled.cols());
  if (wanted.empty()) return scores;
  Eigen::VectorXd preds = predict_cells(model, wanted);
  for (size_t k = 0; k < wanted.size(); ++k)
    scores(wanted[k].row, wanted[k].col) = preds(k);
  return scores;
}

struct CellResult {
  json record;
  bool failed = false;
};

struct SummaryKey {
  std::string dataset, method, mechanism;
  double rate;
  bool operator<(const SummaryKey& o) const {
    return std::tie(dataset, method, mechanism, rate) <
           std::tie(o.dataset, o.method, o.mechanism, o.rate);
  }
};

struct SummaryAcc {
  std::vector<double> nrmse, auroc;
};

// One benchmark cell: synthesize mask, impute, score.
json run_cell(const json& dataset_spec, const std::string& method, Mechanism mech,
              double rate, std::uint64_t seed, const TrainConfig& base_cfg, int knn_k) {
  const std::string ds_name = dataset_spec.at("name").get<std::string>();
  auto t0 = std::chrono::steady_clock::now();

  EncodedTable full = resolve_dataset(dataset_spec, rng::derive(seed, "bench.data"));
  MissingnessSpec mspec;
  mspec.mechanism = mech;
  mspec.p_miss = rate;
  mspec.seed = rng::derive(seed, "bench.mask");
  MaskPair pair = synthesize_mask(full, mspec);
  EncodedTable masked = apply_mask(full, pair.mask);

  Matrix imputed;
  Matrix scores;
  if (method == "tabinr") {
    EncodedTable scaled = fit_scaling(masked);
    TrainConfig cfg = base_cfg;
    cfg.seed = rng::derive(seed, "bench.train");
    TabInrModel model = train(scaled, cfg);
    imputed = impute(model, scaled, pair.mask);
    scores = tabinr_scores(model, scaled, pair.mask);
  } else if (method == "mean_mode") {
    imputed = impute_mean_mode(masked, BoolMask::Constant(full.rows(), full.cols(), false));
    scores = imputed;
  } else if (method == "knn") {
    imputed = impute_knn(masked, BoolMask::Constant(full.rows(), full.cols(), false), knn_k);
    scores = imputed;
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }

  NrmseReport nr = nrmse(full, imputed, pair.mask);
  AurocReport ar = auroc(full, scores, pair.mask);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json rec;
  rec["dataset"] = ds_name;
  rec["method"] = method;
  rec["mechanism"] = mechanism_to_string(mech);
  rec["rate"] = rate;
  rec["seed"] = seed;
  rec["realized_rate"] = realized_rate(full, pair.mask);
  rec["nrmse"] = nr.per_feature.empty() && nr.skipped.empty() ? json() : json(nr.mean);
  rec["rmse"] = nr.rmse_mean;
  rec["nrmse_per_feature"] = nr.per_feature;
  rec["auroc"] = ar.mean ? json(*ar.mean) : json();
  rec["auroc_per_component"] = ar.per_component;
  rec["wall_time_s"] = secs;
  rec["config"] = train_config_to_json(base_cfg);
  return rec;
}

void append_summary(std::map<SummaryKey, SummaryAcc>& acc, const json& rec) {
  if (rec.contains("error")) return;
  SummaryKey key{rec.at("dataset").get<std::string>(), rec.at("method").get<std::string>(),
                 rec.at("mechanism").get<std::string>(), rec.at("rate").get<double>()};
  auto& slot = acc[key];
  if (!rec.at("nrmse").is_null()) slot.nrmse.push_back(rec.at("nrmse").get<double>());
  if (!rec.at("auroc").is_null()) slot.auroc.push_back(rec.at("auroc").get<double>());
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::nan(""), std::nan("")};
  double mu = 0;
  for (double x : v) mu += x;
  mu /= v.size();
  double var = 0;
  for (double x : v) var += (x - mu) * (x - mu);
  var /= v.size();
  return {mu, std::sqrt(var)};
}

std::string summary_csv(const std::map<SummaryKey, SummaryAcc>& acc) {
  std::ostringstream out;
  out.precision(17);
  out << "dataset,method,mechanism,rate,n_runs,nrmse_mean,nrmse_std,auroc_mean,auroc_std\n";
  for (const auto& [key, slot] : acc) {
    auto [nm, ns] = mean_std(slot.nrmse);
    auto [am, as] = mean_std(slot.auroc);
    out << key.dataset << ',' << key.method << ',' << key.mechanism << ',' << key.rate << ','
        << std::max(slot.nrmse.size(), slot.auroc.size()) << ',';
    auto put = [&](double v) {
      if (std::isnan(v))
        out << "";
      else
        out << v;
    };
    put(nm);
    out << ',';
    put(ns);
    out << ',';
    put(am);
    out << ',';
    put(as);
    out << '\n';
  }
  return out.str();
}

// ---- subcommand bodies -------------------------------------------------

struct SynthesizeArgs {
  std::string data, schema, mechanism = "mcar", out;
  double rate = 0.3;
  std::uint64_t seed = 0;
};

void cmd_synthesize(const SynthesizeArgs& a) {
  EncodedTable t = load_dataset(a.data, a.schema);
  MissingnessSpec spec;
  spec.mechanism = mechanism_from_string(a.mechanism);
  spec.p_miss = a.rate;
  spec.seed = a.seed;
  MaskPair pair = synthesize_mask(t, spec);

  std::ostringstream mask_csv;
  write_mask_csv(mask_csv, pair.mask);
  write_file(a.out, mask_csv.str());

  json sidecar{{"mechanism", a.mechanism},
               {"rate", a.rate},
               {"seed", a.seed},
               {"rows", t.rows()},
               {"expanded_cols", t.cols()},
               {"realized_rate", realized_rate(t, pair.mask)}};
  write_file(a.out + ".json", sidecar.dump(2) + "\n");
}

struct TrainArgs {
  std::string data, schema, mask, config, out;
  std::optional<std::uint64_t> seed;
};

void cmd_train(const TrainArgs& a) {
  EncodedTable t = load_dataset(a.data, a.schema);
  if (!a.mask.empty()) {
    std::istringstream in(read_file(a.mask));
    BoolMask mask = read_mask_csv(in, t, false);
    t = apply_mask(t, mask);
  }
  TrainConfig cfg = a.config.empty() ? TrainConfig{}
                                     : train_config_from_json(json::parse(read_file(a.config)));
  if (a.seed) cfg.seed = *a.seed;
  EncodedTable scaled = fit_scaling(t);
  TrainLog log;
  TabInrModel model = train(scaled, cfg, &log);
  save_model(model, a.out);

  std::ostringstream loss;
  loss.precision(17);
  loss << "epoch,train_loss,val_loss\n";
  for (size_t e = 0; e < log.train_loss.size(); ++e)
    loss << e << ',' << log.train_loss[e] << ',' << log.val_loss[e] << '\n';
  write_file(a.out + ".loss.csv", loss.str());
}

struct ImputeArgs {
  std::string data, schema, mask, model, out;
};

void cmd_impute(const ImputeArgs& a) {
  TabInrModel model = load_model(a.model);
  EncodedTable t = load_dataset_for_model(a.data, a.schema, model);

  BoolMask mask;
  if (a.mask.empty()) {
    mask = BoolMask::Constant(t.rows(), t.cols(), false);
  } else {
    std::istringstream in(read_file(a.mask));
    mask = read_mask_csv(in, t, false);
  }
  // Everything the table itself is missing gets imputed too.
  mask = mask || !t.observed;
  EncodedTable scaled = fit_scaling(apply_mask(t, mask && t.observed));
  Matrix completed = impute(model, scaled, mask);
  std::ostringstream csv;
  write_decoded_csv(csv, t, completed);
  write_file(a.out, csv.str());
}

struct TtaArgs {
  std::string data, schema, model, out;
  std::uint64_t seed = 0;
};

void cmd_tta(const TtaArgs& a) {
  TabInrModel model = load_model(a.model);
  EncodedTable rows = load_dataset_for_model(a.data, a.schema, model);

  Matrix completed(rows.rows(), rows.cols());
  for (int i = 0; i < rows.rows(); ++i) {
    PartialRow row;
    row.values = rows.values.row(i).transpose();
    row.observed.resize(rows.cols());
    for (int j = 0; j < rows.cols(); ++j) {
      row.observed[j] = rows.observed(i, j);
      if (!rows.observed(i, j)) row.values(j) = 0.0;
      // Model space is min-max scaled; bring observed numerics into it.
      if (rows.observed(i, j) && model.scaled && model.scale[j]) {
        double range = model.scale[j]->max - model.scale[j]->min;
        row.values(j) = range > 0 ? (row.values(j) - model.scale[j]->min) / range : 0.0;
      }
    }
    TtaConfig cfg;
    cfg.seed = rng::derive(a.seed, "tta.row", static_cast<std::uint64_t>(i));
    TtaResult res = adapt_row(model, row, cfg);
    completed.row(i) = impute_row(model, res.latent, row).transpose();
  }
  std::ostringstream csv;
  write_decoded_csv(csv, rows, completed);
  write_file(a.out, csv.str());
}

struct BenchmarkArgs {
  std::string config, out = ".";
  int workers = 1;
  std::optional<std::uint64_t> seed;
};

void run_benchmark_cells(const json& cfg, const std::vector<json>& tasks,
                         std::vector<json>& records, int workers) {
  const TrainConfig base_cfg = cfg.contains("defaults")
                                   ? train_config_from_json(cfg.at("defaults"))
                                   : TrainConfig{};
  const int knn_k = cfg.value("knn_k", 5);
  records.resize(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const json& task = tasks[i];
      try {
        records[i] = run_cell(task.at("dataset"), task.at("method").get<std::string>(),
                              mechanism_from_string(task.at("mechanism").get<std::string>()),
                              task.at("rate").get<double>(),
                              task.at("seed").get<std::uint64_t>(), base_cfg, knn_k);
      } catch (const std::exception& e) {
        // Crash isolation: the sweep continues, the record carries the error.
        json rec;
        rec["dataset"] = task.at("dataset").value("name", "?");
        rec["method"] = task.at("method");
        rec["mechanism"] = task.at("mechanism");
        rec["rate"] = task.at("rate");
        rec["seed"] = task.at("seed");
        rec["error"] = e.what();
        records[i] = rec;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, workers); ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

// Master seed fans out per task: derive(master, "bench.cell", task_index, run_seed).
std::vector<json> expand_tasks(const json& cfg, std::uint64_t master_seed) {
  std::vector<std::uint64_t> seeds = cfg.value("seeds", std::vector<std::uint64_t>{0, 1, 2});
  std::vector<json> tasks;
  std::uint64_t idx = 0;
  for (const auto& ds : cfg.at("datasets"))
    for (const auto& method : cfg.at("methods"))
      for (const auto& mech : cfg.at("mechanisms"))
        for (const auto& rate : cfg.at("rates"))
          for (std::uint64_t s : seeds) {
            tasks.push_back(json{{"dataset", ds},
                                 {"method", method},
                                 {"mechanism", mech},
                                 {"rate", rate},
                                 {"seed", rng::derive(master_seed, "bench.cell", idx, s)}});
            ++idx;
          }
  return tasks;
}

void cmd_benchmark(const BenchmarkArgs& a) {
  json cfg = json::parse(read_file(a.config));
  std::uint64_t master = a.seed ? *a.seed : cfg.value("master_seed", std::uint64_t{0});
  std::vector<json> tasks = expand_tasks(cfg, master);
  std::vector<json> records;
  run_benchmark_cells(cfg, tasks, records, a.workers);

  std::filesystem::create_directories(a.out);
  std::ostringstream lines;
  std::map<SummaryKey, SummaryAcc> acc;
  for (const auto& rec : records) {
    lines << rec.dump() << '\n';
    append_summary(acc, rec);
  }
  write_file((std::filesystem::path(a.out) / "records.jsonl").string(), lines.str());
  write_file((std::filesystem::path(a.out) / "summary.csv").string(), summary_csv(acc));
}

struct AblateArgs {
  std::string config, out = ".";
  int workers = 1;
  std::optional<std::uint64_t> seed;
};

void cmd_ablate(const AblateArgs& a) {
  json cfg = json::parse(read_file(a.config));
  const json base = cfg.contains("defaults") ? cfg.at("defaults") : json::object();
  const std::string axis = cfg.at("axis").get<std::string>();
  const std::vector<std::string> known{"depth",        "latent",       "width",
                                       "activation",   "dataset_size", "feature_count",
                                       "rate"};
  if (std::find(known.begin(), known.end(), axis) == known.end())
    throw std::invalid_argument("unknown ablation axis: " + axis);
  int axis_count = 0;
  for (const auto& k : known) axis_count += cfg.contains(k + "_values");
  if (axis_count > 1) throw std::invalid_argument("conflicting sweep axes");

  const json& values = cfg.at(axis + "_values");
  std::uint64_t master = a.seed ? *a.seed : cfg.value("master_seed", std::uint64_t{0});
  std::vector<std::uint64_t> seeds = cfg.value("seeds", std::vector<std::uint64_t>{0, 1, 2});
  const std::string mech = cfg.value("mechanism", std::string("mcar"));
  const double rate = cfg.value("rate", 0.1);

  std::vector<json> tasks;
  std::vector<json> point_meta;
  std::uint64_t idx = 0;
  for (const auto& v : values) {
    json defaults = base;
    json dataset = cfg.at("dataset");
    double cell_rate = rate;
    if (axis == "depth") defaults["hidden_layers"] = v;
    else if (axis == "latent") defaults["latent_dim"] = v;
    else if (axis == "width") defaults["hidden_units"] = v;
    else if (axis == "activation") defaults["activation"] = v;
    else if (axis == "dataset_size") dataset["rows"] = v;
    else if (axis == "feature_count") dataset["cols"] = v;
    else cell_rate = v.get<double>();
    for (std::uint64_t s : seeds) {
      tasks.push_back(json{{"dataset", dataset},
                           {"method", "tabinr"},
                           {"mechanism", mech},
                           {"rate", cell_rate},
                           {"seed", rng::derive(master, "ablate.cell", idx, s)},
                           {"defaults", defaults}});
      point_meta.push_back(json{{"axis_value", v}});
    }
    ++idx;
  }

  // Each point may carry its own defaults, so run cells one at a time here.
  std::vector<json> records(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const json& task = tasks[i];
      try {
        records[i] = run_cell(task.at("dataset"), "tabinr",
                              mechanism_from_string(task.at("mechanism").get<std::string>()),
                              task.at("rate").get<double>(),
                              task.at("seed").get<std::uint64_t>(),
                              train_config_from_json(task.at("defaults")),
                              cfg.value("knn_k", 5));
      } catch (const std::exception& e) {
        records[i] = json{{"error", e.what()}};
      }
      records[i]["axis_value"] = point_meta[i].at("axis_value");
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, a.workers); ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // Aggregate per axis value, preserving sweep order.
  std::ostringstream out;
  out.precision(17);
  out << "axis,axis_value,n_runs,nrmse_mean,nrmse_std,auroc_mean,auroc_std,mean_wall_time_s\n";
  for (const auto& v : values) {
    std::vector<double> nr, ar, secs;
    for (const auto& rec : records) {
      if (rec.at("axis_value") != v || rec.contains("error")) continue;
      if (!rec.at("nrmse").is_null()) nr.push_back(rec.at("nrmse").get<double>());
      if (!rec.at("auroc").is_null()) ar.push_back(rec.at("auroc").get<double>());
      secs.push_back(rec.at("wall_time_s").get<double>());
    }
    auto [nm, ns] = mean_std(nr);
    auto [am, as] = mean_std(ar);
    auto [sm, ss] = mean_std(secs);
    auto put = [&](double x) {
      if (std::isnan(x))
        out << "";
      else
        out << x;
    };
    out << axis << ',' << v.dump() << ',' << std::max(nr.size(), ar.size()) << ',';
    put(nm); out << ','; put(ns); out << ','; put(am); out << ','; put(as); out << ',';
    put(sm); out << '\n';
  }
  std::filesystem::create_directories(a.out);
  std::ostringstream lines;
  for (const auto& rec : records) lines << rec.dump() << '\n';
  write_file((std::filesystem::path(a.out) / "ablation_records.jsonl").string(), lines.str());
  write_file((std::filesystem::path(a.out) / "ablation.csv").string(), out.str());
}

struct ReportArgs {
  std::string records, out;
};

// Recomputes the summary from raw records; an independent aggregation pass.
void cmd_report(const ReportArgs& a) {
  std::istringstream in(read_file(a.records));
  std::map<SummaryKey, SummaryAcc> acc;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    append_summary(acc, json::parse(line));
  }
  write_file(a.out, summary_csv(acc));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabinr: tabular imputation via implicit neural representations"};
  app.require_subcommand(1);

  SynthesizeArgs syn;
  auto* syn_cmd = app.add_subcommand("synthesize", "Synthesize a missingness mask");
  syn_cmd->add_option("--data", syn.data, "Input CSV")->required();
  syn_cmd->add_option("--schema", syn.schema, "Schema JSON")->required();
  syn_cmd->add_option("--mechanism", syn.mechanism, "mcar|mar|mnar");
  syn_cmd->add_option("--rate", syn.rate, "Target missingness rate");
  syn_cmd->add_option("--seed", syn.seed, "RNG seed");
  syn_cmd->add_option("--out", syn.out, "Mask CSV output path")->required();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train a model");
  tr_cmd->add_option("--data", tr.data, "Input CSV")->required();
  tr_cmd->add_option("--schema", tr.schema, "Schema JSON")->required();
  tr_cmd->add_option("--mask", tr.mask, "Optional mask CSV applied before training");
  tr_cmd->add_option("--config", tr.config, "Training config JSON overriding built-in defaults");
  tr_cmd->add_option("--seed", tr.seed, "Override config seed");
  tr_cmd->add_option("--out", tr.out, "Checkpoint output path")->required();

  ImputeArgs im;
  auto* im_cmd = app.add_subcommand("impute", "Impute missing cells");
  im_cmd->add_option("--data", im.data, "Input CSV")->required();
  im_cmd->add_option("--schema", im.schema, "Schema JSON")->required();
  im_cmd->add_option("--mask", im.mask, "Mask CSV of cells to impute");
  im_cmd->add_option("--model", im.model, "Checkpoint path")->required();
  im_cmd->add_option("--out", im.out, "Completed CSV output path")->required();

  TtaArgs tt;
  auto* tt_cmd = app.add_subcommand("tta", "Adapt fresh rows and impute them");
  tt_cmd->add_option("--data", tt.data, "Partial-row CSV")->required();
  tt_cmd->add_option("--schema", tt.schema, "Schema JSON")->required();
  tt_cmd->add_option("--model", tt.model, "Checkpoint path")->required();
  tt_cmd->add_option("--seed", tt.seed, "RNG seed");
  tt_cmd->add_option("--out", tt.out, "Completed rows CSV output path")->required();

  BenchmarkArgs be;
  auto* be_cmd = app.add_subcommand("benchmark", "Run a benchmark sweep");
  be_cmd->add_option("--config", be.config, "Benchmark config JSON")->required();
  be_cmd->add_option("--out", be.out, "Output directory");
  be_cmd->add_option("--workers", be.workers, "Worker thread count");
  be_cmd->add_option("--seed", be.seed, "Master seed (overrides config)");

  AblateArgs ab;
  auto* ab_cmd = app.add_subcommand("ablate", "Run an ablation sweep");
  ab_cmd->add_option("--config", ab.config, "Ablation config JSON")->required();
  ab_cmd->add_option("--out", ab.out, "Output directory");
  ab_cmd->add_option("--workers", ab.workers, "Worker thread count");
  ab_cmd->add_option("--seed", ab.seed, "Master seed (overrides config)");

  ReportArgs re;
  auto* re_cmd = app.add_subcommand("report", "Recompute summary from raw records");
  re_cmd->add_option("--records", re.records, "records.jsonl path")->required();
  re_cmd->add_option("--out", re.out, "Summary CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  }

  try {
    if (syn_cmd->parsed()) cmd_synthesize(syn);
    else if (tr_cmd->parsed()) cmd_train(tr);
    else if (im_cmd->parsed()) cmd_impute(im);
    else if (tt_cmd->parsed()) cmd_tta(tt);
    else if (be_cmd->parsed()) cmd_benchmark(be);
    else if (ab_cmd->parsed()) cmd_ablate(ab);
    else if (re_cmd->parsed()) cmd_report(re);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitData;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
