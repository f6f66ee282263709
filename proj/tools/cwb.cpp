// Causal workbench driver: corpus generation, training, evaluation,
// baselines, closed-form identifiability checks, and figure-table rendering.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cwb/baselines.hpp"
#include "cwb/config.hpp"
#include "cwb/csiva.hpp"
#include "cwb/eval.hpp"
#include "cwb/identifiability.hpp"
#include "cwb/io.hpp"
#include "cwb/presets.hpp"
#include "cwb/scm.hpp"
#include "cwb/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int default_workers() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// A corpus argument names either a manifest (file or directory holding
// manifest.json), a Tübingen-style directory with pairmeta.txt, or a corpus
// configuration JSON that is sampled in memory.
std::vector<cwb::Dataset> load_corpus_any(const std::string& path, int workers,
                                          std::string& corpus_id) {
  if (fs::is_directory(path)) {
    const fs::path manifest = fs::path(path) / "manifest.json";
    if (fs::exists(manifest)) {
      corpus_id = fs::path(path).filename().string();
      return cwb::load_corpus(manifest.string(), workers);
    }
    const fs::path meta = fs::path(path) / "pairmeta.txt";
    if (fs::exists(meta)) {
      corpus_id = "tuebingen:" + fs::path(path).filename().string();
      return cwb::load_tuebingen_directory(path, meta.string());
    }
    throw cwb::IoError(path + ": neither manifest.json nor pairmeta.txt found");
  }
  if (!fs::exists(path)) throw cwb::IoError(path + ": no such file");
  if (fs::path(path).filename() == "manifest.json") {
    corpus_id = fs::path(path).parent_path().filename().string();
    return cwb::load_corpus(path, workers);
  }
  const cwb::CorpusConfig config = cwb::parse_corpus_config_file(path);
  corpus_id = config.name;
  return cwb::generate_corpus_datasets(config, workers);
}

void write_or_print(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text;
  else
    cwb::write_text_file(out, text);
}

struct GenerateArgs {
  std::string config, preset, scale = "desk", out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = default_workers();
};

int run_generate(const GenerateArgs& a) {
  json summary;
  if (!a.preset.empty()) {
    const std::uint64_t seed = a.seed_set ? a.seed : 0;
    const cwb::ExperimentPreset p = cwb::make_preset(a.preset, a.scale, seed);
    fs::create_directories(a.out);
    json corpora = json::array();
    auto emit = [&](const cwb::CorpusConfig& c) {
      const std::string dir = (fs::path(a.out) / c.name).string();
      cwb::generate_corpus(c, dir, a.workers);
      cwb::write_text_file((fs::path(dir) / "corpus_config.json").string(),
                           cwb::to_json(c).dump(2) + "\n");
      corpora.push_back({{"name", c.name}, {"dir", dir}, {"n", c.num_datasets}});
    };
    emit(p.train_corpus);
    for (const cwb::CorpusConfig& t : p.test_corpora) emit(t);
    cwb::write_text_file((fs::path(a.out) / "train_config.json").string(),
                         cwb::to_json(p.train).dump(2) + "\n");
    json test_names = json::array();
    for (const cwb::CorpusConfig& t : p.test_corpora) test_names.push_back(t.name);
    cwb::write_text_file(
        (fs::path(a.out) / "preset.json").string(),
        json{{"preset", p.name},
             {"scale", p.scale},
             {"seed", seed},
             {"train_corpus", p.train_corpus.name},
             {"test_corpora", test_names}}
            .dump(2) +
            "\n");
    summary = {{"preset", p.name}, {"out", a.out}, {"corpora", corpora}};
  } else {
    cwb::CorpusConfig config = cwb::parse_corpus_config_file(a.config);
    if (a.seed_set) config.seed = a.seed;
    const auto entries = cwb::generate_corpus(config, a.out, a.workers);
    summary = {{"corpus", config.name},
               {"out", a.out},
               {"n", entries.size()},
               {"manifest", (fs::path(a.out) / "manifest.json").string()}};
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct TrainArgs {
  std::string config, corpus, out, curve;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = default_workers();
};

int run_train(const TrainArgs& a) {
  cwb::TrainConfig config = cwb::parse_train_config_file(a.config);
  if (a.seed_set) config.seed = a.seed;
  std::string corpus_id;
  const std::vector<cwb::Dataset> corpus =
      load_corpus_any(a.corpus, a.workers, corpus_id);
  const cwb::Checkpoint ckpt = cwb::train_model(config, corpus, a.workers);
  cwb::save_checkpoint(a.out, ckpt);
  const std::string curve_path = a.curve.empty() ? a.out + ".curve.csv" : a.curve;
  cwb::write_curve_csv(curve_path, ckpt);
  json summary = {{"model_id", ckpt.model_id},
                  {"train_corpus", corpus_id},
                  {"epochs", ckpt.curve.size()},
                  {"best_epoch", ckpt.best_epoch},
                  {"best_val_nll", ckpt.curve.at(ckpt.best_epoch - 1).val_nll},
                  {"checkpoint", a.out},
                  {"curve", curve_path}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct EvalArgs {
  std::string model, corpus, report;
  int workers = default_workers();
  bool exact_ci = false;
};

int run_eval(const EvalArgs& a) {
  const cwb::Checkpoint ckpt = cwb::load_checkpoint(a.model);
  std::string corpus_id;
  const std::vector<cwb::Dataset> corpus =
      load_corpus_any(a.corpus, a.workers, corpus_id);
  const cwb::EvalReport report = cwb::evaluate(
      [&](const cwb::Dataset& d) { return cwb::predict(ckpt.params, d); }, corpus,
      ckpt.model_id, corpus_id, a.workers, a.exact_ci);
  write_or_print(a.report, cwb::eval_report_to_json(report));
  std::cerr << report.model_id << " on " << report.corpus_id << ": mean SHD "
            << report.mean_shd << " [" << report.ci_low << ", " << report.ci_high
            << "] over " << report.n_datasets << " datasets\n";
  return 0;
}

struct BaselineArgs {
  std::string method = "linear", corpus, report;
  std::uint64_t seed = 0;
  int workers = default_workers();
  bool exact_ci = false;
};

int run_baseline(const BaselineArgs& a) {
  std::string corpus_id;
  const std::vector<cwb::Dataset> corpus =
      load_corpus_any(a.corpus, a.workers, corpus_id);
  cwb::Predictor predictor;
  if (a.method == "linear") {
    predictor = [](const cwb::Dataset& d) {
      return cwb::prediction_from_decision(cwb::linear_direction(d));
    };
  } else if (a.method == "anm") {
    predictor = [](const cwb::Dataset& d) {
      return cwb::prediction_from_decision(cwb::anm_direction(d));
    };
  } else if (a.method == "random") {
    // One stream per dataset keeps the outcome independent of worker count.
    const std::uint64_t seed = a.seed;
    predictor = [seed](const cwb::Dataset& d) {
      cwb::RngStream rng(cwb::splitmix64(seed ^ d.seed));
      return cwb::prediction_from_label(cwb::random_direction(rng));
    };
  } else {
    throw cwb::ConfigError("baseline method must be linear, anm, or random; got '" +
                           a.method + "'");
  }
  const cwb::EvalReport report =
      cwb::evaluate(predictor, corpus, "baseline-" + a.method, corpus_id, a.workers,
                    a.exact_ci);
  write_or_print(a.report, cwb::eval_report_to_json(report));
  std::cerr << report.model_id << " on " << report.corpus_id << ": mean SHD "
            << report.mean_shd << " [" << report.ci_low << ", " << report.ci_high
            << "] over " << report.n_datasets << " datasets\n";
  return 0;
}

int run_oracle(const std::string& which, const std::string& out) {
  const std::vector<cwb::OracleCheck> checks = cwb::run_oracle_checks(which);
  json arr = json::array();
  bool all_pass = true;
  for (const cwb::OracleCheck& c : checks) {
    arr.push_back({{"check", c.check},
                   {"grid", c.grid},
                   {"max_abs_residual", c.max_abs_residual},
                   {"pass", c.pass}});
    all_pass = all_pass && c.pass;
  }
  write_or_print(out, arr.dump(2) + "\n");
  if (!all_pass)
    throw cwb::ContractError("oracle: at least one residual check failed");
  return 0;
}

// Pivots eval reports into a models x corpora grid, one mean/ci triple per
// corpus, mirroring the grouped-bar figure layout.
int run_report(const std::vector<std::string>& files, const std::string& out) {
  cwb::require(!files.empty(), "report: no report files given");
  std::map<std::string, std::map<std::string, cwb::EvalReport>> grid;
  std::set<std::string> corpora;
  for (const std::string& f : files) {
    const cwb::EvalReport r = cwb::eval_report_from_json(cwb::read_text_file(f));
    grid[r.model_id][r.corpus_id] = r;
    corpora.insert(r.corpus_id);
  }
  std::string csv = "model_id";
  for (const std::string& c : corpora)
    csv += "," + c + ":mean_shd," + c + ":ci_low," + c + ":ci_high";
  csv += "\n";
  for (const auto& [model, row] : grid) {
    csv += model;
    for (const std::string& c : corpora) {
      auto it = row.find(c);
      if (it == row.end()) {
        csv += ",,,";
      } else {
        csv += "," + cwb::format_double(it->second.mean_shd) + "," +
               cwb::format_double(it->second.ci_low) + "," +
               cwb::format_double(it->second.ci_high);
      }
    }
    csv += "\n";
  }
  write_or_print(out, csv);
  return 0;
}

const char* kind_name(cwb::ErrorKind kind) {
  switch (kind) {
    case cwb::ErrorKind::Config: return "config";
    case cwb::ErrorKind::Io: return "io";
    case cwb::ErrorKind::Numeric: return "numeric";
    case cwb::ErrorKind::Contract: return "contract";
  }
  return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bivariate causal discovery workbench"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a synthetic corpus to disk");
  generate->add_option("--config", gen.config, "Corpus configuration JSON");
  generate->add_option("--preset", gen.preset, "Experiment preset name");
  generate->add_option("--scale", gen.scale, "Preset scale: desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  generate->add_option("--out", gen.out, "Output directory")->required();
  auto* gen_seed = generate->add_option("--seed", gen.seed, "Master seed override");
  generate->add_option("--workers", gen.workers, "Worker threads");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a model on a corpus");
  train->add_option("--config", tr.config, "Training configuration JSON")->required();
  train->add_option("--corpus", tr.corpus, "Manifest, corpus dir, or corpus config")
      ->required();
  train->add_option("--out", tr.out, "Checkpoint output path")->required();
  train->add_option("--curve", tr.curve, "Curve CSV path (default: <out>.curve.csv)");
  auto* tr_seed = train->add_option("--seed", tr.seed, "Training seed override");
  train->add_option("--workers", tr.workers, "Worker threads");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a corpus");
  eval->add_option("--model", ev.model, "Checkpoint path")->required();
  eval->add_option("--corpus", ev.corpus, "Manifest, corpus dir, or corpus config")
      ->required();
  eval->add_option("--report", ev.report, "Report JSON path (stdout when absent)");
  eval->add_option("--workers", ev.workers, "Worker threads");
  eval->add_flag("--exact-ci", ev.exact_ci, "Clopper-Pearson interval");

  BaselineArgs bl;
  auto* baseline = app.add_subcommand("baseline", "Score a classical baseline");
  baseline->add_option("--method", bl.method, "linear, anm, or random");
  baseline->add_option("--corpus", bl.corpus, "Manifest, corpus dir, or corpus config")
      ->required();
  baseline->add_option("--report", bl.report, "Report JSON path (stdout when absent)");
  baseline->add_option("--seed", bl.seed, "Seed for the random baseline");
  baseline->add_option("--workers", bl.workers, "Worker threads");
  baseline->add_flag("--exact-ci", bl.exact_ci, "Clopper-Pearson interval");

  std::string oracle_which = "all";
  std::string oracle_out;
  auto* oracle =
      app.add_subcommand("oracle", "Closed-form identifiability residual checks");
  oracle->add_option("check", oracle_which,
                     "Check name, 'example2' alias, or 'all'");
  oracle->add_option("--out", oracle_out, "Output JSON path (stdout when absent)");

  std::vector<std::string> report_files;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Pivot eval reports into a grid CSV");
  report->add_option("files", report_files, "Eval report JSON files")->required();
  report->add_option("--out", report_out, "CSV output path (stdout when absent)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      gen.seed_set = gen_seed->count() > 0;
      cwb::require(gen.config.empty() != gen.preset.empty(),
                   "generate: exactly one of --config or --preset is required");
      return run_generate(gen);
    }
    if (*train) {
      tr.seed_set = tr_seed->count() > 0;
      return run_train(tr);
    }
    if (*eval) return run_eval(ev);
    if (*baseline) return run_baseline(bl);
    if (*oracle) return run_oracle(oracle_which, oracle_out);
    if (*report) return run_report(report_files, report_out);
  } catch (const cwb::Error& e) {
    std::cerr << json{{"error",
                       {{"kind", kind_name(e.kind())},
                        {"code", e.exit_code()},
                        {"message", e.what()}}}}
                     .dump()
              << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << json{{"error",
                       {{"kind", "internal"}, {"code", 1}, {"message", e.what()}}}}
                     .dump()
              << "\n";
    return 1;
  }
  return 0;
}
