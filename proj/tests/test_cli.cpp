// End-to-end exercises of the cwb command-line driver: exit codes, the
// machine-readable error envelope on stderr, and the generate -> train ->
// eval -> baseline -> report round trip on a miniature corpus.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>
#include <unistd.h>

#include "cwb/config.hpp"
#include "cwb/eval.hpp"
#include "cwb/io.hpp"
#include "cwb/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cwb;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("cwb_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string dir() const { return path_.string(); }

 private:
  static int counter_;
  fs::path path_;
};
int TempDir::counter_ = 0;

RunResult run_cli(const std::string& args) {
  TempDir io;
  const std::string out_path = io.file("stdout.txt");
  const std::string err_path = io.file("stderr.txt");
  const std::string cmd =
      std::string(CWB_BIN) + " " + args + " > " + out_path + " 2> " + err_path;
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out_path);
  r.err = read_text_file(err_path);
  return r;
}

json error_envelope(const RunResult& r) {
  // The driver emits a single-line JSON object on stderr for every failure.
  return json::parse(r.err).at("error");
}

}  // namespace

TEST_CASE("oracle subcommand reports residuals and validates its argument") {
  TempDir tmp;
  RunResult ok = run_cli("oracle example2 --out " + tmp.file("oracle.json"));
  CHECK(ok.exit_code == 0);
  json checks = json::parse(read_text_file(tmp.file("oracle.json")));
  REQUIRE(checks.is_array());
  REQUIRE(checks.size() == 1);
  CHECK(checks[0].at("pass").get<bool>());
  CHECK(checks[0].at("max_abs_residual").get<double>() < 1e-9);

  RunResult all = run_cli("oracle all --out " + tmp.file("all.json"));
  CHECK(all.exit_code == 0);
  CHECK(json::parse(read_text_file(tmp.file("all.json"))).size() >= 6);

  RunResult bad = run_cli("oracle no-such-check");
  CHECK(bad.exit_code == 2);
  json env = error_envelope(bad);
  CHECK(env.at("kind") == "config");
  CHECK(env.at("code") == 2);
}

TEST_CASE("generate, train, eval, baseline, and report round-trip") {
  TempDir tmp;

  CorpusConfig corpus;
  corpus.name = "cli-mini";
  corpus.num_datasets = 8;
  corpus.samples_per_dataset = 60;
  corpus.seed = 77;
  CorpusClassConfig cls;
  cls.mechanism = "linear";
  cls.noise = "uniform";
  cls.ratio = 1.0;
  corpus.classes = {cls};
  write_text_file(tmp.file("corpus.json"), to_json(corpus).dump(2));

  const std::string corpus_dir = tmp.file("corpus");
  RunResult gen = run_cli("generate --config " + tmp.file("corpus.json") + " --out " +
                          corpus_dir + " --workers 2");
  CHECK(gen.exit_code == 0);
  CHECK(fs::exists(corpus_dir + "/manifest.json"));
  CHECK(json::parse(gen.out).at("n") == 8);
  CHECK(read_manifest(corpus_dir + "/manifest.json").size() == 8);

  TrainConfig train;
  train.name = "cli-tiny";
  train.learning_rate = 3e-3;
  train.max_epochs = 2;
  train.seed = 5;
  train.model.embed_dim = 8;
  train.model.hidden_dim = 8;
  train.model.enc_layers = 1;
  train.model.dec_layers = 1;
  train.model.heads = 2;
  train.model.value_mlp_hidden = 4;
  write_text_file(tmp.file("train.json"), to_json(train).dump(2));

  const std::string ckpt = tmp.file("model.bin");
  RunResult tr = run_cli("train --config " + tmp.file("train.json") + " --corpus " +
                         corpus_dir + " --out " + ckpt + " --workers 2");
  CHECK(tr.exit_code == 0);
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(ckpt + ".curve.csv"));
  json tr_summary = json::parse(tr.out);
  CHECK(tr_summary.at("model_id") == "cli-tiny:seed5");
  CHECK(tr_summary.at("epochs") == 2);

  RunResult ev = run_cli("eval --model " + ckpt + " --corpus " + corpus_dir +
                         " --report " + tmp.file("eval.json"));
  CHECK(ev.exit_code == 0);
  EvalReport model_report =
      eval_report_from_json(read_text_file(tmp.file("eval.json")));
  CHECK(model_report.n_datasets == 8);
  CHECK(model_report.model_id == "cli-tiny:seed5");

  RunResult bl = run_cli("baseline --method linear --corpus " + corpus_dir +
                         " --report " + tmp.file("baseline.json") + " --exact-ci");
  CHECK(bl.exit_code == 0);
  EvalReport bl_report =
      eval_report_from_json(read_text_file(tmp.file("baseline.json")));
  CHECK(bl_report.model_id == "baseline-linear");
  CHECK(bl_report.n_datasets == 8);

  RunResult rep = run_cli("report " + tmp.file("eval.json") + " " +
                          tmp.file("baseline.json") + " --out " + tmp.file("grid.csv"));
  CHECK(rep.exit_code == 0);
  const std::string grid = read_text_file(tmp.file("grid.csv"));
  CHECK(grid.rfind("model_id,", 0) == 0);
  CHECK(grid.find("cli-tiny:seed5") != std::string::npos);
  CHECK(grid.find("baseline-linear") != std::string::npos);
}

TEST_CASE("failures exit with the kind-specific code and a JSON envelope") {
  TempDir tmp;

  // I/O: missing checkpoint.
  write_text_file(tmp.file("c.json"), R"({"name":"x","num_datasets":2,)"
                                      R"("samples_per_dataset":60,)"
                                      R"("classes":[{"mechanism":"linear"}]})");
  RunResult io = run_cli("eval --model " + tmp.file("absent.bin") + " --corpus " +
                         tmp.file("c.json"));
  CHECK(io.exit_code == 3);
  CHECK(error_envelope(io).at("kind") == "io");

  // Config: malformed corpus configuration (unknown key).
  write_text_file(tmp.file("bad.json"), R"({"frobnicate": 1})");
  RunResult cfg = run_cli("baseline --corpus " + tmp.file("bad.json"));
  CHECK(cfg.exit_code == 2);
  json cfg_env = error_envelope(cfg);
  CHECK(cfg_env.at("kind") == "config");
  CHECK(cfg_env.at("message").get<std::string>().find("frobnicate") !=
        std::string::npos);

  // Config: unknown baseline method.
  RunResult method = run_cli("baseline --method bogus --corpus " + tmp.file("c.json"));
  CHECK(method.exit_code == 2);

  // Contract: generate needs exactly one input source.
  RunResult contract = run_cli("generate --out " + tmp.file("nowhere"));
  CHECK(contract.exit_code == 5);
  CHECK(error_envelope(contract).at("kind") == "contract");
}
