#include <doctest.h>

#include <sstream>

#include "aaerec/cli.hpp"
#include "aaerec/config.hpp"
#include "aaerec/error.hpp"
#include "support.hpp"

using namespace aaerec;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_main(args, out, err);
  return {code, out.str(), err.str()};
}

ExperimentConfig parse(const std::string& text) { return parse_config(text, "exp.cfg", "/base"); }

const char* kMinimal = "ratings = r.tsv\nmeta = m.tsv\nsplit_year = 2011\nout = res.csv\n";

}  // namespace

TEST_CASE("config defaults") {
  auto cfg = parse(kMinimal);
  CHECK(cfg.ratings == std::filesystem::path("/base/r.tsv"));
  CHECK(cfg.split_year == 2011);
  CHECK(cfg.runs == 3);
  CHECK(cfg.epochs == 20);
  CHECK(cfg.modalities == std::vector<Modality>{Modality::Both});
  CHECK(cfg.alphas == std::vector<int>{1});
  CHECK(cfg.models == all_model_kinds());
  CHECK(cfg.embeddings == "builtin:hash:50:1");
}

TEST_CASE("config values") {
  auto cfg = parse(std::string(kMinimal) +
                   "# sweep\n\nalphas = 15,20, 25\nmodels = cooc,aae\nmodality = items,both\nruns = 5\n"
                   "seed = 9\nepochs = 7\nembeddings = vectors.txt\nsvd_rank = 30\nbatch_size = 64\n");
  CHECK(cfg.alphas == std::vector<int>{15, 20, 25});
  CHECK(cfg.models == std::vector<ModelKind>{ModelKind::Cooc, ModelKind::Aae});
  CHECK(cfg.modalities.size() == 2);
  CHECK(cfg.runs == 5);
  CHECK(cfg.seed == 9);
  CHECK(cfg.epochs == 7);
  CHECK(cfg.embeddings == "/base/vectors.txt");
  CHECK(cfg.svd_rank == 30);
  CHECK(cfg.batch_size == 64);
  CHECK(parse(std::string(kMinimal) + "embeddings = builtin:hash:8:2\n").embeddings == "builtin:hash:8:2");
  CHECK(parse("ratings = /abs/r.tsv\nmeta = m\nsplit_year = 2011\nout = o\n").ratings == "/abs/r.tsv");
}

TEST_CASE("config errors name key and line") {
  auto message = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  auto m = message(std::string(kMinimal) + "models = gcn\n");
  CHECK(m.find("exp.cfg:5") != std::string::npos);
  CHECK(m.find("models") != std::string::npos);
  CHECK(m.find("cooc, svd, mlp, ae, aae") != std::string::npos);
  m = message(std::string(kMinimal) + "colour = blue\n");
  CHECK(m.find("colour") != std::string::npos);
  CHECK(m.find(":5") != std::string::npos);
  CHECK(message(std::string(kMinimal) + "runs = three\n").find("runs") != std::string::npos);
  CHECK(message(std::string(kMinimal) + "runs = 0\n").find("runs") != std::string::npos);
  CHECK(message(std::string(kMinimal) + "alphas = 0\n").find("alphas") != std::string::npos);
  CHECK(message(std::string(kMinimal) + "seed = 1\nseed = 2\n").find("seed") != std::string::npos);
  CHECK(message("ratings = r\nmeta = m\nout = o\n").find("split_year") != std::string::npos);
  CHECK(message(std::string(kMinimal) + "no equals sign\n").find(":5") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/exp.cfg"), Error);
}

TEST_CASE("parse_args") {
  CHECK(std::get<RunCommand>(parse_args({"run", "--config", "exp.cfg"})).config == "exp.cfg");
  auto synth = std::get<SynthCommand>(parse_args({"synth", "--mode", "diversity", "--clusters", "5",
                                                  "--docs-per-cluster", "40", "--items-per-cluster", "10",
                                                  "--items-per-doc", "4", "--seed", "7", "--out", "data/"}));
  CHECK(synth.params.mode == SyntheticMode::Diversity);
  CHECK(synth.params.items_per_doc == 4);
  CHECK(synth.params.seed == 7);
  CHECK(synth.out_dir == "data/");
  CHECK(std::get<GradcheckCommand>(parse_args({"gradcheck", "--seed", "3"})).seed == 3);
  CHECK(std::holds_alternative<VersionCommand>(parse_args({"version"})));
  CHECK(std::holds_alternative<HelpCommand>(parse_args({"--help"})));
  CHECK_THROWS_AS(parse_args({"--bogus"}), UsageError);
  CHECK_THROWS_AS(parse_args({"run"}), UsageError);
  CHECK_THROWS_AS(parse_args({"run", "--config", "a", "--bogus"}), UsageError);
  CHECK_THROWS_AS(parse_args({"synth", "--mode", "sideways", "--out", "x"}), UsageError);
  CHECK_THROWS_AS(parse_args({"fly"}), UsageError);
}

TEST_CASE("main exit codes") {
  auto bogus = run({"--bogus"});
  CHECK(bogus.code == 2);
  CHECK(bogus.err.find("Usage") != std::string::npos);

  auto grad = run({"gradcheck", "--seed", "1"});
  CHECK(grad.code == 0);
  CHECK(grad.out.find("max relative error") != std::string::npos);

  CHECK(run({"version"}).out.find(kVersion) != std::string::npos);

  testing::TempDir dir("cli");
  testing::write_text(dir / "exp.cfg", "ratings = nope.tsv\nmeta = m.tsv\nsplit_year = 2011\nout = res.csv\n");
  auto missing = run({"run", "--config", (dir / "exp.cfg").string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nope.tsv") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "res.csv"));
}

TEST_CASE("synth then run") {
  testing::TempDir dir("cli-e2e");
  auto synth = run({"synth", "--mode", "relatedness", "--seed", "2", "--out", (dir / "data").string()});
  REQUIRE(synth.code == 0);
  testing::write_text(dir / "exp.cfg",
                      "ratings = data/ratings.tsv\nmeta = data/meta.tsv\nsplit_year = 2011\nout = out/res.csv\n"
                      "models = cooc,svd\nruns = 2\n");
  auto r = run({"run", "--config", (dir / "exp.cfg").string()});
  CHECK(r.code == 0);
  const auto csv = testing::read_text(dir / "out/res.csv");
  CHECK(csv.rfind("model,modality,alpha,run,seed,mrr,wall_time_s\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK_FALSE(std::filesystem::exists(dir / "out/res.csv.tmp"));
}

TEST_CASE("atomic writes replace whole files") {
  testing::TempDir dir("atomic");
  write_file_atomically(dir / "f.txt", "first");
  write_file_atomically(dir / "f.txt", "second");
  CHECK(testing::read_text(dir / "f.txt") == "second");
  CHECK_THROWS_AS(write_file_atomically(dir / "no/such/dir/f.txt", "x"), Error);
}
