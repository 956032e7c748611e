#include "aaerec/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "aaerec/config.hpp"
#include "aaerec/evalharness.hpp"
#include "aaerec/neural.hpp"

namespace aaerec {

namespace {

struct Parser {
  CLI::App app{"Adversarial autoencoder recommenders and baselines", "aaerec"};
  CLI::App* run = nullptr;
  CLI::App* synth = nullptr;
  CLI::App* gradcheck = nullptr;
  CLI::App* version = nullptr;

  std::string config;
  std::string mode = "relatedness";
  SyntheticParams params;
  std::string out_dir;
  std::uint64_t gradcheck_seed = 0;

  Parser() {
    app.require_subcommand(1, 1);
    run = app.add_subcommand("run", "Run an experiment described by a config file");
    run->add_option("--config", config, "key = value experiment file")->required();

    synth = app.add_subcommand("synth", "Write a synthetic ratings/meta pair");
    synth->add_option("--mode", mode, "relatedness or diversity")
        ->check(CLI::IsMember({"relatedness", "diversity"}));
    synth->add_option("--clusters", params.n_clusters)->check(CLI::PositiveNumber);
    synth->add_option("--docs-per-cluster", params.docs_per_cluster)->check(CLI::PositiveNumber);
    synth->add_option("--items-per-cluster", params.items_per_cluster)->check(CLI::PositiveNumber);
    synth->add_option("--items-per-doc", params.items_per_doc)->check(CLI::PositiveNumber);
    synth->add_option("--seed", params.seed);
    synth->add_option("--out", out_dir, "output directory")->required();

    gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the neural gradients");
    gradcheck->add_option("--seed", gradcheck_seed);

    version = app.add_subcommand("version", "Print the version");
  }
};

}  // namespace

CliCommand parse_args(const std::vector<std::string>& args) {
  Parser p;
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    p.app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return HelpCommand{p.app.help()};
  } catch (const CLI::CallForAllHelp&) {
    return HelpCommand{p.app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what(), p.app.help());
  }
  if (p.run->parsed()) return RunCommand{p.config};
  if (p.synth->parsed()) {
    SynthCommand cmd{p.params, p.out_dir};
    cmd.params.mode = parse_synthetic_mode(p.mode);
    return cmd;
  }
  if (p.gradcheck->parsed()) return GradcheckCommand{p.gradcheck_seed};
  return VersionCommand{};
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush()) {
      std::filesystem::remove(tmp);
      throw Error("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move results into '" + path.string() + "': " + ec.message());
  }
}

namespace {

int execute(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = load_config(cmd.config);
  ExperimentHooks hooks;
  hooks.log = [&](const std::string& line) { err << line << '\n'; };
  const auto results = run_experiment(cfg, hooks);
  if (!cfg.out.parent_path().empty()) std::filesystem::create_directories(cfg.out.parent_path());
  write_file_atomically(cfg.out, results_csv(results));
  out << "wrote " << results.size() << " results to " << cfg.out.string() << '\n';
  return 0;
}

int execute(const SynthCommand& cmd, std::ostream& out, std::ostream&) {
  const auto [ratings, meta] = write_synthetic(generate_synthetic(cmd.params), cmd.out_dir);
  out << "wrote " << ratings.string() << " and " << meta.string() << '\n';
  return 0;
}

int execute(const GradcheckCommand& cmd, std::ostream& out, std::ostream&) {
  constexpr double kTolerance = 1e-4;
  const auto report = gradient_check(cmd.seed);
  char buf[160];
  std::snprintf(buf, sizeof buf, "max relative error %.3e over %zu configs (%zu values)\n",
                report.max_relative_error, report.n_configs, report.n_checked);
  out << buf;
  return report.max_relative_error < kTolerance ? 0 : 1;
}

int execute(const VersionCommand&, std::ostream& out, std::ostream&) {
  out << "aaerec " << kVersion << '\n';
  return 0;
}

int execute(const HelpCommand& cmd, std::ostream& out, std::ostream&) {
  out << cmd.text;
  return 0;
}

}  // namespace

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliCommand cmd;
  try {
    cmd = parse_args(args);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << e.usage();
    return 2;
  }
  try {
    return std::visit([&](const auto& c) { return execute(c, out, err); }, cmd);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace aaerec
