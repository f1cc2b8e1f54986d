// phaselab command line: one subcommand per experiment family. Each run prints
// its record as JSON on stdout and appends it to --out / --csv when given.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "phaselab/experiment.hpp"

namespace {

using phaselab::ErrorKind;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return 2;
    case ErrorKind::kValidation: return 3;
    case ErrorKind::kCapacity: return 4;
    case ErrorKind::kNumerical: return 5;
    case ErrorKind::kInvalidInput:
    case ErrorKind::kDimension: return 6;
  }
  return 1;
}

void add_common(CLI::App* sub, phaselab::ExperimentConfig& c) {
  sub->add_option("--seed", c.seed, "64-bit seed");
  sub->add_option("--out", c.output, "append the record to this JSONL file");
  sub->add_option("--csv", c.csv, "append the record to this CSV file (long format)");
}

void add_dims(CLI::App* sub, phaselab::ExperimentConfig& c, const std::string& which) {
  for (const char f : which) {
    switch (f) {
      case 'n': sub->add_option("-n,--qubits", c.n, "log2 of the function domain size"); break;
      case 'N': sub->add_option("-N,--domain", c.N, "function domain size N"); break;
      case 'M': sub->add_option("-M,--ambient", c.M, "adversary dimension M"); break;
      case 'K': sub->add_option("-K,--family-size", c.K, "number of functions in the family"); break;
      case 'L': sub->add_option("-L,--query-dim", c.L, "query register dimension"); break;
      case 'S': sub->add_option("-S,--scratch-dim", c.S, "workspace dimension"); break;
      case 'r': sub->add_option("--rank", c.rank, "rank of the random measurement projector"); break;
      case 'o': sub->add_option("--outcomes", c.outcomes, "number of measurement outcomes"); break;
      case 'B': sub->add_option("-B,--bound", c.B, "truncation bound"); break;
      default: break;
    }
  }
}

void print(const phaselab::ExperimentRecord& rec) { std::cout << rec.to_json().dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaselab: one-query distinguishers against binary phase state families"};
  app.set_version_flag("--version", std::string(phaselab::kVersion));
  app.require_subcommand(1);

  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (0: PHASELAB_THREADS or all cores)");

  phaselab::ExperimentConfig cfg;
  std::string bench_which = "suite";
  std::string config_path;

  auto* game = app.add_subcommand("game", "max advantage of an adversary plus a simulated game");
  add_common(game, cfg);
  add_dims(game, cfg, "NMKr");
  game->add_option("--trials", cfg.trials, "game rounds");
  game->add_option("--instance", cfg.instance, "adversary instance file")->check(CLI::ExistingFile);
  game->add_option("--family", cfg.family_instance, "function family instance file")->check(CLI::ExistingFile);
  game->add_option("--restarts", cfg.restarts, "local search restarts when M exceeds the brute-force cutoff");

  auto* attack = app.add_subcommand("attack", "Hadamard attack over random families");
  add_common(attack, cfg);
  add_dims(attack, cfg, "nK");
  attack->add_option("--trials", cfg.trials, "random families");
  attack->add_option("--game-trials", cfg.game_trials, "simulated rounds per family (0: exact only)");

  auto* relax = app.add_subcommand("relax", "spectral relaxations vs brute-force advantage");
  add_common(relax, cfg);
  add_dims(relax, cfg, "NMKrB");
  relax->add_option("--trials", cfg.trials, "random families");
  relax->add_option("--samples", cfg.samples, "Monte Carlo samples for the truncated relaxation");
  relax->add_option("--instance", cfg.instance, "adversary instance file")->check(CLI::ExistingFile);

  auto* width = app.add_subcommand("width", "width tail over random families");
  add_common(width, cfg);
  add_dims(width, cfg, "NMK");
  width->add_option("--samples", cfg.samples, "random families");
  width->add_option("--thresholds", cfg.thresholds, "t values for P(width >= 1 + t)");
  width->add_option("--instance", cfg.instance, "adversary instance file (its V is used)")->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "concentration inequality benches");
  add_common(bench, cfg);
  add_dims(bench, cfg, "nNMKrB");
  bench->add_option("--which", bench_which, "suite | rademacher | hoeffding | complex | width | advantage | x-statistic")
      ->check(CLI::IsMember({"suite", "rademacher", "hoeffding", "complex", "width", "advantage", "x-statistic"}));
  bench->add_option("--samples", cfg.samples, "samples per bench");
  bench->add_option("--thresholds", cfg.thresholds, "thresholds (or epsilons for the advantage bench)");
  bench->add_option("--instance", cfg.instance, "adversary instance file")->check(CLI::ExistingFile);

  auto* conj = app.add_subcommand("conjecture", "subset-norm search over random measurements");
  add_common(conj, cfg);
  add_dims(conj, cfg, "NMKo");
  conj->add_option("--trials", cfg.trials, "random instances");
  conj->add_option("--restarts", cfg.restarts, "greedy restarts");

  auto* compress = app.add_subcommand("compress", "check compress(V) against V on random queries");
  add_common(compress, cfg);
  add_dims(compress, cfg, "NLSr");
  compress->add_option("--trials", cfg.trials, "random (f, g, x, y) draws");
  compress->add_option("--instance", cfg.instance, "adversary instance file")->check(CLI::ExistingFile);

  auto* from_config = app.add_subcommand("run", "run an experiment described by a JSON config file");
  from_config->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);

  auto* make = app.add_subcommand("instance", "write a random adversary or family instance file");
  std::string make_kind = "adversary", make_path;
  make->add_option("kind", make_kind, "adversary | family")->check(CLI::IsMember({"adversary", "family"}));
  make->add_option("path", make_path, "output file")->required();
  make->add_option("--seed", cfg.seed, "64-bit seed");
  add_dims(make, cfg, "NMKr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ErrorKind::kParse);
  }

  try {
    if (threads) phaselab::set_thread_count(threads);
    if (*game) cfg.kind = "game";
    if (*attack) cfg.kind = "attack-hadamard";
    if (*relax) cfg.kind = "relaxation";
    if (*width) cfg.kind = "width";
    if (*bench) cfg.kind = "bench-" + bench_which;
    if (*conj) cfg.kind = "conjecture";
    if (*compress) cfg.kind = "compression-verify";
    if (*from_config) {
      std::ifstream in(config_path);
      phaselab::Json j;
      try {
        j = phaselab::Json::parse(in);
      } catch (const phaselab::Json::parse_error& e) {
        throw phaselab::Error(ErrorKind::kParse, "'" + config_path + "' is not valid JSON: " + e.what());
      }
      cfg = phaselab::ExperimentConfig::from_json(j);
    }
    if (*make) {
      cfg.kind = "game";
      cfg.validate();
      phaselab::RngStream rng(cfg.seed);
      const std::size_t n = cfg.N.value_or(8);
      if (make_kind == "family") {
        phaselab::save_instance(make_path, phaselab::FunctionFamily::random(cfg.K.value_or(4), n, rng));
      } else {
        const std::size_t m = cfg.M.value_or(2 * n);
        phaselab::save_instance(make_path, phaselab::AdversarySpec(
                                               phaselab::random_isometry(static_cast<phaselab::Index>(n), static_cast<phaselab::Index>(m), rng),
                                               phaselab::random_projector(static_cast<phaselab::Index>(m),
                                                                          static_cast<phaselab::Index>(cfg.rank.value_or(m / 2)), rng)));
      }
      std::cout << make_path << '\n';
      return 0;
    }
    print(phaselab::run(cfg));
  } catch (const phaselab::Error& e) {
    std::cerr << "phaselab: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "phaselab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
