#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "phaselab/attacks.hpp"
#include "phaselab/bench.hpp"
#include "phaselab/compression.hpp"
#include "phaselab/decomposition.hpp"
#include "phaselab/game.hpp"
#include "phaselab/io.hpp"
#include "phaselab/relaxations.hpp"

#ifndef PHASELAB_VERSION
#define PHASELAB_VERSION "0.0.0"
#endif

namespace phaselab {

inline constexpr const char* kVersion = PHASELAB_VERSION;

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{
      "game",          "attack-hadamard", "relaxation",     "width",         "bench-suite",      "bench-rademacher",
      "bench-hoeffding", "bench-complex", "bench-width",    "bench-advantage", "bench-x-statistic", "conjecture",
      "compression-verify"};
  return kinds;
}

// Unset dimensions fall back to per-kind defaults (see README).
struct ExperimentConfig {
  std::string kind;
  std::optional<int> n;            // log2 N for Hadamard-based kinds
  std::optional<std::size_t> N, M, K, L, S, rank, outcomes;
  std::optional<double> B;         // truncation bound
  std::size_t trials = 0;          // 0 = kind default
  std::size_t samples = 0;
  std::uint64_t game_trials = 0;
  std::size_t restarts = 16;
  std::uint64_t seed = 0;
  std::vector<double> thresholds;  // tail thresholds or epsilons
  std::string output;              // JSONL, appended
  std::string csv;                 // optional CSV export, appended
  std::optional<std::string> instance;
  std::optional<std::string> family_instance;

  Json to_json() const {
    Json j{{"kind", kind}, {"seed", seed}, {"restarts", restarts}};
    auto put = [&](const char* name, const auto& opt) {
      if (opt) j[name] = *opt;
    };
    put("n", n);
    put("N", N);
    put("M", M);
    put("K", K);
    put("L", L);
    put("S", S);
    put("rank", rank);
    put("outcomes", outcomes);
    put("B", B);
    put("instance", instance);
    put("family_instance", family_instance);
    if (trials) j["trials"] = trials;
    if (samples) j["samples"] = samples;
    if (game_trials) j["game_trials"] = game_trials;
    if (!thresholds.empty()) j["thresholds"] = thresholds;
    return j;
  }

  static ExperimentConfig from_json(const Json& j) {
    ExperimentConfig c;
    const Json& kind = detail::field(j, "kind", "config");
    detail::require(kind.is_string(), ErrorKind::kParse, "field 'config.kind' must be a string");
    c.kind = kind.get<std::string>();
    auto get = [&](const char* name, auto& target) {
      if (!j.contains(name)) return;
      try {
        target = j.at(name).get<std::decay_t<decltype(target)>>();
      } catch (const Json::exception&) {
        throw Error(ErrorKind::kParse, std::string("field 'config.") + name + "' has the wrong type");
      }
    };
    auto get_opt = [&](const char* name, auto& target) {
      if (!j.contains(name)) return;
      typename std::decay_t<decltype(target)>::value_type v{};
      get(name, v);
      target = v;
    };
    get_opt("n", c.n);
    get_opt("N", c.N);
    get_opt("M", c.M);
    get_opt("K", c.K);
    get_opt("L", c.L);
    get_opt("S", c.S);
    get_opt("rank", c.rank);
    get_opt("outcomes", c.outcomes);
    get_opt("B", c.B);
    get_opt("instance", c.instance);
    get_opt("family_instance", c.family_instance);
    get("trials", c.trials);
    get("samples", c.samples);
    get("game_trials", c.game_trials);
    get("restarts", c.restarts);
    get("seed", c.seed);
    get("thresholds", c.thresholds);
    get("output", c.output);
    get("csv", c.csv);
    return c;
  }

  void validate() const {
    bool known = false;
    for (const auto& k : experiment_kinds()) known = known || k == kind;
    std::string list;
    for (const auto& k : experiment_kinds()) list += (list.empty() ? "" : ", ") + k;
    detail::require(known, ErrorKind::kInvalidInput, "unknown experiment kind '" + kind + "' (expected one of " + list + ")");
    for (const auto* opt : {&N, &M, &K, &L, &S, &outcomes})
      detail::require(!opt->has_value() || **opt >= 1, ErrorKind::kInvalidInput, "dimensions and counts must be >= 1");
    detail::require(!n || *n >= 1, ErrorKind::kInvalidInput, "n must be >= 1");
    detail::require(!(N && M) || *M >= *N, ErrorKind::kInvalidInput,
                    "need M >= N (got M = " + std::to_string(M.value_or(0)) + ", N = " + std::to_string(N.value_or(0)) + ")");
    detail::require(!B || *B > 0, ErrorKind::kInvalidInput, "truncation bound B must be positive");
    detail::require(restarts >= 1, ErrorKind::kInvalidInput, "restarts must be >= 1");
  }
};

namespace detail {

inline AdversarySpec experiment_adversary(const ExperimentConfig& c, RngStream& rng, std::size_t n_default,
                                          std::size_t m_default) {
  if (c.instance) return load_instance_as<AdversarySpec>(*c.instance);
  const std::size_t n = c.N.value_or(n_default);
  const std::size_t m = c.M.value_or(std::max(m_default, n));
  require(m >= n, ErrorKind::kInvalidInput, "need M >= N");
  const std::size_t rank = c.rank.value_or(m / 2);
  require(rank <= m, ErrorKind::kInvalidInput, "projector rank exceeds M");
  ComplexMatrix v = random_isometry(static_cast<Index>(n), static_cast<Index>(m), rng);
  ComplexMatrix pi = random_projector(static_cast<Index>(m), static_cast<Index>(rank), rng);
  return AdversarySpec(std::move(v), std::move(pi));
}

inline void record_report(ExperimentRecord& rec, const TailReport& rep, const std::string& prefix) {
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i) {
    const std::string p = prefix + "t" + std::to_string(i) + ".";
    rec.set(p + "threshold", rep.thresholds[i]);
    rec.set(p + "frequency", rep.frequencies[i]);
    rec.set(p + "bound", rep.bound_values[i]);
  }
  for (const auto& m : rep.mean_checks) {
    rec.set(prefix + m.label + ".empirical", m.empirical);
    rec.set(prefix + m.label + ".standard_error", m.standard_error);
    rec.set(prefix + m.label + ".reference", m.reference);
  }
  for (const auto& [k, v] : rep.extras) rec.set(prefix + k, v);
  rec.set(prefix + "samples", static_cast<double>(rep.samples));
  rec.set(prefix + "pass", rep.passes() ? 1.0 : 0.0);
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double max_of(const std::vector<double>& v) {
  double s = -std::numeric_limits<double>::infinity();
  for (const double x : v) s = std::max(s, x);
  return s;
}

inline AdvantageResult best_advantage(const AdversarySpec& adv, const FunctionFamily& r, std::size_t restarts,
                                      const RngStream& rng, bool& exact) {
  exact = adv.M() <= kDefaultBruteForceCutoff;
  return exact ? max_advantage_bruteforce(adv, r) : max_advantage_localsearch(adv, r, restarts, rng);
}

inline void run_game(const ExperimentConfig& c, const RngStream& root, ExperimentRecord& rec) {
  RngStream setup = root.derive(1);
  const AdversarySpec adv = experiment_adversary(c, setup, 8, 16);
  RngStream fam = root.derive(2);
  const FunctionFamily r = c.family_instance ? load_instance_as<FunctionFamily>(*c.family_instance)
                                             : FunctionFamily::random(c.K.value_or(4), static_cast<std::size_t>(adv.N()), fam);
  bool exact = false;
  const AdvantageResult best = best_advantage(adv, r, c.restarts, root.derive(3), exact);
  const GameTally tally = simulate_game_tally(adv, r, best.f, c.trials ? c.trials : 10000, root.derive(4));
  rec.set("N", static_cast<double>(adv.N()));
  rec.set("M", static_cast<double>(adv.M()));
  rec.set("K", static_cast<double>(r.K()));
  rec.set("max_advantage", best.value);
  rec.set("max_advantage_exact", exact ? 1.0 : 0.0);
  rec.set("game_trials", static_cast<double>(tally.trials));
  rec.set("game_wins", static_cast<double>(tally.wins));
  rec.set("win_rate", tally.win_rate());
  rec.set("expected_win_rate", 0.5 + best.value / 2.0);
}

inline void run_attack_hadamard(const ExperimentConfig& c, const RngStream& root, ExperimentRecord& rec) {
  const auto rep = run_hadamard_attack(c.n.value_or(8), c.K.value_or(16), c.trials ? c.trials : 200, c.game_trials,
                                       root.derive(1));
  rec.set("exact_advantage_mean", rep.exact_advantage);
  rec.set("exact_advantage_std", rep.exact_advantage_std);
  rec.set("half_mean_abs_x_deviation", rep.half_mean_abs_x_deviation);
  rec.set("x_statistic_mean", rep.x_statistic_mean);
  rec.set("x_statistic_variance", rep.x_statistic_variance);
  if (c.game_trials) rec.set("monte_carlo_advantage", rep.monte_carlo_advantage);
}

inline void run_relaxation(const ExperimentConfig& c, const RngStream& root, ExperimentRecord& rec) {
  RngStream setup = root.derive(1);
  const AdversarySpec adv = experiment_adversary(c, setup, 4, 8);
  const std::size_t k = c.K.value_or(4), trials = c.trials ? c.trials : 20;
  const std::size_t n = static_cast<std::size_t>(adv.N());
  const bool brute = adv.M() <= kDefaultBruteForceCutoff;
  std::vector<double> best(trials, 0.0), spectral(trials), decoupled(trials), truncated(trials, 0.0), trunc_se(trials, 0.0);
  const RngStream fams = root.derive(2);
  for (std::size_t t = 0; t < trials; ++t) {
    RngStream s = fams.derive(t);
    const auto r = FunctionFamily::random(k, n, s);
    const auto rp = FunctionFamily::random(k, n, s);
    if (brute) best[t] = max_advantage_bruteforce(adv, r).value;
    spectral[t] = spectral_relaxation(adv, r);
    decoupled[t] = decoupled_spectral_relaxation(adv, r, rp);
    if (c.B) {
      const auto tv = truncated_spectral_relaxation(adv, r, TruncationConfig(*c.B), s.derive(1),
                                                    c.samples ? c.samples : kTruncationSamples);
      truncated[t] = tv.value;
      trunc_se[t] = tv.standard_error;
    }
  }
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) violations += best[t] > spectral[t] + kDerivedTol;
  if (brute) {
    rec.set("max_advantage_mean", mean_of(best));
    rec.set("sandwich_violations", static_cast<double>(violations));
  }
  rec.set("spectral_mean", mean_of(spectral));
  rec.set("spectral_max", max_of(spectral));
  rec.set("decoupled_spectral_mean", mean_of(decoupled));
  if (c.B) {
    rec.set("truncated_spectral_mean", mean_of(truncated));
    rec.set("truncated_standard_error_max", max_of(trunc_se));
  }
}

inline std::vector<double> thresholds_or(const ExperimentConfig& c, std::vector<double> fallback) {
  return c.thresholds.empty() ? fallback : c.thresholds;
}

inline ComplexMatrix experiment_isometry(const ExperimentConfig& c, RngStream& rng) {
  if (c.instance) return load_instance_as<AdversarySpec>(*c.instance).V();
  const std::size_t n = c.N.value_or(32), m = c.M.value_or(std::max<std::size_t>(128, n));
  return random_isometry(static_cast<Index>(n), static_cast<Index>(m), rng);
}

inline void run_width(const ExperimentConfig& c, const RngStream& root, ExperimentRecord& rec) {
  RngStream setup = root.derive(1);
  const ComplexMatrix v = experiment_isometry(c, setup);
  const auto rep = width_tail_bench(v, c.K.value_or(64), c.samples ? c.samples : 200, thresholds_or(c, {0.5, 1.0, 2.0}),
                                    root.derive(2));
  record_report(rec, rep, "");
}

inline void run_bench(const ExperimentConfig& c, const RngStream& root, ExperimentRecord& rec) {
  const std::size_t samples = c.samples ? c.samples : 500;
  RngStream setup = root.derive(1);
  const RngStream stream = root.derive(2);
  if (c.kind == "bench-suite") {
    const auto reports = default_bench_suite(c.seed, samples);
    bool all = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      record_report(rec, reports[i], std::to_string(i) + "." + reports[i].bound_name + ".");
      all = all && reports[i].passes();
    }
    rec.set("all_pass", all ? 1.0 : 0.0);
    return;
  }
  TailReport rep;
  if (c.kind == "bench-rademacher") {
    const Index d = static_cast<Index>(c.N.value_or(8));
    std::vector<ComplexMatrix> coeffs;
    for (Index i = 0; i < d; ++i) {
      ComplexMatrix e = ComplexMatrix::Zero(d, d);
      e(i, i) = 1.0;
      coeffs.push_back(e);
    }
    rep = rademacher_series_bench(coeffs, samples, stream, c.thresholds);
  } else if (c.kind == "bench-hoeffding") {
    const std::size_t k = c.K.value_or(16);
    if (c.B) {
      const AdversarySpec adv = experiment_adversary(c, setup, 8, 16);
      rep = matrix_hoeffding_bench(rescaling_sampler(adv, *c.B, 20000, root.derive(3)), k, samples, stream, c.thresholds);
    } else {
      rep = matrix_hoeffding_bench(scalar_sign_sampler(1.0), k, samples, stream, c.thresholds);
    }
  } else if (c.kind == "bench-complex") {
    const std::size_t m = c.M.value_or(64);
    rep = complex_hoeffding_bench(std::vector<Complex>(m, Complex(1.0 / std::sqrt(static_cast<double>(m)))), samples, stream);
  } else if (c.kind == "bench-width") {
    rep = width_tail_bench(experiment_isometry(c, setup), c.K.value_or(32), samples, thresholds_or(c, {0.5, 1.0, 2.0}), stream);
  } else if (c.kind == "bench-advantage") {
    const AdversarySpec adv = experiment_adversary(c, setup, 64, 96);
    rep = advantage_tail_bench(adv, c.K.value_or(32), samples, thresholds_or(c, {0.05, 0.1, 0.2}), stream);
  } else {
    rep = x_statistic_tail_bench(c.n.value_or(6), c.K.value_or(16), samples, thresholds_or(c, {0.5, 1.0, 2.0}), stream);
  }
  record_report(rec, rep, "");
}

inline void run_conjecture(const ExperimentConfig& c, const RngStream& root, ExperimentRecord& rec) {
  const Index n = static_cast<Index>(c.N.value_or(2));
  const Index dim = static_cast<Index>(c.M.value_or(8));
  const Index outcomes = static_cast<Index>(c.outcomes.value_or(4));
  const std::size_t k = c.K.value_or(2), trials = c.trials ? c.trials : 10;
  const RngStream fams = root.derive(1);
  std::vector<double> values(trials), sizes(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    RngStream s = fams.derive(t);
    const auto projectors = random_measurement(dim, outcomes, s);
    std::vector<UnitVector> states;
    const auto r = FunctionFamily::random(k, static_cast<std::size_t>(n), s);
    for (std::size_t j = 0; j < k; ++j) states.push_back(phase_state(r.row(j)));
    SubsetSearchOptions opts;
    opts.restarts = c.restarts;
    opts.seed = s.next_u64();
    const auto mode = outcomes <= opts.brute_limit ? SubsetSearch::kBrute : SubsetSearch::kGreedy;
    const auto res = subset_norm_conjecture(projectors, states, mode, opts);
    values[t] = res.value;
    sizes[t] = static_cast<double>(res.subset.size());
  }
  rec.set("subset_norm_mean", mean_of(values));
  rec.set("subset_norm_max", max_of(values));
  rec.set("subset_size_mean", mean_of(sizes));
  rec.set("exhaustive", outcomes <= SubsetSearchOptions{}.brute_limit ? 1.0 : 0.0);
}

inline void run_compression(const ExperimentConfig& c, const RngStream& root, ExperimentRecord& rec) {
  RngStream setup = root.derive(1);
  const std::size_t l = c.L.value_or(8), s = c.S.value_or(4);
  ExperimentConfig shaped = c;
  if (!c.instance) {
    shaped.N = c.N.value_or(4);
    shaped.M = l * s;
  }
  const AdversarySpec adv = experiment_adversary(shaped, setup, 4, l * s);
  const double dev = verify_one_query_simulation(adv, static_cast<Index>(l), c.trials ? c.trials : 50, root.derive(2));
  rec.set("max_inner_product_deviation", dev);
  if (adv.N() <= static_cast<Index>(s)) {
    const ComplexMatrix t = compression_equivalence_isometry(adv.V(), static_cast<Index>(l), static_cast<Index>(s));
    rec.set("equivalence_isometry_residual", isometry_residual(t));
  }
}

}  // namespace detail

// Dispatches on config.kind, appends the record to config.output / config.csv
// when set, and returns it. Streams: seed with stream id 0, derived per stage.
inline ExperimentRecord run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const RngStream root(config.seed);
  ExperimentRecord rec;
  rec.config = config.to_json();
  rec.version = kVersion;
  rec.rng_fingerprint = root.fingerprint();
  const std::string& k = config.kind;
  if (k == "game") detail::run_game(config, root, rec);
  else if (k == "attack-hadamard") detail::run_attack_hadamard(config, root, rec);
  else if (k == "relaxation") detail::run_relaxation(config, root, rec);
  else if (k == "width") detail::run_width(config, root, rec);
  else if (k == "conjecture") detail::run_conjecture(config, root, rec);
  else if (k == "compression-verify") detail::run_compression(config, root, rec);
  else detail::run_bench(config, root, rec);
  rec.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!config.output.empty()) append_jsonl(config.output, rec);
  if (!config.csv.empty()) append_csv(config.csv, rec);
  return rec;
}

}  // namespace phaselab
