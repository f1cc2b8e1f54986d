#include "phaselab/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace phaselab {
namespace {

Json measured(const ExperimentConfig& c) { return run(c).measured(); }

TEST(Experiment, HadamardAttackPipeline) {
  ExperimentConfig c;
  c.kind = "attack-hadamard";
  c.n = 10;
  c.K = 64;
  c.trials = 200;
  c.seed = 7;
  const auto rec = run(c);
  const double adv = rec.get("exact_advantage_mean");
  EXPECT_GT(adv, 0.2 / 8.0);
  EXPECT_LT(adv, 0.8 / 8.0);
  EXPECT_EQ(rec.config["kind"], "attack-hadamard");
  EXPECT_EQ(rec.version, kVersion);
  EXPECT_FALSE(rec.rng_fingerprint.empty());
}

TEST(Experiment, GameWithIdentityProjectorHasNoAdvantage) {
  const auto path = (std::filesystem::temp_directory_path() / "phaselab_identity.json").string();
  RngStream rng(1);
  save_instance(path, AdversarySpec(random_isometry(4, 8, rng), ComplexMatrix::Identity(8, 8)));
  ExperimentConfig c;
  c.kind = "game";
  c.instance = path;
  c.trials = 2000;
  const auto rec = run(c);
  EXPECT_NEAR(rec.get("max_advantage"), 0.0, 1e-12);
  // always accepts, so it wins exactly when the challenge bit says "family"
  EXPECT_NEAR(rec.get("win_rate"), 0.5, 4 * std::sqrt(0.25 / 2000));
  std::filesystem::remove(path);
}

TEST(Experiment, SameConfigSameValues) {
  for (const std::string kind : {"game", "relaxation", "width", "conjecture", "compression-verify", "bench-complex"}) {
    ExperimentConfig c;
    c.kind = kind;
    c.seed = 11;
    c.trials = 20;
    c.samples = 100;
    if (kind == "width") {
      c.N = 8;
      c.M = 16;
      c.K = 8;
    }
    set_thread_count(1);
    const Json a = measured(c);
    set_thread_count(5);
    const Json b = measured(c);
    set_thread_count(0);
    EXPECT_EQ(a.dump(), b.dump()) << kind;
  }
}

TEST(Experiment, ConfigRoundTrip) {
  ExperimentConfig c;
  c.kind = "relaxation";
  c.N = 4;
  c.M = 8;
  c.B = 2.5;
  c.thresholds = {0.1, 0.2};
  c.seed = 99;
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Experiment, ConfigErrors) {
  ExperimentConfig c;
  c.kind = "teleport";
  try {
    run(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
    EXPECT_NE(std::string(e.what()).find("attack-hadamard"), std::string::npos);
  }
  c.kind = "game";
  c.N = 8;
  c.M = 4;
  EXPECT_THROW(run(c), Error);
  EXPECT_THROW(ExperimentConfig::from_json({{"kind", "game"}, {"K", "four"}}), Error);
  EXPECT_THROW(ExperimentConfig::from_json({{"seed", 1}}), Error);
}

TEST(Experiment, CapacityErrorsPropagate) {
  ExperimentConfig c;
  c.kind = "bench-advantage";
  c.N = 4;
  c.M = 16;
  c.samples = 10;
  EXPECT_NO_THROW(run(c));  // fixed-oracle mode has no cap
  c.kind = "relaxation";
  c.M = 30;
  c.trials = 1;
  const auto rec = run(c);  // above the brute-force cutoff: spectral only
  EXPECT_THROW(rec.get("max_advantage_mean"), Error);
}

}  // namespace
}  // namespace phaselab
