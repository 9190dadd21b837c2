#include <cmath>

#include "doctest.h"
#include "npcvx/error.hpp"
#include "npcvx/harness.hpp"

using namespace npc;
using nlohmann::json;

TEST_CASE("NP lemma oracle") {
  NPLemmaResult g = np_lemma_oracle(Scenario::gaussian_1d(0.0, 2.0, 1.0), 0.1);
  // scipy.stats.norm
  CHECK(*g.x_cut == doctest::Approx(1.2815515655446004).epsilon(1e-13));
  CHECK(g.type2_error == doctest::Approx(0.23624041589411682).epsilon(1e-12));
  CHECK(g.threshold == doctest::Approx(1.75611350426692470).epsilon(1e-12));
  CHECK(g.type1_error == 0.1);
  CHECK(g.randomization == 0.0);

  NPLemmaResult mirrored = np_lemma_oracle(Scenario::gaussian_1d(2.0, 0.0, 1.0), 0.1);
  CHECK(*mirrored.x_cut == doctest::Approx(2.0 - 1.2815515655446004).epsilon(1e-13));
  CHECK(mirrored.type2_error == doctest::Approx(g.type2_error).epsilon(1e-12));

  for (double a : {0.05, 0.2, 0.5}) {
    NPLemmaResult u = np_lemma_oracle(Scenario::prop31(0.2), a);
    CHECK(u.type2_error == doctest::Approx(1.0 - a));
    CHECK(u.threshold == 1.0);
    CHECK(u.randomization == a);
  }
  NPLemmaResult same = np_lemma_oracle(Scenario::gaussian_1d(1.0, 1.0, 2.0), 0.3);
  CHECK(same.type2_error == doctest::Approx(0.7));

  Sample s{FeatureMatrix::from_columns({{0.0}}), FeatureMatrix::from_columns({{1.0}})};
  CHECK_THROWS_AS(np_lemma_oracle(Scenario::empirical(s), 0.1), UnknownScenario);
  CHECK_THROWS_AS(np_lemma_oracle(Scenario::prop31(0.2), 1.0), DomainError);
}

TEST_CASE("csv table formatting") {
  CsvTable t{{"a", "b", "c", "d"}, {{1, "ok", true, 0.25}, {2, "x", false, nullptr}}};
  CHECK(t.to_string() == "a,b,c,d\n1,ok,1,0.25\n2,x,0,\n");
}

TEST_CASE("dictionary specs") {
  const Scenario g = Scenario::gaussian_1d(0.0, 2.0, 1.0);
  BaseDictionary stumps = dictionary_for({{"stumps", 5}, {"pilot_size", 500}}, g, 3);
  CHECK(stumps.size() == 10);
  CHECK(json(to_json(stumps)) == json(to_json(dictionary_for({{"stumps", 5}, {"pilot_size", 500}}, g, 3))));
  BaseDictionary with_const = dictionary_for({{"stumps", 2}, {"include_constant", true}}, g, 3);
  CHECK(with_const.size() == 5);
  BaseDictionary explicit_dict = dictionary_for(RateConfig{}.dictionary, g, 0);
  CHECK(explicit_dict.size() == 2);
  CHECK_THROWS_AS(dictionary_for(json::object(), g, 0), ConfigError);
}

TEST_CASE("small counterexample run") {
  CounterexampleConfig cfg;
  cfg.trials = 400;
  ExperimentResult r = run_counterexample(cfg, 5);
  CHECK(r.trials.rows.size() == 400);
  CHECK(r.summary.at("excess_exact_on_events").get<bool>());
  CHECK(r.summary.at("exact_event_probability").get<double>() ==
        doctest::Approx(0.5178363215654738).epsilon(1e-12));
  CHECK(r.summary.at("population_min_r_plus").get<double>() == doctest::Approx(0.8));
  // Same seed, same report.
  CHECK(run_counterexample(cfg, 5).summary.dump() == r.summary.dump());
  CHECK(run_counterexample(cfg, 6).summary.dump() != r.summary.dump());

  cfg.lambda_steps = 7;
  CHECK_THROWS_AS(run_counterexample(cfg, 5), DomainError);
}

TEST_CASE("counterexample excess is alpha on every event trial") {
  CounterexampleConfig cfg;
  cfg.trials = 300;
  ExperimentResult r = run_counterexample(cfg, 9);
  const auto& h = r.trials.header;
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
  };
  for (const auto& row : r.trials.rows) {
    if (row[col("event")].get<bool>()) {
      CHECK(row[col("binds")].get<bool>());
      CHECK(row[col("excess")].get<double>() == doctest::Approx(0.2).epsilon(1e-15));
    } else {
      CHECK(row[col("alpha_n")].get<double>() < 0.2);
    }
  }
}

TEST_CASE("small rate and sampling runs") {
  RateConfig rc;
  rc.trials = 10;
  rc.n_grid = {10000, 40000};
  rc.gamma_resolution = 1e-3;
  ExperimentResult r = run_rate_experiment(rc, 1);
  CHECK(r.summary.at("all_within_bound").get<bool>());
  CHECK(r.summary.at("gamma_alpha").get<double>() > 1.0);
  CHECK(r.summary.at("per_n").size() == 2);
  CHECK(r.summary.at("loglog_slope").is_number());
  CHECK(r.trials.rows.size() == 20);

  rc.eps_bar = "probe";
  ExperimentResult p = run_rate_experiment(rc, 1);
  CHECK(p.summary.at("eps_bar_mode") == "probe");
  rc.eps_bar = "guess";
  CHECK_THROWS_AS(run_rate_experiment(rc, 1), ConfigError);

  SamplingConfig sc;
  sc.trials = 10;
  sc.gamma_resolution = 1e-3;
  ExperimentResult s = run_sampling_scheme(sc, 2);
  CHECK(s.summary.at("partition_always").get<bool>());
  CHECK(s.summary.at("joint_frequency").get<double>() >= 0.0);
}

TEST_CASE("small coverage run") {
  CoverageConfig cc;
  cc.n_minus = cc.n_plus = 40000;
  cc.trials = 4;
  cc.mc_draws = 100000;
  ExperimentResult r = run_type1_coverage(cc, 3);
  CHECK(r.summary.at("optimal_trials").get<std::size_t>() == 4);
  CHECK(r.summary.at("coverage").get<double>() == 1.0);

  cc.n_minus = cc.n_plus = 100;
  ExperimentResult small = run_type1_coverage(cc, 3);
  CHECK(small.summary.at("sample_too_small_trials").get<std::size_t>() == 4);
}

TEST_CASE("small CCP run") {
  CCPExperimentConfig cfg;
  cfg.trials = 6;
  cfg.fresh_draws = 20000;
  cfg.quadrature_cells = 20000;
  ExperimentResult r = run_ccp_experiment(cfg, 4);
  CHECK(r.summary.at("f_star_phi").get<double>() == doctest::Approx(5.0 / 6.0).epsilon(1e-6));
  CHECK(r.summary.at("eps").get<double>() == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(r.summary.at("all_within_bound").get<bool>());
  CHECK(r.summary.at("feasible_frequency").get<double>() == 1.0);
}

TEST_CASE("experiment configs from JSON") {
  CounterexampleConfig c = CounterexampleConfig::from_json({{"alpha", 0.3}, {"trials", 7}, {"margin", 0.01}});
  CHECK(c.alpha == 0.3);
  CHECK(c.trials == 7);
  CHECK(*c.margin == 0.01);
  CHECK_THROWS_AS(CounterexampleConfig::from_json({{"trials", "many"}}), ConfigError);
  CHECK_THROWS_AS(CounterexampleConfig::from_json(json::array()), ConfigError);

  RateConfig r = RateConfig::from_json({{"n_grid", {100, 200}}});
  CHECK(r.np.alpha == 0.5);
  CHECK(r.np.delta == 0.2);
  CHECK(r.n_grid.size() == 2);
  CoverageConfig cv = CoverageConfig::from_json({{"np", {{"alpha", 0.05}}}});
  CHECK(cv.np.alpha == 0.05);
  CCPExperimentConfig cc = CCPExperimentConfig::from_json({{"surrogate", "logit"}, {"objective", {0.0, 1.0}}});
  CHECK(cc.surrogate.kind() == SurrogateKind::logit);
  CHECK(cc.objective[1] == 1.0);
}
