#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "npcvx/cli.hpp"
#include "npcvx/error.hpp"

using namespace npc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("npcvx_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& text) const {
    const fs::path p = path / name;
    std::ofstream(p) << text;
    return p.string();
  }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "npcvx");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string labeled_csv(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::ostringstream s;
  s << "x1,x2,y\n";
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 ? 1 : -1;
    const double shift = y > 0 ? 1.5 : 0.0;
    s << n01(rng) + shift << "," << n01(rng) << "," << y << "\n";
  }
  return s.str();
}

}  // namespace

TEST_CASE("parse labeled CSV") {
  std::istringstream two("a,y,b\n1.5,-1,2\n-3,1,4e-1\n");
  LabeledData d = parse_labeled_csv(two);
  CHECK(d.features.rows() == 2);
  CHECK(d.features.cols() == 2);
  CHECK(d.labels == std::vector<int>{-1, 1});
  CHECK(d.features(1, 1) == 0.4);

  std::istringstream plus("x,y\n1,+1\n2,-1\n");
  CHECK(parse_labeled_csv(plus).labels[0] == 1);
  std::istringstream crlf("x,y\r\n1,1\r\n\r\n2,-1\r\n");
  CHECK(parse_labeled_csv(crlf).features.rows() == 2);
}

TEST_CASE("labeled CSV errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_labeled_csv(in);
  };
  CHECK_THROWS_AS(parse("x1,x2\n1,2\n"), SchemaError);
  CHECK_THROWS_AS(parse(""), SchemaError);
  CHECK_THROWS_AS(parse("x,y\n1,0\n"), UnknownLabel);
  CHECK_THROWS_AS(parse("x,y\n1,yes\n"), UnknownLabel);
  CHECK_THROWS_AS(parse("x,y\nnan,1\n"), NonFiniteValue);
  CHECK_THROWS_AS(parse("x,y\ninf,1\n"), NonFiniteValue);
  CHECK_THROWS_AS(parse("x,y\n1e999,1\n"), NonFiniteValue);
  CHECK_THROWS_AS(parse("x,y\nabc,1\n"), SchemaError);
  CHECK_THROWS_AS(parse("x,y\n1,1,3\n"), SchemaError);
  CHECK_THROWS_AS(parse("x,y\n,1\n"), SchemaError);
  CHECK_THROWS_AS(parse("x,y\n"), EmptyData);
  CHECK_THROWS_AS(parse("y\n1\n"), SchemaError);
  CHECK_THROWS_AS(parse("y,x,y\n1,2,1\n"), SchemaError);
}

TEST_CASE("parse value CSV") {
  std::istringstream in("g1,g2\n-0.9,0.1\n-0.9,-0.5\n");
  FeatureMatrix m = parse_value_csv(in);
  CHECK(m.rows() == 2);
  CHECK(m(1, 1) == -0.5);
  std::istringstream bad("g1\nNaN\n");
  CHECK_THROWS_AS(parse_value_csv(bad), NonFiniteValue);
}

TEST_CASE("solve subcommand") {
  TempDir dir;
  const std::string data = dir.file("d.csv", labeled_csv(4000, 1));
  Run r = run({"solve", "--data", data, "--alpha", "0.9", "--delta", "0.1", "--surrogate", "hinge", "--stumps",
               "3", "--seed", "7", "--no-timestamp"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j.at("command") == "solve");
  CHECK(j.at("solution").at("status") == "optimal");
  CHECK(j.at("solution").at("weights").size() == 12);
  CHECK(j.at("solution").at("r_minus_phi").get<double>() <= j.at("solution").at("alpha_kappa").get<double>() + 1e-8);
  CHECK_FALSE(j.contains("generated_at"));

  Run again = run({"solve", "--data", data, "--alpha", "0.9", "--delta", "0.1", "--surrogate", "hinge", "--stumps",
                   "3", "--seed", "7", "--no-timestamp"});
  CHECK(again.out == r.out);

  Run stamped = run({"solve", "--data", data, "--alpha", "0.9"});
  CHECK(json::parse(stamped.out).contains("generated_at"));

  const std::string out = (dir.path / "report.json").string();
  CHECK(run({"solve", "--data", data, "--alpha", "0.9", "--out", out, "--no-timestamp"}).code == 0);
  std::ifstream f(out);
  CHECK(json::parse(f).at("command") == "solve");
}

TEST_CASE("solve reports sample_too_small with exit 1") {
  TempDir dir;
  const std::string data = dir.file("d.csv", labeled_csv(40, 2));
  Run r = run({"solve", "--data", data, "--alpha", "0.1", "--no-timestamp"});
  CHECK(r.code == 1);
  CHECK(json::parse(r.out).at("solution").at("status") == "sample_too_small");
}

TEST_CASE("validation errors exit 2 with JSON on stderr") {
  TempDir dir;
  const std::string nolabel = dir.file("a.csv", "x1,x2\n1,2\n");
  Run r = run({"solve", "--data", nolabel});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err).at("error") == "schema");
  CHECK(r.out.empty());

  CHECK(json::parse(run({"solve", "--data", dir.file("b.csv", "x,y\n1,0\n")}).err).at("error") == "unknown_label");
  CHECK(json::parse(run({"solve", "--data", dir.file("c.csv", "x,y\nnan,1\n")}).err).at("error") == "non_finite");
  CHECK(json::parse(run({"solve", "--data", dir.file("e.csv", "x,y\n1,1\n")}).err).at("error") ==
        "one_class_empty");
  CHECK(json::parse(run({"solve", "--data", (dir.path / "missing.csv").string()}).err).at("error") == "io");

  const std::string data = dir.file("d.csv", labeled_csv(50, 3));
  CHECK(run({"solve", "--data", data, "--alpha", "1.5"}).code == 2);
  CHECK(run({"solve", "--data", data, "--surrogate", "square"}).code == 2);
  CHECK(run({"solve", "--data", data, "--config", dir.file("bad.json", "{not json")}).code == 2);
  Run usage = run({"solve"});
  CHECK(usage.code == 2);
  CHECK(json::parse(usage.err).at("error") == "usage");
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"experiment", "--kind", "other"}).code == 2);
}

TEST_CASE("ccp subcommand") {
  TempDir dir;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::ostringstream g;
  g << "g1,g2\n";
  for (int i = 0; i < 20000; ++i) g << -0.9 << "," << u(rng) << "\n";
  const std::string data = dir.file("g.csv", g.str());
  const std::string cfg = dir.file("c.json", R"({"objective": [1, 0], "alpha": 0.25, "delta": 0.1})");
  Run r = run({"ccp", "--data", data, "--config", cfg, "--no-timestamp"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j.at("solution").at("status") == "optimal");
  CHECK(j.at("training_chance").at("violation_rate").get<double>() <= 0.25);
  CHECK(run({"ccp", "--data", data, "--config", cfg, "--no-timestamp"}).out == r.out);

  const std::string wrong = dir.file("w.json", R"({"objective": [1, 0, 0]})");
  CHECK(json::parse(run({"ccp", "--data", data, "--config", wrong}).err).at("error") == "dimension_mismatch");
  const std::string none = dir.file("n.json", R"({"alpha": 0.2})");
  CHECK(run({"ccp", "--data", data, "--config", none}).code == 2);
}

TEST_CASE("verify-lemmas subcommand") {
  Run r = run({"verify-lemmas", "--n-max", "200", "--no-timestamp"});
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j.at("holds").get<bool>());
  CHECK(j.at("sweep").at("violations") == 0);
  CHECK(j.at("sweep").at("checks_bin2") == 200 * 50);
  CHECK(run({"verify-lemmas", "--n-max", "0"}).code == 2);
}

TEST_CASE("experiment subcommand writes JSON and CSV") {
  TempDir dir;
  const std::string cfg = dir.file("c.json", R"({"trials": 50})");
  const std::string out = (dir.path / "ce.json").string();
  Run r = run({"experiment", "--kind", "counterexample", "--config", cfg, "--seed", "3", "--out", out,
               "--no-timestamp"});
  CHECK(r.code == 0);
  std::ifstream jf(out);
  json j = json::parse(jf);
  CHECK(j.at("summary").at("trials") == 50);
  CHECK(j.at("trials_csv") == "ce.csv");
  std::ifstream cf(dir.path / "ce.csv");
  std::string header;
  std::getline(cf, header);
  CHECK(header.rfind("trial,", 0) == 0);
  std::size_t lines = 0;
  for (std::string line; std::getline(cf, line);) ++lines;
  CHECK(lines == 50);

  CHECK(run({"experiment", "--kind", "counterexample", "--config", dir.file("bad.json", R"({"alpha": 0.9})")})
            .code == 2);
}
