#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "kinmax");
  std::ostringstream out, err;
  const int code = kinmax::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// Value of "key=value" in the output, NaN when absent.
double value_of(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return std::stod(line.substr(key.size() + 1));
  }
  return std::nan("");
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("kinmax_test_" + name);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("equilibrium") {
  const auto r = run({"equilibrium", "--rho", "1", "--T", "0.159154943091895", "--vol", "1", "--eps", "0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("C=1.000000\n") != std::string::npos);
  CHECK(r.out.find("regime=classical") != std::string::npos);

  const auto boson = run({"equilibrium", "--n", "3", "--rho", "100", "--T", "0.1", "--eps", "1"});
  CHECK(boson.code == 1);
  CHECK_FALSE(boson.err.empty());
}

TEST_CASE("quantum-deltas") {
  const auto r = run({"quantum-deltas", "--n", "3", "--eps", "0.01"});
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "dS") == doctest::Approx(value_of(r.out, "predicted_dS")).epsilon(0.05));
}

TEST_CASE("dist") {
  const auto r = run({"dist", "--ref-T", "1", "--field-T", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("dist=0.306853\n") != std::string::npos);
  CHECK(value_of(r.out, "closed_form") == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("extremal") {
  const auto r = run({"extremal", "--rho", "1", "--E1", "2", "--U", "1,0", "--T", "1"});
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "T1") == doctest::Approx(1.5));
  CHECK(value_of(r.out, "distance") == doctest::Approx(1.0 - std::log(1.5)).epsilon(1e-6));

  CHECK(run({"extremal", "--E1", "0.1", "--U", "1,0"}).code == 1);  // infeasible
  CHECK(run({"extremal", "--E1", "2", "--U", "1"}).code == 2);      // wrong length
  CHECK(run({"extremal", "--E1", "2", "--U", "x,0"}).code == 2);
}

TEST_CASE("roots") {
  const auto r = run({"roots", "--c", "0.5"});
  CHECK(r.code == 0);
  CHECK(value_of(r.out, "lower") == doctest::Approx(0.3017).epsilon(1e-3));
  CHECK(value_of(r.out, "upper") == doctest::Approx(2.356).epsilon(1e-3));
  CHECK(run({"roots", "--c", "-1"}).code == 1);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"roots"}).code == 2);
  CHECK(run({"equilibrium", "--rho", "-1"}).code == 2);
  CHECK(run({"equilibrium", "--bogus", "1"}).code == 2);
  CHECK(run({"simulate", "--kernel", "soft"}).code == 2);
  CHECK(run({"selftest", "--only", "11"}).code == 2);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("simulate") != std::string::npos);
}

TEST_CASE("config file supplies defaults") {
  const auto path = temp_path("config.txt");
  {
    std::ofstream cfg(path);
    cfg << "# reference case\nref-T = 1\nfield-T=3\n";
  }
  const auto from_file = run({"dist", "--config", path.string()});
  CHECK(from_file.code == 0);
  CHECK(value_of(from_file.out, "closed_form") == doctest::Approx(3.0 - 1.0 - std::log(3.0)));
  const auto overridden = run({"dist", "--config", path.string(), "--field-T", "2"});
  CHECK(value_of(overridden.out, "closed_form") == doctest::Approx(1.0 - std::log(2.0)));

  {
    std::ofstream cfg(path);
    cfg << "nonsense=1\n";
  }
  CHECK(run({"dist", "--config", path.string()}).code == 2);
  {
    std::ofstream cfg(path);
    cfg << "just words\n";
  }
  CHECK(run({"dist", "--config", path.string()}).code == 2);
  CHECK(run({"dist", "--config", temp_path("missing.txt").string()}).code == 2);
  std::filesystem::remove(path);
}

TEST_CASE("simulate writes series files") {
  const auto csv = temp_path("series.csv");
  const auto json = temp_path("series.jsonl");
  const std::vector<std::string> base{"simulate", "--points", "12", "--steps", "4", "--init", "bimodal",
                                      "--shift", "0.3", "--T", "0.2"};
  auto args = base;
  args.insert(args.end(), {"--out", csv.string()});
  const auto r = run(args);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("classification=conservative") != std::string::npos);
  CHECK(value_of(r.out, "min_dS") >= -1e-12);

  const std::string text = slurp(csv);
  std::istringstream lines(text);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,S,E,F,G,A,B");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 5);

  // Same configuration, same bytes.
  CHECK(run(args).code == 0);
  CHECK(slurp(csv) == text);

  args = base;
  args.insert(args.end(), {"--out", json.string(), "--format", "json"});
  REQUIRE(run(args).code == 0);
  std::istringstream records(slurp(json));
  int count = 0;
  for (std::string line; std::getline(records, line);) {
    const auto obj = nlohmann::ordered_json::parse(line);
    CHECK(obj.size() == 7);
    CHECK(obj.begin().key() == "t");
    ++count;
  }
  CHECK(count == 5);

  std::filesystem::remove(csv);
  std::filesystem::remove(json);
}

TEST_CASE("simulate slab runs and domain errors") {
  const auto r = run({"simulate", "--points", "10", "--cells", "4", "--steps", "3", "--boundary",
                      "maxwellian_diffusion", "--wall-T", "0.5", "--T", "1", "--dt", "0.01"});
  CHECK(r.code == 0);
  CHECK(r.out.find("classification=dissipative") != std::string::npos);
  // CFL violation is a solver error.
  CHECK(run({"simulate", "--points", "10", "--cells", "4", "--steps", "1", "--dt", "1"}).code == 1);
  CHECK(run({"simulate", "--n", "3", "--points", "6", "--steps", "1"}).code == 1);
  CHECK(run({"simulate", "--init", "hot"}).code == 2);
  CHECK(run({"simulate", "--steps", "1", "--points", "8", "--out", "/nonexistent/dir/x.csv"}).code == 1);
}

TEST_CASE("selftest runs a chosen criterion") {
  const auto r = run({"selftest", "--only", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("PASS 1 ", 0) == 0);
}
