#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>

#include "wkstab/errors.hpp"
#include "wkstab/jobs.hpp"

using namespace wkstab;
using nlohmann::json;

namespace {

json interval_config() {
  return json::parse(R"({
    "polytope": {"dim": 1, "labels": [{"normal": [1], "offset": "1"}, {"normal": [-1], "offset": "1"}]},
    "v": {"expr": "1"},
    "w": {"expr": "1"}
  })");
}

json sphere_config() {
  return json::parse(R"({"admissible": {"factors": [], "v": {"expr": "1"}, "w": {"expr": "1"}}})");
}

// every tagged value in a 'both' report must carry the float/exact pair
void check_parity(const json& node) {
  if (node.is_object()) {
    if (node.contains("pipeline") && node["pipeline"] == "both") {
      CHECK(node.contains("float"));
      CHECK(node.contains("exact"));
      CHECK(node.contains("divergence"));
    }
    for (const auto& [key, value] : node.items()) check_parity(value);
  } else if (node.is_array()) {
    for (const auto& value : node) check_parity(value);
  }
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(WKSTAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string write_temp(const json& config, const std::string& name) {
  std::string path = "/tmp/wkstab_test_" + name + ".json";
  std::ofstream out(path);
  out << config.dump();
  return path;
}

}  // namespace

TEST_CASE("slope job produces the interval hand value") {
  jobs::Report report = jobs::run(jobs::Command::Slope, interval_config(), {});
  CHECK(report.body["results"]["slope"]["value"].get<double>() == doctest::Approx(2.0));
  CHECK(report.body["results"]["slope"]["pipeline"] == "float");
  CHECK(report.body["command"] == "slope");
}

TEST_CASE("pbundle report job: round sphere verdict and polynomial profile") {
  jobs::JobOptions options;
  options.pipeline = "exact";
  jobs::Report report = jobs::run(jobs::Command::PBundleReport, sphere_config(), options);
  const json& results = report.body["results"];
  CHECK(results["verdict"].get<std::string>().find("exists") != std::string::npos);
  CHECK(results["theta"]["theta"] == "1 - z^2");
  CHECK(results["A1"]["exact"] == "0");
  CHECK(results["A2"]["exact"] == "2");
  CHECK(report.csv.rfind("z0,F", 0) == 0);
}

TEST_CASE("futaki job with explicit f") {
  json config = interval_config();
  config["f"] = json::parse(R"({"pieces": [{"grad": ["1"], "offset": "0"}, {"grad": ["-1"], "offset": "0"}]})");
  jobs::JobOptions options;
  options.pipeline = "both";
  jobs::Report report = jobs::run(jobs::Command::Futaki, config, options);
  CHECK(report.body["results"]["futaki"]["exact"] == "2");
  check_parity(report.body["results"]);
}

TEST_CASE("df job surfaces the ratio and the note") {
  json config = interval_config();
  config["f"] = json::parse(R"({"pieces": [{"grad": ["1"], "offset": "0"}, {"grad": ["-1"], "offset": "0"}]})");
  config["R"] = "1";
  config["klist"] = {8, 16, 24, 32};
  jobs::JobOptions options;
  options.pipeline = "both";
  jobs::Report report = jobs::run(jobs::Command::Df, config, options);
  const json& results = report.body["results"];
  CHECK(results["DF"]["exact"] == "-1/2");
  CHECK(results["F_P"]["exact"] == "2");
  CHECK(results["ratio"]["exact"] == "-1/4");
  CHECK(results["note"].get<std::string>().find("-1/4") != std::string::npos);
  CHECK(report.csv.rfind("k,W_v,W_w", 0) == 0);
  check_parity(results);
}

TEST_CASE("wext and scan and abreu jobs run end to end") {
  json config = interval_config();
  jobs::Report wext = jobs::run(jobs::Command::WExt, config, {});
  CHECK(wext.body["results"]["c"]["value"].get<double>() == doctest::Approx(2.0));
  CHECK(wext.body["residuals"]["orthogonality"].get<double>() <= 1e-10);

  json scan_config = interval_config();
  scan_config["scan"] = json{{"direction_range", 1}, {"direction_den", 1},
                             {"offset_range", 2}, {"offset_den", 2}};
  jobs::Report scan = jobs::run(jobs::Command::Scan, scan_config, {});
  CHECK(scan.body["results"]["count"].get<int>() > 0);
  CHECK(scan.body["results"]["destabilizer_candidate"] == false);
  CHECK(!scan.csv.empty());

  json abreu_config = interval_config();
  abreu_config["f"] = json{{"expr", "p1^2"}};
  jobs::Report abreu = jobs::run(jobs::Command::Abreu, abreu_config, {});
  CHECK(abreu.body["residuals"]["futaki_identity"].get<double>() <= 1e-6);
  const json& values = abreu.body["results"]["grid"]["scal_v"];
  REQUIRE(!values.empty());
  for (const auto& s : values) CHECK(s.get<double>() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("schema violations carry the offending path") {
  json config = interval_config();
  config.erase("w");
  CHECK_THROWS_WITH_AS((void)jobs::run(jobs::Command::Slope, config, {}),
                       doctest::Contains("SchemaError"), Error);

  json bad_weight = interval_config();
  bad_weight["v"] = json{{"expr", "1+"}};
  CHECK_THROWS_WITH_AS((void)jobs::run(jobs::Command::Slope, bad_weight, {}),
                       doctest::Contains("SyntaxError"), Error);

  json float_offset = interval_config();
  float_offset["polytope"]["labels"][0]["offset"] = 0.5;
  CHECK_THROWS_WITH_AS((void)jobs::run(jobs::Command::Slope, float_offset, {}),
                       doctest::Contains("SchemaError"), Error);
}

TEST_CASE("pipeline 'exact' on a transcendental weight is rejected") {
  json config = interval_config();
  config["v"] = json{{"expr", "exp(p1)"}};
  jobs::JobOptions options;
  options.pipeline = "exact";
  CHECK_THROWS_WITH_AS((void)jobs::run(jobs::Command::Slope, config, options),
                       doctest::Contains("SchemaError"), Error);
}

TEST_CASE("reports are byte-identical apart from wall time") {
  jobs::JobOptions options;
  options.pipeline = "both";
  json config = interval_config();
  jobs::Report a = jobs::run(jobs::Command::Slope, config, options);
  jobs::Report b = jobs::run(jobs::Command::Slope, config, options);
  a.body.erase("wall_time_ms");
  b.body.erase("wall_time_ms");
  CHECK(a.body.dump() == b.body.dump());
}

TEST_CASE("weight families parse from JSON records") {
  json affine_power = json::parse(R"({"family": "affine_power", "xi": ["1"], "a": "2", "k": "-3"})");
  WeightExpr w = jobs::weight_from_json(affine_power, 1);
  CHECK(w.eval({-1.0}) == doctest::Approx(1.0));

  json soliton = json::parse(R"({"family": "exponential", "xi": ["1/2"]})");
  CHECK(jobs::weight_from_json(soliton, 1).eval({0.0}) == doctest::Approx(1.0));

  json calabi = json::parse(
      R"({"family": "generalized_calabi_w", "base": [{"d": 1, "scal": "4", "xi": ["1"], "c": "2"}], "xi0": ["0"], "c0": "0"})");
  CHECK(jobs::weight_from_json(calabi, 1).eval({0.3}) == doctest::Approx(-4.0));

  CHECK_THROWS_WITH_AS((void)jobs::weight_from_json(json{{"family", "nope"}}, 1),
                       doctest::Contains("SchemaError"), Error);
}

TEST_CASE("admissible data: float scal disengages the exact pipeline") {
  json cfg = json::parse(
      R"({"factors": [{"d": 1, "scal": 4.25, "xi": "1", "c": "2"}], "v": {"expr": "1"}, "w": {"expr": "1"}})");
  AdmissibleData data = jobs::admissible_from_json(cfg);
  CHECK_FALSE(data.exact_capable());
  json cfg_exact = json::parse(
      R"({"factors": [{"d": 1, "scal": "17/4", "xi": "1", "c": "2"}], "v": {"expr": "1"}, "w": {"expr": "1"}})");
  CHECK(jobs::admissible_from_json(cfg_exact).exact_capable());
}

TEST_CASE("CLI end to end: exit codes and output files") {
  std::string config = write_temp(interval_config(), "slope");
  CHECK(run_cli("slope --config " + config) == 0);

  // report to a file, then read it back
  std::string out = "/tmp/wkstab_test_out.json";
  CHECK(run_cli("slope --config " + config + " --pipeline both --out " + out) == 0);
  std::ifstream in(out);
  json report;
  in >> report;
  CHECK(report["results"]["slope"]["exact"] == "2");

  // malformed weight: validation failure is exit 2
  json bad = interval_config();
  bad["v"] = json{{"expr", "1+"}};
  CHECK(run_cli("slope --config " + write_temp(bad, "bad")) == 2);

  // missing config file
  CHECK(run_cli("slope --config /tmp/does_not_exist.json") == 2);

  // pbundle nested subcommand with csv
  std::string sphere = write_temp(sphere_config(), "sphere");
  std::string csv = "/tmp/wkstab_test_curve.csv";
  CHECK(run_cli("pbundle report --config " + sphere + " --csv " + csv) == 0);
  std::ifstream csv_in(csv);
  std::string header;
  std::getline(csv_in, header);
  CHECK(header == "z0,F");
}

TEST_CASE("futaki job exposes the optional (2 pi)^dim rescaling") {
  json config = interval_config();
  config["f"] = json::parse(R"({"pieces": [{"grad": ["1"], "offset": "0"}, {"grad": ["-1"], "offset": "0"}]})");
  config["two_pi"] = true;
  jobs::Report report = jobs::run(jobs::Command::Futaki, config, {});
  double scaled = report.body["results"]["futaki_two_pi_scaled"]["value"].get<double>();
  CHECK(scaled == doctest::Approx(2.0 * 2.0 * std::acos(-1.0)));
}

TEST_CASE("df job falls back to the crease-aligned default klist") {
  json config = interval_config();
  config["f"] = json::parse(R"({"pieces": [{"grad": ["1"], "offset": "-1/2"}, {"grad": ["0"], "offset": "0"}]})");
  config["R"] = "1";
  jobs::JobOptions options;
  options.pipeline = "both";
  jobs::Report report = jobs::run(jobs::Command::Df, config, options);
  const json& series = report.body["results"]["v_series"];
  REQUIRE(series.size() == 4);
  CHECK(series[0]["k"] == 16);  // crease at 1/2 doubles the base k
  CHECK(series[3]["k"] == 64);
}

TEST_CASE("pbundle solve reports the non-extremal slope constant") {
  jobs::JobOptions options;
  options.pipeline = "both";
  jobs::Report report = jobs::run(jobs::Command::PBundleSolve, sphere_config(), options);
  CHECK(report.body["results"]["c_vw"]["exact"] == "2");
}

TEST_CASE("CLI honours order and thread flags") {
  json config = interval_config();
  config["scan"] = json{{"direction_range", 1}, {"direction_den", 1},
                        {"offset_range", 2}, {"offset_den", 2}};
  std::string path = write_temp(config, "scanflags");
  CHECK(run_cli("scan --config " + path + " --order 8 --threads 2") == 0);

  std::string out = "/tmp/wkstab_test_wext.json";
  CHECK(run_cli("wext --config " + write_temp(interval_config(), "wext") +
                " --pipeline exact --out " + out) == 0);
  std::ifstream in(out);
  json report;
  in >> report;
  CHECK(report["results"]["c"]["exact"] == "2");
  CHECK(report["results"]["xi"][0]["exact"] == "0");
}

TEST_CASE("threaded sweeps match the sequential results") {
  json config = interval_config();
  config["f"] = json::parse(R"({"pieces": [{"grad": ["1"], "offset": "0"}, {"grad": ["-1"], "offset": "0"}]})");
  config["R"] = "1";
  config["klist"] = {8, 16, 24, 32};
  jobs::JobOptions seq, par;
  par.threads = 4;
  jobs::Report a = jobs::run(jobs::Command::Df, config, seq);
  jobs::Report b = jobs::run(jobs::Command::Df, config, par);
  a.body.erase("wall_time_ms");
  b.body.erase("wall_time_ms");
  a.body["config"].erase("threads");
  CHECK(a.body.dump() == b.body.dump());

  json sphere = sphere_config();
  jobs::Report c = jobs::run(jobs::Command::PBundleFutaki, sphere, seq);
  jobs::Report d = jobs::run(jobs::Command::PBundleFutaki, sphere, par);
  c.body.erase("wall_time_ms");
  d.body.erase("wall_time_ms");
  CHECK(c.body.dump() == d.body.dump());
}
