#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "qstomo/errors.hpp"
#include "qstomo/experiment.hpp"
#include "qstomo/io.hpp"

using namespace qstomo;
using nlohmann::json;

namespace {

json base() {
  return json::parse(R"({
    "params": {"sigma": 2.0, "rho": 0.8},
    "potential": {"regular": [{"kind": "gaussian", "amplitude": 1.0, "center": [0.0, 1.0], "width": 1.0}]},
    "grid": {"n_points": 64, "extent": 16.0},
    "scatter": {"T": 2.0, "speeds": [8.0], "angles": {"count": 4}, "offsets": {"min": -1, "max": 1, "count": 5}}
  })");
}

std::string config_message(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"sigma2", "sigma1p25", "sigma6"}) {
    const ExperimentConfig c = load_config(std::string(QSTOMO_SOURCE_DIR) + "/configs/" + name + ".json");
    EXPECT_EQ(c.hash.size(), 16u);
  }
  const ExperimentConfig c6 = load_config(std::string(QSTOMO_SOURCE_DIR) + "/configs/sigma6.json");
  EXPECT_DOUBLE_EQ(c6.params.lambda, 3.0);
  EXPECT_EQ(c6.scatter.graf, GrafMode::on);
}

TEST(Config, GeometryShorthands) {
  const ExperimentConfig c = config_from_json(base());
  ASSERT_EQ(c.sweep.angles.size(), 4u);
  EXPECT_DOUBLE_EQ(c.sweep.angles[1], kPi / 4);
  ASSERT_EQ(c.sweep.offsets.size(), 5u);
  EXPECT_DOUBLE_EQ(c.sweep.offsets[1], -0.5);
  EXPECT_DOUBLE_EQ(c.params.omega, std::sqrt(2.0));
}

TEST(Config, RejectsViolations) {
  json j = base();
  j["params"]["rho"] = 0.5;
  const std::string m = config_message(j);
  EXPECT_NE(m.find("Assumption 1"), std::string::npos) << m;
  EXPECT_NE(m.find("1/lambda < rho < 1"), std::string::npos) << m;

  j = base();
  j["scatter"]["T"] = 1.0;
  EXPECT_NE(config_message(j).find("T must exceed 1"), std::string::npos);

  j = base();
  j["params"]["lambda"] = 2.5;
  EXPECT_NE(config_message(j).find("lambda"), std::string::npos);

  j = base();
  j["scatter"]["graf"] = "on";
  EXPECT_NE(config_message(j).find("unknown key graf"), std::string::npos);

  j = base();
  j["grid"]["n_points"] = 60;
  EXPECT_FALSE(config_message(j).empty());

  j = base();
  j["scatter"]["js"] = {3};
  EXPECT_FALSE(config_message(j).empty());

  j = base();
  j.erase("potential");
  EXPECT_FALSE(config_message(j).empty());
}

TEST(Config, HashIgnoresOutputDirOnly) {
  json a = base(), b = base(), c = base();
  b["output_dir"] = "elsewhere";
  c["scatter"]["speeds"] = {8.0, 16.0};
  EXPECT_EQ(config_from_json(a).hash, config_from_json(b).hash);
  EXPECT_NE(config_from_json(a).hash, config_from_json(c).hash);
  // Shorthand and explicit lists normalize to the same config.
  json d = base();
  d["scatter"]["offsets"] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  EXPECT_EQ(config_from_json(a).hash, config_from_json(d).hash);
}

TEST(Report, EmptySinogramGivesZeroTables) {
  const auto dir = std::filesystem::temp_directory_path() / "qstomo_empty_report";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  io::write_text((dir / "sinogram.csv").string(), sinogram_csv_header() + "\n");
  const ExperimentConfig c = config_from_json(base());
  const auto r = run_report(c, dir.string(), {});
  EXPECT_TRUE(r.report["empty"].get<bool>());
  ASSERT_EQ(r.report["error_vs_speed"].size(), 1u);
  EXPECT_EQ(r.report["error_vs_speed"][0]["rel_err"].get<double>(), 0.0);
  EXPECT_EQ(r.report["error_vs_speed"][0]["cells"].get<int>(), 0);
}

TEST(Report, MissingInputNamesPath) {
  const ExperimentConfig c = config_from_json(base());
  const std::string missing = (std::filesystem::temp_directory_path() / "qstomo_nowhere" / "s.csv").string();
  try {
    run_report(c, std::filesystem::temp_directory_path().string(), {missing});
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), missing);
  }
  EXPECT_THROW(run_reconstruct(c, missing, 1, std::filesystem::temp_directory_path().string()), IoError);
}

TEST(Pairing, SingleCell) {
  json j = base();
  j["evolve"] = {{"dt", 0.005}, {"potential_smoothing", 2.0}};
  const ExperimentConfig c = config_from_json(j);
  const PairingResult r = run_pairing(c, Vec2(8, 0), 2, Vec2::Zero());
  const json out = to_json(r);
  EXPECT_NEAR(out["relative_error"].get<double>(), 0.172, 0.005);
  EXPECT_EQ(out["oracle"][0].get<double>(), 0.0);
}
