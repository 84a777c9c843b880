#include "omnidyn/config.hpp"
#include "omnidyn/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

using namespace omnidyn;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text, "test.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyObjectGivesDefaults) {
  const RunConfig c = parse_run_config("{}");
  const RunConfig d;
  EXPECT_EQ(dump_run_config(c), dump_run_config(d));
  EXPECT_EQ(c.experiment, "translation");
  EXPECT_EQ(c.n_dirs, 2000);
  EXPECT_EQ(c.setup.vehicle.mass, 4.0);
}

TEST(Config, DumpParseRoundTrip) {
  RunConfig c;
  c.experiment = "flip";
  c.n_dirs = 17;
  c.biased = true;
  c.output_dir = "results/a";
  c.setup.gains.attitude = 123.25;
  c.setup.vehicle.com_offset = Vec3(0.001, -0.002, 0.003);
  c.setup.sim.duration = 2.5;
  c.setup.sim.disturbance.force = Vec3(0.1, 0.0, 0.0);
  c.setup.singularity.enabled = false;
  c.setup.allocation.correction_iterations = 3;
  const std::string once = dump_run_config(c);
  const RunConfig back = parse_run_config(once);
  EXPECT_EQ(dump_run_config(back), once);
  EXPECT_EQ(back.setup.gains.attitude, 123.25);
  EXPECT_EQ(back.setup.sim.duration, 2.5);
  EXPECT_FALSE(back.setup.singularity.enabled);
  EXPECT_TRUE(back.biased);
}

TEST(Config, AnnotatedAndPlainValues) {
  const RunConfig a = parse_run_config(R"({"vehicle": {"mass": {"value": 5.0, "source": "assumed"}}})");
  const RunConfig b = parse_run_config(R"({"vehicle": {"mass": 5.0}})");
  const RunConfig c = parse_run_config(R"({"vehicle": {"mass": {"value": 5.0}}})");
  EXPECT_EQ(a.setup.vehicle.mass, 5.0);
  EXPECT_EQ(dump_run_config(a), dump_run_config(b));
  EXPECT_EQ(dump_run_config(a), dump_run_config(c));
}

TEST(Config, DurationMayBeNull) {
  const RunConfig a = parse_run_config(R"({"sim": {"duration": null}})");
  EXPECT_FALSE(a.setup.sim.duration.has_value());
  const RunConfig b = parse_run_config(R"({"sim": {"duration": 3}})");
  EXPECT_EQ(b.setup.sim.duration, 3.0);
}

TEST(Config, ErrorsNameThePath) {
  EXPECT_NE(error_of(R"({"vehicle": {"mas": 4}})").find("vehicle.mas: unknown key"), std::string::npos);
  EXPECT_NE(error_of(R"({"colour": 1})").find("colour: unknown key"), std::string::npos);
  EXPECT_NE(error_of(R"({"gains": {"position": {"value": 1, "source": "guess"}}})").find("gains.position.source"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"gains": {"position": "high"}})").find("gains.position: must be a number"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"sim": {"disturbance": {"force": [1, 2]}}})").find("sim.disturbance.force"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"format": "other/2"})").find("format"), std::string::npos);
}

TEST(Config, SyntaxErrorReportsLocation) {
  const std::string msg = error_of("{\n  \"n_dirs\": 5,\n  \"biased\": tru\n}");
  EXPECT_NE(msg.find("test.json"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 3, column"), std::string::npos) << msg;
  EXPECT_NE(msg.find("\"biased\": tru"), std::string::npos) << msg;
}

TEST(Config, ValidationFailuresAreConfigErrors) {
  EXPECT_NE(error_of(R"({"vehicle": {"mass": -1}})").find("vehicle"), std::string::npos);
  EXPECT_NE(error_of(R"({"gains": {"attitude": 0}})").find("gains"), std::string::npos);
  EXPECT_NE(error_of(R"({"sim": {"dt_control": 0.0045}})").find("sim"), std::string::npos);
  EXPECT_NE(error_of(R"({"n_dirs": 0})").find("n_dirs"), std::string::npos);
  EXPECT_NE(error_of(R"({"output_dir": ""})").find("output_dir"), std::string::npos);
  EXPECT_NE(error_of(R"({"singularity": {"freeze_angle": 1.0}})").find("singularity"), std::string::npos);
}

TEST(Config, LoadFromFile) {
  const auto dir = std::filesystem::temp_directory_path() / ("omnidyn_cfg_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::create_directories(dir);
  const auto path = dir / "run.json";
  {
    std::ofstream(path) << R"({"experiment": "cartwheel", "n_dirs": 12})";
  }
  const RunConfig c = load_run_config(path);
  EXPECT_EQ(c.experiment, "cartwheel");
  EXPECT_EQ(c.n_dirs, 12);
  EXPECT_THROW(load_run_config(dir / "missing.json"), ConfigError);
  std::filesystem::remove_all(dir);
}
