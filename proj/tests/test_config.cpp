#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "cats/config.hpp"
#include "cats/config_json.hpp"

using namespace cats;

TEST_CASE("replication preset matches the stated scenario", "[config]") {
  ScenarioConfig c = replication_config();
  c.validate();
  CHECK(c.mode == SimMode::cats);
  CHECK(c.horizon_days == 30);
  CHECK(c.dt_s == 0.1);
  CHECK(c.ticks_per_day() == 6000);
  REQUIRE(c.network.ring.has_value());
  CHECK(c.network.ring->length_km == Catch::Approx(20.0));
  CHECK(c.network.ring->lanes == 3);
  CHECK(c.network.ring->segments == 20);
  CHECK(c.network.coverage_fraction == Catch::Approx(0.3));
  CHECK(c.population.total == 2000);
  CHECK(c.population.fractions[0] == Catch::Approx(0.25));
  CHECK(c.population.fractions[1] == Catch::Approx(0.50));
  CHECK(c.population.fractions[2] == Catch::Approx(0.25));
  REQUIRE(c.tariffs.size() == 1);
  CHECK(c.tariffs[0].f_res == Rational{2});
  CHECK(c.tariffs[0].f_cre == Rational{2});
  CHECK(c.rates.rate(DriverType::aggressive, false) == 0.10);
  CHECK(c.rates.rate(DriverType::normal, true) == 0.01);
  CHECK(c.detection.mode == DetectionPolicy::Mode::fixed_count);
  CHECK(c.detection.fixed_count == 2);
  CHECK(c.economy.p0 == Rational{10});
  CHECK(c.economy.l0 == Rational{10});
  CHECK(c.economy.p_min == Rational{2});
}

TEST_CASE("config validation rejects bad fields", "[config]") {
  ScenarioConfig c = replication_config();
  SECTION("fractions must sum to one") {
    c.population.fractions = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SECTION("population must be positive") {
    c.population.total = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SECTION("horizon must be at least one day") {
    c.horizon_days = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SECTION("dt must be positive and at most one second") {
    c.dt_s = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.dt_s = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SECTION("tariffs may not be empty") {
    c.tariffs.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SECTION("negative tariffs are rejected") {
    c.tariffs[0].f_res = Rational{-1};
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SECTION("network must be present") {
    c.network.ring.reset();
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SECTION("threads must be at least one") {
    c.threads = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

TEST_CASE("config json round-trips the replication preset", "[config]") {
  ScenarioConfig before = replication_config();
  Json doc = to_json(before);
  ScenarioConfig after = config_from_json(doc);
  after.validate();
  CHECK(after.mode == before.mode);
  CHECK(after.seed == before.seed);
  CHECK(after.horizon_days == before.horizon_days);
  CHECK(after.dt_s == before.dt_s);
  CHECK(after.network.ring->length_km == before.network.ring->length_km);
  CHECK(after.network.coverage_fraction == before.network.coverage_fraction);
  CHECK(after.population.total == before.population.total);
  CHECK(after.population.fractions == before.population.fractions);
  CHECK(after.anchors.A0 == before.anchors.A0);
  CHECK(after.anchors.B0 == before.anchors.B0);
  CHECK(after.anchors.C0 == before.anchors.C0);
  CHECK(after.economy.p0 == before.economy.p0);
  CHECK(after.economy.delta_T == before.economy.delta_T);
  CHECK(after.tariffs.size() == before.tariffs.size());
  CHECK(after.tariffs[0].f_res == before.tariffs[0].f_res);
  CHECK(after.rates.daily == before.rates.daily);
  CHECK(after.detection.fixed_count == before.detection.fixed_count);
  CHECK(after.detection.p_acc == before.detection.p_acc);
  // Emission is stable: same config, same document.
  CHECK(to_json(after) == doc);
}

TEST_CASE("config json overlays partial documents onto a base", "[config]") {
  ScenarioConfig base = replication_config();
  Json patch = Json::parse(R"({"population": {"total": 50}, "seed": 99})");
  ScenarioConfig c = config_from_json(patch, base);
  CHECK(c.population.total == 50);
  CHECK(c.seed == 99);
  // Everything else keeps the base values.
  CHECK(c.population.fractions == base.population.fractions);
  CHECK(c.network.ring->length_km == base.network.ring->length_km);
  CHECK(c.horizon_days == base.horizon_days);
}

TEST_CASE("config json parses rationals from strings and numbers", "[config]") {
  ScenarioConfig base;
  base.network.ring = RingSpec{1.0, 1, 1};
  base.population.total = 1;
  base.population.fractions = {1.0, 0.0, 0.0};
  Json patch = Json::parse(R"({"economy": {"p0": "21/2", "p_min": 3, "l0": 7.5}})");
  ScenarioConfig c = config_from_json(patch, base);
  CHECK(c.economy.p0 == Rational{21, 2});
  CHECK(c.economy.p_min == Rational{3});
  CHECK(c.economy.l0 == Rational{15, 2});
  Json bad = Json::parse(R"({"economy": {"p0": true}})");
  CHECK_THROWS_AS(config_from_json(bad, base), ConfigError);
}

TEST_CASE("set overrides navigate dotted paths", "[config]") {
  Json doc = to_json(replication_config());
  apply_set_override(doc, "population.total=500");
  apply_set_override(doc, "network.coverage_fraction=1.0");
  apply_set_override(doc, "mode=baseline");
  apply_set_override(doc, "population.fractions.1=0.5");
  apply_set_override(doc, "economy.p0=12");
  ScenarioConfig c = config_from_json(doc);
  CHECK(c.population.total == 500);
  CHECK(c.network.coverage_fraction == 1.0);
  CHECK(c.mode == SimMode::baseline);
  CHECK(c.population.fractions[1] == 0.5);
  CHECK(c.economy.p0 == Rational{12});
}

TEST_CASE("set overrides reject malformed input", "[config]") {
  Json doc = to_json(replication_config());
  CHECK_THROWS_AS(apply_set_override(doc, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(apply_set_override(doc, "=5"), ConfigError);
  CHECK_THROWS_AS(apply_set_override(doc, "population..total=5"), ConfigError);
  CHECK_THROWS_AS(apply_set_override(doc, "population.fractions.7=0.5"), ConfigError);
  CHECK_THROWS_AS(apply_set_override(doc, "seed.deeper=1"), ConfigError);
}

TEST_CASE("set overrides reject unknown field names", "[config]") {
  Json doc = to_json(replication_config());
  CHECK_THROWS_AS(apply_set_override(doc, "population.banana=3"), ConfigError);
  CHECK_THROWS_AS(apply_set_override(doc, "population.totla=500"), ConfigError);
  CHECK_THROWS_AS(apply_set_override(doc, "horizon_day=5"), ConfigError);
  CHECK_THROWS_AS(apply_set_override(doc, "economy.deltaT=7"), ConfigError);
  CHECK_THROWS_AS(apply_set_override(doc, "network.ring.lane=2"), ConfigError);
  try {
    apply_set_override(doc, "population.totla=500");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("totla") != std::string::npos);
    CHECK(msg.find("total") != std::string::npos);  // lists the known fields
  }
  // Rejected assignments must leave the document untouched.
  CHECK(doc == to_json(replication_config()));
}

TEST_CASE("set overrides may create the optional network containers", "[config]") {
  Json doc = to_json(replication_config());
  apply_set_override(doc, "network.closures=[{\"corridor\":0,\"lane\":1,\"begin_m\":100.0,\"end_m\":300.0}]");
  apply_set_override(doc, "network.closures.0.lane=2");
  ScenarioConfig c = config_from_json(doc);
  REQUIRE(c.network.closures.size() == 1);
  CHECK(c.network.closures[0].lane == 2);
  CHECK(c.network.closures[0].begin_m == 100.0);

  Json grid_doc = to_json(replication_config());
  apply_set_override(grid_doc, "network.ring=null");
  apply_set_override(grid_doc, "network.grid.rows=2");
  apply_set_override(grid_doc, "network.grid.cols=3");
  ScenarioConfig g = config_from_json(grid_doc);
  CHECK_FALSE(g.network.ring.has_value());
  REQUIRE(g.network.grid.has_value());
  CHECK(g.network.grid->rows == 2);
  CHECK(g.network.grid->cols == 3);
}

TEST_CASE("set override values fall back to strings", "[config]") {
  Json doc = to_json(replication_config());
  apply_set_override(doc, "detection.mode=radius");  // bare word, not valid JSON
  apply_set_override(doc, "detection.radius_m=75");
  ScenarioConfig c = config_from_json(doc);
  CHECK(c.detection.mode == DetectionPolicy::Mode::radius);
  CHECK(c.detection.radius_m == 75.0);
}

TEST_CASE("presets are known by name", "[config]") {
  CHECK(preset("replication").mode == SimMode::cats);
  CHECK(preset("baseline").mode == SimMode::baseline);
  CHECK(preset("baseline").population.total == preset("replication").population.total);
  CHECK(preset("default").population.total == 0);
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("mode names round-trip", "[config]") {
  CHECK(mode_from_string(to_string(SimMode::cats)) == SimMode::cats);
  CHECK(mode_from_string(to_string(SimMode::baseline)) == SimMode::baseline);
  CHECK_THROWS_AS(mode_from_string("fast"), ConfigError);
}

TEST_CASE("replication preset serialization is stable", "[config]") {
  std::ifstream in(std::string(CATS_GOLDEN_DIR) + "/replication_preset.json", std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == to_json(replication_config()).dump(2) + "\n");
}
