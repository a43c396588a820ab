#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "cats/config.hpp"
#include "cats/csv.hpp"

namespace cats {

using Json = nlohmann::ordered_json;

namespace detail_json {

inline Json rational_to_json(const Rational& r) { return r.to_string(); }

inline Rational rational_from_json(const Json& j, const char* what) {
  if (j.is_string()) return Rational::parse(j.get<std::string>());
  if (j.is_number_integer()) return Rational{j.get<std::int64_t>()};
  if (j.is_number_float())
    return Rational::from_decimal(csv::format_double(j.get<double>()));
  throw ConfigError(std::string(what) + ": expected a number or a rational string");
}

inline Json params_to_json(const DrivingParams& p) {
  return Json{{"v0", p.v0},     {"T", p.T},     {"a_max", p.a_max},
              {"b_com", p.b_com}, {"delta", p.delta}, {"s0", p.s0},
              {"eta", p.eta},   {"mu1", p.mu1}, {"mu2", p.mu2},
              {"mu3", p.mu3},   {"delta_tau", p.delta_tau}};
}

inline void params_from_json(const Json& j, DrivingParams& p) {
  p.v0 = j.value("v0", p.v0);
  p.T = j.value("T", p.T);
  p.a_max = j.value("a_max", p.a_max);
  p.b_com = j.value("b_com", p.b_com);
  p.delta = j.value("delta", p.delta);
  p.s0 = j.value("s0", p.s0);
  p.eta = j.value("eta", p.eta);
  p.mu1 = j.value("mu1", p.mu1);
  p.mu2 = j.value("mu2", p.mu2);
  p.mu3 = j.value("mu3", p.mu3);
  p.delta_tau = j.value("delta_tau", p.delta_tau);
}

inline const char* kTypeNames[3] = {"conservative", "normal", "aggressive"};

}  // namespace detail_json

inline Json to_json(const ScenarioConfig& c) {
  using detail_json::params_to_json;
  using detail_json::rational_to_json;
  Json j;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["horizon_days"] = c.horizon_days;
  j["dt_s"] = c.dt_s;
  j["active_window_s"] = c.active_window_s;
  j["vehicle_length_m"] = c.vehicle_length_m;
  j["threads"] = c.threads;

  Json net;
  if (c.network.ring) {
    const RingSpec& r = *c.network.ring;
    net["ring"] = Json{{"length_km", r.length_km}, {"lanes", r.lanes}, {"segments", r.segments}};
  }
  if (c.network.grid) {
    const GridSpec& g = *c.network.grid;
    net["grid"] = Json{{"rows", g.rows},
                       {"cols", g.cols},
                       {"segment_km", g.segment_km},
                       {"lanes", g.lanes}};
  }
  if (!c.network.corridors.empty()) {
    Json arr = Json::array();
    for (const CorridorSpec& cs : c.network.corridors) {
      Json segs = Json::array();
      for (const SegmentSpec& s : cs.segments)
        segs.push_back(Json{{"length_m", s.length_m},
                            {"lane_count", s.lane_count},
                            {"jam_density_threshold", s.jam_density_threshold}});
      arr.push_back(Json{{"ring", cs.ring}, {"segments", segs}});
    }
    net["corridors"] = arr;
  }
  net["coverage_fraction"] = c.network.coverage_fraction;
  net["jam_density_threshold"] = c.network.jam_density_threshold;
  if (!c.network.closures.empty()) {
    Json arr = Json::array();
    for (const LaneClosure& cl : c.network.closures)
      arr.push_back(Json{{"corridor", cl.corridor},
                         {"lane", cl.lane},
                         {"begin_m", cl.begin_m},
                         {"end_m", cl.end_m}});
    net["closures"] = arr;
  }
  j["network"] = net;

  j["population"] = Json{{"total", c.population.total},
                         {"fractions", Json{c.population.fractions[0], c.population.fractions[1],
                                            c.population.fractions[2]}}};
  j["anchors"] = Json{{"A0", params_to_json(c.anchors.A0)},
                      {"B0", params_to_json(c.anchors.B0)},
                      {"C0", params_to_json(c.anchors.C0)}};
  j["economy"] = Json{{"p0", rational_to_json(c.economy.p0)},
                      {"p_min", rational_to_json(c.economy.p_min)},
                      {"p_floor_norm", rational_to_json(c.economy.p_floor_norm)},
                      {"l0", rational_to_json(c.economy.l0)},
                      {"delta_T", c.economy.delta_T},
                      {"congestion_fee", rational_to_json(c.economy.congestion_fee)}};
  Json tariffs = Json::array();
  for (const TariffEntry& t : c.tariffs)
    tariffs.push_back(
        Json{{"f_res", rational_to_json(t.f_res)}, {"f_cre", rational_to_json(t.f_cre)}});
  j["tariffs"] = tariffs;
  Json rates;
  for (int t = 0; t < 3; ++t)
    rates[detail_json::kTypeNames[t]] =
        Json{c.rates.daily[static_cast<std::size_t>(t)][0],
             c.rates.daily[static_cast<std::size_t>(t)][1]};
  j["rates"] = rates;
  j["detection"] =
      Json{{"mode", c.detection.mode == DetectionPolicy::Mode::fixed_count ? "fixed_count"
                                                                           : "radius"},
           {"fixed_count", c.detection.fixed_count},
           {"radius_m", c.detection.radius_m},
           {"p_acc", Json{c.detection.p_acc[0], c.detection.p_acc[1], c.detection.p_acc[2]}}};
  return j;
}

/// Overlays `j` onto `base`: absent keys keep the base value, so partial
/// configs and --set patches compose naturally.
inline ScenarioConfig config_from_json(const Json& j, ScenarioConfig base = ScenarioConfig{}) {
  using detail_json::params_from_json;
  using detail_json::rational_from_json;
  ScenarioConfig c = std::move(base);
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
  c.seed = j.value("seed", c.seed);
  c.horizon_days = j.value("horizon_days", c.horizon_days);
  c.dt_s = j.value("dt_s", c.dt_s);
  c.active_window_s = j.value("active_window_s", c.active_window_s);
  c.vehicle_length_m = j.value("vehicle_length_m", c.vehicle_length_m);
  c.threads = j.value("threads", c.threads);

  if (j.contains("network")) {
    const Json& net = j.at("network");
    if (net.contains("ring")) {
      if (net.at("ring").is_null()) {
        c.network.ring.reset();
      } else {
        const Json& r = net.at("ring");
        RingSpec rs = c.network.ring.value_or(RingSpec{});
        rs.length_km = r.value("length_km", rs.length_km);
        rs.lanes = r.value("lanes", rs.lanes);
        rs.segments = r.value("segments", rs.segments);
        c.network.ring = rs;
      }
    }
    if (net.contains("grid")) {
      if (net.at("grid").is_null()) {
        c.network.grid.reset();
      } else {
        const Json& g = net.at("grid");
        GridSpec gs = c.network.grid.value_or(GridSpec{});
        gs.rows = g.value("rows", gs.rows);
        gs.cols = g.value("cols", gs.cols);
        gs.segment_km = g.value("segment_km", gs.segment_km);
        gs.lanes = g.value("lanes", gs.lanes);
        c.network.grid = gs;
      }
    }
    if (net.contains("corridors")) {
      c.network.corridors.clear();
      for (const Json& cj : net.at("corridors")) {
        CorridorSpec cs;
        cs.ring = cj.value("ring", true);
        for (const Json& sj : cj.at("segments")) {
          SegmentSpec s;
          s.length_m = sj.value("length_m", 0.0);
          s.lane_count = sj.value("lane_count", 1);
          s.jam_density_threshold =
              sj.value("jam_density_threshold", c.network.jam_density_threshold);
          cs.segments.push_back(s);
        }
        c.network.corridors.push_back(std::move(cs));
      }
    }
    c.network.coverage_fraction = net.value("coverage_fraction", c.network.coverage_fraction);
    c.network.jam_density_threshold =
        net.value("jam_density_threshold", c.network.jam_density_threshold);
    if (net.contains("closures")) {
      c.network.closures.clear();
      for (const Json& cl : net.at("closures"))
        c.network.closures.push_back(LaneClosure{cl.value("corridor", 0), cl.value("lane", 0),
                                                 cl.value("begin_m", 0.0),
                                                 cl.value("end_m", 0.0)});
    }
  }

  if (j.contains("population")) {
    const Json& p = j.at("population");
    c.population.total = p.value("total", c.population.total);
    if (p.contains("fractions")) {
      const Json& f = p.at("fractions");
      if (!f.is_array() || f.size() != 3)
        throw ConfigError("population.fractions must be an array of three numbers");
      for (std::size_t t = 0; t < 3; ++t) c.population.fractions[t] = f.at(t).get<double>();
    }
  }
  if (j.contains("anchors")) {
    const Json& a = j.at("anchors");
    if (a.contains("A0")) params_from_json(a.at("A0"), c.anchors.A0);
    if (a.contains("B0")) params_from_json(a.at("B0"), c.anchors.B0);
    if (a.contains("C0")) params_from_json(a.at("C0"), c.anchors.C0);
  }
  if (j.contains("economy")) {
    const Json& e = j.at("economy");
    if (e.contains("p0")) c.economy.p0 = rational_from_json(e.at("p0"), "economy.p0");
    if (e.contains("p_min")) c.economy.p_min = rational_from_json(e.at("p_min"), "economy.p_min");
    if (e.contains("p_floor_norm"))
      c.economy.p_floor_norm = rational_from_json(e.at("p_floor_norm"), "economy.p_floor_norm");
    if (e.contains("l0")) c.economy.l0 = rational_from_json(e.at("l0"), "economy.l0");
    c.economy.delta_T = e.value("delta_T", c.economy.delta_T);
    if (e.contains("congestion_fee"))
      c.economy.congestion_fee =
          rational_from_json(e.at("congestion_fee"), "economy.congestion_fee");
  }
  if (j.contains("tariffs")) {
    c.tariffs.clear();
    for (const Json& t : j.at("tariffs"))
      c.tariffs.push_back(TariffEntry{rational_from_json(t.at("f_res"), "tariffs.f_res"),
                                      rational_from_json(t.at("f_cre"), "tariffs.f_cre")});
  }
  if (j.contains("rates")) {
    const Json& r = j.at("rates");
    for (int t = 0; t < 3; ++t) {
      const char* name = detail_json::kTypeNames[t];
      if (!r.contains(name)) continue;
      const Json& row = r.at(name);
      if (!row.is_array() || row.size() != 2)
        throw ConfigError(std::string("rates.") + name +
                          " must be [uncovered, covered] daily probabilities");
      c.rates.daily[static_cast<std::size_t>(t)][0] = row.at(0).get<double>();
      c.rates.daily[static_cast<std::size_t>(t)][1] = row.at(1).get<double>();
    }
  }
  if (j.contains("detection")) {
    const Json& d = j.at("detection");
    if (d.contains("mode")) {
      std::string m = d.at("mode").get<std::string>();
      if (m == "fixed_count")
        c.detection.mode = DetectionPolicy::Mode::fixed_count;
      else if (m == "radius")
        c.detection.mode = DetectionPolicy::Mode::radius;
      else
        throw ConfigError("detection.mode must be \"fixed_count\" or \"radius\"");
    }
    c.detection.fixed_count = d.value("fixed_count", c.detection.fixed_count);
    c.detection.radius_m = d.value("radius_m", c.detection.radius_m);
    if (d.contains("p_acc")) {
      const Json& p = d.at("p_acc");
      if (!p.is_array() || p.size() != 3)
        throw ConfigError("detection.p_acc must be an array of three probabilities");
      for (std::size_t t = 0; t < 3; ++t) c.detection.p_acc[t] = p.at(t).get<double>();
    }
  }
  return c;
}

namespace detail_json {

inline std::string known_object_keys(const Json& node) {
  std::string out;
  for (const auto& item : node.items()) {
    if (!out.empty()) out += ", ";
    out += item.key();
  }
  return out;
}

/// Serialized config with every optional container populated: the key
/// universe `--set` paths are checked against. Arrays hold one exemplar
/// element standing in for any index.
inline const Json& set_override_schema() {
  static const Json schema = [] {
    ScenarioConfig c;
    c.network.ring = RingSpec{};
    c.network.grid = GridSpec{};
    c.network.corridors = {CorridorSpec{true, {SegmentSpec{}}}};
    c.network.closures = {LaneClosure{}};
    c.tariffs = {TariffEntry{}};
    return to_json(c);
  }();
  return schema;
}

}  // namespace detail_json

/// Applies one `path.to.field=value` assignment to a config document.
/// The value is parsed as JSON when possible (numbers, booleans, arrays,
/// null) and taken as a string otherwise; numeric path segments index
/// arrays. Every object key on the path is checked against the config
/// schema, so a typo'd field name fails instead of silently simulating
/// the default; fields the schema knows but the document lacks (the
/// optional network containers and their interiors) are created.
inline void apply_set_override(Json& root, std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("--set expects path.to.field=value, got: " + std::string(assignment));
  std::string_view path = assignment.substr(0, eq);
  std::string_view value = assignment.substr(eq + 1);

  Json parsed;
  try {
    parsed = Json::parse(value);
  } catch (const Json::parse_error&) {
    parsed = std::string(value);
  }

  Json* node = &root;
  const Json* schema = &detail_json::set_override_schema();
  std::string parent = "the config root";
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    std::string key(path.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (key.empty()) throw ConfigError("--set path has an empty segment: " + std::string(path));
    bool last = dot == std::string_view::npos;
    bool numeric = key.find_first_not_of("0123456789") == std::string::npos;
    if (numeric && node->is_array()) {
      std::size_t idx = std::stoul(key);
      if (idx >= node->size())
        throw ConfigError("--set index " + key + " out of range in " + std::string(path));
      if (last) {
        (*node)[idx] = std::move(parsed);
        return;
      }
      node = &(*node)[idx];
      schema = schema != nullptr && schema->is_array() && !schema->empty() ? &(*schema)[0]
                                                                           : nullptr;
    } else {
      if (!node->is_object() && !node->is_null())
        throw ConfigError("--set path " + std::string(path) + " descends into a non-object");
      if (schema != nullptr) {
        if (!schema->is_object())
          throw ConfigError("--set path " + std::string(path) + " addresses elements of " +
                            parent + " before it exists; assign the whole array first");
        if (!schema->contains(key))
          throw ConfigError("--set path " + std::string(path) + " names unknown field '" + key +
                            "' (known: " + detail_json::known_object_keys(*schema) + ")");
      }
      if (last) {
        (*node)[key] = std::move(parsed);
        return;
      }
      node = &(*node)[key];
      schema = schema != nullptr ? &(*schema)[key] : nullptr;
    }
    parent = "'" + key + "'";
    start = dot + 1;
  }
}

/// Named starting points for experiments. "replication" is the reference
/// scenario; "baseline" is the same world with the mutual-supervision
/// economy replaced by camera-only enforcement; "default" is a blank
/// ScenarioConfig for fully hand-written files.
inline ScenarioConfig preset(std::string_view name) {
  if (name == "replication") return replication_config();
  if (name == "baseline") {
    ScenarioConfig c = replication_config();
    c.mode = SimMode::baseline;
    return c;
  }
  if (name == "default") return ScenarioConfig{};
  throw ConfigError("unknown preset: " + std::string(name) +
                    " (expected replication, baseline, or default)");
}

}  // namespace cats
