#include "omnidyn/config.hpp"

#include "omnidyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace omnidyn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kFormat = "omnidyn-config/1";

// Walks one JSON object, remembers which keys were consumed and rejects the rest.
class Block {
 public:
  Block(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      fail(path_.empty() ? "top level must be an object" : "must be an object");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  Block child(const std::string& key) {
    seen_.insert(key);
    return Block(node_.at(key), join(key));
  }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      out = as_number(unwrap(*v, key), key);
    }
  }

  // null clears the value
  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const json* v = take(key)) {
      if (v->is_null()) {
        out.reset();
      } else {
        out = as_number(unwrap(*v, key), key);
      }
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      const json& x = unwrap(*v, key);
      if (!x.is_number_integer()) {
        fail(join(key), "must be an integer");
      }
      out = x.get<int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      const json& x = unwrap(*v, key);
      if (!x.is_boolean()) {
        fail(join(key), "must be true or false");
      }
      out = x.get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) {
        fail(join(key), "must be a string");
      }
      out = v->get<std::string>();
    }
  }

  template <typename Array>
  void numbers(const std::string& key, Array& out) {
    if (const json* v = take(key)) {
      const json& x = unwrap(*v, key);
      if (!x.is_array() || x.size() != out.size()) {
        fail(join(key), "must be an array of " + std::to_string(out.size()) + " numbers");
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = as_number(x[i], key + "[" + std::to_string(i) + "]");
      }
    }
  }

  void vec3(const std::string& key, Vec3& out) {
    std::array<double, 3> a{out.x(), out.y(), out.z()};
    numbers(key, a);
    out = Vec3(a[0], a[1], a[2]);
  }

  // Unknown keys are almost always typos; refuse them.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) {
        fail(join(it.key()), "unknown key");
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const { fail(path_, what); }
  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + (path.empty() ? what : path + ": " + what));
  }

 private:
  const json* take(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) ? &node_.at(key) : nullptr;
  }

  // {"value": x, "source": "..."} -> x
  const json& unwrap(const json& v, const std::string& key) const {
    if (!v.is_object()) {
      return v;
    }
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (it.key() != "value" && it.key() != "source") {
        fail(join(key) + "." + it.key(), "unknown key");
      }
    }
    if (!v.contains("value")) {
      fail(join(key), "annotated value needs a \"value\" field");
    }
    if (v.contains("source")) {
      const json& s = v.at("source");
      if (!s.is_string() || (s != "paper" && s != "assumed")) {
        fail(join(key) + ".source", "must be \"paper\" or \"assumed\"");
      }
    }
    return v.at("value");
  }

  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) {
      fail(join(key), "must be a number");
    }
    return v.get<double>();
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_vehicle(Block b, VehicleParams& p) {
  b.number("mass", p.mass);
  if (b.has("inertia")) {
    std::array<double, 3> d{p.inertia(0, 0), p.inertia(1, 1), p.inertia(2, 2)};
    b.numbers("inertia", d);
    p.inertia = Vec3(d[0], d[1], d[2]).asDiagonal();
  }
  b.vec3("com_offset", p.com_offset);
  b.number("arm_length", p.arm_length);
  b.numbers("arm_azimuth", p.arm_azimuth);
  b.numbers("spin", p.spin);
  b.number("thrust_coeff", p.thrust_coeff);
  b.number("drag_coeff", p.drag_coeff);
  b.number("omega_sq_max", p.omega_sq_max);
  b.number("tilt_rate_max", p.tilt_rate_max);
  b.number("gravity", p.gravity);
  b.finish();
}

void read_gains(Block b, Gains& g) {
  b.number("position", g.position);
  b.number("velocity", g.velocity);
  b.number("attitude", g.attitude);
  b.number("angular_rate", g.angular_rate);
  b.finish();
}

void read_singularity(Block b, SingularityParams& s) {
  b.number("freeze_angle", s.freeze_angle);
  b.number("damping_angle", s.damping_angle);
  b.number("bias_threshold", s.bias_threshold);
  b.number("bias_magnitude", s.bias_magnitude);
  b.number("unwind_rate", s.unwind_rate);
  b.numbers("bias_direction", s.bias_direction);
  b.boolean("enabled", s.enabled);
  b.finish();
}

void read_allocation(Block b, AllocationOptions& a) {
  b.boolean("residual_correction", a.residual_correction);
  b.number("correction_damping", a.correction_damping);
  b.boolean("tilt_correction", a.tilt_correction);
  b.integer("correction_iterations", a.correction_iterations);
  b.finish();
}

void read_sim(Block b, SimConfig& s) {
  b.number("dt_physics", s.dt_physics);
  b.number("dt_control", s.dt_control);
  b.optional_number("duration", s.duration);
  b.vec3("initial_position_offset", s.initial_position_offset);
  if (b.has("disturbance")) {
    Block d = b.child("disturbance");
    d.vec3("force", s.disturbance.force);
    d.vec3("torque", s.disturbance.torque);
    d.finish();
  }
  b.finish();
}

ordered_json annotated(const ordered_json& v, const char* source) { return ordered_json{{"value", v}, {"source", source}}; }

template <typename Array>
ordered_json array(const Array& a) {
  ordered_json out = ordered_json::array();
  for (double v : a) {
    out.push_back(v);
  }
  return out;
}

ordered_json vec(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

// Line/column of the last byte the parser read (nlohmann reports it 1-based), plus that line.
std::string locate(const std::string& text, std::size_t byte) {
  const std::size_t at = std::min(byte > 0 ? byte - 1 : 0, text.size());
  std::size_t line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < at; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  const std::size_t column = at - line_start + 1;
  std::size_t line_end = text.find('\n', line_start);
  if (line_end == std::string::npos) {
    line_end = text.size();
  }
  std::ostringstream os;
  os << "line " << line << ", column " << column << ": " << text.substr(line_start, line_end - line_start);
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  auto check = [](const char* block, auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("config: ") + block + ": " + e.what());
    }
  };
  check("vehicle", [&] { setup.vehicle.validate(); });
  check("gains", [&] { setup.gains.validate(); });
  check("singularity", [&] { setup.singularity.validate(); });
  check("allocation", [&] { setup.allocation.validate(); });
  check("sim", [&] { setup.sim.validate(); });
  if (n_dirs < 1) {
    throw ConfigError("config: n_dirs must be at least 1");
  }
  if (output_dir.empty()) {
    throw ConfigError("config: output_dir must not be empty");
  }
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + locate(text, e.byte) + ": syntax error");
  }

  RunConfig cfg;
  Block top(root, "");
  std::string format = kFormat;
  top.string("format", format);
  if (format != kFormat) {
    top.fail("format", "expected \"" + std::string(kFormat) + "\", got \"" + format + "\"");
  }
  if (top.has("vehicle")) {
    read_vehicle(top.child("vehicle"), cfg.setup.vehicle);
  }
  if (top.has("gains")) {
    read_gains(top.child("gains"), cfg.setup.gains);
  }
  if (top.has("singularity")) {
    read_singularity(top.child("singularity"), cfg.setup.singularity);
  }
  if (top.has("allocation")) {
    read_allocation(top.child("allocation"), cfg.setup.allocation);
  }
  if (top.has("sim")) {
    read_sim(top.child("sim"), cfg.setup.sim);
  }
  top.string("output_dir", cfg.output_dir);
  top.string("experiment", cfg.experiment);
  top.integer("n_dirs", cfg.n_dirs);
  top.boolean("biased", cfg.biased);
  top.finish();

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::string dump_run_config(const RunConfig& c) {
  const VehicleParams& v = c.setup.vehicle;
  const SingularityParams& s = c.setup.singularity;
  const Gains& g = c.setup.gains;
  const AllocationOptions& a = c.setup.allocation;
  const SimConfig& sim = c.setup.sim;

  ordered_json j;
  j["format"] = kFormat;
  j["experiment"] = c.experiment;
  j["output_dir"] = c.output_dir;
  j["n_dirs"] = c.n_dirs;
  j["biased"] = c.biased;
  j["vehicle"] = {
      {"mass", annotated(v.mass, "paper")},
      {"inertia", annotated(array(std::array<double, 3>{v.inertia(0, 0), v.inertia(1, 1), v.inertia(2, 2)}), "assumed")},
      {"com_offset", vec(v.com_offset)},
      {"arm_length", annotated(v.arm_length, "assumed")},
      {"arm_azimuth", array(v.arm_azimuth)},
      {"spin", array(v.spin)},
      {"thrust_coeff", annotated(v.thrust_coeff, "assumed")},
      {"drag_coeff", annotated(v.drag_coeff, "assumed")},
      {"omega_sq_max", annotated(v.omega_sq_max, "assumed")},
      {"tilt_rate_max", annotated(v.tilt_rate_max, "assumed")},
      {"gravity", v.gravity},
  };
  j["gains"] = {
      {"position", annotated(g.position, "assumed")},
      {"velocity", annotated(g.velocity, "assumed")},
      {"attitude", annotated(g.attitude, "assumed")},
      {"angular_rate", annotated(g.angular_rate, "assumed")},
  };
  j["singularity"] = {
      {"freeze_angle", annotated(s.freeze_angle, "paper")},
      {"damping_angle", annotated(s.damping_angle, "paper")},
      {"bias_threshold", annotated(s.bias_threshold, "paper")},
      {"bias_magnitude", annotated(s.bias_magnitude, "paper")},
      {"unwind_rate", annotated(s.unwind_rate, "paper")},
      {"bias_direction", array(s.bias_direction)},
      {"enabled", s.enabled},
  };
  j["allocation"] = {
      {"residual_correction", a.residual_correction},
      {"correction_damping", a.correction_damping},
      {"tilt_correction", a.tilt_correction},
      {"correction_iterations", a.correction_iterations},
  };
  j["sim"] = {
      {"dt_physics", sim.dt_physics},
      {"dt_control", sim.dt_control},
      {"duration", sim.duration ? ordered_json(*sim.duration) : ordered_json(nullptr)},
      {"initial_position_offset", vec(sim.initial_position_offset)},
      {"disturbance", {{"force", vec(sim.disturbance.force)}, {"torque", vec(sim.disturbance.torque)}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace omnidyn
