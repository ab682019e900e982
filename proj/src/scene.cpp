#include "camtraj/scene.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "camtraj/errors.hpp"
#include "json.hpp"

namespace camtraj {
namespace {

using nlohmann::json;

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string element(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw FieldError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FieldError(path, "expected a finite number");
  return v;
}

template <int N>
Eigen::Matrix<double, N, 1> vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(N)) {
    throw FieldError(path, "expected an array of " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int k = 0; k < N; ++k) v[k] = number(j[k], element(path, k));
  return v;
}

// Tracks consumed keys so unknown fields can be rejected.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : obj_(j), path_(std::move(path)) {
    if (!obj_.is_object()) {
      throw FieldError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* j = get(key);
    if (j == nullptr) throw FieldError(child(path_, key), "required field is missing");
    return *j;
  }

  void number_if_present(const std::string& key, double& out) {
    if (const json* j = get(key)) out = number(*j, child(path_, key));
  }

  template <int N>
  void vector_if_present(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
    if (const json* j = get(key)) out = vector<N>(*j, child(path_, key));
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        throw FieldError(child(path_, item.key()), "unknown field");
      }
    }
  }

  std::string path(const std::string& key) const { return child(path_, key); }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_quadrotor(const json& j, QuadrotorParams& q) {
  ObjectReader r(j, "quadrotor");
  r.number_if_present("mass", q.mass);
  r.number_if_present("inertia_z", q.inertia_z);
  r.vector_if_present<3>("gravity", q.gravity);
  r.vector_if_present<4>("u_min", q.u_min);
  r.vector_if_present<4>("u_max", q.u_max);
  r.finish();
}

void read_gimbal(const json& j, GimbalParams& g) {
  ObjectReader r(j, "gimbal");
  Eigen::Vector2d range;
  if (const json* v = r.get("yaw_range")) {
    range = vector<2>(*v, r.path("yaw_range"));
    g.yaw_min = range[0];
    g.yaw_max = range[1];
  }
  if (const json* v = r.get("pitch_range")) {
    range = vector<2>(*v, r.path("pitch_range"));
    g.pitch_min = range[0];
    g.pitch_max = range[1];
  }
  r.vector_if_present<2>("rate_min", g.rate_min);
  r.vector_if_present<2>("rate_max", g.rate_max);
  r.finish();
}

void read_weights(const json& j, Weights& w) {
  ObjectReader r(j, "weights");
  r.number_if_present("keyframe", w.keyframe);
  r.number_if_present("orientation", w.orientation);
  Eigen::Vector3d v;
  if (const json* p = r.get("position_derivative")) {
    v = vector<3>(*p, r.path("position_derivative"));
    w.position_derivative = {v[0], v[1], v[2]};
  }
  if (const json* p = r.get("angle_derivative")) {
    v = vector<3>(*p, r.path("angle_derivative"));
    w.angle_derivative = {v[0], v[1], v[2]};
  }
  r.number_if_present("gimbal_centering", w.gimbal_centering);
  r.number_if_present("input_regularization", w.input_regularization);
  r.finish();
}

Keyframe read_keyframe(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  Keyframe kf;
  kf.time = number(r.require("time"), r.path("time"));
  kf.position = vector<3>(r.require("position"), r.path("position"));
  r.number_if_present("yaw", kf.yaw);
  r.number_if_present("pitch", kf.pitch);
  r.finish();
  return kf;
}

State read_initial_state(const json& j) {
  ObjectReader r(j, "initial_state");
  State x = State::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
  r.vector_if_present<3>("position", v);
  x.segment<3>(state::kX) = v;
  v.setZero();
  r.vector_if_present<3>("velocity", v);
  x.segment<3>(state::kVx) = v;
  r.number_if_present("body_yaw", x[state::kBodyYaw]);
  r.number_if_present("body_yaw_rate", x[state::kBodyYawRate]);
  r.number_if_present("gimbal_yaw", x[state::kGimbalYaw]);
  r.number_if_present("gimbal_pitch", x[state::kGimbalPitch]);
  r.finish();
  return x;
}

TimeOptConfig read_time_opt(const json& j, double dt) {
  ObjectReader r(j, "time_opt");
  TimeOptConfig c;
  c.h = dt;
  c.min_gap = dt;
  if (const json* m = r.get("mode")) {
    if (*m == "free_end") {
      c.mode = EndMode::kFreeEnd;
    } else if (*m == "fixed_end") {
      c.mode = EndMode::kFixedEnd;
    } else {
      throw FieldError(r.path("mode"), "expected \"free_end\" or \"fixed_end\"");
    }
  }
  r.number_if_present("w", c.w);
  r.number_if_present("h", c.h);
  if (const json* m = r.get("max_iters")) {
    if (!m->is_number_integer()) throw FieldError(r.path("max_iters"), "expected an integer");
    c.max_iters = m->get<int>();
  }
  r.number_if_present("rel_tol", c.rel_tol);
  r.number_if_present("min_gap", c.min_gap);
  r.number_if_present("max_step", c.max_step);
  r.finish();
  return c;
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw FieldError(path, what);
}

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

void SceneSpec::validate() const {
  require(dt > 0.0, "dt", "must be positive");

  const QuadrotorParams& q = quadrotor;
  require(q.mass > 0.0, "quadrotor.mass", "must be positive");
  require(q.inertia_z > 0.0, "quadrotor.inertia_z", "must be positive");
  const Eigen::Vector4d hover = q.hover_input();
  for (int k = 0; k < 4; ++k) {
    require(q.u_min[k] < q.u_max[k], element("quadrotor.u_max", k),
            "must exceed quadrotor.u_min[" + std::to_string(k) + "]");
    const std::string hover_note = "hover input " + std::to_string(hover[k]) +
                                   " must lie strictly inside [u_min, u_max]";
    require(q.u_min[k] < hover[k], element("quadrotor.u_min", k), hover_note);
    require(hover[k] < q.u_max[k], element("quadrotor.u_max", k), hover_note);
  }

  require(gimbal.yaw_min < gimbal.yaw_max, "gimbal.yaw_range", "must be a non-empty interval");
  require(gimbal.pitch_min < gimbal.pitch_max, "gimbal.pitch_range",
          "must be a non-empty interval");
  for (int k = 0; k < 2; ++k) {
    require(gimbal.rate_min[k] < 0.0, element("gimbal.rate_min", k), "must be negative");
    require(gimbal.rate_max[k] > 0.0, element("gimbal.rate_max", k), "must be positive");
  }

  auto nonneg = [](double v, const std::string& path) {
    require(v >= 0.0, path, "must be >= 0");
  };
  nonneg(weights.keyframe, "weights.keyframe");
  nonneg(weights.orientation, "weights.orientation");
  nonneg(weights.gimbal_centering, "weights.gimbal_centering");
  nonneg(weights.input_regularization, "weights.input_regularization");
  bool any_pos = false;
  bool any_ang = false;
  for (std::size_t k = 0; k < 3; ++k) {
    nonneg(weights.position_derivative[k], element("weights.position_derivative", k));
    nonneg(weights.angle_derivative[k], element("weights.angle_derivative", k));
    any_pos |= weights.position_derivative[k] > 0.0;
    any_ang |= weights.angle_derivative[k] > 0.0;
  }
  require(any_pos, "weights.position_derivative", "at least one entry must be > 0");
  require(any_ang, "weights.angle_derivative", "at least one entry must be > 0");

  require(!keyframes.empty(), "keyframes", "at least one keyframe is required");
  require(keyframes.front().time == 0.0, "keyframes[0].time", "must be 0");
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    const std::string path = element("keyframes", j);
    if (j > 0) {
      require(keyframes[j].time > keyframes[j - 1].time, path + ".time",
              "must be greater than keyframes[" + std::to_string(j - 1) + "].time");
    }
    require(keyframes[j].pitch >= gimbal.pitch_min && keyframes[j].pitch <= gimbal.pitch_max,
            path + ".pitch", "must lie within gimbal.pitch_range");
  }
  keyframe_stages(keyframes, dt);  // CollisionError on shared stages

  if (initial_state) {
    const double yaw = (*initial_state)[state::kGimbalYaw];
    const double pitch = (*initial_state)[state::kGimbalPitch];
    require(yaw >= gimbal.yaw_min && yaw <= gimbal.yaw_max, "initial_state.gimbal_yaw",
            "must lie within gimbal.yaw_range");
    require(pitch >= gimbal.pitch_min && pitch <= gimbal.pitch_max,
            "initial_state.gimbal_pitch", "must lie within gimbal.pitch_range");
  }

  for (std::size_t j = 1; j < lookat_keyframes.size(); ++j) {
    require(lookat_keyframes[j].time > lookat_keyframes[j - 1].time,
            element("lookat_keyframes", j) + ".time", "must be strictly increasing");
  }

  if (time_opt) {
    const TimeOptConfig& c = *time_opt;
    require(c.w >= 0.0, "time_opt.w", "must be >= 0");
    require(c.mode != EndMode::kFreeEnd || c.w > 0.0, "time_opt.w",
            "must be > 0 in free_end mode");
    require(c.h >= dt - 1e-9, "time_opt.h", "must be at least dt");
    require(c.min_gap >= dt - 1e-9, "time_opt.min_gap", "must be at least dt");
    require(c.max_iters >= 0, "time_opt.max_iters", "must be >= 0");
    require(c.rel_tol >= 0.0, "time_opt.rel_tol", "must be >= 0");
    require(c.max_step > 0.0, "time_opt.max_step", "must be > 0");
  }
}

TimingContext SceneSpec::timing_context() const {
  TimingContext ctx;
  ctx.keyframes = keyframes;
  ctx.quad = quadrotor;
  ctx.gimbal = gimbal;
  ctx.weights = weights;
  ctx.dt = dt;
  ctx.initial_state = initial_state;
  return ctx;
}

PlanOptions SceneSpec::plan_options() const {
  PlanOptions options;
  options.initial_state = initial_state;
  return options;
}

SceneSpec parse_scene(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Convert the byte offset into a line/column pair.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(line, column, e.what());
  }

  SceneSpec scene;
  ObjectReader r(doc, "");
  if (const json* d = r.get("description")) {
    if (!d->is_string()) throw FieldError("description", "expected a string");
    scene.description = d->get<std::string>();
  }
  r.number_if_present("dt", scene.dt);
  if (const json* q = r.get("quadrotor")) read_quadrotor(*q, scene.quadrotor);
  if (const json* g = r.get("gimbal")) read_gimbal(*g, scene.gimbal);
  if (const json* w = r.get("weights")) read_weights(*w, scene.weights);

  const json& kfs = r.require("keyframes");
  if (!kfs.is_array()) throw FieldError("keyframes", "expected an array");
  for (std::size_t j = 0; j < kfs.size(); ++j) {
    scene.keyframes.push_back(read_keyframe(kfs[j], element("keyframes", j)));
  }
  if (const json* x0 = r.get("initial_state")) scene.initial_state = read_initial_state(*x0);
  if (const json* la = r.get("lookat_keyframes")) {
    if (!la->is_array()) throw FieldError("lookat_keyframes", "expected an array");
    for (std::size_t j = 0; j < la->size(); ++j) {
      const std::string path = element("lookat_keyframes", j);
      ObjectReader lr((*la)[j], path);
      LookAtKeyframe k;
      k.time = number(lr.require("time"), lr.path("time"));
      k.target = vector<3>(lr.require("target"), lr.path("target"));
      lr.finish();
      scene.lookat_keyframes.push_back(k);
    }
  }
  if (const json* t = r.get("time_opt")) scene.time_opt = read_time_opt(*t, scene.dt);
  r.finish();

  scene.validate();
  return scene;
}

std::string serialize_scene(const SceneSpec& s) {
  json doc = json::object();
  doc["description"] = s.description;
  doc["dt"] = s.dt;
  doc["quadrotor"] = {{"mass", s.quadrotor.mass},
                      {"inertia_z", s.quadrotor.inertia_z},
                      {"gravity", to_json(s.quadrotor.gravity)},
                      {"u_min", to_json(s.quadrotor.u_min)},
                      {"u_max", to_json(s.quadrotor.u_max)}};
  doc["gimbal"] = {{"yaw_range", {s.gimbal.yaw_min, s.gimbal.yaw_max}},
                   {"pitch_range", {s.gimbal.pitch_min, s.gimbal.pitch_max}},
                   {"rate_min", to_json(s.gimbal.rate_min)},
                   {"rate_max", to_json(s.gimbal.rate_max)}};
  doc["weights"] = {{"keyframe", s.weights.keyframe},
                    {"orientation", s.weights.orientation},
                    {"position_derivative", s.weights.position_derivative},
                    {"angle_derivative", s.weights.angle_derivative},
                    {"gimbal_centering", s.weights.gimbal_centering},
                    {"input_regularization", s.weights.input_regularization}};
  json kfs = json::array();
  for (const Keyframe& kf : s.keyframes) {
    kfs.push_back({{"time", kf.time},
                   {"position", to_json(kf.position)},
                   {"yaw", kf.yaw},
                   {"pitch", kf.pitch}});
  }
  doc["keyframes"] = kfs;
  if (s.initial_state) {
    const State& x = *s.initial_state;
    doc["initial_state"] = {{"position", to_json(x.segment<3>(state::kX))},
                            {"velocity", to_json(x.segment<3>(state::kVx))},
                            {"body_yaw", x[state::kBodyYaw]},
                            {"body_yaw_rate", x[state::kBodyYawRate]},
                            {"gimbal_yaw", x[state::kGimbalYaw]},
                            {"gimbal_pitch", x[state::kGimbalPitch]}};
  }
  if (!s.lookat_keyframes.empty()) {
    json la = json::array();
    for (const LookAtKeyframe& k : s.lookat_keyframes) {
      la.push_back({{"time", k.time}, {"target", to_json(k.target)}});
    }
    doc["lookat_keyframes"] = la;
  }
  if (s.time_opt) {
    const TimeOptConfig& c = *s.time_opt;
    doc["time_opt"] = {{"mode", to_string(c.mode)},
                       {"w", c.w},
                       {"h", c.h},
                       {"max_iters", c.max_iters},
                       {"rel_tol", c.rel_tol},
                       {"min_gap", c.min_gap},
                       {"max_step", c.max_step}};
  }
  return doc.dump(2) + "\n";
}

SceneSpec load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str());
}

}  // namespace camtraj
