#include "vsds/motion_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace vsds {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t\r");
    const auto e = tok.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : tok.substr(b, e - b + 1));
  }
  return out;
}

// Open-curve corner cutting (Chaikin); endpoints preserved.
std::vector<Vec> chaikin(const std::vector<Vec>& pts, int iterations) {
  std::vector<Vec> cur = pts;
  for (int it = 0; it < iterations; ++it) {
    if (cur.size() < 3) break;
    std::vector<Vec> next;
    next.reserve(2 * cur.size());
    next.push_back(cur.front());
    for (size_t i = 0; i + 1 < cur.size(); ++i) {
      next.push_back(0.75 * cur[i] + 0.25 * cur[i + 1]);
      next.push_back(0.25 * cur[i] + 0.75 * cur[i + 1]);
    }
    next.push_back(cur.back());
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

PathPolyline PathPolyline::from_points(std::vector<Vec> points) {
  PathPolyline p;
  // Drop duplicate consecutive points; they would create zero-length segments.
  for (auto& pt : points) {
    if (p.pts.empty() || (pt - p.pts.back()).norm() > 1e-12) {
      p.pts.push_back(std::move(pt));
    }
  }
  p.cum_len.resize(p.pts.size(), 0.0);
  for (size_t i = 1; i < p.pts.size(); ++i) {
    p.cum_len[i] = p.cum_len[i - 1] + (p.pts[i] - p.pts[i - 1]).norm();
  }
  return p;
}

PathPolyline::Projection PathPolyline::project(const Vec& x) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec& a = pts[i];
    const Vec d = pts[i + 1] - a;
    const double len2 = d.squaredNorm();
    double u = len2 > 0.0 ? (x - a).dot(d) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const Vec q = a + u * d;
    const double dist = (x - q).norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.point = q;
      best.tangent = d / std::sqrt(len2);
      best.arc_length = cum_len[i] + u * std::sqrt(len2);
    }
  }
  return best;
}

Vec PathPolyline::at_arc_length(double s) const {
  s = std::clamp(s, 0.0, length());
  const auto it = std::upper_bound(cum_len.begin(), cum_len.end(), s);
  const size_t i = std::min<size_t>(std::distance(cum_len.begin(), it), cum_len.size() - 1);
  if (i == 0) return pts.front();
  const double seg = cum_len[i] - cum_len[i - 1];
  const double u = seg > 0.0 ? (s - cum_len[i - 1]) / seg : 0.0;
  return pts[i - 1] + u * (pts[i] - pts[i - 1]);
}

MotionField MotionField::linear(const Mat& gain) {
  if (gain.rows() != gain.cols() || gain.rows() < 1) {
    throw std::invalid_argument("linear field gain must be square");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (gain + gain.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("linear field gain must have positive symmetric part");
  }
  MotionField f;
  f.kind_ = FieldKind::Linear;
  f.dim_ = static_cast<int>(gain.rows());
  f.gain_ = gain;
  return f;
}

MotionField MotionField::min_jerk_line(const Vec& start, double avg_speed,
                                       const PathFieldParams& params) {
  require_finite(start, "start");
  const double len = start.norm();
  if (len <= 0.0) throw std::invalid_argument("min-jerk line start must differ from the origin");
  if (avg_speed <= 0.0) throw std::invalid_argument("avg_speed must be positive");

  MotionField f;
  f.kind_ = FieldKind::MinJerkLine;
  f.dim_ = static_cast<int>(start.size());
  f.params_ = params;

  std::vector<Vec> pts = {start, Vec::Zero(start.size())};
  f.path_ = PathPolyline::from_points(std::move(pts));

  // Speed as a function of covered fraction, from the closed-form
  // minimum-jerk profile sigma(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5.
  const int n_tab = 1025;
  f.mj_sigma_.resize(n_tab);
  f.mj_speed_.resize(n_tab);
  for (int i = 0; i < n_tab; ++i) {
    const double tau = static_cast<double>(i) / (n_tab - 1);
    f.mj_sigma_[i] = ((6.0 * tau - 15.0) * tau + 10.0) * tau * tau * tau;
    f.mj_speed_[i] = avg_speed * 30.0 * tau * tau * (1.0 - tau) * (1.0 - tau);
  }
  f.peak_speed_ = avg_speed * 1.875;
  return f;
}

MotionField MotionField::curve_preset(double radius, double sweep_rad, double speed,
                                      const PathFieldParams& params) {
  if (radius <= 0.0 || sweep_rad <= 0.0 || speed <= 0.0) {
    throw std::invalid_argument("curve preset parameters must be positive");
  }
  // Arc ending at the origin with tangent along -x there:
  //   p(theta) = radius * (sin(theta), 1 - cos(theta)), theta in [sweep, 0].
  const int n = 512;
  std::vector<Vec> pts;
  pts.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double theta = sweep_rad * (1.0 - static_cast<double>(i) / n);
    Vec p(2);
    p << radius * std::sin(theta), radius * (1.0 - std::cos(theta));
    pts.push_back(p);
  }
  return polyline_internal(pts, {speed}, params, FieldKind::CurvePreset);
}

MotionField MotionField::polyline(const std::vector<Vec>& waypoints,
                                  const std::vector<double>& speeds,
                                  const PathFieldParams& params) {
  if (waypoints.size() < 2) throw std::invalid_argument("polyline needs at least 2 waypoints");
  const std::vector<Vec> smooth = chaikin(waypoints, 2);
  return polyline_internal(smooth, speeds, params, FieldKind::Polyline);
}

namespace {
// Interpolates waypoint speeds over arc fraction; a single entry is constant.
double interp_speed(const std::vector<double>& speeds, double fraction) {
  if (speeds.size() == 1) return speeds.front();
  const double u = std::clamp(fraction, 0.0, 1.0) * (speeds.size() - 1);
  const size_t i = std::min<size_t>(static_cast<size_t>(u), speeds.size() - 2);
  const double w = u - static_cast<double>(i);
  return (1.0 - w) * speeds[i] + w * speeds[i + 1];
}
}  // namespace

MotionField MotionField::polyline_internal(const std::vector<Vec>& pts,
                                           const std::vector<double>& speeds,
                                           const PathFieldParams& params, FieldKind kind) {
  if (speeds.empty()) throw std::invalid_argument("polyline needs a nominal speed");
  for (double s : speeds) {
    if (!(s > 0.0)) throw std::invalid_argument("polyline speeds must be positive");
  }
  for (const Vec& p : pts) require_finite(p, "waypoint");
  if (pts.back().norm() > 1e-9) {
    throw std::invalid_argument("polyline must end at the origin (the global attractor)");
  }

  MotionField f;
  f.kind_ = kind;
  f.dim_ = static_cast<int>(pts.front().size());
  f.params_ = params;
  f.path_ = PathPolyline::from_points(pts);
  if (f.path_.pts.size() < 2) throw std::invalid_argument("polyline is degenerate");
  f.speed_at_pt_.resize(f.path_.pts.size());
  const double total = f.path_.length();
  for (size_t i = 0; i < f.path_.pts.size(); ++i) {
    f.speed_at_pt_[i] = interp_speed(speeds, total > 0.0 ? f.path_.cum_len[i] / total : 0.0);
  }
  return f;
}

MotionField MotionField::polyline_from_csv(const std::string& csv_path, double default_speed,
                                           const PathFieldParams& params) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open waypoint CSV: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(csv_path + ": missing header row");
  auto header = split_csv_line(line);
  bool has_speed = false;
  if (header.size() == 3 && header[0] == "x1" && header[1] == "x2" && header[2] == "speed") {
    has_speed = true;
  } else if (!(header.size() == 2 && header[0] == "x1" && header[1] == "x2")) {
    throw ConfigError(csv_path + ": header must be 'x1,x2' or 'x1,x2,speed'");
  }
  std::vector<Vec> pts;
  std::vector<double> speeds;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto tok = split_csv_line(line);
    if (tok.size() != header.size()) {
      throw ConfigError(csv_path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " columns");
    }
    try {
      Vec p(2);
      p << std::stod(tok[0]), std::stod(tok[1]);
      pts.push_back(p);
      speeds.push_back(has_speed ? std::stod(tok[2]) : default_speed);
    } catch (const std::exception&) {
      throw ConfigError(csv_path + ":" + std::to_string(lineno) + ": bad numeric value");
    }
  }
  if (pts.size() < 2) throw ConfigError(csv_path + ": needs at least 2 waypoints");
  return polyline(pts, speeds, params);
}

MotionField MotionField::preset(const std::string& name) {
  auto v2 = [](double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
  };
  if (name == "line") return min_jerk_line(v2(0.30, 0.20), 0.12);
  if (name == "curve") return curve_preset(0.28, 1.9, 0.15);
  if (name == "angle") {
    return polyline({v2(0.22, 0.30), v2(0.24, 0.06), v2(0.0, 0.0)}, {0.13});
  }
  if (name == "wshape") {
    return polyline({v2(0.32, 0.28), v2(0.26, 0.06), v2(0.20, 0.20), v2(0.12, 0.04),
                     v2(0.06, 0.16), v2(0.0, 0.0)},
                    {0.18});
  }
  throw ConfigError("unknown DS preset: " + name);
}

std::vector<std::string> MotionField::preset_names() { return {"line", "curve", "angle", "wshape"}; }

Vec MotionField::default_start() const {
  if (kind_ == FieldKind::Linear) return Vec::Zero(dim_);
  return path_.pts.front();
}

double MotionField::tangential_speed(double arc_pos) const {
  const double total = path_.length();
  const double fraction = total > 0.0 ? std::clamp(arc_pos / total, 0.0, 1.0) : 0.0;
  double v;
  double floor_speed;
  if (kind_ == FieldKind::MinJerkLine) {
    const auto it = std::upper_bound(mj_sigma_.begin(), mj_sigma_.end(), fraction);
    const size_t i = std::min<size_t>(std::distance(mj_sigma_.begin(), it), mj_sigma_.size() - 1);
    if (i == 0) {
      v = mj_speed_.front();
    } else {
      const double span = mj_sigma_[i] - mj_sigma_[i - 1];
      const double w = span > 0.0 ? (fraction - mj_sigma_[i - 1]) / span : 0.0;
      v = (1.0 - w) * mj_speed_[i - 1] + w * mj_speed_[i];
    }
    floor_speed = params_.min_speed_fraction * peak_speed_;
  } else {
    const auto it = std::upper_bound(path_.cum_len.begin(), path_.cum_len.end(), arc_pos);
    const size_t i =
        std::min<size_t>(std::distance(path_.cum_len.begin(), it), path_.cum_len.size() - 1);
    if (i == 0) {
      v = speed_at_pt_.front();
    } else {
      const double span = path_.cum_len[i] - path_.cum_len[i - 1];
      const double w = span > 0.0 ? (arc_pos - path_.cum_len[i - 1]) / span : 0.0;
      v = (1.0 - w) * speed_at_pt_[i - 1] + w * speed_at_pt_[i];
    }
    floor_speed = params_.min_speed_fraction * v;
  }
  return std::max(v, floor_speed);
}

Vec MotionField::eval(const Vec& x) const {
  require_finite(x, "x");
  if (x.size() != dim_) throw std::invalid_argument("state dimension mismatch");
  if (kind_ == FieldKind::Linear) return -gain_ * x;

  const double r = x.norm();
  if (r == 0.0) return Vec::Zero(dim_);

  const double w = smoothstep(r / params_.blend_radius);
  Vec f = -params_.blend_gain * x * (1.0 - w);
  if (w > 0.0) {
    const auto proj = path_.project(x);
    const double speed = tangential_speed(proj.arc_length);
    Vec f_path = speed * proj.tangent + params_.correction_gain * (proj.point - x);
    f += w * f_path;
  }
  return f;
}

std::vector<TimedState> integrate_open_loop(const MotionField& field, const Vec& x0, double dt,
                                            double t_final, const OpenLoopParams& params) {
  require_finite(x0, "x0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_final >= dt)) throw std::invalid_argument("t_final must be at least dt");

  std::vector<TimedState> out;
  Vec x = x0;
  out.push_back({0.0, x});
  if (x.norm() < params.convergence_radius) return out;

  const long steps = std::lround(t_final / dt);
  for (long k = 1; k <= steps; ++k) {
    const Vec k1 = field.eval(x);
    const Vec k2 = field.eval(x + 0.5 * dt * k1);
    const Vec k3 = field.eval(x + 0.5 * dt * k2);
    const Vec k4 = field.eval(x + dt * k3);
    x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > params.workspace_bound) {
      throw SimulationError("open-loop integration diverged at step " + std::to_string(k));
    }
    out.push_back({k * dt, x});
    if (x.norm() < params.convergence_radius) break;
  }
  return out;
}

std::vector<Vec> sample_local_attractors(const MotionField& field, const Vec& x0, int n, double dt,
                                         double t_horizon, const OpenLoopParams& params) {
  if (n < 2) throw std::invalid_argument("need at least 2 local attractors");
  auto traj = integrate_open_loop(field, x0, dt, t_horizon, params);
  if (traj.back().x.norm() >= params.convergence_radius) {
    throw SimulationError("integral curve did not reach the attractor within the horizon");
  }

  std::vector<Vec> pts;
  pts.reserve(traj.size() + 1);
  for (auto& s : traj) pts.push_back(std::move(s.x));
  pts.push_back(Vec::Zero(x0.size()));
  const PathPolyline curve = PathPolyline::from_points(std::move(pts));

  const double total = curve.length();
  if (total < 10.0 * params.convergence_radius) {
    throw SimulationError("integral curve shorter than numerical resolution");
  }

  std::vector<Vec> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    samples.push_back(curve.at_arc_length(total * i / (n - 1)));
  }
  samples.front() = x0;
  samples.back() = Vec::Zero(x0.size());
  return samples;
}

}  // namespace vsds
