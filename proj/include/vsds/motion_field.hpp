#pragma once

#include <string>
#include <vector>

#include "vsds/types.hpp"

namespace vsds {

/// Piecewise-linear path with cumulative arc length. Shared by the path-based
/// motion fields and by the trajectory metrics (distance / arc position of
/// the nearest path point).
struct PathPolyline {
  std::vector<Vec> pts;
  std::vector<double> cum_len;  // cum_len[i] = arc length from pts[0] to pts[i]

  static PathPolyline from_points(std::vector<Vec> points);

  double length() const { return cum_len.empty() ? 0.0 : cum_len.back(); }

  struct Projection {
    double distance = 0.0;    // |x - nearest path point|
    double arc_length = 0.0;  // arc position of the nearest point
    Vec point;                // nearest point on the path
    Vec tangent;              // unit tangent of the segment containing it
  };
  Projection project(const Vec& x) const;

  /// Point at a given arc-length position (clamped to [0, length]).
  Vec at_arc_length(double s) const;
};

/// Tuning of the path-following velocity fields (min-jerk line, curve
/// preset, polyline). The field is
///   f(x) = w * (speed * tangent + correction_gain * (proj(x) - x))
///        + (1 - w) * (-blend_gain * x)
/// with w = smoothstep(|x| / blend_radius), so the origin is an exact
/// attractor and the field never vanishes away from it.
struct PathFieldParams {
  double correction_gain = 8.0;  // 1/s
  double blend_radius = 0.05;    // m
  double blend_gain = 4.0;       // 1/s
  double min_speed_fraction = 0.08;  // floor on the tangential speed profile
};

enum class FieldKind { Linear, MinJerkLine, CurvePreset, Polyline };

/// First-order motion field f_g with a globally attractive equilibrium at
/// the origin. Immutable after construction; eval() is pure.
class MotionField {
 public:
  /// f(x) = -gain * x. gain must be square with strictly positive
  /// symmetric part.
  static MotionField linear(const Mat& gain);

  /// Straight segment from `start` to the origin with a minimum-jerk
  /// tangential speed profile of average speed `avg_speed`.
  static MotionField min_jerk_line(const Vec& start, double avg_speed,
                                   const PathFieldParams& params = {});

  /// Planar circular arc of the given radius sweeping `sweep_rad` radians
  /// into the origin, traversed at constant nominal speed.
  static MotionField curve_preset(double radius, double sweep_rad, double speed,
                                  const PathFieldParams& params = {});

  /// Path through waypoints with per-waypoint nominal speeds (speeds may
  /// have size 1 = constant). Corners are rounded (two corner-cutting
  /// passes) so the field stays numerically smooth.
  static MotionField polyline(const std::vector<Vec>& waypoints,
                              const std::vector<double>& speeds,
                              const PathFieldParams& params = {});

  /// Waypoint CSV with header "x1,x2[,speed]".
  static MotionField polyline_from_csv(const std::string& csv_path,
                                       double default_speed = 0.15,
                                       const PathFieldParams& params = {});

  /// Named planar presets: "line", "curve", "angle", "wshape".
  static MotionField preset(const std::string& name);
  static std::vector<std::string> preset_names();

  Vec eval(const Vec& x) const;

  int dim() const { return dim_; }
  FieldKind kind() const { return kind_; }

  /// Natural start point of the encoded path (origin for linear fields).
  Vec default_start() const;

  /// Path polyline of the encoded geometry (empty for linear fields).
  const PathPolyline& path() const { return path_; }

 private:
  MotionField() = default;
  static MotionField polyline_internal(const std::vector<Vec>& pts,
                                       const std::vector<double>& speeds,
                                       const PathFieldParams& params, FieldKind kind);

  FieldKind kind_ = FieldKind::Linear;
  int dim_ = 2;
  Mat gain_;            // Linear
  PathPolyline path_;   // path-based kinds
  std::vector<double> speed_at_pt_;  // nominal speed per path point
  PathFieldParams params_;
  // Min-jerk speed lookup: fraction-of-length -> tangential speed.
  std::vector<double> mj_sigma_;
  std::vector<double> mj_speed_;
  double peak_speed_ = 0.0;

  double tangential_speed(double arc_pos) const;
};

struct OpenLoopParams {
  double convergence_radius = 1e-4;  // m
  double workspace_bound = 1.0;      // per-axis box |x_i| <= bound
};

struct TimedState {
  double t;
  Vec x;
};

/// Fixed-step RK4 integration of xdot = f(x). Terminates early once
/// |x| < convergence_radius; throws SimulationError (naming the step) if the
/// state leaves the workspace box or becomes non-finite.
std::vector<TimedState> integrate_open_loop(const MotionField& field, const Vec& x0,
                                            double dt, double t_final,
                                            const OpenLoopParams& params = {});

/// n points on the integral curve from x0, equally spaced by arc length;
/// first is x0, last is the exact origin.
std::vector<Vec> sample_local_attractors(const MotionField& field, const Vec& x0, int n,
                                         double dt = 1e-3, double t_horizon = 60.0,
                                         const OpenLoopParams& params = {});

}  // namespace vsds
