#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ehyp/closing.hpp"
#include "ehyp/germ.hpp"

namespace ehyp {

/// A germ sequence together with its splitting.
struct System {
  std::string name;
  GermSequence seq;
  Splitting split;
};

/// Names accepted by builtin().
std::vector<std::string> builtin_names();

/// Built-in systems. Common parameters: n_min, n_max (index range, default
/// 0..63) and alpha (default 1).
///   diag_linear      {mu = 2, lambda = 0.5}: (mu x, lambda y)
///   alt_3_half       (3x, y/2) at even n, (x/2, 3y) at odd n; E^u = R^2
///   pliss_blocks     scalar e^{lambda_n} x; {embed = false, mu_s = 0.5} adds a
///                    contracting coordinate
///   quad_hyperbolic  (2x + y^2, y/2 + x^2)
///   cat_germ         {matrix = [[2,1],[1,1]], x0 = [0,0]}: germs of a toral
///                    automorphism along the orbit of x0
///   uniform_setting  {mu = 2, lambda = 0.5, delta = 0.05, r0 = 0.5}
System builtin(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

/// The rate lambda_n of pliss_blocks.
double pliss_rate(long n);

/// System from a descriptor {dimension, alpha, range, maps, splitting}.
System system_from_descriptor(const nlohmann::json& desc);

struct ChartResult {
  GermSequence seq;
  Splitting split;
  double L = 0;  ///< rate, angle-distortion and Hölder bound observed near the orbit
};

/// Germs of a global map along an orbit x_0..x_p in orthonormal frames:
/// f_k(v) = frame_{k+1}^T (f(x_k + frame_k v) - x_{k+1}). Frames default to
/// the identity. The splitting pushes the first u_dim frame axes forward
/// and pulls the others back.
ChartResult chart_adapter(const Germ::Fn& f, const Germ::JacFn& jac,
                          const std::vector<Vec>& points, int u_dim,
                          const std::vector<Mat>& frames = {}, bool torus = false,
                          double alpha = 1.0, double probe_radius = 0.05, std::uint64_t seed = 1);

/// Orbit segment of the automorphism A of the torus starting at x0.
OrbitSegment torus_segment(const Mat& A, const Vec& x0, long p);

/// Orbit segment of a global map of R^d (splitting from orbit_splitting).
OrbitSegment map_segment(const Germ::Fn& f, const Germ::JacFn& jac, const Vec& x0, long p,
                         bool torus = false);

}  // namespace ehyp
