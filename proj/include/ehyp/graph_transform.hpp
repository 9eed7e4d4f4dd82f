#pragma once

#include <string>
#include <vector>

#include "ehyp/admissible.hpp"
#include "ehyp/germ.hpp"
#include "ehyp/rates.hpp"

namespace ehyp {

struct TransformOptions {
  int max_newton = 50;
  double newton_tol = 1e-12;  ///< relative to max(r_out, |v_bar|)
  bool strict_class = false;  ///< class escape throws instead of warning
  double class_slack = 0.05;
  int degree = 0;             ///< 0 keeps the input degree
  bool check_class = true;
};

struct TransformStepReport {
  long n = 0;
  int newton_max_iter = 0;
  double newton_max_residual = 0;
  double domain_coverage = 0;
  bool class_ok = true;
  std::string class_violation;
  double class_magnitude = 0;
  bool params_valid = true;
};

struct TransformResult {
  AdmissibleManifold manifold;
  TransformStepReport report;
};

ClassParams class_at(const ParamSeq& params, long n);

/// Image of graph psi under one coordinate map, resampled on B^u(r_out).
TransformResult transform_step(const CoordMap& map, const AdmissibleManifold& in, double r_out,
                               const ClassParams& out_class, const TransformOptions& opt = {});

/// Graph transform at index n in the coordinates of the splitting.
TransformResult transform(const GermSequence& seq, const Splitting& split, const ParamSeq& params,
                          long n, const AdmissibleManifold& in, const TransformOptions& opt = {});

/// Value and derivative of the transformed graph at a single point v_bar.
struct GraphPoint {
  Vec preimage, value;
  Mat deriv;
  int iterations = 0;
  double residual = 0;
};
GraphPoint graph_image_at(const CoordMap& map, const AdmissibleManifold& in, const Vec& v_bar,
                          double scale, const TransformOptions& opt = {});

/// Largest distance from the graph at n+1 of the images of probe points on
/// the graph at n (probes whose image leaves B^u(r_{n+1}) are skipped).
double invariance_error(const CoordMap& map, const AdmissibleManifold& here,
                        const AdmissibleManifold& next);

/// Largest gap between the transformed graph and the next graph at points
/// away from the interpolation nodes.
double transform_residual(const CoordMap& map, const AdmissibleManifold& here,
                          const AdmissibleManifold& next, const TransformOptions& opt = {});

struct PushResult {
  long from = 0;
  std::vector<AdmissibleManifold> manifolds;  ///< indices from..to
  std::vector<TransformStepReport> reports;
  double invariance_error = 0;
  const AdmissibleManifold& at(long n) const { return manifolds.at(n - from); }
};

PushResult push(const GermSequence& seq, const Splitting& split, const ParamSeq& params,
                const AdmissibleManifold& start, long from, long to,
                const TransformOptions& opt = {});

struct ExpansionReport {
  double min_ratio = 0;  ///< min |F x - F y| / |x - y| over the pairs used
  double bound = 0;
  long pairs_used = 0, violations = 0;
};

/// Expansion of F_{m,n} between pairs of points on the graph at m whose
/// orbits stay over the graph domains. Ratios below bound * (1 - 1e-12)
/// count as violations.
ExpansionReport check_expansion(const GermSequence& seq, const Splitting& split,
                                const PushResult& family, long m, long n, double bound,
                                int pairs = 1000, std::uint64_t seed = 1);

struct AttractionReport {
  std::vector<double> ratios;  ///< vertical offset ratio per step
  std::vector<double> bounds;
  long violations = 0;
};

/// Vertical offsets |w_n - psi_n(v_n)| along the orbit of (v, w) at index m,
/// compared step by step against exp(log_bounds[k]).
AttractionReport check_attraction(const GermSequence& seq, const Splitting& split,
                                  const PushResult& family, long m, const Vec& v, const Vec& w,
                                  long steps, const std::vector<double>& log_bounds);

struct UnstableOptions {
  double tol = 1e-9;
  long k_max = 1024;
  TransformOptions transform;
};

struct UnstableResult {
  PushResult family;  ///< graphs for indices [-K, 0]
  long K = 0;
  bool converged = false;
  std::vector<std::pair<long, double>> history;  ///< (k, C0 change at index 0)
  double c0_residual = 0;
  double invariance_error = 0;
};

/// Limit of the graphs pushed from zero at -k to index 0, k doubling.
/// The sequence must contain the germs with indices [-k_max, -1].
UnstableResult unstable_solve(const GermSequence& seq, const Splitting& split,
                              const ParamSeq& params, const UnstableOptions& opt = {});

enum class Verdict { Member, NonMember, Inconclusive };
const char* verdict_name(Verdict v);

struct CharacterizationReport {
  Verdict verdict = Verdict::Inconclusive;
  bool backward_ok = false;
  double vertical_distance = 0;
  long steps_checked = 0;
};

/// Compares the backward-orbit criterion |F_{m,0}^{-1} x| <= C e^{m chi_bar}
/// over m in [-window, 0] with the vertical distance of x to the graph at 0.
CharacterizationReport check_characterization(const GermSequence& seq, const Splitting& split,
                                              const AdmissibleManifold& psi0, const Vec& x,
                                              double C, double chi_bar_u, long window);

}  // namespace ehyp
