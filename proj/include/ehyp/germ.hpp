#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ehyp/linalg.hpp"

namespace ehyp {

/// Axis-aligned box; an empty box (no bounds) contains everything.
struct Box {
  Vec lo, hi;
  bool contains(const Vec& x) const;
  static Box cube(int dim, double half_width);
};

/// A C^{1+alpha} map V_n -> V_{n+1} fixing the origin.
class Germ {
 public:
  using Fn = std::function<Vec(const Vec&)>;
  using JacFn = std::function<Mat(const Vec&)>;

  Germ() = default;
  /// jac may be empty (central differences are used), inverse may be empty
  /// (Newton is used). holder_hint, when set, is a known seminorm |Df|_alpha.
  Germ(int dim, Fn f, JacFn jac = {}, Box domain = {}, Fn inverse = {},
       std::optional<double> holder_hint = std::nullopt);

  int dim() const { return impl_->dim; }
  Vec operator()(const Vec& x) const { return impl_->f(x); }
  Mat jacobian(const Vec& x) const;
  bool in_domain(const Vec& x) const { return impl_->domain.contains(x); }
  const Box& domain() const { return impl_->domain; }
  std::optional<double> holder_hint() const { return impl_->holder_hint; }
  /// Preimage of y, seeded at Df(0)^{-1} y unless a seed is given.
  Vec inverse(const Vec& y, const Vec* seed = nullptr) const;
  /// Identity of the underlying map; stationary sequences share it.
  const void* id() const { return impl_.get(); }

  /// Germ with the output shifted by -f(0). Accepts |f(0)| <= tol, else throws.
  Germ centered(double tol = 1e-6) const;

 private:
  struct Impl {
    int dim = 0;
    Fn f;
    JacFn jac;
    Box domain;
    Fn inv;
    std::optional<double> holder_hint;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Central-difference Jacobian with step 1e-6 * max(1, |x|).
Mat fd_jacobian(const Germ::Fn& f, const Vec& x);

/// Germs f_n for n in [n_min, n_max].
class GermSequence {
 public:
  GermSequence() = default;
  /// Germs not fixing the origin are recentred when |f(0)| <= 1e-6; the
  /// affected indices are listed in recentred().
  GermSequence(long n_min, std::vector<Germ> germs, double alpha = 1.0);

  long n_min() const { return n_min_; }
  long n_max() const { return n_min_ + static_cast<long>(germs_.size()) - 1; }
  std::size_t size() const { return germs_.size(); }
  int dim() const { return germs_.empty() ? 0 : germs_.front().dim(); }
  double alpha() const { return alpha_; }
  const Germ& at(long n) const;
  bool contains(long n) const { return n >= n_min_ && n <= n_max(); }
  const std::vector<long>& recentred() const { return recentred_; }
  /// Germs restricted to [lo, hi].
  GermSequence slice(long lo, long hi) const;

 private:
  long n_min_ = 0;
  std::vector<Germ> germs_;
  double alpha_ = 1.0;
  std::vector<long> recentred_;
};

/// Orthonormal bases of E^u and E^s at one index.
struct SubspacePair {
  Mat eu, es;
  int u_dim() const { return static_cast<int>(eu.cols()); }
  int s_dim() const { return static_cast<int>(es.cols()); }
  int dim() const { return static_cast<int>(eu.rows()); }
  Mat basis() const;
};

/// Splitting E^u_n + E^s_n for n in [n_min, n_max].
class Splitting {
 public:
  Splitting() = default;
  Splitting(long n_min, std::vector<SubspacePair> pairs);
  static Splitting constant(const SubspacePair& p, long n_min, long n_max);
  long n_min() const { return n_min_; }
  long n_max() const { return n_min_ + static_cast<long>(pairs_.size()) - 1; }
  const SubspacePair& at(long n) const;
  bool contains(long n) const { return n >= n_min_ && n <= n_max(); }

 private:
  long n_min_ = 0;
  std::vector<SubspacePair> pairs_;
};

/// Cone around a centre subspace: vectors at angle <= zeta from it.
struct Cone {
  Mat center;
  double zeta = 0.0;
};

struct ConeField {
  long n_min = 0;
  std::vector<Cone> u, s;
  long n_max() const { return n_min + static_cast<long>(u.size()) - 1; }
};

/// Linear data of one germ.
struct LinearStep {
  double lambda_u = 0, lambda_s = 0;
  double theta = 0;       ///< angle between E^u_n and E^s_n
  double theta_next = 0;  ///< angle between E^u_{n+1} and E^s_{n+1}
  double holder = 0;      ///< Hölder seminorm estimate of Df_n
  double beta = 1;
};

struct LinearData {
  long n_min = 0;
  double alpha = 1.0;
  double L = 0.0;  ///< smallest constant with |lambda| <= L and beta_{n+1} <= e^L beta_n
  std::vector<LinearStep> steps;
  long n_max() const { return n_min + static_cast<long>(steps.size()) - 1; }
  const LinearStep& at(long n) const { return steps.at(n - n_min); }
  std::size_t size() const { return steps.size(); }
};

struct HolderEstimate {
  double certified = 0;     ///< max over sampled pairs, a lower bound
  double extrapolated = 0;  ///< heuristic limit, >= certified
};

/// Sampled Hölder seminorm of Df over the ball of radius r. The sample set
/// is nested in `samples`, so the certified value is monotone in it.
HolderEstimate holder_estimate(const Germ& g, double alpha, double r, int samples = 48);

struct LinearOptions {
  double holder_radius = 0.1;
  int holder_samples = 48;
  bool use_extrapolated = true;
};

LinearData extract_linear_data(const GermSequence& seq, const Splitting& split,
                               const LinearOptions& opt = {});

/// Smallest L compatible with the recorded rates and beta ratios.
double bound_L(const LinearData& lin);

/// F_{m,n} x = f_{n-1} o ... o f_m (x); identity when m == n.
Vec compose(const GermSequence& seq, long m, long n, const Vec& x);
Mat compose_jacobian(const GermSequence& seq, long m, long n, const Vec& x);

/// Splitting certified from cones by pushing the centre of K^u forward and
/// pulling the centre of K^s back over `window` steps.
Splitting cones_to_splitting(const GermSequence& seq, const ConeField& cones, int window = 20);

/// Map between split coordinate spaces: stacked (a, b) -> (a', b').
/// `a` is the coordinate that the graph transform treats as expanding.
struct CoordMap {
  int a_dim = 0, b_dim = 0;
  std::function<Vec(const Vec&)> apply;
  std::function<Mat(const Vec&)> jacobian;
  Mat A, B;  ///< diagonal blocks of the Jacobian at the origin

  Vec eval(const Vec& a, const Vec& b) const;
  /// g and h: the parts of the map beyond Av and Bw.
  Vec g(const Vec& a, const Vec& b) const;
  Vec h(const Vec& a, const Vec& b) const;
};

/// Express f_n as (v,w) -> (A v + g, B w + h) in the coordinates of the
/// splittings at n and n+1.
CoordMap nonlinear_split(const Germ& germ, const SubspacePair& from, const SubspacePair& to);

/// Same, for a general map with translated base points (used along orbits).
CoordMap split_map(const Germ::Fn& f, const Germ::JacFn& jac, const SubspacePair& from,
                   const SubspacePair& to);

/// Inverse of a coordinate map, with the roles of a and b swapped.
CoordMap swap_inverse(const CoordMap& m);

/// Lyapunov spectrum of the cocycle Df_n(0), n in [m, n), by QR iteration.
Eigen::VectorXd lyapunov_spectrum(const GermSequence& seq, long m, long n);

}  // namespace ehyp
