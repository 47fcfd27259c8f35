#pragma once

// beta-atoms: candidates, certificates, generators, and finite atomic
// decompositions (upper bounds for the DS_beta norm only).

#include <string>
#include <vector>

#include "dss/grid_measure.hpp"
#include "dss/heat.hpp"

namespace dss {

/// Closed cube corner + [0, side]^d.
struct Cube {
  Point corner;
  double side = 1.0;
  Point center() const;
  bool contains(std::span<const double> x, double slack = 0.0) const;
};

struct AtomCandidate {
  GridMeasure a;
  Cube Q;
  double beta = 1.0;
};

struct AtomTolerances {
  double cancellation = 1e-10;  // relative to |a|
  double sup_slack = 0.01;
};

struct AtomCertificate {
  double beta = 0.0;
  bool support_ok = false;       // supp a in Q
  bool cancellation_ok = false;  // a(R^d) = 0
  bool sup_ok = false;           // heat extension bound
  bool variation_ok = false;     // |a| <= 1
  bool passed() const { return support_ok && cancellation_ok && sup_ok && variation_ok; }

  double support_overflow = 0.0;       // |a| outside Q
  double cancellation_residual = 0.0;  // |a(Q)|
  double sup_ratio = 0.0;              // max t^{(d-beta)/2} |e^{t}a| * l(Q)^beta
  double total_variation = 0.0;
  Point sup_location;
  double sup_t = 0.0;
  /// Slope of log max_x t^{(d-beta)/2}|e^{t}a(x)| against log t over the
  /// first decade of the t-grid; -beta/2 for an isolated point mass.
  double small_t_slope = 0.0;

  std::size_t x_samples = 0;
  double t_min = 0.0;
  double t_max = 0.0;
  int nodes_per_decade = 0;
  AtomTolerances tol;
};

/// t from (h/2)^2 to (4 * max(l(Q), diam))^2, 32 nodes per decade.
TGrid default_atom_tgrid(const AtomCandidate& c);

/// Support points, midpoints of consecutive support points, a uniform grid
/// over 4Q, and 64 far points out to distance 16 l(Q) from the center of Q.
std::vector<Point> default_atom_xgrid(const AtomCandidate& c);

AtomCertificate check_beta_atom(const AtomCandidate& c, const TGrid& tg,
                                std::span<const Point> xgrid,
                                const AtomTolerances& tol = {});
AtomCertificate check_beta_atom(const AtomCandidate& c, const AtomTolerances& tol = {});

/// sum over k in Z of (4 pi)^{-d/2} exp(-4^{k-1}) c 2^{(k+1) beta}: the bound
/// on sup_x t^{(d-beta)/2} |e^{t Delta} a|(x) for a measure with |a|(B(x, r)) <= c r^beta.
double series_bound(double c, double beta, int dim);

/// Cantor difference atom on Q = [0, 1]: mu - mu(. - 1/2) with the Cantor
/// measure on [0, 1/2] scaled to mass c2 = min(1/2, 0.9 / (2 C S)), where C is
/// the Frostman constant at unit mass and S = series_bound(1, beta, 1).
AtomCandidate make_frostman_atom(double beta, int depth);

struct LoopAtomOptions {
  double spacing = 1.0 / 256;
  double target = 0.9;  // series bound as a fraction of l(Q)^{-1}
};

/// Component `component` (0-based) of the curve measure of scale * polyline,
/// refined to segments of length <= spacing. Q is the bounding cube of the
/// support; the mass is scaled so that the series bound is target / l(Q)
/// and |a| <= 1.
AtomCandidate make_loop_atom(const std::vector<Point>& polyline, int component,
                             double scale, const LoopAtomOptions& opt = {});

/// Re-certifies a beta-atom at alpha < beta on the same samples.
AtomCertificate downgrade_check(const AtomCandidate& c, double alpha);
AtomCertificate downgrade_check(const AtomCandidate& c, double alpha, const TGrid& tg,
                                std::span<const Point> xgrid);

/// Mass-preserving dilation onto Q = [-1, 1]^d.
AtomCandidate normalize_to_standard(const AtomCandidate& c);

struct DecompositionTerm {
  double lambda = 0.0;
  AtomCandidate atom;
  AtomCertificate certificate;
};

struct AtomicDecomposition {
  std::vector<DecompositionTerm> terms;
  double budget() const;  // sum |lambda_i|
};

/// Certifies each atom with the default samples and appends it.
void add_term(AtomicDecomposition& dec, double lambda, AtomCandidate atom);

struct DsBound {
  double bound = 0.0;     // sum |lambda_i|; an upper bound for the DS_beta norm
  double residual = 0.0;  // max_j |<mu - sum lambda_i a_i, phi_j>|
  bool within_tolerance = false;
  bool all_certified = false;
};

/// 16 mollified indicators of dyadic sub-cubes of a cube enclosing all supports.
DsBound ds_norm_upper_bound(const AtomicDecomposition& dec, const GridMeasure& target,
                            double tolerance);

}  // namespace dss
