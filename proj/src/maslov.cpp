#include "geodex/maslov.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "geodex/errors.hpp"

namespace geodex::maslov {

namespace {

Real det_one_minus(const MatX& psi) {
  return (MatX::Identity(psi.rows(), psi.cols()) - psi).determinant();
}

/// Orthonormal kernel basis of (1 - psi) by SVD; columns below threshold.
struct KernelData {
  MatX basis;
  Real min_singular;
};

KernelData kernel_of(const MatX& psi, Real tol) {
  const MatX m = MatX::Identity(psi.rows(), psi.cols()) - psi;
  Eigen::JacobiSVD<MatX> svd(m, Eigen::ComputeFullV);
  const VecX sing = svd.singularValues();
  int dim = 0;
  for (int i = 0; i < sing.size(); ++i)
    if (sing(i) <= tol) ++dim;
  KernelData out;
  out.min_singular = sing(sing.size() - 1);
  out.basis = svd.matrixV().rightCols(dim);
  return out;
}

struct Candidate {
  Real t;
  bool at_start = false;
  bool at_end = false;
};

}  // namespace

int signature(const MatX& sym, Real tol) {
  Eigen::SelfAdjointEigenSolver<MatX> es(symmetrized(sym));
  int pos = 0, neg = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const Real v = es.eigenvalues()(i);
    if (std::abs(v) <= tol)
      throw DegenerateFormError("quadratic form has an eigenvalue inside the zero tolerance");
    if (v > 0)
      ++pos;
    else
      ++neg;
  }
  return pos - neg;
}

MatX crossing_form(const SymplecticPath& path, Real t, const MatX& kernel) {
  const MatX s = path.generator(t);
  return symmetrized(MatX(-kernel.transpose() * s * kernel));
}

std::vector<Crossing> find_crossings(const SymplecticPath& path, const CrossingOptions& opts) {
  const int nsteps = path.steps();
  const Real kernel_tol = opts.kernel_tol_scale * (1.0 + path.max_norm());

  std::vector<Real> d(nsteps + 1);
  Real dmax = 0.0;
  for (int k = 0; k <= nsteps; ++k) {
    d[k] = det_one_minus(path.at(k));
    dmax = std::max(dmax, std::abs(d[k]));
  }
  const Real dip_tol = opts.dip_fraction * (1.0 + dmax);

  std::vector<Candidate> candidates;

  // Runs of samples with |d| below the dip threshold.
  int k = 0;
  while (k <= nsteps) {
    if (std::abs(d[k]) > dip_tol) {
      ++k;
      continue;
    }
    int j = k;
    while (j + 1 <= nsteps && std::abs(d[j + 1]) <= dip_tol) ++j;
    const bool touches_start = (k == 0);
    const bool touches_end = (j == nsteps);
    if (touches_start) candidates.push_back({path.t_begin(), true, false});
    if (touches_end) candidates.push_back({path.t_end(), false, true});
    if (!touches_start && !touches_end) {
      if (j - k > std::max(8, nsteps / 20))
        throw ResolutionError("crossing cluster unresolvable at grid resolution");
      // Refine to the minimizer of |d| by ternary search over the run.
      Real lo = path.time_of(std::max(0, k - 1));
      Real hi = path.time_of(std::min(nsteps, j + 1));
      while (hi - lo > opts.t_tol) {
        const Real m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (std::abs(det_one_minus(path.value(m1))) < std::abs(det_one_minus(path.value(m2))))
          hi = m2;
        else
          lo = m1;
      }
      candidates.push_back({0.5 * (lo + hi), false, false});
    } else if (j - k >= 1 && !(touches_start && touches_end)) {
      // A run anchored at one endpoint may hide an interior minimum as well.
      int kmin = k;
      for (int i = k; i <= j; ++i)
        if (std::abs(d[i]) < std::abs(d[kmin])) kmin = i;
      if (kmin != 0 && kmin != nsteps && kmin > k && kmin < j) {
        Real lo = path.time_of(kmin - 1), hi = path.time_of(kmin + 1);
        while (hi - lo > opts.t_tol) {
          const Real m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
          if (std::abs(det_one_minus(path.value(m1))) < std::abs(det_one_minus(path.value(m2))))
            hi = m2;
          else
            lo = m1;
        }
        candidates.push_back({0.5 * (lo + hi), false, false});
      }
    }
    k = j + 1;
  }

  // Sign changes between consecutive samples (outside dip runs).
  for (int i = 0; i < nsteps; ++i) {
    if (d[i] == 0.0 || d[i + 1] == 0.0) continue;
    if ((d[i] > 0) == (d[i + 1] > 0)) continue;
    Real lo = path.time_of(i), hi = path.time_of(i + 1);
    Real dlo = d[i];
    while (hi - lo > opts.t_tol) {
      const Real mid = 0.5 * (lo + hi);
      const Real dm = det_one_minus(path.value(mid));
      if ((dm > 0) == (dlo > 0)) {
        lo = mid;
        dlo = dm;
      } else {
        hi = mid;
      }
    }
    candidates.push_back({0.5 * (lo + hi), false, false});
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.t < b.t; });
  std::vector<Crossing> crossings;
  for (const Candidate& c : candidates) {
    if (!crossings.empty() && !c.at_end &&
        std::abs(c.t - crossings.back().t) < 64.0 * opts.t_tol)
      continue;
    const MatX psi = c.at_start ? path.at(0) : (c.at_end ? path.at(nsteps) : path.value(c.t));
    const KernelData kd = kernel_of(psi, kernel_tol);
    if (kd.basis.cols() == 0) continue;  // dip without an actual kernel
    Crossing cr;
    cr.t = c.t;
    cr.at_start = c.at_start;
    cr.at_end = c.at_end;
    cr.kernel = kd.basis;
    cr.min_singular = kd.min_singular;
    cr.form = crossing_form(path, c.t, kd.basis);
    Eigen::SelfAdjointEigenSolver<MatX> es(cr.form);
    cr.regular = es.eigenvalues().cwiseAbs().minCoeff() > opts.form_tol;
    if (cr.regular) {
      int pos = 0, neg = 0;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        (es.eigenvalues()(i) > 0 ? pos : neg)++;
      cr.signature = pos - neg;
    }
    crossings.push_back(std::move(cr));
  }
  return crossings;
}

HalfInteger rs_index(const SymplecticPath& path, const IndexOptions& opts) {
  if (path.defect() > 1e-6)
    throw AccuracyError("path symplecticity defect too large for index computation");
  const std::vector<Crossing> crossings = find_crossings(path, opts.crossings);
  int twice = 0;
  for (const Crossing& c : crossings) {
    if (!c.regular)
      throw RegularityError("irregular crossing at t = " + std::to_string(c.t) +
                            " (crossing form singular); consider shift_generator");
    const bool endpoint = c.at_start || c.at_end;
    twice += endpoint ? c.signature : 2 * c.signature;
  }
  return HalfInteger(twice);
}

int cz_index(const SymplecticPath& path, const IndexOptions& opts) {
  const int n = path.half_dim();
  if ((path.at(0) - MatX::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() > 1e-10)
    throw AdmissibilityError("Conley-Zehnder index needs a path starting at the identity");
  if (std::abs(det_one_minus(path.at(path.steps()))) < opts.admissibility_tol)
    throw AdmissibilityError("path endpoint lies on the Maslov cycle");
  const HalfInteger rs = rs_index(path, opts);
  if (!rs.is_integer())
    throw NumericsError("Conley-Zehnder index came out as a strict half-integer");
  return rs.integer();
}

int unitary_loop_degree(const SymplecticPath& loop) {
  const int n = loop.half_dim();
  const int nsteps = loop.steps();
  if ((loop.at(0) - loop.at(nsteps)).cwiseAbs().maxCoeff() > 1e-8)
    throw ParameterError("unitary loop does not close up");
  std::complex<Real> prev;
  Real total_arg = 0.0;
  for (int k = 0; k <= nsteps; ++k) {
    const MatX& th = loop.at(k);
    if ((th.transpose() * th - MatX::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff() > 1e-8 ||
        symplectic_defect(th) > 1e-8)
      throw ParameterError("loop sample is not unitary symplectic");
    const MatX x = th.topLeftCorner(n, n);
    const MatX y = th.bottomLeftCorner(n, n);
    CMatX u(n, n);
    u.real() = x;
    u.imag() = y;
    const std::complex<Real> det = u.determinant();
    if (std::abs(det) < 0.5)
      throw NumericsError("unitary determinant too close to zero along the loop");
    if (k > 0) total_arg += std::arg(det / prev);
    prev = det;
  }
  const Real deg = total_arg / (2.0 * std::numbers::pi);
  const int deg_int = static_cast<int>(std::lround(deg));
  if (std::abs(deg - deg_int) > 1e-6)
    throw NumericsError("unitary loop winding is not an integer; refine sampling");
  return 2 * deg_int;
}

SymplecticPath shift_generator(const SymplecticPath& path, Real delta, int steps) {
  const MatFn base = path.generator_fn();
  const int n = path.half_dim();
  const MatFn shifted = [base, delta, n](Real t) {
    return MatX(base(t) + delta * MatX::Identity(2 * n, 2 * n));
  };
  sp::PathOptions opts;
  opts.steps = steps;
  return sp::fundamental_solution(shifted, opts, path.t_begin(), path.t_end());
}

}  // namespace geodex::maslov
