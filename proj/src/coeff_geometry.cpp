#include "thinlab/coeff_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "thinlab/errors.hpp"
#include "thinlab/grid.hpp"

namespace thinlab {

namespace {

std::string describe(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x(k);
  os << ")";
  return os.str();
}

double spectral_norm_sym(const Mat& S) {
  const SymmetricEigen e = jacobi_eigen(0.5 * (S + S.transpose()));
  return std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
}

}  // namespace

CoefficientField CoefficientField::identity(int n) {
  CoefficientField A;
  A.n = n;
  A.evaluator = [n](const Vec&) { return Mat(Mat::Identity(n, n)); };
  A.lambda = 1.0;
  A.Lambda = 1.0;
  A.alpha = 0.5;
  A.M = 1.0;
  A.name = "identity";
  return A;
}

CoefficientField CoefficientField::constant(const Mat& A0, double alpha) {
  const SymmetricEigen e = jacobi_eigen(A0);
  CoefficientField A;
  A.n = static_cast<int>(A0.rows());
  A.evaluator = [A0](const Vec&) { return A0; };
  A.lambda = std::min(1.0, e.values(0));
  A.Lambda = std::max(1.0, e.values(e.values.size() - 1));
  A.alpha = alpha;
  A.M = std::max({1.0 / A.lambda, A.Lambda, spectral_norm_sym(A0)});
  A.name = "constant";
  return A;
}

CoefficientField CoefficientField::lipschitz_example(int n) {
  CoefficientField A;
  A.n = n;
  A.evaluator = [n](const Vec& x) { return Mat(Mat::Identity(n, n) / (1.0 + 0.5 * x(0))); };
  // On (-1, 1): values in (2/3, 2), derivative bounded by 2.
  A.lambda = 2.0 / 3.0;
  A.Lambda = 2.0;
  A.alpha = 1.0;
  A.M = 2.0 + 2.0;
  A.name = "lipschitz_example";
  return A;
}

CoefficientField CoefficientField::holder(int n, double alpha, double eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  std::uniform_real_distribution<double> amp(0.5, 1.0);
  std::vector<Vec> centers;
  std::vector<double> amps;
  for (int k = 0; k < n; ++k) {
    Vec c = Vec::Zero(n);
    for (int j = 0; j + 1 < n; ++j) c(j) = unif(rng);
    centers.push_back(c);
    amps.push_back(eps * amp(rng));
  }
  CoefficientField A;
  A.n = n;
  A.evaluator = [n, alpha, centers, amps](const Vec& x) {
    Mat S = Mat::Identity(n, n);
    for (int k = 0; k < n; ++k) S(k, k) += amps[static_cast<std::size_t>(k)] * std::pow((x - centers[static_cast<std::size_t>(k)]).norm(), alpha);
    return S;
  };
  const double max_dist = 2.0 * std::sqrt(static_cast<double>(n));
  const double max_amp = *std::max_element(amps.begin(), amps.end());
  A.lambda = 1.0;
  A.Lambda = 1.0 + max_amp * std::pow(max_dist, alpha);
  A.alpha = alpha;
  // |x|^alpha has C^{0,alpha} seminorm 1.
  A.M = std::max(A.Lambda + max_amp, 1.0);
  std::ostringstream os;
  os << "holder(seed=" << seed << ")";
  A.name = os.str();
  return A;
}

CoefficientField CoefficientField::full(int n, double alpha, double offdiag, double eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat base = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = offdiag * unif(rng);
      base(i, j) = v;
      base(j, i) = v;
    }
  // keep the stencil an M-matrix: diagonal dominance of the constant part
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += std::abs(base(i, j));
    base(i, i) = std::max(1.0, off + 0.25);
  }
  Vec c = Vec::Zero(n);
  for (int j = 0; j + 1 < n; ++j) c(j) = 0.5 * unif(rng);
  CoefficientField A;
  A.n = n;
  A.evaluator = [n, alpha, eps, base, c](const Vec& x) {
    Mat S = base;
    const double bump = eps * std::pow((x - c).norm(), alpha);
    for (int k = 0; k < n; ++k) S(k, k) += bump;
    return S;
  };
  const SymmetricEigen e = jacobi_eigen(base);
  const double max_bump = eps * std::pow(2.5 * std::sqrt(static_cast<double>(n)), alpha);
  A.lambda = std::min(1.0, e.values(0));
  A.Lambda = std::max(1.0, e.values(e.values.size() - 1) + max_bump);
  A.alpha = alpha;
  A.M = std::max({1.0 / A.lambda, A.Lambda, spectral_norm_sym(base) + max_bump + eps});
  std::ostringstream os;
  os << "full(seed=" << seed << ")";
  A.name = os.str();
  return A;
}

EllipticityReport validate_ellipticity(const CoefficientField& A, const std::vector<Vec>& samples) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "validate_ellipticity: empty sample set");
  EllipticityReport rep;
  rep.min_quotient = std::numeric_limits<double>::infinity();
  rep.max_quotient = -std::numeric_limits<double>::infinity();
  std::vector<Mat> values;
  values.reserve(samples.size());
  for (const Vec& x : samples) {
    const Mat S = A(x);
    const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
    rep.symmetry_residual = std::max(rep.symmetry_residual, asym);
    if (asym > 1e-9) throw Error(ErrorKind::NonSymmetric, "A(x) not symmetric at x = " + describe(x));
    const SymmetricEigen e = jacobi_eigen(S);
    if (e.values(0) <= 0.0) {
      throw Error(ErrorKind::EllipticityViolated,
                  "A(x) not positive definite at x = " + describe(x) + ", xi = " + describe(e.vectors.col(0)));
    }
    rep.min_quotient = std::min(rep.min_quotient, e.values(0));
    rep.max_quotient = std::max(rep.max_quotient, e.values(e.values.size() - 1));
    values.push_back(S);
  }
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double d = (samples[i] - samples[j]).norm();
      if (d <= 0.0) continue;
      const double diff = spectral_norm_sym(values[i] - values[j]);
      rep.holder_estimate = std::max(rep.holder_estimate, diff / std::pow(d, A.alpha));
    }
  const double tol = 1e-12;
  rep.violates_lambda = rep.min_quotient < A.lambda * (1.0 - tol);
  rep.violates_Lambda = rep.max_quotient > A.Lambda * (1.0 + tol);
  rep.holder_exceeds_M = rep.holder_estimate > A.M;
  rep.constants_inconsistent = !(A.lambda <= 1.0 && 1.0 <= A.Lambda && 1.0 / A.lambda <= A.M && A.Lambda <= A.M);
  return rep;
}

SymmetricEigen jacobi_eigen(const Mat& S_in) {
  const int n = static_cast<int>(S_in.rows());
  Mat S = 0.5 * (S_in + S_in.transpose());
  Mat V = Mat::Identity(n, n);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += S(p, q) * S(p, q);
    if (off <= 1e-300 || std::sqrt(off) <= 1e-17 * S.norm()) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (S(p, q) == 0.0) continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * S(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return S(a, a) < S(b, b); });
  SymmetricEigen out;
  out.values = Vec(n);
  out.vectors = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    out.values(i) = S(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

Mat matrix_sqrt(const Mat& S) {
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, S.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::NotSPD, "matrix_sqrt: input not symmetric");
  const SymmetricEigen e = jacobi_eigen(S);
  if (e.values(0) <= 0.0) throw Error(ErrorKind::NotSPD, "matrix_sqrt: nonpositive eigenvalue");
  const Vec root = e.values.cwiseSqrt();
  Mat R = e.vectors * root.asDiagonal() * e.vectors.transpose();
  return 0.5 * (R + R.transpose());
}

Vec Frame::half_widths(double r) const {
  Vec w(dim());
  for (int k = 0; k < dim(); ++k) w(k) = r * std::sqrt(A0(k, k));
  return w;
}

Mat Frame::thin_block_inv() const {
  const int n = dim();
  return abar_inv.topLeftCorner(n - 1, n - 1);
}

Frame frame_from_matrix(const Mat& A0, const Vec& x0) {
  const int n = static_cast<int>(A0.rows());
  Frame f;
  f.x0 = x0;
  f.A0 = 0.5 * (A0 + A0.transpose());
  f.a = matrix_sqrt(f.A0);
  const Mat a_inv = f.a.inverse();
  f.O = Mat::Zero(n, n);
  // classical Gram-Schmidt on a^{-1} e_1, ..., a^{-1} e_{n-1}
  for (int i = 0; i + 1 < n; ++i) {
    Vec v = a_inv.col(i);
    Vec w = v;
    for (int j = 0; j < i; ++j) w -= v.dot(f.O.col(j)) * f.O.col(j);
    const double nw = w.norm();
    if (nw < 1e-12) throw Error(ErrorKind::DegenerateBasis, "deskew_frame: Gram-Schmidt pivot vanished");
    f.O.col(i) = w / nw;
  }
  const Vec an = f.a.col(n - 1);
  f.O.col(n - 1) = an / an.norm();
  f.abar = f.a * f.O;
  f.abar_inv = f.O.transpose() * a_inv;
  f.det_a = f.a.determinant();
  if (std::abs(x0(n - 1)) <= 1e-12) {
    const Vec Aen = f.A0.col(n - 1);
    Mat P = Mat::Identity(n, n);
    P.col(n - 1) -= 2.0 * Aen / f.A0(n - 1, n - 1);
    f.P = P;
  }
  return f;
}

Frame deskew_frame(const CoefficientField& A, const Vec& x0) { return frame_from_matrix(A(x0), x0); }

double conformal_factor(const Frame& frame, const Vec& z) {
  const double nz = z.norm();
  if (nz == 0.0) throw Error(ErrorKind::ZeroVector, "conformal_factor: z = 0");
  const Vec y = frame.A0.ldlt().solve(z);
  const Vec w = frame.a.ldlt().solve(z);
  return w.norm() / y.norm();
}

FrameCache::FrameCache(const CoefficientField& A, const Grid& grid) {
  keys_ = grid.thin_nodes();
  frames_.reserve(keys_.size());
  for (std::size_t idx : keys_) {
    Vec x = grid.node(idx);
    x(grid.dim() - 1) = 0.0;
    frames_.push_back(deskew_frame(A, x));
  }
}

bool FrameCache::contains(std::size_t node_index) const {
  return std::binary_search(keys_.begin(), keys_.end(), node_index);
}

const Frame& FrameCache::at(std::size_t node_index) const {
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), node_index);
  if (it == keys_.end() || *it != node_index)
    throw Error(ErrorKind::InvalidArgument, "FrameCache: node is not on the thin plane");
  return frames_[static_cast<std::size_t>(it - keys_.begin())];
}

}  // namespace thinlab
