#include "shearstab/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace shearstab {

namespace {

// Real solve applied separately to the real and imaginary parts.
CVec solve_real(const Eigen::PartialPivLU<RMat>& lu, const CVec& rhs) {
  const RVec re = lu.solve(rhs.real().eval());
  const RVec im = lu.solve(rhs.imag().eval());
  CVec out(rhs.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

}  // namespace

ChebGrid ChebGrid::build(int n, double a, double b) {
  if (n < 4) throw PreconditionError("ChebGrid: need at least 4 nodes");
  if (!(b > a)) throw PreconditionError("ChebGrid: empty interval");
  ChebGrid g;
  g.n = n;
  g.a = a;
  g.b = b;
  const int N = n - 1;
  const double half = 0.5 * (b - a);
  RVec x(n);
  for (int j = 0; j < n; ++j) x(j) = std::sin(pi * (N - 2.0 * j) / (2.0 * N));
  g.nodes = (a + half * (x.array() + 1.0)).matrix();
  g.nodes(0) = b;
  g.nodes(N) = a;

  RMat d(n, n);
  for (int i = 0; i < n; ++i) {
    const double ci = (i == 0 || i == N) ? 2.0 : 1.0;
    double rowsum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double cj = (j == 0 || j == N) ? 2.0 : 1.0;
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      const double diff = 2.0 * std::sin(pi * (i + j) / (2.0 * N)) *
                          std::sin(pi * (j - i) / (2.0 * N));
      d(i, j) = (ci / cj) * sign / diff;
      rowsum += d(i, j);
    }
    d(i, i) = -rowsum;
  }
  RMat d2 = d * d;
  for (int i = 0; i < n; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) rowsum += d2(i, j);
    d2(i, i) = -rowsum;
  }
  g.d1 = d / half;
  g.d2 = d2 / (half * half);

  RVec w = RVec::Zero(n);
  RVec v = RVec::Ones(n);
  if (N % 2 == 0) {
    w(0) = w(N) = 1.0 / (N * N - 1.0);
    for (int j = 1; j < N; ++j) {
      const double th = pi * j / N;
      for (int k = 1; k < N / 2; ++k)
        v(j) -= 2.0 * std::cos(2.0 * k * th) / (4.0 * k * k - 1.0);
      v(j) -= std::cos(N * th) / (N * N - 1.0);
    }
  } else {
    w(0) = w(N) = 1.0 / (static_cast<double>(N) * N);
    for (int j = 1; j < N; ++j) {
      const double th = pi * j / N;
      for (int k = 1; k <= (N - 1) / 2; ++k)
        v(j) -= 2.0 * std::cos(2.0 * k * th) / (4.0 * k * k - 1.0);
    }
  }
  for (int j = 1; j < N; ++j) w(j) = 2.0 * v(j) / N;
  g.quad = w * half;

  g.bary.resize(n);
  for (int j = 0; j < n; ++j) g.bary(j) = (j % 2 == 0) ? 1.0 : -1.0;
  g.bary(0) *= 0.5;
  g.bary(N) *= 0.5;
  return g;
}

RMat ChebGrid::interpolation_matrix(const RVec& targets) const {
  RMat m = RMat::Zero(targets.size(), n);
  for (Eigen::Index r = 0; r < targets.size(); ++r) {
    const double y = targets(r);
    int exact = -1;
    for (int j = 0; j < n; ++j) {
      if (y == nodes(j)) {
        exact = j;
        break;
      }
    }
    if (exact >= 0) {
      m(r, exact) = 1.0;
      continue;
    }
    double den = 0.0;
    for (int j = 0; j < n; ++j) {
      const double t = bary(j) / (y - nodes(j));
      m(r, j) = t;
      den += t;
    }
    m.row(r) /= den;
  }
  return m;
}

cplx ChebGrid::interpolate(const CVec& values, double y) const {
  RVec t(1);
  t(0) = y;
  return (interpolation_matrix(t) * values)(0);
}

double ChebGrid::interpolate(const RVec& values, double y) const {
  RVec t(1);
  t(0) = y;
  return (interpolation_matrix(t) * values)(0);
}

NormKind parse_norm_kind(const std::string& s) {
  if (s == "L2") return NormKind::L2;
  if (s == "Hk_alpha") return NormKind::Hk_alpha;
  if (s == "grad_alpha") return NormKind::grad_alpha;
  if (s == "H1_dual" || s == "Hm1") return NormKind::H1_dual;
  if (s == "Linf") return NormKind::Linf;
  if (s == "weighted_sqrt_1my2") return NormKind::weighted_sqrt_1my2;
  if (s == "L1") return NormKind::L1;
  throw ConfigError("unknown norm kind: " + s);
}

SpectralWorkspace::SpectralWorkspace(int n) : grid_(ChebGrid::build(n)) {
  sqrt_quad_ = grid_.quad.array().sqrt().matrix();
  resolution_ = grid_.nodes(0) - grid_.nodes(1);
}

const HelmholtzOperator& SpectralWorkspace::helmholtz(int alpha) const {
  if (alpha < 0) throw PreconditionError("helmholtz: alpha must be >= 0");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(alpha);
  if (it != cache_.end()) return *it->second;

  const int n = grid_.n;
  const double a2 = static_cast<double>(alpha) * alpha;
  auto op = std::make_unique<HelmholtzOperator>();
  op->alpha = alpha;
  RMat h = grid_.d2 - a2 * RMat::Identity(n, n);
  h.row(0).setZero();
  h.row(n - 1).setZero();
  h(0, 0) = 1.0;
  h(n - 1, n - 1) = 1.0;
  op->lu.compute(h);
  RMat p = RMat::Identity(n, n);
  p(0, 0) = 0.0;
  p(n - 1, n - 1) = 0.0;
  op->S = op->lu.solve(p);
  op->S.row(0).setZero();
  op->S.row(n - 1).setZero();
  op->DS = grid_.d1 * op->S;

  const int m = n - 2;
  const RMat d1i = grid_.d1.middleCols(1, m);
  op->gram = d1i.transpose() * grid_.quad.asDiagonal() * d1i;
  op->gram.diagonal() += a2 * grid_.quad.segment(1, m);
  op->gram_llt.compute(op->gram);
  if (op->gram_llt.info() != Eigen::Success)
    throw NumericalError("helmholtz: Gram matrix is not positive definite");

  auto& ref = *op;
  cache_.emplace(alpha, std::move(op));
  return ref;
}

SpectralWorkspace::ProfileSamples SpectralWorkspace::sample(
    const FlowProfile& profile) const {
  ProfileSamples s;
  const int n = grid_.n;
  s.u.resize(n);
  s.du.resize(n);
  s.d2u.resize(n);
  for (int j = 0; j < n; ++j) {
    const double y = grid_.nodes(j);
    s.u(j) = profile.u(y);
    s.du(j) = profile.du(y);
    s.d2u(j) = profile.d2u(y);
  }
  return s;
}

Field helmholtz_solve(const SpectralWorkspace& ws, int alpha, const Field& w,
                      HelmholtzBC) {
  if (alpha < 1) throw PreconditionError("helmholtz_solve: alpha must be >= 1");
  if (w.size() != ws.n()) throw PreconditionError("helmholtz_solve: size mismatch");
  const HelmholtzOperator& h = ws.helmholtz(alpha);
  return Field(h.S * w.values, alpha);
}

CVec derivative(const SpectralWorkspace& ws, const CVec& f, int order) {
  CVec out = f;
  for (int k = 0; k < order; ++k) out = ws.d1() * out;
  return out;
}

cplx inner(const SpectralWorkspace& ws, const CVec& f, const CVec& g) {
  return (ws.quad().array().cast<cplx>() * f.array() * g.array().conjugate()).sum();
}

double l2_norm(const SpectralWorkspace& ws, const CVec& f) {
  return std::sqrt((ws.quad().array() * f.array().abs2()).sum());
}

double velocity_l2(const SpectralWorkspace& ws, int alpha, const CVec& psi) {
  const CVec dpsi = ws.d1() * psi;
  const double a = alpha;
  return std::sqrt((ws.quad().array() * (dpsi.array().abs2() + a * a * psi.array().abs2())).sum());
}

double velocity_linf(const SpectralWorkspace& ws, int alpha, const CVec& psi) {
  const CVec dpsi = ws.d1() * psi;
  const double a = alpha;
  return std::sqrt((dpsi.array().abs2() + a * a * psi.array().abs2()).maxCoeff());
}

double norm(const SpectralWorkspace& ws, const Field& f, NormKind kind, int k) {
  if (f.size() != ws.n()) throw PreconditionError("norm: size mismatch");
  const double a2 = static_cast<double>(f.alpha) * f.alpha;
  const auto& q = ws.quad().array();
  switch (kind) {
    case NormKind::L2:
      return l2_norm(ws, f.values);
    case NormKind::Hk_alpha: {
      if (k < 0 || k > 4) throw PreconditionError("norm: Hk_alpha needs 0 <= k <= 4");
      double total = 0.0;
      CVec dj = f.values;
      for (int j = 0; j <= k; ++j) {
        double coef = 0.0;
        for (int i = j; i <= k; ++i) {
          double binom = 1.0;
          for (int t = 0; t < j; ++t) binom = binom * (i - t) / (t + 1);
          coef += binom * std::pow(a2, i - j);
        }
        total += coef * (q * dj.array().abs2()).sum();
        if (j < k) dj = ws.d1() * dj;
      }
      return std::sqrt(total);
    }
    case NormKind::grad_alpha: {
      const CVec d = ws.d1() * f.values;
      return std::sqrt((q * (d.array().abs2() + a2 * f.values.array().abs2())).sum());
    }
    case NormKind::H1_dual: {
      const HelmholtzOperator& h = ws.helmholtz(f.alpha);
      const int m = ws.n() - 2;
      const CVec qf = (ws.quad().segment(1, m).array().cast<cplx>() *
                       f.values.segment(1, m).array()).matrix();
      const CVec v = h.gram_llt.matrixL().solve(qf);
      return v.norm();
    }
    case NormKind::Linf:
      return f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;
    case NormKind::weighted_sqrt_1my2: {
      const RVec wgt = (1.0 - ws.nodes().array().square()).max(0.0).matrix();
      return std::sqrt((q * wgt.array() * f.values.array().abs2()).sum());
    }
    case NormKind::L1:
      return (q * f.values.array().abs()).sum();
  }
  return 0.0;
}

double sinh_ratio(double a, double x, double len) {
  if (len <= 0.0) return 0.0;
  if (a * len < 20.0) return std::sinh(a * x) / std::sinh(a * len);
  return std::exp(a * (x - len)) * (-std::expm1(-2.0 * a * x)) /
         (-std::expm1(-2.0 * a * len));
}

StreamSplitter::StreamSplitter(const SpectralWorkspace& ws, int alpha,
                               const CriticalLayer& layer, int piece_n)
    : ws_(ws), alpha_(alpha), layer_(layer) {
  if (alpha < 1) throw PreconditionError("split_stream: alpha must be >= 1");
  if (!(layer.y2 - layer.y1 >= ws.resolution()))
    throw PreconditionError(
        "split_stream: critical layer width below grid resolution; use the "
        "degenerate-lambda path or a larger n");
  const int m = piece_n > 0 ? piece_n : ws.n();
  const double a2 = static_cast<double>(alpha) * alpha;
  const std::array<std::pair<double, double>, 3> bounds{
      std::pair{-1.0, layer.y1}, std::pair{layer.y1, layer.y2},
      std::pair{layer.y2, 1.0}};
  const RVec& y = ws.nodes();
  for (int i = 0; i < 3; ++i) {
    const auto [a, b] = bounds[i];
    if (!(b - a > 1e-14)) continue;
    pieces_[i] = ChebGrid::build(m, a, b);
    RMat h = pieces_[i].d2 - a2 * RMat::Identity(m, m);
    h.row(0).setZero();
    h.row(m - 1).setZero();
    h(0, 0) = 1.0;
    h(m - 1, m - 1) = 1.0;
    lu_[i].compute(h);
    to_piece_[i] = ws.grid().interpolation_matrix(pieces_[i].nodes);
    std::vector<double> inside;
    for (int j = 0; j < ws.n(); ++j) {
      const bool in = (i == 0) ? (y(j) <= b) : (i == 1) ? (y(j) > a && y(j) < b) : (y(j) >= a);
      if (in) {
        global_idx_[i].push_back(j);
        inside.push_back(y(j));
      }
    }
    from_piece_[i] = pieces_[i].interpolation_matrix(
        Eigen::Map<const RVec>(inside.data(), static_cast<Eigen::Index>(inside.size())));
  }
  RVec ys(2);
  ys << layer.y1, layer.y2;
  at_layer_ = ws.grid().interpolation_matrix(ys);
}

SplitStream StreamSplitter::split(const Field& w) const {
  if (w.size() != ws_.n()) throw PreconditionError("split_stream: size mismatch");
  SplitStream s;
  s.psi = helmholtz_solve(ws_, alpha_, w);
  s.psi1 = Field::zero(ws_.n(), alpha_);
  s.psi2 = Field::zero(ws_.n(), alpha_);
  for (int i = 0; i < 3; ++i) {
    if (pieces_[i].n == 0) continue;
    const int m = pieces_[i].n;
    s.w_piece[i] = to_piece_[i] * w.values;
    CVec rhs = s.w_piece[i];
    rhs(0) = 0.0;
    rhs(m - 1) = 0.0;
    s.psi1_piece[i] = solve_real(lu_[i], rhs);
    s.dpsi1_piece[i] = pieces_[i].d1 * s.psi1_piece[i];
    const CVec vals = from_piece_[i] * s.psi1_piece[i];
    for (std::size_t k = 0; k < global_idx_[i].size(); ++k)
      s.psi1.values(global_idx_[i][k]) = vals(static_cast<Eigen::Index>(k));
  }
  const CVec pl = at_layer_ * s.psi.values;
  const double a = alpha_, y1 = layer_.y1, y2 = layer_.y2;
  for (int j = 0; j < ws_.n(); ++j) {
    const double y = ws_.nodes()(j);
    cplx v;
    if (y <= y1) {
      v = sinh_ratio(a, 1.0 + y, 1.0 + y1) * pl(0);
    } else if (y >= y2) {
      v = sinh_ratio(a, 1.0 - y, 1.0 - y2) * pl(1);
    } else {
      v = sinh_ratio(a, y - y1, y2 - y1) * pl(1) + sinh_ratio(a, y2 - y, y2 - y1) * pl(0);
    }
    s.psi2.values(j) = v;
  }
  return s;
}

SplitStream split_stream(const SpectralWorkspace& ws, int alpha, const Field& w,
                         const CriticalLayer& layer) {
  return StreamSplitter(ws, alpha, layer).split(w);
}

}  // namespace shearstab
