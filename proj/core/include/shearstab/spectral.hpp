#pragma once

#include <array>
#include <map>
#include <memory>
#include <mutex>

#include "shearstab/common.hpp"
#include "shearstab/profiles.hpp"

namespace shearstab {

/// Chebyshev-Gauss-Lobatto grid with n nodes mapped to [a, b]. Nodes are in
/// descending order: nodes(0) = b, nodes(n-1) = a.
struct ChebGrid {
  int n = 0;
  double a = -1.0;
  double b = 1.0;
  RVec nodes;
  RMat d1;
  RMat d2;
  RVec quad;          // Clenshaw-Curtis weights
  RVec bary;          // barycentric weights

  static ChebGrid build(int n, double a = -1.0, double b = 1.0);

  /// Rows evaluate the interpolant at each target point.
  RMat interpolation_matrix(const RVec& targets) const;
  cplx interpolate(const CVec& values, double y) const;
  double interpolate(const RVec& values, double y) const;
};

/// A grid function tagged with its Fourier mode.
struct Field {
  CVec values;
  int alpha = 0;

  Field() = default;
  Field(CVec v, int a) : values(std::move(v)), alpha(a) {}
  static Field zero(int n, int alpha) { return Field(CVec::Zero(n), alpha); }
  int size() const { return static_cast<int>(values.size()); }
};

/// Dirichlet inverse of d2 - alpha^2 and the H^1_0 Gram matrix for one mode.
struct HelmholtzOperator {
  int alpha = 0;
  Eigen::PartialPivLU<RMat> lu;   // d2 - alpha^2 with identity boundary rows
  RMat S;                         // w -> psi, ignores w at the walls
  RMat DS;                        // w -> psi'
  RMat gram;                      // interior Gram of the (d_y, |alpha|) inner product
  Eigen::LLT<RMat> gram_llt;
};

enum class NormKind { L2, Hk_alpha, grad_alpha, H1_dual, Linf, weighted_sqrt_1my2, L1 };

NormKind parse_norm_kind(const std::string& s);

class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(int n);

  int n() const { return grid_.n; }
  const ChebGrid& grid() const { return grid_; }
  const RVec& nodes() const { return grid_.nodes; }
  const RMat& d1() const { return grid_.d1; }
  const RMat& d2() const { return grid_.d2; }
  const RVec& quad() const { return grid_.quad; }
  const RVec& sqrt_quad() const { return sqrt_quad_; }

  /// Write-once cache; safe for concurrent readers.
  const HelmholtzOperator& helmholtz(int alpha) const;

  /// Profile sampled on the nodes: U, U', U''.
  struct ProfileSamples {
    RVec u, du, d2u;
  };
  ProfileSamples sample(const FlowProfile& profile) const;

  /// Minimum node spacing (near the walls).
  double resolution() const { return resolution_; }

 private:
  ChebGrid grid_;
  RVec sqrt_quad_;
  double resolution_ = 0.0;
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<HelmholtzOperator>> cache_;
};

enum class HelmholtzBC { dirichlet };

/// psi with (d^2 - alpha^2) psi = w on interior nodes and psi(+-1) = 0.
Field helmholtz_solve(const SpectralWorkspace& ws, int alpha, const Field& w,
                      HelmholtzBC bc = HelmholtzBC::dirichlet);

CVec derivative(const SpectralWorkspace& ws, const CVec& f, int order = 1);

/// Quadrature pairing sum q f conj(g).
cplx inner(const SpectralWorkspace& ws, const CVec& f, const CVec& g);

/// Norm of a field; Hk_alpha uses sum_{i<=k} ||(d_y, |alpha|)^i f||^2,
/// grad_alpha is ||(d_y, |alpha|) f||.
double norm(const SpectralWorkspace& ws, const Field& f, NormKind kind, int k = 0);
double l2_norm(const SpectralWorkspace& ws, const CVec& f);

/// Velocity (-psi', i alpha psi) L2 norm and pointwise sup.
double velocity_l2(const SpectralWorkspace& ws, int alpha, const CVec& psi);
double velocity_linf(const SpectralWorkspace& ws, int alpha, const CVec& psi);

/// psi = psi1 + psi2 around a critical layer.
struct SplitStream {
  Field psi;
  Field psi1;
  Field psi2;
  /// psi1, its derivative and w on each of the three pieces
  /// [-1,y1], [y1,y2], [y2,1].
  std::array<CVec, 3> psi1_piece;
  std::array<CVec, 3> dpsi1_piece;
  std::array<CVec, 3> w_piece;
};

/// Precomputed piecewise Dirichlet solvers for one (alpha, layer) pair so many
/// fields can be split cheaply.
class StreamSplitter {
 public:
  StreamSplitter(const SpectralWorkspace& ws, int alpha, const CriticalLayer& layer,
                 int piece_n = 0);

  SplitStream split(const Field& w) const;
  const ChebGrid& piece(int i) const { return pieces_[i]; }
  const CriticalLayer& layer() const { return layer_; }
  int alpha() const { return alpha_; }

 private:
  const SpectralWorkspace& ws_;
  int alpha_;
  CriticalLayer layer_;
  std::array<ChebGrid, 3> pieces_;
  std::array<Eigen::PartialPivLU<RMat>, 3> lu_;
  std::array<RMat, 3> to_piece_;     // global -> piece nodes
  std::array<std::vector<int>, 3> global_idx_;
  std::array<RMat, 3> from_piece_;   // piece -> global nodes inside it
  RMat at_layer_;                    // global -> (y1, y2)
};

SplitStream split_stream(const SpectralWorkspace& ws, int alpha, const Field& w,
                         const CriticalLayer& layer);

/// sinh(a x) / sinh(a L) for 0 <= x <= L evaluated without overflow.
double sinh_ratio(double a, double x, double len);

}  // namespace shearstab
