#pragma once

// Discrete flat complex torus (C^n / Z^{2n}, side 1 per real axis) with
// spectral differentiation, complex Hessians, quadrature and Green inversion.
//
// Conventions: real axes are ordered (x1, y1, x2, y2) with z_j = x_j + i y_j,
// the background metric is the identity so that
//   d dbar phi = 1/4 (real Hessian block combination),
//   Laplace(phi) = tr(d dbar phi) = 1/4 sum of pure second derivatives.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "mafl/error.hpp"

namespace mafl {

/// Ratio between the complex Hessian d dbar and the real second derivatives.
inline constexpr double kDdbarScale = 0.25;

namespace detail {
class Spectral;
}

class TorusGrid {
 public:
  /// Empty placeholder grid (size 0); use make() for a usable grid.
  TorusGrid() = default;
  /// n is the complex dimension (1 or 2); N points per real axis, a power of two >= 8.
  static TorusGrid make(int n, int N);

  int dim() const { return n_; }
  int resolution() const { return N_; }
  int real_axes() const { return 2 * n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return 1.0 / N_; }
  double cell_volume() const { return cell_volume_; }
  double volume() const { return 1.0; }

  /// Real coordinates (x1, y1, x2, y2) of a flat index; unused axes are 0.
  std::array<double, 4> coords(std::size_t index) const;
  /// Integer axis indices of a flat index (row-major, last axis fastest).
  std::array<int, 4> axis_indices(std::size_t index) const;
  std::size_t flat_index(const std::array<int, 4>& idx) const;

  const detail::Spectral& spectral() const { return *spectral_; }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
    return a.n_ == b.n_ && a.N_ == b.N_;
  }

 private:
  int n_ = 0;
  int N_ = 0;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
  std::shared_ptr<const detail::Spectral> spectral_;
};

/// Real-valued function sampled at every grid point.
struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  static ScalarField constant(const TorusGrid& grid, double value);
  template <class Fn>
  static ScalarField from_function(const TorusGrid& grid, Fn&& fn) {
    ScalarField f = constant(grid, 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) f.values[i] = fn(grid.coords(i));
    return f;
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double max() const;
  double min() const;
  double max_abs() const;
  bool all_finite() const;
};

/// A stack of time slices on one grid; times strictly increasing.
struct SpaceTimeField {
  TorusGrid grid;
  std::vector<double> times;
  std::vector<ScalarField> slices;

  explicit SpaceTimeField(TorusGrid g) : grid(std::move(g)) {}
  void push_back(double t, ScalarField slice);
  std::size_t size() const { return times.size(); }
};

/// One n x n Hermitian matrix per grid point (n <= 2): [[a, c], [conj(c), d]].
struct HermitianMatrix {
  double a = 1.0;
  double d = 1.0;
  std::complex<double> c{0.0, 0.0};

  double trace(int n) const { return n == 1 ? a : a + d; }
  double det(int n) const { return n == 1 ? a : a * d - std::norm(c); }
};

struct HermitianHessianField {
  TorusGrid grid;
  std::vector<HermitianMatrix> matrices;
  /// Eigenvalues sorted ascending; only the first n entries are meaningful.
  std::vector<std::array<double, 2>> eigenvalues;

  int dim() const { return grid.dim(); }
  std::span<const double> lambda(std::size_t i) const {
    return {eigenvalues[i].data(), static_cast<std::size_t>(grid.dim())};
  }
};

/// Closed-form eigenvalues of a Hermitian matrix, ascending.
std::array<double, 2> hermitian_eigenvalues(const HermitianMatrix& m, int n);

TorusGrid make_grid(int n, int N);

/// h = I + d dbar phi at every point, via exact differentiation of the
/// trigonometric interpolant.
HermitianHessianField complex_hessian(const ScalarField& phi);

/// d dbar phi only (no identity shift).
HermitianHessianField complex_hessian_raw(const ScalarField& phi);

/// Sum f * w * cellVolume.
double integrate(const ScalarField& f);
double integrate(const ScalarField& f, const ScalarField& w);

double mean(const ScalarField& f);
ScalarField mean_normalize(const ScalarField& phi);

/// Laplace = tr(d dbar) = 1/4 of the real Laplacian.
ScalarField laplacian(const ScalarField& phi);

/// Real gradient along each real axis.
std::vector<ScalarField> gradient(const ScalarField& phi);

/// Real Hessian entry d^2 phi / dx_p dx_q along real axes p, q.
ScalarField real_second_derivative(const ScalarField& phi, int p, int q);

struct GreenKernel {
  /// Discrete kernel G(x) of -Laplace^{-1} on mean-zero data, shifted to be >= 0.
  ScalarField shifted;
  /// Amount subtracted (equal to min of the unshifted kernel).
  double shift = 0.0;
  double l1_norm = 0.0;
};

/// Solves Laplace u = f - mean(f) with mean(u) = 0.
ScalarField green_solve(const ScalarField& f);
GreenKernel green_kernel(const TorusGrid& grid);

/// Fraction of non-mean spectral energy in modes with some |k_axis| > N/4.
double high_frequency_fraction(const ScalarField& f);

void require_same_grid(const ScalarField& a, const ScalarField& b);
void require_finite(const ScalarField& f, const char* what);

namespace detail {

/// FFTW-backed real transforms for one grid shape. Plans are created once
/// under a global lock; execution is thread-safe.
class Spectral {
 public:
  Spectral(int axes, int N);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  std::size_t real_size() const { return real_size_; }
  std::size_t complex_size() const { return complex_size_; }
  int axes() const { return axes_; }
  int N() const { return N_; }

  /// Unnormalized forward DFT of real data.
  std::vector<std::complex<double>> forward(std::span<const double> in) const;
  /// Inverse DFT divided by N^axes (so inverse(forward(x)) == x).
  std::vector<double> inverse(std::span<const std::complex<double>> in) const;
  /// Inverse DFT without normalization.
  std::vector<double> inverse_unnormalized(std::span<const std::complex<double>> in) const;

  /// Signed integer wavenumber on axis `axis` of half-complex index `c`.
  int wavenumber(std::size_t c, int axis) const { return wavenumbers_[c * axes_ + axis]; }
  /// Number of conjugate copies a half-complex entry represents (1 or 2).
  int multiplicity(std::size_t c) const { return multiplicity_[c]; }
  bool is_nyquist(int k) const { return k == N_ / 2 || k == -N_ / 2; }

  /// Real Fourier symbols of the d dbar blocks: 0 = h_11, 1 = h_22,
  /// 2 = Re h_12, 3 = Im h_12 (the last three only for two complex dimensions).
  const std::vector<double>& ddbar_symbol(int block) const { return ddbar_[block]; }

 private:
  int axes_;
  int N_;
  std::size_t real_size_;
  std::size_t complex_size_;
  void* plan_forward_;
  void* plan_inverse_;
  std::vector<int> wavenumbers_;
  std::vector<int> multiplicity_;
  std::array<std::vector<double>, 4> ddbar_;
};

}  // namespace detail

}  // namespace mafl
