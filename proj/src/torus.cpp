#include "mafl/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

namespace mafl {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int N) { return N > 0 && (N & (N - 1)) == 0; }

std::shared_ptr<const detail::Spectral> shared_spectral(int axes, int N) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const detail::Spectral>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[{axes, N}];
  if (!slot) slot = std::make_shared<const detail::Spectral>(axes, N);
  return slot;
}

using Multiplier = std::complex<double>;

// Apply a per-mode multiplier to the spectrum of f and transform back.
template <class Fn>
ScalarField apply_multiplier(const ScalarField& f, const std::vector<std::complex<double>>& spectrum,
                             Fn&& multiplier) {
  const auto& sp = f.grid.spectral();
  std::vector<std::complex<double>> work(spectrum.size());
  std::array<int, 4> k{};
  for (std::size_t c = 0; c < spectrum.size(); ++c) {
    for (int a = 0; a < sp.axes(); ++a) k[a] = sp.wavenumber(c, a);
    work[c] = spectrum[c] * multiplier(k);
  }
  ScalarField out{f.grid, sp.inverse(work)};
  return out;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fourier symbol of d^2/dx_p dx_q; odd factors vanish on the Nyquist plane.
double second_derivative_symbol(const detail::Spectral& sp, const std::array<int, 4>& k, int p,
                                int q) {
  if (p != q && (sp.is_nyquist(k[p]) || sp.is_nyquist(k[q]))) return 0.0;
  return -kTwoPi * kTwoPi * static_cast<double>(k[p]) * static_cast<double>(k[q]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Spectral

namespace detail {

Spectral::Spectral(int axes, int N) : axes_(axes), N_(N) {
  real_size_ = 1;
  for (int a = 0; a < axes; ++a) real_size_ *= static_cast<std::size_t>(N);
  complex_size_ = real_size_ / N * (N / 2 + 1);

  std::vector<int> dims(axes, N);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    double* r = fftw_alloc_real(real_size_);
    fftw_complex* c = fftw_alloc_complex(complex_size_);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan_forward_ = fftw_plan_dft_r2c(axes, dims.data(), r, c, flags);
    plan_inverse_ = fftw_plan_dft_c2r(axes, dims.data(), c, r, flags);
    fftw_free(r);
    fftw_free(c);
  }

  const int half = N / 2 + 1;
  wavenumbers_.resize(complex_size_ * axes);
  multiplicity_.resize(complex_size_);
  for (std::size_t c = 0; c < complex_size_; ++c) {
    std::size_t rest = c;
    const int last = static_cast<int>(rest % half);
    rest /= half;
    wavenumbers_[c * axes + axes - 1] = last;
    for (int a = axes - 2; a >= 0; --a) {
      const int idx = static_cast<int>(rest % N);
      rest /= N;
      wavenumbers_[c * axes + a] = idx <= N / 2 ? idx : idx - N;
    }
    multiplicity_[c] = (last == 0 || last == N / 2) ? 1 : 2;
  }

  const int blocks = axes == 2 ? 1 : 4;
  for (int b = 0; b < blocks; ++b) ddbar_[b].resize(complex_size_);
  std::array<int, 4> k{};
  for (std::size_t c = 0; c < complex_size_; ++c) {
    for (int a = 0; a < axes; ++a) k[a] = wavenumbers_[c * axes + a];
    auto d2 = [&](int p, int q) { return second_derivative_symbol(*this, k, p, q); };
    // Re: 1/4 (phi_{x_j x_k} + phi_{y_j y_k});  Im: 1/4 (phi_{x_j y_k} - phi_{y_j x_k})
    ddbar_[0][c] = kDdbarScale * (d2(0, 0) + d2(1, 1));
    if (blocks == 4) {
      ddbar_[1][c] = kDdbarScale * (d2(2, 2) + d2(3, 3));
      ddbar_[2][c] = kDdbarScale * (d2(0, 2) + d2(1, 3));
      ddbar_[3][c] = kDdbarScale * (d2(0, 3) - d2(1, 2));
    }
  }
}

Spectral::~Spectral() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

std::vector<std::complex<double>> Spectral::forward(std::span<const double> in) const {
  std::vector<double> input(in.begin(), in.end());
  std::vector<std::complex<double>> out(complex_size_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), input.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> Spectral::inverse_unnormalized(std::span<const std::complex<double>> in) const {
  std::vector<std::complex<double>> input(in.begin(), in.end());
  std::vector<double> out(real_size_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inverse_),
                       reinterpret_cast<fftw_complex*>(input.data()), out.data());
  return out;
}

std::vector<double> Spectral::inverse(std::span<const std::complex<double>> in) const {
  auto out = inverse_unnormalized(in);
  const double scale = 1.0 / static_cast<double>(real_size_);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grid and fields

TorusGrid TorusGrid::make(int n, int N) {
  if (n != 1 && n != 2)
    throw Error(ErrorKind::UnsupportedDimension,
                "complex dimension must be 1 or 2, got " + std::to_string(n));
  if (N < 8 || !is_power_of_two(N))
    throw Error(ErrorKind::InvalidResolution,
                "points per axis must be a power of two >= 8, got " + std::to_string(N));
  TorusGrid g;
  g.n_ = n;
  g.N_ = N;
  g.size_ = 1;
  for (int a = 0; a < 2 * n; ++a) g.size_ *= static_cast<std::size_t>(N);
  g.cell_volume_ = 1.0 / static_cast<double>(g.size_);
  g.spectral_ = shared_spectral(2 * n, N);
  return g;
}

TorusGrid make_grid(int n, int N) { return TorusGrid::make(n, N); }

std::array<int, 4> TorusGrid::axis_indices(std::size_t index) const {
  std::array<int, 4> idx{0, 0, 0, 0};
  for (int a = real_axes() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(index % N_);
    index /= N_;
  }
  return idx;
}

std::size_t TorusGrid::flat_index(const std::array<int, 4>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < real_axes(); ++a) {
    const int wrapped = ((idx[a] % N_) + N_) % N_;
    flat = flat * N_ + wrapped;
  }
  return flat;
}

std::array<double, 4> TorusGrid::coords(std::size_t index) const {
  const auto idx = axis_indices(index);
  std::array<double, 4> x{0, 0, 0, 0};
  for (int a = 0; a < real_axes(); ++a) x[a] = idx[a] * spacing();
  return x;
}

ScalarField ScalarField::constant(const TorusGrid& grid, double value) {
  return ScalarField{grid, std::vector<double>(grid.size(), value)};
}

double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }
double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}
bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void SpaceTimeField::push_back(double t, ScalarField slice) {
  if (!(slice.grid == grid)) throw Error(ErrorKind::GridMismatch, "slice grid differs from field grid");
  if (!times.empty() && !(t > times.back()))
    throw Error(ErrorKind::InvalidArgument, "slice times must be strictly increasing");
  times.push_back(t);
  slices.push_back(std::move(slice));
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid) || a.size() != b.size())
    throw Error(ErrorKind::GridMismatch, "fields live on different grids");
}

void require_finite(const ScalarField& f, const char* what) {
  if (!f.all_finite()) throw Error(ErrorKind::NonFinite, std::string(what) + " has non-finite values");
}

// ---------------------------------------------------------------------------
// Differential operators

std::array<double, 2> hermitian_eigenvalues(const HermitianMatrix& m, int n) {
  if (n == 1) return {m.a, m.a};
  const double mid = 0.5 * (m.a + m.d);
  const double half_gap = 0.5 * (m.a - m.d);
  const double radius = std::sqrt(half_gap * half_gap + std::norm(m.c));
  return {mid - radius, mid + radius};
}

namespace {

// Inverse transform of spectrum * symbol (a real multiplier).
std::vector<double> apply_symbol(const detail::Spectral& sp, const std::vector<std::complex<double>>& spectrum,
                                 const std::vector<double>& symbol) {
  std::vector<std::complex<double>> work(spectrum.size());
  for (std::size_t c = 0; c < spectrum.size(); ++c) work[c] = spectrum[c] * symbol[c];
  return sp.inverse(work);
}

// d dbar phi plus shift * identity, with eigenvalues.
HermitianHessianField shifted_hessian(const ScalarField& phi, double shift) {
  require_finite(phi, "potential");
  const auto& grid = phi.grid;
  const auto& sp = grid.spectral();
  const auto spectrum = sp.forward(phi.values);
  const int n = grid.dim();

  HermitianHessianField out{grid, {}, {}};
  out.matrices.resize(grid.size());
  out.eigenvalues.resize(grid.size());
  const auto a = apply_symbol(sp, spectrum, sp.ddbar_symbol(0));
  if (n == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) out.matrices[i] = HermitianMatrix{a[i] + shift, 0.0, {0.0, 0.0}};
  } else {
    const auto d = apply_symbol(sp, spectrum, sp.ddbar_symbol(1));
    const auto cr = apply_symbol(sp, spectrum, sp.ddbar_symbol(2));
    const auto ci = apply_symbol(sp, spectrum, sp.ddbar_symbol(3));
    for (std::size_t i = 0; i < grid.size(); ++i)
      out.matrices[i] = HermitianMatrix{a[i] + shift, d[i] + shift, {cr[i], ci[i]}};
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.eigenvalues[i] = hermitian_eigenvalues(out.matrices[i], n);
  return out;
}

}  // namespace

HermitianHessianField complex_hessian_raw(const ScalarField& phi) { return shifted_hessian(phi, 0.0); }

HermitianHessianField complex_hessian(const ScalarField& phi) { return shifted_hessian(phi, 1.0); }

ScalarField laplacian(const ScalarField& phi) {
  require_finite(phi, "field");
  const auto& sp = phi.grid.spectral();
  const auto spectrum = sp.forward(phi.values);
  return apply_multiplier(phi, spectrum, [&](const std::array<int, 4>& k) -> Multiplier {
    double s = 0.0;
    for (int a = 0; a < sp.axes(); ++a) s += second_derivative_symbol(sp, k, a, a);
    return kDdbarScale * s;
  });
}

std::vector<ScalarField> gradient(const ScalarField& phi) {
  require_finite(phi, "field");
  const auto& sp = phi.grid.spectral();
  const auto spectrum = sp.forward(phi.values);
  std::vector<ScalarField> out;
  for (int p = 0; p < sp.axes(); ++p) {
    out.push_back(apply_multiplier(phi, spectrum, [&](const std::array<int, 4>& k) -> Multiplier {
      if (sp.is_nyquist(k[p])) return 0.0;
      return {0.0, kTwoPi * k[p]};
    }));
  }
  return out;
}

ScalarField real_second_derivative(const ScalarField& phi, int p, int q) {
  const auto& sp = phi.grid.spectral();
  if (p < 0 || q < 0 || p >= sp.axes() || q >= sp.axes())
    throw Error(ErrorKind::InvalidArgument, "axis out of range");
  const auto spectrum = sp.forward(phi.values);
  return apply_multiplier(phi, spectrum, [&](const std::array<int, 4>& k) -> Multiplier {
    return second_derivative_symbol(sp, k, p, q);
  });
}

// ---------------------------------------------------------------------------
// Quadrature

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.cell_volume();
}

double integrate(const ScalarField& f, const ScalarField& w) {
  require_same_grid(f, w);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * w[i];
  return s * f.grid.cell_volume();
}

double mean(const ScalarField& f) { return integrate(f) / f.grid.volume(); }

ScalarField mean_normalize(const ScalarField& phi) {
  require_finite(phi, "potential");
  ScalarField out = phi;
  const double m = mean(phi);
  for (auto& v : out.values) v -= m;
  return out;
}

// ---------------------------------------------------------------------------
// Green inversion

namespace {
double inverse_laplace_symbol(const detail::Spectral& sp, const std::array<int, 4>& k) {
  double s = 0.0;
  for (int a = 0; a < sp.axes(); ++a) s += second_derivative_symbol(sp, k, a, a);
  s *= kDdbarScale;
  return s == 0.0 ? 0.0 : 1.0 / s;
}
}  // namespace

ScalarField green_solve(const ScalarField& f) {
  require_finite(f, "source");
  const auto& sp = f.grid.spectral();
  const auto spectrum = sp.forward(f.values);
  return apply_multiplier(f, spectrum, [&](const std::array<int, 4>& k) -> Multiplier {
    return inverse_laplace_symbol(sp, k);
  });
}

GreenKernel green_kernel(const TorusGrid& grid) {
  const auto& sp = grid.spectral();
  std::vector<std::complex<double>> symbol(sp.complex_size());
  std::array<int, 4> k{};
  for (std::size_t c = 0; c < symbol.size(); ++c) {
    for (int a = 0; a < sp.axes(); ++a) k[a] = sp.wavenumber(c, a);
    symbol[c] = -inverse_laplace_symbol(sp, k);
  }
  // u(x) = -sum_y G(x - y) f(y) cellVolume reproduces green_solve.
  ScalarField kernel{grid, sp.inverse_unnormalized(symbol)};
  const double lowest = kernel.min();
  GreenKernel g{kernel, lowest, 0.0};
  for (auto& v : g.shifted.values) v -= lowest;
  g.l1_norm = integrate(g.shifted);
  return g;
}

double high_frequency_fraction(const ScalarField& f) {
  const auto& sp = f.grid.spectral();
  const auto spectrum = sp.forward(f.values);
  const int cut = sp.N() / 4;
  double total = 0.0, high = 0.0;
  for (std::size_t c = 1; c < spectrum.size(); ++c) {
    const double e = sp.multiplicity(c) * std::norm(spectrum[c]);
    total += e;
    bool is_high = false;
    for (int a = 0; a < sp.axes(); ++a) is_high = is_high || std::abs(sp.wavenumber(c, a)) > cut;
    if (is_high) high += e;
  }
  return total > 0.0 ? high / total : 0.0;
}

}  // namespace mafl
