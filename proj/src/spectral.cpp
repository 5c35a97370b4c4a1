#include "alab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "alab/errors.hpp"

namespace alab::spectral {

namespace {
// The FFTW planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

void SpatialGrid::validate() const {
  if (dim != 1 && dim != 3) throw ConfigError("spatial dimension must be 1 or 3");
  if (n < 2 || n % 2 != 0) throw ConfigError("spatial points per axis must be even and >= 2");
}

std::size_t SpatialGrid::points() const {
  std::size_t p = 1;
  for (int d = 0; d < dim; ++d) p *= static_cast<std::size_t>(n);
  return p;
}

std::size_t SpatialGrid::modes() const { return points() / n * (n / 2 + 1); }

std::array<int, 3> SpatialGrid::multi_index(std::size_t p) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = dim - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(p % n);
    p /= n;
  }
  return idx;
}

std::array<double, 3> SpatialGrid::coordinate(std::size_t p) const {
  const auto idx = multi_index(p);
  return {idx[0] / static_cast<double>(n), idx[1] / static_cast<double>(n),
          idx[2] / static_cast<double>(n)};
}

std::vector<Mode> modes(const SpatialGrid& g) {
  const int n = g.n;
  const int half = n / 2 + 1;
  std::vector<Mode> out(g.modes());
  const std::size_t outer = g.points() / n;
  for (std::size_t o = 0; o < outer; ++o) {
    std::array<int, 3> idx{0, 0, 0};
    std::size_t r = o;
    for (int d = g.dim - 2; d >= 0; --d) {
      idx[d] = static_cast<int>(r % n);
      r /= n;
    }
    for (int j = 0; j < half; ++j) {
      idx[g.dim - 1] = j;
      Mode& m = out[o * half + j];
      m.index = idx;
      for (int d = 0; d < g.dim; ++d) {
        const int s = idx[d] <= n / 2 ? idx[d] : idx[d] - n;
        if (2 * idx[d] == n) m.nyquist = true;
        m.k[d] = 2.0 * std::numbers::pi * s;
      }
      m.multiplicity = (j == 0 || 2 * j == n) ? 1.0 : 2.0;
    }
  }
  return out;
}

struct RealFft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

RealFft::RealFft(const SpatialGrid& g, int channels)
    : grid_(g), channels_(channels), plans_(std::make_unique<Plans>()) {
  g.validate();
  int dims[3] = {g.n, g.n, g.n};
  const int real_count = static_cast<int>(g.points());
  const int cplx_count = static_cast<int>(g.modes());
  // Element (channel c, point p) lives at c + p * channels.
  std::vector<double> r(static_cast<std::size_t>(real_count) * channels);
  std::vector<fftw_complex> c(static_cast<std::size_t>(cplx_count) * channels);
  std::lock_guard<std::mutex> lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->fwd = fftw_plan_many_dft_r2c(g.dim, dims, channels, r.data(), nullptr, channels, 1,
                                       c.data(), nullptr, channels, 1, flags);
  plans_->inv = fftw_plan_many_dft_c2r(g.dim, dims, channels, c.data(), nullptr, channels, 1,
                                       r.data(), nullptr, channels, 1, flags | FFTW_DESTROY_INPUT);
  if (!plans_->fwd || !plans_->inv) throw SolveFailure("FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->inv) fftw_destroy_plan(plans_->inv);
}

Eigen::MatrixXcd RealFft::forward(const Eigen::Ref<const Eigen::MatrixXd>& in) const {
  if (in.rows() != channels_ || static_cast<std::size_t>(in.cols()) != grid_.points())
    throw GridMismatch("FFT input has the wrong shape");
  const Eigen::MatrixXd src = in;  // contiguous, column-major
  Eigen::MatrixXcd out(channels_, static_cast<Eigen::Index>(grid_.modes()));
  fftw_execute_dft_r2c(plans_->fwd, const_cast<double*>(src.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

Eigen::MatrixXd RealFft::inverse(const Eigen::Ref<const Eigen::MatrixXcd>& in) const {
  if (in.rows() != channels_ || static_cast<std::size_t>(in.cols()) != grid_.modes())
    throw GridMismatch("inverse FFT input has the wrong shape");
  Eigen::MatrixXcd src = in;  // c2r overwrites its input
  Eigen::MatrixXd out(channels_, static_cast<Eigen::Index>(grid_.points()));
  fftw_execute_dft_c2r(plans_->inv, reinterpret_cast<fftw_complex*>(src.data()), out.data());
  out /= static_cast<double>(grid_.points());
  return out;
}

double parseval(const SpatialGrid& g, const std::vector<Mode>& m,
                const Eigen::Ref<const Eigen::MatrixXcd>& coeffs, const double* row_weight) {
  const double np = static_cast<double>(g.points());
  double s = 0.0;
  for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
    double col = 0.0;
    for (Eigen::Index r = 0; r < coeffs.rows(); ++r) {
      const double w = row_weight ? row_weight[r] : 1.0;
      col += w * std::norm(coeffs(r, j));
    }
    s += m[static_cast<std::size_t>(j)].multiplicity * col;
  }
  return s / (np * np);
}

Eigen::MatrixXd derivative(const RealFft& fft, const std::vector<Mode>& m,
                           const Eigen::Ref<const Eigen::MatrixXd>& in, int axis) {
  Eigen::MatrixXcd c = fft.forward(in);
  const int n = fft.grid().n;
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    const Mode& mode = m[static_cast<std::size_t>(j)];
    const std::complex<double> factor =
        2 * mode.index[axis] == n ? 0.0 : std::complex<double>(0.0, mode.k[axis]);
    c.col(j) *= factor;
  }
  return fft.inverse(c);
}

}  // namespace alab::spectral
