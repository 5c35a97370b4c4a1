#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace alab::spectral {

/// Periodic grid on the unit torus T^d (d = 1 or 3), n points per axis.
struct SpatialGrid {
  int dim = 1;
  int n = 64;

  void validate() const;
  std::size_t points() const;
  /// Number of stored half-spectrum modes, n^{d-1} (n/2 + 1).
  std::size_t modes() const;
  std::array<int, 3> multi_index(std::size_t p) const;
  std::array<double, 3> coordinate(std::size_t p) const;
  bool operator==(const SpatialGrid& o) const { return dim == o.dim && n == o.n; }
};

/// Wavevector data of one stored mode of a real-to-complex transform.
struct Mode {
  std::array<double, 3> k{};  // 2 pi times the signed integer index
  std::array<int, 3> index{};
  double multiplicity = 1.0;  // 2 for modes whose conjugate partner is not stored
  bool nyquist = false;       // some axis sits at n/2
};

std::vector<Mode> modes(const SpatialGrid& g);

/// Batched real FFT over the spatial index of a matrix whose columns are
/// spatial points and whose rows are independent channels (velocity nodes
/// or fields). Forward is unnormalized; inverse divides by n^d.
class RealFft {
 public:
  RealFft(const SpatialGrid& g, int channels);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  /// in: channels x points. Returns channels x modes.
  Eigen::MatrixXcd forward(const Eigen::Ref<const Eigen::MatrixXd>& in) const;
  /// in: channels x modes. Returns channels x points.
  Eigen::MatrixXd inverse(const Eigen::Ref<const Eigen::MatrixXcd>& in) const;

  const SpatialGrid& grid() const { return grid_; }
  int channels() const { return channels_; }

 private:
  struct Plans;
  SpatialGrid grid_;
  int channels_;
  std::unique_ptr<Plans> plans_;
};

/// Mean over the torus of |g|^2 computed from half-spectrum coefficients,
/// summed over rows with per-row weights (nullptr means 1).
double parseval(const SpatialGrid& g, const std::vector<Mode>& m,
                const Eigen::Ref<const Eigen::MatrixXcd>& coeffs, const double* row_weight = nullptr);

/// d/dx_axis of each row by Fourier multiplication with i k_axis. Modes on
/// the Nyquist plane of that axis are dropped.
Eigen::MatrixXd derivative(const RealFft& fft, const std::vector<Mode>& m,
                           const Eigen::Ref<const Eigen::MatrixXd>& in, int axis);

}  // namespace alab::spectral
