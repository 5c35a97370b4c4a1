#include "alab/collision_ops.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "alab/detail/collision_kernels.hpp"
#include "alab/errors.hpp"
#include "alab/hashing.hpp"
#include "alab/quadrature.hpp"

namespace alab::collision {

using velocity::maxwellian;
using velocity::sqrt_maxwellian;

namespace {

constexpr double kPi = std::numbers::pi;
const double kNorm = std::pow(2.0 * kPi, -1.5);

// e^{-a} * int_{S^2} exp(a e.w) dw
double s0_scaled(double a) {
  if (a < 1e-8) return 4.0 * kPi * (1.0 - a);
  return 2.0 * kPi * (-std::expm1(-2.0 * a)) / a;
}

// e^{-a} * int_{S^2} (e.w)^2 exp(a e.w) dw
double s2_scaled(double a) {
  if (a < 1.0) {
    double term = 1.0, sum = 1.0 / 3.0;
    for (int n = 1; n < 20; ++n) {
      term *= a * a / ((2.0 * n - 1.0) * (2.0 * n));
      sum += term / (2.0 * n + 3.0);
    }
    return 4.0 * kPi * sum * std::exp(-a);
  }
  const double e = std::exp(-2.0 * a);
  return 2.0 * kPi * ((-std::expm1(-2.0 * a)) * (1.0 / a + 2.0 / (a * a * a)) -
                      2.0 * (1.0 + e) / (a * a));
}

// int_0^inf F(r) dr split at the Gaussian peak r = |v|.
template <class F>
double radial(F&& fn, double speed) {
  boost::math::quadrature::tanh_sinh<double> ts;
  const double tol = 1e-13;
  double total = 0.0;
  if (speed > 0.0) total += ts.integrate(fn, 0.0, speed, tol);
  total += ts.integrate(fn, speed, speed + 12.0, tol);
  return total;
}

}  // namespace

std::string to_string(Family f) { return f == Family::boltzmann ? "boltzmann" : "landau"; }
std::string to_string(AngularKernel k) {
  return k == AngularKernel::abs_cos ? "abs_cos" : "cos_squared";
}
std::string to_string(Interpolation i) {
  return i == Interpolation::quadratic ? "quadratic" : "linear";
}

Family parse_family(const std::string& s) {
  if (s == "boltzmann") return Family::boltzmann;
  if (s == "landau") return Family::landau;
  throw ConfigError("unknown kernel family '" + s + "'");
}

AngularKernel parse_angular_kernel(const std::string& s) {
  if (s == "abs_cos") return AngularKernel::abs_cos;
  if (s == "cos_squared") return AngularKernel::cos_squared;
  throw ConfigError("unknown angular kernel '" + s + "'");
}

Interpolation parse_interpolation(const std::string& s) {
  if (s == "quadratic") return Interpolation::quadratic;
  if (s == "linear" || s == "trilinear") return Interpolation::linear;
  throw ConfigError("unknown interpolation '" + s + "'");
}

void KernelSpec::validate() const {
  if (family == Family::boltzmann && !(gamma > -3.0 && gamma <= 1.0)) {
    std::ostringstream os;
    os << "gamma = " << gamma << " is outside (-3, 1]";
    throw GammaOutOfRange(os.str());
  }
  if (angular_nodes < 8 || angular_nodes % 2 != 0)
    throw UnsupportedKernel("angular_nodes must be even and >= 8");
  if (impact_nodes < 8 || impact_nodes % 2 != 0)
    throw UnsupportedKernel("impact_nodes must be even and >= 8");
  if (c_b < 1.0) throw UnsupportedKernel("angular kernel exceeds the declared bound C_B");
}

double KernelSpec::angular(double c) const {
  return angular_kernel == AngularKernel::abs_cos ? std::abs(c) : c * c;
}

std::uint64_t KernelSpec::hash() const {
  Fnv1a h;
  h.text("kernel/v1");
  h.i64(static_cast<int>(family));
  if (family == Family::boltzmann) {
    h.f64(gamma);
    h.i64(static_cast<int>(angular_kernel));
    h.i64(angular_nodes);
    h.i64(impact_nodes);
    h.i64(static_cast<int>(interpolation));
  }
  return h.value();
}

std::string KernelSpec::tag() const {
  std::ostringstream os;
  if (family == Family::landau) return "landau";
  os << "boltzmann(gamma=" << gamma << ", " << to_string(angular_kernel) << ", "
     << angular_nodes << "x" << impact_nodes << ", " << to_string(interpolation) << ")";
  return os.str();
}

AngularRule angular_rule(const KernelSpec& kernel) {
  const int nt = kernel.angular_nodes / 2;
  const int np = kernel.impact_nodes;
  const auto gl = quadrature::gauss_legendre(nt, 0.0, 1.0);
  AngularRule r;
  for (int i = 0; i < nt; ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int q = 0; q < np; ++q) {
      const double phi = 2.0 * kPi * (q + 0.5) / np;
      r.cos_theta.push_back(c);
      r.s1.push_back(s * std::cos(phi));
      r.s2.push_back(s * std::sin(phi));
      const double w = 2.0 * gl.weights[i] * (2.0 * kPi / np) * kernel.angular(c);
      r.weight.push_back(w);
      r.b0 += w;
    }
  }
  return r;
}

double collision_frequency(const Vec3& v, double gamma) {
  if (!(gamma > -3.0 && gamma <= 1.0)) {
    std::ostringstream os;
    os << "gamma = " << gamma << " is outside (-3, 1]";
    throw GammaOutOfRange(os.str());
  }
  const double speed = std::sqrt(velocity::norm2(v));
  auto fn = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double d = speed - r;
    return std::pow(r, 2.0 + gamma) * kNorm * std::exp(-0.5 * d * d) * s0_scaled(r * speed);
  };
  return radial(fn, speed);
}

Eigen::Matrix3d landau_sigma(const Vec3& v) {
  const double speed = std::sqrt(velocity::norm2(v));
  auto gauss = [&](double r) {
    const double d = speed - r;
    return r * kNorm * std::exp(-0.5 * d * d);
  };
  const double i0 = radial([&](double r) { return gauss(r) * s0_scaled(r * speed); }, speed);
  const double i2 = radial([&](double r) { return gauss(r) * s2_scaled(r * speed); }, speed);
  // Angular moments: int w_i w_j e^{a e.w} = A delta_ij + B e_i e_j with
  // 3A + B = S0 and A + B = S2.
  Eigen::Matrix3d s = 0.5 * (i0 + i2) * Eigen::Matrix3d::Identity();
  if (speed > 0.0) {
    const Eigen::Vector3d e(v[0] / speed, v[1] / speed, v[2] / speed);
    s -= 0.5 * (3.0 * i2 - i0) * e * e.transpose();
  }
  return s;
}

Eigen::VectorXd grid_collision_frequency(const VelocityGrid& grid, double gamma) {
  const std::size_t n = grid.size();
  Eigen::VectorXd nu(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = grid.node(k);
    double s = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == k) continue;
      const Vec3& w = grid.node(u);
      const double r2 = velocity::norm2({v[0] - w[0], v[1] - w[1], v[2] - w[2]});
      s += grid.weight(u) * maxwellian(w) * std::pow(r2, 0.5 * gamma);
    }
    const auto idx = grid.multi_index(k);
    const double hx = 0.5 * grid.axis_weights(0)[idx[0]];
    const double hy = 0.5 * grid.axis_weights(1)[idx[1]];
    const double hz = 0.5 * grid.axis_weights(2)[idx[2]];
    const double avg = quadrature::box_power_integral(hx, hy, hz, gamma) / (8.0 * hx * hy * hz);
    nu[static_cast<Eigen::Index>(k)] = s + grid.weight(k) * maxwellian(v) * avg;
  }
  return nu;
}

namespace detail {

Geometry::Geometry(const VelocityGrid& g, const KernelSpec& kernel)
    : grid(&g), rule(angular_rule(kernel)), gamma(kernel.gamma), interp(kernel.interpolation) {
  const std::size_t n = g.size();
  mu.resize(n);
  sqrt_mu.resize(n);
  inv_sqrt_mu.resize(n);
  weight.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    mu[k] = maxwellian(g.node(k));
    sqrt_mu[k] = std::sqrt(mu[k]);
    inv_sqrt_mu[k] = 1.0 / sqrt_mu[k];
    weight[k] = g.weight(k);
  }
  const auto c = g.counts();
  stride = {static_cast<std::size_t>(c[1]) * c[2], static_cast<std::size_t>(c[2]), 1};
  for (int a = 0; a < 3; ++a) {
    uniform[a] = g.uniform_weights();
    x0[a] = g.axis(a).front();
    h[a] = g.axis(a)[1] - g.axis(a)[0];
    inv_h[a] = 1.0 / h[a];
    last[a] = c[a] - 1;
  }
  all_uniform = uniform[0] && uniform[1] && uniform[2];
}

Stencil Geometry::stencil(const Vec3& p) const {
  Stencil s;
  s.width = interp == Interpolation::quadratic ? 3 : 2;
  if (all_uniform && s.width == 3) {
    for (int a = 0; a < 3; ++a) {
      const double z = (p[a] - x0[a]) * inv_h[a];
      int i = static_cast<int>(std::floor(z + 0.5));
      i = i < 1 ? 1 : (i > last[a] - 1 ? last[a] - 1 : i);
      const double t = z - i;
      s.w[a][0] = 0.5 * t * (t - 1.0);
      s.w[a][1] = 1.0 - t * t;
      s.w[a][2] = 0.5 * t * (t + 1.0);
      s.base += static_cast<std::size_t>(i - 1) * stride[a];
    }
    return s;
  }
  for (int a = 0; a < 3; ++a) {
    const std::vector<double>& x = grid->axis(a);
    const int n = static_cast<int>(x.size());
    const double y = p[a];
    if (s.width == 3) {
      int i = static_cast<int>(std::lower_bound(x.begin(), x.end(), y) - x.begin());
      if (i > 0 && (i == n || y - x[i - 1] < x[i] - y)) --i;
      i = std::clamp(i, 1, n - 2);
      const double xa = x[i - 1], xb = x[i], xc = x[i + 1];
      s.w[a][0] = (y - xb) * (y - xc) / ((xa - xb) * (xa - xc));
      s.w[a][1] = (y - xa) * (y - xc) / ((xb - xa) * (xb - xc));
      s.w[a][2] = (y - xa) * (y - xb) / ((xc - xa) * (xc - xb));
      s.base += static_cast<std::size_t>(i - 1) * stride[a];
    } else {
      int i;
      if (uniform[a]) {
        i = static_cast<int>(std::floor((y - x0[a]) * inv_h[a]));
      } else {
        i = static_cast<int>(std::upper_bound(x.begin(), x.end(), y) - x.begin()) - 1;
      }
      i = std::clamp(i, 0, n - 2);
      const double t = (y - x[i]) / (x[i + 1] - x[i]);
      s.w[a][0] = 1.0 - t;
      s.w[a][1] = t;
      s.base += static_cast<std::size_t>(i) * stride[a];
    }
  }
  return s;
}

}  // namespace detail

namespace {

Eigen::VectorXd sqrt_weights(const VelocityGrid& grid) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) w[k] = std::sqrt(grid.weight(k));
  return w;
}

// Pi M Pi with Pi = I - P the weighted projection onto the complement of the
// invariants, followed by symmetrization in the weighted inner product.
void conservative_correction(const GridPtr& grid, Eigen::MatrixXd& M) {
  const velocity::InvariantBasis basis(grid);
  const Eigen::MatrixXd& phi = basis.functions();
  Eigen::MatrixXd wphi = phi;
  for (std::size_t k = 0; k < grid->size(); ++k) wphi.row(k) *= grid->weight(k);
  const Eigen::MatrixXd C = basis.gram().llt().solve(wphi.transpose());  // 5 x N
  const Eigen::MatrixXd CM = C * M;
  const Eigen::MatrixXd MPhi = M * phi;
  const Eigen::MatrixXd CMPhi = CM * phi;
  M.noalias() -= phi * CM;
  M.noalias() -= MPhi * C;
  M.noalias() += phi * (CMPhi * C);
  if (grid->uniform_weights()) {
    M = 0.5 * (M + M.transpose()).eval();
  } else {
    const Eigen::VectorXd sw = sqrt_weights(*grid);
    Eigen::MatrixXd S = sw.asDiagonal() * M * sw.cwiseInverse().asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    M = sw.cwiseInverse().asDiagonal() * S * sw.asDiagonal();
  }
}

Eigen::VectorXd boltzmann_loss(const VelocityGrid& grid, const KernelSpec& kernel) {
  const AngularRule rule = angular_rule(kernel);
  const std::size_t n = grid.size();
  Eigen::VectorXd loss = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = grid.node(k);
    for (std::size_t u = 0; u < n; ++u) {
      if (u == k) continue;
      const Vec3& w = grid.node(u);
      const double r2 = velocity::norm2({v[0] - w[0], v[1] - w[1], v[2] - w[2]});
      loss[k] += rule.b0 * grid.weight(u) * maxwellian(w) * std::pow(r2, 0.5 * kernel.gamma);
    }
  }
  return loss;
}

}  // namespace

LandauForm landau_form(const VelocityGrid& grid) {
  const std::size_t n = grid.size();
  const auto c = grid.counts();
  const std::array<std::size_t, 3> stride{static_cast<std::size_t>(c[1]) * c[2],
                                          static_cast<std::size_t>(c[2]), 1};
  LandauForm out;
  out.form = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.weight.resize(static_cast<Eigen::Index>(n));
  std::vector<Eigen::Matrix3d> sigma(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t k = 0; k < n; ++k) sigma[k] = landau_sigma(grid.node(k));

  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = grid.node(k);
    const auto idx = grid.multi_index(k);
    const Eigen::Vector3d ve(v[0], v[1], v[2]);
    const double wk = grid.weight(k);
    out.weight[k] = ve.dot(sigma[k] * ve);
    out.form(k, k) += wk * out.weight[k];
    // Difference stencils matching velocity::derivative.
    std::array<std::array<std::size_t, 2>, 3> node{};
    std::array<std::array<double, 2>, 3> coef{};
    for (int a = 0; a < 3; ++a) {
      const auto& x = grid.axis(a);
      const int p = idx[a];
      const int na = c[a];
      std::size_t lo = k, hi = k;
      double dx;
      if (p == 0) {
        hi = k + stride[a];
        dx = x[1] - x[0];
      } else if (p == na - 1) {
        lo = k - stride[a];
        dx = x[na - 1] - x[na - 2];
      } else {
        lo = k - stride[a];
        hi = k + stride[a];
        dx = x[p + 1] - x[p - 1];
      }
      node[a] = {lo, hi};
      coef[a] = {-1.0 / dx, 1.0 / dx};
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double s = wk * sigma[k](i, j);
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q)
            out.form(node[i][p], node[j][q]) += s * coef[i][p] * coef[j][q];
      }
  }
  return out;
}

namespace {

double null_residual(const AssembledL& op) {
  const velocity::InvariantBasis basis(op.grid);
  const Eigen::MatrixXd& phi = basis.functions();
  const Eigen::MatrixXd lphi = op.matrix * phi;
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd scale = op.loss.cwiseProduct(phi.col(i));
    const velocity::NodalWeight nw{op.nu};
    const double num = velocity::weighted_inner(*op.grid, lphi.col(i), lphi.col(i), nw);
    const double den = velocity::weighted_inner(*op.grid, scale, scale, nw);
    worst = std::max(worst, std::sqrt(num / den));
  }
  return worst;
}

}  // namespace

Eigen::MatrixXd AssembledL::symmetric_form() const {
  if (grid->uniform_weights()) return matrix;
  const Eigen::VectorXd sw = sqrt_weights(*grid);
  return sw.asDiagonal() * matrix * sw.cwiseInverse().asDiagonal();
}

std::uint64_t AssembledL::hash() const {
  Fnv1a h;
  h.u64(grid->hash());
  h.u64(kernel.hash());
  return h.value();
}

Eigen::MatrixXd assemble_boltzmann_raw(const VelocityGrid& grid, const KernelSpec& kernel,
                                       bool parallel) {
  kernel.validate();
  const detail::Geometry geo(grid, kernel);
  Eigen::MatrixXd M;
  if (parallel) {
    detail::boltzmann_rows_omp(geo, M);
  } else {
    detail::boltzmann_rows_serial(geo, M);
  }
  return M;
}

AssembledL assemble_L(const GridPtr& grid, const KernelSpec& kernel,
                      const AssemblyOptions& opts) {
  kernel.validate();
  const std::size_t n = grid->size();
  if (n * n > opts.max_entries) {
    std::ostringstream os;
    os << "dense L needs " << n * n << " entries, cap is " << opts.max_entries;
    throw AssemblyBudgetExceeded(os.str());
  }
  AssembledL op;
  op.kernel = kernel;
  op.grid = grid;

  if (kernel.family == Family::boltzmann) {
    op.nu = grid_collision_frequency(*grid, kernel.gamma);
    op.loss = boltzmann_loss(*grid, kernel);
  } else {
    for (int c : grid->counts())
      if (c < 12) throw UnsupportedKernel("landau assembly needs at least 12 nodes per axis");
    LandauForm parts = landau_form(*grid);
    op.nu = parts.weight;
    op.sigma_form = std::move(parts.form);
    op.loss.resize(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) op.loss[k] = op.sigma_form(k, k) / grid->weight(k);
  }

  if (!opts.cache_path.empty() && load_cache(opts.cache_path, grid, kernel, op)) {
    op.from_cache = true;
  } else {
    if (kernel.family == Family::boltzmann) {
      op.matrix = assemble_boltzmann_raw(*grid, kernel, opts.parallel);
    } else {
      op.matrix = op.sigma_form;
      for (std::size_t k = 0; k < n; ++k) op.matrix.row(k) /= grid->weight(k);
    }
    if (opts.conservative || kernel.family == Family::landau)
      conservative_correction(grid, op.matrix);
    if (!opts.cache_path.empty()) save_cache(opts.cache_path, op);
  }

  const double res = null_residual(op);
  if (res > opts.tol_null) {
    std::ostringstream os;
    os << "invariant residual " << res << " exceeds tol_null " << opts.tol_null;
    throw NullspaceDefect(os.str());
  }
  return op;
}

StructureReport structure_report(const AssembledL& op, bool with_eigenvalue) {
  StructureReport r;
  const Eigen::MatrixXd S = op.symmetric_form();
  r.symmetry_defect = (S - S.transpose()).cwiseAbs().maxCoeff();
  r.null_residual = null_residual(op);
  if (with_eigenvalue) r.min_eigenvalue = min_eigenvalue(op);
  return r;
}

GammaOperator::GammaOperator(GridPtr grid, KernelSpec kernel)
    : grid_(std::move(grid)), kernel_(kernel), basis_(grid_) {
  if (kernel_.family != Family::boltzmann)
    throw UnsupportedKernel("Gamma is only available for the boltzmann family");
  kernel_.validate();
  rule_ = angular_rule(kernel_);
  const std::size_t n = grid_->size();
  loss_kernel_.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  sqrt_mu_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = grid_->node(k);
    sqrt_mu_[k] = sqrt_maxwellian(v);
    for (std::size_t u = 0; u < n; ++u) {
      if (u == k) continue;
      const Vec3& w = grid_->node(u);
      const double r2 = velocity::norm2({v[0] - w[0], v[1] - w[1], v[2] - w[2]});
      loss_kernel_(k, u) =
          rule_.b0 * grid_->weight(u) * maxwellian(w) * std::pow(r2, 0.5 * kernel_.gamma);
    }
  }
}

Eigen::MatrixXd GammaOperator::operator()(const Eigen::Ref<const Eigen::MatrixXd>& f,
                                          const Eigen::Ref<const Eigen::MatrixXd>& g,
                                          const GammaOptions& opts) const {
  return evaluate(f, &g, opts);
}

Eigen::MatrixXd GammaOperator::quadratic(const Eigen::Ref<const Eigen::MatrixXd>& f,
                                         const GammaOptions& opts) const {
  return evaluate(f, nullptr, opts);
}

Eigen::MatrixXd GammaOperator::evaluate(const Eigen::Ref<const Eigen::MatrixXd>& f,
                                        const Eigen::Ref<const Eigen::MatrixXd>* g,
                                        const GammaOptions& opts) const {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto n = static_cast<Eigen::Index>(grid_->size());
  if (f.rows() != n || (g && (g->rows() != n || g->cols() != f.cols())))
    throw GridMismatch("Gamma arguments do not match the assembly grid");
  const int m = static_cast<int>(f.cols());
  const Eigen::VectorXd inv = sqrt_mu_.cwiseInverse();
  const RowMajor phi_f = inv.asDiagonal() * f;
  RowMajor phi_g;
  if (g) phi_g = inv.asDiagonal() * (*g);

  const detail::Geometry geo(*grid_, kernel_);
  RowMajor gain(n, m);
  const double* pg = g ? phi_g.data() : nullptr;
  if (opts.parallel) {
    detail::gamma_gain_omp(geo, phi_f.data(), pg, m, gain.data());
  } else {
    detail::gamma_gain_serial(geo, phi_f.data(), pg, m, gain.data());
  }

  Eigen::MatrixXd out(n, m);
  if (g) {
    const Eigen::MatrixXd kf = loss_kernel_ * Eigen::MatrixXd(phi_f);
    const Eigen::MatrixXd kg = loss_kernel_ * Eigen::MatrixXd(phi_g);
    out = gain - 0.5 * (phi_f.cwiseProduct(kg) + phi_g.cwiseProduct(kf));
  } else {
    const Eigen::MatrixXd kf = loss_kernel_ * Eigen::MatrixXd(phi_f);
    out = gain - phi_f.cwiseProduct(kf);
  }
  out = sqrt_mu_.asDiagonal() * out;
  if (opts.conservative) out = basis_.complement(out);
  return out;
}

Eigen::VectorXd gamma_bilinear(const velocity::VelocityFunction& f,
                               const velocity::VelocityFunction& g, const KernelSpec& kernel) {
  velocity::require_same_grid(*f.grid, *g.grid);
  const GammaOperator op(f.grid, kernel);
  return op(f.values, g.values).col(0);
}

}  // namespace alab::collision
