#include "alab/velocity_space.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/hashing.hpp"
#include "alab/quadrature.hpp"

namespace alab {

std::string hex_hash(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace alab

namespace alab::velocity {

namespace {
const double kMaxwellNorm = std::pow(2.0 * std::numbers::pi, -1.5);
}

std::string to_string(QuadratureRule rule) {
  return rule == QuadratureRule::uniform_midpoint ? "uniform" : "gauss_hermite";
}

QuadratureRule parse_rule(const std::string& tag) {
  if (tag == "uniform" || tag == "uniform_midpoint") return QuadratureRule::uniform_midpoint;
  if (tag == "gauss_hermite" || tag == "hermite") return QuadratureRule::gauss_hermite;
  throw ConfigError("unknown quadrature rule '" + tag + "'");
}

double MomentResiduals::max() const { return std::max({mass, momentum, energy}); }

VelocityGrid::VelocityGrid(double v_max, std::array<int, 3> counts, QuadratureRule rule)
    : v_max_(v_max), counts_(counts), rule_(rule) {
  for (int a = 0; a < 3; ++a) {
    const int n = counts[a];
    if (rule == QuadratureRule::uniform_midpoint) {
      const double h = 2.0 * v_max / n;
      axis_[a].resize(n);
      axis_w_[a].assign(n, h);
      for (int i = 0; i < n; ++i) axis_[a][i] = -v_max + (i + 0.5) * h;
    } else {
      const auto r = quadrature::gauss_hermite(n);
      axis_[a] = r.nodes;
      axis_w_[a].resize(n);
      // Convert from weight exp(-x^2/2) to plain dx.
      for (int i = 0; i < n; ++i) axis_w_[a][i] = r.weights[i] * std::exp(0.5 * r.nodes[i] * r.nodes[i]);
    }
    extent_ = std::max(extent_, std::abs(axis_[a].front()));
  }
  if (rule == QuadratureRule::gauss_hermite) v_max_ = extent_;

  nodes_.reserve(static_cast<std::size_t>(counts[0]) * counts[1] * counts[2]);
  for (int i = 0; i < counts[0]; ++i)
    for (int j = 0; j < counts[1]; ++j)
      for (int k = 0; k < counts[2]; ++k) {
        nodes_.push_back({axis_[0][i], axis_[1][j], axis_[2][k]});
        weights_.push_back(axis_w_[0][i] * axis_w_[1][j] * axis_w_[2][k]);
      }

  Fnv1a h;
  h.text("velocity-grid/v1");
  h.i64(static_cast<int>(rule));
  for (int a = 0; a < 3; ++a) {
    h.i64(counts[a]);
    h.f64s(axis_[a]);
    h.f64s(axis_w_[a]);
  }
  hash_ = h.value();
}

std::array<int, 3> VelocityGrid::multi_index(std::size_t n) const {
  const int k = static_cast<int>(n % counts_[2]);
  n /= counts_[2];
  const int j = static_cast<int>(n % counts_[1]);
  const int i = static_cast<int>(n / counts_[1]);
  return {i, j, k};
}

std::size_t VelocityGrid::mirror(std::size_t n) const {
  const auto [i, j, k] = multi_index(n);
  return index(counts_[0] - 1 - i, counts_[1] - 1 - j, counts_[2] - 1 - k);
}

MomentResiduals VelocityGrid::residuals() const {
  // Pair +v with -v explicitly so the odd moments cancel exactly.
  double mass = 0.0, energy = 0.0;
  Vec3 mom{0.0, 0.0, 0.0};
  for (std::size_t n = 0; n < size(); ++n) {
    const double m = weights_[n] * maxwellian(nodes_[n]);
    mass += m;
    energy += m * norm2(nodes_[n]);
    const std::size_t r = mirror(n);
    if (r > n) {
      const double mr = weights_[r] * maxwellian(nodes_[r]);
      for (int a = 0; a < 3; ++a) mom[a] += m * nodes_[n][a] + mr * nodes_[r][a];
    }
  }
  return {std::abs(mass - 1.0), std::sqrt(norm2(mom)), std::abs(energy - 3.0)};
}

double VelocityGrid::truncated_mass_defect() const {
  if (rule_ != QuadratureRule::uniform_midpoint) return 0.0;
  const double inside = std::erf(v_max_ / std::numbers::sqrt2);
  return 1.0 - inside * inside * inside;
}

GridPtr build_grid(double v_max, std::array<int, 3> counts, QuadratureRule rule,
                   GridOptions opts) {
  if (!(v_max > 0.0)) throw std::invalid_argument("build_grid: V_max must be positive");
  for (int n : counts)
    if (n < 4 || n % 2 != 0)
      throw std::invalid_argument("build_grid: every count must be even and >= 4");
  auto grid = std::make_shared<const VelocityGrid>(v_max, counts, rule);
  const MomentResiduals r = grid->residuals();
  auto fail = [&](const char* name, double value) {
    std::ostringstream os;
    os.precision(3);
    os << name << " moment residual " << value << " exceeds tol_moment " << opts.tol_moment
       << " (V_max=" << v_max << ", counts=" << counts[0] << "x" << counts[1] << "x"
       << counts[2] << ", truncated mass " << grid->truncated_mass_defect() << ")";
    throw MomentResidualTooLarge(os.str());
  };
  if (r.mass > opts.tol_moment) fail("mass", r.mass);
  if (r.momentum > opts.tol_moment) fail("momentum", r.momentum);
  if (r.energy > opts.tol_moment) fail("energy", r.energy);
  return grid;
}

double maxwellian(const Vec3& v) { return kMaxwellNorm * std::exp(-0.5 * norm2(v)); }

double WeightFn::operator()(const Vec3& v) const {
  return std::pow(1.0 + norm2(v), 0.5 * power);
}

void require_same_grid(const VelocityGrid& a, const VelocityGrid& b) {
  if (&a != &b && a.hash() != b.hash())
    throw GridMismatch("velocity functions sampled on different grids (" + hex_hash(a.hash()) +
                       " vs " + hex_hash(b.hash()) + ")");
}

double weighted_inner(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                      const Eigen::Ref<const Eigen::VectorXd>& g, const InnerWeight& weight) {
  const std::size_t n = grid.size();
  if (static_cast<std::size_t>(f.size()) != n || static_cast<std::size_t>(g.size()) != n)
    throw GridMismatch("vector length does not match grid size");
  double s = 0.0;
  if (std::holds_alternative<std::monostate>(weight)) {
    for (std::size_t k = 0; k < n; ++k) s += grid.weight(k) * f[k] * g[k];
  } else if (const auto* w = std::get_if<WeightFn>(&weight)) {
    for (std::size_t k = 0; k < n; ++k) s += grid.weight(k) * (*w)(grid.node(k)) * f[k] * g[k];
  } else {
    const auto& nw = std::get<NodalWeight>(weight).values;
    if (static_cast<std::size_t>(nw.size()) != n)
      throw GridMismatch("nodal weight length does not match grid size");
    for (std::size_t k = 0; k < n; ++k) s += grid.weight(k) * nw[k] * f[k] * g[k];
  }
  return s;
}

double weighted_inner(const VelocityFunction& f, const VelocityFunction& g,
                      const InnerWeight& weight) {
  require_same_grid(*f.grid, *g.grid);
  return weighted_inner(*f.grid, f.values, g.values, weight);
}

namespace {

template <class Vec>
Vec derivative_impl(const VelocityGrid& grid, const Vec& f, int axis) {
  const auto c = grid.counts();
  const auto& x = grid.axis(axis);
  const int n = c[axis];
  Vec out(f.size());
  const std::size_t stride = axis == 0 ? static_cast<std::size_t>(c[1]) * c[2]
                             : axis == 1 ? static_cast<std::size_t>(c[2])
                                         : 1;
  for (std::size_t base = 0; base < grid.size(); ++base) {
    const int i = grid.multi_index(base)[axis];
    if (i != 0) continue;  // visit each line once, starting from its first node
    for (int p = 0; p < n; ++p) {
      const std::size_t at = base + p * stride;
      if (p == 0) {
        out[at] = (f[at + stride] - f[at]) / (x[1] - x[0]);
      } else if (p == n - 1) {
        out[at] = (f[at] - f[at - stride]) / (x[n - 1] - x[n - 2]);
      } else {
        out[at] = (f[at + stride] - f[at - stride]) / (x[p + 1] - x[p - 1]);
      }
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd derivative(const VelocityGrid& grid, const Eigen::Ref<const Eigen::VectorXd>& f,
                           int axis) {
  return derivative_impl(grid, Eigen::VectorXd(f), axis);
}

Eigen::VectorXcd derivative(const VelocityGrid& grid,
                            const Eigen::Ref<const Eigen::VectorXcd>& f, int axis) {
  return derivative_impl(grid, Eigen::VectorXcd(f), axis);
}

InvariantBasis::InvariantBasis(GridPtr grid) : grid_(std::move(grid)) {
  const std::size_t n = grid_->size();
  phi_.resize(static_cast<Eigen::Index>(n), 5);
  weighted_phi_.resize(static_cast<Eigen::Index>(n), 5);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = grid_->node(k);
    const double s = sqrt_maxwellian(v);
    phi_(k, 0) = s;
    phi_(k, 1) = v[0] * s;
    phi_(k, 2) = v[1] * s;
    phi_(k, 3) = v[2] * s;
    phi_(k, 4) = (0.5 * norm2(v) - 1.5) * s;
    weighted_phi_.row(k) = grid_->weight(k) * phi_.row(k);
  }
  gram_ = phi_.transpose() * weighted_phi_;
  gram_llt_.compute(gram_);
}

Eigen::MatrixXd InvariantBasis::moments(const Eigen::Ref<const Eigen::MatrixXd>& F) const {
  return weighted_phi_.transpose() * F;
}

Eigen::MatrixXd InvariantBasis::coefficients(const Eigen::Ref<const Eigen::MatrixXd>& F) const {
  return gram_llt_.solve(weighted_phi_.transpose() * F);
}

Eigen::MatrixXcd InvariantBasis::coefficients(
    const Eigen::Ref<const Eigen::MatrixXcd>& F) const {
  Eigen::MatrixXcd rhs = weighted_phi_.transpose().cast<std::complex<double>>() * F;
  Eigen::MatrixXcd out(5, F.cols());
  out.real() = gram_llt_.solve(Eigen::MatrixXd(rhs.real()));
  out.imag() = gram_llt_.solve(Eigen::MatrixXd(rhs.imag()));
  return out;
}

Eigen::MatrixXd InvariantBasis::project(const Eigen::Ref<const Eigen::MatrixXd>& F) const {
  return phi_ * coefficients(F);
}

Eigen::MatrixXcd InvariantBasis::project(const Eigen::Ref<const Eigen::MatrixXcd>& F) const {
  return phi_.cast<std::complex<double>>() * coefficients(F);
}

Eigen::MatrixXd InvariantBasis::complement(const Eigen::Ref<const Eigen::MatrixXd>& F) const {
  return F - project(F);
}

Eigen::MatrixXcd InvariantBasis::complement(const Eigen::Ref<const Eigen::MatrixXcd>& F) const {
  return F - project(F);
}

}  // namespace alab::velocity
