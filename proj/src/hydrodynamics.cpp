#include "alab/hydrodynamics.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/io.hpp"

namespace alab {

void require_same_space(const SpatialGrid& a, const SpatialGrid& b) {
  if (!(a == b)) throw GridMismatch("spatial grids differ");
}

void require_same_field_grids(const PerturbationField& a, const PerturbationField& b) {
  velocity::require_same_grid(*a.vgrid, *b.vgrid);
  require_same_space(a.space, b.space);
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols())
    throw GridMismatch("field shapes differ");
}

namespace hydro {

namespace {

double torus_l2(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  return std::sqrt(rows.squaredNorm() / static_cast<double>(rows.cols()));
}

// Sum over spatial axes of d/dx_d applied to row block d (one row per axis).
Eigen::RowVectorXd divergence(const spectral::RealFft& fft, const std::vector<spectral::Mode>& m,
                              const Eigen::MatrixXd& comps, int dim) {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(comps.cols());
  for (int d = 0; d < dim; ++d)
    out += spectral::derivative(fft, m, comps.row(d), d).row(0);
  return out;
}

}  // namespace

Projection project_P(const PerturbationField& f) {
  const velocity::InvariantBasis basis(f.vgrid);
  if (static_cast<std::size_t>(f.values.rows()) != f.vgrid->size())
    throw GridMismatch("field rows do not match the velocity grid");
  Projection out;
  out.fields = HydroState(f.space);
  out.fields.fields = basis.coefficients(f.values);
  out.pf = f.like(basis.functions() * out.fields.fields);
  return out;
}

PerturbationField reconstruct(const HydroState& h, const GridPtr& grid, double epsilon) {
  const velocity::InvariantBasis basis(grid);
  PerturbationField f(grid, h.space, epsilon);
  f.values = basis.functions() * h.fields;
  return f;
}

Eigen::Matrix<double, 5, 5> abc_map(const GridPtr& grid) {
  const std::size_t n = grid->size();
  const velocity::InvariantBasis basis(grid);
  Eigen::MatrixXd b2(static_cast<Eigen::Index>(n), 5);
  Eigen::MatrixXd wb2(static_cast<Eigen::Index>(n), 5);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& v = grid->node(k);
    const double s = velocity::sqrt_maxwellian(v);
    b2.row(k) << s, v[0] * s, v[1] * s, v[2] * s, velocity::norm2(v) * s;
    wb2.row(k) = grid->weight(k) * b2.row(k);
  }
  const Eigen::MatrixXd g2 = b2.transpose() * wb2;
  return g2.llt().solve(wb2.transpose() * basis.functions());
}

Eigen::MatrixXd to_abc(const HydroState& h, const GridPtr& grid) {
  return abc_map(grid) * h.fields;
}

const std::array<const char*, MomentBasis::kSize>& MomentBasis::labels() {
  static const std::array<const char*, kSize> l = {
      "1",    "v1",   "v2",   "v3",   "v1v1",  "v1v2",  "v1v3",
      "v2v2", "v2v3", "v3v3", "v1|v|2", "v2|v|2", "v3|v|2"};
  return l;
}

int MomentBasis::pair_index(int i, int j) {
  if (i > j) std::swap(i, j);
  static const int table[3][3] = {{4, 5, 6}, {5, 7, 8}, {6, 8, 9}};
  return table[i][j];
}

MomentBasis::MomentBasis(GridPtr grid, double max_condition) : grid_(std::move(grid)) {
  const std::size_t n = grid_->size();
  phi_.resize(static_cast<Eigen::Index>(n), kSize);
  weighted_phi_.resize(static_cast<Eigen::Index>(n), kSize);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& v = grid_->node(k);
    const double s = velocity::sqrt_maxwellian(v);
    const double v2 = velocity::norm2(v);
    phi_(k, 0) = s;
    for (int i = 0; i < 3; ++i) {
      phi_(k, 1 + i) = v[i] * s;
      phi_(k, 10 + i) = v[i] * v2 * s;
      for (int j = i; j < 3; ++j) phi_(k, pair_index(i, j)) = v[i] * v[j] * s;
    }
    weighted_phi_.row(k) = grid_->weight(k) * phi_.row(k);
  }
  gram_ = phi_.transpose() * weighted_phi_;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition_ <= max_condition)) {
    std::ostringstream os;
    os << "13-moment Gram condition number " << condition_ << " exceeds " << max_condition;
    throw IllConditionedGram(os.str());
  }
  llt_.compute(gram_);

  const velocity::InvariantBasis inv(grid_);
  const Eigen::Matrix<double, 5, 5> lower = inv.gram().llt().matrixL();
  invariants_ = lower.triangularView<Eigen::Lower>()
                    .solve(inv.functions().transpose())
                    .transpose();
}

Eigen::MatrixXd MomentBasis::coefficients(const Eigen::Ref<const Eigen::MatrixXd>& f) const {
  if (static_cast<std::size_t>(f.rows()) != grid_->size())
    throw GridMismatch("function does not live on the moment-basis grid");
  return llt_.solve(weighted_phi_.transpose() * f);
}

Eigen::MatrixXd project_13moment(const Eigen::Ref<const Eigen::MatrixXd>& f,
                                 const MomentBasis& basis) {
  return basis.functions() * basis.coefficients(f);
}

Eigen::Matrix<double, 5, 1> global_conservation_residual(const PerturbationField& f) {
  const velocity::InvariantBasis basis(f.vgrid);
  const Eigen::MatrixXd m = basis.moments(f.values);  // 5 x points
  return m.rowwise().mean();
}

LocalResidual local_conservation_residual(const PerturbationField& f_now,
                                          const PerturbationField& f_prev, double dt) {
  require_same_field_grids(f_now, f_prev);
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const GridPtr& grid = f_now.vgrid;
  const std::size_t n = grid->size();
  const int dim = f_now.space.dim;
  const velocity::InvariantBasis basis(grid);

  const Eigen::MatrixXd abc_now = abc_map(grid) * basis.coefficients(f_now.values);
  const Eigen::MatrixXd abc_prev = abc_map(grid) * basis.coefficients(f_prev.values);
  const Eigen::MatrixXd micro = basis.complement(f_now.values);

  // Moments <(I-P) f, v_d |v|^2 sqrt(mu)> and <(I-P) f, v_d v_i sqrt(mu)>:
  // rows 0..2 energy flux per d, rows 3 + 3 d + i momentum flux.
  Eigen::MatrixXd probe(static_cast<Eigen::Index>(n), 12);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& v = grid->node(k);
    const double s = grid->weight(k) * velocity::sqrt_maxwellian(v);
    const double v2 = velocity::norm2(v);
    for (int d = 0; d < 3; ++d) {
      probe(k, d) = v[d] * v2 * s;
      for (int i = 0; i < 3; ++i) probe(k, 3 + 3 * d + i) = v[d] * v[i] * s;
    }
  }
  const Eigen::MatrixXd flux = probe.transpose() * micro;  // 12 x points

  const spectral::RealFft fft(f_now.space, 1);
  const auto modes = spectral::modes(f_now.space);
  auto grad = [&](const Eigen::RowVectorXd& row, int d) {
    return Eigen::RowVectorXd(spectral::derivative(fft, modes, row, d).row(0));
  };

  const Eigen::MatrixXd dt_abc = (abc_now - abc_prev) / dt;
  const Eigen::RowVectorXd div_energy = divergence(fft, modes, flux.topRows(3), dim);

  LocalResidual r;
  const auto np = static_cast<Eigen::Index>(f_now.space.points());
  r.fields.setZero(5, np);
  r.fields.row(0) = dt_abc.row(0) - 0.5 * div_energy;
  Eigen::RowVectorXd div_b = Eigen::RowVectorXd::Zero(np);
  for (int d = 0; d < dim; ++d) div_b += grad(abc_now.row(1 + d), d);
  r.fields.row(4) = dt_abc.row(4) + div_b / 3.0 + div_energy / 6.0;
  for (int i = 0; i < 3; ++i) {
    Eigen::RowVectorXd row = dt_abc.row(1 + i);
    if (i < dim) row += grad(abc_now.row(0), i) + 5.0 * grad(abc_now.row(4), i);
    for (int d = 0; d < dim; ++d) row += grad(flux.row(3 + 3 * d + i), d);
    r.fields.row(1 + i) = row;
  }
  r.a = torus_l2(r.fields.row(0));
  r.b = torus_l2(r.fields.middleRows(1, 3));
  r.c = torus_l2(r.fields.row(4));
  return r;
}

MacroscopicCoefficients macroscopic_coefficients(const PerturbationField& f_now,
                                                 const PerturbationField& f_prev, double dt,
                                                 const MomentBasis& basis,
                                                 const collision::AssembledL& opL,
                                                 const collision::GammaOperator* gamma) {
  require_same_field_grids(f_now, f_prev);
  velocity::require_same_grid(*f_now.vgrid, *basis.grid());
  velocity::require_same_grid(*f_now.vgrid, *opL.grid);
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  const GridPtr& grid = f_now.vgrid;
  const int dim = f_now.space.dim;
  const auto np = static_cast<Eigen::Index>(f_now.space.points());
  const velocity::InvariantBasis inv(grid);
  const Eigen::Matrix<double, 5, 5> map = abc_map(grid);
  const Eigen::MatrixXd abc_now = map * inv.coefficients(f_now.values);
  const Eigen::MatrixXd abc_prev = map * inv.coefficients(f_prev.values);
  const Eigen::MatrixXd dt_abc = (abc_now - abc_prev) / dt;

  const spectral::RealFft fft5(f_now.space, 5);
  const auto modes = spectral::modes(f_now.space);
  std::array<Eigen::MatrixXd, 3> grad_abc;
  for (int d = 0; d < 3; ++d)
    grad_abc[d] = d < dim ? spectral::derivative(fft5, modes, abc_now, d)
                          : Eigen::MatrixXd::Zero(5, np);

  MacroscopicCoefficients out;
  out.lhs.setZero(MomentBasis::kSize, np);
  out.lhs.row(0) = dt_abc.row(0);
  for (int i = 0; i < 3; ++i) {
    out.lhs.row(1 + i) = dt_abc.row(1 + i) + grad_abc[i].row(0);
    out.lhs.row(MomentBasis::pair_index(i, i)) += dt_abc.row(4);
    for (int j = 0; j < 3; ++j) out.lhs.row(MomentBasis::pair_index(i, j)) += grad_abc[i].row(1 + j);
    out.lhs.row(10 + i) = grad_abc[i].row(4);
  }

  const Eigen::MatrixXd micro_now = inv.complement(f_now.values);
  const Eigen::MatrixXd micro_prev = inv.complement(f_prev.values);
  const spectral::RealFft fftv(f_now.space, static_cast<int>(grid->size()));
  Eigen::MatrixXd stream = Eigen::MatrixXd::Zero(micro_now.rows(), np);
  for (int d = 0; d < dim; ++d) {
    const Eigen::MatrixXd g = spectral::derivative(fftv, modes, micro_now, d);
    for (std::size_t k = 0; k < grid->size(); ++k)
      stream.row(static_cast<Eigen::Index>(k)) += grid->node(k)[d] * g.row(static_cast<Eigen::Index>(k));
  }
  const Eigen::MatrixXd lin =
      -(micro_now - micro_prev) / dt - stream - opL.matrix * micro_now / f_now.epsilon;
  out.linear = basis.coefficients(lin);
  if (gamma) {
    out.nonlinear = basis.coefficients(gamma->quadratic(f_now.values));
  } else {
    out.nonlinear.setZero(MomentBasis::kSize, np);
  }
  out.balance = out.lhs - out.linear - out.nonlinear;
  return out;
}

void write_hydro_csv(std::ostream& out, const HydroState& h) {
  out << "index,x,rho,u1,u2,u3,theta\n";
  for (std::size_t p = 0; p < h.space.points(); ++p) {
    const auto x = h.space.coordinate(p);
    const auto c = static_cast<Eigen::Index>(p);
    out << p << ',' << io::num(x[0]);
    for (int r = 0; r < 5; ++r) out << ',' << io::num(h.fields(r, c));
    out << '\n';
  }
}

}  // namespace hydro
}  // namespace alab
