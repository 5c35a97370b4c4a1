#include "alab/acoustic_solver.hpp"

#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "alab/errors.hpp"
#include "alab/io.hpp"

namespace alab::acoustic {

namespace {

// Hydro row of each acoustic row.
std::vector<int> hydro_rows(int dim) {
  if (dim == 1) return {0, 1, 4};
  return {0, 1, 2, 3, 4};
}

Eigen::VectorXd symmetrizer(int fields) {
  Eigen::VectorXd h = Eigen::VectorXd::Ones(fields);
  h[fields - 1] = 1.5;
  return h;
}

}  // namespace

double sound_speed() { return std::sqrt(5.0 / 3.0); }

AcousticState AcousticState::zero(const SpatialGrid& s) {
  AcousticState a;
  a.space = s;
  a.coeffs = Eigen::MatrixXcd::Zero(a.fields(), static_cast<Eigen::Index>(s.modes()));
  return a;
}

AcousticState from_hydro(const HydroState& h) {
  AcousticState a = AcousticState::zero(h.space);
  const auto rows = hydro_rows(h.space.dim);
  Eigen::MatrixXd sel(a.fields(), h.fields.cols());
  for (int r = 0; r < a.fields(); ++r) sel.row(r) = h.fields.row(rows[r]);
  const spectral::RealFft fft(h.space, a.fields());
  a.coeffs = fft.forward(sel);
  return a;
}

HydroState to_hydro(const AcousticState& a) {
  HydroState h(a.space);
  const auto rows = hydro_rows(a.space.dim);
  const spectral::RealFft fft(a.space, a.fields());
  const Eigen::MatrixXd phys = fft.inverse(a.coeffs);
  for (int r = 0; r < a.fields(); ++r) h.fields.row(rows[r]) = phys.row(r);
  return h;
}

AcousticSymbol symbol_eigen(const std::array<double, 3>& k, int dim) {
  const int nf = dim == 1 ? 3 : 5;
  const int nu = nf - 2;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf, nf);
  for (int i = 0; i < nu; ++i) {
    A(0, 1 + i) = k[i];
    A(1 + i, 0) = k[i];
    A(1 + i, nf - 1) = k[i];
    A(nf - 1, 1 + i) = 2.0 / 3.0 * k[i];
  }
  // H A is symmetric for H = diag(1, ..., 1, 3/2).
  const Eigen::VectorXd h = symmetrizer(nf);
  const Eigen::VectorXd hs = h.cwiseSqrt();
  const Eigen::MatrixXd S = hs.asDiagonal() * A * hs.cwiseInverse().asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  AcousticSymbol out;
  out.matrix = A;
  out.frequencies = es.eigenvalues();
  out.vectors = hs.cwiseInverse().asDiagonal() * es.eigenvectors();
  out.inverse = es.eigenvectors().transpose() * hs.asDiagonal();
  return out;
}

AcousticState propagate(const AcousticState& s, double t) {
  AcousticState out = s;
  if (t == 0.0) return out;
  const auto modes = spectral::modes(s.space);
  const int n = s.space.n;
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < modes.size(); ++j) {
    std::array<double, 3> k = modes[j].k;
    for (int d = 0; d < 3; ++d)
      if (2 * modes[j].index[d] == n) k[d] = 0.0;
    if (k[0] == 0.0 && k[1] == 0.0 && k[2] == 0.0) continue;
    const AcousticSymbol sym = symbol_eigen(k, s.space.dim);
    Eigen::VectorXcd phase(sym.frequencies.size());
    for (Eigen::Index i = 0; i < phase.size(); ++i)
      phase[i] = std::exp(std::complex<double>(0.0, -sym.frequencies[i] * t));
    const auto col = static_cast<Eigen::Index>(j);
    const Eigen::VectorXcd w = sym.inverse.cast<std::complex<double>>() * s.coeffs.col(col);
    out.coeffs.col(col) = sym.vectors.cast<std::complex<double>>() * phase.cwiseProduct(w);
  }
  return out;
}

double acoustic_energy(const AcousticState& s, int sobolev) {
  const auto modes = spectral::modes(s.space);
  const Eigen::VectorXd h = symmetrizer(s.fields());
  const double np = static_cast<double>(s.space.points());
  double e = 0.0;
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const auto& k = modes[j].k;
    const double m = std::pow(1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2], sobolev);
    double col = 0.0;
    for (int r = 0; r < s.fields(); ++r)
      col += h[r] * std::norm(s.coeffs(r, static_cast<Eigen::Index>(j)));
    e += modes[j].multiplicity * m * col;
  }
  return e / (np * np);
}

HydroState sound_wave(const SpatialGrid& space, double amplitude, int m, int sign) {
  HydroState h(space);
  const double c = sound_speed();
  for (std::size_t p = 0; p < space.points(); ++p) {
    const double x = space.coordinate(p)[0];
    const double w = amplitude * std::cos(2.0 * std::numbers::pi * m * x);
    const auto col = static_cast<Eigen::Index>(p);
    h.fields(0, col) = w;
    h.fields(1, col) = sign * c * w;
    h.fields(4, col) = 2.0 / 3.0 * w;
  }
  return h;
}

void write_coefficients_csv(std::ostream& out, const AcousticState& s) {
  static const char* names3[] = {"rho", "u1", "u2", "u3", "theta"};
  static const char* names1[] = {"rho", "u1", "theta"};
  const char** names = s.space.dim == 1 ? names1 : names3;
  out << "k_index,field,re,im\n";
  for (Eigen::Index j = 0; j < s.coeffs.cols(); ++j)
    for (int r = 0; r < s.fields(); ++r)
      out << j << ',' << names[r] << ',' << io::num(s.coeffs(r, j).real()) << ','
          << io::num(s.coeffs(r, j).imag()) << '\n';
}

AcousticState read_coefficients_csv(std::istream& in, const SpatialGrid& space) {
  AcousticState s = AcousticState::zero(space);
  const std::vector<std::string> names =
      space.dim == 1 ? std::vector<std::string>{"rho", "u1", "theta"}
                     : std::vector<std::string>{"rho", "u1", "u2", "u3", "theta"};
  std::string line;
  if (!std::getline(in, line) || line.rfind("k_index", 0) != 0)
    throw FormatError("missing coefficient CSV header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string idx, field, re, im;
    if (!std::getline(ss, idx, ',') || !std::getline(ss, field, ',') ||
        !std::getline(ss, re, ',') || !std::getline(ss, im, ','))
      throw FormatError("malformed coefficient row at line " + std::to_string(lineno));
    int row = -1;
    for (std::size_t r = 0; r < names.size(); ++r)
      if (names[r] == field) row = static_cast<int>(r);
    const long j = std::stol(idx);
    if (row < 0 || j < 0 || j >= s.coeffs.cols())
      throw FormatError("coefficient row out of range at line " + std::to_string(lineno));
    s.coeffs(row, j) = {std::stod(re), std::stod(im)};
  }
  return s;
}

}  // namespace alab::acoustic
