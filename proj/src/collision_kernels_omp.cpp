#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "alab/detail/collision_kernels.hpp"

namespace alab::collision::detail {

void boltzmann_rows_omp(const Geometry& geo, Eigen::MatrixXd& M) {
  const VelocityGrid& grid = *geo.grid;
  const std::size_t n = geo.size();
  const AngularRule& rule = geo.rule;
  const std::size_t nq = rule.size();
  // Column k of T is row k of the operator; transposed once at the end.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));

#pragma omp parallel
  {
    std::vector<double> gain(n);
    std::vector<Frame> frames(n);
    std::vector<double> cm(n);
#pragma omp for schedule(dynamic, 4)
    for (std::size_t k = 0; k < n; ++k) {
      std::fill(gain.begin(), gain.end(), 0.0);
      double* col = T.col(static_cast<Eigen::Index>(k)).data();
      const Vec3& v = grid.node(k);
      double diag = 0.0;
      for (std::size_t u = 0; u < n; ++u) {
        if (u == k) {
          cm[u] = 0.0;
          continue;
        }
        const Vec3& w = grid.node(u);
        frames[u] = make_frame({v[0] - w[0], v[1] - w[1], v[2] - w[2]});
        const double cb = geo.weight[u] * geo.kinetic(frames[u].r);
        diag += cb * rule.b0 * geo.mu[u];
        col[u] += cb * rule.b0 * geo.sqrt_mu[u] * geo.sqrt_mu[k];
        cm[u] = cb * geo.mu[u];
      }
      // Angle-outer order: consecutive scatters land on different nodes, so
      // the accumulations do not serialize on the same addresses.
      for (std::size_t q = 0; q < nq; ++q) {
        const double ct = rule.cos_theta[q], a1 = rule.s1[q], a2 = rule.s2[q];
        for (std::size_t u = 0; u < n; ++u) {
          if (u == k) continue;
          const Frame& fr = frames[u];
          const Vec3& w = grid.node(u);
          const double s = fr.r * ct;
          const double c = cm[u] * rule.weight[q];
          Vec3 om;
          for (int i = 0; i < 3; ++i) om[i] = a1 * fr.e1[i] + a2 * fr.e2[i] + ct * fr.e3[i];
          const Vec3 vp{v[0] - s * om[0], v[1] - s * om[1], v[2] - s * om[2]};
          const Vec3 up{w[0] + s * om[0], w[1] + s * om[1], w[2] + s * om[2]};
          geo.for_each(geo.stencil(vp), [&](std::size_t j, double lam) { gain[j] += c * lam; });
          geo.for_each(geo.stencil(up), [&](std::size_t j, double lam) { gain[j] += c * lam; });
        }
      }
      col[k] += diag;
      const double sk = geo.sqrt_mu[k];
      for (std::size_t j = 0; j < n; ++j) col[j] -= sk * gain[j] * geo.inv_sqrt_mu[j];
    }
  }
  M = T.transpose();
}

namespace {

// On a uniform grid with quadratic stencils the post-collision points of a
// pair, relative to its own nodes, depend only on the index difference
// k - u. One table entry per (difference, angle) replaces the frame and
// stencil arithmetic of every pair sharing that difference.
struct Shift {
  std::array<int, 3> off;
  std::array<double, 3> t;
};

struct ShiftTable {
  std::array<int, 3> span{};
  std::size_t nq = 0;
  std::vector<Shift> vp, up;
  std::vector<double> kin;

  std::size_t index(const std::array<int, 3>& d) const {
    return (static_cast<std::size_t>(d[0] + span[0] / 2) * span[1] + (d[1] + span[1] / 2)) *
               span[2] +
           (d[2] + span[2] / 2);
  }
};

ShiftTable shift_table(const Geometry& geo) {
  const AngularRule& rule = geo.rule;
  const auto c = geo.grid->counts();
  ShiftTable tb;
  tb.nq = rule.size();
  for (int a = 0; a < 3; ++a) tb.span[a] = 2 * c[a] - 1;
  const std::size_t nd = static_cast<std::size_t>(tb.span[0]) * tb.span[1] * tb.span[2];
  tb.vp.resize(nd * tb.nq);
  tb.up.resize(nd * tb.nq);
  tb.kin.assign(nd, 0.0);
  auto split = [](double z, Shift& sh, int a) {
    const int i = static_cast<int>(std::floor(z + 0.5));
    sh.off[a] = i;
    sh.t[a] = z - i;
  };
  for (int d0 = 1 - c[0]; d0 < c[0]; ++d0)
    for (int d1 = 1 - c[1]; d1 < c[1]; ++d1)
      for (int d2 = 1 - c[2]; d2 < c[2]; ++d2) {
        if (d0 == 0 && d1 == 0 && d2 == 0) continue;
        const std::size_t di = tb.index({d0, d1, d2});
        const Frame fr = make_frame({d0 * geo.h[0], d1 * geo.h[1], d2 * geo.h[2]});
        tb.kin[di] = geo.kinetic(fr.r);
        for (std::size_t q = 0; q < tb.nq; ++q) {
          const double s = fr.r * rule.cos_theta[q];
          Shift& sv = tb.vp[di * tb.nq + q];
          Shift& su = tb.up[di * tb.nq + q];
          for (int a = 0; a < 3; ++a) {
            const double disp =
                s * (rule.s1[q] * fr.e1[a] + rule.s2[q] * fr.e2[a] + rule.cos_theta[q] * fr.e3[a]);
            split(-disp * geo.inv_h[a], sv, a);
            split(disp * geo.inv_h[a], su, a);
          }
        }
      }
  return tb;
}

Stencil shifted(const Geometry& geo, const std::array<int, 3>& at, const Shift& sh) {
  Stencil s;
  for (int a = 0; a < 3; ++a) {
    const int raw = at[a] + sh.off[a];
    const int i = raw < 1 ? 1 : (raw > geo.last[a] - 1 ? geo.last[a] - 1 : raw);
    const double t = sh.t[a] + (raw - i);
    s.w[a][0] = 0.5 * t * (t - 1.0);
    s.w[a][1] = 1.0 - t * t;
    s.w[a][2] = 0.5 * t * (t + 1.0);
    s.base += static_cast<std::size_t>(i - 1) * geo.stride[a];
  }
  return s;
}

}  // namespace

namespace {

// Pair loop for a block of B columns (B a compile-time width, so the
// stencil gathers vectorize). phi arrays are node-major with row stride B.
template <int B>
void gain_block(const Geometry& geo, const ShiftTable& table, bool tabulated,
                const std::vector<std::array<int, 3>>& at, const double* phi_f,
                const double* phi_g, double* buf) {
  const VelocityGrid& grid = *geo.grid;
  const std::size_t n = geo.size();
  const AngularRule& rule = geo.rule;
  const std::size_t nq = rule.size();
  auto gather = [&](const Stencil& st, const double* src, double* dst) {
    double d[B] = {};
    for (int a = 0; a < 3; ++a) {
      const std::size_t ia = st.base + a * geo.stride[0];
      for (int b = 0; b < 3; ++b) {
        const double* row = src + (ia + b * geo.stride[1]) * B;
        const double wab = st.w[0][a] * st.w[1][b];
        const double l0 = wab * st.w[2][0], l1 = wab * st.w[2][1], l2 = wab * st.w[2][2];
        for (int c = 0; c < B; ++c) d[c] += l0 * row[c] + l1 * row[B + c] + l2 * row[2 * B + c];
      }
    }
    for (int c = 0; c < B; ++c) dst[c] = d[c];
  };

#pragma omp for schedule(static, 1)
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3& v = grid.node(k);
    for (std::size_t u = k + 1; u < n; ++u) {
      const Vec3& w = grid.node(u);
      Frame fr;
      std::size_t di = 0;
      if (tabulated) {
        di = table.index({at[k][0] - at[u][0], at[k][1] - at[u][1], at[k][2] - at[u][2]});
      } else {
        fr = make_frame({v[0] - w[0], v[1] - w[1], v[2] - w[2]});
      }
      double acc[B] = {};
      double fv[B], fu[B], gv[B], gu[B];
      for (std::size_t q = 0; q < nq; ++q) {
        Stencil sv, su;
        if (tabulated) {
          sv = shifted(geo, at[k], table.vp[di * nq + q]);
          su = shifted(geo, at[u], table.up[di * nq + q]);
        } else {
          const double s = fr.r * rule.cos_theta[q];
          Vec3 om;
          for (int i = 0; i < 3; ++i)
            om[i] = rule.s1[q] * fr.e1[i] + rule.s2[q] * fr.e2[i] + rule.cos_theta[q] * fr.e3[i];
          sv = geo.stencil({v[0] - s * om[0], v[1] - s * om[1], v[2] - s * om[2]});
          su = geo.stencil({w[0] + s * om[0], w[1] + s * om[1], w[2] + s * om[2]});
        }
        const double c = rule.weight[q];
        gather(sv, phi_f, fv);
        gather(su, phi_f, fu);
        if (phi_g == nullptr) {
          for (int j = 0; j < B; ++j) acc[j] += c * fv[j] * fu[j];
        } else {
          gather(sv, phi_g, gv);
          gather(su, phi_g, gu);
          const double h = 0.5 * c;
          for (int j = 0; j < B; ++j) acc[j] += h * (fv[j] * gu[j] + gv[j] * fu[j]);
        }
      }
      const double kin = tabulated ? table.kin[di] : geo.kinetic(fr.r);
      const double ck = geo.weight[u] * geo.mu[u] * kin;
      const double cu = geo.weight[k] * geo.mu[k] * kin;
      double* rk = buf + k * B;
      double* ru = buf + u * B;
      for (int j = 0; j < B; ++j) {
        rk[j] += ck * acc[j];
        ru[j] += cu * acc[j];
      }
    }
  }
}

}  // namespace

namespace {

template <int B>
void gain_blocks(const Geometry& geo, const double* phi_f, const double* phi_g, int m,
                 double* out) {
  const std::size_t n = geo.size();
  const int nthreads = omp_get_max_threads();
  const bool tabulated = geo.all_uniform;
  const ShiftTable table = tabulated ? shift_table(geo) : ShiftTable{};
  std::vector<std::array<int, 3>> at(n);
  for (std::size_t k = 0; k < n; ++k) at[k] = geo.grid->multi_index(k);

  std::fill(out, out + n * m, 0.0);
  std::vector<double> pf(n * B), pg(phi_g ? n * B : 0);
  std::vector<std::vector<double>> bufs(static_cast<std::size_t>(nthreads));
  for (int c0 = 0; c0 < m; c0 += B) {
    const int w = std::min(B, m - c0);
    // Repack a block of columns; unused lanes stay zero.
    for (std::size_t k = 0; k < n; ++k)
      for (int c = 0; c < B; ++c) {
        pf[k * B + c] = c < w ? phi_f[k * m + c0 + c] : 0.0;
        if (phi_g) pg[k * B + c] = c < w ? phi_g[k * m + c0 + c] : 0.0;
      }
#pragma omp parallel num_threads(nthreads)
    {
      auto& buf = bufs[static_cast<std::size_t>(omp_get_thread_num())];
      buf.assign(n * B, 0.0);
      gain_block<B>(geo, table, tabulated, at, pf.data(), phi_g ? pg.data() : nullptr,
                    buf.data());
    }
    // Fixed-order reduction keeps results independent of scheduling.
    for (const auto& buf : bufs)
      for (std::size_t k = 0; k < n; ++k)
        for (int c = 0; c < w; ++c) out[k * m + c0 + c] += buf[k * B + c];
  }
}

}  // namespace

void gamma_gain_omp(const Geometry& geo, const double* phi_f, const double* phi_g, int m,
                    double* out) {
  if (geo.interp != Interpolation::quadratic) {
    gamma_gain_serial(geo, phi_f, phi_g, m, out);
  } else if (m <= 4) {
    gain_blocks<4>(geo, phi_f, phi_g, m, out);
  } else {
    gain_blocks<8>(geo, phi_f, phi_g, m, out);
  }
}

}  // namespace alab::collision::detail
