#include "idslab/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "idslab/errors.hpp"
#include "idslab/parallel.hpp"

namespace idslab {

namespace {

constexpr double kBoundaryTolerance = 1e-9;
constexpr double kClampMagnitude = 1e-14;

void check_ceiling(std::size_t n, std::size_t ceiling) {
  if (n > ceiling) {
    throw ResourceError("dimension " + std::to_string(n) + " exceeds the dense ceiling " + std::to_string(ceiling) +
                        "; use count_below for eigenvalue counts");
  }
}

void check_metzler(const SymmetricMatrix& m) {
  for (const double v : m.upper_values()) {
    if (v > 0.0) throw ArgumentError("heat kernels need nonpositive off-diagonal entries");
  }
}

void clamp_negative(Eigen::MatrixXd& e, HeatDiagnostics* diagnostics) {
  HeatDiagnostics local;
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
      double& x = e(i, j);
      if (x < 0.0) {
        local.worst_negative = std::min(local.worst_negative, x);
        if (x > -kClampMagnitude) {
          x = 0.0;
          ++local.clamped;
        }
      }
    }
  }
  if (diagnostics != nullptr) *diagnostics = local;
}

Eigen::MatrixXd uniformized_exponential(const DiscreteHamiltonian& h, double t) {
  check_metzler(h.matrix);
  const Eigen::MatrixXd a = h.matrix.to_dense();
  const auto n = a.rows();
  const double s = a.diagonal().maxCoeff();
  Eigen::MatrixXd b = -a;
  b.diagonal().array() += s;
  const double norm = b.cwiseAbs().rowwise().sum().maxCoeff();

  int squarings = 0;
  double tau = t;
  while (tau * norm > 0.5) {
    tau *= 0.5;
    ++squarings;
  }
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  double bound = 1.0;
  for (int j = 1; j < 64; ++j) {
    term = (term * b) * (tau / j);
    sum += term;
    bound *= tau * norm / j;
    if (bound < 0x1.0p-60) break;
  }
  sum *= std::exp(-tau * s);
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

}  // namespace

std::size_t SpectralSummary::count_below(double lambda) const {
  return static_cast<std::size_t>(std::lower_bound(eigenvalues.begin(), eigenvalues.end(), lambda) -
                                  eigenvalues.begin());
}

SpectralSummary eigendecompose(const Eigen::MatrixXd& symmetric, bool vectors, std::size_t ceiling) {
  const auto n = static_cast<std::size_t>(symmetric.rows());
  check_ceiling(n, ceiling);
  SpectralSummary s;
  s.eigenvalues.resize(n);
  if (n == 0) return s;
  Eigen::MatrixXd work = symmetric;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', static_cast<lapack_int>(n),
                                         work.data(), static_cast<lapack_int>(n), s.eigenvalues.data());
  if (info != 0) throw InternalError("dsyevd failed with info = " + std::to_string(info));
  if (vectors) s.eigenvectors = std::move(work);
  return s;
}

SpectralSummary eigendecompose(const DiscreteHamiltonian& h, bool vectors, std::size_t ceiling) {
  check_ceiling(h.size(), ceiling);
  SpectralSummary s = eigendecompose(h.matrix.to_dense(), vectors, ceiling);
  s.volume = h.volume();
  return s;
}

bool banded_inertia(const SymmetricMatrix& a, double shift, Inertia& out, double growth_limit) {
  const std::size_t n = a.size();
  const std::size_t b = a.bandwidth();
  const std::size_t w = b + 1;
  std::vector<double> band(n * w, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    band[i * w] = a.diagonal()[i] - shift;
    for (std::size_t k = a.upper_row_ptr()[i]; k < a.upper_row_ptr()[i + 1]; ++k) {
      band[i * w + (a.upper_cols()[k] - i)] = a.upper_values()[k];
    }
  }
  const double scale = a.inf_norm() + std::abs(shift);
  const double limit = growth_limit * scale;

  Inertia r;
  r.min_pivot = std::numeric_limits<double>::infinity();
  std::vector<double> l(w);
  for (std::size_t k = 0; k < n; ++k) {
    double* col = band.data() + k * w;
    const double dk = col[0];
    if (dk == 0.0 || !std::isfinite(dk)) return false;
    (dk < 0.0 ? r.negative : r.positive)++;
    r.min_pivot = std::min(r.min_pivot, std::abs(dk));
    const std::size_t lim = std::min(b, n - 1 - k);
    double lmax = 0.0;
    for (std::size_t i = 1; i <= lim; ++i) {
      l[i] = col[i] / dk;
      lmax = std::max(lmax, std::abs(l[i]));
    }
    if (std::abs(dk) * (1.0 + lmax) * (1.0 + lmax) > limit) return false;
    for (std::size_t j = 1; j <= lim; ++j) {
      const double f = col[j];
      if (f == 0.0) continue;
      double* target = band.data() + (k + j) * w;
      for (std::size_t i = j; i <= lim; ++i) target[i - j] -= l[i] * f;
    }
  }
  r.near_boundary = r.min_pivot <= kBoundaryTolerance * scale;
  out = r;
  return true;
}

namespace {

// Symmetric interchange of rows/columns p < q inside the active lower triangle
// starting at column k.
void symmetric_swap(Eigen::MatrixXd& a, Eigen::Index k, Eigen::Index p, Eigen::Index q) {
  const Eigen::Index n = a.rows();
  std::swap(a(p, p), a(q, q));
  for (Eigen::Index j = k; j < p; ++j) std::swap(a(p, j), a(q, j));
  for (Eigen::Index j = p + 1; j < q; ++j) std::swap(a(j, p), a(q, j));
  for (Eigen::Index i = q + 1; i < n; ++i) std::swap(a(i, p), a(i, q));
}

}  // namespace

Inertia bunch_kaufman_inertia(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  const double alpha = (1.0 + std::sqrt(17.0)) / 8.0;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) s += std::abs(i >= j ? a(i, j) : a(j, i));
    scale = std::max(scale, s);
  }

  Inertia r;
  r.pivoted = true;
  r.min_pivot = n == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  Eigen::Index k = 0;
  while (k < n) {
    const double absakk = std::abs(a(k, k));
    Eigen::Index imax = k;
    double colmax = 0.0;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > colmax) {
        colmax = std::abs(a(i, k));
        imax = i;
      }
    }
    if (std::max(absakk, colmax) == 0.0) {
      r.zero++;
      r.min_pivot = 0.0;
      ++k;
      continue;
    }
    Eigen::Index kstep = 1;
    Eigen::Index kp = k;
    if (absakk < alpha * colmax) {
      double rowmax = 0.0;
      for (Eigen::Index j = k; j < imax; ++j) rowmax = std::max(rowmax, std::abs(a(imax, j)));
      for (Eigen::Index j = imax + 1; j < n; ++j) rowmax = std::max(rowmax, std::abs(a(j, imax)));
      if (absakk >= alpha * colmax * (colmax / rowmax)) {
        kp = k;
      } else if (std::abs(a(imax, imax)) >= alpha * rowmax) {
        kp = imax;
      } else {
        kp = imax;
        kstep = 2;
      }
    }
    const Eigen::Index kk = k + kstep - 1;
    if (kp != kk) symmetric_swap(a, k, kk, kp);

    if (kstep == 1) {
      const double d = a(k, k);
      (d < 0.0 ? r.negative : r.positive)++;
      r.min_pivot = std::min(r.min_pivot, std::abs(d));
      for (Eigen::Index j = k + 1; j < n; ++j) {
        const double f = a(j, k) / d;
        if (f != 0.0) a.col(j).segment(j, n - j).noalias() -= f * a.col(k).segment(j, n - j);
      }
    } else {
      const double d11 = a(k, k);
      const double d21 = a(k + 1, k);
      const double d22 = a(k + 1, k + 1);
      const double det = d11 * d22 - d21 * d21;
      const double tr = d11 + d22;
      if (det < 0.0) {
        r.negative++;
        r.positive++;
      } else if (det > 0.0) {
        (tr < 0.0 ? r.negative : r.positive) += 2;
      } else {
        r.zero++;
        (tr < 0.0 ? r.negative : r.positive)++;
      }
      const double big = 0.5 * (std::abs(tr) + std::sqrt(tr * tr - 4.0 * det));
      r.min_pivot = std::min(r.min_pivot, big > 0.0 ? std::abs(det) / big : 0.0);
      for (Eigen::Index j = k + 2; j < n; ++j) {
        const double w1 = a(j, k);
        const double w2 = a(j, k + 1);
        const double l1 = (w1 * d22 - w2 * d21) / det;
        const double l2 = (w2 * d11 - w1 * d21) / det;
        a.col(j).segment(j, n - j).noalias() -= l1 * a.col(k).segment(j, n - j) + l2 * a.col(k + 1).segment(j, n - j);
      }
    }
    k += kstep;
  }
  if (n > 0) r.near_boundary = r.min_pivot <= kBoundaryTolerance * scale;
  return r;
}

Inertia count_below(const DiscreteHamiltonian& h, double lambda) {
  if (!std::isfinite(lambda)) throw ArgumentError("count_below needs a finite energy");
  const std::size_t n = h.size();
  const std::size_t b = h.matrix.bandwidth();
  if (3 * b * b < n * n) {
    Inertia r;
    if (banded_inertia(h.matrix, lambda, r)) return r;
  }
  check_ceiling(n, kDenseCeiling);
  Eigen::MatrixXd a = h.matrix.to_dense();
  a.diagonal().array() -= lambda;
  return bunch_kaufman_inertia(a);
}

std::vector<std::size_t> count_sweep_serial(const DiscreteHamiltonian& h, std::span<const double> grid) {
  std::vector<std::size_t> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = count_below(h, grid[i]).negative;
  return out;
}

std::vector<std::size_t> count_sweep(const DiscreteHamiltonian& h, std::span<const double> grid, int threads) {
  std::vector<std::size_t> out(grid.size());
  const auto m = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    out[static_cast<std::size_t>(i)] = count_below(h, grid[static_cast<std::size_t>(i)]).negative;
  }
  return out;
}

Eigen::MatrixXd heat_operator(const DiscreteHamiltonian& h, double t, HeatMethod method,
                              HeatDiagnostics* diagnostics, std::size_t ceiling) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ArgumentError("heat time must be finite and >= 0");
  check_ceiling(h.size(), ceiling);
  const auto n = static_cast<Eigen::Index>(h.size());
  if (t == 0.0) {
    if (diagnostics != nullptr) *diagnostics = {};
    return Eigen::MatrixXd::Identity(n, n);
  }
  Eigen::MatrixXd e;
  if (method == HeatMethod::uniformized) {
    e = uniformized_exponential(h, t);
  } else {
    const SpectralSummary s = eigendecompose(h, true, ceiling);
    Eigen::VectorXd decay(n);
    for (Eigen::Index k = 0; k < n; ++k) decay[k] = std::exp(-t * s.eigenvalues[static_cast<std::size_t>(k)]);
    e = s.eigenvectors * decay.asDiagonal() * s.eigenvectors.transpose();
  }
  // Rounding leaves ulp-level asymmetry; the kernel is symmetric by definition.
  e = (0.5 * (e + e.transpose())).eval();
  clamp_negative(e, diagnostics);
  return e;
}

void heat_apply(const DiscreteHamiltonian& h, double t, std::span<double> v) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ArgumentError("heat time must be finite and >= 0");
  if (v.size() != h.size()) throw ArgumentError("vector length does not match operator size");
  if (t == 0.0) return;
  const SymmetricMatrix& m = h.matrix;
  const std::size_t n = m.size();
  const auto& diag = m.diagonal();
  const double s = *std::max_element(diag.begin(), diag.end());
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = s - diag[i];
    for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) row += std::abs(m.values()[k]);
    norm = std::max(norm, row);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(t * norm / 32.0)));
  const double tau = t / steps;
  const double damping = std::exp(-tau * s);

  std::vector<double> term(n), next(n), sum(n);
  for (int step = 0; step < steps; ++step) {
    std::copy(v.begin(), v.end(), term.begin());
    std::copy(v.begin(), v.end(), sum.begin());
    for (int j = 1; j < 100000; ++j) {
      const double c = tau / j;
      double term_norm = 0.0;
      double sum_norm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = (s - diag[i]) * term[i];
        for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) acc -= m.values()[k] * term[m.cols()[k]];
        next[i] = c * acc;
        sum[i] += next[i];
        term_norm += std::abs(next[i]);
        sum_norm += std::abs(sum[i]);
      }
      term.swap(next);
      if (j > tau * norm && term_norm <= 1e-17 * sum_norm) break;
      if (term_norm == 0.0) break;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = damping * sum[i];
  }
}

Eigen::MatrixXd heat_columns_serial(const DiscreteHamiltonian& h, double t, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(h.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] >= h.size()) throw ArgumentError("column index outside the operator domain");
    auto column = out.col(static_cast<Eigen::Index>(c));
    column[static_cast<Eigen::Index>(cols[c])] = 1.0;
    heat_apply(h, t, std::span<double>(column.data(), h.size()));
  }
  return out;
}

Eigen::MatrixXd heat_columns(const DiscreteHamiltonian& h, double t, std::span<const std::size_t> cols, int threads) {
  for (const std::size_t c : cols) {
    if (c >= h.size()) throw ArgumentError("column index outside the operator domain");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(h.size()), static_cast<Eigen::Index>(cols.size()));
  const auto m = static_cast<std::ptrdiff_t>(cols.size());
#pragma omp parallel for num_threads(resolve_threads(threads)) schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < m; ++c) {
    auto column = out.col(static_cast<Eigen::Index>(c));
    column[static_cast<Eigen::Index>(cols[static_cast<std::size_t>(c)])] = 1.0;
    heat_apply(h, t, std::span<double>(column.data(), h.size()));
  }
  return out;
}

std::vector<double> heat_diagonal(const DiscreteHamiltonian& h, double t, std::span<const std::size_t> vertices,
                                  int threads) {
  for (const std::size_t x : vertices) {
    if (x >= h.size()) throw ArgumentError("vertex index outside the operator domain");
  }
  std::vector<double> out(vertices.size());
  const auto m = static_cast<std::ptrdiff_t>(vertices.size());
#pragma omp parallel num_threads(resolve_threads(threads))
  {
    std::vector<double> v(h.size());
#pragma omp for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < m; ++c) {
      const std::size_t x = vertices[static_cast<std::size_t>(c)];
      std::fill(v.begin(), v.end(), 0.0);
      v[x] = 1.0;
      heat_apply(h, t, v);
      out[static_cast<std::size_t>(c)] = v[x];
    }
  }
  return out;
}

double SpectralFunction::operator()(double eigenvalue) const {
  return kind == Kind::heat ? std::exp(-parameter * eigenvalue) : (eigenvalue < parameter ? 1.0 : 0.0);
}

std::vector<double> region_weights(const SpectralSummary& s, std::span<const std::size_t> region) {
  if (!s.has_vectors()) throw ArgumentError("restricted traces need eigenvectors");
  const auto n = static_cast<std::size_t>(s.eigenvectors.rows());
  std::vector<char> seen(n, 0);
  for (const std::size_t x : region) {
    if (x >= n) throw ArgumentError("region is not a subset of the operator domain");
    if (seen[x]) throw ArgumentError("region lists a vertex twice");
    seen[x] = 1;
  }
  std::vector<double> w(s.eigenvalues.size(), 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto col = s.eigenvectors.col(static_cast<Eigen::Index>(k));
    double acc = 0.0;
    for (const std::size_t x : region) {
      const double c = col[static_cast<Eigen::Index>(x)];
      acc += c * c;
    }
    w[k] = acc;
  }
  return w;
}

double restricted_trace(const SpectralSummary& s, std::span<const std::size_t> region, SpectralFunction f) {
  const std::vector<double> w = region_weights(s, region);
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) total += f(s.eigenvalues[k]) * w[k];
  return total;
}

double restricted_trace(const DiscreteHamiltonian& h, std::span<const std::size_t> region, SpectralFunction f) {
  return restricted_trace(eigendecompose(h), region, f);
}

}  // namespace idslab
