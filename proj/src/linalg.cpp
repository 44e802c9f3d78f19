#include "ssd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ssd {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

// Cyclic Jacobi; returns eigenvalues of a symmetric matrix.
std::vector<double> symmetric_eigenvalues(DenseMatrix a) {
  const std::size_t n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  return eig;
}

}  // namespace

DenseVector DenseVector::basis(std::size_t dim, std::size_t index) {
  require(index < dim, "basis index out of range");
  DenseVector e(dim);
  e[index] = 1.0;
  return e;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t nr = rows.size();
  const std::size_t nc = nr == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(nr, nc);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == nc, "ragged row list");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

DenseVector matvec(const DenseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  DenseVector y(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) axpy(x[j], a.column(j), y.span());
  return y;
}

DenseVector matTvec(const DenseMatrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), "matTvec: dimension mismatch");
  DenseVector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.column(j), x);
  return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul: dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) axpy(b(k, j), a.column(k), c.column(j));
  return c;
}

DenseMatrix matTmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), "matTmul: dimension mismatch");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = dot(a.column(i), b.column(j));
  return c;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double squared_norm(std::span<const double> x) { return dot(x, x); }

double norm2(std::span<const double> x) {
  const double plain = squared_norm(x);
  if (plain > 1e-280 && plain < 1e280) return std::sqrt(plain);
  // scaled accumulation for huge or tiny entries
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v / scale) * (v / scale);
  return scale * std::sqrt(s);
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.data()); }

double symmetric_operator_norm(const DenseMatrix& a) {
  require(a.rows() == a.cols(), "symmetric_operator_norm: matrix not square");
  double best = 0.0;
  for (double e : symmetric_eigenvalues(a)) best = std::max(best, std::abs(e));
  return best;
}

double operator_norm(const DenseMatrix& a) {
  const DenseMatrix gram = a.rows() >= a.cols() ? matTmul(a, a) : matTmul(a.transpose(), a.transpose());
  return std::sqrt(symmetric_operator_norm(gram));
}

QrResult qr_thin(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  require(m >= n && n >= 1, "qr_thin: need rows >= cols >= 1");

  const double scale = frobenius_norm(a);
  DenseMatrix work = a;
  std::vector<DenseVector> reflectors;
  reflectors.reserve(n);

  for (std::size_t k = 0; k < n; ++k) {
    auto col = work.column(k);
    const double alpha = norm2(col.subspan(k));
    DenseVector v(m - k);
    for (std::size_t i = k; i < m; ++i) v[i - k] = col[i];
    const double beta = col[k] >= 0.0 ? -alpha : alpha;
    v[0] -= beta;
    const double vnorm = norm2(v.span());
    if (vnorm > 0.0) {
      const double inv = 1.0 / vnorm;
      for (std::size_t i = 0; i < v.dim(); ++i) v[i] *= inv;
    }
    // apply H = I - 2 v v^T to trailing columns
    for (std::size_t j = k; j < n; ++j) {
      auto cj = work.column(j).subspan(k);
      const double s = 2.0 * dot(v.span(), cj);
      axpy(-s, v.span(), cj);
    }
    reflectors.push_back(std::move(v));
  }

  QrResult out{DenseMatrix(m, n), DenseMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) out.r(i, j) = work(i, j);

  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::abs(out.r(i, i)) >= 1e-12 * scale) || scale == 0.0)
      throw RankDeficiencyError("qr_thin: rank-deficient input (|R_" + std::to_string(i) + std::to_string(i) +
                                "| below tolerance)");
  }

  // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity
  for (std::size_t j = 0; j < n; ++j) out.q(j, j) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const DenseVector& v = reflectors[kk];
    for (std::size_t j = 0; j < n; ++j) {
      auto cj = out.q.column(j).subspan(kk);
      const double s = 2.0 * dot(v.span(), cj);
      axpy(-s, v.span(), cj);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (out.r(i, i) < 0.0) {
      for (std::size_t j = i; j < n; ++j) out.r(i, j) = -out.r(i, j);
      for (double& q : out.q.column(i)) q = -q;
    }
  }
  return out;
}

}  // namespace ssd
