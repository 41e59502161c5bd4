#include "misac/conic/hermitian.hpp"

#include <cmath>
#include <stdexcept>

#include "misac/conic/cone.hpp"

namespace misac::conic {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd hermitian_embed(const MatrixXcd& H) {
  if (H.rows() != H.cols()) throw std::invalid_argument("hermitian_embed: not square");
  if ((H - H.adjoint()).norm() > 1e-8 * std::max(1.0, H.norm())) {
    throw std::invalid_argument("hermitian_embed: not Hermitian");
  }
  const int n = static_cast<int>(H.rows());
  MatrixXd X(2 * n, 2 * n);
  X.topLeftCorner(n, n) = H.real();
  X.bottomRightCorner(n, n) = H.real();
  X.topRightCorner(n, n) = -H.imag();
  X.bottomLeftCorner(n, n) = H.imag();
  return X;
}

MatrixXcd hermitian_extract(const MatrixXd& X) {
  if (X.rows() != X.cols() || X.rows() % 2 != 0) {
    throw std::invalid_argument("hermitian_extract: need an even square matrix");
  }
  const int n = static_cast<int>(X.rows()) / 2;
  MatrixXcd H(n, n);
  H.real() = 0.5 * (X.topLeftCorner(n, n) + X.bottomRightCorner(n, n));
  H.imag() = 0.5 * (X.bottomLeftCorner(n, n) - X.topRightCorner(n, n));
  return H;
}

MatrixXcd hermitian_from_svec(const Eigen::Ref<const VectorXd>& v, int n) {
  return hermitian_extract(smat(v, 2 * n));
}

int hermitian_param_count(int n) { return n * n; }

// Column q starts after q diagonal entries and sum_{c<q} 2 (n-1-c) off-diagonal ones.
int hermitian_diag_param(int q, int n) { return q + q * (2 * n - q - 1); }

int hermitian_offdiag_param(int p, int q, int n) {
  return hermitian_diag_param(q, n) + 1 + 2 * (p - q - 1);
}

VectorXd hermitian_params(const MatrixXcd& H) {
  const int n = static_cast<int>(H.rows());
  VectorXd x(hermitian_param_count(n));
  int idx = 0;
  for (int q = 0; q < n; ++q) {
    x(idx++) = H(q, q).real();
    for (int p = q + 1; p < n; ++p) {
      x(idx++) = H(p, q).real();
      x(idx++) = H(p, q).imag();
    }
  }
  return x;
}

MatrixXcd hermitian_from_params(const Eigen::Ref<const VectorXd>& x, int n) {
  if (x.size() != hermitian_param_count(n)) throw std::invalid_argument("hermitian_from_params: size");
  MatrixXcd H(n, n);
  int idx = 0;
  for (int q = 0; q < n; ++q) {
    H(q, q) = x(idx++);
    for (int p = q + 1; p < n; ++p) {
      const std::complex<double> v(x(idx), x(idx + 1));
      idx += 2;
      H(p, q) = v;
      H(q, p) = std::conj(v);
    }
  }
  return H;
}

LinearForm trace_form(const MatrixXcd& C) {
  if (C.rows() != C.cols()) throw std::invalid_argument("trace_form: not square");
  const int n = static_cast<int>(C.rows());
  LinearForm f;
  f.re.resize(hermitian_param_count(n));
  f.im.resize(hermitian_param_count(n));
  const std::complex<double> j(0.0, 1.0);
  int idx = 0;
  // Tr(C H) = sum_{p,q} C_qp H_pq; pair (p, q) with (q, p) for p > q.
  for (int q = 0; q < n; ++q) {
    const std::complex<double> d = C(q, q);
    f.re(idx) = d.real();
    f.im(idx) = d.imag();
    ++idx;
    for (int p = q + 1; p < n; ++p) {
      const std::complex<double> on_re = C(q, p) + C(p, q);
      const std::complex<double> on_im = j * (C(q, p) - C(p, q));
      f.re(idx) = on_re.real();
      f.im(idx) = on_re.imag();
      f.re(idx + 1) = on_im.real();
      f.im(idx + 1) = on_im.imag();
      idx += 2;
    }
  }
  return f;
}

ParamToSvec param_to_svec_map(int n) {
  const int side = 2 * n;
  const double h = 0.5 / std::sqrt(2.0);
  ParamToSvec map(hermitian_param_count(n));
  for (int q = 0; q < n; ++q) {
    // Re H_qq = (X_qq + X_{n+q,n+q}) / 2
    map[hermitian_diag_param(q, n)] = {SvecTerm{svec_index(q, q, side), 0.5},
                                       SvecTerm{svec_index(n + q, n + q, side), 0.5}};
    for (int p = q + 1; p < n; ++p) {
      const int r = hermitian_offdiag_param(p, q, n);
      // Re H_pq = (X_pq + X_{n+p,n+q}) / 2, off-diagonal svec entries carry sqrt 2.
      map[r] = {SvecTerm{svec_index(p, q, side), h}, SvecTerm{svec_index(n + p, n + q, side), h}};
      // Im H_pq = (X_{n+p,q} - X_{p,n+q}) / 2 and X_{p,n+q} = X_{n+q,p}.
      map[r + 1] = {SvecTerm{svec_index(n + p, q, side), h},
                    SvecTerm{svec_index(n + q, p, side), -h}};
    }
  }
  return map;
}

ParamToSvec hermitian_embedding_map(int n) {
  const int side = 2 * n;
  const double r2 = std::sqrt(2.0);
  ParamToSvec map(hermitian_param_count(n));
  for (int q = 0; q < n; ++q) {
    map[hermitian_diag_param(q, n)] = {SvecTerm{svec_index(q, q, side), 1.0},
                                       SvecTerm{svec_index(n + q, n + q, side), 1.0}};
    for (int p = q + 1; p < n; ++p) {
      const int r = hermitian_offdiag_param(p, q, n);
      map[r] = {SvecTerm{svec_index(p, q, side), r2}, SvecTerm{svec_index(n + p, n + q, side), r2}};
      // X_{n+p,q} = Im H_pq and X_{n+q,p} = Im H_qp = -Im H_pq
      map[r + 1] = {SvecTerm{svec_index(n + p, q, side), r2},
                    SvecTerm{svec_index(n + q, p, side), -r2}};
    }
  }
  return map;
}

}  // namespace misac::conic
