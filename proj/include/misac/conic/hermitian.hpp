#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace misac::conic {

// Complex Hermitian matrices are hosted by the real solver through the
// embedding H -> [[Re H, -Im H], [Im H, Re H]], which is PSD iff H is PSD and
// has twice the trace of H.

Eigen::MatrixXd hermitian_embed(const Eigen::MatrixXcd& H);

/// Inverse of the embedding, also defined for any real symmetric X:
/// 0.5 (X11 + X22) + 0.5 j (X21 - X12). Maps PSD X to PSD H.
Eigen::MatrixXcd hermitian_extract(const Eigen::MatrixXd& X);

/// hermitian_extract(smat(v, 2 n)).
Eigen::MatrixXcd hermitian_from_svec(const Eigen::Ref<const Eigen::VectorXd>& v, int n);

// Real coordinates of an n x n Hermitian matrix, column by column: Re H_qq,
// then (Re H_pq, Im H_pq) for p = q+1 .. n-1. There are n^2 of them.

int hermitian_param_count(int n);
int hermitian_diag_param(int q, int n);
/// Index of Re H_pq for p > q; Im H_pq is the next one.
int hermitian_offdiag_param(int p, int q, int n);

Eigen::VectorXd hermitian_params(const Eigen::MatrixXcd& H);
Eigen::MatrixXcd hermitian_from_params(const Eigen::Ref<const Eigen::VectorXd>& x, int n);

/// Coefficients of the complex linear form H -> Tr(C H) on the Hermitian
/// coordinates: Tr(C H) = re.x + j im.x with x = hermitian_params(H).
struct LinearForm {
  Eigen::VectorXd re;
  Eigen::VectorXd im;
};

LinearForm trace_form(const Eigen::MatrixXcd& C);

/// Each Hermitian coordinate of hermitian_extract(smat(v, 2n)) as a sum of at
/// most two weighted svec entries of v.
struct SvecTerm {
  int index = -1;
  double weight = 0.0;
};
using ParamToSvec = std::vector<std::array<SvecTerm, 2>>;

ParamToSvec param_to_svec_map(int n);

/// The other direction: svec(hermitian_embed(H)) as a linear map of the
/// Hermitian coordinates, listing the (at most two) entries each one feeds.
ParamToSvec hermitian_embedding_map(int n);

}  // namespace misac::conic
