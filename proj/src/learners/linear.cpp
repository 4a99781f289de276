#include <Eigen/QR>

#include "internal.hpp"

namespace mps::detail {

Eigen::MatrixXd gather(const DataMatrix& data, std::span<const int> rows, std::span<const int> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data.x(rows[r], cols[c]);
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, std::span<const int> rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(rows[r]);
  return out;
}

LinearFit ols_solve(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y) {
  LinearFit fit;
  const double ybar = y.mean();
  if (xs.cols() == 0) {
    fit.intercept = ybar;
    fit.beta.resize(0);
    return fit;
  }
  const Eigen::RowVectorXd xbar = xs.colwise().mean();
  const Eigen::MatrixXd xc = xs.rowwise() - xbar;
  const Eigen::VectorXd yc = y.array() - ybar;
  // Pivoted complete orthogonal factorization gives the minimum-norm solution
  // when the subsample has fewer rows than columns or collinear columns.
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xc);
  fit.beta = cod.solve(yc);
  fit.intercept = ybar - xbar.dot(fit.beta);
  return fit;
}

}  // namespace mps::detail
