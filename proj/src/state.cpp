#include "viwo/state.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <boost/math/distributions/chi_squared.hpp>

namespace viwo {

int FilterState::clone_index(double t) const {
  for (size_t i = 0; i < clones.size(); i++) {
    if (clones[i].t == t) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

void FilterState::inject(const Eigen::VectorXd &dx) {
  imu.R_GtoI = Rotation::exp(-dx.segment<3>(0)) * imu.R_GtoI;
  imu.p_IinG += dx.segment<3>(3);
  imu.v_IinG += dx.segment<3>(6);
  imu.bg += dx.segment<3>(9);
  imu.ba += dx.segment<3>(12);
  for (size_t i = 0; i < clones.size(); i++) {
    const int off = clone_offset(static_cast<int>(i));
    clones[i].R_GtoI = Rotation::exp(-dx.segment<3>(off)) * clones[i].R_GtoI;
    clones[i].p_IinG += dx.segment<3>(off + 3);
  }
}

double FilterState::min_covariance_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double chi2_quantile_95(int dof) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.95);
}

NullspaceStatus nullspace_project(const Eigen::MatrixXd &H_x,
                                  const Eigen::MatrixXd &H_f,
                                  const Eigen::VectorXd &r,
                                  Eigen::MatrixXd &H_out, Eigen::VectorXd &r_out) {
  const int rows = static_cast<int>(H_f.rows());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(H_f);
  const int rank = static_cast<int>(qr.rank());
  if (rows - rank <= 0) {
    return NullspaceStatus::RankDeficientNoNull;
  }
  // Columns of Q past the rank span the left nullspace of H_f.
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd Qn = Q.rightCols(rows - rank);
  H_out = Qn.transpose() * H_x;
  r_out = Qn.transpose() * r;
  return NullspaceStatus::Ok;
}

UpdateResult ekf_update(FilterState &state, const StackedResidual &sr,
                        double chi2_multiplier) {
  UpdateResult res;
  const int dim = state.dim();
  Eigen::MatrixXd H = sr.H;
  Eigen::VectorXd r = sr.r;
  const double var = sr.sigma * sr.sigma;

  if (H.cols() != dim || H.rows() != r.rows() || H.rows() == 0) {
    res.status = UpdateStatus::NumericalFailure;
    return res;
  }

  if (chi2_multiplier > 0.0) {
    const Eigen::MatrixXd S =
        H * state.P * H.transpose() +
        var * Eigen::MatrixXd::Identity(H.rows(), H.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      res.status = UpdateStatus::NumericalFailure;
      return res;
    }
    res.gamma = r.dot(llt.solve(r));
    res.threshold = chi2_multiplier * chi2_quantile_95(static_cast<int>(r.rows()));
    if (res.gamma > res.threshold) {
      res.status = UpdateStatus::GateRejected;
      return res;
    }
  }

  // Compress tall stacks: with iid noise a thin QR keeps the information.
  if (H.rows() > H.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(H);
    const Eigen::MatrixXd R_full =
        qr.matrixQR().triangularView<Eigen::Upper>();
    Eigen::VectorXd qtr = r;
    qtr.applyOnTheLeft(qr.householderQ().adjoint());
    H = R_full.topRows(dim);
    r = qtr.head(dim);
  }

  const Eigen::MatrixXd S =
      H * state.P * H.transpose() +
      var * Eigen::MatrixXd::Identity(H.rows(), H.rows());
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    res.status = UpdateStatus::NumericalFailure;
    return res;
  }
  const Eigen::MatrixXd K = llt.solve(H * state.P).transpose();
  const Eigen::VectorXd dx = K * r;
  if (!dx.allFinite()) {
    res.status = UpdateStatus::NumericalFailure;
    return res;
  }

  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(dim, dim) - K * H;
  state.P = A * state.P * A.transpose() + var * K * K.transpose();
  state.symmetrize();
  state.inject(dx);
  res.status = UpdateStatus::Applied;
  return res;
}

AugmentStatus augment_clone(FilterState &state, double t) {
  if (static_cast<int>(state.clones.size()) >= state.max_clones) {
    return AugmentStatus::WindowFull;
  }
  if (state.clone_index(t) >= 0) {
    return AugmentStatus::DuplicateTimestamp;
  }
  const int dim = state.dim();
  Clone c;
  c.t = t;
  c.R_GtoI = state.imu.R_GtoI;
  c.p_IinG = state.imu.p_IinG;
  state.clones.push_back(c);

  // The clone error equals the current IMU pose error, so the new rows and
  // columns are copies of the first six of the existing covariance.
  Eigen::MatrixXd P_new = Eigen::MatrixXd::Zero(dim + kCloneErrDim, dim + kCloneErrDim);
  P_new.topLeftCorner(dim, dim) = state.P;
  P_new.block(dim, 0, kCloneErrDim, dim) = state.P.topRows(kCloneErrDim);
  P_new.block(0, dim, dim, kCloneErrDim) = state.P.leftCols(kCloneErrDim);
  P_new.block(dim, dim, kCloneErrDim, kCloneErrDim) =
      state.P.topLeftCorner(kCloneErrDim, kCloneErrDim);
  state.P = P_new;
  return AugmentStatus::Ok;
}

void marginalize_oldest(FilterState &state) {
  if (state.clones.empty()) {
    return;
  }
  const int dim = state.dim();
  const int off = state.clone_offset(0);
  const int tail = dim - off - kCloneErrDim;
  Eigen::MatrixXd P_new(dim - kCloneErrDim, dim - kCloneErrDim);
  P_new.topLeftCorner(off, off) = state.P.topLeftCorner(off, off);
  P_new.topRightCorner(off, tail) = state.P.topRightCorner(off, tail);
  P_new.bottomLeftCorner(tail, off) = state.P.bottomLeftCorner(tail, off);
  P_new.bottomRightCorner(tail, tail) = state.P.bottomRightCorner(tail, tail);
  state.P = P_new;
  state.clones.erase(state.clones.begin());
}

} // namespace viwo
