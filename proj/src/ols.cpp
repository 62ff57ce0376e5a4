#include "studyu/ols.hpp"

#include <cmath>

#include "studyu/error.hpp"

namespace studyu {

RegressionFit fit_linear_model(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome,
                               std::vector<std::string> labels) {
    const auto n = design.rows();
    const auto p = design.cols();
    if (outcome.size() != n) throw Error(ErrorCode::BadRequest, "design and outcome differ in length");
    if (p == 0 || n <= p) {
        throw Error(ErrorCode::TooFewSamples, "need more samples (" + std::to_string(n) + ") than parameters (" +
                                                  std::to_string(p) + ")");
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const double largest = std::fabs(r(0, 0));
    const double smallest = r.diagonal().cwiseAbs().minCoeff();
    if (!(largest > 0.0) || smallest <= kRankTolerance * largest) {
        throw Error(ErrorCode::RankDeficient, "design matrix is rank deficient");
    }

    RegressionFit fit;
    fit.n = static_cast<int>(n);
    fit.p = static_cast<int>(p);
    fit.design_labels = std::move(labels);
    fit.coefficients = qr.solve(outcome);
    const Eigen::VectorXd residuals = outcome - design * fit.coefficients;
    fit.residual_sum_of_squares = residuals.squaredNorm();
    fit.residual_variance = fit.residual_sum_of_squares / static_cast<double>(n - p);

    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd permuted = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * permuted * perm.transpose();
    fit.covariance = fit.residual_variance * xtx_inv;
    fit.standard_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return fit;
}

WaldDecision wald_test(double estimate, double standard_error, double residual_variance) {
    WaldDecision d;
    if (residual_variance < kDegenerateVariance || !(standard_error > 0.0)) return d;
    d.assessable = true;
    d.z = estimate / standard_error;
    d.significant = std::fabs(*d.z) > kWaldCritical95;
    return d;
}

} // namespace studyu
