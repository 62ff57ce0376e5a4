#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace studyu {

/// Ordinary least squares fit y = X b + e.
struct RegressionFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::MatrixXd covariance;  // residual_variance * (X'X)^-1
    double residual_variance = 0.0;
    double residual_sum_of_squares = 0.0;
    int n = 0;
    int p = 0;
    std::vector<std::string> design_labels;
};

/// Smallest admissible |R_kk| relative to the largest pivot of the QR factor.
inline constexpr double kRankTolerance = 1e-10;

/// Solves via column-pivoted Householder QR; the covariance comes from the
/// inverse of the triangular factor, never from forming X'X. Throws
/// TooFewSamples unless n > p and RankDeficient when a pivot falls below
/// kRankTolerance times the largest.
RegressionFit fit_linear_model(const Eigen::MatrixXd& design, const Eigen::VectorXd& outcome,
                               std::vector<std::string> labels = {});

/// Two-sided standard-normal critical value at alpha = 0.05.
inline constexpr double kWaldCritical95 = 1.959964;
inline constexpr double kWaldAlpha = 0.05;
/// Residual variance below which the test is not assessable.
inline constexpr double kDegenerateVariance = 1e-12;

struct WaldDecision {
    std::optional<double> z;  // empty when not assessable
    double alpha = kWaldAlpha;
    bool assessable = false;
    bool significant = false;
};

/// Large-sample Wald test of estimate = 0.
WaldDecision wald_test(double estimate, double standard_error, double residual_variance);

} // namespace studyu
