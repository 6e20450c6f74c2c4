#pragma once

#include <Eigen/Dense>

namespace psos {

struct SphereQuadraticSolution {
    Eigen::VectorXd x;
    double multiplier = 0.0;        // mu in (H + mu I) x = g
    double secular_residual = 0.0;  // | ||x(mu)|| - 1 | before the final normalization
    bool hard_case = false;
};

/// Global maximizer of  <g, x> - 1/2 x^T H x  over the unit sphere, H symmetric.
///
/// Moré–Sorensen style: eigendecompose H, then solve the secular equation
/// ||(H + mu I)^{-1} g|| = 1 for mu > -lambda_min(H) by safeguarded Newton on
/// 1/||x(mu)|| - 1. When g has no component along the bottom eigenspace and the
/// remaining part is short, the hard case is resolved by adding the missing
/// length along that eigenspace. `hint` (optional, may be empty) picks the
/// branch when the maximizer is not unique.
SphereQuadraticSolution maximize_on_sphere(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                                           const Eigen::VectorXd& hint = Eigen::VectorXd());

}  // namespace psos
