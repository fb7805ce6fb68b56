#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "swarm/error.hpp"
#include "swarm/geometry.hpp"

namespace swarm {

/// Thin-plate radial basis U(r) = r^2 log r, with U(0) = 0.
inline double tps_kernel(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

/// f(v) = A v + t + sum_j w_j U(|v - c_j|). With the side conditions
/// sum w = sum w x = sum w y = 0 the bending integral is finite and equals
/// 8 pi * sum over both output coordinates of w^T K w.
struct TpsMap {
    std::vector<Vec2> controls;
    Eigen::MatrixX2d weights = Eigen::MatrixX2d::Zero(0, 2);
    Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();

    static TpsMap identity() { return {}; }

    static TpsMap affine(const Eigen::Matrix2d& a, const Eigen::Vector2d& t) {
        TpsMap m;
        m.linear = a;
        m.translation = t;
        return m;
    }

    Vec2 operator()(Vec2 v) const {
        Eigen::Vector2d out = linear * Eigen::Vector2d(v.x(), v.y()) + translation;
        for (std::size_t j = 0; j < controls.size(); ++j) {
            out += weights.row(static_cast<Eigen::Index>(j)).transpose() * tps_kernel(distance(v, controls[j]));
        }
        return {out.x(), out.y()};
    }

    double bending_energy() const {
        const auto n = static_cast<Eigen::Index>(controls.size());
        if (n == 0) return 0.0;
        Eigen::MatrixXd k(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) k(i, j) = tps_kernel(distance(controls[i], controls[j]));
        return 8.0 * std::numbers::pi * (weights.transpose() * k * weights).trace();
    }
};

/// Which linear part the fit may use. `Free` is the classical TPS with a
/// general affine part. `Identity` pins the linear part to the identity so
/// rescaling or shearing the formation is not absorbed for free.
enum class LinearPart { Free, Identity };

namespace detail {

inline Eigen::MatrixXd kernel_matrix(std::span<const Vec2> pts) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = tps_kernel(distance(pts[i], pts[j]));
    return k;
}

inline Eigen::MatrixXd poly_matrix(std::span<const Vec2> pts) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd p(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) p.row(i) << 1.0, pts[i].x(), pts[i].y();
    return p;
}

}  // namespace detail

/// Regularized TPS taking `model[i]` to `scene[i]`, minimizing
/// sum |scene_i - f(model_i)|^2 + lambda * bending(f).
inline TpsMap fit_tps(std::span<const Vec2> model, std::span<const Vec2> scene, double lambda,
                      LinearPart mode = LinearPart::Free) {
    if (model.size() != scene.size()) throw Error(ErrorCode::SizeMismatch, "model and scene sizes differ");
    if (model.empty()) throw Error(ErrorCode::InvalidArgument, "empty point sets");
    if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");

    const auto n = static_cast<Eigen::Index>(model.size());
    const Eigen::MatrixXd k = detail::kernel_matrix(model);
    const Eigen::MatrixXd p = detail::poly_matrix(model);
    const double reg = 8.0 * std::numbers::pi * lambda;

    Eigen::MatrixX2d y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) y.row(i) << scene[i].x(), scene[i].y();

    TpsMap f;
    f.controls.assign(model.begin(), model.end());

    if (mode == LinearPart::Free) {
        Eigen::FullPivLU<Eigen::MatrixXd> plu(p);
        if (plu.rank() < 3) throw Error(ErrorCode::DegenerateKernel, "model points are collinear");
        Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(n + 3, n + 3);
        sys.topLeftCorner(n, n) = k + reg * Eigen::MatrixXd::Identity(n, n);
        sys.topRightCorner(n, 3) = p;
        sys.bottomLeftCorner(3, n) = p.transpose();
        Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(n + 3, 2);
        rhs.topRows(n) = y;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
        if (!lu.isInvertible()) throw Error(ErrorCode::DegenerateKernel, "TPS system is singular");
        const Eigen::MatrixX2d sol = lu.solve(rhs);
        f.weights = sol.topRows(n);
        f.translation = sol.row(n).transpose();
        f.linear << sol(n + 1, 0), sol(n + 2, 0), sol(n + 1, 1), sol(n + 2, 1);
        return f;
    }

    // Identity linear part: residual target is scene - model, unknowns are the
    // translation and w = N z with N spanning the null space of P^T.
    Eigen::MatrixX2d resid(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) resid.row(i) << scene[i].x() - model[i].x(), scene[i].y() - model[i].y();

    const Eigen::MatrixXd nullspace = Eigen::FullPivLU<Eigen::MatrixXd>(p.transpose()).kernel();
    const bool has_warp = nullspace.cols() > 0 && nullspace.norm() > 0.0;
    const Eigen::Index m = has_warp ? nullspace.cols() : 0;

    Eigen::MatrixXd design(n, m + 1);
    if (m > 0) design.leftCols(m) = k * nullspace;
    design.col(m).setOnes();
    Eigen::MatrixXd normal = design.transpose() * design;
    if (m > 0) normal.topLeftCorner(m, m) += reg * nullspace.transpose() * k * nullspace;
    const Eigen::MatrixX2d sol = normal.completeOrthogonalDecomposition().solve(design.transpose() * resid);

    f.weights = m > 0 ? Eigen::MatrixX2d(nullspace * sol.topRows(m)) : Eigen::MatrixX2d::Zero(n, 2);
    f.translation = sol.row(m).transpose();
    f.linear.setIdentity();
    return f;
}

/// sum |scene_i - f(model_i)|^2 + lambda * bending(f), for index-matched sets.
inline double tps_energy(std::span<const Vec2> scene, std::span<const Vec2> model, const TpsMap& f,
                         double lambda) {
    if (scene.size() != model.size()) throw Error(ErrorCode::SizeMismatch, "scene and model sizes differ");
    double data = 0.0;
    for (std::size_t i = 0; i < scene.size(); ++i) data += (scene[i] - f(model[i])).squared_norm();
    if (lambda == 0.0) return data;
    return data + lambda * f.bending_energy();
}

}  // namespace swarm
