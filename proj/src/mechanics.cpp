#include "gripsense/mechanics.hpp"

#include <cmath>

namespace gripsense::mechanics {

namespace {

// Rank threshold for the 2x2 Gram matrix, relative to its scale.
constexpr double kRankEps = 1e-12;

}  // namespace

Decomposition decompose(const Disturbance& f, const FingerBasis& basis) {
    if (basis.normals.empty()) {
        throw std::invalid_argument("decompose: basis must be non-empty");
    }

    // Gram matrix M = N N^T of the 2 x k normal matrix.
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& n : basis.normals) {
        sxx += n.x() * n.x();
        sxy += n.x() * n.y();
        syy += n.y() * n.y();
    }
    const double scale = std::max(sxx, syy);
    if (scale <= 0.0) {
        throw DegenerateBasisError{};
    }

    const Eigen::Vector2d fv = f.vec();
    Eigen::Vector2d g;  // g = M^+ f, so that a = N^T g

    const double det = sxx * syy - sxy * sxy;
    if (det > kRankEps * scale * scale) {
        g = Eigen::Vector2d((syy * fv.x() - sxy * fv.y()) / det,
                            (sxx * fv.y() - sxy * fv.x()) / det);
    } else if (sxy == 0.0) {
        // Axis-aligned rank-1 Gram matrix. Solving exactly along the spanned
        // axis keeps the unreachable component of the residual bit-exact,
        // e.g. the opposed pair leaves precisely (0, f_y).
        if (sxx >= syy) {
            g = Eigen::Vector2d(fv.x() / sxx, 0.0);
        } else {
            g = Eigen::Vector2d(0.0, fv.y() / syy);
        }
    } else {
        // General rank-1: project onto the dominant eigenvector.
        const double half_trace = 0.5 * (sxx + syy);
        const double radius = std::sqrt(0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy);
        const double lambda = half_trace + radius;
        Eigen::Vector2d dir(lambda - syy, sxy);
        dir.normalize();
        g = (dir.dot(fv) / lambda) * dir;
    }

    Decomposition out;
    out.coefficients.reserve(basis.normals.size());
    Eigen::Vector2d reconstructed = Eigen::Vector2d::Zero();
    for (const auto& n : basis.normals) {
        const double a = n.dot(g);
        out.coefficients.push_back(a);
        reconstructed += a * n;
    }
    out.residual = fv - reconstructed;
    return out;
}

bool is_resistible(const Disturbance& f, const FingerBasis& basis, double tol) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("is_resistible: tol must be positive");
    }
    return decompose(f, basis).residual.norm() < tol;
}

}  // namespace gripsense::mechanics
