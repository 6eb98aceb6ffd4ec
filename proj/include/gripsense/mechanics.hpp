#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace gripsense::mechanics {

/// Planar external disturbance force, normalized units.
struct Disturbance {
    double fx = 0.0;
    double fy = 0.0;

    Eigen::Vector2d vec() const { return Eigen::Vector2d(fx, fy); }
};

/// Per-finger contact normals in the grasp plane, unit length.
///
/// The three-finger layout spaces the normals 120 degrees apart with finger 3
/// pinned to +y, which makes them a tight frame: sum n_i n_i^T = (3/2) I.
struct FingerBasis {
    std::vector<Eigen::Vector2d> normals;

    static FingerBasis three_finger() {
        const double h = std::sqrt(3.0) / 2.0;
        return FingerBasis{{Eigen::Vector2d(-h, -0.5),
                            Eigen::Vector2d(h, -0.5),
                            Eigen::Vector2d(0.0, 1.0)}};
    }

    /// Opposed horizontal pair; spans only the x axis.
    static FingerBasis two_finger() {
        return FingerBasis{{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(-1.0, 0.0)}};
    }
};

/// Signed force along each finger normal plus whatever the basis cannot
/// represent. Invariant: sum a_i n_i + residual = f.
struct Decomposition {
    std::vector<double> coefficients;
    Eigen::Vector2d residual = Eigen::Vector2d::Zero();

    Eigen::Vector2d reconstruct(const FingerBasis& basis) const {
        Eigen::Vector2d sum = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < coefficients.size(); ++i) {
            sum += coefficients[i] * basis.normals[i];
        }
        return sum;
    }
};

struct DegenerateBasisError : std::invalid_argument {
    DegenerateBasisError() : std::invalid_argument("all finger normals are zero") {}
};

/// Minimum-norm split of a disturbance across the finger normals.
///
/// Solves a = N^T (N N^T)^+ f with the columns of N the normals; the residual
/// is the component outside the span. For the 120-degree basis this collapses
/// to a_i = (2/3) (n_i . f) with zero residual; for the opposed pair the
/// residual is exactly (0, f_y). Coefficients are signed: fingers may unload.
/// Throws DegenerateBasisError when every normal is zero.
Decomposition decompose(const Disturbance& f, const FingerBasis& basis);

/// True when the basis can absorb f up to |residual| < tol. tol must be > 0.
bool is_resistible(const Disturbance& f, const FingerBasis& basis, double tol);

}  // namespace gripsense::mechanics
