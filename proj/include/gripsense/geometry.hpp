#pragma once

#include <Eigen/Dense>

namespace gripsense::geometry {

inline constexpr int kFrameWidth = 800;
inline constexpr int kFrameHeight = 600;

// Pixel coordinates of the grasping-center projection. The gripper structure
// aligns the camera axis with the grasping center, so the principal point is
// the frame center.
inline constexpr double kPrincipalU = 400.0;
inline constexpr double kPrincipalV = 300.0;

/// The frames of the gripper assembly. Base, EndEffector, Camera and
/// GraspCenter are 3D; Pixel and Center are planar image frames represented
/// as 3D transforms with z pinned to the grasp plane.
enum class FrameId { Base, EndEffector, Camera, GraspCenter, Pixel, Center };

constexpr bool is_image_frame(FrameId id) {
    return id == FrameId::Pixel || id == FrameId::Center;
}

/// Sub-pixel image location, u = column, v = row.
struct PixelPoint {
    double u = 0.0;
    double v = 0.0;

    bool inside_frame() const {
        return u >= 0.0 && u < kFrameWidth && v >= 0.0 && v < kFrameHeight;
    }
};

/// Rigid transform: 3x3 orthonormal rotation plus translation in mm.
/// Pure value type, safe to share across threads.
class Transform {
public:
    Transform()
        : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

    Transform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation_mm)
        : rotation_(rotation), translation_(translation_mm) {}

    static Transform identity() { return Transform{}; }

    static Transform translate(double x_mm, double y_mm, double z_mm) {
        return Transform(Eigen::Matrix3d::Identity(), Eigen::Vector3d(x_mm, y_mm, z_mm));
    }

    static Transform translate(const Eigen::Vector3d& t_mm) {
        return Transform(Eigen::Matrix3d::Identity(), t_mm);
    }

    /// Rotation about the z axis, degrees, right-handed.
    static Transform rotate_z(double degrees);

    const Eigen::Matrix3d& rotation() const { return rotation_; }
    const Eigen::Vector3d& translation() const { return translation_; }

    Transform inverse() const {
        const Eigen::Matrix3d rt = rotation_.transpose();
        return Transform(rt, -(rt * translation_));
    }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
        return rotation_ * p + translation_;
    }

    bool is_orthonormal(double tol = 1e-9) const {
        const Eigen::Matrix3d err =
            rotation_.transpose() * rotation_ - Eigen::Matrix3d::Identity();
        return err.cwiseAbs().maxCoeff() <= tol;
    }

    bool approx_equal(const Transform& other, double tol = 1e-9) const {
        return (rotation_ - other.rotation_).cwiseAbs().maxCoeff() <= tol &&
               (translation_ - other.translation_).cwiseAbs().maxCoeff() <= tol;
    }

private:
    Eigen::Matrix3d rotation_;
    Eigen::Vector3d translation_;
};

/// Homogeneous product: the pose of rhs's frame expressed through lhs.
Transform compose(const Transform& lhs, const Transform& rhs);

/// Fixed constants of the gripper structure: how the camera, image frames and
/// grasping center hang off the end-effector. The chain pieces are derived
/// from a handful of physical numbers so scenario files can override them.
struct GripperRig {
    double pixel_scale_mm = 0.5;        // mm per pixel at the grasp plane
    double grasp_drop_mm = 120.0;       // grasp center below the camera along -z
    double camera_yaw_deg = 0.0;        // image axes vs end-effector axes, about z
    Eigen::Vector3d camera_offset_mm = Eigen::Vector3d::Zero();  // camera origin in the end-effector frame

    double fingertip_spacing_mm = 212.5;  // distance between neighboring fingertips, open
    double finger_angle_deg = 30.0;       // finger tilt from vertical
    double marker_offset_mm = 3.5;        // marker distance from the fingertip along the finger
    double closed_tip_radius_mm = 30.0;   // fingertip circle radius at full bend
    double distortion_k = 1e-7;           // radial term, px^-2

    /// Fingertip circle radius when open: circumradius of the equilateral
    /// fingertip triangle.
    double open_tip_radius_mm() const { return fingertip_spacing_mm / std::sqrt(3.0); }

    /// Radial offset of the marker from the fingertip circle. The marker sits
    /// marker_offset_mm up the finger, which is tilted finger_angle_deg from
    /// vertical, so only the sine component is radial.
    double marker_radial_offset_mm() const {
        return marker_offset_mm * std::sin(deg_to_rad_(finger_angle_deg));
    }

    double marker_circle_radius_mm(double tip_radius_mm) const {
        return tip_radius_mm - marker_radial_offset_mm();
    }

    // Chain pieces. a = end-effector, b = camera, c = grasp center.
    Transform t_a_b() const;
    Transform t_b_pixel() const;
    Transform t_pixel_center() const;
    Transform t_center_c() const;

    /// Direct end-effector -> grasp-center transform, bypassing the image
    /// frames. Used as the reference route in chain-consistency checks.
    Transform t_a_c() const;

private:
    static double deg_to_rad_(double d) { return d * M_PI / 180.0; }
};

/// Base -> grasp-center through the full image-frame chain:
/// t_base_a . t_a_b . t_b_pixel . t_pixel_center . t_center_c.
Transform base_to_center(const Transform& t_base_a, const GripperRig& rig);

/// Affine pixel -> grasp-center-plane mapping, output in mm:
/// ((u - 400) * scale, (v - 300) * scale). Throws std::invalid_argument for
/// non-finite or non-positive scale.
Eigen::Vector2d pixel_to_center(const PixelPoint& p, double scale_mm_per_px);

/// Project a base-frame point onto the image through the rig, including the
/// radial distortion r' = r (1 + k r^2) about the principal point.
/// gripper_pose is the base -> end-effector transform.
PixelPoint project_to_pixel(const Eigen::Vector3d& point_base_mm,
                            const Transform& gripper_pose,
                            const GripperRig& rig);

/// Apply the radial distortion model about the principal point.
PixelPoint distort(const PixelPoint& undistorted, double k);

/// Map an image-plane direction (x along +u, y along +v) into a base-frame
/// horizontal direction through the rig yaw.
Eigen::Vector3d image_dir_to_base(const Eigen::Vector2d& dir_image_xy,
                                  const Transform& gripper_pose,
                                  const GripperRig& rig);

}  // namespace gripsense::geometry
