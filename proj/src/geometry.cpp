#include "gripsense/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace gripsense::geometry {

Transform Transform::rotate_z(double degrees) {
    const double rad = degrees * M_PI / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    Eigen::Matrix3d r;
    r << c, -s, 0.0,
         s,  c, 0.0,
         0.0, 0.0, 1.0;
    return Transform(r, Eigen::Vector3d::Zero());
}

Transform compose(const Transform& lhs, const Transform& rhs) {
    return Transform(lhs.rotation() * rhs.rotation(),
                     lhs.rotation() * rhs.translation() + lhs.translation());
}

Transform GripperRig::t_a_b() const {
    return compose(Transform::translate(camera_offset_mm), Transform::rotate_z(camera_yaw_deg));
}

Transform GripperRig::t_b_pixel() const {
    // Pixel frame: metric frame on the grasp plane whose origin is the
    // projection of pixel (0, 0), axes along +u / +v.
    return Transform::translate(-kPrincipalU * pixel_scale_mm,
                                -kPrincipalV * pixel_scale_mm,
                                -grasp_drop_mm);
}

Transform GripperRig::t_pixel_center() const {
    return Transform::translate(kPrincipalU * pixel_scale_mm,
                                kPrincipalV * pixel_scale_mm,
                                0.0);
}

Transform GripperRig::t_center_c() const {
    return Transform::rotate_z(-camera_yaw_deg);
}

Transform GripperRig::t_a_c() const {
    return Transform::translate(camera_offset_mm + Eigen::Vector3d(0.0, 0.0, -grasp_drop_mm));
}

Transform base_to_center(const Transform& t_base_a, const GripperRig& rig) {
    Transform t = compose(t_base_a, rig.t_a_b());
    t = compose(t, rig.t_b_pixel());
    t = compose(t, rig.t_pixel_center());
    t = compose(t, rig.t_center_c());
    return t;
}

Eigen::Vector2d pixel_to_center(const PixelPoint& p, double scale_mm_per_px) {
    if (!std::isfinite(scale_mm_per_px) || scale_mm_per_px <= 0.0) {
        throw std::invalid_argument("pixel_to_center: scale must be finite and positive");
    }
    return Eigen::Vector2d((p.u - kPrincipalU) * scale_mm_per_px,
                           (p.v - kPrincipalV) * scale_mm_per_px);
}

PixelPoint distort(const PixelPoint& undistorted, double k) {
    const double du = undistorted.u - kPrincipalU;
    const double dv = undistorted.v - kPrincipalV;
    const double factor = 1.0 + k * (du * du + dv * dv);
    return PixelPoint{kPrincipalU + du * factor, kPrincipalV + dv * factor};
}

PixelPoint project_to_pixel(const Eigen::Vector3d& point_base_mm,
                            const Transform& gripper_pose,
                            const GripperRig& rig) {
    const Transform t_base_camera = compose(gripper_pose, rig.t_a_b());
    const Eigen::Vector3d p_cam = t_base_camera.inverse().apply(point_base_mm);
    const PixelPoint raw{kPrincipalU + p_cam.x() / rig.pixel_scale_mm,
                         kPrincipalV + p_cam.y() / rig.pixel_scale_mm};
    return distort(raw, rig.distortion_k);
}

Eigen::Vector3d image_dir_to_base(const Eigen::Vector2d& dir_image_xy,
                                  const Transform& gripper_pose,
                                  const GripperRig& rig) {
    const Transform t_base_camera = compose(gripper_pose, rig.t_a_b());
    return t_base_camera.rotation() * Eigen::Vector3d(dir_image_xy.x(), dir_image_xy.y(), 0.0);
}

}  // namespace gripsense::geometry
