#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace voxrec {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Half-line from `origin` along unit `direction`.
struct Ray {
    Vec3 origin;
    Vec3 direction;
};

/// Pinhole camera. `rotation` maps world to camera coordinates (z forward,
/// image y down), `center` is the camera position in world units.
class Camera {
public:
    Camera(const Mat3& rotation, const Vec3& center, double fx, double fy, double cx,
           double cy, int width, int height)
        : rotation_(rotation),
          center_(center),
          fx_(fx),
          fy_(fy),
          cx_(cx),
          cy_(cy),
          width_(width),
          height_(height) {
        if (width <= 0 || height <= 0) throw std::invalid_argument("camera: image size must be positive");
        if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera: focal lengths must be positive");
        if (!(cx >= 0.0 && cx < width)) throw std::invalid_argument("camera: cx outside image");
        if (!(cy >= 0.0 && cy < height)) throw std::invalid_argument("camera: cy outside image");
        const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
        if (ortho_err > 1e-9) throw std::invalid_argument("camera: rotation is not orthonormal");
        if (std::abs(rotation.determinant() - 1.0) > 1e-9)
            throw std::invalid_argument("camera: rotation determinant is not +1");
    }

    const Mat3& rotation() const { return rotation_; }
    const Vec3& center() const { return center_; }
    double fx() const { return fx_; }
    double fy() const { return fy_; }
    double cx() const { return cx_; }
    double cy() const { return cy_; }
    int width() const { return width_; }
    int height() const { return height_; }

    /// Camera positioned at `position`, aimed at `target`, with world `up`
    /// mapping to image up (image y axis points down).
    static Camera look_at(const Vec3& position, const Vec3& target, const Vec3& up, double fx,
                          double fy, double cx, double cy, int width, int height) {
        const Vec3 forward = (target - position).normalized();
        Vec3 right = forward.cross(up);
        const double norm = right.norm();
        if (norm < 1e-12) throw std::invalid_argument("camera: view direction parallel to up vector");
        right /= norm;
        const Vec3 down = forward.cross(right);
        Mat3 rot;
        rot.row(0) = right;
        rot.row(1) = down;
        rot.row(2) = forward;
        return Camera(rot, position, fx, fy, cx, cy, width, height);
    }

private:
    Mat3 rotation_;
    Vec3 center_;
    double fx_, fy_, cx_, cy_;
    int width_, height_;
};

/// Ray through the center of pixel (i, j). Pixel centers sit at half-integer
/// coordinates (i + 0.5, j + 0.5); the pixel is back-projected to unit depth
/// in the camera frame and lifted to world coordinates.
inline Ray pixel_ray(const Camera& cam, int i, int j) {
    if (i < 0 || i >= cam.width() || j < 0 || j >= cam.height())
        throw std::invalid_argument("pixel_ray: pixel outside image");
    const Vec3 p_cam((i + 0.5 - cam.cx()) / cam.fx(), (j + 0.5 - cam.cy()) / cam.fy(), 1.0);
    const Vec3 p_world = cam.rotation().transpose() * p_cam + cam.center();
    return Ray{cam.center(), (p_world - cam.center()).normalized()};
}

/// Continuous pixel coordinates plus camera-frame depth of a world point.
struct PixelCoord {
    double u;
    double v;
    double depth;
};

/// Perspective projection. Empty when the point has non-positive depth.
inline std::optional<PixelCoord> project_point(const Camera& cam, const Vec3& point) {
    const Vec3 p_cam = cam.rotation() * (point - cam.center());
    if (!(p_cam.z() > 0.0)) return std::nullopt;
    return PixelCoord{cam.fx() * p_cam.x() / p_cam.z() + cam.cx(),
                      cam.fy() * p_cam.y() / p_cam.z() + cam.cy(), p_cam.z()};
}

/// Camera on a sphere around `target`: azimuth about the world z axis,
/// elevation above the xy plane, at distance `radius`. Looks at `target`.
inline Camera spherical_camera(const Vec3& target, double azimuth, double elevation,
                               double radius, double fx, double fy, double cx, double cy,
                               int width, int height) {
    const Vec3 offset(std::cos(elevation) * std::cos(azimuth),
                      std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
    return Camera::look_at(target + radius * offset, target, Vec3(0, 0, 1), fx, fy, cx, cy,
                           width, height);
}

}  // namespace voxrec
