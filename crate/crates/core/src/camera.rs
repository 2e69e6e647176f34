//! Pinhole camera model shared by the rasterizer and the voxel coloring.
//!
//! Camera frame: `x` to the right, `y` down, `z` along the optical axis.
//! Pixel `(i, j)` is 1-based and covers `[i − 0.5, i + 0.5) × [j − 0.5, j + 0.5)`
//! in continuous image coordinates, so the image spans
//! `[0.5, n_x + 0.5) × [0.5, n_y + 0.5)`.

use core::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::math::{asin, atan2, cos, floor, sin, tan, Mat3, Quat, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CameraError {
    #[error("image must be at least 8x8 pixels, got {nx}x{ny}")]
    ImageSize { nx: usize, ny: usize },
    #[error("horizontal field of view must lie in (0, pi), got {0}")]
    FieldOfView(f64),
    #[error("near plane distance must be positive, got {0}")]
    Near(f64),
    #[error("camera position is not finite")]
    Position,
    #[error("look-at target coincides with the camera position")]
    TargetAtPosition,
    #[error("up vector is parallel to the viewing direction")]
    ParallelUp,
}

/// Square-pixel pinhole intrinsics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    nx: usize,
    ny: usize,
    hfov: f64,
    near: f64,
}

impl CameraIntrinsics {
    pub const DEFAULT_HFOV: f64 = FRAC_PI_2;
    pub const DEFAULT_NEAR: f64 = 0.05;

    pub fn new(nx: usize, ny: usize, hfov: f64, near: f64) -> Result<Self, CameraError> {
        if nx < 8 || ny < 8 {
            return Err(CameraError::ImageSize { nx, ny });
        }
        if !(hfov > 0.0 && hfov < PI) {
            return Err(CameraError::FieldOfView(hfov));
        }
        if !(near > 0.0 && near.is_finite()) {
            return Err(CameraError::Near(near));
        }
        Ok(CameraIntrinsics { nx, ny, hfov, near })
    }

    /// 90° horizontal field of view, near plane at 0.05.
    pub fn with_defaults(nx: usize, ny: usize) -> Result<Self, CameraError> {
        Self::new(nx, ny, Self::DEFAULT_HFOV, Self::DEFAULT_NEAR)
    }

    pub fn width(&self) -> usize {
        self.nx
    }

    pub fn height(&self) -> usize {
        self.ny
    }

    pub fn hfov(&self) -> f64 {
        self.hfov
    }

    pub fn near(&self) -> f64 {
        self.near
    }

    pub fn pixel_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        (self.nx as f64 / 2.0) / tan(self.hfov / 2.0)
    }

    /// Continuous coordinates of the principal point.
    pub fn center(&self) -> (f64, f64) {
        ((self.nx as f64 + 1.0) / 2.0, (self.ny as f64 + 1.0) / 2.0)
    }

    pub fn vfov(&self) -> f64 {
        2.0 * crate::math::atan((self.ny as f64 / 2.0) / self.focal())
    }

    /// Integer pixel containing the continuous coordinates `(u, v)`, or
    /// `None` outside the image. Ties round up.
    #[inline]
    pub fn pixel_of(&self, u: f64, v: f64) -> Option<(usize, usize)> {
        let i = floor(u + 0.5);
        let j = floor(v + 0.5);
        if i >= 1.0 && i <= self.nx as f64 && j >= 1.0 && j <= self.ny as f64 {
            Some((i as usize, j as usize))
        } else {
            None
        }
    }

    /// Row-major buffer index of 1-based pixel `(i, j)`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        (j - 1) * self.nx + (i - 1)
    }
}

/// Extrinsic pose. `orientation` rotates camera-frame vectors into the world
/// frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    position: Vec3,
    orientation: Quat,
}

impl CameraPose {
    pub fn new(position: Vec3, orientation: Quat) -> Result<Self, CameraError> {
        if !position.is_finite() {
            return Err(CameraError::Position);
        }
        Ok(CameraPose {
            position,
            orientation: orientation.normalized(),
        })
    }

    /// Roll-free pose looking along pan (azimuth about world `z`, from `+x`)
    /// and tilt (elevation, positive up). The image `x` axis stays horizontal.
    pub fn from_pan_tilt(position: Vec3, pan: f64, tilt: f64) -> Result<Self, CameraError> {
        let forward = Vec3::new(cos(tilt) * cos(pan), cos(tilt) * sin(pan), sin(tilt));
        let right = Vec3::new(sin(pan), -cos(pan), 0.0);
        let down = forward.cross(right);
        Self::new(
            position,
            Quat::from_matrix(&Mat3::from_cols(right, down, forward)),
        )
    }

    /// Pose at `position` whose optical axis passes through `target`, with
    /// roll fixed so that `up` projects to the upward image direction.
    pub fn look_at(position: Vec3, target: Vec3, up: Vec3) -> Result<Self, CameraError> {
        let forward = (target - position)
            .try_normalize()
            .ok_or(CameraError::TargetAtPosition)?;
        let right = forward.cross(up);
        if right.norm() < 1e-9 * up.norm().max(1e-300) {
            return Err(CameraError::ParallelUp);
        }
        let right = right.try_normalize().ok_or(CameraError::ParallelUp)?;
        let down = forward.cross(right);
        Self::new(
            position,
            Quat::from_matrix(&Mat3::from_cols(right, down, forward)),
        )
    }

    /// Roll-free pose aimed at `target`; well defined even when looking
    /// straight up or down.
    pub fn aimed_at(position: Vec3, target: Vec3) -> Result<Self, CameraError> {
        let d = (target - position)
            .try_normalize()
            .ok_or(CameraError::TargetAtPosition)?;
        let pan = atan2(d.y, d.x);
        let tilt = asin(d.z.clamp(-1.0, 1.0));
        Self::from_pan_tilt(position, pan, tilt)
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn orientation(&self) -> Quat {
        self.orientation
    }

    pub fn rotation(&self) -> Mat3 {
        self.orientation.to_matrix()
    }

    pub fn optical_axis(&self) -> Vec3 {
        self.rotation().col(2)
    }

    /// Pan in `[0, 2π)` and tilt in `[−π/2, π/2]`, assuming zero roll.
    pub fn pan_tilt(&self) -> (f64, f64) {
        let r = self.rotation();
        let (right, forward) = (r.col(0), r.col(2));
        let mut pan = atan2(right.x, -right.y);
        if pan < 0.0 {
            pan += TAU;
        }
        if pan >= TAU {
            pan -= TAU;
        }
        (pan, asin(forward.z.clamp(-1.0, 1.0)))
    }

    /// Projection bound to fixed intrinsics.
    pub fn view(&self, intrinsics: &CameraIntrinsics) -> View {
        let (cx, cy) = intrinsics.center();
        View {
            position: self.position,
            world_to_camera: self.rotation().transpose(),
            focal: intrinsics.focal(),
            cx,
            cy,
            near: intrinsics.near(),
            intrinsics: *intrinsics,
        }
    }
}

/// Result of projecting a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Continuous image coordinates; meaningless when `in_front` is false.
    pub u: f64,
    pub v: f64,
    /// Euclidean distance from the camera centre.
    pub distance: f64,
    /// False when the point lies behind the near plane.
    pub in_front: bool,
}

/// A camera pose combined with its intrinsics, precomputed for projection.
#[derive(Debug, Clone, Copy)]
pub struct View {
    pub position: Vec3,
    pub world_to_camera: Mat3,
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
    pub near: f64,
    pub intrinsics: CameraIntrinsics,
}

impl View {
    #[inline]
    pub fn to_camera(&self, y: Vec3) -> Vec3 {
        self.world_to_camera.mul_vec(y - self.position)
    }

    #[inline]
    pub fn project(&self, y: Vec3) -> Projection {
        let rel = y - self.position;
        let c = self.world_to_camera.mul_vec(rel);
        let distance = rel.norm();
        if c.z >= self.near {
            Projection {
                u: self.cx + self.focal * c.x / c.z,
                v: self.cy + self.focal * c.y / c.z,
                distance,
                in_front: true,
            }
        } else {
            Projection {
                u: f64::NAN,
                v: f64::NAN,
                distance,
                in_front: false,
            }
        }
    }

    /// Camera-frame direction (with unit `z`) through continuous image point `(u, v)`.
    #[inline]
    pub fn ray_camera(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.focal, (v - self.cy) / self.focal, 1.0)
    }

    /// World-frame direction with unit camera depth through `(u, v)`.
    pub fn ray_world(&self, u: f64, v: f64) -> Vec3 {
        self.world_to_camera.transpose().mul_vec(self.ray_camera(u, v))
    }

    /// Integer pixel hit by `y`, or `None` when outside the frustum.
    #[inline]
    pub fn pixel(&self, y: Vec3) -> Option<((usize, usize), f64)> {
        let p = self.project(y);
        if !p.in_front {
            return None;
        }
        self.intrinsics.pixel_of(p.u, p.v).map(|px| (px, p.distance))
    }
}

/// Projects `y` with the given pose and intrinsics.
pub fn project(pose: &CameraPose, intrinsics: &CameraIntrinsics, y: Vec3) -> Projection {
    pose.view(intrinsics).project(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::with_defaults(320, 240).unwrap()
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(7, 100, 1.0, 0.1).is_err());
        assert!(CameraIntrinsics::new(8, 8, PI, 0.1).is_err());
        assert!(CameraIntrinsics::new(8, 8, 1.0, 0.0).is_err());
        assert!(CameraIntrinsics::new(8, 8, 1.0, 0.1).is_ok());
    }

    #[test]
    fn point_on_axis_projects_to_center() {
        let pose = CameraPose::from_pan_tilt(Vec3::new(1.0, 2.0, 3.0), 0.7, -0.2).unwrap();
        let y = pose.position() + pose.optical_axis() * 5.0;
        let p = project(&pose, &intr(), y);
        assert!(p.in_front);
        assert!((p.u - 160.5).abs() < 1e-9 && (p.v - 120.5).abs() < 1e-9);
        assert!((p.distance - 5.0).abs() < 1e-12);
    }

    #[test]
    fn camera_position_is_not_in_front() {
        let pose = CameraPose::from_pan_tilt(Vec3::ZERO, 0.0, 0.0).unwrap();
        assert!(!project(&pose, &intr(), Vec3::ZERO).in_front);
    }

    #[test]
    fn fov_edge_maps_to_image_border() {
        let k = intr();
        let pose = CameraPose::from_pan_tilt(Vec3::ZERO, 0.0, 0.0).unwrap();
        let d = 4.0;
        let half = k.hfov() / 2.0;
        // camera looks along +x, image right is world -y
        for (sign, expect) in [(-1.0, 320.0), (1.0, 1.0)] {
            let y = Vec3::new(d, sign * d * tan(half), 0.0);
            let p = project(&pose, &k, y);
            assert!((p.u - expect).abs() <= 0.5 + 1e-9, "u = {}", p.u);
            assert!((p.distance - d / cos(half)).abs() < 1e-12);
        }
    }

    #[test]
    fn pixel_rounding_rules() {
        let k = intr();
        assert_eq!(k.pixel_of(1.4, 1.4), Some((1, 1)));
        assert_eq!(k.pixel_of(0.5, 0.5), Some((1, 1)));
        assert_eq!(k.pixel_of(0.49, 3.0), None);
        assert_eq!(k.pixel_of(320.6, 5.0), None);
        assert_eq!(k.pixel_of(320.49, 240.49), Some((320, 240)));
        assert_eq!(k.pixel_of(1.5, 2.5), Some((2, 3)));
    }

    #[test]
    fn look_at_down_the_z_axis() {
        let pose = CameraPose::look_at(
            Vec3::new(0.0, 0.0, 26.5),
            Vec3::new(0.0, 0.0, 10.0),
            Vec3::Y,
        )
        .unwrap();
        let axis = pose.optical_axis();
        assert!((axis - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        assert_eq!(
            CameraPose::look_at(Vec3::ZERO, Vec3::Z, Vec3::Z),
            Err(CameraError::ParallelUp)
        );
        assert_eq!(
            CameraPose::look_at(Vec3::Z, Vec3::Z, Vec3::X),
            Err(CameraError::TargetAtPosition)
        );
    }

    #[test]
    fn look_at_target_hits_center_exactly() {
        let k = intr();
        let targets = [Vec3::new(3.0, -2.0, 1.0), Vec3::new(-7.0, 0.5, 12.0)];
        for t in targets {
            let pose = CameraPose::look_at(Vec3::new(0.3, 0.2, 2.0), t, Vec3::Z).unwrap();
            let p = project(&pose, &k, t);
            assert!((p.u - 160.5).abs() < 1e-6 && (p.v - 120.5).abs() < 1e-6);
        }
    }

    #[test]
    fn mirrored_cameras_give_mirrored_pixels() {
        // reflection across the plane x = 0 through the common target
        let k = intr();
        let target = Vec3::new(0.0, 5.0, 1.0);
        let a = CameraPose::look_at(Vec3::new(2.0, 0.0, 1.5), target, Vec3::Z).unwrap();
        let b = CameraPose::look_at(Vec3::new(-2.0, 0.0, 1.5), target, Vec3::Z).unwrap();
        let y = Vec3::new(0.7, 4.0, 0.4);
        let ym = Vec3::new(-0.7, 4.0, 0.4);
        let (pa, pb) = (project(&a, &k, y), project(&b, &k, ym));
        let (cx, _) = k.center();
        assert!(((pa.u - cx) + (pb.u - cx)).abs() < 1e-9);
        assert!((pa.v - pb.v).abs() < 1e-9);
        assert!((pa.distance - pb.distance).abs() < 1e-12);
    }

    #[test]
    fn pan_tilt_round_trip() {
        for &(pan, tilt) in &[
            (0.0, 0.0),
            (1.0, 0.3),
            (3.5, -1.2),
            (6.2, FRAC_PI_2),
            (2.0, -FRAC_PI_2),
        ] {
            let pose = CameraPose::from_pan_tilt(Vec3::ZERO, pan, tilt).unwrap();
            let (p, t) = pose.pan_tilt();
            assert!((p - pan).abs() < 1e-9, "{pan} -> {p}");
            assert!((t - tilt).abs() < 1e-9);
        }
    }

    #[test]
    fn aimed_at_straight_down() {
        let pose = CameraPose::aimed_at(Vec3::new(0.0, 0.0, 26.5), Vec3::new(0.0, 0.0, 10.0))
            .unwrap();
        assert!((pose.optical_axis() - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
    }
}
