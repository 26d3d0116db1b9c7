use crate::math::{Mat3, Pose, Quat, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points at or closer than this distance along the optical axis are
/// treated as behind the camera.
pub const Z_NEAR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CameraError {
    #[error("camera position coincides with its target or looks straight along world up")]
    DegenerateLookAt,
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

/// Pinhole camera. The pose maps camera coordinates to world coordinates;
/// the camera looks along its local +z with image x to the right and image
/// y pointing down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub intrinsics: Intrinsics,
    pub width: u32,
    pub height: u32,
    pub pose: Pose,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Visible { u: f64, v: f64, z_cam: f64 },
    Behind,
}

impl Camera {
    pub fn new(intrinsics: Intrinsics, width: u32, height: u32, pose: Pose) -> Result<Self, CameraError> {
        let cam = Camera { intrinsics, width, height, pose };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), CameraError> {
        let Intrinsics { fx, fy, cx, cy } = self.intrinsics;
        let bad = |m: String| Err(CameraError::InvalidIntrinsics(m));
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return bad(format!("focal lengths must be positive (fx={fx}, fy={fy})"));
        }
        if self.width == 0 || self.height == 0 {
            return bad("image size must be non-zero".into());
        }
        if !(0.0..self.width as f64).contains(&cx) || !(0.0..self.height as f64).contains(&cy) {
            return bad(format!("principal point ({cx}, {cy}) outside the image"));
        }
        if !self.pose.is_valid() {
            return bad("camera pose is not a rigid transform".into());
        }
        Ok(())
    }

    /// Camera at `position` looking at `target` with world +z as up and no
    /// roll.
    pub fn look_at(
        position: Vec3,
        target: Vec3,
        intrinsics: Intrinsics,
        width: u32,
        height: u32,
    ) -> Result<Self, CameraError> {
        let forward = (target - position).normalized().ok_or(CameraError::DegenerateLookAt)?;
        let right = forward.cross(Vec3::Z);
        if right.norm() < 1e-9 {
            return Err(CameraError::DegenerateLookAt);
        }
        let right = right.normalized().ok_or(CameraError::DegenerateLookAt)?;
        let down = forward.cross(right);
        let rotation = Quat::from_mat3(&Mat3::from_columns(right, down, forward));
        Camera::new(intrinsics, width, height, Pose::new(position, rotation))
    }

    pub fn position(&self) -> Vec3 {
        self.pose.translation
    }

    /// Unit optical axis in world coordinates.
    pub fn forward(&self) -> Vec3 {
        self.pose.matrix().column(2)
    }

    /// World-to-camera rotation (the transpose of the pose rotation).
    pub fn world_to_camera(&self) -> Mat3 {
        self.pose.matrix().transpose()
    }

    pub fn to_camera(&self, world_point: Vec3) -> Vec3 {
        self.world_to_camera().mul_vec(world_point - self.pose.translation)
    }

    pub fn project(&self, world_point: Vec3) -> Projection {
        self.project_camera_point(self.to_camera(world_point))
    }

    // written negated so a NaN depth counts as behind
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn project_camera_point(&self, p: Vec3) -> Projection {
        if !(p.z > Z_NEAR) {
            return Projection::Behind;
        }
        let k = &self.intrinsics;
        Projection::Visible { u: k.fx * p.x / p.z + k.cx, v: k.fy * p.y / p.z + k.cy, z_cam: p.z }
    }

    /// Same camera rendering at a different resolution; intrinsics scale
    /// with the image.
    pub fn resized(&self, width: u32, height: u32) -> Camera {
        let sx = width as f64 / self.width as f64;
        let sy = height as f64 / self.height as f64;
        let k = self.intrinsics;
        Camera {
            intrinsics: Intrinsics { fx: k.fx * sx, fy: k.fy * sy, cx: k.cx * sx, cy: k.cy * sy },
            width,
            height,
            pose: self.pose,
        }
    }
}
