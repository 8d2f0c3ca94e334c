//! Rigid transforms used by every frame in the chain and the scene.

use nalgebra::{Matrix3, Rotation3, Unit, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Rotation plus translation (mm). Maps points from the child frame into the
/// parent frame: `p_parent = rotation * p_child + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation3<f64>,
    pub translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn new(rotation: Rotation3<f64>, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Rotation3::identity(), Vec3::new(x, y, z))
    }

    pub fn from_rotation(rotation: Rotation3<f64>) -> Self {
        Self::new(rotation, Vec3::zeros())
    }

    /// Pure rotation of `angle` rad about a unit `axis` through the origin.
    pub fn about_axis(axis: Vec3, angle: f64) -> Self {
        Self::from_rotation(Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle))
    }

    /// Builds a pose from a translation and a (w, x, y, z) quaternion. The
    /// quaternion is renormalized.
    pub fn from_quaternion(translation: Vec3, wxyz: [f64; 4]) -> Self {
        let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
            wxyz[0], wxyz[1], wxyz[2], wxyz[3],
        ));
        Self::new(q.to_rotation_matrix(), translation)
    }

    /// Unit quaternion (w, x, y, z) with w >= 0.
    pub fn quaternion(&self) -> [f64; 4] {
        let q = UnitQuaternion::from_rotation_matrix(&self.rotation);
        let c = q.quaternion().coords;
        // nalgebra stores (i, j, k, w)
        let (w, x, y, z) = (c[3], c[0], c[1], c[2]);
        if w < 0.0 {
            [-w, -x, -y, -z]
        } else {
            [w, x, y, z]
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let r = self.rotation.inverse();
        Pose {
            rotation: r,
            translation: -(r * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Translates the pose in its parent frame.
    pub fn translated(&self, delta: &Vec3) -> Pose {
        Pose {
            rotation: self.rotation,
            translation: self.translation + delta,
        }
    }

    /// Linear interpolation of the translation and shortest-arc interpolation
    /// of the rotation. `t = 0` gives `from`, `t = 1` gives `to` exactly.
    pub fn interpolate(from: &Pose, to: &Pose, t: f64) -> Pose {
        if t <= 0.0 {
            return *from;
        }
        if t >= 1.0 {
            return *to;
        }
        let delta = from.rotation.inverse() * to.rotation;
        let scaled = UnitQuaternion::from_rotation_matrix(&delta).scaled_axis();
        let step = Rotation3::from_scaled_axis(scaled * t);
        Pose {
            rotation: from.rotation * step,
            translation: from.translation + (to.translation - from.translation) * t,
        }
    }

    /// Angle (rad, in [0, π]) of the relative rotation between two poses.
    pub fn rotation_distance(a: &Pose, b: &Pose) -> f64 {
        rotation_angle(&(a.rotation.inverse() * b.rotation))
    }

    /// Largest deviation of `RᵀR` from identity and of det(R) from 1.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(self.rotation.matrix())
    }
}

pub fn rotation_angle(r: &Rotation3<f64>) -> f64 {
    UnitQuaternion::from_rotation_matrix(r).angle()
}

pub fn orthonormality_error(m: &Mat3) -> f64 {
    let gram = m.transpose() * m - Mat3::identity();
    let det = m.determinant() - 1.0;
    gram.iter().fold(libm::fabs(det), |acc, v| acc.max(libm::fabs(*v)))
}

pub fn rot_x(angle: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::x_axis(), angle)
}

pub fn rot_y(angle: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::y_axis(), angle)
}

pub fn rot_z(angle: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), angle)
}
