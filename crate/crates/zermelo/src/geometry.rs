//! Small fixed-size vector/tensor types for planar fields.
//!
//! Wind fields map the plane to itself, so their derivatives are tensors
//! with one output index and up to three spatial indices. Everything here
//! is plain `f64` arrays with the handful of contractions the derivative
//! cascades need.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// A point or vector in the plane. Serializes as the two-element array
/// `[x, y]`, the form used by scenario files and exported trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Serialize for Vec2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vec2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(deserializer)?;
        Ok(Vec2 { x, y })
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Counter-clockwise rotation by 90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn unit(self) -> Vec2 {
        self / self.norm()
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

/// A 2x2 matrix, row major. Used for wind Jacobians: `m[i][j] = dw_i/dx_j`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.0[0][0] * v.x + self.0[0][1] * v.y,
            self.0[1][0] * v.x + self.0[1][1] * v.y,
        )
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let mut r = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] = self.0[i][j] + o.0[i][j];
            }
        }
        r
    }
}

/// Rank-3 tensor `t[i][j][k] = d^2 w_i / dx_j dx_k`, symmetric in (j, k).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor3(pub [[[f64; 2]; 2]; 2]);

impl Tensor3 {
    pub const ZERO: Tensor3 = Tensor3([[[0.0; 2]; 2]; 2]);

    /// Contract both spatial slots: returns the vector `t[., a, b]`.
    pub fn apply2(&self, a: Vec2, b: Vec2) -> Vec2 {
        let av = [a.x, a.y];
        let bv = [b.x, b.y];
        let mut out = [0.0; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i] += self.0[i][j][k] * av[j] * bv[k];
                }
            }
        }
        Vec2::new(out[0], out[1])
    }

    /// Full contraction `p^T t[a, b]`; `p` contracts the output index.
    pub fn contract(&self, p: Vec2, a: Vec2, b: Vec2) -> f64 {
        p.dot(self.apply2(a, b))
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, o: &Tensor3) -> Tensor3 {
        let mut r = Tensor3::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    r.0[i][j][k] = self.0[i][j][k] + o.0[i][j][k];
                }
            }
        }
        r
    }
}

/// Rank-4 tensor `t[i][j][k][l] = d^3 w_i / dx_j dx_k dx_l`, symmetric in
/// the spatial indices.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor4(pub [[[[f64; 2]; 2]; 2]; 2]);

impl Tensor4 {
    pub const ZERO: Tensor4 = Tensor4([[[[0.0; 2]; 2]; 2]; 2]);

    /// Full contraction `p^T t[a, b, c]`.
    pub fn contract(&self, p: Vec2, a: Vec2, b: Vec2, c: Vec2) -> f64 {
        let pv = [p.x, p.y];
        let av = [a.x, a.y];
        let bv = [b.x, b.y];
        let cv = [c.x, c.y];
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        acc += pv[i] * self.0[i][j][k][l] * av[j] * bv[k] * cv[l];
                    }
                }
            }
        }
        acc
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .map(|a| a * a)
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, o: &Tensor4) -> Tensor4 {
        let mut r = Tensor4::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        r.0[i][j][k][l] = self.0[i][j][k][l] + o.0[i][j][k][l];
                    }
                }
            }
        }
        r
    }
}
