//! The secure region on the outcome-probability simplex and its origin-cone
//! ruled surface.
//!
//! The region is described by an ordered curve γ on the 2-simplex of
//! `(p_C, p_⊥, p_I)` distributions. The surface `F = 0` is the cone of
//! straight lines joining γ to the origin of ℝ³; its piecewise-linear
//! approximation has one planar facet per curve segment, with unit normal
//! `±(g_i × g_{i+1})/‖·‖` oriented so the honest point scores positive on
//! every facet.
//!
//! Facet selection at an evaluation point uses the fan of rays from the
//! all-correct vertex `(1,0,0)`: a point belongs to the facet whose sweep
//! interval `[atan2(g_I, g_⊥)]` contains its own sweep angle, with ties on
//! a seam resolved to the lower-index facet and angles outside the curve's
//! range clamped to the end facets.

use serde::{Deserialize, Serialize};

use super::VerdictError;

const SIMPLEX_TOL: f64 = 1e-10;

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn sweep_angle(point: [f64; 3]) -> f64 {
    point[2].atan2(point[1])
}

/// Piecewise-linear ruled surface over a curve on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecureRegion {
    curve: Vec<[f64; 3]>,
    normals: Vec<[f64; 3]>,
    sweep: Vec<f64>,
    orientation: f64,
}

impl SecureRegion {
    /// Builds the surface from an ordered curve and the honest reference
    /// point fixing the sign of `F`.
    pub fn from_curve(
        mut curve: Vec<[f64; 3]>,
        honest_point: [f64; 3],
    ) -> Result<Self, VerdictError> {
        if curve.len() < 2 {
            return Err(VerdictError::CurveTooShort);
        }
        for (index, p) in curve.iter().enumerate() {
            let sum = p[0] + p[1] + p[2];
            if (sum - 1.0).abs() > SIMPLEX_TOL || p.iter().any(|&c| c < -SIMPLEX_TOL) {
                return Err(VerdictError::PointOffSimplex { index, sum });
            }
        }
        let mut sweep: Vec<f64> = curve.iter().map(|&p| sweep_angle(p)).collect();
        if sweep.windows(2).all(|w| w[0] > w[1]) {
            curve.reverse();
            sweep.reverse();
        }
        if let Some(index) = sweep.windows(2).position(|w| w[0] >= w[1]) {
            return Err(VerdictError::CurveNotMonotone { index });
        }

        let mut normals = Vec::with_capacity(curve.len() - 1);
        let mut orientation = 0.0f64;
        for pair in curve.windows(2) {
            let raw = cross(pair[0], pair[1]);
            let len = norm(raw);
            if len < 1e-12 {
                return Err(VerdictError::CurveNotMonotone {
                    index: normals.len(),
                });
            }
            let unit = [raw[0] / len, raw[1] / len, raw[2] / len];
            let side = dot(unit, honest_point);
            if side.abs() < 1e-12 {
                return Err(VerdictError::InconsistentOrientation);
            }
            let sign = side.signum();
            if orientation == 0.0 {
                orientation = sign;
            } else if orientation != sign {
                return Err(VerdictError::InconsistentOrientation);
            }
            normals.push(unit);
        }
        let normals = normals
            .into_iter()
            .map(|n| [n[0] * orientation, n[1] * orientation, n[2] * orientation])
            .collect();
        Ok(Self {
            curve,
            normals,
            sweep,
            orientation,
        })
    }

    pub fn curve(&self) -> &[[f64; 3]] {
        &self.curve
    }

    pub fn normals(&self) -> &[[f64; 3]] {
        &self.normals
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    /// Index of the facet whose angular sector contains the point.
    pub fn facet_index(&self, point: [f64; 3]) -> Result<usize, VerdictError> {
        self.check_point(point)?;
        let angle = sweep_angle(point);
        let last = self.normals.len() - 1;
        if angle <= self.sweep[0] {
            return Ok(0);
        }
        for i in 0..self.normals.len() {
            // A point exactly on the seam between facets i and i+1 has
            // angle == sweep[i+1] and lands in the lower-index facet i.
            if angle <= self.sweep[i + 1] {
                return Ok(i);
            }
        }
        Ok(last)
    }

    /// The unit normal `∇F` at the point's facet, ordered `(C, ⊥, I)`.
    pub fn gradient_at(&self, point: [f64; 3]) -> Result<[f64; 3], VerdictError> {
        Ok(self.normals[self.facet_index(point)?])
    }

    /// Expected payoff `p · ∇F|_eval` of a strategy reproducing the
    /// distribution `p`, scored at `eval_point`.
    pub fn expected_score(
        &self,
        distribution: [f64; 3],
        eval_point: [f64; 3],
    ) -> Result<f64, VerdictError> {
        Ok(dot(distribution, self.gradient_at(eval_point)?))
    }

    fn check_point(&self, point: [f64; 3]) -> Result<(), VerdictError> {
        let sum = point[0] + point[1] + point[2];
        if (sum - 1.0).abs() > 1e-9 || point.iter().any(|&c| c < -SIMPLEX_TOL) {
            return Err(VerdictError::PointNotInterior);
        }
        // The sweep angle needs a direction in the (⊥, I)-plane; the
        // all-correct vertex itself has none.
        if point[1] + point[2] <= 0.0 {
            return Err(VerdictError::PointNotInterior);
        }
        Ok(())
    }
}
