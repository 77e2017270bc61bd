use nalgebra::SMatrix;

use super::{SchemeParams, Q};
use crate::error::{param, LabError, Result};

pub type Matrix9 = [[f64; Q]; Q];

/// Moment vector `(rho, J_x, J_y, e, xx, xy, q_x, q_y, eps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet(pub [f64; Q]);

impl MomentSet {
    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    pub fn jx(&self) -> f64 {
        self.0[1]
    }

    pub fn jy(&self) -> f64 {
        self.0[2]
    }
}

/// The fixed invertible map `m = M f` and its inverse for one lattice velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    lambda: f64,
    forward: Matrix9,
    inverse: Matrix9,
}

impl MomentMatrix {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(param("lambda", format!("must be positive, got {lambda}")));
        }
        // Row r of M carries lambda^POWERS[r], so M(lambda) = D M(1) and the
        // inverse is M(1)^-1 D^-1; inverting M(1) keeps the pivots O(1)
        // however large lambda is.
        let unit = explicit_matrix(1.0);
        let unit_inverse = invert(&unit)?;
        check_identity(&mat_mul(&unit, &unit_inverse), "M M^-1")?;

        let forward = explicit_matrix(lambda);
        let mut inverse = unit_inverse;
        for row in inverse.iter_mut() {
            for (v, p) in row.iter_mut().zip(POWERS) {
                *v /= lambda.powi(p);
            }
        }
        check_identity(&mat_mul(&inverse, &forward), "M^-1 M")?;
        Ok(Self {
            lambda,
            forward,
            inverse,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn forward(&self) -> &Matrix9 {
        &self.forward
    }

    pub fn inverse(&self) -> &Matrix9 {
        &self.inverse
    }

    pub fn moments_from_populations(&self, f: &[f64; Q]) -> MomentSet {
        MomentSet(mat_vec(&self.forward, f))
    }

    pub fn populations_from_moments(&self, m: &MomentSet) -> [f64; Q] {
        mat_vec(&self.inverse, &m.0)
    }
}

/// Power of lambda in each row of the moment matrix.
pub(crate) const POWERS: [i32; Q] = [0, 1, 1, 2, 2, 2, 3, 3, 4];

fn check_identity(product: &Matrix9, what: &str) -> Result<()> {
    let residual = product
        .iter()
        .enumerate()
        .flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(move |(c, v)| (v - if r == c { 1.0 } else { 0.0 }).abs())
        })
        .fold(0.0, f64::max);
    if residual > 1e-12 {
        return Err(LabError::Domain(format!(
            "moment matrix inverse inaccurate (|{what} - I| = {residual:e})"
        )));
    }
    Ok(())
}

fn explicit_matrix(l: f64) -> Matrix9 {
    let l2 = l * l;
    let l3 = l2 * l;
    let l4 = l2 * l2;
    [
        [1.0; 9],
        [0.0, l, 0.0, -l, 0.0, l, -l, -l, l],
        [0.0, 0.0, l, 0.0, -l, l, l, -l, -l],
        [
            -4.0 * l2,
            -l2,
            -l2,
            -l2,
            -l2,
            2.0 * l2,
            2.0 * l2,
            2.0 * l2,
            2.0 * l2,
        ],
        [0.0, l2, -l2, l2, -l2, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, l2, -l2, l2, -l2],
        [0.0, -2.0 * l3, 0.0, 2.0 * l3, 0.0, l3, -l3, -l3, l3],
        [0.0, 0.0, -2.0 * l3, 0.0, 2.0 * l3, l3, l3, -l3, -l3],
        [
            4.0 * l4,
            -2.0 * l4,
            -2.0 * l4,
            -2.0 * l4,
            -2.0 * l4,
            l4,
            l4,
            l4,
            l4,
        ],
    ]
}

/// LU with partial pivoting.
fn invert(a: &Matrix9) -> Result<Matrix9> {
    let m = SMatrix::<f64, Q, Q>::from_fn(|r, c| a[r][c]);
    let inv = m
        .lu()
        .try_inverse()
        .ok_or_else(|| LabError::Domain("moment matrix is singular".into()))?;
    let mut out = [[0.0; Q]; Q];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = inv[(r, c)];
        }
    }
    Ok(out)
}

pub(crate) fn mat_vec(a: &Matrix9, x: &[f64; Q]) -> [f64; Q] {
    let mut y = [0.0; Q];
    for (yr, row) in y.iter_mut().zip(a) {
        *yr = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    y
}

pub(crate) fn mat_mul(a: &Matrix9, b: &Matrix9) -> Matrix9 {
    let mut c = [[0.0; Q]; Q];
    for r in 0..Q {
        for k in 0..Q {
            let ark = a[r][k];
            if ark == 0.0 {
                continue;
            }
            for col in 0..Q {
                c[r][col] += ark * b[k][col];
            }
        }
    }
    c
}

/// `(rho, 0, 0, alpha lambda^2 rho, 0, 0, 0, 0, beta lambda^4 rho)`.
pub fn equilibrium_moments(rho: f64, p: &SchemeParams) -> MomentSet {
    let mut m = [0.0; Q];
    let coef = equilibrium_coefficients(p);
    for (mk, ck) in m.iter_mut().zip(coef) {
        *mk = ck * rho;
    }
    MomentSet(m)
}

pub(crate) fn equilibrium_coefficients(p: &SchemeParams) -> [f64; Q] {
    let l2 = p.lambda * p.lambda;
    [
        1.0,
        0.0,
        0.0,
        p.alpha * l2,
        0.0,
        0.0,
        0.0,
        0.0,
        p.beta * l2 * l2,
    ]
}

/// `m_k* = m_k + s_k (m_k^eq(rho) - m_k)` for k >= 1; rho is untouched.
pub fn relax_moments(m: &MomentSet, p: &SchemeParams) -> MomentSet {
    let eq = equilibrium_moments(m.rho(), p);
    let mut out = m.0;
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        *o += p.s[k - 1] * (eq.0[k] - m.0[k]);
    }
    MomentSet(out)
}

/// Collision of one scheme instance, kept both in moment space and as the
/// fused population-space matrix `M^-1 R M`.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    params: SchemeParams,
    moments: MomentMatrix,
    relaxation: Matrix9,
    fused: Matrix9,
}

impl CollisionOperator {
    pub fn new(params: &SchemeParams) -> Result<Self> {
        params.validate()?;
        let moments = MomentMatrix::new(params.lambda)?;
        let relaxation = relaxation_matrix(params);
        let fused = mat_mul(moments.inverse(), &mat_mul(&relaxation, moments.forward()));
        Ok(Self {
            params: *params,
            moments,
            relaxation,
            fused,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn moment_matrix(&self) -> &MomentMatrix {
        &self.moments
    }

    /// Moment-space relaxation matrix R: identity row for rho, and
    /// `(1 - s_k) m_k + s_k E_k rho` for the other rows.
    pub fn relaxation_matrix(&self) -> &Matrix9 {
        &self.relaxation
    }

    pub fn fused_matrix(&self) -> &Matrix9 {
        &self.fused
    }

    /// Moments, relax, back to populations.
    pub fn collide_via_moments(&self, f: &[f64; Q]) -> [f64; Q] {
        let m = self.moments.moments_from_populations(f);
        let relaxed = relax_moments(&m, &self.params);
        self.moments.populations_from_moments(&relaxed)
    }

    pub fn collide_fused(&self, f: &[f64; Q]) -> [f64; Q] {
        mat_vec(&self.fused, f)
    }
}

pub(crate) fn relaxation_matrix(p: &SchemeParams) -> Matrix9 {
    let eq = equilibrium_coefficients(p);
    let mut r = [[0.0; Q]; Q];
    r[0][0] = 1.0;
    for k in 1..Q {
        let s = p.s[k - 1];
        r[k][k] = 1.0 - s;
        r[k][0] = s * eq[k];
    }
    r
}
