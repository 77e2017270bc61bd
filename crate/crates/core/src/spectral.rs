//! Fourier analysis of the lattice scheme and closed-form dispersion of the
//! heat and damped acoustic limit models.
//!
//! A plane wave `m(x) = m_hat exp(i k.x)` is mapped by one lattice step to
//! `G(k) m_hat exp(i k.x)` with
//! `G(k) = M diag_j(exp(-i k.v_j dt)) M^-1 R`, where `R` is the moment-space
//! relaxation. Eigenvalues `mu` of `G` give rates `gamma = -log(mu) / dt`
//! under the convention `exp(-gamma t + i k.x)`.

use nalgebra::{linalg::Schur, SMatrix};
use num_complex::Complex64;

use crate::error::{param, LabError, Result};
use crate::lattice::{
    moments::{relaxation_matrix, POWERS},
    MomentMatrix, SchemeParams, Q, VELOCITIES,
};
use crate::scaling::diffusivity;

pub type CMatrix9 = [[Complex64; Q]; Q];

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    pub kx: f64,
    pub ky: f64,
}

impl WaveVector {
    pub fn new(kx: f64, ky: f64) -> Self {
        Self { kx, ky }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.kx * self.kx + self.ky * self.ky
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn dot(&self, x: f64, y: f64) -> f64 {
        self.kx * x + self.ky * y
    }

    fn require_nonzero(&self) -> Result<()> {
        if self.norm_sqr() == 0.0 {
            return Err(param("k", "wave vector must be non-zero"));
        }
        Ok(())
    }
}

fn cmat_mul(a: &CMatrix9, b: &CMatrix9) -> CMatrix9 {
    let mut c = [[Complex64::new(0.0, 0.0); Q]; Q];
    for r in 0..Q {
        for k in 0..Q {
            let ark = a[r][k];
            if ark == Complex64::new(0.0, 0.0) {
                continue;
            }
            for col in 0..Q {
                c[r][col] += ark * b[k][col];
            }
        }
    }
    c
}

fn to_complex(a: &[[f64; Q]; Q]) -> CMatrix9 {
    let mut c = [[Complex64::new(0.0, 0.0); Q]; Q];
    for (cr, ar) in c.iter_mut().zip(a) {
        for (cv, av) in cr.iter_mut().zip(ar) {
            *cv = Complex64::new(*av, 0.0);
        }
    }
    c
}

/// `M diag(d) M^-1`.
fn conjugate_diagonal(mm: &MomentMatrix, d: &[Complex64; Q]) -> CMatrix9 {
    let fwd = mm.forward();
    let inv = mm.inverse();
    let mut out = [[Complex64::new(0.0, 0.0); Q]; Q];
    for r in 0..Q {
        for c in 0..Q {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..Q {
                acc += fwd[r][j] * d[j] * inv[j][c];
            }
            out[r][c] = acc;
        }
    }
    out
}

/// Fourier symbol of the first-order transport operator,
/// `Lambda(k) = -M diag(i k.v_j) M^-1`.
pub fn velocity_operator_matrix(k: WaveVector, lambda: f64) -> Result<CMatrix9> {
    let mm = MomentMatrix::new(lambda)?;
    let mut d = [Complex64::new(0.0, 0.0); Q];
    for (dj, e) in d.iter_mut().zip(&VELOCITIES) {
        *dj = -I * (lambda * k.dot(e[0] as f64, e[1] as f64));
    }
    Ok(conjugate_diagonal(&mm, &d))
}

/// Exact one-step evolution operator of the lattice scheme in moment space.
pub fn amplification_matrix(k: WaveVector, p: &SchemeParams, dt: f64) -> Result<CMatrix9> {
    if !(dt > 0.0) {
        return Err(param("dt", format!("must be positive, got {dt}")));
    }
    p.validate()?;
    let mm = MomentMatrix::new(p.lambda)?;
    let mut d = [Complex64::new(0.0, 0.0); Q];
    for (dj, e) in d.iter_mut().zip(&VELOCITIES) {
        let phase = -p.lambda * dt * k.dot(e[0] as f64, e[1] as f64);
        *dj = Complex64::from_polar(1.0, phase);
    }
    let relax = to_complex(&relaxation_matrix(p));
    if d.iter().all(|z| *z == Complex64::new(1.0, 0.0)) {
        // streaming is the identity; skip the rounding of M M^-1
        return Ok(relax);
    }
    let transport = conjugate_diagonal(&mm, &d);
    Ok(cmat_mul(&transport, &relax))
}

/// Eigenvalues of a 9x9 complex matrix (complex Schur form).
pub fn eigenvalues(a: &CMatrix9) -> Result<[Complex64; Q]> {
    let zero = Complex64::new(0.0, 0.0);
    let lower = (0..Q).all(|r| (r + 1..Q).all(|c| a[r][c] == zero));
    let upper = (0..Q).all(|r| (0..r).all(|c| a[r][c] == zero));
    if lower || upper {
        return Ok(std::array::from_fn(|i| a[i][i]));
    }
    let m = SMatrix::<Complex64, Q, Q>::from_fn(|r, c| a[r][c]);
    let schur = Schur::try_new(m, 1e-15, 100_000).ok_or(LabError::Eigen)?;
    let ev = schur.eigenvalues().ok_or(LabError::Eigen)?;
    let mut out = [Complex64::new(0.0, 0.0); Q];
    for (o, v) in out.iter_mut().zip(ev.iter()) {
        *o = *v;
    }
    Ok(out)
}

/// One decay/oscillation rate of the lattice scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbmRate {
    pub gamma: Complex64,
    pub eigenvalue: Complex64,
    /// `|Im(gamma) dt|` lies within 1e-6 of pi, where the principal log
    /// branch is ambiguous.
    pub branch_ambiguous: bool,
}

/// Rates `-log(mu)/dt` of all nine eigenvalues, ordered by `|Re gamma|`.
pub fn lbm_spectrum(k: WaveVector, p: &SchemeParams, dt: f64) -> Result<Vec<LbmRate>> {
    let mut g = amplification_matrix(k, p, dt)?;
    // similarity D^-1 G D with D = diag(lambda^POWERS) makes the entries
    // O(1) when lambda is large
    for (r, row) in g.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v *= p.lambda.powi(POWERS[c] - POWERS[r]);
        }
    }
    let eig = eigenvalues(&g)?;
    let mut rates = Vec::with_capacity(Q);
    for (index, mu) in eig.into_iter().enumerate() {
        if mu.norm() < 1e-13 {
            return Err(LabError::Branch { index });
        }
        let gamma = -mu.ln() / dt;
        rates.push(LbmRate {
            gamma,
            eigenvalue: mu,
            branch_ambiguous: (std::f64::consts::PI - (gamma.im * dt).abs()).abs() < 1e-6,
        });
    }
    rates.sort_by(|a, b| {
        a.gamma
            .re
            .abs()
            .total_cmp(&b.gamma.re.abs())
            .then(a.gamma.im.total_cmp(&b.gamma.im))
    });
    Ok(rates)
}

/// Roots of `gamma^2 - g gamma + |k|^2 c0^2 = 0`, ordered as
/// `g/2 - i omega, g/2 + i omega` (or the smaller real root first).
pub fn acoustic_roots(k: WaveVector, c0: f64, g: f64) -> Result<[Complex64; 2]> {
    k.require_nonzero()?;
    if !(c0 > 0.0) {
        return Err(param("c0", format!("must be positive, got {c0}")));
    }
    if !(g >= 0.0) {
        return Err(param("g", format!("must be non-negative, got {g}")));
    }
    let product = k.norm_sqr() * c0 * c0;
    let disc = g * g / 4.0 - product;
    if disc < 0.0 {
        let omega = (-disc).sqrt();
        Ok([
            Complex64::new(g / 2.0, -omega),
            Complex64::new(g / 2.0, omega),
        ])
    } else {
        let big = g / 2.0 + disc.sqrt();
        // Vieta for the small root avoids cancellation
        Ok([Complex64::new(product / big, 0.0), Complex64::new(big, 0.0)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeClass {
    Propagative,
    Critical,
    NonPropagative,
}

impl ModeClass {
    pub fn name(self) -> &'static str {
        match self {
            ModeClass::Propagative => "propagative",
            ModeClass::Critical => "critical",
            ModeClass::NonPropagative => "non-propagative",
        }
    }
}

/// Classifies a damping rate against the threshold `2 |k| c0`.
pub fn classify_against(g: f64, threshold: f64) -> ModeClass {
    if (g - threshold).abs() <= 1e-12 * threshold.abs().max(g.abs()) {
        ModeClass::Critical
    } else if g < threshold {
        ModeClass::Propagative
    } else {
        ModeClass::NonPropagative
    }
}

pub fn classify_mode(k: WaveVector, c0: f64, g: f64) -> Result<ModeClass> {
    k.require_nonzero()?;
    Ok(classify_against(g, 2.0 * k.norm() * c0))
}

/// Sign choice in `exp(i (k.x +- omega t))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Real parts of one damped acoustic eigenmode,
/// `rho = rho0 exp(-g t/2) exp(i (k.x +- omega t))`,
/// `J = -i gamma k/|k|^2 rho` with `gamma = g/2 -+ i omega`.
#[allow(clippy::too_many_arguments)]
pub fn exact_mode_solution(
    x: f64,
    y: f64,
    t: f64,
    k: WaveVector,
    c0: f64,
    g: f64,
    rho0: Complex64,
    branch: Branch,
) -> Result<(f64, f64, f64)> {
    if classify_mode(k, c0, g)? != ModeClass::Propagative {
        return Err(LabError::Domain(format!(
            "mode with g = {g}, 2|k|c0 = {} is not propagative",
            2.0 * k.norm() * c0
        )));
    }
    let roots = acoustic_roots(k, c0, g)?;
    let gamma = match branch {
        Branch::Plus => roots[0],
        Branch::Minus => roots[1],
    };
    let (rho, jx, jy) = complex_mode(x, y, t, k, gamma, rho0);
    Ok((rho.re, jx.re, jy.re))
}

fn complex_mode(
    x: f64,
    y: f64,
    t: f64,
    k: WaveVector,
    gamma: Complex64,
    rho0: Complex64,
) -> (Complex64, Complex64, Complex64) {
    let rho = rho0 * (-gamma * t + I * k.dot(x, y)).exp();
    let flux = -I * gamma * rho / k.norm_sqr();
    (rho, flux * k.kx, flux * k.ky)
}

/// Damped acoustic solution from `rho(x, 0) = cos(k.x)`, `J(x, 0) = 0`,
/// valid in every regime:
/// `rho = h(t) cos(k.x)`, `J = -h'(t) k sin(k.x) / |k|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandingWave {
    pub k: WaveVector,
    pub c0: f64,
    pub g: f64,
    roots: [Complex64; 2],
}

impl StandingWave {
    pub fn new(k: WaveVector, c0: f64, g: f64) -> Result<Self> {
        Ok(Self {
            k,
            c0,
            g,
            roots: acoustic_roots(k, c0, g)?,
        })
    }

    pub fn class(&self) -> ModeClass {
        classify_against(self.g, 2.0 * self.k.norm() * self.c0)
    }

    /// Temporal factor `h(t)` and its derivative.
    pub fn amplitude(&self, t: f64) -> (f64, f64) {
        let [g1, g2] = self.roots;
        let diff = g2 - g1;
        if diff.norm() <= 1e-8 * (1.0 + self.g) {
            let half = self.g / 2.0;
            let e = (-half * t).exp();
            return ((1.0 + half * t) * e, -half * half * t * e);
        }
        let e1 = (-g1 * t).exp();
        let e2 = (-g2 * t).exp();
        let h = (g2 * e1 - g1 * e2) / diff;
        let dh = g1 * g2 * (e2 - e1) / diff;
        (h.re, dh.re)
    }

    pub fn density(&self, x: f64, y: f64, t: f64) -> f64 {
        self.amplitude(t).0 * self.k.dot(x, y).cos()
    }

    pub fn momentum(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let dh = self.amplitude(t).1;
        let s = -dh * self.k.dot(x, y).sin() / self.k.norm_sqr();
        (s * self.k.kx, s * self.k.ky)
    }
}

/// `kappa |k|^2`.
pub fn heat_rate(k: WaveVector, kappa: f64) -> f64 {
    kappa * k.norm_sqr()
}

/// Sound speed and damping of the acoustic limit:
/// `c0^2 = lambda^2 (4 + alpha)/6`, `g = c0^2 / kappa`.
pub fn c0_and_g(alpha: f64, lambda: f64, kappa: f64) -> Result<(f64, f64)> {
    if !(alpha > -4.0 && alpha < 2.0) {
        return Err(param("alpha", format!("must lie in (-4, 2), got {alpha}")));
    }
    if !(lambda > 0.0) || !(kappa > 0.0) {
        return Err(param("lambda/kappa", "must be positive"));
    }
    let c0_sq = lambda * lambda * (4.0 + alpha) / 6.0;
    Ok((c0_sq.sqrt(), c0_sq / kappa))
}

/// Lattice rates for one wave vector next to both model predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSpectrum {
    pub k: WaveVector,
    pub lbm_rates: Vec<LbmRate>,
    pub heat_rate: f64,
    pub acoustic_roots: [Complex64; 2],
    pub mode_class: ModeClass,
    pub kappa: f64,
    pub c0: f64,
    pub g: f64,
}

/// Evaluates the lattice spectrum at time step `dt` and the model rates with
/// the diffusivity the scheme realizes on the mesh `dx = lambda dt`.
pub fn dispersion_spectrum(k: WaveVector, p: &SchemeParams, dt: f64) -> Result<DispersionSpectrum> {
    let kappa = diffusivity(p.s_j(), p.lambda, p.lambda * dt, p.alpha)?;
    let (c0, g) = c0_and_g(p.alpha, p.lambda, kappa)?;
    Ok(DispersionSpectrum {
        k,
        lbm_rates: lbm_spectrum(k, p, dt)?,
        heat_rate: heat_rate(k, kappa),
        acoustic_roots: acoustic_roots(k, c0, g)?,
        mode_class: classify_mode(k, c0, g)?,
        kappa,
        c0,
        g,
    })
}

/// For each target, the index of the nearest not-yet-used rate.
pub fn match_rates(rates: &[LbmRate], targets: &[Complex64]) -> Vec<usize> {
    let mut used = vec![false; rates.len()];
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        let best = rates
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1.gamma - t).norm().total_cmp(&(b.1.gamma - t).norm()))
            .map(|(i, _)| i)
            .expect("more targets than rates");
        used[best] = true;
        out.push(best);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::RelaxationRates;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn velocity_operator_at_zero_k() {
        let l = velocity_operator_matrix(WaveVector::new(0.0, 0.0), 1.3).unwrap();
        assert!(l.iter().flatten().all(|v| v.norm() < 1e-14));
    }

    #[test]
    fn velocity_operator_entries() {
        let kx = 0.7;
        let l = velocity_operator_matrix(WaveVector::new(kx, 0.3), 1.0).unwrap();
        assert!((l[1][0] - c(0.0, -2.0 / 3.0 * kx)).norm() < 1e-12);
        assert!((l[0][1] - c(0.0, -kx)).norm() < 1e-12);
    }

    #[test]
    fn amplification_at_zero_k() {
        let k0 = WaveVector::new(0.0, 0.0);
        let unit = RelaxationRates {
            s_j: 1.0,
            s_e: 1.0,
            s_x: 1.0,
            s_q: 1.0,
            s_eps: 1.0,
        };
        let p = SchemeParams::new(-2.0, 1.0, unit, 1.0).unwrap();
        let g = amplification_matrix(k0, &p, 0.1).unwrap();
        let g2 = cmat_mul(&g, &g);
        for r in 0..Q {
            for col in 0..Q {
                assert!((g2[r][col] - g[r][col]).norm() < 1e-12);
            }
        }
        // the projection has zero eigenvalues, so no rates exist
        assert!(matches!(
            lbm_spectrum(k0, &p, 0.1),
            Err(LabError::Branch { .. })
        ));

        let p = SchemeParams::standard(0.4, 1.0).unwrap();
        let mut ev: Vec<f64> = eigenvalues(&amplification_matrix(k0, &p, 0.1).unwrap())
            .unwrap()
            .iter()
            .map(|v| {
                assert!(v.im.abs() < 1e-12);
                v.re
            })
            .collect();
        ev.sort_by(f64::total_cmp);
        let mut expect = vec![1.0];
        expect.extend(p.s.iter().map(|s| 1.0 - s));
        expect.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12, "{ev:?} vs {expect:?}");
        }
        let rates = lbm_spectrum(k0, &p, 0.1).unwrap();
        assert!(rates[0].gamma.norm() < 1e-12);
    }

    #[test]
    fn acoustic_root_cases() {
        let k = WaveVector::new(3.0, 4.0);
        let r = acoustic_roots(k, 0.5, 0.0).unwrap();
        assert!((r[0] - c(0.0, -2.5)).norm() < 1e-15);
        assert!((r[1] - c(0.0, 2.5)).norm() < 1e-15);
        let r = acoustic_roots(k, 0.5, 5.0).unwrap();
        assert!((r[0] - c(2.5, 0.0)).norm() < 1e-7 && (r[1] - c(2.5, 0.0)).norm() < 1e-7);
        // 2|k|c0 = 5.924 < g = 6: two real roots
        let c0 = 1.0 / 3f64.sqrt();
        let kn = 5.924 / (2.0 * c0);
        let k = WaveVector::new(kn / 2f64.sqrt(), kn / 2f64.sqrt());
        let r = acoustic_roots(k, c0, 6.0).unwrap();
        assert!(r.iter().all(|z| z.im == 0.0 && z.re > 0.0));
        assert!(acoustic_roots(WaveVector::new(0.0, 0.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn classification_data_points() {
        let c0 = 1.0 / 3f64.sqrt();
        let kn = 5.924 / (2.0 * c0);
        let k = WaveVector::new(kn, 0.0);
        assert_eq!(
            classify_mode(k, c0, 6.0).unwrap(),
            ModeClass::NonPropagative
        );
        assert_eq!(
            classify_mode(k, c0, 5.6470).unwrap(),
            ModeClass::Propagative
        );
        assert_eq!(classify_mode(k, c0, 0.0).unwrap(), ModeClass::Propagative);
        assert_eq!(classify_against(6.0, 5.924), ModeClass::NonPropagative);
        assert_eq!(classify_against(5.924, 5.924), ModeClass::Critical);
    }

    #[test]
    fn sound_speed_and_damping() {
        let (c0, g) = c0_and_g(-2.0, 1.0, 1.0 / 18.0).unwrap();
        assert!((c0 - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g - 6.0).abs() < 1e-12);
        let (_, g) = c0_and_g(-2.0, 1.0, 17.0 / 288.0).unwrap();
        assert!((g - 96.0 / 17.0).abs() < 1e-12);
        assert!((g - 5.6470).abs() < 1e-4);
        assert!(c0_and_g(-4.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn heat_rate_values() {
        assert_eq!(heat_rate(WaveVector::new(0.0, 0.0), 0.3), 0.0);
        assert!((heat_rate(WaveVector::new(1.0, 1.0), 1.0 / 18.0) - 1.0 / 9.0).abs() < 1e-15);
        let a = heat_rate(WaveVector::new(0.3, 0.4), 0.2);
        let b = heat_rate(WaveVector::new(0.6, 0.8), 0.2);
        assert!((b / a - 4.0).abs() < 1e-14);
    }

    #[test]
    fn exact_mode_initial_and_undamped() {
        let k = WaveVector::new(1.0, 2.0);
        let (rho, _, _) =
            exact_mode_solution(0.3, -0.2, 0.0, k, 1.0, 0.5, c(1.0, 0.0), Branch::Plus).unwrap();
        assert!((rho - (0.3f64 - 0.4).cos()).abs() < 1e-15);

        // g = 0: the Minus branch travels along +k at speed c0
        let c0 = 0.8;
        let kn = k.norm();
        let t = 0.37;
        let shift = c0 * t / kn;
        let (r1, _, _) = exact_mode_solution(
            0.1 + k.kx * shift,
            0.2 + k.ky * shift,
            t,
            k,
            c0,
            0.0,
            c(1.0, 0.0),
            Branch::Minus,
        )
        .unwrap();
        let (r0, _, _) =
            exact_mode_solution(0.1, 0.2, 0.0, k, c0, 0.0, c(1.0, 0.0), Branch::Minus).unwrap();
        assert!((r1 - r0).abs() < 1e-12);

        assert!(
            exact_mode_solution(0.0, 0.0, 0.0, k, 0.1, 6.0, c(1.0, 0.0), Branch::Plus).is_err()
        );
    }

    #[test]
    fn standing_wave_is_superposition_of_modes() {
        let k = WaveVector::new(3.0, 4.0);
        let (c0, g) = (1.0 / 3f64.sqrt(), 96.0 / 17.0);
        let sw = StandingWave::new(k, c0, g).unwrap();
        assert_eq!(sw.class(), ModeClass::Propagative);
        let [g1, g2] = acoustic_roots(k, c0, g).unwrap();
        // rho(0) = 1, J(0) = 0 fixes the two complex amplitudes
        let a1 = g2 / (g2 - g1);
        let a2 = -g1 / (g2 - g1);
        for &(x, y, t) in &[(0.1, 0.2, 0.0), (1.0, -0.5, 0.7), (2.0, 0.3, 3.1)] {
            let (r1, jx1, jy1) = exact_mode_solution(x, y, t, k, c0, g, a1, Branch::Plus).unwrap();
            let (r2, jx2, jy2) = exact_mode_solution(x, y, t, k, c0, g, a2, Branch::Minus).unwrap();
            // the cos(k.x) standing wave is the average of the e^{ik.x} and
            // e^{-ik.x} solutions, so take real parts of the sum
            let rho = sw.density(x, y, t);
            let (jx, jy) = sw.momentum(x, y, t);
            assert!((r1 + r2 - rho).abs() < 1e-12, "{t}: {} vs {rho}", r1 + r2);
            assert!((jx1 + jx2 - jx).abs() < 1e-12);
            assert!((jy1 + jy2 - jy).abs() < 1e-12);
        }
    }

    #[test]
    fn standing_wave_regimes_are_continuous() {
        let k = WaveVector::new(1.0, 0.0);
        let c0 = 1.0;
        let crit = StandingWave::new(k, c0, 2.0).unwrap();
        let below = StandingWave::new(k, c0, 2.0 - 1e-6).unwrap();
        let above = StandingWave::new(k, c0, 2.0 + 1e-6).unwrap();
        for t in [0.0, 0.5, 2.0] {
            let h = crit.amplitude(t);
            for other in [below.amplitude(t), above.amplitude(t)] {
                assert!((other.0 - h.0).abs() < 1e-5);
                assert!((other.1 - h.1).abs() < 1e-5);
            }
        }
        assert_eq!(crit.amplitude(0.0), (1.0, 0.0));
    }
}
