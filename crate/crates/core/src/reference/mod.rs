//! Finite-difference reference solvers: explicit five-point heat scheme and
//! the staggered leapfrog scheme for damped acoustics.

mod haway;
mod heat;

pub use haway::{
    haway_dt_from_lbm, haway_stable_dt, haway_step, HawaySolver, StaggeredState,
    ACOUSTIC_STEP_RATIO,
};
pub use heat::{heat_fd_stable_dt, heat_fd_step, HeatSolver};

#[inline]
pub(crate) fn wrap_prev(i: usize, n: usize) -> usize {
    if i == 0 {
        n - 1
    } else {
        i - 1
    }
}

#[inline]
pub(crate) fn wrap_next(i: usize, n: usize) -> usize {
    if i + 1 == n {
        0
    } else {
        i + 1
    }
}
