//! The four interaction norms with rigorous kernel tail intervals.
//!
//! Finite parts are exact sums over anchored shapes; a shape of `k` sites
//! has exactly `k` translates containing the origin, all with the same
//! supremum, diameter and cardinality, so each anchored term enters with
//! multiplicity `k` (or 1 for the `|Λ|^{-1}`-weighted norm).
//!
//! Kernel parts are summed shell by shell in the `‖·‖_∞` radius. Shells are
//! exact closed forms for `‖·‖_∞` kernels and exact point sums (up to a
//! crossover shell) for Euclidean kernels; past the last computed shell an
//! integral-comparison remainder is reported as the tail bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Rectangle;

use super::{Interaction, KernelNorm, TwoBodyKernel};

/// Default relative tolerance for kernel tail sums.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// A sum together with a rigorous bound on its neglected remainder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormValue {
    pub value: f64,
    pub tail_bound: f64,
}

impl NormValue {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            tail_bound: 0.0,
        }
    }

    /// Upper end of the interval `[value, value + tail_bound]`.
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// All four norms of an interaction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Norms {
    pub abs: NormValue,
    pub decay: NormValue,
    pub decay_prime: NormValue,
    pub var: NormValue,
}

/// `‖Φ‖ = Σ_{0∈Λ} sup |Φ_Λ|`.
pub fn norm_abs(phi: &Interaction, tail_tol: f64) -> Result<NormValue> {
    let finite: f64 = phi
        .local_functions()
        .map(|lf| lf.shape().len() as f64 * lf.sup_abs())
        .sum();
    let kernel = kernel_series(phi, 0, 1.0, tail_tol)?;
    Ok(combine(finite, kernel))
}

/// `⦀Φ⦀ = Σ_{0∈Λ} (diam(Λ)+1)^d sup |Φ_Λ|`.
pub fn norm_decay(phi: &Interaction, tail_tol: f64) -> Result<NormValue> {
    let d = phi.dim() as u32;
    let finite: f64 = phi
        .local_functions()
        .map(|lf| {
            lf.shape().len() as f64
                * ((lf.shape().diameter() + 1) as f64).powi(d as i32)
                * lf.sup_abs()
        })
        .sum();
    let kernel = kernel_series(phi, d, 1.0, tail_tol)?;
    Ok(combine(finite, kernel))
}

/// `⦀Φ⦀' = Σ_{0∈Λ} |Λ|^{-1} (diam(Λ)+1)^d sup |Φ_Λ|`.
pub fn norm_decay_prime(phi: &Interaction, tail_tol: f64) -> Result<NormValue> {
    let d = phi.dim() as u32;
    let finite: f64 = phi
        .local_functions()
        .map(|lf| ((lf.shape().diameter() + 1) as f64).powi(d as i32) * lf.sup_abs())
        .sum();
    let kernel = kernel_series(phi, d, 0.5, tail_tol)?;
    Ok(combine(finite, kernel))
}

/// `‖Φ‖_var = Σ_{0∈Λ} (|Λ|-1) var_Λ Φ`.
pub fn norm_var(phi: &Interaction, tail_tol: f64) -> Result<NormValue> {
    let finite: f64 = phi
        .local_functions()
        .map(|lf| {
            let k = lf.shape().len() as f64;
            k * (k - 1.0) * lf.variation()
        })
        .sum();
    // pair shapes: (|Λ|-1) = 1 and var = 2|J|, so twice the absolute series
    let kernel = kernel_series(phi, 0, 2.0, tail_tol)?;
    Ok(combine(finite, kernel))
}

fn combine(finite: f64, kernel: NormValue) -> NormValue {
    NormValue {
        value: finite + kernel.value,
        tail_bound: kernel.tail_bound,
    }
}

/// Upper bound on `Σ_{‖x‖_∞ > radius} |J(x)|` for a kernel in dimension `d`.
pub(crate) fn kernel_abs_tail(
    kernel: &TwoBodyKernel,
    dim: usize,
    radius: u32,
    tail_tol: f64,
) -> Result<f64> {
    let nv = shell_series(kernel, dim, 0, 1.0, radius + 1, tail_tol)?;
    Ok(nv.upper())
}

fn kernel_series(phi: &Interaction, weight_exp: u32, coeff: f64, tail_tol: f64) -> Result<NormValue> {
    match phi.kernel() {
        None => Ok(NormValue::exact(0.0)),
        Some(k) => shell_series(k, phi.dim(), weight_exp, coeff, 1, tail_tol),
    }
}

/// Number of lattice points with `‖x‖_∞ = n` in dimension `d`.
fn shell_count(d: usize, n: u32) -> f64 {
    let n = n as f64;
    (2.0 * n + 1.0).powi(d as i32) - (2.0 * n - 1.0).powi(d as i32)
}

/// Largest shell whose Euclidean point sum is evaluated exactly.
fn euclid_exact_limit(d: usize) -> u32 {
    match d {
        1 => 4096,
        2 => 128,
        3 => 48,
        _ => 24,
    }
}

/// `coeff · Σ_{‖x‖_∞ >= from} (‖x‖_∞+1)^a |J(x)|`, split into a computed
/// partial sum and a rigorous remainder bound.
///
/// Converges only for `s > d + a`; the remainder for shells beyond `N` uses
/// `shell_count(n) <= 2d·3^{d-1} n^{d-1}` and `(n+1)^a <= (2n)^a` together
/// with the integral comparison `Σ_{n>N} n^{-p} <= N^{1-p}/(p-1)`.
fn shell_series(
    kernel: &TwoBodyKernel,
    d: usize,
    weight_exp: u32,
    coeff: f64,
    from: u32,
    tail_tol: f64,
) -> Result<NormValue> {
    let s = kernel.exponent();
    let a = weight_exp as f64;
    let min = d as f64 + a;
    if s <= min {
        return Err(Error::KernelDivergent {
            s,
            min,
            norm: if weight_exp == 0 { "absolute" } else { "decay" },
        });
    }
    let c_abs = kernel.amplitude().abs();
    if c_abs == 0.0 {
        return Ok(NormValue::exact(0.0));
    }
    let p = s - (d as f64 - 1.0) - a;
    let remainder_at = |n_last: u32| -> f64 {
        // bound on coeff * Σ_{n > n_last} shell_count(n) (n+1)^a |c| n^{-s}
        let k = coeff * c_abs * 2.0 * d as f64 * 3f64.powi(d as i32 - 1) * 2f64.powf(a);
        k * (n_last as f64).powf(1.0 - p) / (p - 1.0)
    };

    let exact_limit = match kernel.norm() {
        KernelNorm::LInf => u32::MAX,
        KernelNorm::Euclid => euclid_exact_limit(d),
    };
    let mut partial = 0.0;
    let mut n = from;
    const MAX_SHELLS: u32 = 2_000_000;
    loop {
        if n > exact_limit || n - from >= MAX_SHELLS {
            // stop refining; everything further is covered by the remainder
            return Ok(NormValue {
                value: partial,
                tail_bound: remainder_at(n - 1),
            });
        }
        let weight = ((n + 1) as f64).powf(a);
        let term = match kernel.norm() {
            KernelNorm::LInf => {
                coeff * shell_count(d, n) * weight * c_abs * (n as f64).powf(-s)
            }
            KernelNorm::Euclid => {
                let shell_sum: f64 = euclid_shell_sum(d, n, s);
                coeff * weight * c_abs * shell_sum
            }
        };
        partial += term;
        let remainder = remainder_at(n);
        if remainder <= tail_tol * partial.max(f64::MIN_POSITIVE) {
            return Ok(NormValue {
                value: partial,
                tail_bound: remainder,
            });
        }
        n += 1;
    }
}

/// `Σ_{‖x‖_∞ = n} ‖x‖_2^{-s}` by explicit point enumeration.
fn euclid_shell_sum(d: usize, n: u32, s: f64) -> f64 {
    Rectangle::centered_box(d, n as i32)
        .sites()
        .into_iter()
        .filter(|p| p.norm_inf() == n as u64)
        .map(|p| p.norm_euclid().powf(-s))
        .sum()
}
