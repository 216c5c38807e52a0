//! Dobrushin's uniqueness criterion.
//!
//! `ρ_Φ(x)` is the worst-case influence of the spin at `x` on the one-site
//! Gibbs state at the origin. It is computed as an exact supremum by
//! enumerating every boundary pattern on the (truncated) dependence set.
//! Verdicts are one-sided: both criteria are sufficient conditions, so a
//! failed inequality yields `Inconclusive`, never "non-unique".

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interaction::{Interaction, DEFAULT_TAIL_TOL};
use crate::lattice::{ball_offsets, Point};
use crate::numeric::logistic;

/// Cap on the dependence-set enumeration (2^22 boundary patterns).
pub const DEPENDENCE_CAP: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    UniqueGibbs,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoEntry {
    pub site: Point,
    pub rho: f64,
}

/// Combined report for both criteria.
#[derive(Debug, Clone, Serialize)]
pub struct DobrushinReport {
    pub interaction: String,
    pub truncation_radius: u32,
    /// Nonzero influence coefficients.
    pub rho_values: Vec<RhoEntry>,
    /// Sum of enumerated coefficients (without the tail).
    pub rho_sum: f64,
    /// Bound on the neglected kernel mass beyond the truncation radius.
    pub rho_tail_bound: f64,
    pub rho_verdict: Verdict,
    pub var_norm: f64,
    pub var_norm_tail_bound: f64,
    pub var_verdict: Verdict,
}

/// Sites interacting with the origin through shapes of the (truncated)
/// interaction, origin excluded.
fn dependence_sites(phi: &Interaction, radius: u32) -> BTreeSet<Point> {
    let origin = Point::origin(phi.dim());
    let mut out = BTreeSet::new();
    for (lf, shift) in phi.finite_translates_containing_origin() {
        for &s in lf.shape().sites() {
            let p = s + shift;
            if p != origin {
                out.insert(p);
            }
        }
    }
    if phi.kernel().is_some() {
        for o in ball_offsets(phi.dim(), radius) {
            out.insert(o);
        }
    }
    out
}

/// Exact `ρ_Φ(x)`: the supremum over boundary patterns agreeing off `{x}`
/// of the difference of the origin's conditional probabilities.
pub fn rho(phi: &Interaction, x: &Point, radius: u32) -> Result<f64> {
    let origin = Point::origin(phi.dim());
    if *x == origin {
        return Err(Error::Precondition("rho is defined for x != 0".into()));
    }
    if x.dim() != phi.dim() {
        return Err(Error::DimensionMismatch(phi.dim(), x.dim()));
    }
    let mut deps = dependence_sites(phi, radius);
    if !deps.contains(x) {
        return Ok(0.0); // the spin at x never talks to the origin
    }
    deps.remove(x);
    let context: Vec<Point> = deps.into_iter().collect();
    if context.len() > DEPENDENCE_CAP {
        return Err(Error::DependenceOverCap {
            got: context.len(),
            cap: DEPENDENCE_CAP,
        });
    }
    let position = |p: &Point| -> Option<usize> { context.binary_search(p).ok() };

    // per table term: origin's bit, and where every other site reads from
    enum Source {
        Context(usize),
        X,
    }
    struct Term<'a> {
        table: &'a [f64],
        origin_bit: usize,
        gather: Vec<(usize, Source)>, // (shape bit, source)
    }
    let mut terms = Vec::new();
    for (lf, shift) in phi.finite_translates_containing_origin() {
        let mut origin_bit = None;
        let mut gather = Vec::new();
        for (k, &s) in lf.shape().sites().iter().enumerate() {
            let p = s + shift;
            if p == origin {
                origin_bit = Some(k);
            } else if p == *x {
                gather.push((k, Source::X));
            } else {
                let ctx = position(&p).expect("dependence set covers all shape sites");
                gather.push((k, Source::Context(ctx)));
            }
        }
        terms.push(Term {
            table: lf.table(),
            origin_bit: origin_bit.expect("translate contains the origin"),
            gather,
        });
    }
    // kernel couplings to the origin: ΔH -= 2 J(y) σ_y
    let mut kernel_ctx: Vec<(usize, f64)> = Vec::new();
    let mut kernel_x = 0.0f64;
    if let Some(kernel) = phi.kernel() {
        for o in ball_offsets(phi.dim(), radius) {
            let j = kernel.coupling(&o);
            if o == *x {
                kernel_x = j;
            } else if let Some(i) = position(&o) {
                kernel_ctx.push((i, j));
            }
        }
    }

    let patterns = 1u64 << context.len();
    let delta_h = |ctx_bits: u64, x_up: bool| -> f64 {
        let mut dh = 0.0;
        for t in &terms {
            let mut idx = 0usize;
            for (k, src) in &t.gather {
                let up = match src {
                    Source::Context(i) => (ctx_bits >> i) & 1 == 1,
                    Source::X => x_up,
                };
                if up {
                    idx |= 1 << k;
                }
            }
            dh += t.table[idx | (1 << t.origin_bit)] - t.table[idx];
        }
        let mut field = 0.0;
        for &(i, j) in &kernel_ctx {
            let s = if (ctx_bits >> i) & 1 == 1 { 1.0 } else { -1.0 };
            field += j * s;
        }
        field += kernel_x * if x_up { 1.0 } else { -1.0 };
        dh - 2.0 * field
    };

    let sup = (0..patterns)
        .into_par_iter()
        .map(|ctx| {
            let p_up = logistic(-delta_h(ctx, true));
            let p_down = logistic(-delta_h(ctx, false));
            (p_up - p_down).abs()
        })
        .reduce(|| 0.0, f64::max);
    Ok(sup)
}

/// `Σ_x ρ_Φ(x)` over the truncated dependence set, with the kernel tail
/// folded in as `2 Σ_{‖x‖>R} sup|Φ_{0,x}|`.
pub fn dobrushin_sum(phi: &Interaction, radius: u32) -> Result<(Vec<RhoEntry>, f64, f64, Verdict)> {
    let mut entries = Vec::new();
    let mut sum = 0.0;
    for x in dependence_sites(phi, radius) {
        let r = rho(phi, &x, radius)?;
        if r > 0.0 {
            entries.push(RhoEntry { site: x, rho: r });
            sum += r;
        }
    }
    let tail = match phi.kernel() {
        Some(kernel) => {
            2.0 * crate::interaction::kernel_abs_tail_pub(kernel, phi.dim(), radius, DEFAULT_TAIL_TOL)?
        }
        None => 0.0,
    };
    let verdict = if sum + tail < 1.0 {
        Verdict::UniqueGibbs
    } else {
        Verdict::Inconclusive
    };
    Ok((entries, sum, tail, verdict))
}

/// Variation-norm sufficient condition: `‖Φ‖_var < 2` (upper interval).
pub fn var_criterion(phi: &Interaction, tail_tol: f64) -> Result<(f64, f64, Verdict)> {
    let nv = phi.norm_var(tail_tol)?;
    let verdict = if nv.upper() < 2.0 {
        Verdict::UniqueGibbs
    } else {
        Verdict::Inconclusive
    };
    Ok((nv.value, nv.tail_bound, verdict))
}

/// Runs both criteria and assembles the full report.
pub fn report(phi: &Interaction, radius: u32, tail_tol: f64) -> Result<DobrushinReport> {
    let (rho_values, rho_sum, rho_tail_bound, rho_verdict) = dobrushin_sum(phi, radius)?;
    let (var_norm, var_norm_tail_bound, var_verdict) = var_criterion(phi, tail_tol)?;
    Ok(DobrushinReport {
        interaction: phi.label().to_string(),
        truncation_radius: radius,
        rho_values,
        rho_sum,
        rho_tail_bound,
        rho_verdict,
        var_norm,
        var_norm_tail_bound,
        var_verdict,
    })
}
