//! Exact finite-volume Gibbs states by full enumeration.
//!
//! Weights live in the log domain with max-shifted normalization, so
//! inverse temperatures up to ~5 on 20-site volumes stay finite.
//! Configurations are indexed as binary counters over the volume's
//! lex-sorted sites (set bit = spin up), which pins the output order.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::{Interaction, DEFAULT_TAIL_TOL};
use crate::lattice::{ball_offsets, Point, SiteSet};
use crate::numeric::{fmt_g17, StreamingLogSumExp};
use crate::spins::{spin_from_bit, Spin, SpinSource, DOWN, UP};

/// Default enumeration cap (2^20 configurations).
pub const DEFAULT_ENUM_CAP: usize = 20;
/// Hard cap behind the explicit override (2^24 stored weights).
pub const HARD_ENUM_CAP: usize = 24;
/// Streaming enumeration cap for partition functions that store nothing.
pub const STREAM_ENUM_CAP: usize = 26;

/// Spins outside the volume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryCondition {
    Plus,
    Minus,
    /// Interaction terms not fully inside the volume are dropped.
    Free,
    Explicit {
        base: Spin,
        deviations: BTreeMap<Point, Spin>,
    },
}

impl BoundaryCondition {
    pub fn explicit(base: Spin, deviations: BTreeMap<Point, Spin>) -> Result<Self> {
        if base != UP && base != DOWN {
            return Err(Error::InvalidBoundary("base spin must be +1 or -1".into()));
        }
        if deviations.values().any(|&s| s != UP && s != DOWN) {
            return Err(Error::InvalidBoundary("deviation spins must be +1 or -1".into()));
        }
        Ok(BoundaryCondition::Explicit { base, deviations })
    }

    /// The spin this condition assigns at `p`; `None` for the free boundary.
    pub fn spin(&self, p: &Point) -> Option<Spin> {
        match self {
            BoundaryCondition::Plus => Some(UP),
            BoundaryCondition::Minus => Some(DOWN),
            BoundaryCondition::Free => None,
            BoundaryCondition::Explicit { base, deviations } => {
                Some(*deviations.get(p).unwrap_or(base))
            }
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, BoundaryCondition::Free)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            BoundaryCondition::Plus => "plus",
            BoundaryCondition::Minus => "minus",
            BoundaryCondition::Free => "free",
            BoundaryCondition::Explicit { .. } => "explicit",
        }
    }

    fn validate_against(&self, volume: &SiteSet) -> Result<()> {
        if let BoundaryCondition::Explicit { deviations, .. } = self {
            for p in deviations.keys() {
                if p.dim() != volume.dim() {
                    return Err(Error::DimensionMismatch(volume.dim(), p.dim()));
                }
                if volume.contains(p) {
                    return Err(Error::InvalidBoundary(format!(
                        "deviation at {p} overlaps the volume"
                    )));
                }
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        match self {
            BoundaryCondition::Explicit { base, deviations } => {
                let devs = deviations
                    .iter()
                    .map(|(p, s)| format!("{p}:{s:+}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                format!("explicit base={base:+} deviations={devs}")
            }
            other => other.kind_name().to_string(),
        }
    }
}

impl SpinSource for BoundaryCondition {
    fn spin(&self, p: &Point) -> Option<Spin> {
        BoundaryCondition::spin(self, p)
    }
}

/// One enumerated configuration of a Gibbs state.
#[derive(Clone, Copy)]
pub struct ConfigView<'a> {
    sites: &'a SiteSet,
    bits: u64,
}

impl<'a> ConfigView<'a> {
    pub fn sites(&self) -> &'a SiteSet {
        self.sites
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn spin(&self, p: &Point) -> Option<Spin> {
        self.sites
            .position(p)
            .map(|i| spin_from_bit((self.bits >> i) & 1 == 1))
    }
}

/// Precompiled energy terms for one (interaction, volume, boundary) triple.
///
/// Boundary spins are folded into table base indices and per-site kernel
/// fields, so evaluating a configuration is pure table lookups.
pub(crate) struct CompiledEnergy<'a> {
    n_sites: usize,
    table_terms: Vec<TableTerm<'a>>,
    pair_terms: Vec<(usize, usize, f64)>,
    field: Vec<f64>,
    tail_bound: f64,
}

struct TableTerm<'a> {
    table: &'a [f64],
    base: usize,
    gather: Vec<(u8, u8)>, // (volume bit, shape bit)
}

impl<'a> CompiledEnergy<'a> {
    pub(crate) fn compile(
        phi: &'a Interaction,
        volume: &SiteSet,
        bc: &BoundaryCondition,
        radius: u32,
    ) -> Result<Self> {
        if volume.dim() != phi.dim() {
            return Err(Error::DimensionMismatch(phi.dim(), volume.dim()));
        }
        bc.validate_against(volume)?;
        let free = bc.is_free();
        let translates = if free {
            phi.finite_translates_inside(volume)
        } else {
            phi.finite_translates_meeting(volume)
        };
        let mut table_terms = Vec::with_capacity(translates.len());
        for (lf, shift) in translates {
            let mut base = 0usize;
            let mut gather = Vec::with_capacity(lf.shape().len());
            for (k, &s) in lf.shape().sites().iter().enumerate() {
                let p = s + shift;
                match volume.position(&p) {
                    Some(i) => gather.push((i as u8, k as u8)),
                    None => {
                        let spin = bc.spin(&p).ok_or(Error::MissingSpin(p))?;
                        if spin == UP {
                            base |= 1 << k;
                        }
                    }
                }
            }
            table_terms.push(TableTerm {
                table: lf.table(),
                base,
                gather,
            });
        }
        let mut pair_terms = Vec::new();
        let mut field = vec![0.0; volume.len()];
        let mut tail_bound = 0.0;
        if let Some(kernel) = phi.kernel() {
            let offsets = ball_offsets(phi.dim(), radius);
            for (i, &x) in volume.sites().iter().enumerate() {
                for o in &offsets {
                    let y = x + *o;
                    match volume.position(&y) {
                        Some(j) => {
                            if i < j {
                                pair_terms.push((i, j, kernel.coupling(o)));
                            }
                        }
                        None => {
                            if !free {
                                let sy = bc.spin(&y).ok_or(Error::MissingSpin(y))?;
                                field[i] += -kernel.coupling(o) * sy as f64;
                            }
                        }
                    }
                }
            }
            tail_bound = volume.len() as f64
                * crate::interaction::kernel_abs_tail_pub(kernel, phi.dim(), radius, DEFAULT_TAIL_TOL)?;
        }
        Ok(Self {
            n_sites: volume.len(),
            table_terms,
            pair_terms,
            field,
            tail_bound,
        })
    }

    pub(crate) fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `H` of the bit-packed configuration.
    pub(crate) fn energy(&self, bits: u64) -> f64 {
        let mut e = 0.0;
        for t in &self.table_terms {
            let mut idx = t.base;
            for &(vb, sb) in &t.gather {
                idx |= (((bits >> vb) & 1) as usize) << sb;
            }
            e += t.table[idx];
        }
        for &(i, j, coupling) in &self.pair_terms {
            let si = if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 };
            let sj = if (bits >> j) & 1 == 1 { 1.0 } else { -1.0 };
            e += -coupling * si * sj;
        }
        for (i, &h) in self.field.iter().enumerate() {
            if h != 0.0 {
                let si = if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 };
                e += h * si;
            }
        }
        let _ = self.n_sites;
        e
    }
}

/// Exact probability table over `{±1}^Λ` for an interaction and boundary.
#[derive(Debug, Clone)]
pub struct FiniteGibbsState {
    volume: SiteSet,
    boundary: BoundaryCondition,
    log_weights: Vec<f64>,
    log_z: f64,
    truncation_radius: u32,
    tail_bound: f64,
}

impl FiniteGibbsState {
    /// Enumerates all `2^|Λ|` configurations under the default cap.
    pub fn build(
        phi: &Interaction,
        volume: &SiteSet,
        bc: &BoundaryCondition,
        radius: u32,
    ) -> Result<Self> {
        Self::build_with_cap(phi, volume, bc, radius, false)
    }

    /// As `build`, with `allow_large` raising the cap to 24 sites.
    pub fn build_with_cap(
        phi: &Interaction,
        volume: &SiteSet,
        bc: &BoundaryCondition,
        radius: u32,
        allow_large: bool,
    ) -> Result<Self> {
        let cap = if allow_large { HARD_ENUM_CAP } else { DEFAULT_ENUM_CAP };
        if volume.len() > cap {
            return Err(Error::VolumeOverCap {
                got: volume.len(),
                cap,
            });
        }
        let compiled = CompiledEnergy::compile(phi, volume, bc, radius)?;
        let n = volume.len();
        let count = 1usize << n;
        let mut log_weights = vec![0.0f64; count];
        const CHUNK: usize = 1 << 13;
        log_weights
            .par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(chunk_idx, chunk)| {
                let start = chunk_idx * CHUNK;
                for (k, w) in chunk.iter_mut().enumerate() {
                    *w = -compiled.energy((start + k) as u64);
                }
            });
        let mut lse = StreamingLogSumExp::new();
        for &w in &log_weights {
            lse.push(w);
        }
        let log_z = lse.value();
        let state = Self {
            volume: volume.clone(),
            boundary: bc.clone(),
            log_weights,
            log_z,
            truncation_radius: radius,
            tail_bound: compiled.tail_bound(),
        };
        debug_assert!(state.normalization_defect() < 1e-12);
        Ok(state)
    }

    pub fn volume(&self) -> &SiteSet {
        &self.volume
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.boundary
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn truncation_radius(&self) -> u32 {
        self.truncation_radius
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn config_count(&self) -> usize {
        self.log_weights.len()
    }

    /// |Σ p - 1| with compensated summation.
    pub fn normalization_defect(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for &w in &self.log_weights {
            let term = (w - self.log_z).exp();
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        (sum - 1.0).abs()
    }

    #[inline]
    pub fn probability_of(&self, bits: u64) -> f64 {
        (self.log_weights[bits as usize] - self.log_z).exp()
    }

    /// Probability of an event given as a predicate on configurations.
    pub fn probability<F: Fn(ConfigView) -> bool>(&self, event: F) -> f64 {
        let mut total = 0.0;
        for bits in 0..self.log_weights.len() as u64 {
            let view = ConfigView {
                sites: &self.volume,
                bits,
            };
            if event(view) {
                total += self.probability_of(bits);
            }
        }
        total
    }

    /// Expectation of the spin at `x`.
    pub fn site_magnetization(&self, x: &Point) -> Result<f64> {
        let i = self
            .volume
            .position(x)
            .ok_or(Error::SiteOutsideVolume(*x))?;
        let mut m = 0.0;
        for bits in 0..self.log_weights.len() as u64 {
            let s = if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 };
            m += s * self.probability_of(bits);
        }
        Ok(m)
    }

    /// Pushforward onto a subset of the volume.
    pub fn marginal(&self, sub: &SiteSet) -> Result<Marginal> {
        let positions = subset_positions(&self.volume, sub)?;
        let mut probs = vec![0.0f64; 1 << sub.len()];
        for bits in 0..self.log_weights.len() as u64 {
            let mut idx = 0usize;
            for (k, &pos) in positions.iter().enumerate() {
                idx |= (((bits >> pos) & 1) as usize) << k;
            }
            probs[idx] += self.probability_of(bits);
        }
        Ok(Marginal {
            sites: sub.clone(),
            probs,
        })
    }

    /// Gibbs-state dump: header comments then one row per configuration in
    /// binary-counter order.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# gibbslab gibbs state")?;
        writeln!(
            w,
            "# volume = {}",
            self.volume
                .sites()
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        )?;
        writeln!(w, "# boundary = {}", self.boundary.describe())?;
        writeln!(w, "# truncation_radius = {}", self.truncation_radius)?;
        writeln!(w, "# tail_bound = {}", fmt_g17(self.tail_bound))?;
        writeln!(w, "# log_z = {}", fmt_g17(self.log_z))?;
        writeln!(w, "configuration,log_weight,probability")?;
        let n = self.volume.len();
        for bits in 0..self.log_weights.len() as u64 {
            let mut s = String::with_capacity(n);
            for i in 0..n {
                s.push(if (bits >> i) & 1 == 1 { '1' } else { '0' });
            }
            writeln!(
                w,
                "{s},{},{}",
                fmt_g17(self.log_weights[bits as usize]),
                fmt_g17(self.probability_of(bits))
            )?;
        }
        Ok(())
    }
}

/// A probability table on a finite site set.
#[derive(Debug, Clone)]
pub struct Marginal {
    sites: SiteSet,
    probs: Vec<f64>,
}

impl Marginal {
    pub fn new(sites: SiteSet, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << sites.len() {
            return Err(Error::Precondition(format!(
                "marginal needs {} entries, got {}",
                1usize << sites.len(),
                probs.len()
            )));
        }
        Ok(Self { sites, probs })
    }

    pub fn sites(&self) -> &SiteSet {
        &self.sites
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Further restriction (tower property target).
    pub fn restrict(&self, sub: &SiteSet) -> Result<Marginal> {
        let positions = subset_positions(&self.sites, sub)?;
        let mut probs = vec![0.0f64; 1 << sub.len()];
        for (bits, &p) in self.probs.iter().enumerate() {
            let mut idx = 0usize;
            for (k, &pos) in positions.iter().enumerate() {
                idx |= ((bits >> pos) & 1) << k;
            }
            probs[idx] += p;
        }
        Ok(Marginal {
            sites: sub.clone(),
            probs,
        })
    }
}

fn subset_positions(whole: &SiteSet, sub: &SiteSet) -> Result<Vec<usize>> {
    let mut positions = Vec::with_capacity(sub.len());
    let mut missing = Vec::new();
    for p in sub.sites() {
        match whole.position(p) {
            Some(i) => positions.push(i),
            None => missing.push(*p),
        }
    }
    if !missing.is_empty() {
        return Err(Error::NotSubset(missing));
    }
    Ok(positions)
}

/// Streaming free-boundary log partition function; stores nothing, so the
/// cap is higher than for full Gibbs states.
pub fn free_log_z(
    phi: &Interaction,
    volume: &SiteSet,
    radius: u32,
    allow_large: bool,
) -> Result<(f64, f64)> {
    let cap = if allow_large { STREAM_ENUM_CAP } else { DEFAULT_ENUM_CAP };
    if volume.len() > cap {
        return Err(Error::VolumeOverCap {
            got: volume.len(),
            cap,
        });
    }
    let compiled = CompiledEnergy::compile(phi, volume, &BoundaryCondition::Free, radius)?;
    let count = 1u64 << volume.len();
    const CHUNK: u64 = 1 << 16;
    let n_chunks = count.div_ceil(CHUNK);
    let partials: Vec<StreamingLogSumExp> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk_idx| {
            let start = chunk_idx * CHUNK;
            let end = (start + CHUNK).min(count);
            let mut lse = StreamingLogSumExp::new();
            for bits in start..end {
                lse.push(-compiled.energy(bits));
            }
            lse
        })
        .collect();
    let mut lse = StreamingLogSumExp::new();
    for p in partials {
        lse.merge(p);
    }
    Ok((lse.value(), compiled.tail_bound()))
}

/// Max pointwise deviation between conditionals of the full state and
/// independently built sub-volume Gibbs states (the DLR identity).
pub fn dlr_check(
    phi: &Interaction,
    volume: &SiteSet,
    sub: &SiteSet,
    bc: &BoundaryCondition,
    radius: u32,
) -> Result<f64> {
    if bc.is_free() {
        return Err(Error::InvalidBoundary(
            "the DLR identity needs a boundary condition with explicit spins".into(),
        ));
    }
    let sub_positions = subset_positions(volume, sub)?;
    if sub_positions.len() == volume.len() {
        return Err(Error::Precondition(
            "DLR check needs a proper sub-volume".into(),
        ));
    }
    let outside: Vec<usize> = (0..volume.len())
        .filter(|i| !sub_positions.contains(i))
        .collect();
    let full = FiniteGibbsState::build(phi, volume, bc, radius)?;
    let base = match bc {
        BoundaryCondition::Plus => UP,
        BoundaryCondition::Minus => DOWN,
        BoundaryCondition::Explicit { base, .. } => *base,
        BoundaryCondition::Free => unreachable!(),
    };
    let outer_deviations: BTreeMap<Point, Spin> = match bc {
        BoundaryCondition::Explicit { deviations, .. } => deviations.clone(),
        _ => BTreeMap::new(),
    };

    let mut worst = 0.0f64;
    for sigma in 0..(1u64 << outside.len()) {
        // joint indices with the sub-volume bits scattered in
        let mut base_bits = 0u64;
        for (k, &pos) in outside.iter().enumerate() {
            base_bits |= ((sigma >> k) & 1) << pos;
        }
        let mut cond_log = Vec::with_capacity(1 << sub.len());
        for delta in 0..(1u64 << sub.len()) {
            let mut bits = base_bits;
            for (k, &pos) in sub_positions.iter().enumerate() {
                bits |= ((delta >> k) & 1) << pos;
            }
            cond_log.push(full.log_weights()[bits as usize]);
        }
        let lse = crate::numeric::log_sum_exp(&cond_log);

        // independent rebuild on the sub-volume with the spliced boundary
        let mut deviations = outer_deviations.clone();
        for (k, &pos) in outside.iter().enumerate() {
            let p = volume.sites()[pos];
            let s = spin_from_bit((sigma >> k) & 1 == 1);
            if s != base {
                deviations.insert(p, s);
            }
        }
        let spliced = BoundaryCondition::explicit(base, deviations)?;
        let sub_state = FiniteGibbsState::build(phi, sub, &spliced, radius)?;
        for delta in 0..(1u64 << sub.len()) {
            let conditional = (cond_log[delta as usize] - lse).exp();
            let rebuilt = sub_state.probability_of(delta);
            worst = worst.max((conditional - rebuilt).abs());
        }
    }
    Ok(worst)
}

/// Max pointwise probability deviation between the Gibbs states of
/// `Φ₀ + Ψ` and `Φ₀ + rectangle_transform(Ψ)` on the same volume/boundary.
pub fn gibbs_equivalence_check(
    phi0: &Interaction,
    psi: &Interaction,
    volume: &SiteSet,
    bc: &BoundaryCondition,
    radius: u32,
) -> Result<f64> {
    if psi.kernel().is_some() {
        return Err(Error::Precondition(
            "perturbation must be finite-support (materialize its kernel first)".into(),
        ));
    }
    if bc.is_free() {
        return Err(Error::InvalidBoundary(
            "rectangle equivalence holds for boundary conditions with explicit spins".into(),
        ));
    }
    let max_hull_diam = psi
        .local_functions()
        .map(|lf| lf.shape().diameter())
        .max()
        .unwrap_or(0);
    if (radius as u64) < max_hull_diam {
        return Err(Error::TruncationTooSmall {
            radius,
            need: format!("rectangle hulls reach diameter {max_hull_diam}"),
        });
    }
    let perturbed = phi0.add(psi)?;
    let transformed = phi0.add(&psi.rectangle_transform()?)?;
    let a = FiniteGibbsState::build(&perturbed, volume, bc, radius)?;
    let b = FiniteGibbsState::build(&transformed, volume, bc, radius)?;
    let mut worst = 0.0f64;
    for bits in 0..a.config_count() as u64 {
        worst = worst.max((a.probability_of(bits) - b.probability_of(bits)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{LocalFunction, RandomInteractionParams};
    use crate::lattice::Rectangle;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn box_volume(side: u32) -> SiteSet {
        Rectangle::cube(2, side).to_site_set()
    }

    #[test]
    fn zero_interaction_is_uniform() {
        let phi = Interaction::zero(2);
        let volume = box_volume(2);
        let mu = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Free, 1).unwrap();
        assert_abs_diff_eq!(mu.log_z(), 4.0 * std::f64::consts::LN_2, epsilon = 1e-12);
        for bits in 0..16 {
            assert_abs_diff_eq!(mu.probability_of(bits), 1.0 / 16.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn single_site_plus_boundary_closed_form() {
        for beta in [0.3, 1.0] {
            let phi = Interaction::ising(beta, 2);
            let volume = SiteSet::from_coords(&[&[0, 0]]).unwrap();
            let mu = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Plus, 1).unwrap();
            let expected = (4.0 * beta).exp() / ((4.0 * beta).exp() + (-4.0 * beta).exp());
            assert_abs_diff_eq!(mu.probability_of(1), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn weights_match_reference_hamiltonian() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let phi = crate::interaction::random_finite_interaction(
            &mut rng,
            &RandomInteractionParams::default(),
        );
        let volume = box_volume(2);
        for bc in [
            BoundaryCondition::Plus,
            BoundaryCondition::Minus,
            BoundaryCondition::Free,
        ] {
            let mu = FiniteGibbsState::build(&phi, &volume, &bc, 2).unwrap();
            for bits in 0..16u64 {
                let pattern = crate::spins::SpinPattern::new(volume.clone(), bits);
                let h = if bc.is_free() {
                    phi.hamiltonian_interior(&volume, &pattern, 2).unwrap().0
                } else {
                    let omega = crate::spins::Extended {
                        inner: &pattern,
                        outer: &bc,
                    };
                    phi.hamiltonian(&volume, &omega, 2).unwrap().0
                };
                assert_abs_diff_eq!(mu.log_weights()[bits as usize], -h, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn minus_state_is_flip_image_of_plus_state() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let phi = crate::interaction::random_finite_interaction(
            &mut rng,
            &RandomInteractionParams {
                spin_flip_symmetric: true,
                ..Default::default()
            },
        );
        let volume = box_volume(3);
        let plus = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Plus, 2).unwrap();
        let minus = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Minus, 2).unwrap();
        let n = volume.len();
        for bits in 0..plus.config_count() as u64 {
            let flipped = crate::spins::flip_index(bits, n);
            assert_abs_diff_eq!(
                plus.probability_of(bits),
                minus.probability_of(flipped),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn probability_complement_rule() {
        let phi = Interaction::ising(0.8, 2);
        let volume = box_volume(3);
        let mu = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Plus, 1).unwrap();
        assert_abs_diff_eq!(mu.probability(|_| true), 1.0, epsilon = 1e-12);
        let center = Point::new(&[1, 1]);
        let p = mu.probability(|v| v.spin(&center) == Some(UP));
        let q = mu.probability(|v| v.spin(&center) != Some(UP));
        assert_abs_diff_eq!(p + q, 1.0, epsilon = 1e-12);
        assert!(p > 0.9, "ordered regime magnetizes the center: {p}");
    }

    #[test]
    fn magnetization_examples() {
        let volume = box_volume(3);
        let center = Point::new(&[1, 1]);
        // beta = 0: free spins
        let mu = FiniteGibbsState::build(
            &Interaction::ising(0.0, 2),
            &volume,
            &BoundaryCondition::Plus,
            1,
        )
        .unwrap();
        assert_abs_diff_eq!(mu.site_magnetization(&center).unwrap(), 0.0, epsilon = 1e-12);
        // plus and minus are exact negatives under symmetry
        let phi = Interaction::ising(0.6, 2);
        let plus = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Plus, 1).unwrap();
        let minus = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Minus, 1).unwrap();
        assert_abs_diff_eq!(
            plus.site_magnetization(&center).unwrap(),
            -minus.site_magnetization(&center).unwrap(),
            epsilon = 1e-12
        );
        assert!(plus.site_magnetization(&Point::new(&[9, 9])).is_err());
    }

    #[test]
    fn constant_interaction_shifts_nothing() {
        let phi = Interaction::ising(0.5, 2);
        let mut shifted = phi.clone();
        shifted.add_local(
            LocalFunction::new(
                SiteSet::from_coords(&[&[0, 0]]).unwrap(),
                vec![0.37, 0.37],
            )
            .unwrap(),
        );
        let volume = box_volume(2);
        let a = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Plus, 1).unwrap();
        let b = FiniteGibbsState::build(&shifted, &volume, &BoundaryCondition::Plus, 1).unwrap();
        for bits in 0..16u64 {
            assert_abs_diff_eq!(a.probability_of(bits), b.probability_of(bits), epsilon = 1e-13);
        }
    }

    #[test]
    fn marginal_tower_property() {
        let phi = Interaction::ising(0.7, 2);
        let volume = box_volume(2);
        let mu = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Plus, 1).unwrap();
        let delta = SiteSet::from_coords(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        let delta2 = SiteSet::from_coords(&[&[0, 0], &[1, 0]]).unwrap();
        let m1 = mu.marginal(&delta).unwrap();
        assert_abs_diff_eq!(m1.total(), 1.0, epsilon = 1e-12);
        let via_tower = m1.restrict(&delta2).unwrap();
        let direct = mu.marginal(&delta2).unwrap();
        for (a, b) in via_tower.probs().iter().zip(direct.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
        // whole-volume marginal is the identity
        let whole = mu.marginal(&volume).unwrap();
        for bits in 0..16u64 {
            assert_abs_diff_eq!(
                whole.probs()[bits as usize],
                mu.probability_of(bits),
                epsilon = 1e-14
            );
        }
        assert!(mu.marginal(&SiteSet::from_coords(&[&[7, 7]]).unwrap()).is_err());
    }

    #[test]
    fn dlr_identity_holds_exactly() {
        let volume = box_volume(3);
        let sub = SiteSet::from_coords(&[&[1, 1]]).unwrap();
        let zero_dev = dlr_check(
            &Interaction::zero(2),
            &volume,
            &sub,
            &BoundaryCondition::Plus,
            1,
        )
        .unwrap();
        assert_eq!(zero_dev, 0.0);

        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let psi = crate::interaction::random_finite_interaction(
            &mut rng,
            &RandomInteractionParams {
                target_norm_abs: Some(0.2),
                ..Default::default()
            },
        );
        let phi = Interaction::ising(0.7, 2).add(&psi).unwrap();
        let dev = dlr_check(&phi, &volume, &sub, &BoundaryCondition::Plus, 2).unwrap();
        assert!(dev <= 1e-10, "DLR deviation {dev}");
        assert!(dlr_check(&phi, &volume, &sub, &BoundaryCondition::Free, 2).is_err());
    }

    #[test]
    fn rectangle_equivalence_identity() {
        // already-rectangular perturbations are exact fixed points
        let phi0 = Interaction::ising(1.0, 2);
        let mut psi = Interaction::zero(2);
        psi.add_local(
            LocalFunction::new(
                SiteSet::from_coords(&[&[0, 0], &[1, 0]]).unwrap(),
                vec![0.1, -0.2, 0.05, 0.3],
            )
            .unwrap(),
        );
        let volume = box_volume(3);
        let dev = gibbs_equivalence_check(&phi0, &psi, &volume, &BoundaryCondition::Plus, 2).unwrap();
        assert!(dev <= 1e-12, "rectangular fixed point deviates by {dev}");

        // L-tromino support
        let mut psi = Interaction::zero(2);
        psi.add_local(
            LocalFunction::new(
                SiteSet::from_coords(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap(),
                (0..8).map(|i| 0.05 * i as f64 - 0.2).collect(),
            )
            .unwrap(),
        );
        let dev = gibbs_equivalence_check(&phi0, &psi, &volume, &BoundaryCondition::Plus, 2).unwrap();
        assert!(dev <= 1e-10, "tromino equivalence deviates by {dev}");

        // truncation must cover the hulls
        assert!(matches!(
            gibbs_equivalence_check(&phi0, &psi, &volume, &BoundaryCondition::Plus, 0),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn volume_cap_is_enforced() {
        let phi = Interaction::zero(2);
        let volume = Rectangle::cube(2, 5).to_site_set(); // 25 sites
        assert!(matches!(
            FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Free, 1),
            Err(Error::VolumeOverCap { .. })
        ));
        assert!(matches!(
            FiniteGibbsState::build_with_cap(&phi, &volume, &BoundaryCondition::Free, 1, true),
            Err(Error::VolumeOverCap { .. })
        ));
    }

    #[test]
    fn explicit_boundary_deviations_must_be_outside() {
        let volume = box_volume(2);
        let mut dev = BTreeMap::new();
        dev.insert(Point::new(&[0, 0]), DOWN);
        let bc = BoundaryCondition::explicit(UP, dev).unwrap();
        assert!(matches!(
            FiniteGibbsState::build(&Interaction::zero(2), &volume, &bc, 1),
            Err(Error::InvalidBoundary(_))
        ));
    }

    #[test]
    fn free_log_z_matches_stored_build() {
        let phi = Interaction::ising(0.9, 2);
        let volume = box_volume(3);
        let mu = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Free, 1).unwrap();
        let (lz, _) = free_log_z(&phi, &volume, 1, false).unwrap();
        assert_abs_diff_eq!(mu.log_z(), lz, epsilon = 1e-11);
    }

    #[test]
    fn csv_dump_is_stable() {
        let phi = Interaction::ising(0.5, 2);
        let volume = SiteSet::from_coords(&[&[0, 0], &[1, 0]]).unwrap();
        let mu = FiniteGibbsState::build(&phi, &volume, &BoundaryCondition::Plus, 1).unwrap();
        let mut a = Vec::new();
        mu.write_csv(&mut a).unwrap();
        let mut b = Vec::new();
        mu.write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("# gibbslab gibbs state"));
        assert_eq!(text.lines().count(), 7 + 4);
        assert!(text.contains("configuration,log_weight,probability"));
    }
}
