//! Translation-invariant interactions, their norms, Hamiltonians with
//! controlled truncation, and the rectangle-hull regrouping.
//!
//! An interaction is stored through one representative per translation
//! class: every shape is anchored so that its lexicographic middle element
//! sits at the origin. Local energies are dense tables indexed by the
//! bit-packed configuration of the shape. An optional two-body power-law
//! kernel covers long-range pair couplings of spin-product form
//! `Φ_{x,y}(ω) = -J(x-y) ω(x) ω(y)`.

mod norms;
mod random;
mod text;

pub use norms::{NormValue, Norms, DEFAULT_TAIL_TOL};
pub use random::{random_finite_interaction, RandomInteractionParams};

/// Crate-internal alias so other modules can bound kernel tails.
pub(crate) use norms::kernel_abs_tail as kernel_abs_tail_pub;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::lattice::{ball_offsets, Point, SiteSet};
use crate::spins::{bit_from_spin, flip_index, SpinSource};

/// Largest shape a dense local-function table may carry (2^20 entries).
pub const MAX_LOCAL_SITES: usize = 20;

/// A local energy term on an anchored shape.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFunction {
    shape: SiteSet,
    table: Vec<f64>,
}

impl LocalFunction {
    /// `shape` may be any translate; it is anchored here. Anchoring does not
    /// permute the table because translation preserves lexicographic order.
    pub fn new(shape: SiteSet, table: Vec<f64>) -> Result<Self> {
        if shape.len() > MAX_LOCAL_SITES {
            return Err(Error::ShapeOverCap {
                got: shape.len(),
                cap: MAX_LOCAL_SITES,
            });
        }
        if table.len() != 1 << shape.len() {
            return Err(Error::Precondition(format!(
                "table needs {} entries for a {}-site shape, got {}",
                1usize << shape.len(),
                shape.len(),
                table.len()
            )));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("table entries must be finite".into()));
        }
        let (anchored, _) = shape.canonical_anchor();
        Ok(Self {
            shape: anchored,
            table,
        })
    }

    pub fn shape(&self) -> &SiteSet {
        &self.shape
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    #[inline]
    pub fn value(&self, idx: usize) -> f64 {
        self.table[idx]
    }

    pub fn sup_abs(&self) -> f64 {
        self.table.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `var_Λ Φ = sup - inf` over the table.
    pub fn variation(&self) -> f64 {
        let max = self.table.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let min = self.table.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        max - min
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|&v| v == 0.0)
    }

    pub fn is_spin_flip_symmetric(&self) -> bool {
        let n = self.shape.len();
        self.table
            .iter()
            .enumerate()
            .all(|(i, &v)| v == self.table[flip_index(i as u64, n) as usize])
    }
}

/// Distance norm used by a power-law kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelNorm {
    LInf,
    Euclid,
}

impl KernelNorm {
    pub fn name(&self) -> &'static str {
        match self {
            KernelNorm::LInf => "linf",
            KernelNorm::Euclid => "euclid",
        }
    }
}

/// Long-range two-body coupling `J(x) = c ‖x‖^{-s}` of spin-product form.
///
/// The truncation radius bounds which pairs enter Hamiltonians and samplers;
/// every consumer reports the neglected mass as an explicit tail bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoBodyKernel {
    norm: KernelNorm,
    amplitude: f64,
    exponent: f64,
    truncation_radius: u32,
}

impl TwoBodyKernel {
    pub fn new(norm: KernelNorm, amplitude: f64, exponent: f64, truncation_radius: u32) -> Result<Self> {
        if !amplitude.is_finite() || !exponent.is_finite() || exponent <= 0.0 {
            return Err(Error::Precondition(
                "kernel needs finite amplitude and positive exponent".into(),
            ));
        }
        if truncation_radius == 0 {
            return Err(Error::Precondition("kernel truncation radius must be >= 1".into()));
        }
        Ok(Self {
            norm,
            amplitude,
            exponent,
            truncation_radius,
        })
    }

    pub fn norm(&self) -> KernelNorm {
        self.norm
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn truncation_radius(&self) -> u32 {
        self.truncation_radius
    }

    /// Coupling strength for displacement `x != 0`.
    pub fn coupling(&self, x: &Point) -> f64 {
        let r = match self.norm {
            KernelNorm::LInf => x.norm_inf() as f64,
            KernelNorm::Euclid => x.norm_euclid(),
        };
        debug_assert!(r > 0.0);
        self.amplitude * r.powf(-self.exponent)
    }
}

/// A translation-invariant, absolutely summable interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    dim: usize,
    label: String,
    finite: BTreeMap<SiteSet, LocalFunction>,
    kernel: Option<TwoBodyKernel>,
    /// Absolute-norm mass discarded by kernel materialization in `add`.
    discarded_tail: f64,
}

impl Interaction {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= crate::lattice::MAX_DIM);
        Self {
            dim,
            label: format!("zero(d={dim})"),
            finite: BTreeMap::new(),
            kernel: None,
            discarded_tail: 0.0,
        }
    }

    /// The Ising interaction: `-β ω(x) ω(y)` on nearest-neighbor pairs.
    pub fn ising(beta: f64, dim: usize) -> Self {
        let mut out = Self::zero(dim);
        out.label = format!("ising(beta={beta},d={dim})");
        if beta == 0.0 {
            return out;
        }
        for axis in 0..dim {
            let shape =
                SiteSet::new(vec![Point::origin(dim), Point::unit(dim, axis)]).unwrap();
            // bit 0 = origin, bit 1 = e_axis
            let table = vec![-beta, beta, beta, -beta];
            out.add_local(LocalFunction::new(shape, table).unwrap());
        }
        out
    }

    /// Ising with external field: adds the singleton term `-h ω(x)`.
    pub fn ising_with_field(beta: f64, h: f64, dim: usize) -> Self {
        let mut out = Self::ising(beta, dim);
        out.label = format!("ising_field(beta={beta},h={h},d={dim})");
        if h != 0.0 {
            let shape = SiteSet::new(vec![Point::origin(dim)]).unwrap();
            out.add_local(LocalFunction::new(shape, vec![h, -h]).unwrap());
        }
        out
    }

    pub fn with_kernel(mut self, kernel: TwoBodyKernel) -> Result<Self> {
        if kernel.exponent <= self.dim as f64 {
            return Err(Error::KernelDivergent {
                s: kernel.exponent,
                min: self.dim as f64,
                norm: "absolute-summability",
            });
        }
        self.label = format!(
            "{}+kernel({},c={},s={},R={})",
            self.label,
            kernel.norm.name(),
            kernel.amplitude,
            kernel.exponent,
            kernel.truncation_radius
        );
        self.kernel = Some(kernel);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn kernel(&self) -> Option<&TwoBodyKernel> {
        self.kernel.as_ref()
    }

    pub fn local_functions(&self) -> impl Iterator<Item = &LocalFunction> {
        self.finite.values()
    }

    pub fn finite_shape_count(&self) -> usize {
        self.finite.len()
    }

    /// Norm mass lost to kernel materialization during `add`, if any.
    pub fn discarded_tail(&self) -> f64 {
        self.discarded_tail
    }

    /// Adds a local term, accumulating tables on an existing anchored shape.
    pub fn add_local(&mut self, lf: LocalFunction) {
        assert_eq!(lf.shape.dim(), self.dim, "shape dimension mismatch");
        match self.finite.get_mut(&lf.shape) {
            Some(existing) => {
                for (a, b) in existing.table.iter_mut().zip(lf.table.iter()) {
                    *a += b;
                }
            }
            None => {
                self.finite.insert(lf.shape.clone(), lf);
            }
        }
    }

    /// Shape-wise sum of two interactions.
    ///
    /// Kernels merge when they share norm, exponent and radius; otherwise the
    /// right operand's kernel is materialized into finite pair shapes up to
    /// its truncation radius and the discarded tail is recorded as metadata.
    pub fn add(&self, other: &Interaction) -> Result<Interaction> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = self.clone();
        out.label = format!("{}+{}", self.label, other.label);
        for lf in other.finite.values() {
            out.add_local(lf.clone());
        }
        out.discarded_tail += other.discarded_tail;
        match (&self.kernel, &other.kernel) {
            (_, None) => {}
            (None, Some(k)) => out.kernel = Some(k.clone()),
            (Some(a), Some(b)) => {
                if a.norm == b.norm
                    && a.exponent == b.exponent
                    && a.truncation_radius == b.truncation_radius
                {
                    out.kernel = Some(TwoBodyKernel {
                        amplitude: a.amplitude + b.amplitude,
                        ..a.clone()
                    });
                } else {
                    let materialized = Interaction::zero(self.dim)
                        .with_kernel(b.clone())?
                        .materialize_kernel(DEFAULT_TAIL_TOL)?;
                    for lf in materialized.finite.values() {
                        out.add_local(lf.clone());
                    }
                    out.discarded_tail += materialized.discarded_tail;
                }
            }
        }
        Ok(out)
    }

    /// Replaces the kernel by explicit pair shapes within its truncation
    /// radius; the dropped tail goes into `discarded_tail`.
    pub fn materialize_kernel(&self, tail_tol: f64) -> Result<Interaction> {
        let Some(kernel) = &self.kernel else {
            return Ok(self.clone());
        };
        let mut out = self.clone();
        out.kernel = None;
        out.label = format!("{}|materialized", self.label);
        let origin = Point::origin(self.dim);
        for o in ball_offsets(self.dim, kernel.truncation_radius) {
            if o <= origin {
                continue; // one anchored representative per unordered pair
            }
            let j = kernel.coupling(&o);
            if j == 0.0 {
                continue;
            }
            let shape = SiteSet::new(vec![origin, o]).unwrap();
            out.add_local(LocalFunction::new(shape, vec![-j, j, j, -j]).unwrap());
        }
        out.discarded_tail += norms::kernel_abs_tail(kernel, self.dim, kernel.truncation_radius, tail_tol)?;
        Ok(out)
    }

    /// `Φ_Λ(ω)`: canonical-anchor table lookup plus the kernel term on pairs.
    /// Unknown shapes evaluate to zero. `bits` packs the spins of `sites` in
    /// lexicographic order.
    pub fn evaluate(&self, sites: &SiteSet, bits: u64) -> f64 {
        let (anchored, _) = sites.canonical_anchor();
        let mut v = match self.finite.get(&anchored) {
            Some(lf) => lf.value(bits as usize),
            None => 0.0,
        };
        if sites.len() == 2 {
            if let Some(kernel) = &self.kernel {
                let x = sites.sites()[0];
                let y = sites.sites()[1];
                let s0 = if bits & 1 == 1 { 1.0 } else { -1.0 };
                let s1 = if bits & 2 == 2 { 1.0 } else { -1.0 };
                v += -kernel.coupling(&(y - x)) * s0 * s1;
            }
        }
        v
    }

    /// Distinct translates of finite shapes that meet `volume`, as
    /// (local function, shift) pairs in a deterministic order.
    pub(crate) fn finite_translates_meeting<'a>(
        &'a self,
        volume: &SiteSet,
    ) -> Vec<(&'a LocalFunction, Point)> {
        let mut out = Vec::new();
        for lf in self.finite.values() {
            let mut shifts = BTreeSet::new();
            for &v in volume.sites() {
                for &s in lf.shape.sites() {
                    shifts.insert(v - s);
                }
            }
            for shift in shifts {
                out.push((lf, shift));
            }
        }
        out
    }

    /// Distinct translates of finite shapes fully contained in `volume`.
    pub(crate) fn finite_translates_inside<'a>(
        &'a self,
        volume: &SiteSet,
    ) -> Vec<(&'a LocalFunction, Point)> {
        self.finite_translates_meeting(volume)
            .into_iter()
            .filter(|(lf, shift)| lf.shape.sites().iter().all(|&s| volume.contains(&(s + *shift))))
            .collect()
    }

    /// Translates of finite shapes containing the origin, as (lf, shift).
    pub(crate) fn finite_translates_containing_origin(&self) -> Vec<(&LocalFunction, Point)> {
        let mut out = Vec::new();
        for lf in self.finite.values() {
            let mut shifts = BTreeSet::new();
            for &s in lf.shape.sites() {
                shifts.insert(-s);
            }
            for shift in shifts {
                out.push((lf, shift));
            }
        }
        out
    }

    fn table_index_at<S: SpinSource>(shape: &SiteSet, shift: Point, omega: &S) -> Result<usize> {
        let mut idx = 0usize;
        for (k, &s) in shape.sites().iter().enumerate() {
            let p = s + shift;
            let spin = omega.spin(&p).ok_or(Error::MissingSpin(p))?;
            idx |= (bit_from_spin(spin) as usize) << k;
        }
        Ok(idx)
    }

    /// `H_{Φ,Λ}(ω) = Σ_{Δ ∩ Λ ≠ ∅} Φ_Δ(ω)` with the kernel truncated at
    /// `radius`; finite shapes are always fully included. Returns the value
    /// and a rigorous bound on the neglected kernel tail.
    pub fn hamiltonian<S: SpinSource>(
        &self,
        volume: &SiteSet,
        omega: &S,
        radius: u32,
    ) -> Result<(f64, f64)> {
        if volume.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, volume.dim()));
        }
        let mut total = 0.0;
        for (lf, shift) in self.finite_translates_meeting(volume) {
            total += lf.value(Self::table_index_at(&lf.shape, shift, omega)?);
        }
        let mut tail = 0.0;
        if let Some(kernel) = &self.kernel {
            let offsets = ball_offsets(self.dim, radius);
            for &x in volume.sites() {
                let sx = omega.spin(&x).ok_or(Error::MissingSpin(x))? as f64;
                for o in &offsets {
                    let y = x + *o;
                    if volume.contains(&y) && !(x < y) {
                        continue; // interior pairs counted once
                    }
                    let sy = omega.spin(&y).ok_or(Error::MissingSpin(y))? as f64;
                    total += -kernel.coupling(o) * sx * sy;
                }
            }
            tail = volume.len() as f64
                * norms::kernel_abs_tail(kernel, self.dim, radius, DEFAULT_TAIL_TOL)?;
        }
        Ok((total, tail))
    }

    /// Free-boundary energy `Σ_{Δ ⊂ Λ} Φ_Δ(ω)`: only terms fully inside the
    /// volume, kernel pairs included up to `radius`.
    pub fn hamiltonian_interior<S: SpinSource>(
        &self,
        volume: &SiteSet,
        omega: &S,
        radius: u32,
    ) -> Result<(f64, f64)> {
        if volume.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, volume.dim()));
        }
        let mut total = 0.0;
        for (lf, shift) in self.finite_translates_inside(volume) {
            total += lf.value(Self::table_index_at(&lf.shape, shift, omega)?);
        }
        let mut tail = 0.0;
        if let Some(kernel) = &self.kernel {
            let offsets = ball_offsets(self.dim, radius);
            for &x in volume.sites() {
                let sx = omega.spin(&x).ok_or(Error::MissingSpin(x))? as f64;
                for o in &offsets {
                    let y = x + *o;
                    if !volume.contains(&y) || !(x < y) {
                        continue;
                    }
                    let sy = omega.spin(&y).ok_or(Error::MissingSpin(y))? as f64;
                    total += -kernel.coupling(o) * sx * sy;
                }
            }
            tail = volume.len() as f64
                * norms::kernel_abs_tail(kernel, self.dim, radius, DEFAULT_TAIL_TOL)?;
        }
        Ok((total, tail))
    }

    /// True iff every table equals its global-flip image and the kernel (of
    /// spin-product form, hence automatically symmetric) may be present.
    pub fn is_spin_flip_symmetric(&self) -> bool {
        self.finite.values().all(|lf| lf.is_spin_flip_symmetric())
    }

    /// True iff every shape carrying a nonzero table is `‖·‖₁`-connected and
    /// no kernel is present (power-law kernels couple non-adjacent pairs).
    pub fn is_zero_on_non_l1_connected(&self) -> bool {
        self.kernel.is_none()
            && self
                .finite
                .values()
                .all(|lf| lf.is_zero() || lf.shape.is_l1_connected())
    }

    /// The rectangle-hull regrouping: every stored term is moved onto the
    /// minimal rectangle containing its shape, summing terms that share a
    /// hull. The result carries the same finite Gibbs states.
    pub fn rectangle_transform(&self) -> Result<Interaction> {
        if self.kernel.is_some() {
            return Err(Error::Precondition(
                "materialize the kernel before the rectangle transform".into(),
            ));
        }
        let mut out = Interaction::zero(self.dim);
        out.label = format!("rect({})", self.label);
        out.discarded_tail = self.discarded_tail;
        for lf in self.finite.values() {
            let hull_sites = lf.shape.rectangle_hull().to_site_set();
            if hull_sites.len() > MAX_LOCAL_SITES {
                return Err(Error::ShapeOverCap {
                    got: hull_sites.len(),
                    cap: MAX_LOCAL_SITES,
                });
            }
            let (hull_anchored, hull_shift) = hull_sites.canonical_anchor();
            let shape_in_hull = lf.shape.translate(-hull_shift);
            let positions: Vec<usize> = shape_in_hull
                .sites()
                .iter()
                .map(|p| hull_anchored.position(p).expect("shape inside its hull"))
                .collect();
            let mut table = vec![0.0; 1 << hull_anchored.len()];
            for (bits, slot) in table.iter_mut().enumerate() {
                let mut idx = 0usize;
                for (k, &pos) in positions.iter().enumerate() {
                    idx |= ((bits >> pos) & 1) << k;
                }
                *slot = lf.table[idx];
            }
            out.add_local(LocalFunction::new(hull_anchored, table)?);
        }
        Ok(out)
    }

    /// `A_Φ(ω) = -Σ_Λ Φ_Λ(ω)` over anchored shapes (origin = middle element)
    /// of diameter at most `radius`. The tail bound covers the kernel beyond
    /// the radius and any finite shape dropped by the diameter cut.
    pub fn a_phi<S: SpinSource>(&self, omega: &S, radius: u32) -> Result<(f64, f64)> {
        let mut total = 0.0;
        let mut tail = 0.0;
        for lf in self.finite.values() {
            if lf.shape.diameter() <= radius as u64 {
                total -= lf.value(Self::table_index_at(&lf.shape, Point::origin(self.dim), omega)?);
            } else {
                tail += lf.sup_abs();
            }
        }
        if let Some(kernel) = &self.kernel {
            let origin = Point::origin(self.dim);
            let s0 = omega.spin(&origin).ok_or(Error::MissingSpin(origin))? as f64;
            for o in ball_offsets(self.dim, radius) {
                if o <= origin {
                    continue; // anchored pairs have the origin as lex minimum
                }
                let so = omega.spin(&o).ok_or(Error::MissingSpin(o))? as f64;
                total -= -kernel.coupling(&o) * s0 * so;
            }
            // exactly half of the symmetric tail lies on anchored pairs
            tail += norms::kernel_abs_tail(kernel, self.dim, radius, DEFAULT_TAIL_TOL)? / 2.0;
        }
        Ok((total, tail))
    }

    pub fn norm_abs(&self, tail_tol: f64) -> Result<NormValue> {
        norms::norm_abs(self, tail_tol)
    }

    pub fn norm_decay(&self, tail_tol: f64) -> Result<NormValue> {
        norms::norm_decay(self, tail_tol)
    }

    pub fn norm_decay_prime(&self, tail_tol: f64) -> Result<NormValue> {
        norms::norm_decay_prime(self, tail_tol)
    }

    pub fn norm_var(&self, tail_tol: f64) -> Result<NormValue> {
        norms::norm_var(self, tail_tol)
    }

    /// All four norms in one report.
    pub fn norms(&self, tail_tol: f64) -> Result<Norms> {
        Ok(Norms {
            abs: self.norm_abs(tail_tol)?,
            decay: self.norm_decay(tail_tol)?,
            decay_prime: self.norm_decay_prime(tail_tol)?,
            var: self.norm_var(tail_tol)?,
        })
    }

    pub fn to_text(&self) -> String {
        text::to_text(self)
    }

    pub fn from_text(input: &str) -> Result<Interaction> {
        text::from_text(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spins::{ConstantField, SpinPattern};
    use approx::assert_abs_diff_eq;

    fn pair_sites(d: usize, axis: usize, base: &[i32]) -> SiteSet {
        let p = Point::new(base);
        SiteSet::new(vec![p, p + Point::unit(d, axis)]).unwrap()
    }

    #[test]
    fn ising_evaluate_examples() {
        let phi = Interaction::ising(1.0, 2);
        let shape = pair_sites(2, 0, &[0, 0]);
        assert_abs_diff_eq!(phi.evaluate(&shape, 0b11), -1.0);
        assert_abs_diff_eq!(phi.evaluate(&shape, 0b01), 1.0);
        // translated shape gives the same value
        let shifted = pair_sites(2, 0, &[3, 0]);
        assert_abs_diff_eq!(phi.evaluate(&shifted, 0b11), -1.0);
        // unknown shape evaluates to zero
        let far = SiteSet::from_coords(&[&[0, 0], &[2, 0]]).unwrap();
        assert_abs_diff_eq!(phi.evaluate(&far, 0b11), 0.0);
    }

    #[test]
    fn zero_beta_is_zero_interaction() {
        let phi = Interaction::ising(0.0, 2);
        assert_eq!(phi.finite_shape_count(), 0);
        assert_abs_diff_eq!(phi.norm_abs(1e-12).unwrap().value, 0.0);
    }

    #[test]
    fn field_interaction_tables() {
        let phi = Interaction::ising_with_field(1.0, 0.7, 2);
        let singleton = SiteSet::from_coords(&[&[4, 4]]).unwrap();
        assert_abs_diff_eq!(phi.evaluate(&singleton, 0b1), -0.7);
        assert_abs_diff_eq!(phi.evaluate(&singleton, 0b0), 0.7);
        assert!(!phi.is_spin_flip_symmetric());
        assert!(Interaction::ising_with_field(1.0, 0.0, 2).is_spin_flip_symmetric());
        assert!(Interaction::ising(1.3, 3).is_spin_flip_symmetric());
    }

    #[test]
    fn add_is_shapewise() {
        let a = Interaction::ising(0.4, 2);
        let b = Interaction::ising(0.6, 2);
        let sum = a.add(&b).unwrap();
        let direct = Interaction::ising(1.0, 2);
        let shape = pair_sites(2, 1, &[0, 0]);
        for bits in 0..4 {
            assert_abs_diff_eq!(
                sum.evaluate(&shape, bits),
                direct.evaluate(&shape, bits),
                epsilon = 1e-15
            );
        }
        // adding zero is the identity
        let same = a.add(&Interaction::zero(2)).unwrap();
        for bits in 0..4 {
            assert_abs_diff_eq!(same.evaluate(&shape, bits), a.evaluate(&shape, bits));
        }
        assert!(a.add(&Interaction::zero(3)).is_err());
    }

    #[test]
    fn hamiltonian_counts_edges_meeting_a_box() {
        let phi = Interaction::ising(1.0, 2);
        let volume = crate::lattice::Rectangle::cube(2, 2).to_site_set();
        let (h, tail) = phi.hamiltonian(&volume, &ConstantField(1), 1).unwrap();
        // 4 interior edges + 8 boundary edges meet the 2x2 box
        assert_abs_diff_eq!(h, -12.0, epsilon = 1e-12);
        assert_eq!(tail, 0.0);
        let (h0, t0) = Interaction::zero(2)
            .hamiltonian(&volume, &ConstantField(1), 1)
            .unwrap();
        assert_eq!((h0, t0), (0.0, 0.0));
    }

    #[test]
    fn hamiltonian_is_linear() {
        let a = Interaction::ising(0.7, 2);
        let mut b = Interaction::zero(2);
        b.add_local(
            LocalFunction::new(
                SiteSet::from_coords(&[&[0, 0], &[1, 0], &[1, 1]]).unwrap(),
                (0..8).map(|i| 0.1 * i as f64 - 0.3).collect(),
            )
            .unwrap(),
        );
        let sum = a.add(&b).unwrap();
        let volume = crate::lattice::Rectangle::cube(2, 3).to_site_set();
        let pattern = SpinPattern::new(volume.clone(), 0b010110101);
        let outer = ConstantField(1);
        let omega = crate::spins::Extended {
            inner: &pattern,
            outer: &outer,
        };
        let (ha, _) = a.hamiltonian(&volume, &omega, 1).unwrap();
        let (hb, _) = b.hamiltonian(&volume, &omega, 1).unwrap();
        let (hsum, _) = sum.hamiltonian(&volume, &omega, 1).unwrap();
        assert_abs_diff_eq!(hsum, ha + hb, epsilon = 1e-12);
    }

    #[test]
    fn spin_flip_symmetric_hamiltonian_is_flip_invariant() {
        let phi = Interaction::ising(0.9, 2);
        let volume = crate::lattice::Rectangle::cube(2, 2).to_site_set();
        let pattern = SpinPattern::new(volume.clone(), 0b0110);
        let plus = ConstantField(1);
        let minus = ConstantField(-1);
        let omega = crate::spins::Extended {
            inner: &pattern,
            outer: &plus,
        };
        let flipped_pattern = pattern.flipped();
        let omega_flipped = crate::spins::Extended {
            inner: &flipped_pattern,
            outer: &minus,
        };
        let (h1, _) = phi.hamiltonian(&volume, &omega, 1).unwrap();
        let (h2, _) = phi.hamiltonian(&volume, &omega_flipped, 1).unwrap();
        assert_abs_diff_eq!(h1, h2, epsilon = 1e-12);
    }

    #[test]
    fn kernel_tail_decreases_with_radius() {
        let kernel = TwoBodyKernel::new(KernelNorm::LInf, 0.2, 5.0, 3).unwrap();
        let phi = Interaction::ising(0.5, 2).with_kernel(kernel).unwrap();
        let volume = crate::lattice::Rectangle::cube(2, 2).to_site_set();
        let mut last = f64::INFINITY;
        for radius in [1, 2, 4, 8] {
            let (_, tail) = phi.hamiltonian(&volume, &ConstantField(1), radius).unwrap();
            assert!(tail < last, "tail must decrease: {tail} !< {last}");
            assert!(tail > 0.0);
            last = tail;
        }
    }

    #[test]
    fn hamiltonian_refinement_stays_inside_previous_interval() {
        let kernel = TwoBodyKernel::new(KernelNorm::LInf, 0.1, 5.0, 2).unwrap();
        let phi = Interaction::zero(2).with_kernel(kernel).unwrap();
        let volume = crate::lattice::Rectangle::cube(2, 2).to_site_set();
        let omega = ConstantField(1);
        let mut prev: Option<(f64, f64)> = None;
        for radius in [1, 2, 3, 5, 8] {
            let (h, tail) = phi.hamiltonian(&volume, &omega, radius).unwrap();
            if let Some((ph, ptail)) = prev {
                assert!(h >= ph - ptail - 1e-12 && h <= ph + ptail + 1e-12);
            }
            prev = Some((h, tail));
        }
    }

    #[test]
    fn missing_coverage_is_an_error() {
        let phi = Interaction::ising(1.0, 2);
        let volume = crate::lattice::Rectangle::cube(2, 2).to_site_set();
        let pattern = SpinPattern::new(volume.clone(), 0b1111);
        // pattern alone covers only the volume, not its 1-neighborhood
        assert!(matches!(
            phi.hamiltonian(&volume, &pattern, 1),
            Err(Error::MissingSpin(_))
        ));
    }

    #[test]
    fn rectangle_transform_fixed_point_and_tromino() {
        // rectangles are fixed points
        let phi = Interaction::ising(0.8, 2);
        let rt = phi.rectangle_transform().unwrap();
        let shape = pair_sites(2, 0, &[0, 0]);
        for bits in 0..4 {
            assert_abs_diff_eq!(rt.evaluate(&shape, bits), phi.evaluate(&shape, bits));
        }

        // an L-tromino moves onto the 2x2 square: the square's value is the
        // tromino's value on the restricted configuration
        let tromino = SiteSet::from_coords(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        let table: Vec<f64> = (0..8).map(|i| (i as f64) * 0.25 - 1.0).collect();
        let mut psi = Interaction::zero(2);
        psi.add_local(LocalFunction::new(tromino.clone(), table.clone()).unwrap());
        let rt = psi.rectangle_transform().unwrap();
        assert!(rt.local_functions().all(|lf| lf.shape().len() == 4));
        let square = tromino.rectangle_hull().to_site_set();
        for bits in 0..16u64 {
            // restrict the square configuration to the tromino's sites
            let mut idx = 0u64;
            for (k, p) in tromino.sites().iter().enumerate() {
                let pos = square.position(p).unwrap();
                idx |= ((bits >> pos) & 1) << k;
            }
            assert_abs_diff_eq!(
                rt.evaluate(&square, bits),
                psi.evaluate(&tromino, idx),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn rectangle_transform_output_is_l1_connected() {
        let mut psi = Interaction::zero(2);
        let diag = SiteSet::from_coords(&[&[0, 0], &[1, 1]]).unwrap();
        psi.add_local(LocalFunction::new(diag, vec![0.3, -0.1, -0.1, 0.3]).unwrap());
        assert!(!psi.is_zero_on_non_l1_connected());
        let rt = psi.rectangle_transform().unwrap();
        assert!(rt.is_zero_on_non_l1_connected());
    }

    #[test]
    fn a_phi_examples() {
        let phi = Interaction::ising(0.6, 2);
        let omega = ConstantField(1);
        let (v, tail) = phi.a_phi(&omega, 2).unwrap();
        // exactly the d anchored unit pairs contribute -(-beta) each
        assert_abs_diff_eq!(v, 2.0 * 0.6, epsilon = 1e-12);
        assert_eq!(tail, 0.0);
        let (z, zt) = Interaction::zero(2).a_phi(&omega, 2).unwrap();
        assert_eq!((z, zt), (0.0, 0.0));
    }

    #[test]
    fn a_phi_symmetric_under_global_flip_for_symmetric_interaction() {
        let phi = Interaction::ising(0.5, 2);
        let window = crate::lattice::Rectangle::centered_box(2, 2).to_site_set();
        let pattern = SpinPattern::new(window.clone(), 0b1011011001101);
        let (a1, _) = phi.a_phi(&pattern, 1).unwrap();
        let flipped = pattern.flipped();
        let (a2, _) = phi.a_phi(&flipped, 1).unwrap();
        assert_abs_diff_eq!(a1, a2, epsilon = 1e-12);
    }

    #[test]
    fn materialized_kernel_matches_kernel_hamiltonian() {
        let kernel = TwoBodyKernel::new(KernelNorm::LInf, 0.05, 5.0, 3).unwrap();
        let with_kernel = Interaction::zero(2).with_kernel(kernel).unwrap();
        let materialized = with_kernel.materialize_kernel(1e-12).unwrap();
        assert!(materialized.kernel().is_none());
        assert!(materialized.discarded_tail() > 0.0);
        let volume = crate::lattice::Rectangle::cube(2, 2).to_site_set();
        let omega = ConstantField(1);
        let (h_kernel, _) = with_kernel.hamiltonian(&volume, &omega, 3).unwrap();
        let (h_mat, _) = materialized.hamiltonian(&volume, &omega, 3).unwrap();
        assert_abs_diff_eq!(h_kernel, h_mat, epsilon = 1e-10);
    }

    #[test]
    fn spin_product_kernel_is_flip_symmetric_and_not_l1_supported() {
        let kernel = TwoBodyKernel::new(KernelNorm::Euclid, 0.1, 4.0, 2).unwrap();
        let phi = Interaction::ising(0.3, 2).with_kernel(kernel).unwrap();
        assert!(phi.is_spin_flip_symmetric());
        assert!(!phi.is_zero_on_non_l1_connected());
        assert!(Interaction::ising(0.3, 2).is_zero_on_non_l1_connected());
    }

    #[test]
    fn symmetrized_random_table_is_flip_symmetric() {
        let shape = SiteSet::from_coords(&[&[0, 0], &[1, 0], &[1, 1]]).unwrap();
        let raw: Vec<f64> = (0..8).map(|i| ((i * 37 + 11) % 17) as f64 / 7.0 - 1.0).collect();
        let sym: Vec<f64> = (0..8)
            .map(|i| (raw[i] + raw[flip_index(i as u64, 3) as usize]) / 2.0)
            .collect();
        let lf = LocalFunction::new(shape, sym).unwrap();
        assert!(lf.is_spin_flip_symmetric());
    }

    #[test]
    fn kernel_requires_summability() {
        let kernel = TwoBodyKernel::new(KernelNorm::LInf, 1.0, 1.5, 2).unwrap();
        assert!(Interaction::zero(2).with_kernel(kernel).is_err());
    }
}
