//! Seeded random finite interactions, used by property suites and the CLI's
//! randomized equivalence checks.

use rand::Rng;

use crate::lattice::{Point, Rectangle, SiteSet};
use crate::spins::flip_index;

use super::{Interaction, LocalFunction};

/// Knobs for `random_finite_interaction`.
#[derive(Debug, Clone)]
pub struct RandomInteractionParams {
    pub dim: usize,
    /// Number of local shapes to draw.
    pub shapes: usize,
    /// Largest shape cardinality (>= 1).
    pub max_sites: usize,
    /// Sites are drawn from the centered box of this radius (diam <= 2r).
    pub spread: u32,
    /// Force every shape to be `‖·‖₁`-connected.
    pub l1_connected: bool,
    /// Symmetrize every table under the global spin flip.
    pub spin_flip_symmetric: bool,
    /// If set, rescale so `‖Φ‖` hits this value (when nonzero).
    pub target_norm_abs: Option<f64>,
}

impl Default for RandomInteractionParams {
    fn default() -> Self {
        Self {
            dim: 2,
            shapes: 3,
            max_sites: 3,
            spread: 1,
            l1_connected: false,
            spin_flip_symmetric: false,
            target_norm_abs: None,
        }
    }
}

/// Draws a finite-support translation-invariant interaction.
pub fn random_finite_interaction<R: Rng>(rng: &mut R, params: &RandomInteractionParams) -> Interaction {
    let d = params.dim;
    let mut phi = Interaction::zero(d);
    let box_sites = Rectangle::centered_box(d, params.spread as i32).sites();
    for _ in 0..params.shapes {
        let shape = loop {
            let n_sites = rng.gen_range(1..=params.max_sites);
            let candidate = if params.l1_connected {
                random_l1_connected(rng, d, n_sites)
            } else {
                let mut pts = Vec::with_capacity(n_sites);
                for _ in 0..n_sites {
                    pts.push(box_sites[rng.gen_range(0..box_sites.len())]);
                }
                SiteSet::new(pts).unwrap()
            };
            if !params.l1_connected || candidate.is_l1_connected() {
                break candidate;
            }
        };
        let n = shape.len();
        let mut table: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if params.spin_flip_symmetric {
            table = (0..table.len())
                .map(|i| (table[i] + table[flip_index(i as u64, n) as usize]) / 2.0)
                .collect();
        }
        phi.add_local(LocalFunction::new(shape, table).unwrap());
    }
    if let Some(target) = params.target_norm_abs {
        let current = phi.norm_abs(1e-12).expect("finite interactions always sum").value;
        if current > 0.0 {
            phi = phi.scaled(target / current);
        }
    }
    phi.set_label("random");
    phi
}

/// Random `‖·‖₁`-connected shape grown by unit steps.
fn random_l1_connected<R: Rng>(rng: &mut R, d: usize, n_sites: usize) -> SiteSet {
    let mut cells = vec![Point::origin(d)];
    let offsets = crate::lattice::unit_offsets(d);
    while cells.len() < n_sites {
        let base = cells[rng.gen_range(0..cells.len())];
        let step = offsets[rng.gen_range(0..offsets.len())];
        let candidate = base + step;
        if !cells.contains(&candidate) {
            cells.push(candidate);
        }
    }
    SiteSet::new(cells).unwrap()
}

impl Interaction {
    /// Multiplies every finite table (and kernel amplitude) by `factor`.
    pub fn scaled(&self, factor: f64) -> Interaction {
        let mut out = self.clone();
        for lf in out.finite.values_mut() {
            for v in lf.table.iter_mut() {
                *v *= factor;
            }
        }
        if let Some(k) = &mut out.kernel {
            k.amplitude *= factor;
        }
        out
    }
}
