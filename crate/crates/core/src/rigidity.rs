//! Almost-invariant probability measures on the dual torus `ℤ² ^ = T²`
//! under `SL₂(ℤ)`, discretized on the grid `(ℤ/L)²`.
//!
//! Cell `(i, j)` is the point `(i/L, j/L)`. The dual action of `A` is
//! `χ ↦ (Aᵀ)⁻¹χ`, an exact permutation of the grid. Distances between
//! measures are full L¹ norms (twice total variation).

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const MASS_TOL: f64 = 1e-12;

/// A 2×2 integer matrix of determinant one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix([[i64; 2]; 2]);

impl IntMatrix {
    pub fn new(m: [[i64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det != 1 {
            return domain(format!("determinant is {det}, expected 1"));
        }
        Ok(IntMatrix(m))
    }

    pub fn identity() -> Self {
        IntMatrix([[1, 0], [0, 1]])
    }

    /// `L(r) = [[1, 0], [r, 1]]`.
    pub fn lower(r: i64) -> Self {
        IntMatrix([[1, 0], [r, 1]])
    }

    /// `U(r) = [[1, r], [0, 1]]`.
    pub fn upper(r: i64) -> Self {
        IntMatrix([[1, r], [0, 1]])
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.0
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let (a, b) = (self.0, other.0);
        IntMatrix([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn inverse(&self) -> IntMatrix {
        let [[a, b], [c, d]] = self.0;
        IntMatrix([[d, -b], [-c, a]])
    }

    pub fn transpose(&self) -> IntMatrix {
        let [[a, b], [c, d]] = self.0;
        IntMatrix([[a, c], [b, d]])
    }

    /// `(Aᵀ)⁻¹`, the matrix acting on characters.
    pub fn dual(&self) -> IntMatrix {
        self.transpose().inverse()
    }
}

/// `F₁(r) = {L(±r), U(±r)}`.
pub fn elementary_set(r: i64) -> Vec<IntMatrix> {
    vec![
        IntMatrix::lower(r),
        IntMatrix::lower(-r),
        IntMatrix::upper(r),
        IntMatrix::upper(-r),
    ]
}

/// An element `h = (m₁, m₂)` of `ℤ²`, acting on `T²` as the character `χ ↦ e^{2πi⟨h,χ⟩}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character(pub i64, pub i64);

/// `F₂ = {±e₁, ±e₂}`.
pub fn unit_characters() -> Vec<Character> {
    vec![
        Character(1, 0),
        Character(-1, 0),
        Character(0, 1),
        Character(0, -1),
    ]
}

/// A probability measure on the grid `(ℤ/L)²`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    resolution: usize,
    weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    i: usize,
    j: usize,
    weight: f64,
}

impl GridMeasure {
    /// Weights in row-major order `(i, j) ↦ i·L + j`.
    pub fn new(resolution: usize, weights: Vec<f64>) -> Result<Self> {
        if resolution == 0 {
            return domain("resolution must be positive");
        }
        if weights.len() != resolution * resolution {
            return domain(format!("expected {} weights", resolution * resolution));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return domain(format!("weight {w} is not a nonnegative number"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return domain(format!("weights sum to {total}, expected 1"));
        }
        Ok(GridMeasure {
            resolution,
            weights,
        })
    }

    /// Rescales nonnegative weights to total mass one.
    pub fn normalized(resolution: usize, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return domain("weights have no positive mass");
        }
        weights.iter_mut().for_each(|w| *w /= total);
        let sum: f64 = weights.iter().sum();
        // absorb the rounding of the division into the largest cell
        if let Some(k) = (0..weights.len()).max_by(|&a, &b| weights[a].total_cmp(&weights[b])) {
            weights[k] += 1.0 - sum;
        }
        Self::new(resolution, weights)
    }

    pub fn point(resolution: usize, i: usize, j: usize) -> Result<Self> {
        let mut w = vec![0.0; resolution * resolution];
        if i >= resolution || j >= resolution {
            return domain("grid cell out of range");
        }
        w[i * resolution + j] = 1.0;
        Self::new(resolution, w)
    }

    /// `δ₀`.
    pub fn dirac(resolution: usize) -> Self {
        Self::point(resolution, 0, 0).expect("origin is a grid cell")
    }

    pub fn uniform(resolution: usize) -> Self {
        let n = resolution * resolution;
        Self::normalized(resolution, vec![1.0; n]).expect("uniform weights are valid")
    }

    /// `(1 − t)·self + t·other`.
    pub fn mix(&self, other: &GridMeasure, t: f64) -> Result<Self> {
        if self.resolution != other.resolution {
            return domain("measures live on different grids");
        }
        if !(0.0..=1.0).contains(&t) {
            return domain("mixing weight must lie in [0, 1]");
        }
        let w = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (1.0 - t) * a + t * b)
            .collect();
        Self::normalized(self.resolution, w)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.resolution + j]
    }

    /// Mass at the origin.
    pub fn beta(&self) -> f64 {
        self.weights[0]
    }

    pub fn l1_distance(&self, other: &GridMeasure) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Reads `i,j,weight` rows (with header); unlisted cells get zero weight.
    pub fn read_csv<R: Read>(resolution: usize, reader: R) -> Result<Self> {
        let mut w = vec![0.0; resolution * resolution];
        let mut rdr = csv::Reader::from_reader(reader);
        for row in rdr.deserialize() {
            let row: CsvRow = row.map_err(|e| Error::Invalid(format!("measure CSV: {e}")))?;
            if row.i >= resolution || row.j >= resolution {
                return domain(format!(
                    "cell ({}, {}) outside a grid of size {resolution}",
                    row.i, row.j
                ));
            }
            w[row.i * resolution + row.j] += row.weight;
        }
        Self::new(resolution, w)
    }

    /// Writes the nonzero cells as `i,j,weight` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let l = self.resolution;
        for (k, &weight) in self.weights.iter().enumerate().filter(|(_, w)| **w != 0.0) {
            wtr.serialize(CsvRow {
                i: k / l,
                j: k % l,
                weight,
            })
            .map_err(|e| Error::Invalid(format!("measure CSV: {e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Push-forward of `μ` under `χ ↦ (Aᵀ)⁻¹χ mod 1`.
pub fn dual_action(a: &IntMatrix, mu: &GridMeasure) -> GridMeasure {
    let l = mu.resolution as i64;
    let [[p, q], [r, s]] = a.dual().entries();
    let mut w = vec![0.0; mu.weights.len()];
    for (k, &m) in mu.weights.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let (i, j) = ((k as i64) / l, (k as i64) % l);
        let ni = (p * i + q * j).rem_euclid(l);
        let nj = (r * i + s * j).rem_euclid(l);
        w[(ni * l + nj) as usize] += m;
    }
    GridMeasure {
        resolution: mu.resolution,
        weights: w,
    }
}

/// `‖hμ − μ‖ = Σ_χ μ(χ)·|e^{2πi⟨h,χ⟩} − 1|`.
pub fn character_defect(h: Character, mu: &GridMeasure) -> f64 {
    let l = mu.resolution as i64;
    mu.weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(k, &w)| {
            let (i, j) = ((k as i64) / l, (k as i64) % l);
            let phase = (h.0 * i + h.1 * j).rem_euclid(l) as f64 / l as f64;
            w * 2.0 * (PI * phase).sin().abs()
        })
        .sum()
}

/// `‖A·μ − μ‖` in L¹.
pub fn action_defect(a: &IntMatrix, mu: &GridMeasure) -> f64 {
    dual_action(a, mu).l1_distance(mu)
}

/// Largest character or action defect over `F₁ ∪ F₂`.
pub fn invariance_defect(f1: &[IntMatrix], f2: &[Character], mu: &GridMeasure) -> f64 {
    let actions = f1.iter().map(|a| action_defect(a, mu));
    let chars = f2.iter().map(|&h| character_defect(h, mu));
    actions.chain(chars).fold(0.0, f64::max)
}

/// The defect used throughout: `F₁(1) ∪ F₂`.
pub fn standard_defect(mu: &GridMeasure) -> f64 {
    invariance_defect(&elementary_set(1), &unit_characters(), mu)
}

/// Result of [`zero_mass_adversary`].
#[derive(Clone, Debug, Serialize)]
pub struct AdversaryReport {
    pub resolution: usize,
    pub trials: usize,
    pub seed: u64,
    pub min_defect: f64,
    /// Trial that produced the minimum.
    pub best_trial: usize,
    #[serde(skip)]
    pub best: GridMeasure,
}

/// Defect of the measure with the given (unnormalized, possibly repeated)
/// cell weights. The defect is positively homogeneous, so it is computed on
/// the raw weights and divided by the total mass.
fn sparse_defect(resolution: usize, cells: &[(usize, f64)]) -> f64 {
    let l = resolution as i64;
    let total: f64 = cells.iter().map(|c| c.1).sum();
    let mut worst = 0.0f64;
    for h in unit_characters() {
        let d: f64 = cells
            .iter()
            .map(|&(k, w)| {
                let (i, j) = ((k as i64) / l, (k as i64) % l);
                let phase = (h.0 * i + h.1 * j).rem_euclid(l) as f64 / l as f64;
                w * 2.0 * (PI * phase).sin().abs()
            })
            .sum();
        worst = worst.max(d);
    }
    let mut signed: Vec<(usize, f64)> = Vec::with_capacity(2 * cells.len());
    for a in elementary_set(1) {
        let [[p, q], [r, s]] = a.dual().entries();
        signed.clear();
        for &(k, w) in cells {
            let (i, j) = ((k as i64) / l, (k as i64) % l);
            let moved = (p * i + q * j).rem_euclid(l) * l + (r * i + s * j).rem_euclid(l);
            signed.push((k, w));
            signed.push((moved as usize, -w));
        }
        signed.sort_unstable_by_key(|c| c.0);
        let d: f64 = signed
            .chunk_by(|x, y| x.0 == y.0)
            .map(|run| run.iter().map(|c| c.1).sum::<f64>().abs())
            .sum();
        worst = worst.max(d);
    }
    worst / total
}

/// Greedy coordinate descent on a sparse measure: rescale a cell, drop it,
/// or move its mass to a neighbouring cell (never onto the origin) while
/// the defect drops.
fn descend(
    resolution: usize,
    mut cells: Vec<(usize, f64)>,
    sweeps: usize,
) -> (Vec<(usize, f64)>, f64) {
    let l = resolution;
    let mut best = sparse_defect(l, &cells);
    for _ in 0..sweeps {
        let mut improved = false;
        for idx in 0..cells.len() {
            let (k, _) = cells[idx];
            let (i, j) = (k / l, k % l);
            let neighbours = [
                ((i + 1) % l) * l + j,
                ((i + l - 1) % l) * l + j,
                i * l + (j + 1) % l,
                i * l + (j + l - 1) % l,
            ];
            let mut candidates: Vec<Vec<(usize, f64)>> = Vec::with_capacity(7);
            for factor in [0.0, 0.5, 2.0] {
                let mut c = cells.clone();
                c[idx].1 *= factor;
                candidates.push(c);
            }
            for target in neighbours.into_iter().filter(|&t| t != 0) {
                let mut c = cells.clone();
                c[idx].0 = target;
                candidates.push(c);
            }
            for cand in candidates {
                if cand.iter().all(|c| c.1 == 0.0) {
                    continue;
                }
                let d = sparse_defect(l, &cand);
                if d < best {
                    best = d;
                    cells = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    (cells, best)
}

fn to_measure(resolution: usize, cells: &[(usize, f64)]) -> GridMeasure {
    let mut w = vec![0.0; resolution * resolution];
    for &(k, m) in cells {
        w[k] += m;
    }
    GridMeasure::normalized(resolution, w).expect("trial measures have positive mass")
}

/// One adversarial trial: a dense measure with exponential weights (a
/// quarter of the time), otherwise up to eight random cells refined by
/// coordinate descent. The origin never receives mass.
fn trial(resolution: usize, rng: &mut ChaCha8Rng) -> (GridMeasure, f64) {
    let n = resolution * resolution;
    if rng.gen_bool(0.25) {
        let w: Vec<f64> = (0..n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    -rng.gen::<f64>().max(f64::MIN_POSITIVE).ln()
                }
            })
            .collect();
        let mu = GridMeasure::normalized(resolution, w).expect("exponential weights are positive");
        let d = standard_defect(&mu);
        return (mu, d);
    }
    let support = rng.gen_range(1..=8);
    let cells: Vec<(usize, f64)> = (0..support)
        .map(|_| (rng.gen_range(1..n), rng.gen::<f64>() + 1e-3))
        .collect();
    let (cells, _) = descend(resolution, cells, 3);
    let mu = to_measure(resolution, &cells);
    let d = standard_defect(&mu);
    (mu, d)
}

/// Searches for a measure with no mass at the origin whose `F₁(1) ∪ F₂`
/// defect is small. Trial `t` draws from its own ChaCha stream of `seed`,
/// so the result does not depend on scheduling.
pub fn zero_mass_adversary(resolution: usize, trials: usize, seed: u64) -> Result<AdversaryReport> {
    if resolution < 4 {
        return domain("resolution must be at least 4");
    }
    if trials == 0 {
        return domain("at least one trial is required");
    }
    let (best_trial, best, min_defect) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let (mu, d) = trial(resolution, &mut rng);
            (t, mu, d)
        })
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
        .expect("trials is positive");
    Ok(AdversaryReport {
        resolution,
        trials,
        seed,
        min_defect,
        best_trial,
        best,
    })
}

/// Concentration report for one measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TppReport {
    pub beta: f64,
    pub defect: f64,
    pub l1_distance: f64,
    pub bound_40delta: f64,
    pub pass: bool,
}

/// Checks `‖μ − δ₀‖ ≤ 40·δ(μ)` and `‖μ − δ₀‖ = 2(1 − β)`, which together give
/// `δ < ε/40 ⇒ ‖μ − δ₀‖ < ε`.
pub fn tpp_concentration(mu: &GridMeasure, eps: f64) -> Result<TppReport> {
    if !(eps > 0.0) {
        return domain("ε must be positive");
    }
    let beta = mu.beta();
    let defect = standard_defect(mu);
    let l1_distance = mu.l1_distance(&GridMeasure::dirac(mu.resolution));
    let bound_40delta = 40.0 * defect;
    let decomposition = (l1_distance - 2.0 * (1.0 - beta)).abs() <= 1e-12;
    let implication = defect >= eps / 40.0 || l1_distance < eps;
    let pass = decomposition && implication && l1_distance <= bound_40delta + 1e-12;
    Ok(TppReport {
        beta,
        defect,
        l1_distance,
        bound_40delta,
        pass,
    })
}

/// `μ_β = (1 − β)δ₀ + β·δ_{(1/2, 1/2)}` on an even grid.
pub fn far_mass_family(resolution: usize, beta: f64) -> Result<GridMeasure> {
    if !resolution.is_multiple_of(2) {
        return domain("resolution must be even");
    }
    let far = GridMeasure::point(resolution, resolution / 2, resolution / 2)?;
    GridMeasure::dirac(resolution).mix(&far, beta)
}
