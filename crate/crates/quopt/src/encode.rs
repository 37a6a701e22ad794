//! QUBO and Ising encodings of TSP subproblems, automated penalty
//! selection and spectral scaling.
//!
//! The one-hot layout fixes the start node at position 0 and places the
//! remaining m-1 nodes over m-1 positions, giving (m-1)^2 binary variables.
//! Variable (v, t) with v, t in 1..m-1 sits at index (v-1)*(m-1) + (t-1).
//! Spin convention: x = (1 - z) / 2, i.e. bit 1 maps to spin -1.

use crate::error::{Error, Result};
use crate::instances::{solve_tsp_exact, Tour, TspInstance};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Hard ceiling on exhaustive enumerations, independent of configuration.
pub const MAX_EXHAUSTIVE_QUBITS: usize = 24;

/// Penalized quadratic binary model, upper-triangular coefficients.
///
/// Energy of a bit vector x is `x^T Q x + offset`, with linear terms on the
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    nvars: usize,
    coeffs: Vec<f64>,
    pub offset: f64,
    /// Constraint penalty used to build this model.
    pub penalty: f64,
}

impl Qubo {
    pub fn zeros(nvars: usize, penalty: f64) -> Self {
        Qubo {
            nvars,
            coeffs: vec![0.0; nvars * nvars],
            offset: 0.0,
            penalty,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Coefficient of `x_i x_j` (requires i <= j; i == j is the linear term).
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j && j < self.nvars);
        self.coeffs[i * self.nvars + j]
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i <= j && j < self.nvars);
        self.coeffs[i * self.nvars + j] += value;
    }

    /// Energy of an explicit bit assignment.
    pub fn energy(&self, bits: &[bool]) -> f64 {
        debug_assert_eq!(bits.len(), self.nvars);
        let mut e = self.offset;
        for i in 0..self.nvars {
            if !bits[i] {
                continue;
            }
            e += self.coeff(i, i);
            for j in (i + 1)..self.nvars {
                if bits[j] {
                    e += self.coeff(i, j);
                }
            }
        }
        e
    }

    /// Energy of the assignment encoded by the set bits of `mask`
    /// (bit k of the mask is variable k).
    pub fn energy_mask(&self, mask: usize) -> f64 {
        let mut e = self.offset;
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            e += self.coeff(i, i);
            let mut inner = rest;
            while inner != 0 {
                let j = inner.trailing_zeros() as usize;
                inner &= inner - 1;
                e += self.coeff(i, j);
            }
        }
        e
    }
}

/// Diagonal spin model: energy of z in {-1, +1}^n is
/// `sum_i h_i z_i + sum_{i<j} J_ij z_i z_j + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    pub n: usize,
    pub h: Vec<f64>,
    /// Couplings keyed by (i, j) with i < j; zero entries are dropped.
    pub couplings: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
    /// Cumulative multiplicative factor applied by scaling (1 if unscaled).
    pub scale: f64,
    /// Constraint penalty inherited from the source model.
    pub penalty: f64,
}

impl IsingModel {
    pub fn new(h: Vec<f64>, couplings: BTreeMap<(usize, usize), f64>, offset: f64) -> Self {
        let n = h.len();
        IsingModel {
            n,
            h,
            couplings,
            offset,
            scale: 1.0,
            penalty: 0.0,
        }
    }

    /// Serializable document form for reports and debugging.
    pub fn to_document(&self) -> IsingDocument {
        IsingDocument {
            n: self.n,
            h: self.h.clone(),
            j: self
                .couplings
                .iter()
                .map(|(&(i, j), &value)| CouplingEntry { i, j, value })
                .collect(),
            offset: self.offset,
            scale: self.scale,
            penalty: self.penalty,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsingDocument {
    pub n: usize,
    pub h: Vec<f64>,
    pub j: Vec<CouplingEntry>,
    pub offset: f64,
    pub scale: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// How the constraint penalty is selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyStrategy {
    /// Bisect for the smallest penalty whose exhaustive ground state decodes
    /// to an optimal tour, then apply the safety factor lambda.
    ExactMinSearch,
    /// Characteristic-length fallback: bounding-box side times a factor.
    BoundingBox,
}

impl PenaltyStrategy {
    pub fn id(&self) -> &'static str {
        match self {
            PenaltyStrategy::ExactMinSearch => "exact-min-search",
            PenaltyStrategy::BoundingBox => "bounding-box",
        }
    }
}

/// How the Hamiltonian is rescaled before optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingStrategy {
    /// Align the exact spectral width with the mixer width 2n.
    ExactWidth,
    /// Align a calibrated Gershgorin-style upper bound with 2n.
    GershgorinBound,
    /// Leave the model unscaled.
    #[serde(rename = "none")]
    Unscaled,
}

impl ScalingStrategy {
    pub fn id(&self) -> &'static str {
        match self {
            ScalingStrategy::ExactWidth => "exact-width",
            ScalingStrategy::GershgorinBound => "gershgorin-bound",
            ScalingStrategy::Unscaled => "none",
        }
    }
}

/// Knobs for penalty selection and scaling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodingConfig {
    pub penalty_strategy: PenaltyStrategy,
    /// Safety factor applied to the searched minimum penalty.
    pub lambda: f64,
    /// Multiplier for the bounding-box fallback penalty.
    pub bbox_factor: f64,
    pub scaling_strategy: ScalingStrategy,
    /// Factor applied to the Gershgorin bound to estimate the true width.
    pub calibration: f64,
    /// Cap on qubit counts for exhaustive routines.
    pub qubit_cap: usize,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        EncodingConfig {
            penalty_strategy: PenaltyStrategy::ExactMinSearch,
            lambda: 1.2,
            bbox_factor: 1.0,
            scaling_strategy: ScalingStrategy::ExactWidth,
            calibration: 0.5,
            qubit_cap: 20,
        }
    }
}

impl EncodingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0) {
            return Err(Error::Config(format!(
                "lambda must exceed 1, got {}",
                self.lambda
            )));
        }
        if !(self.calibration > 0.0 && self.calibration <= 1.0) {
            return Err(Error::Config(format!(
                "calibration must lie in (0, 1], got {}",
                self.calibration
            )));
        }
        if self.qubit_cap > MAX_EXHAUSTIVE_QUBITS {
            return Err(Error::Config(format!(
                "qubit cap {} exceeds hard limit {MAX_EXHAUSTIVE_QUBITS}",
                self.qubit_cap
            )));
        }
        if !(self.bbox_factor > 0.0) {
            return Err(Error::Config(format!(
                "bounding-box factor must be positive, got {}",
                self.bbox_factor
            )));
        }
        Ok(())
    }
}

/// Non-start nodes in canonical order; entry v-1 is the node written v.
fn canonical_nodes(t: &TspInstance) -> Vec<usize> {
    (0..t.len()).filter(|&v| v != t.start).collect()
}

/// One-hot TSP encoding with (m-1)^2 variables.
///
/// Objective terms sum the distances of consecutive positions (including
/// the fixed hops from and to the start node); each one-hot constraint
/// group contributes `P * (1 - sum x)^2`. For every feasible assignment the
/// energy equals the closed tour length exactly.
pub fn tsp_to_qubo(t: &TspInstance, penalty: f64) -> Result<Qubo> {
    let m = t.len();
    if m < 2 {
        return Err(Error::Invalid("TSP encoding needs at least 2 nodes".into()));
    }
    if !(penalty > 0.0) || !penalty.is_finite() {
        return Err(Error::Config(format!(
            "penalty must be positive, got {penalty}"
        )));
    }
    let k = m - 1;
    let nodes = canonical_nodes(t);
    let d = &t.distances;
    let idx = |v: usize, pos: usize| v * k + pos; // v, pos are 0-based here
    let mut q = Qubo::zeros(k * k, penalty);

    // Hop from the start into position 1 and back out of position m-1.
    for v in 0..k {
        q.add(idx(v, 0), idx(v, 0), d[t.start][nodes[v]]);
        q.add(idx(v, k - 1), idx(v, k - 1), d[nodes[v]][t.start]);
    }
    // Hops between consecutive interior positions.
    for pos in 0..k.saturating_sub(1) {
        for u in 0..k {
            for v in 0..k {
                if u == v {
                    continue;
                }
                let (a, b) = (idx(u, pos), idx(v, pos + 1));
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                q.add(lo, hi, d[nodes[u]][nodes[v]]);
            }
        }
    }
    // One-hot groups: each position holds exactly one node...
    for pos in 0..k {
        q.offset += penalty;
        for v in 0..k {
            q.add(idx(v, pos), idx(v, pos), -penalty);
            for w in (v + 1)..k {
                q.add(idx(v, pos), idx(w, pos), 2.0 * penalty);
            }
        }
    }
    // ...and each node occupies exactly one position.
    for v in 0..k {
        q.offset += penalty;
        for pos in 0..k {
            q.add(idx(v, pos), idx(v, pos), -penalty);
            for qos in (pos + 1)..k {
                q.add(idx(v, pos), idx(v, qos), 2.0 * penalty);
            }
        }
    }
    Ok(q)
}

/// Converts a QUBO to the spin form via x = (1 - z) / 2.
///
/// Energies agree assignment by assignment; zero couplings are dropped.
pub fn qubo_to_ising(q: &Qubo) -> IsingModel {
    let n = q.nvars();
    let mut h = vec![0.0; n];
    let mut couplings: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut offset = q.offset;
    for i in 0..n {
        let qii = q.coeff(i, i);
        h[i] -= qii / 2.0;
        offset += qii / 2.0;
        for j in (i + 1)..n {
            let qij = q.coeff(i, j);
            if qij == 0.0 {
                continue;
            }
            *couplings.entry((i, j)).or_insert(0.0) += qij / 4.0;
            h[i] -= qij / 4.0;
            h[j] -= qij / 4.0;
            offset += qij / 4.0;
        }
    }
    couplings.retain(|_, v| *v != 0.0);
    let mut im = IsingModel::new(h, couplings, offset);
    im.penalty = q.penalty;
    im
}

/// Exact diagonal energy of one computational basis state.
///
/// Bit k of `basis_index` is qubit k and maps to spin z = 1 - 2*bit.
pub fn ising_energy(im: &IsingModel, basis_index: usize) -> Result<f64> {
    if im.n >= usize::BITS as usize || basis_index >= (1usize << im.n) {
        return Err(Error::Invalid(format!(
            "basis index {basis_index} out of range for {} qubits",
            im.n
        )));
    }
    let spin = |q: usize| 1.0 - 2.0 * ((basis_index >> q) & 1) as f64;
    let mut e = im.offset;
    for (i, &hi) in im.h.iter().enumerate() {
        e += hi * spin(i);
    }
    for (&(i, j), &jij) in &im.couplings {
        e += jij * spin(i) * spin(j);
    }
    Ok(e)
}

/// Max minus min over all 2^n diagonal energies.
pub fn exact_spectral_width(im: &IsingModel, qubit_cap: usize) -> Result<f64> {
    let cap = qubit_cap.min(MAX_EXHAUSTIVE_QUBITS);
    if im.n > cap {
        return Err(Error::SizeCap {
            what: "exact spectral width",
            limit: cap,
            requested: im.n,
        });
    }
    let couplings: Vec<(usize, usize, f64)> =
        im.couplings.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for z in 0usize..(1 << im.n) {
        let e = diagonal_energy(&im.h, &couplings, im.offset, z);
        min = min.min(e);
        max = max.max(e);
    }
    Ok(max - min)
}

pub(crate) fn diagonal_energy(
    h: &[f64],
    couplings: &[(usize, usize, f64)],
    offset: f64,
    basis_index: usize,
) -> f64 {
    let mut e = offset;
    for (i, &hi) in h.iter().enumerate() {
        e += if (basis_index >> i) & 1 == 0 { hi } else { -hi };
    }
    for &(i, j, jij) in couplings {
        let same = ((basis_index >> i) ^ (basis_index >> j)) & 1 == 0;
        e += if same { jij } else { -jij };
    }
    e
}

/// Row-sum upper bound on the diagonal spectrum's extent:
/// `2 * (sum |h| + sum |J|)`.
pub fn bound_spectral_width(im: &IsingModel) -> f64 {
    let habs: f64 = im.h.iter().map(|v| v.abs()).sum();
    let jabs: f64 = im.couplings.values().map(|v| v.abs()).sum();
    2.0 * (habs + jabs)
}

/// Rescales the model so its spectral width lines up with the X-mixer
/// width 2n.
///
/// The divisor is the exact width or the calibrated Gershgorin bound,
/// depending on the strategy; `Unscaled` returns the model as is.
pub fn scale_ising(im: &IsingModel, cfg: &EncodingConfig) -> Result<IsingModel> {
    let width = match cfg.scaling_strategy {
        ScalingStrategy::Unscaled => return Ok(im.clone()),
        ScalingStrategy::ExactWidth => exact_spectral_width(im, cfg.qubit_cap)?,
        ScalingStrategy::GershgorinBound => cfg.calibration * bound_spectral_width(im),
    };
    if width <= 0.0 {
        return Err(Error::Degenerate(
            "spectral width is zero; nothing to scale".into(),
        ));
    }
    let s = 2.0 * im.n as f64 / width;
    let mut scaled = im.clone();
    for h in &mut scaled.h {
        *h *= s;
    }
    for v in scaled.couplings.values_mut() {
        *v *= s;
    }
    scaled.offset *= s;
    scaled.scale = im.scale * s;
    Ok(scaled)
}

/// Side length of the square bounding box over the non-start nodes, times
/// the configured factor. Falls back to the maximum pairwise distance when
/// coordinates are missing or the box is degenerate.
pub fn penalty_from_bbox(t: &TspInstance, cfg: &EncodingConfig) -> f64 {
    let side = t.coords.as_ref().map(|coords| {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for (v, &(x, y)) in coords.iter().enumerate() {
            if v == t.start {
                continue;
            }
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        (max_x - min_x).max(max_y - min_y)
    });
    let length = match side {
        Some(s) if s > 0.0 => s,
        _ => max_distance(t),
    };
    cfg.bbox_factor * length
}

fn max_distance(t: &TspInstance) -> f64 {
    t.distances.iter().flatten().copied().fold(0.0, f64::max)
}

/// Smallest penalty for which every exhaustive ground state of the encoded
/// model decodes to an optimal tour, found by bisection to a tolerance of
/// `1e-3` of the bracket top `m * max_distance`.
pub fn find_min_penalty(t: &TspInstance, cfg: &EncodingConfig) -> Result<f64> {
    let m = t.len();
    if m < 2 {
        return Err(Error::Invalid(
            "penalty search needs at least 2 nodes".into(),
        ));
    }
    let nvars = (m - 1) * (m - 1);
    let cap = cfg.qubit_cap.min(MAX_EXHAUSTIVE_QUBITS);
    if nvars > cap {
        return Err(Error::SizeCap {
            what: "exhaustive penalty search",
            limit: cap,
            requested: nvars,
        });
    }
    let (_, optimal) = solve_tsp_exact(t)?;
    let p_hi = m as f64 * max_distance(t);
    if !(p_hi > 0.0) {
        // All distances are zero: any positive penalty separates the
        // feasible manifold.
        return Ok(0.0);
    }
    if !ground_state_is_optimal(t, p_hi, optimal)? {
        return Err(Error::Bracket(format!(
            "penalty {p_hi} does not produce an optimal feasible ground state"
        )));
    }
    let mut lo = 0.0;
    let mut hi = p_hi;
    let tol = 1e-3 * p_hi;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ground_state_is_optimal(t, mid, optimal)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// True when every assignment attaining the exhaustive minimum decodes to a
/// tour of optimal length.
fn ground_state_is_optimal(t: &TspInstance, penalty: f64, optimal: f64) -> Result<bool> {
    if penalty <= 0.0 {
        return Ok(false);
    }
    let m = t.len();
    let q = tsp_to_qubo(t, penalty)?;
    let states = 1usize << q.nvars();
    let mut min = f64::INFINITY;
    for mask in 0..states {
        min = min.min(q.energy_mask(mask));
    }
    let tie_tol = 1e-9 * min.abs().max(1.0);
    let len_tol = 1e-9 * optimal.abs().max(1.0);
    for mask in 0..states {
        if q.energy_mask(mask) > min + tie_tol {
            continue;
        }
        let bits = mask_bits(mask, q.nvars());
        match decode_bits(&bits, m) {
            Some(tour) => {
                let len = tour_length_canonical(t, &tour);
                if (len - optimal).abs() > len_tol {
                    return Ok(false);
                }
            }
            None => return Ok(false),
        }
    }
    Ok(true)
}

/// Expands the set bits of `mask` into a variable assignment.
pub fn mask_bits(mask: usize, nvars: usize) -> Vec<bool> {
    (0..nvars).map(|k| (mask >> k) & 1 == 1).collect()
}

/// Reads a one-hot assignment back into a tour in canonical indices
/// (0 is the start node, v in 1..m-1 the remaining nodes in ascending
/// order). Returns `None` when any position or node group is not exactly
/// one-hot.
pub fn decode_bits(bits: &[bool], m: usize) -> Option<Tour> {
    let k = m - 1;
    debug_assert_eq!(bits.len(), k * k);
    let mut order = vec![0usize; m];
    let mut node_at_pos = vec![usize::MAX; k];
    for pos in 0..k {
        let mut found = usize::MAX;
        for v in 0..k {
            if bits[v * k + pos] {
                if found != usize::MAX {
                    return None; // two nodes share this position
                }
                found = v;
            }
        }
        if found == usize::MAX {
            return None; // empty position
        }
        node_at_pos[pos] = found;
    }
    for v in 0..k {
        let count = (0..k).filter(|&pos| bits[v * k + pos]).count();
        if count != 1 {
            return None; // node missing or duplicated over positions
        }
    }
    for (pos, &v) in node_at_pos.iter().enumerate() {
        order[pos + 1] = v + 1;
    }
    Some(Tour::new(order))
}

/// Like [`decode_bits`] but mapped to the instance's local node indices.
pub fn decode_tour(t: &TspInstance, bits: &[bool]) -> Option<Tour> {
    let canonical = decode_bits(bits, t.len())?;
    let nodes = canonical_nodes(t);
    let order = canonical
        .order
        .iter()
        .map(|&v| if v == 0 { t.start } else { nodes[v - 1] })
        .collect();
    Some(Tour::new(order))
}

/// Closed tour length for a tour expressed in canonical indices.
fn tour_length_canonical(t: &TspInstance, tour: &Tour) -> f64 {
    let nodes = canonical_nodes(t);
    let mapped: Vec<usize> = tour
        .order
        .iter()
        .map(|&v| if v == 0 { t.start } else { nodes[v - 1] })
        .collect();
    crate::instances::closed_length(&t.distances, &mapped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::generate_random;
    use proptest::prelude::*;

    fn equilateral() -> TspInstance {
        TspInstance::from_matrix(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    fn random_tsp(m: usize, seed: u64) -> TspInstance {
        let inst = generate_random(m - 1, 100, (1, 10), 10.0, seed).unwrap();
        TspInstance::new(
            inst.distances.clone(),
            (0..m).collect(),
            0,
            inst.coords.clone(),
        )
        .unwrap()
    }

    /// All permutations of 1..m-1 as one-hot assignments with their tours.
    fn feasible_assignments(m: usize) -> Vec<(Vec<bool>, Vec<usize>)> {
        let k = m - 1;
        let mut result = Vec::new();
        let mut perm: Vec<usize> = (0..k).collect();
        loop {
            let mut bits = vec![false; k * k];
            for (pos, &v) in perm.iter().enumerate() {
                bits[v * k + pos] = true;
            }
            let mut order = vec![0usize];
            order.extend(perm.iter().map(|&v| v + 1));
            result.push((bits, order));
            // next lexicographic permutation
            let Some(i) = (0..k.saturating_sub(1))
                .rev()
                .find(|&i| perm[i] < perm[i + 1])
            else {
                break;
            };
            let j = (i + 1..k).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
        result
    }

    #[test]
    fn variable_counts_follow_the_square_rule() {
        for m in 2..=6 {
            let q = tsp_to_qubo(&random_tsp(m, m as u64), 10.0).unwrap();
            assert_eq!(q.nvars(), (m - 1) * (m - 1));
        }
        assert_eq!(tsp_to_qubo(&random_tsp(4, 0), 10.0).unwrap().nvars(), 9);
        assert_eq!(tsp_to_qubo(&equilateral(), 10.0).unwrap().nvars(), 4);
    }

    #[test]
    fn equilateral_ground_states_are_the_two_tours() {
        let q = tsp_to_qubo(&equilateral(), 10.0).unwrap();
        let mut min = f64::INFINITY;
        let mut argmins = Vec::new();
        for mask in 0..16usize {
            let e = q.energy_mask(mask);
            if e < min - 1e-12 {
                min = e;
                argmins = vec![mask];
            } else if (e - min).abs() <= 1e-12 {
                argmins.push(mask);
            }
        }
        assert!((min - 3.0).abs() < 1e-12, "minimum {min}");
        assert_eq!(argmins.len(), 2);
        for mask in argmins {
            assert!(decode_bits(&mask_bits(mask, 4), 3).is_some());
        }
    }

    #[test]
    fn feasible_energy_equals_tour_length() {
        for m in 3..=5usize {
            let t = random_tsp(m, 100 + m as u64);
            let q = tsp_to_qubo(&t, 50.0).unwrap();
            for (bits, order) in feasible_assignments(m) {
                let tour = Tour::new(order);
                let len = tour_length_canonical(&t, &tour);
                let e = q.energy(&bits);
                assert!((e - len).abs() < 1e-9, "m={m}: energy {e} vs length {len}");
            }
        }
    }

    #[test]
    fn single_variable_conversion() {
        let mut q = Qubo::zeros(1, 1.0);
        q.add(0, 0, 2.0);
        let im = qubo_to_ising(&q);
        assert_eq!(im.h, vec![-1.0]);
        assert!((im.offset - 1.0).abs() < 1e-15);
        assert!(im.couplings.is_empty());
        assert!((ising_energy(&im, 0).unwrap() - 0.0).abs() < 1e-15);
        assert!((ising_energy(&im, 1).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_qubo_converts_to_zero_model() {
        let mut q = Qubo::zeros(3, 1.0);
        q.offset = 4.5;
        let im = qubo_to_ising(&q);
        assert_eq!(im.h, vec![0.0; 3]);
        assert!(im.couplings.is_empty());
        assert!((im.offset - 4.5).abs() < 1e-15);
    }

    #[test]
    fn cross_term_conversion() {
        let mut q = Qubo::zeros(2, 1.0);
        q.add(0, 1, 4.0);
        let im = qubo_to_ising(&q);
        assert_eq!(im.couplings.get(&(0, 1)), Some(&1.0));
        assert_eq!(im.h, vec![-1.0, -1.0]);
        assert!((im.offset - 1.0).abs() < 1e-15);
        for mask in 0..4usize {
            let bits = mask_bits(mask, 2);
            assert!(
                (q.energy(&bits) - ising_energy(&im, mask).unwrap()).abs() < 1e-12,
                "mask {mask}"
            );
        }
    }

    #[test]
    fn min_penalty_on_equilateral() {
        let cfg = EncodingConfig::default();
        let t = equilateral();
        let p_min = find_min_penalty(&t, &cfg).unwrap();
        assert!(p_min > 0.0);
        // At lambda * P_min the ground state must decode to an optimal tour.
        let q = tsp_to_qubo(&t, 1.2 * p_min).unwrap();
        let (mask, _) =
            (0..16usize)
                .map(|m| (m, q.energy_mask(m)))
                .fold(
                    (0, f64::INFINITY),
                    |acc, item| if item.1 < acc.1 { item } else { acc },
                );
        let tour = decode_bits(&mask_bits(mask, 4), 3).expect("ground state must be feasible");
        assert!((tour_length_canonical(&t, &tour) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn min_penalty_scales_linearly_with_distances() {
        let cfg = EncodingConfig::default();
        let t = random_tsp(4, 7);
        let mut scaled_d = t.distances.clone();
        for row in &mut scaled_d {
            for v in row {
                *v *= 10.0;
            }
        }
        let t10 = TspInstance::new(scaled_d, t.origin_labels.clone(), 0, None).unwrap();
        let p1 = find_min_penalty(&t, &cfg).unwrap();
        let p10 = find_min_penalty(&t10, &cfg).unwrap();
        // Bisection tolerance is 1e-3 of the bracket top on each side.
        let tol = 1e-3
            * 10.0
            * (4.0
                * t10
                    .distances
                    .iter()
                    .flatten()
                    .fold(0.0f64, |a, &b| a.max(b)));
        assert!((p10 - 10.0 * p1).abs() < tol, "p1={p1} p10={p10}");
    }

    #[test]
    fn min_penalty_stays_in_band_across_sizes() {
        // Same bounding box, growing node counts: the searched penalty
        // stays within a factor-two band.
        let cfg = EncodingConfig::default();
        let mut values = Vec::new();
        for m in [3usize, 4, 5] {
            let t = random_tsp(m, 40 + m as u64);
            values.push(find_min_penalty(&t, &cfg).unwrap());
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi <= 2.0 * lo, "penalties {values:?} spread beyond 2x");
    }

    #[test]
    fn bbox_penalty_uses_longest_side() {
        let coords = vec![(0.0, 0.0), (10.0, 1.0), (3.0, 4.0), (7.0, 0.0)];
        let t = TspInstance::new(
            crate::instances::euclidean_matrix(&coords),
            vec![0, 1, 2, 3],
            0,
            Some(coords),
        )
        .unwrap();
        let cfg = EncodingConfig::default();
        // Non-start nodes span [3,10] x [0,4]: side 7.
        assert!((penalty_from_bbox(&t, &cfg) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn bbox_penalty_layout_and_factor() {
        let coords = vec![(0.0, 0.0), (0.0, 0.0), (10.0, 4.0)];
        let t = TspInstance::new(
            crate::instances::euclidean_matrix(&coords),
            vec![0, 1, 2],
            0,
            Some(coords),
        )
        .unwrap();
        let cfg = EncodingConfig::default();
        assert!((penalty_from_bbox(&t, &cfg) - 10.0).abs() < 1e-12);
        let cfg2 = EncodingConfig {
            bbox_factor: 2.0,
            ..EncodingConfig::default()
        };
        let coords3 = vec![(5.0, 5.0), (0.0, 0.0), (3.0, 3.0)];
        let t3 = TspInstance::new(
            crate::instances::euclidean_matrix(&coords3),
            vec![0, 1, 2],
            0,
            Some(coords3),
        )
        .unwrap();
        assert!((penalty_from_bbox(&t3, &cfg2) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn bbox_penalty_degenerate_falls_back_to_max_distance() {
        let coords = vec![(0.0, 0.0), (3.0, 4.0)];
        let t = TspInstance::new(
            crate::instances::euclidean_matrix(&coords),
            vec![0, 1],
            0,
            Some(coords),
        )
        .unwrap();
        let cfg = EncodingConfig::default();
        // One non-start node: box side 0, fall back to the max distance 5.
        assert!((penalty_from_bbox(&t, &cfg) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_width_single_qubit() {
        let im = IsingModel::new(vec![1.0], BTreeMap::new(), 0.0);
        assert!((exact_spectral_width(&im, 20).unwrap() - 2.0).abs() < 1e-12);
        assert!((bound_spectral_width(&im) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_width_two_qubits_with_coupling() {
        let mut couplings = BTreeMap::new();
        couplings.insert((0, 1), 1.0);
        let im = IsingModel::new(vec![1.0, 1.0], couplings, 0.0);
        // Energies over the four states: {3, -1, -1, -1}.
        assert!((exact_spectral_width(&im, 20).unwrap() - 4.0).abs() < 1e-12);
        assert!((bound_spectral_width(&im) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_model_has_zero_bound() {
        let im = IsingModel::new(vec![0.0, 0.0], BTreeMap::new(), 1.0);
        assert_eq!(bound_spectral_width(&im), 0.0);
        assert!(matches!(
            scale_ising(&im, &EncodingConfig::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn exact_scaling_aligns_width_with_mixer() {
        let cfg = EncodingConfig::default();
        // Single qubit with h = 1: width 2 = 2n already, scale 1.
        let im = IsingModel::new(vec![1.0], BTreeMap::new(), 0.0);
        let scaled = scale_ising(&im, &cfg).unwrap();
        assert!((scaled.scale - 1.0).abs() < 1e-12);
        assert_eq!(scaled.h, im.h);

        // 4-node TSP model (9 qubits): width becomes 2n = 18.
        let q = tsp_to_qubo(&random_tsp(4, 3), 25.0).unwrap();
        let im = qubo_to_ising(&q);
        let scaled = scale_ising(&im, &cfg).unwrap();
        let width = exact_spectral_width(&scaled, 20).unwrap();
        assert!((width - 18.0).abs() < 1e-9, "width {width}");
    }

    #[test]
    fn gershgorin_scaling_stays_below_mixer_width() {
        let cfg = EncodingConfig {
            scaling_strategy: ScalingStrategy::GershgorinBound,
            calibration: 1.0,
            ..EncodingConfig::default()
        };
        let q = tsp_to_qubo(&random_tsp(4, 9), 30.0).unwrap();
        let im = qubo_to_ising(&q);
        let scaled = scale_ising(&im, &cfg).unwrap();
        let width = exact_spectral_width(&scaled, 20).unwrap();
        assert!(width <= 2.0 * im.n as f64 + 1e-9, "width {width}");
    }

    #[test]
    fn decode_examples() {
        let tour = decode_bits(&[true, false, false, true], 3).unwrap();
        assert_eq!(tour.order, vec![0, 1, 2]);
        assert!(decode_bits(&[true, true, false, false], 3).is_none());
        assert!(decode_bits(&[false; 4], 3).is_none());
    }

    #[test]
    fn decode_maps_to_local_indices() {
        // start is node 2; canonical nodes are 0 and 1.
        let t = TspInstance::new(
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 3.0],
                vec![2.0, 3.0, 0.0],
            ],
            vec![0, 1, 2],
            2,
            None,
        )
        .unwrap();
        let tour = decode_tour(&t, &[true, false, false, true]).unwrap();
        assert_eq!(tour.order, vec![2, 0, 1]);
    }

    #[test]
    fn ising_energy_single_qubit_cases() {
        let mut im = IsingModel::new(vec![-1.0], BTreeMap::new(), 1.0);
        im.offset = 1.0;
        assert!((ising_energy(&im, 0).unwrap() - 0.0).abs() < 1e-15);
        assert!((ising_energy(&im, 1).unwrap() - 2.0).abs() < 1e-15);
        assert!(ising_energy(&im, 2).is_err());
    }

    #[test]
    fn hamming_gap_between_feasible_states() {
        for m in [3usize, 4] {
            let assignments = feasible_assignments(m);
            for (i, (a, _)) in assignments.iter().enumerate() {
                for (b, _) in assignments.iter().skip(i + 1) {
                    let distance = a.iter().zip(b).filter(|(x, y)| x != y).count();
                    assert!(distance >= 4, "m={m}: gap {distance}");
                }
            }
        }
    }

    #[test]
    fn ground_state_soundness_small_sizes() {
        let cfg = EncodingConfig::default();
        for m in [3usize, 4] {
            let t = random_tsp(m, 500 + m as u64);
            let p_min = find_min_penalty(&t, &cfg).unwrap();
            let q = tsp_to_qubo(&t, 1.2 * p_min).unwrap();
            let im = qubo_to_ising(&q);
            let states = 1usize << im.n;
            let (mask, _) = (0..states)
                .map(|z| (z, ising_energy(&im, z).unwrap()))
                .fold(
                    (0, f64::INFINITY),
                    |acc, item| if item.1 < acc.1 { item } else { acc },
                );
            let tour = decode_bits(&mask_bits(mask, im.n), m).expect("ground state must decode");
            let (_, optimal) = solve_tsp_exact(&t).unwrap();
            assert!((tour_length_canonical(&t, &tour) - optimal).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_covariance_preserves_argmin() {
        let q = tsp_to_qubo(&random_tsp(3, 77), 20.0).unwrap();
        let im = qubo_to_ising(&q);
        let scaled = scale_ising(&im, &EncodingConfig::default()).unwrap();
        let states = 1usize << im.n;
        let argmin = |model: &IsingModel| {
            (0..states)
                .map(|z| (z, ising_energy(model, z).unwrap()))
                .fold(
                    (0, f64::INFINITY),
                    |acc, item| if item.1 < acc.1 { item } else { acc },
                )
                .0
        };
        assert_eq!(argmin(&im), argmin(&scaled));
        for z in 0..states {
            let original = ising_energy(&im, z).unwrap();
            let expect = scaled.scale * original;
            assert!((ising_energy(&scaled, z).unwrap() - expect).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        // The spin substitution preserves energies assignment by assignment.
        #[test]
        fn conversion_identity(seed in 0u64..2000, nvars in 1usize..9) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut q = Qubo::zeros(nvars, 1.0);
            q.offset = rng.gen_range(-2.0..2.0);
            for i in 0..nvars {
                for j in i..nvars {
                    q.add(i, j, rng.gen_range(-3.0..3.0));
                }
            }
            let im = qubo_to_ising(&q);
            for mask in 0..(1usize << nvars) {
                let bits = mask_bits(mask, nvars);
                let qe = q.energy(&bits);
                let ie = ising_energy(&im, mask).unwrap();
                prop_assert!((qe - ie).abs() < 1e-9, "mask {}: {} vs {}", mask, qe, ie);
            }
        }

        // The row-sum bound dominates the exact width.
        #[test]
        fn bound_dominates_exact_width(seed in 0u64..2000, n in 1usize..7) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut couplings = BTreeMap::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(0.5) {
                        couplings.insert((i, j), rng.gen_range(-2.0..2.0));
                    }
                }
            }
            let im = IsingModel::new(h, couplings, rng.gen_range(-1.0..1.0));
            let exact = exact_spectral_width(&im, 20).unwrap();
            prop_assert!(exact >= 0.0);
            prop_assert!(bound_spectral_width(&im) >= exact - 1e-9);
        }
    }
}
