//! Exact statevector simulation of QAOA circuits with diagonal cost
//! Hamiltonians and the standard X mixer.
//!
//! Basis convention throughout the crate: bit k of a basis index is qubit k.

use crate::ansatz::QaoaAnsatz;
use crate::encode::{diagonal_energy, IsingModel};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Hard qubit ceiling for simulation (amplitude and energy tables).
pub const MAX_QUBITS: usize = 24;

/// The 2p angles of a depth-p circuit, flattened as
/// `[gamma_0.. gamma_{p-1}, beta_0.. beta_{p-1}]` for the optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl ParameterVector {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::DimensionMismatch {
                expected: gammas.len(),
                got: betas.len(),
            });
        }
        Ok(ParameterVector { gammas, betas })
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.gammas.clone();
        flat.extend_from_slice(&self.betas);
        flat
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: flat.len() + 1,
                got: flat.len(),
            });
        }
        let p = flat.len() / 2;
        Ok(ParameterVector {
            gammas: flat[..p].to_vec(),
            betas: flat[p..].to_vec(),
        })
    }
}

/// Precomputed diagonal energies of a model, one per basis state.
#[derive(Debug, Clone)]
pub struct EnergyTable {
    n: usize,
    energies: Vec<f64>,
}

impl EnergyTable {
    pub fn new(im: &IsingModel) -> Result<Self> {
        if im.n == 0 || im.n > MAX_QUBITS {
            return Err(Error::SizeCap {
                what: "energy table",
                limit: MAX_QUBITS,
                requested: im.n,
            });
        }
        let couplings: Vec<(usize, usize, f64)> =
            im.couplings.iter().map(|(&(i, j), &v)| (i, j, v)).collect();
        let energies = (0..1usize << im.n)
            .map(|z| diagonal_energy(&im.h, &couplings, im.offset, z))
            .collect();
        Ok(EnergyTable { n: im.n, energies })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn min(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Normalized amplitude vector over 2^n basis states.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability of one basis outcome.
    pub fn probability(&self, basis_index: usize) -> f64 {
        self.amps[basis_index].norm_sqr()
    }

    /// Multiplies each amplitude by `exp(-i * gamma * E_z)`.
    pub fn apply_cost_phase(&mut self, table: &EnergyTable, gamma: f64) -> Result<()> {
        if table.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: table.n,
            });
        }
        for (a, &e) in self.amps.iter_mut().zip(&table.energies) {
            let (sin, cos) = (gamma * e).sin_cos();
            *a *= Complex64::new(cos, -sin);
        }
        Ok(())
    }

    /// Applies `exp(-i * beta * X)` to every qubit
    /// (cos on the diagonal, -i sin off it).
    pub fn apply_mixer(&mut self, beta: f64) {
        let (sin, cos) = beta.sin_cos();
        let off = Complex64::new(0.0, -sin);
        for k in 0..self.n {
            let step = 1usize << k;
            let mut base = 0usize;
            while base < self.amps.len() {
                for low in base..base + step {
                    let high = low + step;
                    let a = self.amps[low];
                    let b = self.amps[high];
                    self.amps[low] = cos * a + off * b;
                    self.amps[high] = off * a + cos * b;
                }
                base += step << 1;
            }
        }
    }

    /// Expectation of the diagonal energy: `sum_z |a_z|^2 E_z`.
    pub fn expectation(&self, table: &EnergyTable) -> Result<f64> {
        if table.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: table.n,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&table.energies)
            .map(|(a, &e)| a.norm_sqr() * e)
            .sum())
    }

    /// Multinomial sample of basis outcomes; deterministic for a fixed seed.
    pub fn sample(&self, shots: u64, seed: u64) -> BTreeMap<usize, u64> {
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut total = 0.0;
        for a in &self.amps {
            total += a.norm_sqr();
            cumulative.push(total);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen_range(0.0..total);
            let z = cumulative.partition_point(|&c| c <= u);
            *counts.entry(z.min(self.amps.len() - 1)).or_insert(0) += 1;
        }
        counts
    }

    /// Total probability of basis states accepted by the decoder predicate.
    pub fn feasible_probability(&self, mut is_feasible: impl FnMut(usize) -> bool) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(z, _)| is_feasible(*z))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Uniform superposition over n qubits.
pub fn initial_state(n: usize) -> Result<StateVector> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "state vector",
            limit: MAX_QUBITS,
            requested: n,
        });
    }
    let dim = 1usize << n;
    let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
    Ok(StateVector {
        n,
        amps: vec![amp; dim],
    })
}

/// Runs the full circuit: uniform start, then p alternations of cost phase
/// and mixer. Builds the energy table internally.
pub fn qaoa_state(ansatz: &QaoaAnsatz, params: &ParameterVector) -> Result<StateVector> {
    let table = EnergyTable::new(&ansatz.ising)?;
    if params.p() != ansatz.p {
        return Err(Error::DimensionMismatch {
            expected: ansatz.p,
            got: params.p(),
        });
    }
    qaoa_state_with_table(&table, params)
}

/// Circuit evaluation against a prebuilt energy table (the hot path inside
/// optimizer loops).
pub fn qaoa_state_with_table(table: &EnergyTable, params: &ParameterVector) -> Result<StateVector> {
    let mut state = initial_state(table.n)?;
    for layer in 0..params.p() {
        state.apply_cost_phase(table, params.gammas[layer])?;
        state.apply_mixer(params.betas[layer]);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::ising_energy;
    use std::collections::BTreeMap as Map;

    fn table_from(h: Vec<f64>, couplings: &[(usize, usize, f64)], offset: f64) -> EnergyTable {
        let mut map = Map::new();
        for &(i, j, v) in couplings {
            map.insert((i, j), v);
        }
        EnergyTable::new(&IsingModel::new(h, map, offset)).unwrap()
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 1usize << n;
        let mut amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        StateVector { n, amps }
    }

    fn random_table(n: usize, seed: u64) -> EnergyTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EnergyTable {
            n,
            energies: (0..1usize << n).map(|_| rng.gen_range(-4.0..4.0)).collect(),
        }
    }

    /// Dense full-layer mixer matrix built from the 2x2 kernel product
    /// formula, independent of the simulator's in-place sweep.
    fn dense_mixer_apply(state: &StateVector, beta: f64) -> Vec<Complex64> {
        let n = state.n;
        let dim = 1usize << n;
        let kernel = [
            [
                Complex64::new(beta.cos(), 0.0),
                Complex64::new(0.0, -beta.sin()),
            ],
            [
                Complex64::new(0.0, -beta.sin()),
                Complex64::new(beta.cos(), 0.0),
            ],
        ];
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (zp, slot) in out.iter_mut().enumerate() {
            for z in 0..dim {
                let mut entry = Complex64::new(1.0, 0.0);
                for q in 0..n {
                    entry *= kernel[(zp >> q) & 1][(z >> q) & 1];
                }
                *slot += entry * state.amps[z];
            }
        }
        out
    }

    fn dense_phase_apply(state: &StateVector, table: &EnergyTable, gamma: f64) -> Vec<Complex64> {
        state
            .amps
            .iter()
            .zip(table.energies())
            .map(|(a, &e)| a * Complex64::from_polar(1.0, -gamma * e))
            .collect()
    }

    fn max_amp_error(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn initial_state_is_uniform() {
        let s = initial_state(1).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            assert_eq!(a.im, 0.0);
        }
        let s3 = initial_state(3).unwrap();
        assert_eq!(s3.amplitudes().len(), 8);
        assert!((s3.norm() - 1.0).abs() < 1e-12);
        let s20 = initial_state(20).unwrap();
        assert!((s20.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_gamma_is_identity() {
        let table = random_table(3, 1);
        let mut s = random_state(3, 2);
        let before = s.amps.clone();
        s.apply_cost_phase(&table, 0.0).unwrap();
        assert_eq!(max_amp_error(&before, &s.amps), 0.0);
    }

    #[test]
    fn constant_energies_give_global_phase_only() {
        let table = table_from(vec![0.0, 0.0], &[], 2.5);
        let mut s = random_state(2, 3);
        let before: Vec<f64> = s.amps.iter().map(|a| a.norm_sqr()).collect();
        s.apply_cost_phase(&table, 0.7).unwrap();
        for (p, a) in before.iter().zip(&s.amps) {
            assert!((p - a.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn cost_phase_matches_dense_oracle() {
        let table = random_table(3, 5);
        let mut s = random_state(3, 6);
        let expect = dense_phase_apply(&s, &table, 0.7);
        s.apply_cost_phase(&table, 0.7).unwrap();
        assert!(max_amp_error(&expect, &s.amps) < 1e-12);
    }

    #[test]
    fn zero_beta_is_identity() {
        let mut s = random_state(3, 7);
        let before = s.amps.clone();
        s.apply_mixer(0.0);
        assert!(max_amp_error(&before, &s.amps) < 1e-15);
    }

    #[test]
    fn half_pi_beta_flips_all_bits() {
        let mut s = initial_state(3).unwrap();
        // collapse onto |000> first
        s.amps
            .iter_mut()
            .for_each(|a| *a = Complex64::new(0.0, 0.0));
        s.amps[0] = Complex64::new(1.0, 0.0);
        s.apply_mixer(std::f64::consts::FRAC_PI_2);
        assert!((s.probability(0b111) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixer_matches_dense_oracle() {
        let mut s = random_state(4, 8);
        let expect = dense_mixer_apply(&s, 0.3);
        s.apply_mixer(0.3);
        assert!(max_amp_error(&expect, &s.amps) < 1e-12);
    }

    #[test]
    fn zero_depth_leaves_uniform_state() {
        let table = random_table(3, 9);
        let params = ParameterVector::new(vec![], vec![]).unwrap();
        let s = qaoa_state_with_table(&table, &params).unwrap();
        let amp = (8f64).sqrt().recip();
        for a in s.amplitudes() {
            assert!((a.re - amp).abs() < 1e-12 && a.im == 0.0);
        }
    }

    #[test]
    fn single_qubit_expectation_is_sine_product() {
        // For h = [1] the closed form is <H> = sin(2 gamma) sin(2 beta).
        let im = IsingModel::new(vec![1.0], Map::new(), 0.0);
        let table = EnergyTable::new(&im).unwrap();
        for (i, j) in [(2, 2), (1, 3), (0, 4), (3, 1)] {
            let gamma = i as f64 * 0.35 + 0.1;
            let beta = j as f64 * 0.27 - 0.4;
            let params = ParameterVector::new(vec![gamma], vec![beta]).unwrap();
            let s = qaoa_state_with_table(&table, &params).unwrap();
            let expect = (2.0 * gamma).sin() * (2.0 * beta).sin();
            assert!((s.expectation(&table).unwrap() - expect).abs() < 1e-12);
        }
        let params = ParameterVector::new(
            vec![std::f64::consts::FRAC_PI_4],
            vec![std::f64::consts::FRAC_PI_4],
        )
        .unwrap();
        let s = qaoa_state_with_table(&table, &params).unwrap();
        assert!((s.expectation(&table).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_circuit_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let n = rng.gen_range(1usize..=4);
            let p = rng.gen_range(1usize..=3);
            let table = random_table(n, rng.gen());
            let params = ParameterVector::new(
                (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect(),
                (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect(),
            )
            .unwrap();
            let fast = qaoa_state_with_table(&table, &params).unwrap();
            let mut dense = initial_state(n).unwrap();
            for layer in 0..p {
                dense.amps = dense_phase_apply(&dense, &table, params.gammas[layer]);
                dense.amps = dense_mixer_apply(&dense, params.betas[layer]);
            }
            assert!(max_amp_error(&dense.amps, &fast.amps) < 1e-10);
        }
    }

    #[test]
    fn expectation_of_uniform_state_is_table_mean() {
        let table = random_table(3, 10);
        let s = initial_state(3).unwrap();
        let mean: f64 = table.energies().iter().sum::<f64>() / 8.0;
        assert!((s.expectation(&table).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn expectation_of_basis_state_reads_the_table() {
        let table = random_table(3, 11);
        let mut s = initial_state(3).unwrap();
        s.amps
            .iter_mut()
            .for_each(|a| *a = Complex64::new(0.0, 0.0));
        s.amps[5] = Complex64::new(0.0, 1.0);
        assert!((s.expectation(&table).unwrap() - table.energies()[5]).abs() < 1e-12);
    }

    #[test]
    fn expectation_matches_independent_summation() {
        let table = random_table(4, 12);
        let s = random_state(4, 13);
        let by_hand: f64 = (0..16)
            .map(|z| s.amps[z].norm_sqr() * table.energies()[z])
            .sum();
        assert!((s.expectation(&table).unwrap() - by_hand).abs() < 1e-12);
        assert!(s.expectation(&table).unwrap() >= table.min() - 1e-12);
    }

    #[test]
    fn sampling_a_basis_state_is_certain() {
        let mut s = initial_state(2).unwrap();
        s.amps
            .iter_mut()
            .for_each(|a| *a = Complex64::new(0.0, 0.0));
        s.amps[2] = Complex64::new(1.0, 0.0);
        let counts = s.sample(100, 7);
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[&2], 100);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let s = random_state(4, 14);
        assert_eq!(s.sample(1000, 3), s.sample(1000, 3));
    }

    #[test]
    fn uniform_sampling_is_balanced() {
        let s = initial_state(2).unwrap();
        let shots = 100_000u64;
        let counts = s.sample(shots, 21);
        let expect = shots as f64 / 4.0;
        // 5 sigma of a binomial with p = 1/4
        let sigma = (shots as f64 * 0.25 * 0.75).sqrt();
        for z in 0..4 {
            let c = *counts.get(&z).unwrap_or(&0) as f64;
            assert!((c - expect).abs() < 5.0 * sigma, "outcome {z}: {c}");
        }
        assert_eq!(counts.values().sum::<u64>(), shots);
    }

    #[test]
    fn feasible_probability_counts_decodable_states() {
        use crate::encode::{decode_bits, mask_bits};
        // Uniform state over the 4 variables of a 3-node encoding: exactly
        // 2 of 16 states decode, total probability 1/8.
        let s = initial_state(4).unwrap();
        let p = s.feasible_probability(|z| decode_bits(&mask_bits(z, 4), 3).is_some());
        assert!((p - 0.125).abs() < 1e-12);

        let mut basis = initial_state(4).unwrap();
        basis
            .amps
            .iter_mut()
            .for_each(|a| *a = Complex64::new(0.0, 0.0));
        basis.amps[0b1001] = Complex64::new(1.0, 0.0); // feasible pattern
        let p1 = basis.feasible_probability(|z| decode_bits(&mask_bits(z, 4), 3).is_some());
        assert!((p1 - 1.0).abs() < 1e-12);

        let mut zeros = initial_state(4).unwrap();
        zeros
            .amps
            .iter_mut()
            .for_each(|a| *a = Complex64::new(0.0, 0.0));
        zeros.amps[0] = Complex64::new(1.0, 0.0);
        let p0 = zeros.feasible_probability(|z| decode_bits(&mask_bits(z, 4), 3).is_some());
        assert!(p0 == 0.0);
    }

    #[test]
    fn norm_is_preserved_over_long_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in [2usize, 6, 12] {
            let table = random_table(n, rng.gen());
            let mut s = initial_state(n).unwrap();
            for _ in 0..50 {
                s.apply_cost_phase(&table, rng.gen_range(-2.0..2.0))
                    .unwrap();
                s.apply_mixer(rng.gen_range(-2.0..2.0));
                assert!((s.norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn energy_table_matches_per_state_evaluation() {
        let mut map = Map::new();
        map.insert((0, 2), -1.25);
        map.insert((1, 3), 0.5);
        map.insert((0, 1), 2.0);
        let im = IsingModel::new(vec![0.3, -0.7, 1.1, 0.0], map, 0.25);
        let table = EnergyTable::new(&im).unwrap();
        for z in 0..16 {
            assert!((table.energies()[z] - ising_energy(&im, z).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_gradient_is_consistent() {
        // Central difference at step 1e-5 against a Richardson-extrapolated
        // reference for each parameter of a random 3-qubit ansatz.
        let table = random_table(3, 99);
        let base = ParameterVector::new(vec![0.4, -0.3], vec![0.2, 0.9]).unwrap();
        let f = |flat: &[f64]| {
            let params = ParameterVector::from_flat(flat).unwrap();
            qaoa_state_with_table(&table, &params)
                .unwrap()
                .expectation(&table)
                .unwrap()
        };
        let x = base.to_flat();
        let central = |h: f64, k: usize| {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[k] += h;
            minus[k] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        };
        for k in 0..x.len() {
            let d = central(1e-5, k);
            let reference = (4.0 * central(5e-5, k) - central(1e-4, k)) / 3.0;
            assert!(
                (d - reference).abs() < 1e-6,
                "param {k}: {d} vs {reference}"
            );
        }
    }
}
