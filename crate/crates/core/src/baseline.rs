//! Exact state preparation with uniformly controlled rotations.
//!
//! Level `k` (k = 0 … n−1) prepares qubit `n−1−k` conditioned on the `k`
//! more significant qubits. For each value `c` of those qubits the subtree
//! norms give an `Ry` angle and the subtree phases an `Rz` angle. Each
//! multiplexed rotation with `k ≥ 1` controls expands into `2ᵏ` plain
//! rotations and `2ᵏ` CNOTs along a Gray-code walk of the control values.

use num_complex::Complex64;

use crate::genome::{Axis, Gene, Individual};
use crate::sim::StateVector;

/// Per-level multiplexor angles. `ry[k]` and `rz[k]` hold `2ᵏ` entries,
/// indexed by the value of the top `k` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTree {
    pub ry: Vec<Vec<f64>>,
    pub rz: Vec<Vec<f64>>,
}

/// Computes the `Ry`/`Rz` multiplexor angles that map `|0…0⟩` onto
/// `amplitudes` up to a global phase.
pub fn disentangle_angles(amplitudes: &[Complex64]) -> AngleTree {
    let n = amplitudes.len().trailing_zeros() as usize;
    // norms[m][p] and phases[m][p]: subtree of prefix p over the top m qubits
    let mut norms: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    let mut phases: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    norms[n] = amplitudes.iter().map(|a| a.norm()).collect();
    phases[n] = amplitudes.iter().map(|a| if a.norm() == 0.0 { 0.0 } else { a.arg() }).collect();
    for m in (0..n).rev() {
        let (lower, upper) = norms.split_at_mut(m + 1);
        lower[m] = upper[0].chunks_exact(2).map(|p| p[0].hypot(p[1])).collect();
        let (lower, upper) = phases.split_at_mut(m + 1);
        lower[m] = upper[0].chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    }

    let mut ry = Vec::with_capacity(n);
    let mut rz = Vec::with_capacity(n);
    for k in 0..n {
        let children = &norms[k + 1];
        ry.push((0..1usize << k).map(|c| 2.0 * children[2 * c + 1].atan2(children[2 * c])).collect());
        let child_phase = &phases[k + 1];
        rz.push((0..1usize << k).map(|c| child_phase[2 * c + 1] - child_phase[2 * c]).collect());
    }
    AngleTree { ry, rz }
}

/// Synthesizes a circuit preparing `target` exactly (up to global phase).
/// Real non-negative targets skip the `Rz` multiplexors.
pub fn exact_synthesize(target: &StateVector) -> Individual {
    let n = target.n_qubits();
    let tree = disentangle_angles(target.amplitudes());
    let with_phases = !target.is_real_nonnegative();
    let mut genes = Vec::new();
    for k in 0..n {
        let qubit = n - 1 - k;
        let controls: Vec<usize> = (0..k).map(|j| n - k + j).collect();
        multiplexed_rotation(&mut genes, Axis::Y, qubit, &controls, &tree.ry[k]);
        if with_phases {
            multiplexed_rotation(&mut genes, Axis::Z, qubit, &controls, &tree.rz[k]);
        }
    }
    Individual::new(n, genes).expect("synthesized genes are valid")
}

/// Emits a rotation about `axis` on `target` whose angle is `angles[c]` when
/// the controls hold `c` (bit j of `c` is `controls[j]`).
///
/// With Gray code `g_i`, the circuit is `R(φ_0) CX R(φ_1) CX …` and control
/// value `c` sees `θ_c = Σ_i (−1)^{popcount(c & g_i)} φ_i`; inverting that
/// Walsh transform gives the `φ_i`.
fn multiplexed_rotation(genes: &mut Vec<Gene>, axis: Axis, target: usize, controls: &[usize], angles: &[f64]) {
    let k = controls.len();
    debug_assert_eq!(angles.len(), 1 << k);
    if k == 0 {
        genes.push(Gene::Rotation { axis, target, angle: angles[0] });
        return;
    }
    let size = 1usize << k;
    let scale = 1.0 / size as f64;
    for i in 0..size {
        let gray = i ^ (i >> 1);
        let phi: f64 = angles
            .iter()
            .enumerate()
            .map(|(c, &theta)| if (c & gray).count_ones() % 2 == 0 { theta } else { -theta })
            .sum::<f64>()
            * scale;
        genes.push(Gene::Rotation { axis, target, angle: phi });
        let flip = if i + 1 == size { k - 1 } else { (i + 1).trailing_zeros() as usize };
        genes.push(Gene::cnot(controls[flip], target));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{fidelity, StateVector};
    use crate::targets::{gaussian_state, w_state, GaussianSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_target(n: usize, rng: &mut ChaCha8Rng, real: bool) -> StateVector {
        let amps = (0..1 << n)
            .map(|_| {
                let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
                Complex64::new(rng.random_range(-1.0..1.0), im)
            })
            .collect();
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn zero_state_has_zero_angles() {
        let tree = disentangle_angles(StateVector::zero(3).unwrap().amplitudes());
        assert!(tree.ry.iter().chain(&tree.rz).flatten().all(|&a| a == 0.0));
        assert_eq!(tree.ry.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 2, 4]);
    }

    #[test]
    fn single_qubit_angle() {
        let alpha = 1.1f64;
        let s = StateVector::from_real(&[(alpha / 2.0).cos(), (alpha / 2.0).sin()]).unwrap();
        let tree = disentangle_angles(s.amplitudes());
        assert!((tree.ry[0][0] - alpha).abs() < 1e-15);
        assert_eq!(tree.rz[0][0], 0.0);
    }

    #[test]
    fn w2_round_trip() {
        let target = w_state(2).unwrap();
        let circuit = exact_synthesize(&target);
        assert!(fidelity(&target, &circuit.state().unwrap()).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn basis_states() {
        for n in 1..=4 {
            for x in 0..1usize << n {
                let target = StateVector::basis(n, x).unwrap();
                let circuit = exact_synthesize(&target);
                assert!(fidelity(&target, &circuit.state().unwrap()).unwrap() >= 1.0 - 1e-12);
                let tree = disentangle_angles(target.amplitudes());
                for &a in tree.ry.iter().flatten() {
                    assert!(a == 0.0 || a == std::f64::consts::PI, "angle {a}");
                }
                assert!(tree.rz.iter().flatten().all(|&a| a == 0.0));
                if x == 0 {
                    assert!(circuit.angles().iter().all(|&a| a == 0.0));
                }
            }
        }
    }

    #[test]
    fn exact_on_random_complex_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..=6 {
            for _ in 0..5 {
                let target = random_target(n, &mut rng, false);
                let circuit = exact_synthesize(&target);
                let f = fidelity(&target, &circuit.state().unwrap()).unwrap();
                assert!(f >= 1.0 - 1e-9, "n={n} f={f}");
                assert!(circuit.stats().cnot_count + 4 <= 1 << (n + 1));
            }
        }
    }

    #[test]
    fn signed_real_targets_use_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let target = random_target(3, &mut rng, true);
        assert!(!target.is_real_nonnegative());
        let circuit = exact_synthesize(&target);
        assert!(fidelity(&target, &circuit.state().unwrap()).unwrap() >= 1.0 - 1e-9);
        assert_eq!(circuit.stats().cnot_count, 2 * ((1 << 3) - 2));
    }

    #[test]
    fn cnot_count_real_nonnegative() {
        for n in 2..=6 {
            let g = exact_synthesize(&gaussian_state(&GaussianSpec::centered(n)).unwrap());
            assert_eq!(g.stats().cnot_count, (1 << n) - 2);
            assert_eq!(g.stats().total_gates, 2 * (1 << n) - 3);
            let w = exact_synthesize(&w_state(n).unwrap());
            assert_eq!(w.stats().cnot_count, (1 << n) - 2);
        }
    }

    #[test]
    fn deterministic() {
        let t = gaussian_state(&GaussianSpec::centered(5)).unwrap();
        assert_eq!(exact_synthesize(&t), exact_synthesize(&t));
    }

    #[test]
    fn multiplexor_matches_controlled_angles() {
        // Each control value c must see exactly angles[c] on the target.
        let angles = [0.3, -1.2, 2.0, 0.7];
        let mut genes = Vec::new();
        multiplexed_rotation(&mut genes, Axis::Y, 0, &[1, 2], &angles);
        for (c, &theta) in angles.iter().enumerate() {
            let mut prep = Vec::new();
            for j in 0..2 {
                if c >> j & 1 == 1 {
                    prep.push(Gene::rx(1 + j, std::f64::consts::PI));
                }
            }
            let mut all = prep.clone();
            all.extend(&genes);
            let got = crate::sim::run_circuit(&all, 3).unwrap();
            let mut want_genes = prep;
            want_genes.push(Gene::ry(0, theta));
            let want = crate::sim::run_circuit(&want_genes, 3).unwrap();
            assert!(fidelity(&got, &want).unwrap() > 1.0 - 1e-12);
        }
    }
}
