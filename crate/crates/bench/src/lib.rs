//! Seeded fixtures shared by the criterion benches.

use gasp_core::{random_individual, Individual, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random circuit with `len` genes on `n` qubits.
pub fn circuit(n: usize, len: usize, seed: u64) -> Individual {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_individual(n, len, &mut rng).expect("fixture sizes are valid")
}

/// Haar-ish random target: i.i.d. uniform real and imaginary parts, normalized.
pub fn target(n: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps =
        (0..1usize << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    StateVector::normalized(amps).expect("random vector is non-zero")
}
