#![allow(dead_code)]

use g2moduli::exterior7::{Form, Matrix7, BINOM7};
use g2moduli::g2_point::{is_positive, reference_phi};
use g2moduli::torus_moduli::Lattice;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_form(rng: &mut ChaCha8Rng, k: usize) -> Form {
    Form::new(k, (0..BINOM7[k]).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// A form of the given coefficient norm in a random direction.
pub fn random_direction(rng: &mut ChaCha8Rng, k: usize, norm: f64) -> Form {
    let f = random_form(rng, k);
    let n = f.coefficient_norm();
    f.scaled(norm / n)
}

/// φ₀ plus a perturbation of coefficient norm at most `radius`.
pub fn random_positive(rng: &mut ChaCha8Rng, radius: f64) -> Form {
    loop {
        let r = rng.random_range(0.0..radius);
        let phi = &reference_phi() + &random_direction(rng, 3, r);
        if is_positive(&phi).unwrap() {
            return phi;
        }
    }
}

/// Identity plus a small random perturbation.
pub fn random_lattice(rng: &mut ChaCha8Rng) -> Lattice {
    let m = Matrix7::identity() + Matrix7::from_fn(|_, _| rng.random_range(-0.2..0.2));
    Lattice::new(m).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
