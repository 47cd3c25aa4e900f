#![allow(dead_code)]

use arnold_chain::system::{Decay, Harmonic, SystemSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `a = α̂ ρ^k r^l` with α̂ = 1, α = 4, β = 1, and O(ρ) first-order terms
/// chosen so that λ = 1/3.
pub fn generated(rho: f64, r: f64) -> SystemSpec {
    let decay = Decay {
        alpha_hat: 1.0,
        alpha: 4.0,
        beta: 1.0,
        rho,
        r,
    };
    let overrides = [
        Harmonic::new(0, 0, 1.0, 0.0),
        Harmonic::new(1, 0, rho, 0.0),
        Harmonic::new(0, 1, 3.0 * r, 0.0),
    ];
    SystemSpec::generated(decay, 16, &[], &overrides, 1e-3, 2.0).unwrap().normalized()
}

/// The fixture's first-order part with generated higher harmonics of size
/// `ρ^k r^l`; the envelope constant is large enough to admit O(1)
/// first-order coefficients.
pub fn perturbed_fixture(rho: f64, r: f64) -> SystemSpec {
    let decay = Decay {
        alpha_hat: 1.0,
        alpha: 100.0,
        beta: 1.0,
        rho,
        r,
    };
    let overrides = [
        Harmonic::new(0, 0, 1.0, 0.0),
        Harmonic::new(1, 0, 0.25, 0.0),
        Harmonic::new(0, 1, 0.5, 0.0),
    ];
    SystemSpec::generated(decay, 16, &[], &overrides, 1e-3, 2.0).unwrap().normalized()
}

pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!("AC{id:<2} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
