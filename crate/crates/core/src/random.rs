//! Seeded random relative models that pass validation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{AlgElement, FiberGenerator, Generator, Restriction, RelativeModel};
use crate::exact::{ratio, Rational};

#[derive(Clone, Debug)]
pub struct RandomModelConfig {
    pub max_base: usize,
    pub max_fiber: usize,
    pub fiber_degrees: Vec<u32>,
    /// allow decomposable fiber terms in the twist
    pub allow_impure: bool,
}

impl Default for RandomModelConfig {
    fn default() -> Self {
        RandomModelConfig { max_base: 2, max_fiber: 3, fiber_degrees: vec![3, 5, 7], allow_impure: true }
    }
}

fn coefficient(rng: &mut ChaCha8Rng) -> Rational {
    let &(p, q) = [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (3, 1)].choose(rng).unwrap();
    ratio(p, q)
}

/// The flag marks the base `x³ = 0`, `d y = x²`.
fn base(rng: &mut ChaCha8Rng, cfg: &RandomModelConfig) -> (Vec<Generator>, bool) {
    if rng.gen_bool(0.15) {
        return (vec![Generator::truncated("x", 2, 3), Generator::new("y", 3)], true);
    }
    let k = rng.gen_range(1..=cfg.max_base.max(1));
    let mut gens = Vec::new();
    for i in 0..k {
        let g = match rng.gen_range(0..4) {
            0 => Generator::truncated(format!("x{i}"), 2, rng.gen_range(2..=4)),
            1 => Generator::truncated(format!("x{i}"), 4, 2),
            2 => Generator::new(format!("y{i}"), 3),
            _ => Generator::new(format!("y{i}"), 5),
        };
        gens.push(g);
    }
    (gens, false)
}

fn attempt(rng: &mut ChaCha8Rng, cfg: &RandomModelConfig) -> RelativeModel {
    let (base_gens, base_d) = base(rng, cfg);
    let nf = rng.gen_range(1..=cfg.max_fiber.max(1));
    let mut degrees: Vec<u32> = (0..nf).map(|_| *cfg.fiber_degrees.choose(rng).unwrap()).collect();
    degrees.sort_unstable();
    let fiber = degrees.iter().enumerate().map(|(i, &d)| FiberGenerator::new(format!("w{i}_{d}"), d)).collect();
    let mut model = RelativeModel::new(base_gens, fiber);
    if base_d {
        let x = model.algebra().gen_element(0);
        model.set_differential(1, model.algebra().multiply(&x, &x));
    }
    let nb = model.base_count();
    for w in model.fiber_range() {
        let degree = model.degree_of(w) + 1;
        let candidates: Vec<_> = model
            .monomial_basis(degree, Restriction::Full)
            .into_iter()
            .filter(|m| {
                let exps = m.exponents();
                let later = exps[w..].iter().any(|&e| e > 0);
                let fiber_len: u32 = exps[nb..].iter().sum();
                let base_len: u32 = exps[..nb].iter().sum();
                !later && (fiber_len == 0 || (cfg.allow_impure && (fiber_len >= 2 || base_len > 0)))
            })
            .collect();
        let mut value = AlgElement::zero();
        for m in candidates {
            if rng.gen_bool(0.5) {
                value.add_term(m, coefficient(rng));
            }
        }
        model.set_differential(w, value);
    }
    model
}

/// A validated random model; retries until validation passes, falling back
/// to the zero twist, which is always valid.
pub fn random_model(seed: u64, cfg: &RandomModelConfig) -> RelativeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..64 {
        let m = attempt(&mut rng, cfg);
        if m.validate().is_ok() {
            return m;
        }
    }
    let mut m = attempt(&mut rng, cfg);
    for w in m.fiber_range() {
        m.set_differential(w, AlgElement::zero());
    }
    m
}
