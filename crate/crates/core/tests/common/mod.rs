#![allow(dead_code)]

use rand::Rng;
use rmab_core::ComponentSpec;

/// A table whose increments strictly decrease over `len` entries.
pub fn concave_table<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let first: f64 = rng.gen_range(0.05..0.5);
    let ratio: f64 = rng.gen_range(0.5..0.95);
    let room = 1.0 - first;
    // geometric increments scaled to stay below 1
    let scale = rng.gen_range(0.2..0.95) * room * (1.0 - ratio) / (1.0 - ratio.powi(len as i32 - 1));
    let mut p = vec![first];
    for j in 1..len {
        let next = p[j - 1] + scale * ratio.powi(j as i32 - 1);
        p.push(next);
    }
    p
}

/// Random C1 component: half Markov, half strictly concave tables.
pub fn random_c1_spec<R: Rng>(rng: &mut R, table_len: usize) -> ComponentSpec {
    let cost = rng.gen_range(0.2..3.0);
    if rng.gen_bool(0.5) {
        ComponentSpec::markov(rng.gen_range(0.05..0.95), cost).unwrap()
    } else {
        ComponentSpec::table(concave_table(rng, table_len), cost).unwrap()
    }
}

pub fn homogeneous(n: usize, q: f64) -> Vec<ComponentSpec> {
    vec![ComponentSpec::markov(q, 1.0).unwrap(); n]
}
