use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

use super::RandomMap;

/// Name of the pseudo-random generator used by the simulators.
pub const GENERATOR: &str = "ChaCha20 (rand_chacha), seeded with seed_from_u64";

fn choose(rm: &RandomMap, x: f64, u: f64) -> usize {
    let w = rm.weights();
    let mut acc = 0.0;
    for k in 0..w.count() {
        acc += w.value(k, x);
        if u < acc {
            return k;
        }
    }
    (0..w.count()).rev().find(|&k| w.value(k, x) > 0.0).unwrap_or(0)
}

fn check_start(x0: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(Error::Domain { x: x0, lo: 0.0, hi: 1.0 });
    }
    Ok(())
}

/// Orbit `x_0, …, x_n`; each step applies `τ_k` with probability `p_k(x_t)`.
pub fn simulate_orbit(rm: &RandomMap, x0: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    check_start(x0)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 1);
    let mut x = x0;
    out.push(x);
    for _ in 0..n {
        let k = choose(rm, x, rng.gen::<f64>());
        x = rm.maps()[k].evaluate(x)?.clamp(0.0, 1.0);
        out.push(x);
    }
    Ok(out)
}

/// As [`simulate_orbit`], adding a uniform perturbation of size at most `eps`
/// after every step (reflected into `[0, 1]`).
///
/// Maps with dyadic slopes, such as the tent map, shift out one mantissa bit
/// per step and reach a fixed point in double precision after about fifty
/// iterations; the perturbation keeps refilling the low bits.
pub fn simulate_orbit_dithered(rm: &RandomMap, x0: f64, n: usize, seed: u64, eps: f64) -> Result<Vec<f64>> {
    check_start(x0)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n + 1);
    let mut x = x0;
    out.push(x);
    for _ in 0..n {
        let k = choose(rm, x, rng.gen::<f64>());
        x = rm.maps()[k].evaluate(x)?;
        x += eps * (2.0 * rng.gen::<f64>() - 1.0);
        if x < 0.0 {
            x = -x;
        }
        if x > 1.0 {
            x = 2.0 - x;
        }
        x = x.clamp(0.0, 1.0);
        out.push(x);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval_maps::PiecewiseMonotoneMap;
    use crate::randmaps::ProbabilityWeighting;

    #[test]
    fn single_map_orbit_is_deterministic() {
        let m = PiecewiseMonotoneMap::affine(&[(
            crate::rational::qi(0),
            crate::rational::qi(1),
            crate::rational::q(1, 2),
            crate::rational::qi(0),
        )])
        .unwrap();
        let rm = RandomMap::new(vec![m], ProbabilityWeighting::only(1, 0).unwrap()).unwrap();
        let a = simulate_orbit(&rm, 0.5, 3, 1).unwrap();
        assert_eq!(a, vec![0.5, 0.25, 0.125, 0.0625]);
    }

    #[test]
    fn same_seed_same_orbit() {
        let t = PiecewiseMonotoneMap::tent();
        let rm = RandomMap::new(
            vec![t.clone(), t],
            ProbabilityWeighting::constant(&[crate::rational::q(1, 2), crate::rational::q(1, 2)]).unwrap(),
        )
        .unwrap();
        let a = simulate_orbit_dithered(&rm, 0.3, 1000, 9, 1e-9).unwrap();
        let b = simulate_orbit_dithered(&rm, 0.3, 1000, 9, 1e-9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(simulate_orbit(&rm, 1.5, 3, 0).is_err());
    }
}
