//! Seeded pools of small test objects.
//!
//! Everything here is deterministic in the seed, so property suites and the
//! command line `pool` helper see the same instances.

use num::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::homs::{multiplication_map, quotient_map, MonoidHom};
use crate::ideals::MonoidIdeal;
use crate::lattice::{IntMatrix, IntVector};
use crate::monoids::FineMonoid;

pub const DEFAULT_SEED: u64 = 20240611;

fn random_vector(rng: &mut ChaCha8Rng, rank: usize, lo: i64, hi: i64) -> IntVector {
    IntVector::from_i64(&(0..rank).map(|_| rng.gen_range(lo..=hi)).collect::<Vec<_>>())
}

/// A fine monoid of rank `rank` with at most four generators.
fn random_monoid(rng: &mut ChaCha8Rng, rank: usize) -> FineMonoid {
    loop {
        let k = rng.gen_range(1..=4);
        // mostly nonnegative entries, so that most monoids are sharp
        let lo = if rng.gen_bool(0.2) { -1 } else { 0 };
        let gens: Vec<IntVector> = (0..k).map(|_| random_vector(rng, rank, lo, 3)).collect();
        if let Ok(m) = FineMonoid::new(rank, &gens) {
            if !m.generators().is_empty() && m.is_full_dimensional() {
                return m;
            }
        }
    }
}

/// Extends `images` into a target monoid with at most four generators.
fn target_for(rng: &mut ChaCha8Rng, rank: usize, images: &[IntVector]) -> FineMonoid {
    let mut gens: Vec<IntVector> = images.iter().filter(|v| !v.is_zero()).cloned().collect();
    gens.sort();
    gens.dedup();
    while gens.len() < 4 && (gens.len() < rank || rng.gen_bool(0.4)) {
        gens.push(random_vector(rng, rank, 0, 3));
    }
    FineMonoid::new(rank, &gens).expect("rank matches")
}

fn random_hom_from(rng: &mut ChaCha8Rng, q: &FineMonoid) -> MonoidHom {
    let small = |v: &IntVector| v.coords().iter().all(|c| (-1..=3).contains(&c.to_i64().unwrap_or(i64::MAX)));
    loop {
        let rows = rng.gen_range(1..=3);
        let cols = q.rank();
        let entries: Vec<num::BigInt> = (0..rows * cols).map(|_| num::BigInt::from(rng.gen_range(-1..=3))).collect();
        let m = IntMatrix::new(rows, cols, entries).expect("shape");
        let images: Vec<IntVector> = q.generators().iter().map(|g| m.apply(g).unwrap()).collect();
        // keep target generators in the same small range as the source
        if !images.iter().all(small) {
            continue;
        }
        let p = target_for(rng, rows, &images);
        if p.generators().len() > 4 {
            continue;
        }
        return MonoidHom::new(q.clone(), p, m).expect("images are generators");
    }
}

fn n(r: usize) -> FineMonoid {
    FineMonoid::natural(r)
}

fn hom(q: FineMonoid, p: FineMonoid, rows: &[&[i64]]) -> MonoidHom {
    MonoidHom::new(q, p, IntMatrix::from_i64_rows(rows)).expect("classic hom")
}

/// Named homomorphisms with known behaviour.
pub fn classic_homs() -> Vec<(&'static str, MonoidHom)> {
    let two_three = FineMonoid::from_i64(1, &[&[2], &[3]]);
    let cone_xy = FineMonoid::from_i64(2, &[&[1, 0], &[1, 1], &[1, 2]]);
    vec![
        ("x_xy", hom(n(2), n(2), &[&[1, 1], &[0, 1]])),
        ("sum", hom(n(2), n(1), &[&[1, 1]])),
        ("diagonal", hom(n(1), n(2), &[&[1], &[1]])),
        ("identity", MonoidHom::identity(&n(2))),
        ("times_two", multiplication_map(&n(1), 2).expect("n > 0")),
        ("times_three", multiplication_map(&n(1), 3).expect("n > 0")),
        ("numerical", hom(two_three.clone(), n(1), &[&[1]])),
        ("into_numerical", hom(n(1), two_three, &[&[2]])),
        ("first_factor", hom(n(1), n(2), &[&[1], &[0]])),
        ("blowup_chart", hom(n(2), FineMonoid::from_i64(2, &[&[1, 0], &[-1, 1]]), &[&[1, 0], &[0, 1]])),
        ("a1_cone", hom(n(1), cone_xy.clone(), &[&[1], &[1]])),
        ("quotient", quotient_map(&n(2), &FineMonoid::from_i64(2, &[&[1, 0]])).expect("face quotient")),
        ("cone_quotient", quotient_map(&cone_xy, &FineMonoid::from_i64(2, &[&[1, 0]])).expect("quotient")),
        ("diag_three", hom(n(1), n(3), &[&[1], &[1], &[1]])),
        ("plane_in_three", hom(n(2), n(3), &[&[1, 0], &[1, 1], &[0, 1]])),
    ]
}

/// At least `size` homomorphisms: the classics, then random chains `h1, h2`
/// with `h2.source == h1.target`.
pub fn hom_pool(seed: u64, size: usize) -> Vec<MonoidHom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<MonoidHom> = classic_homs().into_iter().map(|(_, h)| h).collect();
    while out.len() < size {
        let rank = rng.gen_range(1..=3);
        let q = random_monoid(&mut rng, rank);
        let h1 = random_hom_from(&mut rng, &q);
        let h2 = random_hom_from(&mut rng, h1.target());
        out.push(h1);
        out.push(h2);
    }
    out
}

/// Pairs `(first, second)` in the pool with `second.source == first.target`.
pub fn composable_pairs(pool: &[MonoidHom]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, a) in pool.iter().enumerate() {
        for (j, b) in pool.iter().enumerate() {
            if a.target() == b.source() {
                out.push((i, j));
            }
        }
    }
    out
}

/// Sharp fs monoids of full rank at most three, with at most four Hilbert
/// basis elements of entries at most four.
pub fn sharp_fs_pool(seed: u64, size: usize) -> Vec<FineMonoid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<FineMonoid> = vec![n(1), n(2), n(3), FineMonoid::from_i64(2, &[&[1, 0], &[1, 1], &[1, 2]])];
    let mut attempts = 0usize;
    while out.len() < size && attempts < 100 * size.max(1) {
        attempts += 1;
        let rank = rng.gen_range(1..=3);
        let k = rng.gen_range(rank..=4);
        let gens: Vec<IntVector> = (0..k).map(|_| random_vector(&mut rng, rank, 0, 4)).collect();
        let Ok(raw) = FineMonoid::new(rank, &gens) else { continue };
        if !raw.is_full_dimensional() || !raw.is_sharp() {
            continue;
        }
        let sat = raw.saturate();
        let small = sat.generators().len() <= 4
            && sat.generators().iter().all(|g| g.coords().iter().all(|c| c <= &num::BigInt::from(4)));
        if small && !out.iter().any(|m| m.same_set(&sat)) {
            out.push(sat);
        }
    }
    out
}

/// Nonempty ideals of the sharp fs pool, generated by up to three elements of
/// degree at most two.
pub fn ideal_pool(seed: u64, size: usize) -> Vec<MonoidIdeal> {
    let monoids = sharp_fs_pool(seed, 40);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut out: Vec<MonoidIdeal> = Vec::new();
    for m in &monoids {
        out.push(MonoidIdeal::maximal(m));
        out.push(MonoidIdeal::unit(m));
    }
    let mut attempts = 0usize;
    while out.len() < size && attempts < 100 * size.max(1) {
        attempts += 1;
        let m = monoids.choose(&mut rng).expect("nonempty pool");
        let elems: Vec<IntVector> = m.elements_up_to_degree(2).into_iter().filter(|e| !e.is_zero()).collect();
        let k = rng.gen_range(1..=3usize.min(elems.len()));
        let gens: Vec<IntVector> = elems.choose_multiple(&mut rng, k).cloned().collect();
        let ideal = MonoidIdeal::minimal_generators(m, &gens).expect("elements of the monoid");
        if !out.contains(&ideal) {
            out.push(ideal);
        }
    }
    out
}

/// Injective local homomorphisms of sharp fs monoids of full rank, suitable
/// for the flattening pipeline.
pub fn flatten_pool(seed: u64, size: usize) -> Vec<MonoidHom> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf1a7);
    let mut out: Vec<MonoidHom> = classic_homs()
        .into_iter()
        .map(|(_, h)| h)
        .filter(flattenable)
        .collect();
    let mut attempts = 0usize;
    while out.len() < size && attempts < 200 * size.max(1) {
        attempts += 1;
        let qr = rng.gen_range(1..=2);
        let pr = rng.gen_range(qr..=(qr + 1).min(3));
        let q = if rng.gen_bool(0.7) { n(qr) } else { sharp_fs_pool(rng.gen(), 6).into_iter().find(|m| m.rank() == qr).unwrap_or_else(|| n(qr)) };
        let entries: Vec<num::BigInt> = (0..pr * qr).map(|_| num::BigInt::from(rng.gen_range(0..=2))).collect();
        let m = IntMatrix::new(pr, qr, entries).expect("shape");
        let Ok(h) = MonoidHom::new(q, n(pr), m) else { continue };
        if flattenable(&h) && !out.contains(&h) {
            out.push(h);
        }
    }
    out
}

fn flattenable(h: &MonoidHom) -> bool {
    let (q, p) = (h.source(), h.target());
    q.is_sharp()
        && p.is_sharp()
        && q.is_full_dimensional()
        && p.is_full_dimensional()
        && q.is_saturated()
        && p.is_saturated()
        && h.is_injective()
        && h.is_local()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_are_deterministic_and_sized() {
        let a = hom_pool(DEFAULT_SEED, 100);
        assert!(a.len() >= 100);
        assert_eq!(a, hom_pool(DEFAULT_SEED, 100));
        assert!(composable_pairs(&a).len() >= 40);
        assert!(a.iter().all(|h| h.source().generators().len() <= 4 && h.target().generators().len() <= 4));
        let f = flatten_pool(DEFAULT_SEED, 20);
        assert!(f.len() >= 10);
    }
}
