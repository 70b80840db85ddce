//! Property tests for the algebraic laws the engine promises: rational wire
//! strings, box-set algebra, time grids, Cartesian powers, pair scopes,
//! staircase generation, and measure multiplicativity.

mod common;

use common::{rat, rint, toy_schedule, Gen};
use forge_core::boxset::{Aabb, BoxSet};
use forge_core::cfcore::cartesian_power;
use forge_core::filling::time_grid;
use forge_core::forcing::{gen_aux, AuxFlowSpec, PairScope};
use forge_core::scalar::{ParseFracError, Scalar};
use forge_core::Rat;
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// A box with integer-multiple-of-1/q endpoints inside `[0, 8)^dim`.
fn lattice_box(dim: usize, q: i64) -> impl Strategy<Value = Aabb<Rat>> {
    let side = 8 * q;
    prop::collection::vec((0..side).prop_flat_map(move |a| (Just(a), a + 1..=side)), dim)
        .prop_map(move |axes| {
            let lo = axes.iter().map(|&(a, _)| rat(a, q)).collect();
            let hi = axes.iter().map(|&(_, b)| rat(b, q)).collect();
            Aabb::new(lo, hi).expect("lo < hi by construction")
        })
}

fn lattice_set(dim: usize, q: i64) -> impl Strategy<Value = BoxSet<Rat>> {
    prop::collection::vec(lattice_box(dim, q), 0..4).prop_map(move |boxes| {
        BoxSet::from_boxes(dim, boxes).expect("well-formed boxes")
    })
}

/// (dim, q, A, B) with both sets over the same lattice.
fn set_pair() -> impl Strategy<Value = (usize, i64, BoxSet<Rat>, BoxSet<Rat>)> {
    (1..=3usize, 1..=8i64).prop_flat_map(|(dim, q)| {
        (Just(dim), Just(q), lattice_set(dim, q), lattice_set(dim, q))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    // -- rational wire strings ---------------------------------------------

    #[test]
    fn rational_strings_round_trip(p in -1_000_000_000i64..1_000_000_000, q in 1i64..1_000_000) {
        let v: Rat = Rat::parse_frac(&format!("{p}/{q}")).expect("well-formed");
        prop_assert_eq!(&v, &(rint(p) / rint(q)));
        let rendered = v.frac_string();
        prop_assert_eq!(Rat::parse_frac(&rendered).expect("reparse"), v.clone());
        // Rendering is reduced: numerator and denominator are coprime and
        // the denominator is positive.
        let (n, d) = rendered.split_once('/').expect("always has a denominator");
        let n: i128 = n.parse().expect("integer numerator");
        let d: i128 = d.parse().expect("integer denominator");
        prop_assert!(d > 0);
        if n == 0 {
            prop_assert_eq!(d, 1);
        } else {
            prop_assert_eq!(num_integer::Integer::gcd(&n.abs(), &d), 1);
        }
    }

    #[test]
    fn plain_integers_parse(p in -1_000_000i64..1_000_000) {
        let v: Rat = Rat::parse_frac(&p.to_string()).expect("integer form");
        prop_assert_eq!(v, rint(p));
    }

    #[test]
    fn zero_denominators_are_rejected(p in -1_000i64..1_000) {
        let r: Result<Rat, _> = Rat::parse_frac(&format!("{p}/0"));
        prop_assert!(matches!(r, Err(ParseFracError::ZeroDenominator(_))));
    }

    // -- box-set algebra ----------------------------------------------------

    #[test]
    fn volume_satisfies_inclusion_exclusion((_, _, a, b) in set_pair()) {
        let union = a.union(&b).expect("union");
        let inter = a.intersect(&b).expect("intersect");
        prop_assert_eq!(union.volume() + inter.volume(), a.volume() + b.volume());
    }

    #[test]
    fn difference_and_intersection_partition((_, _, a, b) in set_pair()) {
        let diff = a.subtract(&b).expect("subtract");
        let inter = a.intersect(&b).expect("intersect");
        prop_assert!(diff.is_disjoint(&inter).expect("disjoint"));
        prop_assert_eq!(diff.union(&inter).expect("union"), a.clone());
    }

    #[test]
    fn emptiness_of_difference_characterizes_inclusion((_, _, a, b) in set_pair()) {
        let diff = a.subtract(&b).expect("subtract");
        prop_assert_eq!(diff.volume() == rint(0), a.is_subset(&b).expect("subset"));
        let inter = a.intersect(&b).expect("intersect");
        prop_assert_eq!(inter.volume() == rint(0), a.is_disjoint(&b).expect("disjoint"));
    }

    #[test]
    fn canonical_form_is_idempotent((dim, _, a, _) in set_pair()) {
        let rebuilt = BoxSet::from_boxes(dim, a.boxes().to_vec()).expect("rebuild");
        prop_assert_eq!(rebuilt, a.clone());
    }

    #[test]
    fn translation_is_invertible_and_volume_preserving(
        (dim, q, a, _) in set_pair(),
        raw in prop::collection::vec(-8i64..=8, 3),
    ) {
        let t: Vec<Rat> = raw.iter().take(dim).map(|&c| rat(c, q)).collect();
        let back: Vec<Rat> = t.iter().map(|x| -x.clone()).collect();
        let moved = a.translate(&t).expect("translate");
        prop_assert_eq!(moved.volume(), a.volume());
        prop_assert_eq!(moved.translate(&back).expect("translate back"), a.clone());
    }

    // -- probe-time grids ---------------------------------------------------

    #[test]
    fn time_grid_spans_the_window_with_fine_mesh(n in 1u32..=6, density in 1u32..=6) {
        let grid: Vec<Rat> = time_grid(n, density);
        if n == 1 {
            prop_assert_eq!(grid.clone(), vec![rint(1)]);
        } else {
            prop_assert_eq!(grid.len(), (n as usize) * (density as usize) + 1);
            prop_assert_eq!(grid.first().unwrap(), &rat(1, n as i64));
            prop_assert_eq!(grid.last().unwrap(), &rint(n as i64));
            let mesh = rat(1, density as i64);
            for w in grid.windows(2) {
                let step = w[1].clone() - w[0].clone();
                prop_assert!(step > rint(0), "grid must increase");
                prop_assert!(step < mesh.clone(), "mesh must beat 1/density");
            }
        }
    }

    #[test]
    fn time_grid_nests_under_density_doubling(n in 1u32..=5, density in 1u32..=4) {
        let coarse: Vec<Rat> = time_grid(n, density);
        let fine: Vec<Rat> = time_grid(n, density * 2);
        for t in &coarse {
            prop_assert!(fine.contains(t), "coarse probe {t} lost after refinement");
        }
    }

    // -- Cartesian powers and pair scopes -----------------------------------

    #[test]
    fn cartesian_power_enumerates_tuples(r in 1usize..=4, d in 1usize..=2, p in 1usize..=3) {
        let vs: Vec<Vec<i64>> = (0..r)
            .map(|i| (0..d).map(|a| (10 * i + a) as i64).collect())
            .collect();
        let pow = cartesian_power(&vs, p);
        prop_assert_eq!(pow.len(), r.pow(p as u32));
        for tuple in &pow {
            prop_assert_eq!(tuple.len(), d * p);
        }
        // First and last follow the lexicographic factor order.
        let first: Vec<i64> = std::iter::repeat(vs[0].clone()).take(p).flatten().collect();
        let last: Vec<i64> = std::iter::repeat(vs[r - 1].clone()).take(p).flatten().collect();
        prop_assert_eq!(pow.first().unwrap(), &first);
        prop_assert_eq!(pow.last().unwrap(), &last);
        // Distinct inputs yield distinct tuples.
        let mut sorted = pow.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), pow.len());
    }

    #[test]
    fn pair_scopes_count_what_they_enumerate(k in 1u64..=4, p in 1u32..=2, width in 0u64..=3) {
        for scope in [PairScope::All, PairScope::Diagonal, PairScope::Banded { width }] {
            let pairs = scope.pairs(k, p).expect("enumerate");
            let count = scope.pair_count(k, p).expect("count");
            prop_assert_eq!(pairs.len() as u128, count, "{} miscounts", scope.describe());
            let total = k.pow(p);
            let mut sorted = pairs.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), pairs.len(), "{} repeats pairs", scope.describe());
            for (a, b) in &pairs {
                prop_assert!(*a < total && *b < total);
            }
        }
    }

    #[test]
    fn sampled_pairs_stay_within_their_cap(k in 1u64..=4, p in 1u32..=2, cap in 1usize..=20, seed in 0u64..1000) {
        let scope = PairScope::Sample { cap, seed };
        let pairs = scope.pairs(k, p).expect("enumerate");
        let count = scope.pair_count(k, p).expect("count");
        prop_assert!(pairs.len() as u128 <= count);
        let total = k.pow(p);
        let mut sorted = pairs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), pairs.len());
        for (a, b) in &pairs {
            prop_assert!(*a < total && *b < total);
        }
        // Re-enumeration with the same seed is identical.
        prop_assert_eq!(scope.pairs(k, p).expect("again"), pairs);
    }

    // -- staircase generation ----------------------------------------------

    #[test]
    fn staircases_validate_strong_with_tracked_ratios(
        cuts in prop::collection::vec(2u32..=4, 1..=3),
        sigma_halves in 3i64..=8,
        unit in 0i64..=2,
        slack in 0i64..=2,
        base in 1i64..=3,
        k in 1usize..=5,
    ) {
        let spec = AuxFlowSpec {
            base_h: None,
            cuts: cuts.clone(),
            sigma: vec![rat(sigma_halves, 2)],
            stair_unit: vec![rint(unit)],
            slack: vec![rint(slack)],
            ratio_cap: None,
        };
        let aux = gen_aux(&spec, &rint(base), k).expect("staircase generates");
        let s = &aux.schedule;
        prop_assert_eq!(s.len(), k + 1);
        prop_assert!(s.is_strong());
        prop_assert_eq!(aux.ratios.len(), k + 1);
        prop_assert_eq!(&aux.ratios[0], &rint(base));
        let mut pieces = rint(1);
        for lvl in 0..k {
            let r = cuts[lvl % cuts.len()];
            prop_assert_eq!(s.c_next(lvl).expect("level").len(), r as usize);
            pieces = pieces * rint(r as i64);
            let expect = s.h(lvl + 1).expect("h").clone() / pieces.clone();
            prop_assert_eq!(&aux.ratios[lvl + 1], &expect);
            prop_assert!(s.h(lvl + 1).expect("h") > s.h(lvl).expect("h"), "cube sides must grow");
            prop_assert_eq!(s.measure_divisor(lvl + 1).expect("divisor"), pieces.clone());
        }
    }

    // -- measure multiplicativity under powers ------------------------------

    #[test]
    fn power_measures_multiply(seed in 0u64..500, p in 1usize..=2) {
        let mut g = Gen::new(seed);
        let dim = 1;
        let s = common::rand_strong_schedule(&mut g, dim, 3);
        let level = g.usize_below(2);
        let c = common::rand_cell_cylinder(&mut g, &s, level, 2, 1);
        let mu = s.cylinder_measure(&c).expect("measure").into_value();

        let sp = s.power_schedule(p).expect("power schedule");
        prop_assert_eq!(sp.dim(), dim * p);
        prop_assert_eq!(sp.len(), s.len());
        // Product base: the same single box repeated across the p factors.
        let b = &c.base().boxes()[0];
        let lo: Vec<Rat> = std::iter::repeat(b.lo().to_vec()).take(p).flatten().collect();
        let hi: Vec<Rat> = std::iter::repeat(b.hi().to_vec()).take(p).flatten().collect();
        let base = BoxSet::from_box(Aabb::new(lo, hi).expect("product box"));
        let cp = sp.cylinder(level, base).expect("product cylinder");
        let mu_p = sp.cylinder_measure(&cp).expect("measure").into_value();
        let mut want = rint(1);
        for _ in 0..p {
            want = want * mu.clone();
        }
        prop_assert_eq!(mu_p, want);
    }

    #[test]
    fn power_one_is_the_identity(seed in 0u64..200) {
        let mut g = Gen::new(seed);
        let dim = 1 + g.usize_below(2);
        let s = common::rand_strong_schedule(&mut g, dim, 3);
        let p1 = s.power_schedule(1).expect("power");
        prop_assert_eq!(p1.dim(), s.dim());
        for lvl in 0..s.len() {
            prop_assert_eq!(p1.h(lvl).expect("h"), s.h(lvl).expect("h"));
            if lvl + 1 < s.len() {
                prop_assert_eq!(p1.c_next(lvl).expect("c"), s.c_next(lvl).expect("c"));
            }
        }
    }
}

#[test]
fn toy_power_schedule_squares_every_translation_set() {
    let s = toy_schedule();
    let p2 = s.power_schedule(2).expect("power");
    assert_eq!(p2.dim(), 2);
    let expected: Vec<Vec<Rat>> = vec![
        vec![rint(0), rint(0)],
        vec![rint(0), rint(3)],
        vec![rint(3), rint(0)],
        vec![rint(3), rint(3)],
    ];
    assert_eq!(p2.c_next(0).expect("level 0"), expected.as_slice());
    assert_eq!(p2.measure_divisor(2).expect("divisor"), rint(16));
}
