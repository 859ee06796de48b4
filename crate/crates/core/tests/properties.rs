use num_bigint::BigUint;
use proptest::prelude::*;

use cayley_entropy::bifurcation::{
    cell_basic_sets, partition_plane, sweep_with_workers, write_csv, Resolution, SweepConfig,
};
use cayley_entropy::ctnn::{
    admissible_patterns, classify, critical_a, critical_a_from_sums, ctnn_entropy, dual_region_map, hypercube,
    verify_critical_by_definition, ChildCouplings, Template,
};
use cayley_entropy::entropy::{check_ln_d_criterion, entropy_tsft};
use cayley_entropy::separation::{check_realizable, is_linearly_separable, realize, Condition, SeparationMode, VertexSet};
use cayley_entropy::snre::Snre;
use cayley_entropy::spectral::spectral_radius_int;
use cayley_entropy::treeshift::{
    block_support_size, count_blocks, count_blocks_log, entropy_estimate, enumerate_blocks, essential_symbols,
    prune_dead_symbols, Alphabet, MarkovTreeShift, TwoBlock,
};

const TOL: f64 = 1e-9;

fn shift_from_mask(k: usize, d: usize, mask: &[bool]) -> MarkovTreeShift {
    let names: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let blocks = MarkovTreeShift::full(&refs, d).unwrap().all_two_blocks().unwrap();
    let allowed: Vec<TwoBlock> = blocks.into_iter().zip(mask).filter(|(_, &m)| m).map(|(b, _)| b).collect();
    MarkovTreeShift::new(Alphabet::new(names).unwrap(), d, allowed).unwrap()
}

/// Random Markov tree-shifts with `k <= 3`, `d <= 2`, or `k <= 2`, `d = 3`.
fn small_shift() -> impl Strategy<Value = MarkovTreeShift> {
    prop_oneof![(1usize..=3, 1usize..=2), (1usize..=2, Just(3usize))].prop_flat_map(|(k, d)| {
        let n = k * k.pow(d as u32);
        (Just(k), Just(d), prop::collection::vec(any::<bool>(), n)).prop_map(|(k, d, m)| shift_from_mask(k, d, &m))
    })
}

/// All 256 two-symbol shifts with two children.
fn binary_family() -> Vec<MarkovTreeShift> {
    (0u32..256)
        .map(|mask| {
            let bits: Vec<bool> = (0..8).map(|i| mask >> i & 1 == 1).collect();
            shift_from_mask(2, 2, &bits)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn snre_reproduces_counts(x in small_shift()) {
        let f = Snre::from_tsft(&x);
        let exact = count_blocks(&x, 6, 1_000_000).unwrap();
        for (n, level) in f.evaluate(6).iter().enumerate() {
            prop_assert_eq!(level.as_slice(), exact.level(n + 1));
        }
    }

    #[test]
    fn enumeration_matches_counts(x in small_shift().prop_filter("d <= 2", |x| x.degree() <= 2)) {
        for n in 1..=3 {
            let listed = enumerate_blocks(&x, n, u128::MAX).unwrap().len();
            prop_assert_eq!(count_blocks(&x, n, 1_000_000).unwrap().total(n), BigUint::from(listed));
        }
    }

    #[test]
    fn counts_respect_support_bound(x in small_shift()) {
        let k = BigUint::from(x.num_symbols());
        let series = count_blocks(&x, 5, 1_000_000).unwrap();
        for n in 1..=5 {
            let bound = k.pow(block_support_size(x.degree(), n) as u32);
            prop_assert!(series.level(n).iter().all(|g| g <= &bound));
        }
    }

    #[test]
    fn log_counts_match_exact(x in small_shift()) {
        let exact = count_blocks(&x, 7, 1_000_000).unwrap();
        let logs = count_blocks_log(&x, 7).unwrap();
        for n in 1..=7 {
            for (g, l) in exact.level(n).iter().zip(logs.level(n)) {
                let g = g.to_string().parse::<f64>().unwrap();
                if g == 0.0 {
                    prop_assert_eq!(*l, f64::NEG_INFINITY);
                } else {
                    prop_assert!((l.exp() - g).abs() <= 1e-9 * g, "{} vs {}", l.exp(), g);
                }
            }
        }
    }

    #[test]
    fn pruning_leaves_live_symbols(x in small_shift()) {
        let p = prune_dead_symbols(&x);
        for i in 0..p.shift.num_symbols() {
            prop_assert!(p.shift.blocks_rooted_at(i).next().is_some());
        }
    }

    #[test]
    fn essential_set_matches_direct_recursion(x in small_shift()) {
        let y = prune_dead_symbols(&x).shift;
        let k = y.num_symbols();
        if k == 0 {
            return Ok(());
        }
        let series = count_blocks(&y, k + 1, 1_000_000).unwrap();
        let two = BigUint::from(2u32);
        let direct: Vec<bool> = (0..k).map(|i| (1..=k + 1).any(|n| series.level(n)[i] >= two)).collect();
        prop_assert_eq!(essential_symbols(&y), direct);
    }

    #[test]
    fn entropy_bounded_by_ln_d(x in small_shift()) {
        let r = entropy_tsft(&x).unwrap();
        let ln_d = (x.degree() as f64).ln();
        prop_assert!(r.entropy >= 0.0 && r.entropy <= ln_d + TOL);
        let ess = essential_symbols(&prune_dead_symbols(&x).shift);
        if !ess.is_empty() && ess.iter().all(|&e| e) {
            prop_assert!((r.entropy - ln_d).abs() <= TOL);
        }
    }

    #[test]
    fn criterion_decides_ln_d(x in small_shift()) {
        let h = entropy_tsft(&x).unwrap().entropy;
        let ln_d = (x.degree() as f64).ln();
        if x.degree() > 1 {
            prop_assert_eq!(check_ln_d_criterion(&x).holds, (h - ln_d).abs() <= TOL);
        }
    }

    #[test]
    fn two_by_two_spectral_radius(m in prop::collection::vec(0u32..6, 4)) {
        let mat = vec![vec![m[0], m[1]], vec![m[2], m[3]]];
        let (a, b, c, d) = (m[0] as f64, m[1] as f64, m[2] as f64, m[3] as f64);
        let tr = a + d;
        let disc = (a - d) * (a - d) + 4.0 * b * c;
        let closed = 0.5 * (tr + disc.sqrt());
        prop_assert!((spectral_radius_int(&mat).unwrap() - closed).abs() <= 1e-10 * closed.max(1.0));
    }

    #[test]
    fn spectral_radius_within_row_sums(m in prop::collection::vec(0u32..4, 16)) {
        let mat: Vec<Vec<u32>> = m.chunks(4).map(<[u32]>::to_vec).collect();
        let sums: Vec<f64> = mat.iter().map(|r| r.iter().sum::<u32>() as f64).collect();
        let rho = spectral_radius_int(&mat).unwrap();
        let lo = sums.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = sums.iter().cloned().fold(0.0, f64::max);
        prop_assert!(rho >= lo - 1e-9 && rho <= hi + 1e-9);
    }

    #[test]
    fn ctnn_dichotomy_and_duality(
        alpha in prop::collection::vec(-2.0f64..2.0, 2..=3),
        a in -4.0f64..5.0,
        z in -3.0f64..3.0,
    ) {
        let t = Template::new(a, alpha.clone(), z).unwrap();
        let c = classify(&t);
        prop_assume!(!c.boundary);
        let e = ctnn_entropy(&t).unwrap();
        let ln_d = (alpha.len() as f64).ln();
        prop_assert!(e.entropy.abs() <= TOL || (e.entropy - ln_d).abs() <= TOL);
        prop_assert_eq!(e.entropy.abs() <= TOL, e.code.predicts_zero_entropy());

        let dual = dual_region_map(&t);
        let bd = admissible_patterns(&dual).unwrap();
        prop_assert_eq!(bd.code(), e.code.swapped());
        prop_assert_eq!(&bd, &c.basic.negated());
        prop_assert!((ctnn_entropy(&dual).unwrap().entropy - e.entropy).abs() <= TOL);
    }

    #[test]
    fn generated_sets_are_realizable(
        alpha in prop::collection::vec(-2.0f64..2.0, 2..=3),
        a in -4.0f64..5.0,
        z in -3.0f64..3.0,
    ) {
        let t = Template::new(a, alpha, z).unwrap();
        let c = classify(&t);
        prop_assume!(!c.boundary);
        prop_assert_ne!(check_realizable(&c.basic).unwrap(), Condition::None);
        let r = realize(&c.basic).unwrap().expect("generated set is realizable");
        prop_assert_eq!(admissible_patterns(&r.template).unwrap(), c.basic);
    }

    #[test]
    fn sum_form_of_critical_curve(
        alpha in prop::collection::vec(-3.0f64..3.0, 1..=4),
        z in -4.0f64..4.0,
    ) {
        let cc = ChildCouplings::new(alpha).unwrap();
        prop_assume!(!cc.degenerate);
        prop_assert!((critical_a(&cc, z) - critical_a_from_sums(&cc, z)).abs() <= 1e-12);
    }

    #[test]
    fn cells_reproduce_codes(alpha in prop::collection::vec(-2.0f64..2.0, 1..=3)) {
        let cc = ChildCouplings::new(alpha).unwrap();
        let part = partition_plane(&cc);
        let m = part.thresholds.len();
        prop_assert_eq!(part.cells.len(), (m + 1) * (m + 1));
        for (cell, b) in part.cells.iter().zip(cell_basic_sets(&part).unwrap()) {
            prop_assert_eq!(b.code(), cell.code);
        }
    }

    #[test]
    fn separators_are_exact(bits in prop::collection::vec(any::<bool>(), 16)) {
        let cube = hypercube(4);
        let u = VertexSet::new(4, cube.iter().zip(&bits).filter(|(_, &b)| b).map(|(v, _)| v.clone())).unwrap();
        let f = is_linearly_separable(&u, SeparationMode::Affine).unwrap();
        if let Some(f) = &f {
            prop_assert!(f.separates(&u));
        }
        let c = is_linearly_separable(&u.complement(), SeparationMode::Affine).unwrap();
        let n = is_linearly_separable(&u.negated(), SeparationMode::Affine).unwrap();
        prop_assert_eq!(f.is_some(), c.is_some());
        prop_assert_eq!(f.is_some(), n.is_some());
    }
}

#[test]
fn ln_d_criterion_over_binary_family() {
    let ln2 = 2f64.ln();
    for x in binary_family() {
        let h = entropy_tsft(&x).unwrap().entropy;
        assert!(h.abs() <= TOL || (h - ln2).abs() <= TOL);
        assert_eq!(check_ln_d_criterion(&x).holds, (h - ln2).abs() <= TOL, "{:?}", x.allowed());
    }
}

#[test]
fn estimates_converge_over_binary_family() {
    for x in binary_family() {
        let h = entropy_tsft(&x).unwrap().entropy;
        if h > TOL {
            let est = entropy_estimate(&x, 200).unwrap().value;
            assert!((est - h).abs() <= 0.05, "{est} vs {h}");
        }
    }
}

fn config(alpha: Vec<f64>, res: usize) -> SweepConfig {
    SweepConfig {
        d: alpha.len(),
        alpha,
        a_range: [-3.0, 4.0],
        z_range: [-2.5, 2.5],
        resolution: Resolution::Square(res),
        tol: None,
    }
}

#[test]
fn sweep_csv_is_byte_identical_across_workers() {
    let cfg = config(vec![-0.25, 0.75], 61);
    let mut outputs = Vec::new();
    for w in [1, 3, 8] {
        let mut buf = Vec::new();
        write_csv(&sweep_with_workers(&cfg, Some(w)).unwrap(), &mut buf).unwrap();
        outputs.push(buf);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn ln_d_region_is_an_up_set_above_the_curve() {
    for alpha in [vec![-0.25, 0.75], vec![0.4, 0.3, -0.2], vec![1.0, -0.6]] {
        let cc = ChildCouplings::new(alpha.clone()).unwrap();
        let cfg = config(alpha, 101);
        let grid = sweep_with_workers(&cfg, None).unwrap();
        let step = grid.a_values[1] - grid.a_values[0];
        for iz in 0..grid.z_values.len() {
            let column: Vec<_> = (0..grid.a_values.len()).map(|ia| grid.point(ia, iz)).collect();
            let first = column.iter().position(|p| p.entropy.is_some_and(|h| h > TOL));
            let Some(first) = first else { continue };
            assert!(column[first..].iter().all(|p| p.entropy.is_none_or(|h| h > TOL)));
            let z = grid.z_values[iz];
            let inf = column[first].a;
            assert!((inf - critical_a(&cc, z)).abs() <= step + 1e-12, "z = {z}: {inf} vs {}", critical_a(&cc, z));
        }
    }
}

#[test]
fn sampling_oracle_tracks_the_curve() {
    let resolution = 0.05;
    for alpha in [vec![-0.25, 0.75], vec![0.5, 0.2], vec![0.4, 0.3, -0.2]] {
        let cc = ChildCouplings::new(alpha).unwrap();
        for i in 0..=16 {
            let z = -2.0 + 0.25 * i as f64;
            let a = critical_a(&cc, z);
            let probe = |a: f64| verify_critical_by_definition(&cc, (a, z), resolution, 300, 0).unwrap().critical;
            assert!(probe(a), "on-curve point at z = {z}");
            assert!(probe(a + 0.5 * resolution), "within one resolution at z = {z}");
            assert!(!probe(a + 2.5 * resolution) && !probe(a - 2.5 * resolution), "far point at z = {z}");
        }
    }
}
