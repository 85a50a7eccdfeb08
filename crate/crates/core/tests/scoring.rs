mod common;

use common::bundled_molecules;
use pgfs_core::env::EnvRng;
use pgfs_core::molgraph::parse_smiles;
use pgfs_core::scoring::{
    crippen_logp, crippen_mr, penalized_clogp, qed, qed_properties, ring_penalty, sa_score, AdModel, CrippenTable,
    FragmentTable, PlogpParts, QedParams,
};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// `(type, count)` lists assigned by hand from the atom-typing rules.
fn table_sum(types: &[(&str, usize)]) -> (f64, f64) {
    let t = CrippenTable::bundled();
    types.iter().fold((0.0, 0.0), |(lp, mr), &(ty, n)| {
        let (a, b) = t.get(ty).unwrap();
        (lp + a * n as f64, mr + b * n as f64)
    })
}

#[test]
fn crippen_hand_typing() {
    let cases: &[(&str, &[(&str, usize)])] = &[
        ("CC", &[("C1", 2), ("H1", 6)]),
        ("c1ccccc1", &[("C18", 6), ("H1", 6)]),
        ("CCO", &[("C1", 1), ("C3", 1), ("O2", 1), ("H1", 5), ("H2", 1)]),
        ("c1ccncc1", &[("C18", 5), ("N11", 1), ("H1", 5)]),
        ("CN", &[("C3", 1), ("N1", 1), ("H1", 3), ("H3", 2)]),
    ];
    for &(smiles, types) in cases {
        let m = parse_smiles(smiles).unwrap();
        let (lp, mr) = table_sum(types);
        assert!(close(crippen_logp(&m), lp, 1e-12), "{smiles}: {} vs {lp}", crippen_logp(&m));
        assert!(close(crippen_mr(&m), mr, 1e-12), "{smiles}");
    }
    // Published reference values for two of them.
    assert!(close(crippen_logp(&parse_smiles("CC").unwrap()), 1.0262, 1e-9));
    assert!(close(crippen_logp(&parse_smiles("c1ccccc1").unwrap()), 1.6866, 1e-9));
}

fn ads(x: f64, p: [f64; 7]) -> f64 {
    let [a, b, c, d, e, f, dmax] = p;
    (a + b / (1.0 + (-(x - c + d / 2.0) / e).exp()) * (1.0 - 1.0 / (1.0 + (-(x - c - d / 2.0) / f).exp()))) / dmax
}

/// Parameter rows typed from the bundled table.
const QED_ROWS: [([f64; 7], f64); 8] = [
    ([2.817065973, 392.5754953, 290.7489764, 2.419764353, 49.22325677, 65.37051707, 104.9805561], 0.66),
    ([3.172690585, 137.8624751, 2.534937431, 4.581497897, 0.822739154, 0.576295591, 131.3186604], 0.46),
    ([2.948620388, 160.4605972, 3.615294657, 4.435986202, 0.290141953, 1.300669958, 148.7763046], 0.05),
    ([1.618662227, 1010.051101, 0.985094388, 0.000000001, 0.713820843, 0.920922555, 258.1632616], 0.61),
    ([1.876861559, 125.2232657, 62.90773554, 87.83366614, 12.01999824, 28.51324732, 104.5686167], 0.06),
    ([0.010000000, 272.4121427, 2.558379970, 1.566534860, 1.271567166, 2.758063707, 105.4420403], 0.65),
    ([3.217788970, 957.7374108, 2.274627939, 0.000000001, 1.317690384, 0.375760881, 312.3372610], 0.48),
    ([0.010000000, 1199.094025, -0.09002883, 0.000000001, 0.185904477, 0.875193782, 417.7253140], 0.95),
];

fn qed_by_hand(props: [f64; 8]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, &(p, w)) in QED_ROWS.iter().enumerate() {
        num += w * ads(props[k], p).ln();
        den += w;
    }
    (num / den).exp()
}

#[test]
fn qed_hand_evaluation() {
    let logp = |types: &[(&str, usize)]| table_sum(types).0;
    // MW, ALOGP, HBA, HBD, PSA, ROTB, AROM, ALERTS
    let cases: [(&str, [f64; 8]); 5] = [
        ("c1ccccc1", [78.114, logp(&[("C18", 6), ("H1", 6)]), 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        ("CC", [30.07, logp(&[("C1", 2), ("H1", 6)]), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        (
            "CCO",
            [46.069, logp(&[("C1", 1), ("C3", 1), ("O2", 1), ("H1", 5), ("H2", 1)]), 1.0, 1.0, 20.23, 0.0, 0.0, 0.0],
        ),
        ("c1ccncc1", [79.102, logp(&[("C18", 5), ("N11", 1), ("H1", 5)]), 1.0, 0.0, 12.89, 0.0, 1.0, 0.0]),
        ("CN", [31.058, logp(&[("C3", 1), ("N1", 1), ("H1", 3), ("H3", 2)]), 1.0, 1.0, 26.02, 0.0, 0.0, 0.0]),
    ];
    let params = QedParams::bundled();
    for (smiles, props) in cases {
        let m = parse_smiles(smiles).unwrap();
        let got = qed_properties(&m, params);
        for k in 0..8 {
            assert!(close(got[k], props[k], 1e-9), "{smiles} property {k}: {} vs {}", got[k], props[k]);
        }
        let expected = qed_by_hand(props);
        assert!(close(qed(&m), expected, 1e-12), "{smiles}: {} vs {expected}", qed(&m));
    }
    for (k, &(p, w)) in QED_ROWS.iter().enumerate() {
        let a = params.ads[k];
        assert_eq!([a.a, a.b, a.c, a.d, a.e, a.f, a.dmax], p);
        assert_eq!(params.weights[k], w);
    }
}

#[test]
fn qed_inside_open_interval_for_bundled_blocks() {
    for m in bundled_molecules() {
        let q = qed(&m);
        assert!(q > 0.0 && q < 1.0, "{q}");
    }
}

#[test]
fn monotone_past_rotatable_peak() {
    let params = QedParams::bundled();
    let mut x = qed_properties(&parse_smiles("CC(=O)Nc1ccc(O)cc1").unwrap(), params);
    let mut last = f64::INFINITY;
    for rotb in 3..15 {
        x[5] = rotb as f64;
        let q = params.qed_from_properties(&x);
        assert!(q < last);
        last = q;
    }
}

#[test]
fn plogp_is_the_composition_of_its_parts() {
    let mols = bundled_molecules();
    let table = FragmentTable::build(&mols).unwrap();
    for m in mols.iter().step_by(61).take(10) {
        let parts = PlogpParts::of(m, &table);
        assert_eq!(parts.logp, crippen_logp(m));
        assert_eq!(parts.sa, sa_score(m, &table));
        assert_eq!(parts.ring_penalty, (m.largest_ring_size() as f64 - 6.0).max(0.0));
        assert!(close(penalized_clogp(m, &table), parts.logp - parts.sa - parts.ring_penalty, 1e-12));
    }
    for m in &mols {
        let sa = sa_score(m, &table);
        assert!((1.0..=10.0).contains(&sa));
    }
}

#[test]
fn ring_penalties_by_size() {
    for (smiles, p) in [("CCCC", 0.0), ("C1CCCCC1", 0.0), ("C1CCCCCCC1", 2.0), ("C1CCCCCCCCCC1", 5.0)] {
        assert_eq!(ring_penalty(&parse_smiles(smiles).unwrap()), p, "{smiles}");
    }
}

fn gaussian(n: usize, dim: usize, shift: f64, rng: &mut EnvRng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| shift + Distribution::<f64>::sample(&StandardNormal, rng)).collect::<Vec<f64>>())
        .collect()
}

/// Mean of the `k` smallest Euclidean distances from `x` to `rows`,
/// skipping row `skip`.
fn mean_knn(rows: &[Vec<f64>], x: &[f64], k: usize, skip: Option<usize>) -> f64 {
    let mut d: Vec<f64> = rows
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != skip)
        .map(|(_, r)| r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .collect();
    d.sort_by(f64::total_cmp);
    d[..k].iter().sum::<f64>() / k as f64
}

#[test]
fn ad_threshold_matches_direct_evaluation() {
    let mut rng = EnvRng::seed_from_u64(9);
    let train = gaussian(60, 3, 0.0, &mut rng);
    let (k, z) = (5, 1.5);
    let model = AdModel::fit_with(train.clone(), k, z).unwrap();
    let stats: Vec<f64> = (0..train.len()).map(|i| mean_knn(&train, &train[i], k, Some(i))).collect();
    let mean = stats.iter().sum::<f64>() / stats.len() as f64;
    let sd = (stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (stats.len() - 1) as f64).sqrt();
    assert!(close(model.threshold(), mean + z * sd, 1e-12));
    for q in gaussian(20, 3, 0.5, &mut rng) {
        assert!(close(model.distance_of(&q), mean_knn(&train, &q, k, None), 1e-12));
    }
}

#[test]
fn ad_on_a_gaussian_sample() {
    let mut rng = EnvRng::seed_from_u64(400);
    let train = gaussian(400, 2, 0.0, &mut rng);
    let model = AdModel::fit_with(train, 20, 1.5).unwrap();
    let held = gaussian(400, 2, 0.0, &mut rng);
    let inside = held.iter().filter(|x| model.inside(x)).count() as f64 / 400.0;
    assert!(inside >= 0.8, "{inside}");
}

#[test]
fn ad_identical_points() {
    let model = AdModel::fit_with(vec![vec![1.0, 2.0]; 10], 3, 1.5).unwrap();
    assert!(model.inside(&[1.0, 2.0]));
    assert!(!model.inside(&[5.0, 2.0]));
}
