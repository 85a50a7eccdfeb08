mod common;

use common::random_order;
use pgfs_core::env::EnvRng;
use pgfs_core::featurize::{descriptor_vector, environments, morgan_fingerprint, Descriptor, NormStats};
use pgfs_core::molgraph::parse_smiles;
use rand::SeedableRng;

fn descriptor(smiles: &str, d: Descriptor) -> f64 {
    d.compute(&parse_smiles(smiles).unwrap())
}

#[test]
fn fingerprints_and_descriptors_ignore_atom_order() {
    let mut rng = EnvRng::seed_from_u64(100);
    for smiles in ["CC(C)Cc1ccc(cc1)C(C)C(=O)O", "O=C(NCC1CC1)c1ccc(Br)cc1", "C1CCNCC1", "CS(=O)(=O)N1CCOCC1"] {
        let m = parse_smiles(smiles).unwrap();
        let fp = morgan_fingerprint(&m);
        let desc = descriptor_vector(&m);
        for _ in 0..100 {
            let p = m.permuted(&random_order(m.atom_count(), &mut rng));
            assert_eq!(morgan_fingerprint(&p), fp, "{smiles}");
            for (a, b) in descriptor_vector(&p).iter().zip(&desc) {
                assert!((a - b).abs() <= 1e-12, "{smiles}");
            }
        }
    }
}

#[test]
fn environment_counts_by_hand() {
    // Ethane: two atom environments plus one shared radius-1 bond set.
    assert_eq!(environments(&parse_smiles("CC").unwrap(), 2).len(), 3);
    // Propane: three atoms, two single-bond sets, then the whole molecule once.
    assert_eq!(environments(&parse_smiles("CCC").unwrap(), 2).len(), 6);
    // Methane has only its atom.
    assert_eq!(morgan_fingerprint(&parse_smiles("C").unwrap()).count_ones(), 1);
}

#[test]
fn descriptor_values_by_hand() {
    use Descriptor::*;
    let cases: &[(&str, Descriptor, f64)] = &[
        ("CCO", MolWeight, 46.069),
        ("CCO", HeavyAtoms, 3.0),
        ("CCO", HBondDonors, 1.0),
        ("CCO", HBondAcceptors, 1.0),
        ("CCO", FractionCsp3, 1.0),
        ("CCO", Tpsa, 20.23),
        ("CCO", HeteroatomFraction, 1.0 / 3.0),
        ("c1ccccc1", Rings, 1.0),
        ("c1ccccc1", AromaticRings, 1.0),
        ("c1ccccc1", FractionCsp3, 0.0),
        ("c1ccccc1", LargestRing, 6.0),
        // six edges, one ring, every distance sum equal to 9
        ("c1ccccc1", BalabanJ, 2.0),
        // two edges, no ring, distance sums 3, 2, 3
        ("CCC", BalabanJ, 4.0 / 6f64.sqrt()),
        ("CCCCC", RotatableBonds, 2.0),
        ("CC(=O)[O-]", NetCharge, -1.0),
        ("C[N+](C)(C)C", NetCharge, 1.0),
    ];
    for &(smiles, d, expected) in cases {
        let got = descriptor(smiles, d);
        assert!((got - expected).abs() <= 1e-9, "{smiles} {}: {got} vs {expected}", d.name());
    }
    for d in Descriptor::ALL {
        assert_eq!(Descriptor::from_name(d.name()), Some(d));
    }
}

#[test]
fn normalizer_endpoints_and_clipping() {
    let rows = vec![vec![0.0, 5.0, 2.0], vec![10.0, 7.0, 2.0], vec![4.0, 6.0, 2.0]];
    let n = NormStats::fit(&["a", "b", "c"], &rows).unwrap();
    assert_eq!(n.normalize(&[0.0, 5.0, 2.0]), vec![-1.0, -1.0, 0.0]);
    assert_eq!(n.normalize(&[10.0, 7.0, 2.0]), vec![1.0, 1.0, 0.0]);
    assert_eq!(n.normalize(&[5.0, 6.0, 9.0]), vec![0.0, 0.0, 0.0]);
    assert_eq!(n.normalize(&[-3.0, 100.0, -1.0]), vec![-1.0, 1.0, 0.0]);
    assert_eq!(n.degenerate(), vec![false, false, true]);
    assert_eq!(NormStats::from_text(&n.to_text()).unwrap(), n);
    assert!(NormStats::fit(&["a"], &[]).is_err());
    assert!(NormStats::fit(&["a"], &rows).is_err());
}

#[test]
fn bundled_features_are_finite_and_bounded() {
    let index = common::bundled_index();
    for b in index.blocks() {
        let x = &b.features;
        assert!(x.iter().all(|v| v.is_finite() && (-1.0..=1.0).contains(v)));
    }
}
