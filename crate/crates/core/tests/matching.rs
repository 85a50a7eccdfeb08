mod common;

use common::{brute_force_mappings, brute_force_match_count, bundled_index, bundled_molecules, bundled_templates};
use pgfs_core::molgraph::parse_smiles;
use pgfs_core::pattern::{all_mappings, count_matches, find_matches, has_unique_match, parse_smarts};
use proptest::prelude::*;

#[test]
fn template_patterns_agree_with_exhaustive_enumeration() {
    let mols = bundled_molecules();
    let templates = bundled_templates();
    let mut pairs = 0;
    for t in &templates {
        for (k, p) in t.reactants.iter().enumerate() {
            for (i, m) in mols.iter().enumerate() {
                let oracle = brute_force_match_count(p, m);
                let got = count_matches(p, m, usize::MAX);
                assert_eq!(got, oracle, "{} reactant {k} on block {i}", t.name);
                assert_eq!(
                    all_mappings(p, m, usize::MAX).len(),
                    brute_force_mappings(p, m).len(),
                    "{} reactant {k} on block {i}: raw mappings",
                    t.name
                );
                pairs += 1;
            }
        }
    }
    assert!(pairs > 10_000);
}

#[test]
fn alert_patterns_agree_with_exhaustive_enumeration() {
    let params = pgfs_core::scoring::QedParams::bundled();
    for m in bundled_molecules().iter().step_by(3) {
        for (name, p) in &params.alerts {
            assert_eq!(count_matches(p, m, usize::MAX), brute_force_match_count(p, m), "{name}");
        }
    }
}

#[test]
fn mask_and_compat_follow_the_unique_match_rule() {
    let idx = bundled_index();
    for (t_i, t) in idx.templates().iter().enumerate() {
        for (b_i, b) in idx.blocks().iter().enumerate() {
            let first = brute_force_match_count(&t.reactants[0], &b.molecule) == 1;
            assert_eq!(idx.block_mask(b_i)[t_i], first, "{} first reactant, {}", t.name, b.smiles);
            if t.arity() == 2 {
                let second = brute_force_match_count(&t.reactants[1], &b.molecule) == 1;
                assert_eq!(idx.compat(t_i).contains(&b_i), second, "{} second reactant, {}", t.name, b.smiles);
            }
        }
        assert!(idx.compat(t_i).windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn match_limit_truncates() {
    let p = parse_smarts("[CH2]").unwrap();
    let m = parse_smiles("CCCCCCC").unwrap();
    assert_eq!(count_matches(&p, &m, usize::MAX), 5);
    assert_eq!(find_matches(&p, &m, 3).len(), 3);
    assert!(!has_unique_match(&p, &m));
}

const PATTERNS: &[&str] = &[
    "[OH]",
    "[CH3]",
    "C=O",
    "[#6]~[#7]",
    "c:c",
    "[C;R]",
    "[N;!H0]",
    "C(=O)[OH]",
    "[c;!R]",
    "*~*~*",
    "[O-]",
    "C-C",
];

const MOLECULES: &[&str] = &[
    "CCO",
    "CCC",
    "CC(=O)O",
    "c1ccccc1",
    "C1CCNCC1",
    "OC(=O)c1ccncc1",
    "O=[N+]([O-])c1ccccc1",
    "CC(C)(C)OC(=O)N",
    "Nc1ccc(O)cc1",
    "C1CC1C#N",
];

proptest! {
    #[test]
    fn matcher_counts_equal_oracle(pi in 0..PATTERNS.len(), mi in 0..MOLECULES.len()) {
        let p = parse_smarts(PATTERNS[pi]).unwrap();
        let m = parse_smiles(MOLECULES[mi]).unwrap();
        prop_assert_eq!(count_matches(&p, &m, usize::MAX), brute_force_match_count(&p, &m));
        let found = find_matches(&p, &m, usize::MAX);
        for map in &found {
            for (q, b) in p.bonds.iter().enumerate() {
                prop_assert_eq!(m.bond_between(map.atoms[b.a], map.atoms[b.b]), Some(map.bonds[q]));
            }
        }
    }
}
