use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::molgraph::{parse_smiles, write_smiles, BondOrder, BuildAtom, MolBuilder, Molecule};

use super::matcher::{all_mappings, MatchMap};
use super::smarts::{parse_smarts, BondQuery, PatternGraph};
use super::PatternError;

/// Upper bound on match combinations explored by one [`apply`] call.
pub const MAX_COMBINATIONS: usize = 64;
/// Upper bound on raw mappings collected per reactant.
const MAX_MAPPINGS: usize = 64;

/// Atom-mapped rewrite rule with one or two reactant patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactionTemplate {
    pub name: String,
    pub reactants: Vec<PatternGraph>,
    pub product: PatternGraph,
    /// For each product atom carrying a reactant map label: (product atom,
    /// reactant index, reactant pattern atom).
    pub mapped: Vec<(usize, usize, usize)>,
    /// Source text of each reactant pattern and of the product, for hashing
    /// and display.
    pub reactant_smarts: Vec<String>,
    pub product_smarts: String,
}

/// A product molecule together with its canonical SMILES.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub smiles: String,
    pub molecule: Molecule,
}

impl ReactionTemplate {
    pub fn arity(&self) -> usize {
        self.reactants.len()
    }

    pub fn is_twin(&self) -> bool {
        self.name.ends_with("_R2")
    }

    /// Rebuilds this template from its parts; used for the role swap.
    fn from_parts(
        name: String,
        reactant_smarts: Vec<String>,
        product_smarts: String,
    ) -> Result<ReactionTemplate, PatternError> {
        let reactants = reactant_smarts
            .iter()
            .map(|s| parse_smarts(s))
            .collect::<Result<Vec<_>, _>>()?;
        for (k, r) in reactants.iter().enumerate() {
            if r.components() != 1 {
                return Err(PatternError::Format(format!(
                    "reactant pattern {} must be connected",
                    k + 1
                )));
            }
        }
        let product = parse_smarts(&product_smarts)?;

        let mut seen = BTreeMap::new();
        for (ri, r) in reactants.iter().enumerate() {
            for (ai, a) in r.atoms.iter().enumerate() {
                if let Some(label) = a.map {
                    if seen.insert(label, (ri, ai)).is_some() {
                        return Err(PatternError::MapLabel(format!(
                            "map label {label} used in more than one reactant"
                        )));
                    }
                }
            }
        }
        let mut mapped = Vec::new();
        for (pi, a) in product.atoms.iter().enumerate() {
            match a.map.and_then(|l| seen.get(&l)) {
                Some(&(ri, ai)) => mapped.push((pi, ri, ai)),
                None => {
                    if a.element().is_none() {
                        return Err(PatternError::MapLabel(match a.map {
                            Some(l) => format!(
                                "product map label {l} is absent from the reactants and has no element"
                            ),
                            None => "new product atom has no element".to_string(),
                        }));
                    }
                }
            }
        }
        for ri in 0..reactants.len() {
            if !mapped.iter().any(|&(_, r, _)| r == ri) {
                return Err(PatternError::Format(format!(
                    "reactant pattern {} contributes no atom to the product",
                    ri + 1
                )));
            }
        }
        Ok(ReactionTemplate {
            name,
            reactants,
            product,
            mapped,
            reactant_smarts,
            product_smarts,
        })
    }

    /// Role-swapped copy of a bimolecular template, named `<name>_R2`.
    pub fn twin(&self) -> Option<ReactionTemplate> {
        if self.arity() != 2 {
            return None;
        }
        let swapped = vec![self.reactant_smarts[1].clone(), self.reactant_smarts[0].clone()];
        ReactionTemplate::from_parts(format!("{}_R2", self.name), swapped, self.product_smarts.clone()).ok()
    }

    /// Template text in file form.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}>>{}\t{}",
            self.name,
            self.reactant_smarts.join("."),
            self.product_smarts,
            self.arity()
        )
    }
}

/// Splits a reaction side on top-level `.` (outside brackets).
fn split_components(side: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in side.chars() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ => {}
        }
        if c == '.' && depth == 0 {
            out.push(core::mem::take(&mut current));
        } else {
            current.push(c);
        }
    }
    out.push(current);
    out
}

/// Parses one template line: `name<TAB>reactants>>product[<TAB>arity]`.
///
/// Returns the template, followed by its role-swapped twin when it is
/// bimolecular. The optional arity column, when present, must agree with the
/// number of reactant patterns.
pub fn parse_template(line: &str) -> Result<Vec<ReactionTemplate>, PatternError> {
    let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split('\t').collect();
    if fields.len() < 2 || fields.len() > 3 {
        return Err(PatternError::Format("expected name<TAB>reaction[<TAB>arity]".to_string()));
    }
    let name = fields[0].trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(PatternError::Format("template name must be a non-empty word".to_string()));
    }
    let (lhs, rhs) = fields[1]
        .trim()
        .split_once(">>")
        .ok_or_else(|| PatternError::Format("missing '>>'".to_string()))?;
    if rhs.contains(">>") || lhs.is_empty() || rhs.is_empty() {
        return Err(PatternError::Format("malformed reaction".to_string()));
    }
    let reactants = split_components(lhs);
    if reactants.is_empty() || reactants.len() > 2 {
        return Err(PatternError::Format("templates take one or two reactant patterns".to_string()));
    }
    if let Some(declared) = fields.get(2) {
        let declared: usize = declared
            .trim()
            .parse()
            .map_err(|_| PatternError::Format(format!("bad arity '{declared}'")))?;
        if declared != reactants.len() {
            return Err(PatternError::Format(format!(
                "declared arity {declared} but {} reactant pattern(s) given",
                reactants.len()
            )));
        }
    }
    let t = ReactionTemplate::from_parts(name.to_string(), reactants, rhs.to_string())?;
    let mut out = Vec::with_capacity(2);
    let twin = t.twin();
    out.push(t);
    out.extend(twin);
    Ok(out)
}

/// Parses a template file, skipping blank lines and `#` comments. Errors carry
/// the 1-based line number.
pub fn parse_template_file(text: &str) -> Result<Vec<ReactionTemplate>, (usize, PatternError)> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        out.extend(parse_template(line).map_err(|e| (k + 1, e))?);
    }
    let mut names: Vec<&str> = out.iter().map(|t| t.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err((0, PatternError::Format(format!("duplicate template name '{}'", w[0]))));
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Unmatched,
    Deleted,
    Mapped(usize),
}

fn order_for(query: BondQuery, existing: Option<u8>) -> u8 {
    match query {
        BondQuery::Single => 1,
        BondQuery::Double => 2,
        BondQuery::Triple => 3,
        BondQuery::Default | BondQuery::Aromatic | BondQuery::Any => existing.unwrap_or(1),
    }
}

fn build_product(t: &ReactionTemplate, mols: &[&Molecule], maps: &[&MatchMap]) -> Option<Molecule> {
    // product atom -> (reactant, molecule atom)
    let mut product_image: Vec<Option<(usize, usize)>> = vec![None; t.product.atom_count()];
    let mut roles: Vec<Vec<Role>> = mols.iter().map(|m| vec![Role::Unmatched; m.atom_count()]).collect();
    for (r, map) in maps.iter().enumerate() {
        for &ma in &map.atoms {
            roles[r][ma] = Role::Deleted;
        }
    }
    for &(pa, r, ra) in &t.mapped {
        let ma = maps[r].atoms[ra];
        roles[r][ma] = Role::Mapped(pa);
        product_image[pa] = Some((r, ma));
    }

    // Keep mapped atoms and whatever unmatched atoms they reach.
    let mut new_index: Vec<Vec<usize>> = mols.iter().map(|m| vec![usize::MAX; m.atom_count()]).collect();
    let mut builder = MolBuilder::new();
    let mut origin: Vec<Option<(usize, usize)>> = Vec::new();
    for (r, m) in mols.iter().enumerate() {
        let mut keep = vec![false; m.atom_count()];
        let mut queue: VecDeque<usize> = (0..m.atom_count())
            .filter(|&a| matches!(roles[r][a], Role::Mapped(_)))
            .collect();
        for &a in &queue {
            keep[a] = true;
        }
        while let Some(u) = queue.pop_front() {
            for &(v, _) in m.neighbors(u) {
                if !keep[v] && roles[r][v] == Role::Unmatched {
                    keep[v] = true;
                    queue.push_back(v);
                }
            }
        }
        for a in 0..m.atom_count() {
            if keep[a] {
                new_index[r][a] = origin.len();
                origin.push(Some((r, a)));
                let atom = m.atom(a);
                builder.add_atom(BuildAtom {
                    element: atom.element,
                    charge: atom.formal_charge,
                    aromatic: false,
                    hydrogens: Some(atom.implicit_h),
                });
            }
        }
    }
    let mut product_atom_index = vec![usize::MAX; t.product.atom_count()];
    for (pa, img) in product_image.iter().enumerate() {
        match img {
            Some((r, ma)) => product_atom_index[pa] = new_index[*r][*ma],
            None => {
                let pat = &t.product.atoms[pa];
                product_atom_index[pa] = origin.len();
                origin.push(None);
                builder.add_atom(BuildAtom {
                    element: pat.element()?,
                    charge: pat.charge().unwrap_or(0),
                    aromatic: false,
                    hydrogens: pat.total_h(),
                });
            }
        }
    }

    let mut bonds: BTreeMap<(usize, usize), u8> = BTreeMap::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    for (r, m) in mols.iter().enumerate() {
        for (bi, bond) in m.bonds().iter().enumerate() {
            let (u, v) = (new_index[r][bond.a], new_index[r][bond.b]);
            if u == usize::MAX || v == usize::MAX {
                continue;
            }
            let pattern_bond = maps[r].bonds.contains(&bi);
            let both_mapped = matches!(roles[r][bond.a], Role::Mapped(_)) && matches!(roles[r][bond.b], Role::Mapped(_));
            if pattern_bond && both_mapped {
                // the product pattern decides below
                continue;
            }
            bonds.insert(key(u, v), m.kekule_order(bi));
        }
    }
    for pb in &t.product.bonds {
        let (u, v) = (product_atom_index[pb.a], product_atom_index[pb.b]);
        let existing = match (product_image[pb.a], product_image[pb.b]) {
            (Some((ra, ma)), Some((rb, mb))) if ra == rb => mols[ra].bond_between(ma, mb).map(|b| mols[ra].kekule_order(b)),
            _ => None,
        };
        bonds.insert(key(u, v), order_for(pb.query, existing));
    }

    // hydrogens on kept reactant atoms
    let mut new_bond_sum = vec![0u8; origin.len()];
    for (&(a, b), &o) in &bonds {
        new_bond_sum[a] += o;
        new_bond_sum[b] += o;
    }
    for (idx, org) in origin.iter().enumerate() {
        let Some((r, ma)) = *org else { continue };
        let m = mols[r];
        let old_sum: u8 = m.neighbors(ma).iter().map(|&(_, b)| m.kekule_order(b)).sum();
        let atom = m.atom(ma);
        let slot = &mut builder.atoms[idx];
        if let Role::Mapped(pa) = roles[r][ma] {
            let pat = &t.product.atoms[pa];
            if let Some(e) = pat.element() {
                slot.element = e;
            }
            if let Some(q) = pat.charge() {
                slot.charge = q;
            }
            if let Some(h) = pat.total_h() {
                slot.hydrogens = Some(h);
                continue;
            }
            if slot.charge != atom.formal_charge || slot.element != atom.element {
                slot.hydrogens = None;
                continue;
            }
        }
        let h = atom.implicit_h as i32 + old_sum as i32 - new_bond_sum[idx] as i32;
        if h < 0 {
            return None;
        }
        slot.hydrogens = Some(h as u8);
    }
    for ((a, b), o) in bonds {
        let order = match o {
            1 => BondOrder::Single,
            2 => BondOrder::Double,
            _ => BondOrder::Triple,
        };
        builder.add_bond(a, b, order);
    }
    let product = builder.build().ok()?;
    if t.product.components() == 1 && product.components() != 1 {
        return None;
    }
    Some(product)
}

/// Applies a template to one or two reactants.
///
/// Every combination of matches (one per reactant, at most
/// [`MAX_COMBINATIONS`]) is rewritten; invalid products are dropped and the
/// rest are deduplicated and sorted by canonical SMILES.
pub fn apply(t: &ReactionTemplate, r1: &Molecule, r2: Option<&Molecule>) -> Result<Vec<Product>, PatternError> {
    let mols: Vec<&Molecule> = match (t.arity(), r2) {
        (1, None) => vec![r1],
        (2, Some(r2)) => vec![r1, r2],
        (arity, r2) => {
            return Err(PatternError::Arity {
                template: arity,
                supplied: 1 + r2.is_some() as usize,
            })
        }
    };
    let mut per_reactant: Vec<Vec<MatchMap>> = Vec::with_capacity(mols.len());
    for (k, (p, m)) in t.reactants.iter().zip(&mols).enumerate() {
        let maps = all_mappings(p, m, MAX_MAPPINGS);
        if maps.is_empty() {
            return Err(PatternError::NoMatch { reactant: k + 1 });
        }
        per_reactant.push(maps);
    }
    let mut products: BTreeMap<String, Molecule> = BTreeMap::new();
    let mut counter = vec![0usize; mols.len()];
    for _ in 0..MAX_COMBINATIONS {
        let maps: Vec<&MatchMap> = counter.iter().enumerate().map(|(r, &i)| &per_reactant[r][i]).collect();
        if let Some(p) = build_product(t, &mols, &maps) {
            let smiles = write_smiles(&p);
            products.entry(smiles).or_insert(p);
        }
        // odometer increment, last reactant fastest
        let mut pos = mols.len();
        loop {
            if pos == 0 {
                return Ok(collect(products));
            }
            pos -= 1;
            counter[pos] += 1;
            if counter[pos] < per_reactant[pos].len() {
                break;
            }
            counter[pos] = 0;
        }
    }
    Ok(collect(products))
}

/// Products are rebuilt from their canonical SMILES so that the same
/// product reached by different routes has the same atom order, and hence
/// bit-identical scores.
fn collect(products: BTreeMap<String, Molecule>) -> Vec<Product> {
    products
        .into_iter()
        .map(|(smiles, molecule)| Product {
            molecule: parse_smiles(&smiles).unwrap_or(molecule),
            smiles,
        })
        .collect()
}
