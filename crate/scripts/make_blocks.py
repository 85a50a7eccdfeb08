#!/usr/bin/env python3
"""Generate the bundled building-block corpus (crates/core/data/blocks.smi).

Blocks are assembled from small aromatic and aliphatic scaffolds carrying one
or two reactive handles, plus a hand-picked list of cyclic secondary amines.
The output order is deterministic.
"""
import sys

AROMATIC_CORES = [
    "c1ccc(X)cc1",
    "Fc1ccc(X)cc1",
    "Clc1ccc(X)cc1",
    "COc1ccc(X)cc1",
    "Cc1ccc(X)cc1",
    "FC(F)(F)c1ccc(X)cc1",
    "N#Cc1ccc(X)cc1",
    "Cc1cccc(X)c1",
    "Fc1cccc(X)c1",
    "c1ccc2cc(X)ccc2c1",
    "c1cc(X)ccn1",
    "c1ccc(X)nc1",
    "c1cncc(X)c1",
    "c1ccc(X)s1",
    "c1ccc(X)o1",
    "c1cnc(X)nc1",
    "c1csc(X)n1",
    "Cn1cc(X)cn1",
    "Cc1ccc(X)cn1",
    "O=C1CCc2cc(X)ccc2N1",
]

AROMATIC_GROUPS = [
    "C(=O)O",
    "N",
    "Br",
    "I",
    "B(O)O",
    "O",
    "C=O",
    "C#C",
    "S(=O)(=O)Cl",
    "CBr",
    "[N+](=O)[O-]",
    "C(=O)OC",
    "CN",
    "S",
    "OC",
    "CC(=O)O",
    "CCN",
    "NC(=O)OC(C)(C)C",
    "C(C)=O",
    "CO",
]

# two handles on a benzene or pyridine ring
PAIR_CORES = ["c1cc(X)ccc1Y", "c1cc(X)cc(Y)c1", "c1nc(X)ccc1Y"]
PAIRS = [
    ("Br", "C(=O)O"),
    ("Br", "N"),
    ("Br", "C=O"),
    ("I", "C(=O)O"),
    ("I", "N"),
    ("C(=O)O", "[N+](=O)[O-]"),
    ("C(=O)OC", "Br"),
    ("C(=O)OC", "N"),
    ("O", "C(=O)OC"),
    ("B(O)O", "C(=O)OC"),
    ("NC(=O)OC(C)(C)C", "Br"),
    ("NC(=O)OC(C)(C)C", "C(=O)O"),
    ("C#N", "Br"),
    ("OC", "Br"),
    ("C(C)=O", "Br"),
    ("CN", "F"),
    ("C(=O)O", "F"),
    ("N", "F"),
]

ALIPHATIC_CORES = [
    "CX",
    "CCX",
    "CCCX",
    "CC(C)CX",
    "CCCCX",
    "C1CCC(X)CC1",
    "C1CC1X",
    "C1CCC(X)C1",
    "C1CC(X)CCO1",
    "COCCX",
    "CN(C)CCX",
    "c1ccc(CCX)cc1",
    "CC(C)(C)X",
    "C1CCN(CC1)CCX",
]

ALIPHATIC_GROUPS = [
    "C(=O)O",
    "N",
    "O",
    "CBr",
    "C=O",
    "C#C",
    "C#N",
    "C(=O)OC",
    "CNC(=O)OC(C)(C)C",
    "C(C)=O",
]

SECONDARY_AMINES = [
    "C1CCNCC1",
    "C1CCNC1",
    "C1COCCN1",
    "CN1CCNCC1",
    "CC(=O)N1CCNCC1",
    "C1CNC1",
    "OC1CCNCC1",
    "CC1CCNCC1",
    "FC1(F)CCNCC1",
    "O=C(O)C1CCNCC1",
    "COC(=O)C1CCNC1",
    "c1ccc(cc1)C1CCNCC1",
    "C1CCNCCC1",
    "CC(C)N1CCNCC1",
    "c1ccc(cc1)N1CCNCC1",
    "O=C1CCNCC1",
    "CS(=O)(=O)N1CCNCC1",
    "N#CC1CCNCC1",
    "CC1(C)CNCCO1",
    "CC(C)(C)OC(=O)N1CCNCC1",
    "COC(=O)CN",
    "CC(C)(C)OC(=O)NCCN",
    "NCC(=O)OC",
    "c1ccc2c(c1)CCNC2",
    "C1CC2(CCNC2)C1",
    "Fc1ccc(cc1)C1CCNCC1",
    "O=C1NCCN1",
    "CC1COCCN1",
    "COc1ccc(cc1)CN",
    "Cc1ccc(cc1)S(=O)(=O)Cl",
]


def blocks():
    out = []
    for core in AROMATIC_CORES:
        for g in AROMATIC_GROUPS:
            out.append(core.replace("X", g))
    for core in PAIR_CORES:
        for x, y in PAIRS:
            out.append(core.replace("X", x).replace("Y", y))
    for core in ALIPHATIC_CORES:
        for g in ALIPHATIC_GROUPS:
            out.append(core.replace("X", g))
    out.extend(SECONDARY_AMINES)
    seen = set()
    unique = []
    for s in out:
        if s not in seen:
            seen.add(s)
            unique.append(s)
    return unique


def main(path):
    rows = blocks()
    with open(path, "w") as f:
        f.write("# Bundled building blocks: SMILES<TAB>identifier\n")
        for i, s in enumerate(rows):
            f.write(f"{s}\tBB{i + 1:04d}\n")
    print(f"{len(rows)} blocks written to {path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data/blocks.smi")
