#!/usr/bin/env python3
"""Rewrite the `# sha256:` header of bundled data files after editing them."""
import hashlib
import sys


def body(text):
    lines = [l.rstrip() for l in text.splitlines() if l.strip() and not l.strip().startswith("#")]
    return "".join(l + "\n" for l in lines)


for path in sys.argv[1:]:
    with open(path) as f:
        text = f.read()
    digest = hashlib.sha256(body(text).encode()).hexdigest()
    out = []
    for line in text.splitlines():
        if line.strip().startswith("# sha256:"):
            line = "# sha256: " + digest
        out.append(line)
    with open(path, "w") as f:
        f.write("\n".join(out) + "\n")
    print(path, digest)
