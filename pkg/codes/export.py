"""
Code export
-----------
Plain-text alist-style dump of the check matrices and logicals:

    # <name> n=<n> k=<k>
    <n> <m_x> <m_z>
    X <q> <q> ...        one line per X check
    Z <q> <q> ...        one line per Z check
    LX <q> ...
    LZ <q> ...
"""

from __future__ import annotations

import logging
from pathlib import Path

from codes.color_code import StabilizerCode

logger = logging.getLogger(__name__)


def export_alist(code: StabilizerCode, path: str | Path | None = None) -> str:
    lines = [f"# {code.name} n={code.n} k={code.k}",
             f"{code.n} {len(code.x_checks)} {len(code.z_checks)}"]
    lines += ["X " + " ".join(map(str, sorted(c))) for c in code.x_checks]
    lines += ["Z " + " ".join(map(str, sorted(c))) for c in code.z_checks]
    lines.append("LX " + " ".join(map(str, sorted(code.x_logical))))
    lines.append("LZ " + " ".join(map(str, sorted(code.z_logical))))
    text = "\n".join(lines) + "\n"

    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"💾 Code '{code.name}' exported to {path}")
    return text


def parse_alist(text: str) -> StabilizerCode:
    name, x_checks, z_checks, lx, lz, n = "css", [], [], frozenset(), frozenset(), 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            name = line[1:].split()[0]
            continue
        head, *rest = line.split()
        support = frozenset(int(q) for q in rest)
        if head == "X":
            x_checks.append(support)
        elif head == "Z":
            z_checks.append(support)
        elif head == "LX":
            lx = support
        elif head == "LZ":
            lz = support
        else:
            n = int(head)
    return StabilizerCode(n, tuple(x_checks), tuple(z_checks), lx, lz, name)
