"""Module files (TOML or JSON) and the canonical stratification dump.

Schema::

    p = 3
    N = 6
    E = [-3, 0, 1]          # E(u) coefficients, constant term first, monic
    d = 1
    rank = 2
    theta = [ [[0, 1], [0, 0]] ]   # d matrices, each rank x rank
    phi = [[0, 0], [0, [0, 2]]]    # entries: int | u-poly [c0, c1, ..] |
                                   #          z-major [[u-poly], [u-poly], ..]

Any z-form entry moves the whole module to the cyclotomic extension.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .higgs import EnhancedHiggsModule
from .matrices import Matrix
from .rings import INT, BaseRing, CycloRing, PrimeConfig, adjoin_zeta, make_base_ring

if sys.version_info >= (3, 11):  # pragma: no cover
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class SchemaError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def _entry_uses_z(entry) -> bool:
    return isinstance(entry, list) and len(entry) > 0 and isinstance(entry[0], list)


def _entry_vec(ring, entry, path: str):
    if isinstance(entry, bool) or not isinstance(entry, (int, list)):
        raise SchemaError(path, f"entry must be int or list, got {type(entry).__name__}")
    if isinstance(ring, CycloRing):
        e, dz = ring.e, ring.deg_z
        vec = np.zeros(ring.vec_shape, dtype=INT)
        if isinstance(entry, int):
            vec[0] = entry % ring.pN
            return vec
        if _entry_uses_z(entry):
            if len(entry) > dz:
                raise SchemaError(path, f"z-degree {len(entry) - 1} >= {dz}")
            for j, upoly in enumerate(entry):
                if not isinstance(upoly, list) or len(upoly) > e:
                    raise SchemaError(path, f"u-polynomial too long (e = {e})")
                for i, c in enumerate(upoly):
                    if not isinstance(c, int) or isinstance(c, bool):
                        raise SchemaError(path, "coefficients must be integers")
                    vec[j * e + i] = c % ring.pN
            return vec
        if len(entry) > e:
            raise SchemaError(path, f"u-polynomial too long (e = {e})")
        for i, c in enumerate(entry):
            if not isinstance(c, int) or isinstance(c, bool):
                raise SchemaError(path, "coefficients must be integers")
            vec[i] = c % ring.pN
        return vec
    e = ring.e
    vec = np.zeros(ring.vec_shape, dtype=INT)
    if isinstance(entry, int):
        vec[0] = entry % ring.pN
        return vec
    if _entry_uses_z(entry):
        raise SchemaError(path, "z-form entry in a base-ring module")
    if len(entry) > e:
        raise SchemaError(path, f"u-polynomial too long (e = {e})")
    for i, c in enumerate(entry):
        if not isinstance(c, int) or isinstance(c, bool):
            raise SchemaError(path, "coefficients must be integers")
        vec[i] = c % ring.pN
    return vec


def _matrix(ring, data, rank: int, path: str) -> Matrix:
    if not isinstance(data, list) or len(data) != rank:
        raise SchemaError(path, f"matrix must have {rank} rows")
    arr = np.zeros((rank, rank) + ring.vec_shape, dtype=INT)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != rank:
            raise SchemaError(f"{path}[{i}]", f"row must have {rank} entries")
        for j, entry in enumerate(row):
            arr[i, j] = _entry_vec(ring, entry, f"{path}[{i}][{j}]")
    return Matrix(ring, arr)


def load_module(path: str | Path):
    """Parse a module file; returns (cfg, ring, EnhancedHiggsModule)."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(str(path), f"invalid JSON: {exc}")
    else:
        try:
            data = tomllib.loads(raw.decode())
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError(str(path), f"invalid TOML: {exc}")
    for key in ("p", "N", "E", "d", "rank", "theta", "phi"):
        if key not in data:
            raise SchemaError(key, "missing required field")
    try:
        cfg = PrimeConfig(int(data["p"]), int(data["N"]), tuple(int(c) for c in data["E"]))
    except (TypeError, ValueError) as exc:
        raise SchemaError("p/N/E", str(exc))
    base = make_base_ring(cfg)
    d, rank = int(data["d"]), int(data["rank"])
    if d < 0 or rank < 1:
        raise SchemaError("d/rank", "need d >= 0 and rank >= 1")
    if not isinstance(data["theta"], list) or len(data["theta"]) != d:
        raise SchemaError("theta", f"need exactly d = {d} matrices")

    def uses_z(node):
        if isinstance(node, list):
            return any(uses_z(x) for x in node)
        return False

    # an entry like [[..],[..]] is z-major; detect depth-3 nesting under a matrix row
    def matrix_uses_z(mat):
        return any(_entry_uses_z(entry) for row in mat for entry in row if isinstance(row, list))

    wants_z = matrix_uses_z(data["phi"]) or any(matrix_uses_z(t) for t in data["theta"])
    ring = adjoin_zeta(base) if wants_z else base
    theta = [_matrix(ring, t, rank, f"theta[{k}]") for k, t in enumerate(data["theta"])]
    phi = _matrix(ring, data["phi"], rank, "phi")
    module = EnhancedHiggsModule(ring, rank, d, theta, phi, label=path.stem)
    return cfg, ring, module


def dump_module(cfg: PrimeConfig, module: EnhancedHiggsModule, path: str | Path):
    """Write a JSON module file with full coefficient-vector entries."""

    def entry(vec):
        ring = module.ring
        if isinstance(ring, CycloRing):
            e = ring.e
            rows = [vec[j * e : (j + 1) * e].tolist() for j in range(ring.deg_z)]
            return rows
        return vec.tolist()

    data = {
        "p": cfg.p,
        "N": cfg.N,
        "E": list(cfg.E_coeffs),
        "d": module.d,
        "rank": module.rank,
        "theta": [
            [[entry(t.arr[i, j]) for j in range(module.rank)] for i in range(module.rank)]
            for t in module.theta
        ],
        "phi": [[entry(module.phi.arr[i, j]) for j in range(module.rank)] for i in range(module.rank)],
    }
    Path(path).write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------------------
# canonical stratification dump
# ---------------------------------------------------------------------------


def dump_stratification(strat, path: str | Path):
    ring = strat.ring
    header = (
        f"p={ring.p} N={ring.N} E={','.join(str(c) for c in ring.cfg.E_coeffs)} "
        f"d={strat.d} rank={strat.rank} D={strat.D} prec={strat.prec()}"
    )
    lines = ["# prismhiggs eps dump v1", header]
    lines.extend(strat.eps().canonical_lines())
    Path(path).write_text("\n".join(lines) + "\n")


def load_stratification(path: str | Path):
    from .stratification import raw_stratification

    text = Path(path).read_text().strip().splitlines()
    if not text or not text[0].startswith("# prismhiggs eps dump"):
        raise SchemaError(str(path), "not a stratification dump")
    fields = dict(kv.split("=", 1) for kv in text[1].split())
    cfg = PrimeConfig(int(fields["p"]), int(fields["N"]), tuple(int(c) for c in fields["E"].split(",")))
    ring = make_base_ring(cfg)
    d, rank, D = int(fields["d"]), int(fields["rank"]), int(fields["D"])
    coeffs = {}
    for line in text[2:]:
        if not line.strip():
            continue
        mono_s, _, ent_s = line.partition("::")
        k = 0
        n = [0] * d
        for token in mono_s.split():
            if token == "1":
                continue
            name, _, pw = token.partition("^[")
            pw = int(pw.rstrip("]"))
            if name == "X1":
                k = pw
            elif name.startswith("Y") and name.endswith("_1"):
                n[int(name[1:-2]) - 1] = pw
            else:
                raise SchemaError(str(path), f"unexpected variable {name} in dump")
        blocks = [b.strip() for b in ent_s.split(";")]
        if len(blocks) != rank * rank:
            raise SchemaError(str(path), f"expected {rank * rank} entries per line")
        arr = np.zeros((rank, rank) + ring.vec_shape, dtype=INT)
        for t, b in enumerate(blocks):
            vals = [int(x) for x in b.split(",")]
            arr[t // rank, t % rank] = np.array(vals, dtype=INT) % ring.pN
        coeffs[(k, tuple(n))] = Matrix(ring, arr)
    return cfg, ring, raw_stratification(ring, rank, d, D, coeffs)
