"""LP file I/O.

LPs travel as JSON: schema_version, shapes, A (dense rows or COO triplets),
b, c, an optional interior start {x, y, s}, and optional provenance
{generator, seed}.  Numbers are serialized with shortest round-trip decimals,
so identical data produces identical bytes.
"""

import json

import numpy as np

from .errors import LpFileError
from .model import LinearProgram, PrimalDualPoint

SCHEMA_VERSION = 1


def lp_to_dict(lp, init=None, provenance=None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "m": lp.m,
        "n": lp.n,
        "a": lp.a.tolist(),
        "b": lp.b.tolist(),
        "c": lp.c.tolist(),
    }
    if init is not None:
        doc["init"] = {"x": init.x.tolist(), "y": init.y.tolist(), "s": init.s.tolist()}
    if provenance is not None:
        doc["provenance"] = provenance
    return doc


def save_lp(path, lp, init=None, provenance=None):
    with open(path, "w") as fh:
        json.dump(lp_to_dict(lp, init, provenance), fh)
        fh.write("\n")


def load_lp(path):
    """Load an LP file; returns (lp, init_or_None, provenance_or_None)."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LpFileError(
                f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    return lp_from_dict(doc, source=str(path))


def lp_from_dict(doc, source="<dict>"):
    if not isinstance(doc, dict):
        raise LpFileError(f"{source}: expected a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise LpFileError(f"{source}: unsupported schema_version {version}")
    try:
        m, n = int(doc["m"]), int(doc["n"])
        if "a" in doc:
            a = np.asarray(doc["a"], dtype=float)
        elif "a_coo" in doc:
            coo = doc["a_coo"]
            a = np.zeros((m, n))
            a[np.asarray(coo["rows"], dtype=int),
              np.asarray(coo["cols"], dtype=int)] = np.asarray(coo["vals"], dtype=float)
        else:
            raise KeyError("a")
        b = np.asarray(doc["b"], dtype=float)
        c = np.asarray(doc["c"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise LpFileError(f"{source}: invalid LP payload: {exc}") from exc
    if a.shape != (m, n) or b.shape != (m,) or c.shape != (n,):
        raise LpFileError(
            f"{source}: inconsistent dimensions (declared {m}x{n}, "
            f"got A {a.shape}, b {b.shape}, c {c.shape})"
        )
    try:
        lp = LinearProgram(a=a, b=b, c=c)
    except Exception as exc:
        raise LpFileError(f"{source}: {exc}") from exc

    init = None
    if "init" in doc and doc["init"] is not None:
        raw = doc["init"]
        try:
            init = PrimalDualPoint(x=np.asarray(raw["x"], dtype=float),
                                   y=np.asarray(raw["y"], dtype=float),
                                   s=np.asarray(raw["s"], dtype=float))
        except Exception as exc:
            raise LpFileError(f"{source}: invalid init point: {exc}") from exc
        if init.x.shape[0] != n or init.y.shape[0] != m:
            raise LpFileError(f"{source}: init dimensions do not match the LP")
    return lp, init, doc.get("provenance")


def save_solution(path, outcome):
    doc = {
        "x": outcome.point.x.tolist(),
        "y": outcome.point.y.tolist(),
        "s": outcome.point.s.tolist(),
        "mu": outcome.residuals.duality_measure,
        "primal_infeasibility": outcome.residuals.primal_infeasibility,
        "dual_infeasibility": outcome.residuals.dual_infeasibility,
        "outer_iterations": outcome.outer_iterations,
        "converged": outcome.converged,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def save_reduction_record(path, record):
    doc = {
        "kind": record.kind,
        "original_shape": list(record.original_shape),
        "z": record.z.tolist() if record.z is not None else None,
        "kept_rows": record.kept_rows,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
