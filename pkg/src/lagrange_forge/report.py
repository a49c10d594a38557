"""Deterministic report rendering (structured JSON and plain text)."""
from __future__ import annotations

import json
import math

from . import __version__

TOOL = "lagrange-forge"


def _clean(x):
    """JSON-safe copy: non-finite floats become strings, tuples become lists."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _clean(x.item())
    return x


def provenance(seed: int, zero_test, input_hash: str | None, extra=None) -> dict:
    out = {
        "tool": TOOL,
        "version": __version__,
        "seed": seed,
        "tolerances": {"zero_test_samples": zero_test.samples, "tol_abs": zero_test.tol_abs,
                       "tol_rel": zero_test.tol_rel},
    }
    if input_hash is not None:
        out["input_sha256"] = input_hash
    if extra:
        out.update(extra)
    return out


def to_json(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def to_text(report: dict) -> str:
    """Indented key: value listing, keys sorted, for humans."""
    lines = []

    def walk(x, indent):
        pad = "  " * indent
        if isinstance(x, dict):
            for k in sorted(x):
                v = x[k]
                if isinstance(v, (dict, list)) and v:
                    lines.append(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}{k}: {_scalar(v)}")
        elif isinstance(x, list):
            if all(not isinstance(v, (dict, list)) for v in x):
                lines.append(f"{pad}[{', '.join(_scalar(v) for v in x)}]")
                return
            for v in x:
                if isinstance(v, (dict, list)):
                    lines.append(f"{pad}-")
                    walk(v, indent + 1)
                else:
                    lines.append(f"{pad}- {_scalar(v)}")

    walk(_clean(report), 0)
    return "\n".join(lines) + "\n"


def _scalar(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (dict, list)):
        return "{}" if isinstance(v, dict) else "[]"
    return str(v)
