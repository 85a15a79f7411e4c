"""Flat ``key = value`` run configuration.

One setting per line, dotted keys, ``#`` starts a comment.  Values are Python
literals (numbers, complex numbers such as ``1j``, nested lists) or bare words;
``true``/``false`` are booleans.  Example::

    model.d1 = 2
    model.d2 = 2
    model.n_agents = 8
    model.variant = frustrated_unitary
    coupling.k01 = 1.0
    frustration.lambda2 = [2, 1]
    sim.t_end = 10
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError

VARIANTS = ("generalized", "full_rank2", "frustrated_unitary", "sphere")
FLOW_KINDS = (
    "zero",
    "left",
    "bilateral",
    "general",
    "unitary_left",
    "example_a",
    "example_b",
    "random_skew",
    "random_frequencies",
)
INIT_KINDS = ("haar_svd", "random_normalized", "file")
FORMATS = ("csv", "json")

_REQUIRED = object()

# key -> (kind, default); kind is a parser name or a tuple of allowed words
SCHEMA: dict[str, tuple[Any, Any]] = {
    "model.d1": ("posint", _REQUIRED),
    "model.d2": ("posint", _REQUIRED),
    "model.n_agents": ("posint", _REQUIRED),
    "model.variant": (VARIANTS, "generalized"),
    "coupling.k01": ("nonneg", _REQUIRED),
    "coupling.k10": ("nonneg", 0.0),
    "coupling.k00": ("nonneg", 0.0),
    "coupling.k11": ("nonneg", 0.0),
    "free_flow.kind": (FLOW_KINDS, "zero"),
    "free_flow.H": ("matrix", None),
    "free_flow.B": ("matrix", None),
    "free_flow.C": ("matrix", None),
    "free_flow.path": ("str", None),
    "free_flow.scale": ("nonneg", 1.0),
    "free_flow.seed": ("int", None),
    "frustration.lambda2": ("floats", None),
    "init.kind": (INIT_KINDS, "random_normalized"),
    "init.seed": ("int", 0),
    "init.path": ("str", None),
    "init.lambda2": ("floats", None),
    "init.diameter": ("nonneg", None),
    "sim.dt": ("posfloat", 1e-3),
    "sim.t_end": ("posfloat", _REQUIRED),
    "sim.sample_every": ("posint", 100),
    "sim.renormalize": ("bool", False),
    "output.path": ("str", None),
    "output.format": (FORMATS, "csv"),
    "sweep.kappas": ("floats", None),
    "sweep.jobs": ("posint", 1),
}


def _literal(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _convert(key: str, kind, raw: str, line: int):
    val = _literal(raw)

    def bad(what):
        return ConfigError(f"expected {what}, got {raw!r}", key=key, line=line)

    if isinstance(kind, tuple):
        if val not in kind:
            raise bad("one of " + ", ".join(kind))
        return val
    if kind == "str":
        return str(val)
    if kind == "bool":
        if not isinstance(val, bool):
            raise bad("true or false")
        return val
    if kind in ("int", "posint"):
        if isinstance(val, bool) or not isinstance(val, int):
            raise bad("an integer")
        if kind == "posint" and val < 1:
            raise bad("a positive integer")
        return val
    if kind in ("nonneg", "posfloat"):
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise bad("a real number")
        val = float(val)
        if not np.isfinite(val) or val < 0 or (kind == "posfloat" and val == 0):
            raise bad("a positive real" if kind == "posfloat" else "a nonnegative real")
        return val
    if kind == "floats":
        try:
            arr = np.asarray(val, dtype=float)
        except (TypeError, ValueError):
            raise bad("a list of reals") from None
        if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
            raise bad("a nonempty list of reals")
        return tuple(float(x) for x in arr)
    if kind == "matrix":
        try:
            arr = np.asarray(val, dtype=np.complex128)
        except (TypeError, ValueError):
            raise bad("a nested list of numbers") from None
        if arr.ndim not in (2, 3) or not np.all(np.isfinite(arr)):
            raise bad("a matrix or a list of matrices")
        return arr
    raise AssertionError(kind)


@dataclass(frozen=True)
class RunConfig:
    """Validated settings; ``values`` maps every schema key to its value."""

    values: dict = field(repr=False)
    source: dict = field(repr=False)  # key -> raw text as written

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def echo(self) -> dict:
        """Keys set in the file with their text as written, sorted by key."""
        return {k: self.source[k] for k in sorted(self.source)}

    @property
    def flow_seed(self) -> int:
        from .sampling import spawn_seeds

        s = self.values["free_flow.seed"]
        return spawn_seeds(self.values["init.seed"], 2)[1] if s is None else s


def parse_config(text: str) -> RunConfig:
    values: dict = {}
    source: dict = {}
    lines: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = _strip_comment(line).strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line=lineno)
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=lineno)
        if not raw:
            raise ConfigError("missing value", key=key, line=lineno)
        values[key] = _convert(key, SCHEMA[key][0], raw, lineno)
        source[key] = raw
        lines[key] = lineno

    for key, (_, default) in SCHEMA.items():
        if key not in values:
            if default is _REQUIRED:
                raise ConfigError("required key is missing", key=key)
            values[key] = default
    _cross_check(values, lines)
    return RunConfig(values=values, source=source)


def _strip_comment(line: str) -> str:
    # '#' inside quotes is kept
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def _cross_check(v: dict, lines: dict) -> None:
    def fail(key, msg):
        raise ConfigError(msg, key=key, line=lines.get(key))

    d1, d2 = v["model.d1"], v["model.d2"]
    variant = v["model.variant"]
    if v["sim.dt"] > v["sim.t_end"]:
        fail("sim.dt", "dt must not exceed sim.t_end")
    if variant == "generalized" and (v["coupling.k00"] or v["coupling.k11"]):
        fail("coupling.k00", "generalized variant requires k00 = k11 = 0; use full_rank2")
    if variant == "frustrated_unitary":
        lam = v["frustration.lambda2"]
        if lam is None:
            fail("frustration.lambda2", "required for the frustrated_unitary variant")
        if len(lam) != d1:
            fail("frustration.lambda2", f"needs {d1} entries (model.d1), got {len(lam)}")
        if any(x < 0 for x in lam):
            fail("frustration.lambda2", "entries must be nonnegative")
        if d1 != d2:
            fail("model.d2", "frustrated_unitary agents are square: d2 must equal d1")
        if v["init.kind"] == "random_normalized":
            fail("init.kind", "frustrated_unitary needs unitary initial data (haar_svd or file)")
    if variant == "sphere" and d2 != 1:
        fail("model.d2", "sphere variant needs d2 = 1")
    if v["init.kind"] == "file" and v["init.path"] is None:
        fail("init.path", "required when init.kind = file")
    if v["init.lambda2"] is not None and len(v["init.lambda2"]) > min(d1, d2):
        fail("init.lambda2", f"at most min(d1, d2) = {min(d1, d2)} entries")

    kind = v["free_flow.kind"]
    need = {
        "left": ("free_flow.H",),
        "bilateral": ("free_flow.B", "free_flow.C"),
        "unitary_left": ("free_flow.B",),
        "general": ("free_flow.path",),
    }.get(kind, ())
    for key in need:
        if v[key] is None:
            fail(key, f"required when free_flow.kind = {kind}")
    allowed = {
        "generalized": None,
        "full_rank2": None,
        "frustrated_unitary": ("zero", "unitary_left", "random_frequencies"),
        "sphere": ("zero", "left", "unitary_left", "example_a", "random_frequencies"),
    }[variant]
    if allowed is not None and kind not in allowed:
        fail("free_flow.kind", f"{variant} variant accepts flows {', '.join(allowed)}")
