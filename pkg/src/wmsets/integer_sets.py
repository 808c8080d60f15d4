"""Horizon-bounded subsets of {1, 2, ...} and their generators.

Bit ``n - 1`` of the packed vector (LSB first within each byte) records
membership of ``n``.  Every set carries a provenance descriptor from which it
can be regenerated bit for bit.

Bernoulli sets use Philox4x64-10 (numpy ``Philox``) with ``key = seed`` and
the counter starting at zero.  The 64-bit outputs ``u_1, u_2, ...`` are
consumed in order and ``n`` is included iff ``u_n < ceil(p * 2**64)``.  A
smaller horizon therefore yields a prefix of a larger one.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import HorizonError, ParseError, PreconditionError
from .reals import FixedReal, circle_within, parse_rational, parse_real

__all__ = [
    "IntegerSet",
    "DensityProfile",
    "gen_bernoulli",
    "gen_normal",
    "gen_bohr",
    "gen_periodic",
    "gen_full",
    "gen_empty",
    "remove_zero_density",
    "density_profile",
    "from_provenance",
    "parse_descriptor",
    "resolve_set",
    "ZERO_DENSITY_SETS",
    "MAGIC",
]

MAGIC = b"WMSET1"
GENERATOR = "philox4x64-10"
_CHUNK = 1 << 22


class IntegerSet:
    """Immutable subset of ``[1, horizon]``."""

    __slots__ = ("horizon", "provenance", "_packed", "_mask")

    def __init__(self, mask: np.ndarray, provenance: dict):
        mask = np.ascontiguousarray(mask, dtype=bool)
        if mask.ndim != 1 or mask.size < 1:
            raise PreconditionError("horizon must be >= 1")
        mask.setflags(write=False)
        self.horizon = int(mask.size)
        self.provenance = dict(provenance)
        self._mask = mask
        self._packed = None

    @classmethod
    def from_packed(cls, packed: np.ndarray, horizon: int, provenance: dict) -> "IntegerSet":
        packed = np.asarray(packed, dtype=np.uint8)
        if packed.size != (horizon + 7) // 8:
            raise ParseError(f"expected {(horizon + 7) // 8} payload bytes, got {packed.size}")
        mask = np.unpackbits(packed, count=horizon, bitorder="little").astype(bool)
        out = cls(mask, provenance)
        out._packed = packed
        return out

    @property
    def mask(self) -> np.ndarray:
        """Read-only boolean view; index ``n - 1`` is membership of ``n``."""
        return self._mask

    @property
    def packed(self) -> np.ndarray:
        if self._packed is None:
            self._packed = np.packbits(self._mask, bitorder="little")
        return self._packed

    def _check(self, n: int):
        if not 1 <= n <= self.horizon:
            raise HorizonError(f"{n} is outside [1, {self.horizon}] (set horizon)")

    def __contains__(self, n) -> bool:
        n = int(n)
        self._check(n)
        return bool(self._mask[n - 1])

    def contains(self, n: int) -> bool:
        return n in self

    def count(self, upto: int | None = None) -> int:
        """``|A ∩ [1, upto]|`` by popcount over the packed bytes."""
        upto = self.horizon if upto is None else int(upto)
        if upto == 0:
            return 0
        self._check(upto)
        full, rem = divmod(upto, 8)
        packed = self.packed
        total = int(np.bitwise_count(packed[:full]).sum(dtype=np.int64))
        if rem:
            total += int(np.bitwise_count(packed[full] & np.uint8((1 << rem) - 1)))
        return total

    def density(self, upto: int | None = None) -> Fraction:
        upto = self.horizon if upto is None else int(upto)
        return Fraction(self.count(upto), upto)

    def elements(self) -> np.ndarray:
        return np.flatnonzero(self._mask) + 1

    def __len__(self):
        return self.count()

    def __eq__(self, other):
        if not isinstance(other, IntegerSet):
            return NotImplemented
        return self.horizon == other.horizon and np.array_equal(self._mask, other._mask)

    def __hash__(self):
        return hash((self.horizon, self.packed.tobytes()))

    def __repr__(self):
        return f"IntegerSet(horizon={self.horizon}, kind={self.provenance.get('kind')!r})"

    # --- serialization ----------------------------------------------------

    def to_bytes(self) -> bytes:
        header = json.dumps(self.provenance, sort_keys=True, separators=(",", ":")).encode()
        return b"".join(
            [MAGIC, struct.pack("<I", len(header)), header, struct.pack("<Q", self.horizon),
             self.packed.tobytes()]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "IntegerSet":
        if data[:6] != MAGIC:
            raise ParseError("not a WMSET1 snapshot (bad magic)")
        (hlen,) = struct.unpack_from("<I", data, 6)
        start = 10
        try:
            prov = json.loads(data[start:start + hlen].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError("corrupt provenance header") from exc
        (horizon,) = struct.unpack_from("<Q", data, start + hlen)
        payload = np.frombuffer(data, dtype=np.uint8, offset=start + hlen + 8)
        return cls.from_packed(payload.copy(), horizon, prov)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "IntegerSet":
        return cls.from_bytes(Path(path).read_bytes())


# --- generators --------------------------------------------------------------


def _check_horizon(horizon) -> int:
    horizon = int(horizon)
    if horizon < 1:
        raise PreconditionError("horizon must be >= 1")
    return horizon


def gen_bernoulli(p, horizon: int, seed: int) -> IntegerSet:
    p = parse_rational(p)
    if not 0 < p < 1:
        raise PreconditionError(f"p must lie strictly between 0 and 1, got {p}")
    horizon = _check_horizon(horizon)
    seed = int(seed)
    if seed < 0:
        raise PreconditionError("seed must be nonnegative")
    scaled = p * (1 << 64)
    threshold = -(-scaled.numerator // scaled.denominator)
    bitgen = np.random.Philox(key=seed)
    mask = np.empty(horizon, dtype=bool)
    done = 0
    while done < horizon:
        k = min(_CHUNK, horizon - done)
        raw = bitgen.random_raw(k)
        if threshold >= 1 << 64:
            mask[done:done + k] = True
        else:
            mask[done:done + k] = raw < np.uint64(threshold)
        done += k
    return IntegerSet(
        mask,
        {"kind": "bernoulli", "p": str(p), "seed": seed, "generator": GENERATOR,
         "horizon": horizon},
    )


def champernowne_word(horizon: int) -> np.ndarray:
    """First ``horizon`` symbols of 1 10 11 100 101 ... as a 0/1 array."""
    horizon = _check_horizon(horizon)
    parts = []
    total = 0
    length = 1
    while total < horizon:
        lo, hi = 1 << (length - 1), 1 << length
        need = -(-(horizon - total) // length)
        nums = np.arange(lo, min(hi, lo + need), dtype=np.int64)
        shifts = np.arange(length - 1, -1, -1, dtype=np.int64)
        bits = ((nums[:, None] >> shifts) & 1).astype(bool).ravel()
        parts.append(bits)
        total += bits.size
        length += 1
    return np.concatenate(parts)[:horizon]


def gen_normal(horizon: int) -> IntegerSet:
    horizon = _check_horizon(horizon)
    return IntegerSet(champernowne_word(horizon), {"kind": "normal-champernowne", "horizon": horizon})


def gen_periodic(modulus: int, residues: Iterable[int], horizon: int) -> IntegerSet:
    m = int(modulus)
    if m < 1:
        raise PreconditionError("modulus must be >= 1")
    res = sorted(set(int(r) for r in residues))
    if not res or any(not 0 <= r < m for r in res):
        raise PreconditionError(f"residues must be a nonempty subset of 0..{m - 1}")
    horizon = _check_horizon(horizon)
    n = np.arange(1, horizon + 1, dtype=np.int64) % m
    table = np.zeros(m, dtype=bool)
    table[res] = True
    return IntegerSet(
        table[n], {"kind": "periodic", "modulus": m, "residues": res, "horizon": horizon}
    )


def gen_full(horizon: int) -> IntegerSet:
    return gen_periodic(1, [0], horizon)


def gen_empty(horizon: int) -> IntegerSet:
    horizon = _check_horizon(horizon)
    return IntegerSet(np.zeros(horizon, dtype=bool), {"kind": "empty", "horizon": horizon})


def gen_bohr(alpha, epsilon, horizon: int, frac_bits: int = 64) -> IntegerSet:
    """``{n : dist(n alpha mod 1, 0) < epsilon}`` with boundary-safe decisions."""
    alpha = parse_real(alpha, frac_bits)
    epsilon = parse_rational(epsilon)
    horizon = _check_horizon(horizon)
    mask = np.empty(horizon, dtype=bool)
    for start in range(0, horizon, _CHUNK):
        n = np.arange(start + 1, min(horizon, start + _CHUNK) + 1, dtype=np.int64)
        mask[start:start + n.size] = circle_within(n, alpha, epsilon)
    return IntegerSet(
        mask,
        {"kind": "bohr", "alpha": alpha.label, "frac_bits": alpha.frac_bits,
         "epsilon": str(epsilon), "horizon": horizon},
    )


def _cubes(horizon):
    m = np.zeros(horizon, dtype=bool)
    k = 1
    while k**3 <= horizon:
        m[k**3 - 1] = True
        k += 1
    return m


def _squares(horizon):
    m = np.zeros(horizon, dtype=bool)
    k = np.arange(1, isqrt(horizon) + 1, dtype=np.int64)
    m[k * k - 1] = True
    return m


ZERO_DENSITY_SETS: dict[str, Callable[[int], np.ndarray]] = {
    "cubes": _cubes,
    "squares": _squares,
    "empty": lambda h: np.zeros(h, dtype=bool),
    "everything": lambda h: np.ones(h, dtype=bool),
}


def remove_zero_density(A: IntegerSet, Z) -> IntegerSet:
    """``A`` minus ``Z``; ``Z`` is a name from :data:`ZERO_DENSITY_SETS` or a
    predicate ``int -> bool`` (the latter is not reproducible from provenance).

    ``everything`` is accepted for testing even though it has density one.
    """
    if isinstance(Z, str):
        if Z not in ZERO_DENSITY_SETS:
            raise PreconditionError(f"unknown removal set {Z!r}; choose from {sorted(ZERO_DENSITY_SETS)}")
        zmask = ZERO_DENSITY_SETS[Z](A.horizon)
        name = Z
    else:
        zmask = np.fromiter((bool(Z(n)) for n in range(1, A.horizon + 1)), dtype=bool, count=A.horizon)
        name = getattr(Z, "__name__", "predicate")
    return IntegerSet(
        A.mask & ~zmask,
        {"kind": "remove-zero-density", "base": A.provenance, "removed": name,
         "horizon": A.horizon},
    )


def from_provenance(prov: dict) -> IntegerSet:
    """Regenerate a set from its descriptor."""
    kind = prov.get("kind")
    h = prov.get("horizon")
    if kind == "bernoulli":
        if prov.get("generator", GENERATOR) != GENERATOR:
            raise PreconditionError(f"unknown generator {prov.get('generator')!r}")
        return gen_bernoulli(prov["p"], h, prov["seed"])
    if kind == "normal-champernowne":
        return gen_normal(h)
    if kind == "periodic":
        return gen_periodic(prov["modulus"], prov["residues"], h)
    if kind == "empty":
        return gen_empty(h)
    if kind == "bohr":
        return gen_bohr(prov["alpha"], prov["epsilon"], h, prov.get("frac_bits", 64))
    if kind == "remove-zero-density":
        if prov["removed"] not in ZERO_DENSITY_SETS:
            raise PreconditionError("removal by an ad hoc predicate cannot be regenerated")
        return remove_zero_density(from_provenance(prov["base"]), prov["removed"])
    raise PreconditionError(f"unknown set kind {kind!r}")


_ALIASES = {"normal": "normal-champernowne", "champernowne": "normal-champernowne"}


def parse_descriptor(text: str) -> dict:
    """``kind:key=value,...`` to a provenance dict.

    Examples: ``bernoulli:p=1/2,horizon=2000000,seed=42``,
    ``periodic:modulus=2,residues=0,horizon=1000`` (several residues joined
    by ``+``), ``bohr:alpha=sqrt(2),epsilon=1/10,horizon=100000``,
    ``full:horizon=100``, ``evens:horizon=100``.  Any descriptor may add
    ``minus=cubes`` (or another name from :data:`ZERO_DENSITY_SETS`).
    """
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    kind = _ALIASES.get(kind, kind)
    params: dict = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ParseError(f"expected key=value in descriptor {text!r}")
            params[key.strip()] = val.strip()
    try:
        h = int(params.pop("horizon"))
    except KeyError:
        raise ParseError(f"descriptor {text!r} needs horizon=") from None
    except ValueError:
        raise ParseError(f"bad horizon in {text!r}") from None
    minus = params.pop("minus", None)
    if kind == "bernoulli":
        prov = {"kind": kind, "p": str(parse_rational(params.pop("p"))),
                "seed": int(params.pop("seed")), "generator": GENERATOR, "horizon": h}
    elif kind == "normal-champernowne" or kind == "empty":
        prov = {"kind": kind, "horizon": h}
    elif kind == "periodic":
        res = params.pop("residues", "0")
        prov = {"kind": kind, "modulus": int(params.pop("modulus", params.pop("m", "1"))),
                "residues": sorted({int(r) for r in res.split("+")}), "horizon": h}
    elif kind == "full":
        prov = {"kind": "periodic", "modulus": 1, "residues": [0], "horizon": h}
    elif kind == "evens":
        prov = {"kind": "periodic", "modulus": 2, "residues": [0], "horizon": h}
    elif kind == "bohr":
        prov = {"kind": kind, "alpha": params.pop("alpha"), "frac_bits": int(params.pop("frac_bits", "64")),
                "epsilon": str(parse_rational(params.pop("epsilon"))), "horizon": h}
    else:
        raise ParseError(f"unknown set kind {kind!r}")
    if params:
        raise ParseError(f"unused descriptor keys {sorted(params)} in {text!r}")
    if minus:
        prov = {"kind": "remove-zero-density", "base": prov, "removed": minus, "horizon": h}
    return prov


def resolve_set(arg) -> IntegerSet:
    """An :class:`IntegerSet`, a ``.wmset`` path, or an inline descriptor."""
    if isinstance(arg, IntegerSet):
        return arg
    if isinstance(arg, dict):
        return from_provenance(arg)
    text = str(arg)
    if ":" not in text or Path(text).exists():
        path = Path(text)
        if not path.exists():
            raise PreconditionError(f"no such set file {text!r}")
        return IntegerSet.load(path)
    return from_provenance(parse_descriptor(text))


# --- density ---------------------------------------------------------------------


@dataclass(frozen=True)
class DensityProfile:
    """Running means at checkpoints; ``final`` is the mean over the whole
    horizon and ``oscillation`` spans the checkpoints in ``(horizon/2, horizon]``."""

    checkpoints: tuple[tuple[int, Fraction], ...]
    final: Fraction
    oscillation: Fraction
    horizon: int

    def to_json(self) -> dict:
        return {
            "checkpoints": [[n, float(v)] for n, v in self.checkpoints],
            "final": float(self.final),
            "oscillation": float(self.oscillation),
            "horizon": self.horizon,
        }


def density_profile(A: IntegerSet, checkpoints: Sequence[int] = ()) -> DensityProfile:
    cps = sorted(set(int(c) for c in checkpoints))
    for c in cps:
        if not 1 <= c <= A.horizon:
            raise HorizonError(f"checkpoint {c} is outside [1, {A.horizon}] (set horizon)")
    means = tuple((c, Fraction(A.count(c), c)) for c in cps)
    final = Fraction(A.count(), A.horizon)
    tail = [v for c, v in means if 2 * c > A.horizon]
    osc = (max(tail) - min(tail)) if tail else Fraction(0)
    return DensityProfile(means, final, osc, A.horizon)
