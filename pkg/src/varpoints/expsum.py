"""Complete exponential sums over a variety and incomplete sums over
arithmetic progressions in dilated intervals, with the bound predicates
they are measured against.

Notation: e_p(x) = exp(2 pi i x / p). All sums draw their values from a
precomputed table of the p-th roots of unity, so equal phases contribute
bit-identical summands; scalar accumulation uses math.fsum and vector
accumulation numpy's pairwise summation, keeping relative error well
under the 1e-9 working tolerance even for sums over 1e6 points.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import InvariantViolation, ValidationError
from .region import lattice_range
from .reports import ExpSumRecord
from .variety import VarietySpec, points_array, validate_prime

_U_CHUNK_CELLS = 1 << 22


@lru_cache(maxsize=16)
def _root_table(p: int) -> np.ndarray:
    """e_p(k) for k = 0..p-1 as complex128."""
    k = np.arange(p)
    return np.exp(2j * np.pi * k / p)


def incomplete_progression_sum(
    p: int, interval: tuple[Fraction, Fraction], a: int, b: int, u: int
) -> complex:
    """sum over m in p*I with m = b (mod a) of e_p(-u m), via compensated
    accumulation of tabulated roots of unity."""
    validate_prime(p)
    if a < 1 or not (0 <= b < a):
        raise ValidationError(f"need 0 <= b < a with a >= 1, got a={a}, b={b}")
    lo, hi = lattice_range(interval, p)
    lo, hi = max(lo, 0), min(hi, p - 1)
    table = _root_table(p)
    m0 = lo + (b - lo) % a
    ms = range(m0, hi + 1, a)
    re = math.fsum(table[(-u * m) % p].real for m in ms)
    im = math.fsum(table[(-u * m) % p].imag for m in ms)
    return complex(re, im)


def _progression_length(p: int, interval, a: int, b: int) -> int:
    lo, hi = lattice_range(interval, p)
    lo, hi = max(lo, 0), min(hi, p - 1)
    if lo > hi:
        return 0
    return (hi - b) // a - ((lo - b - 1) // a)


@lru_cache(maxsize=4096)
def _geometric_magnitude_total(p: int, length: int) -> float:
    """sum_{t=1}^{p-1} |sin(pi t L / p)| / |sin(pi t / p)|.

    |sum_{k=alpha}^{beta} e_p(-t k)| for a progression of L consecutive
    values of k is exactly this geometric-series magnitude, and as u runs
    over the nonzero residues so does t = a u mod p, so the lemma-1 total
    depends on (I, a, b) only through L. Cached per (p, L).
    """
    if length == 0:
        return 0.0
    t = np.arange(1, p, dtype=np.int64)
    num = np.abs(np.sin(np.pi * (t * length % p) / p))
    den = np.abs(np.sin(np.pi * t / p))
    return float(np.sum(num / den))


def lemma1_total(p: int, interval: tuple[Fraction, Fraction], a: int, b: int) -> float:
    """sum_{u=1}^{p-1} |incomplete_progression_sum(p, I, a, b, u)|,
    certified against its bound 2 p log(p)."""
    validate_prime(p)
    if math.gcd(a, p) != 1:
        raise ValidationError(f"lemma1_total: need gcd(a, p) = 1, got a={a}, p={p}")
    if not (0 <= b < a):
        raise ValidationError(f"need 0 <= b < a, got a={a}, b={b}")
    total = _geometric_magnitude_total(p, _progression_length(p, interval, a, b))
    bound = 2 * p * math.log(p)
    if total > bound * (1 + 1e-12):
        raise InvariantViolation(
            f"progression sum total {total} exceeds 2p*log(p) = {bound} "
            f"at p={p}, a={a}, b={b}, interval={interval}"
        )
    return total


def per_u_bound(p: int, a: int, u: int) -> float:
    """p / |s| with s the least absolute residue of a*u mod p; dominates
    the incomplete progression sum for every interval."""
    validate_prime(p)
    if math.gcd(a, p) != 1:
        raise ValidationError(f"per_u_bound: need gcd(a, p) = 1, got a={a}")
    t = (a * u) % p
    if t == 0:
        raise ValidationError(f"per_u_bound: u = {u} is 0 mod p")
    s = t if t <= (p - 1) // 2 else t - p
    return p / abs(s)


def bombieri_bound(V: VarietySpec, p: int) -> float:
    """(4d+9)^(n+r) p^(n-1/2), valid for any nonzero frequency vector."""
    return float((4 * V.deg + 9) ** (V.dim + V.r)) * p ** (V.dim - 0.5)


def katz_bound(V: VarietySpec, p: int, delta_assert: int) -> float:
    """(4d+9)^(n+r) p^((n+1+delta)/2) under the asserted singular-locus
    dimension delta (delta = -1 means the singular locus is empty)."""
    return float((4 * V.deg + 9) ** (V.dim + V.r)) * p ** ((V.dim + 1 + delta_assert) / 2)


def kloosterman_bound(p: int) -> float:
    """2 sqrt(p): the sharp classical bound for x*y = 1, used only as a
    calibration oracle."""
    return 2.0 * math.sqrt(p)


def _phases(points: np.ndarray, u, p: int) -> np.ndarray:
    """(u . x) mod p per point, products reduced termwise (int64-safe)."""
    acc = np.zeros(points.shape[0], dtype=np.int64)
    for j, uj in enumerate(u):
        uj = int(uj) % p
        if uj:
            acc = (acc + points[:, j] * uj % p) % p
    return acc


def _sum_by_phase_table(points: np.ndarray, u, p: int) -> complex:
    counts = np.bincount(_phases(points, u, p), minlength=p)
    table = _root_table(p)
    re = math.fsum(float(c) * table[k].real for k, c in enumerate(counts) if c)
    im = math.fsum(float(c) * table[k].imag for k, c in enumerate(counts) if c)
    return complex(re, im)


def complete_variety_sum(
    V: VarietySpec,
    p: int,
    u,
    points: np.ndarray | None = None,
    threads: int = 1,
) -> ExpSumRecord:
    """S(u) = sum over V(F_p) of e_p(u . x), with the bound appropriate
    to u: the point count itself at u = 0, else the Bombieri bound."""
    validate_prime(p)
    u = tuple(int(c) % p for c in u)
    if len(u) != V.r:
        raise ValidationError(f"frequency vector has length {len(u)}, need {V.r}")
    if points is None:
        points = points_array(V, p, threads=threads)
    if all(c == 0 for c in u):
        count = points.shape[0]
        return ExpSumRecord(p, u, complex(count), float(max(count, 1)), "point-count")
    value = _sum_by_phase_table(points, u, p)
    return ExpSumRecord(p, u, value, bombieri_bound(V, p), "bombieri")


def katz_bound_check(
    V: VarietySpec,
    p: int,
    u,
    delta_assert: int,
    points: np.ndarray | None = None,
) -> ExpSumRecord:
    """Same sum as complete_variety_sum, measured against the Katz bound
    for the asserted delta. A ratio above 1 falsifies the assertion
    (or signals that the dimension hypothesis on the hyperplane sections
    fails); a ratio below 1 confirms nothing.
    """
    validate_prime(p)
    if V.dim < 2:
        raise ValidationError(f"Katz check needs dim >= 2, got {V.dim}")
    if delta_assert < -1:
        raise ValidationError("delta_assert uses the convention empty = -1")
    u = tuple(int(c) % p for c in u)
    if all(c == 0 for c in u):
        raise ValidationError("Katz check requires a nonzero frequency vector")
    rec = complete_variety_sum(V, p, u, points=points)
    return ExpSumRecord(p, u, rec.value, katz_bound(V, p, delta_assert), "katz")


def _resolve_bound(V, p, bound_kind, delta_assert) -> float:
    if bound_kind == "bombieri":
        return bombieri_bound(V, p)
    if bound_kind == "katz":
        if delta_assert is None:
            raise ValidationError("katz bound needs delta_assert")
        if V.dim < 2:
            raise ValidationError(f"Katz check needs dim >= 2, got {V.dim}")
        return katz_bound(V, p, delta_assert)
    if bound_kind == "weil-kloosterman":
        return kloosterman_bound(p)
    raise ValidationError(f"unknown bound kind {bound_kind!r}")


def all_frequency_vectors(p: int, r: int, include_zero: bool = False) -> np.ndarray:
    """All of [0,p-1]^r in lexicographic order, optionally dropping 0."""
    if p**r > 20_000_000:
        raise ValidationError(f"refusing to sweep all {p**r} frequency vectors")
    grids = np.meshgrid(*[np.arange(p, dtype=np.int64)] * r, indexing="ij")
    us = np.column_stack([g.ravel() for g in grids])
    return us if include_zero else us[1:]


def variety_sum_sweep(
    V: VarietySpec,
    p: int,
    us: np.ndarray | None = None,
    bound_kind: str = "bombieri",
    delta_assert: int | None = None,
    points: np.ndarray | None = None,
    threads: int = 1,
) -> list[ExpSumRecord]:
    """S(u) for a batch of frequency vectors (default: every nonzero u).

    For the full sweep only vectors whose leading nonzero coordinate is
    at most (p-1)/2 are summed directly; the rest are filled in through
    S(-u) = conj(S(u)).
    """
    validate_prime(p)
    if points is None:
        points = points_array(V, p, threads=threads)
    full_sweep = us is None
    if full_sweep:
        us = all_frequency_vectors(p, V.r)
    us = np.asarray(us, dtype=np.int64) % p
    if us.ndim != 2 or us.shape[1] != V.r:
        raise ValidationError(f"frequency array must have shape (*, {V.r})")
    bound = _resolve_bound(V, p, bound_kind, delta_assert)
    table = _root_table(p)

    if full_sweep:
        lead = us[np.arange(us.shape[0]), np.argmax(us != 0, axis=1)]
        direct = lead <= (p - 1) // 2
    else:
        direct = np.ones(us.shape[0], dtype=bool)

    values = np.empty(us.shape[0], dtype=np.complex128)
    idx = np.nonzero(direct)[0]
    chunk = max(1, _U_CHUNK_CELLS // max(points.shape[0], 1))
    for start in range(0, idx.size, chunk):
        sel = idx[start : start + chunk]
        acc = np.zeros((points.shape[0], sel.size), dtype=np.int64)
        for j in range(V.r):
            uj = us[sel, j]
            acc = (acc + points[:, j : j + 1] * uj[None, :] % p) % p
        values[sel] = table[acc].sum(axis=0)

    if full_sweep and not direct.all():
        # u at index i pairs with -u at a mirrored lexicographic position
        mirrored = (p - us[~direct]) % p
        key = (mirrored * p ** np.arange(V.r - 1, -1, -1, dtype=np.int64)).sum(axis=1) - 1
        values[~direct] = np.conj(values[key])

    return [
        ExpSumRecord(p, tuple(int(c) for c in u), complex(v), bound, bound_kind)
        for u, v in zip(us, values)
    ]


def parseval_sum(V: VarietySpec, p: int, points: np.ndarray | None = None) -> float:
    """sum over all u mod p of |S(u)|^2; orthogonality forces this to be
    p^r * #V(F_p) exactly."""
    validate_prime(p)
    if points is None:
        points = points_array(V, p)
    records = variety_sum_sweep(V, p, points=points)
    total = math.fsum(abs(rec.value) ** 2 for rec in records)
    return total + float(points.shape[0]) ** 2
