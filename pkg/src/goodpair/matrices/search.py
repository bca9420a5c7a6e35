"""Search for symmetric matrices whose determinant is a definite form.

Exhaustive mode enumerates label patterns (which variable sits in which
upper-triangle slot) in prefix-partitioned work units.  Inside a unit, numpy
filters keep only patterns that

1. use every variable,
2. give each variable a nonsingular support (otherwise ``det M(e_v) = 0``), and
3. are the least representative of their orbit under row and variable
   permutations.

Each surviving pattern is expanded into one sign vector per orbit of the sign
group and the pattern's automorphisms, giving exactly one candidate per orbit
of the full symmetry group.  Candidates then pass an exact integer-point
determinant filter, and survivors go to :func:`goodpair.definiteness.decide`.

Randomized mode samples matrices from a seeded generator instead and never
claims exhaustiveness.
"""

from __future__ import annotations

import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations, product
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from ..definiteness import DEFAULT_BUDGET, DEFINITE_KINDS, UNKNOWN, Budget, Verdict, decide
from ..errors import ContractError
from ..poly import LinearForm, Poly
from .canonical import (
    canonical_key_codes,
    decode,
    key_id,
    label_orbit_min,
    position_index,
    raw_id,
    sign_pivots,
    upper_positions,
)
from .intdet import batch_det
from .symbolic import SymbolicMatrix, det_symbolic, obstruction_check

log = logging.getLogger(__name__)

EXHAUSTIVE = "exhaustive"
RANDOMIZED = "randomized"

CHECKPOINT_MAGIC = "goodpair-search-checkpoint"
CHECKPOINT_VERSION = 1

UNIT_ROWS = 1 << 16


@dataclass
class GoodPairCandidate:
    l: int
    n: int
    matrix: SymbolicMatrix
    det: Poly
    verdict: Verdict
    canonical_id: str

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "n": self.n,
            "canonical_id": self.canonical_id,
            "matrix": self.matrix.to_json(self.n),
            "det": self.det.to_json(),
            "det_text": self.det.format(),
            "verdict": self.verdict.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GoodPairCandidate":
        return cls(
            l=data["l"],
            n=data["n"],
            matrix=SymbolicMatrix.from_json(data["matrix"]),
            det=Poly.from_json(data["det"]),
            verdict=Verdict.from_json(data["verdict"]),
            canonical_id=data["canonical_id"],
        )


@dataclass(frozen=True)
class Truncation:
    """Final stream item when the search stopped before covering its space."""

    reason: str
    scanned: int


@dataclass
class SearchConfig:
    l: int
    n: int
    mode: str = EXHAUSTIVE
    budget: Budget = DEFAULT_BUDGET
    alphabet: str = "basic"  # or "general": integer combinations of the z_v
    coef_bound: int = 1
    max_candidates: Optional[int] = None
    filter_points: int = 32
    seed: int = 0
    workers: int = 1
    force: bool = False
    record_refutations: bool = False

    @property
    def size(self) -> int:
        return self.n - self.l

    def signature(self) -> dict:
        return {
            "l": self.l, "n": self.n, "mode": self.mode, "alphabet": self.alphabet,
            "coef_bound": self.coef_bound, "seed": self.seed,
            "filter_points": self.filter_points,
        }


COUNT_KEYS = (
    "patterns_scanned", "patterns_absent_variable", "patterns_axis_singular",
    "scanned", "refuted_sample_filter", "refuted_decide", "unknown", "accepted",
)


@dataclass
class SearchSummary:
    l: int
    n: int
    mode: str
    counts: dict = field(default_factory=lambda: {k: 0 for k in COUNT_KEYS})
    units_total: int = 0
    units_done: int = 0
    exhaustive: bool = False
    truncated: bool = False
    unknown: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "l": self.l, "n": self.n, "mode": self.mode,
            "counts": dict(self.counts),
            "units_total": self.units_total, "units_done": self.units_done,
            "exhaustive": self.exhaustive, "truncated": self.truncated,
            "unknown": list(self.unknown),
        }


# --- probe points and screening ---------------------------------------------------


def filter_points(l: int, count: int, seed: int) -> np.ndarray:
    """Integer probe points: axes, then ``e_i ± e_j``, then seeded random vectors."""
    pts = [tuple(1 if i == v else 0 for i in range(l)) for v in range(l)]
    for i in range(l):
        for j in range(i + 1, l):
            for s in (1, -1):
                pts.append(tuple(1 if t == i else s if t == j else 0 for t in range(l)))
    rng = random.Random(seed)
    while len(pts) < count:
        p = tuple(rng.randint(-3, 3) for _ in range(l))
        if any(p):
            pts.append(p)
    return np.array(pts[: max(count, l)], dtype=np.int64)


def coefficient_tensor(k: int, l: int, labels, signs) -> np.ndarray:
    """``C[v, i, j]`` with ``M = sum_v z_v C[v]`` for alphabet codes."""
    C = np.zeros((l, k, k), dtype=np.int64)
    for p, (i, j) in enumerate(upper_positions(k)):
        lab = labels[p]
        if lab:
            s = -1 if signs[p] else 1
            C[lab - 1, i, j] = C[lab - 1, j, i] = s
    return C


def matrix_tensor(M: SymbolicMatrix) -> np.ndarray:
    k, l = M.size, M.l
    C = np.zeros((l, k, k), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            for v, c in enumerate(M.entries[i][j].coeffs):
                if c != int(c):
                    raise ContractError("integer screening needs integer coefficients")
                C[v, i, j] = int(c)
    return C


def screen(C: np.ndarray, points: np.ndarray) -> tuple[np.ndarray, list]:
    """Exact sign-consistency screen of ``det(sum_v z_v C[:, v])`` at ``points``.

    Returns a survivor mask and, per candidate, ``(witness index, reference
    index or None)`` for refuted ones (``None`` for survivors).
    """
    N = C.shape[0]
    mats = np.einsum("nvij,pv->npij", C, points)
    dets = batch_det(mats)  # (N, P)
    signs = np.sign(dets.astype(np.float64) if dets.dtype == object else dets)
    zero = signs == 0
    mismatch = signs != signs[:, :1]
    bad = zero | mismatch
    alive = ~bad.any(axis=1)
    reasons: list = [None] * N
    first = bad.argmax(axis=1)
    for n in np.nonzero(~alive)[0]:
        w = int(first[n])
        reasons[n] = (w, None) if zero[n, w] else (w, 0)
    return alive, reasons


# --- label-pattern enumeration -----------------------------------------------------


@dataclass(frozen=True)
class _Shape:
    k: int
    l: int

    @property
    def m(self) -> int:
        return self.k * (self.k + 1) // 2

    @property
    def base(self) -> int:
        return self.l + 1


def _cover_positions(k: int) -> np.ndarray:
    idx = position_index(k)
    return np.array([[idx[(i, t[i])] for i in range(k)] for t in permutations(range(k))], dtype=np.int64)


def _normal_form_mask(rows: np.ndarray, l: int) -> np.ndarray:
    """Rows whose variables appear in order 1, 2, 3, ..."""
    running = np.zeros(rows.shape[0], dtype=np.int64)
    ok = np.ones(rows.shape[0], dtype=bool)
    for p in range(rows.shape[1]):
        x = rows[:, p]
        ok &= (x == 0) | (x <= running + 1)
        running = np.maximum(running, x)
    return ok


def _relabel(rows: np.ndarray, l: int) -> np.ndarray:
    m = rows.shape[1]
    N = rows.shape[0]
    first = np.empty((N, l + 1), dtype=np.int64)
    first[:, 0] = -1
    for v in range(1, l + 1):
        hit = rows == v
        fp = hit.argmax(axis=1)
        fp[~hit.any(axis=1)] = m + v
        first[:, v] = fp
    # new label of v = 1 + number of variables appearing before v
    table = np.zeros((N, l + 1), dtype=np.int64)
    for v in range(1, l + 1):
        table[:, v] = 1 + (first[:, 1:] < first[:, v:v + 1]).sum(axis=1)
    return np.take_along_axis(table, rows, axis=1)


def _codes(rows: np.ndarray, base: int) -> np.ndarray:
    m = rows.shape[1]
    weights = base ** np.arange(m - 1, -1, -1, dtype=np.int64)
    return rows @ weights


def _orbit_minimal_mask(rows: np.ndarray, shape: _Shape) -> np.ndarray:
    from .canonical import permutation_maps

    if shape.base ** shape.m >= 2**62:
        out = np.zeros(rows.shape[0], dtype=bool)
        for n, r in enumerate(rows):
            best, _ = label_orbit_min(shape.k, shape.l, tuple(int(x) for x in r))
            out[n] = best == tuple(int(x) for x in r)
        return out
    own = _codes(rows, shape.base)
    best = own.copy()
    for _, pmap in permutation_maps(shape.k):
        cand = _codes(_relabel(rows[:, list(pmap)], shape.l), shape.base)
        np.minimum(best, cand, out=best)
    return best == own


def _unit_rows(shape: _Shape, prefix: tuple) -> np.ndarray:
    free = shape.m - len(prefix)
    grids = np.indices((shape.base,) * free).reshape(free, -1).T if free else np.zeros((1, 0), dtype=np.int64)
    pre = np.broadcast_to(np.array(prefix, dtype=np.int64), (grids.shape[0], len(prefix)))
    return np.concatenate([pre, grids.astype(np.int64)], axis=1)


def unit_prefixes(shape: _Shape) -> list[tuple]:
    free = 0
    while free < shape.m and shape.base ** (free + 1) <= UNIT_ROWS:
        free += 1
    plen = shape.m - free
    out = []
    for prefix in product(range(shape.base), repeat=plen):
        running, ok = 0, True
        for x in prefix:
            if x and x > running + 1:
                ok = False
                break
            running = max(running, x)
        if ok:
            out.append(prefix)
    return out


def _classify_patterns(rows: np.ndarray, shape: _Shape):
    """Reduce rows to canonical label patterns and flag the prunable ones."""
    k, l = shape.k, shape.l
    rows = rows[_normal_form_mask(rows, l)]
    rows = rows[_orbit_minimal_mask(rows, shape)]
    present = np.ones(rows.shape[0], dtype=bool)
    absent_var = np.zeros(rows.shape[0], dtype=np.int64)
    for v in range(l, 0, -1):
        has = (rows == v).any(axis=1)
        absent_var[~has] = v
        present &= has
    cover = _cover_positions(k)
    covered = np.ones(rows.shape[0], dtype=bool)
    singular_var = np.zeros(rows.shape[0], dtype=np.int64)
    for v in range(l, 0, -1):
        ok = (rows[:, cover] == v).all(axis=2).any(axis=1)
        singular_var[~ok] = v
        covered &= ok
    return rows, present & covered, present, absent_var, singular_var


def _sign_representatives(k: int, l: int, labels: tuple, ties: list) -> list[tuple]:
    """One canonical sign vector per orbit of the sign group and automorphisms."""
    pivots, free = sign_pivots(k, l, labels)
    m = len(labels)
    reps = []
    for bits in product((0, 1), repeat=len(free)):
        signs = [0] * m
        for p, b in zip(free, bits):
            signs[p] = b
        signs = tuple(signs)
        key = canonical_key_codes(k, l, labels, signs, ties)
        if key == labels + signs:
            reps.append(signs)
    return reps


def _run_unit(args) -> dict:
    cfg_sig, prefix, budget, record = args
    k = cfg_sig["n"] - cfg_sig["l"]
    l = cfg_sig["l"]
    n = cfg_sig["n"]
    shape = _Shape(k, l)
    points = filter_points(l, cfg_sig["filter_points"], cfg_sig["seed"])
    counts = {key: 0 for key in COUNT_KEYS}
    accepted, unknown, refutations = [], [], []

    rows = _unit_rows(shape, prefix)
    rows, good, present, absent_var, singular_var = _classify_patterns(rows, shape)
    counts["patterns_scanned"] = int(rows.shape[0])
    counts["patterns_absent_variable"] = int((~present).sum())
    counts["patterns_axis_singular"] = int((present & ~good).sum())

    for r in range(rows.shape[0]):
        labels = tuple(int(x) for x in rows[r])
        if not good[r] and not record:
            continue
        _, ties = label_orbit_min(k, l, labels)
        reps = _sign_representatives(k, l, labels, ties)
        if not good[r]:
            # det vanishes at the axis point of an absent or singular-support variable
            v = int(absent_var[r] or singular_var[r])
            axis = [1 if i == v - 1 else 0 for i in range(l)]
            for signs in reps:
                counts["scanned"] += 1
                refutations.append({"key": list(labels + signs), "witness": axis,
                                    "reference": None, "stage": "pattern"})
            continue
        counts["scanned"] += len(reps)
        res = _screen_and_decide(k, l, n, [labels + s for s in reps], points, budget, record)
        for key in ("refuted_sample_filter", "refuted_decide", "unknown", "accepted"):
            counts[key] += res["counts"][key]
        accepted.extend(res["accepted"])
        unknown.extend(res["unknown"])
        refutations.extend(res["refutations"])
    return {"prefix": list(prefix), "counts": counts, "accepted": accepted,
            "unknown": unknown, "refutations": refutations}


def _screen_and_decide(k, l, n, keys, points, budget, record) -> dict:
    counts = {"refuted_sample_filter": 0, "refuted_decide": 0, "unknown": 0, "accepted": 0}
    accepted, unknown, refutations = [], [], []
    if not keys:
        return {"counts": counts, "accepted": accepted, "unknown": unknown, "refutations": refutations}
    m = len(keys[0]) // 2
    C = np.stack([coefficient_tensor(k, l, key[:m], key[m:]) for key in keys])
    alive, reasons = screen(C, points)
    for key, ok, why in zip(keys, alive, reasons):
        if not ok:
            counts["refuted_sample_filter"] += 1
            if record:
                w, ref = why
                refutations.append({
                    "key": list(key), "witness": points[w].tolist(),
                    "reference": None if ref is None else points[ref].tolist(),
                    "stage": "sample_filter",
                })
            continue
        M = decode(k, l, key[:m], key[m:])
        cand = _decide_matrix(M, l, n, key_id(k, l, key), budget)
        _tally(cand, key, counts, accepted, unknown, refutations, record)
    return {"counts": counts, "accepted": accepted, "unknown": unknown, "refutations": refutations}


def _decide_matrix(M: SymbolicMatrix, l: int, n: int, cid: str, budget: Budget) -> GoodPairCandidate:
    P = det_symbolic(M)
    verdict = decide(P, budget)
    return GoodPairCandidate(l, n, M, P, verdict, cid)


def _tally(cand, key, counts, accepted, unknown, refutations, record):
    kind = cand.verdict.kind
    if kind in DEFINITE_KINDS:
        counts["accepted"] += 1
        accepted.append((list(key), cand.to_json()))
    elif kind == UNKNOWN:
        counts["unknown"] += 1
        unknown.append({"canonical_id": cand.canonical_id, "matrix": cand.matrix.to_json(cand.n),
                        "det_text": cand.det.format(), "effort": cand.verdict.effort})
    else:
        counts["refuted_decide"] += 1
        if record:
            v = cand.verdict
            refutations.append({
                "key": list(key),
                "witness": None if v.witness is None else [str(x) for x in v.witness],
                "reference": None if v.reference is None else [str(x) for x in v.reference],
                "certificate": v.certificate,
                "stage": "decide",
            })


# --- generalized alphabet ---------------------------------------------------------


def _general_entries(l: int, bound: int) -> list[tuple]:
    return list(product(range(-bound, bound + 1), repeat=l))


def _general_matrix(k: int, l: int, upper: list[tuple]) -> SymbolicMatrix:
    return SymbolicMatrix.from_upper(l, k, [LinearForm(c) for c in upper])


# --- driver -------------------------------------------------------------------------


class SearchRun:
    """Lazily executed search; iterate for candidates, then read ``summary``.

    A :class:`Truncation` marker is the last item when the run stopped early.
    """

    def __init__(self, config: SearchConfig, checkpoint: Optional[Path] = None):
        self.config = config
        self.checkpoint = Path(checkpoint) if checkpoint else None
        self.summary = SearchSummary(config.l, config.n, config.mode)
        self.refutations: list = []
        self.candidates: list[GoodPairCandidate] = []
        self._consumed = False
        report = obstruction_check(config.l, config.n)
        if not report.passes and not config.force:
            raise ContractError(f"refusing to search: {report.describe()} (use force to override)")
        if config.mode not in (EXHAUSTIVE, RANDOMIZED):
            raise ContractError(f"unknown search mode {config.mode!r}")
        if config.alphabet not in ("basic", "general"):
            raise ContractError(f"unknown alphabet {config.alphabet!r}")

    def __iter__(self) -> Iterator:
        if self._consumed:
            yield from self.candidates
            if self.summary.truncated:
                yield Truncation("budget", self.summary.counts["scanned"])
            return
        self._consumed = True
        cfg = self.config
        if cfg.mode == RANDOMIZED:
            gen = self._randomized()
        elif cfg.alphabet == "general":
            gen = self._general_exhaustive()
        else:
            gen = self._exhaustive()
        for item in gen:
            if isinstance(item, GoodPairCandidate):
                self.candidates.append(item)
            yield item

    def run(self) -> "SearchRun":
        for _ in self:
            pass
        return self

    # exhaustive over the basic alphabet ------------------------------------------

    def _load_checkpoint(self) -> dict | None:
        if not self.checkpoint or not self.checkpoint.exists():
            return None
        data = json.loads(self.checkpoint.read_text())
        if data.get("magic") != CHECKPOINT_MAGIC:
            raise ContractError(f"{self.checkpoint} is not a search checkpoint")
        if data.get("version") != CHECKPOINT_VERSION:
            raise ContractError(
                f"checkpoint version {data.get('version')} differs from {CHECKPOINT_VERSION}; refusing to resume"
            )
        if data.get("config") != self.config.signature():
            raise ContractError("checkpoint was written for a different search configuration")
        return data

    def _save_checkpoint(self, done: list, accepted: list) -> None:
        if not self.checkpoint:
            return
        data = {
            "magic": CHECKPOINT_MAGIC,
            "version": CHECKPOINT_VERSION,
            "config": self.config.signature(),
            "done_units": done,
            "accepted": accepted,
            "counts": self.summary.counts,
            "unknown": self.summary.unknown,
        }
        tmp = self.checkpoint.with_suffix(".tmp")
        tmp.write_text(json.dumps(data, sort_keys=True))
        tmp.replace(self.checkpoint)

    def _exhaustive(self):
        cfg = self.config
        shape = _Shape(cfg.size, cfg.l)
        prefixes = unit_prefixes(shape)
        self.summary.units_total = len(prefixes)
        done: list = []
        accepted_json: list = []
        state = self._load_checkpoint()
        if state:
            done = [list(p) for p in state["done_units"]]
            accepted_json = state["accepted"]
            self.summary.counts.update(state["counts"])
            self.summary.unknown = state["unknown"]
            for _, cj in accepted_json:
                yield GoodPairCandidate.from_json(cj)
        done_set = {tuple(p) for p in done}
        todo = [p for p in prefixes if p not in done_set]
        self.summary.units_done = len(done_set)
        sig = cfg.signature()
        jobs = [(sig, p, cfg.budget, cfg.record_refutations) for p in todo]
        pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
        try:
            results = pool.map(_run_unit, jobs) if pool else map(_run_unit, jobs)
            for res in results:
                for key in COUNT_KEYS:
                    self.summary.counts[key] += res["counts"][key]
                self.summary.unknown.extend(res["unknown"])
                self.refutations.extend(res["refutations"])
                for key, cj in sorted(res["accepted"]):
                    accepted_json.append((key, cj))
                    yield GoodPairCandidate.from_json(cj)
                done.append(res["prefix"])
                self.summary.units_done += 1
                self._save_checkpoint(done, accepted_json)
                if cfg.max_candidates is not None and self.summary.counts["scanned"] >= cfg.max_candidates:
                    if self.summary.units_done < self.summary.units_total:
                        self.summary.truncated = True
                        break
        finally:
            if pool:
                pool.shutdown(cancel_futures=True)
        self.summary.exhaustive = not self.summary.truncated and self.summary.units_done == self.summary.units_total
        if self.summary.truncated:
            yield Truncation("max_candidates", self.summary.counts["scanned"])

    # randomized --------------------------------------------------------------------

    def _randomized(self):
        cfg = self.config
        k, l, n = cfg.size, cfg.l, cfg.n
        rng = random.Random(cfg.seed)
        points = filter_points(l, cfg.filter_points, cfg.seed)
        limit = cfg.max_candidates if cfg.max_candidates is not None else 10_000
        m = k * (k + 1) // 2
        seen: set = set()
        draws = 0
        batch: list = []
        while draws < limit:
            draws += 1
            if cfg.alphabet == "general":
                upper = [tuple(rng.randint(-cfg.coef_bound, cfg.coef_bound) for _ in range(l)) for _ in range(m)]
                M = _general_matrix(k, l, upper)
                key = raw_id(M)
                if key in seen:
                    continue
                seen.add(key)
                batch.append(("general", M, key))
            else:
                labels = tuple(rng.randint(0, l) for _ in range(m))
                signs = tuple(rng.randint(0, 1) if x else 0 for x in labels)
                key = tuple(canonical_key_codes(k, l, labels, signs))
                if key in seen:
                    continue
                seen.add(key)
                batch.append(("basic", None, key))
            self.summary.counts["scanned"] += 1
        yield from self._screen_batch(batch, points)
        self.summary.exhaustive = False
        self.summary.truncated = True
        yield Truncation("randomized", self.summary.counts["scanned"])

    def _screen_batch(self, batch, points):
        cfg = self.config
        k, l, n = cfg.size, cfg.l, cfg.n
        m = k * (k + 1) // 2
        out = []
        if not batch:
            return out
        mats = []
        for kind, M, key in batch:
            if kind == "general":
                mats.append(M)
            else:
                mats.append(decode(k, l, key[:m], key[m:]))
        C = np.stack([matrix_tensor(M) for M in mats])
        alive, reasons = screen(C, points)
        counts = self.summary.counts
        accepted: list = []
        unknown: list = []
        for (kind, _, key), M, ok, why in zip(batch, mats, alive, reasons):
            cid = key if kind == "general" else key_id(k, l, key)
            if not ok:
                counts["refuted_sample_filter"] += 1
                if cfg.record_refutations:
                    w, ref = why
                    self.refutations.append({
                        "matrix": M.to_json(n), "witness": points[w].tolist(),
                        "reference": None if ref is None else points[ref].tolist(),
                        "stage": "sample_filter",
                    })
                continue
            cand = _decide_matrix(M, l, n, cid, cfg.budget)
            _tally(cand, M.to_json(n)["entries"], counts, accepted, unknown, self.refutations,
                   cfg.record_refutations)
        self.summary.unknown.extend(unknown)
        for _, cj in sorted(accepted, key=lambda t: t[1]["canonical_id"]):
            out.append(GoodPairCandidate.from_json(cj))
        return out

    # exhaustive over the generalized alphabet (tiny sizes only) ------------------------

    def _general_exhaustive(self):
        cfg = self.config
        k, l = cfg.size, cfg.l
        m = k * (k + 1) // 2
        entries = _general_entries(l, cfg.coef_bound)
        total = len(entries) ** m
        if total > 2_000_000:
            raise ContractError(
                f"generalized exhaustive search would scan {total} matrices; use randomized mode"
            )
        points = filter_points(l, cfg.filter_points, cfg.seed)
        self.summary.units_total = 1
        batch = []
        for upper in product(entries, repeat=m):
            M = _general_matrix(k, l, list(upper))
            batch.append(("general", M, raw_id(M)))
            self.summary.counts["scanned"] += 1
            if cfg.max_candidates is not None and self.summary.counts["scanned"] >= cfg.max_candidates:
                self.summary.truncated = True
                break
        yield from self._screen_batch(batch, points)
        self.summary.units_done = 0 if self.summary.truncated else 1
        self.summary.exhaustive = not self.summary.truncated
        if self.summary.truncated:
            yield Truncation("max_candidates", self.summary.counts["scanned"])


def search(l: int, n: int, budget: Budget = DEFAULT_BUDGET, mode: str = EXHAUSTIVE,
           checkpoint: Optional[Path] = None, **options) -> SearchRun:
    """Search for ``M_{l,n}`` candidates; returns a lazily evaluated :class:`SearchRun`."""
    cfg = SearchConfig(l=l, n=n, mode=mode, budget=budget, **options)
    return SearchRun(cfg, checkpoint)
