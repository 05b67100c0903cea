"""Brute-force enumeration of polygon classes by half-perimeter and area.

This module is the geometric ground truth for everything else.  Counts are
generated from explicit column decompositions (never from functional
equations, which live in ``qfunc`` and are validated against these tables):

* rectangles / squares: integer side pairs.
* Ferrers diagrams: partitions h_1 >= ... >= h_w >= 1 with m = w + h_1.
* staircase polygons: column intervals with weakly increasing bottom and
  top boundaries, counted by a memoised column-by-column recursion.
* directed convex polygons: weakly increasing bottoms, unimodal tops; the
  recursion runs in an "up" phase (staircase-like) and a "down" phase that
  starts at the first strict descent of the top boundary, which makes the
  phase split canonical and counts every polygon exactly once.

Feasible ranges (pure Python, seconds): staircase m <= 20, directed convex
m <= 18, Ferrers m <= 24, rectangles/squares essentially unbounded.  A slow
lattice crawler (``enumerate_by_lattice_search``) provides a second, fully
independent route for small areas; the tests cross-check the two.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .models import (
    ALL_MODELS,
    DIRECTED_CONVEX,
    FERRERS,
    RECTANGLES,
    SQUARES,
    STAIRCASE,
    UnknownModelError,
    model_spec,
)


class EnumerationError(ValueError):
    pass


@dataclass
class CountTable:
    """Sparse exact counts p_{m,n}; zeros are absent, never stored."""

    model: str
    max_m: int
    entries: dict = field(default_factory=dict)

    def add(self, m: int, n: int, count: int = 1):
        if count:
            key = (m, n)
            self.entries[key] = self.entries.get(key, 0) + count
            if self.entries[key] == 0:
                del self.entries[key]

    def row(self, m: int) -> dict:
        return {n: c for (mm, n), c in self.entries.items() if mm == m}

    def row_sum(self, m: int) -> int:
        return sum(c for (mm, _), c in self.entries.items() if mm == m)

    def count(self, m: int, n: int) -> int:
        return self.entries.get((m, n), 0)

    def sorted_items(self):
        return sorted(self.entries.items())

    def check_growth_window(self) -> None:
        """Assert A*m <= n <= B*m^2 for every stored entry."""
        spec = model_spec(self.model)
        for (m, n), c in self.entries.items():
            if c <= 0:
                raise EnumerationError(f"nonpositive count at {(m, n)}")
            if not (spec.growth_a * m <= n <= spec.growth_b * m * m):
                raise EnumerationError(
                    f"{self.model}: entry (m={m}, n={n}) outside growth window"
                )

    # -- serialization (bit-exact round trip) --------------------------

    def to_csv(self) -> str:
        lines = ["model,m,n,count"]
        for (m, n), c in self.sorted_items():
            lines.append(f"{self.model},{m},{n},{c}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str) -> "CountTable":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if lines[0] != "model,m,n,count":
            raise ValueError("bad CSV header for CountTable")
        model = None
        entries = {}
        max_m = 0
        for ln in lines[1:]:
            mod, m, n, c = ln.split(",")
            model = model or mod
            if mod != model:
                raise ValueError("mixed models in one table")
            m, n, c = int(m), int(n), int(c)
            entries[(m, n)] = c
            max_m = max(max_m, m)
        return CountTable(model=model, max_m=max_m, entries=entries)

    def to_json(self) -> str:
        rows = [
            {"model": self.model, "m": m, "n": n, "count": c}
            for (m, n), c in self.sorted_items()
        ]
        return json.dumps({"model": self.model, "max_m": self.max_m, "entries": rows})

    @staticmethod
    def from_json(text: str) -> "CountTable":
        obj = json.loads(text)
        entries = {(r["m"], r["n"]): r["count"] for r in obj["entries"]}
        return CountTable(model=obj["model"], max_m=obj["max_m"], entries=entries)


# ---------------------------------------------------------------------
# per-class generators
# ---------------------------------------------------------------------


def _enumerate_rectangles(max_m: int) -> CountTable:
    t = CountTable(RECTANGLES, max_m)
    for m in range(2, max_m + 1):
        for r in range(1, m):
            t.add(m, r * (m - r))
    return t


def _enumerate_squares(max_m: int) -> CountTable:
    # degenerate class: one r-by-r square per even m = 2r; odd rows are empty
    t = CountTable(SQUARES, max_m)
    for m in range(2, max_m + 1, 2):
        t.add(m, (m // 2) ** 2)
    return t


def _enumerate_ferrers(max_m: int) -> CountTable:
    t = CountTable(FERRERS, max_m)

    def parts(remaining_width, cap, area):
        # columns after the first, each height <= previous; exactly w columns
        if remaining_width == 0:
            yield area
            return
        for h in range(1, cap + 1):
            yield from parts(remaining_width - 1, h, area + h)

    for m in range(2, max_m + 1):
        for w in range(1, m):
            h1 = m - w
            for n in parts(w - 1, h1, h1):
                t.add(m, n)
    return t


def _staircase_area_polys(max_m: int) -> dict:
    """m -> {area: count} via the column recursion.

    State is (m_used, h) where h is the current column height and m_used
    the half-perimeter if the polygon stopped here: m = w + height of the
    bounding box.  Adding a column with bottom offset d in [0, h-1] and
    new height h' >= h - d consumes 1 + d + h' - h extra half-perimeter.
    """
    per_m: dict = {m: {} for m in range(2, max_m + 1)}
    # by_mu[m_used][h] -> {area: count}; transitions strictly increase m_used
    by_mu: dict = {}
    for h1 in range(1, max_m):
        if h1 + 1 <= max_m:
            by_mu.setdefault(h1 + 1, {})[h1] = {h1: 1}
    for mu in range(2, max_m + 1):
        for h, areas in list(by_mu.get(mu, {}).items()):
            for n, c in areas.items():
                per_m[mu][n] = per_m[mu].get(n, 0) + c
            for d in range(h):
                for h2 in range(max(1, h - d), max_m):
                    mu2 = mu + 1 + d + h2 - h
                    if mu2 > max_m:
                        break
                    cell = by_mu.setdefault(mu2, {}).setdefault(h2, {})
                    for n, c in areas.items():
                        cell[n + h2] = cell.get(n + h2, 0) + c
    return per_m


def _enumerate_staircase(max_m: int) -> CountTable:
    t = CountTable(STAIRCASE, max_m)
    for m, areas in _staircase_area_polys(max_m).items():
        for n, c in areas.items():
            t.add(m, n, c)
    return t


def _enumerate_directed_convex(max_m: int) -> CountTable:
    """Up phase = staircase columns; down phase starts at the first strict
    descent of the top boundary.  Down-phase columns nest inside the
    previous column: h - h' placements on entry (strict descent), and
    h - h' + 1 afterwards (weak descent allowed)."""
    t = CountTable(DIRECTED_CONVEX, max_m)
    up_by_mu: dict = {}
    down_by_mu: dict = {}
    for h1 in range(1, max_m):
        if h1 + 1 <= max_m:
            up_by_mu.setdefault(h1 + 1, {})[h1] = {h1: 1}

    def emit(mu, areas):
        for n, c in areas.items():
            t.add(mu, n, c)

    for mu in range(2, max_m + 1):
        for h, areas in list(up_by_mu.get(mu, {}).items()):
            emit(mu, areas)
            # stay in the up phase (staircase transitions)
            for d in range(h):
                for h2 in range(max(1, h - d), max_m):
                    mu2 = mu + 1 + d + h2 - h
                    if mu2 > max_m:
                        break
                    cell = up_by_mu.setdefault(mu2, {}).setdefault(h2, {})
                    for n, c in areas.items():
                        cell[n + h2] = cell.get(n + h2, 0) + c
            # enter the down phase (top strictly drops; m grows by 1)
            if mu + 1 <= max_m:
                for h2 in range(1, h):
                    ways = h - h2
                    cell = down_by_mu.setdefault(mu + 1, {}).setdefault(h2, {})
                    for n, c in areas.items():
                        cell[n + h2] = cell.get(n + h2, 0) + c * ways
        for h, areas in list(down_by_mu.get(mu, {}).items()):
            emit(mu, areas)
            if mu + 1 <= max_m:
                for h2 in range(1, h + 1):
                    ways = h - h2 + 1
                    cell = down_by_mu.setdefault(mu + 1, {}).setdefault(h2, {})
                    for n, c in areas.items():
                        cell[n + h2] = cell.get(n + h2, 0) + c * ways
    return t


_GENERATORS = {
    RECTANGLES: _enumerate_rectangles,
    SQUARES: _enumerate_squares,
    FERRERS: _enumerate_ferrers,
    STAIRCASE: _enumerate_staircase,
    DIRECTED_CONVEX: _enumerate_directed_convex,
}


def enumerate_counts(model: str, max_m: int) -> CountTable:
    """Exact table of p_{m,n} for half-perimeter 2 <= m <= max_m."""
    if model not in ALL_MODELS:
        raise UnknownModelError(f"unknown polygon class {model!r}")
    if max_m < 2:
        raise EnumerationError("max_m must be at least 2")
    table = _GENERATORS[model](max_m)
    table.check_growth_window()
    return table


# ---------------------------------------------------------------------
# moments and empirical laws
# ---------------------------------------------------------------------


def factorial_area_moment(table: CountTable, m: int, k: int) -> Fraction:
    """(1/k!) * sum_n n(n-1)...(n-k+1) p_{m,n}, exact."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not (2 <= m <= table.max_m):
        raise EnumerationError(f"m={m} outside table range (2..{table.max_m})")
    total = 0
    for n, c in table.row(m).items():
        f = 1
        for j in range(k):
            f *= n - j
        total += f * c
    kfact = 1
    for j in range(2, k + 1):
        kfact *= j
    return Fraction(total, kfact)


@dataclass
class DiscreteDistribution:
    """Exact pmf over integer areas."""

    masses: dict  # n -> Fraction

    def moment(self, k: int) -> Fraction:
        return sum(p * Fraction(n) ** k for n, p in self.masses.items())

    @property
    def mean(self) -> Fraction:
        return self.moment(1)

    @property
    def variance(self) -> Fraction:
        mu = self.mean
        return self.moment(2) - mu * mu

    def normalized_moment(self, k: int) -> Fraction:
        """E[(X / E[X])^k], exact."""
        mu = self.mean
        if mu == 0:
            raise ZeroDivisionError("degenerate row with zero mean")
        return sum(p * (Fraction(n) / mu) ** k for n, p in self.masses.items())


def empirical_area_law(table: CountTable, m: int) -> DiscreteDistribution:
    row = table.row(m)
    if not row:
        raise EnumerationError(f"empty row m={m} for model {table.model}")
    total = sum(row.values())
    return DiscreteDistribution({n: Fraction(c, total) for n, c in row.items()})


# ---------------------------------------------------------------------
# Dyck-path route to the staircase table
# ---------------------------------------------------------------------


def dyck_peak_area_counts(max_m: int) -> CountTable:
    """Count Dyck paths of half-length m-1 by the sum of their peak heights.

    A peak is an up-step immediately followed by a down-step; its height is
    the height after the up-step.  The resulting table must coincide with
    the staircase enumeration entry for entry.
    """
    if max_m < 2:
        raise EnumerationError("max_m must be at least 2")
    t = CountTable(STAIRCASE, max_m)
    for m in range(2, max_m + 1):
        L = m - 1
        # states: (height, previous step was U) -> {peak_sum: count}
        states = {(0, False): {0: 1}}
        for step in range(2 * L):
            nxt: dict = {}
            for (h, was_u), sums in states.items():
                remaining = 2 * L - step
                # up-step
                if h + 1 <= remaining - 1:
                    cell = nxt.setdefault((h + 1, True), {})
                    for s, c in sums.items():
                        cell[s] = cell.get(s, 0) + c
                # down-step; closing a peak if the previous step was up
                if h > 0:
                    cell = nxt.setdefault((h - 1, False), {})
                    add = h if was_u else 0
                    for s, c in sums.items():
                        cell[s + add] = cell.get(s + add, 0) + c
            states = nxt
        for (h, _), sums in states.items():
            if h == 0:
                for s, c in sums.items():
                    t.add(m, s, c)
    return t


def generate_dyck_paths(half_length: int):
    """Explicit Dyck paths as strings of U/D, for small cross-checks."""

    def rec(prefix, h, ups):
        if len(prefix) == 2 * half_length:
            yield prefix
            return
        if ups < half_length:
            yield from rec(prefix + "U", h + 1, ups + 1)
        if h > 0:
            yield from rec(prefix + "D", h - 1, ups)

    yield from rec("", 0, 0)


def dyck_peak_sum(path: str) -> int:
    total, h = 0, 0
    for i, s in enumerate(path):
        h += 1 if s == "U" else -1
        if s == "U" and i + 1 < len(path) and path[i + 1] == "D":
            total += h
    return total


# ---------------------------------------------------------------------
# independent validator: raw lattice search
# ---------------------------------------------------------------------


def _cells_cols(cells):
    cols: dict = {}
    for x, y in cells:
        cols.setdefault(x, []).append(y)
    return {x: sorted(ys) for x, ys in sorted(cols.items())}


def _contiguous(ys) -> bool:
    return ys[-1] - ys[0] + 1 == len(ys)


def _classify(cells) -> set:
    """Return the set of class tags a normalized cell set belongs to."""
    cols = _cells_cols(cells)
    xs = sorted(cols)
    if xs != list(range(len(xs))):
        return set()
    columns = [cols[x] for x in xs]
    if not all(_contiguous(ys) for ys in columns):
        return set()
    bots = [ys[0] for ys in columns]
    tops = [ys[-1] for ys in columns]
    # column adjacency (edge-connected through shared rows)
    for i in range(len(columns) - 1):
        if min(tops[i], tops[i + 1]) < max(bots[i], bots[i + 1]):
            return set()
    tags = set()
    w = len(columns)
    heights = [t - b + 1 for b, t in zip(bots, tops)]
    if len(set(heights)) == 1 and all(b == bots[0] for b in bots):
        if heights[0] * w == len(cells):
            tags.add(RECTANGLES)
            if heights[0] == w:
                tags.add(SQUARES)
    if all(b == 0 for b in bots) and all(
        heights[i] >= heights[i + 1] for i in range(w - 1)
    ):
        tags.add(FERRERS)
    nondec = lambda seq: all(seq[i] <= seq[i + 1] for i in range(len(seq) - 1))
    if nondec(bots) and nondec(tops):
        tags.add(STAIRCASE)
    # directed convex: bottoms weakly increase from 0, tops unimodal,
    # every row contiguous
    if bots[0] == 0 and nondec(bots):
        peak = tops.index(max(tops))
        if nondec(tops[: peak + 1]) and all(
            tops[i] >= tops[i + 1] for i in range(peak, w - 1)
        ):
            rows_ok = True
            for r in range(max(tops) + 1):
                xs_r = [i for i in range(w) if bots[i] <= r <= tops[i]]
                if xs_r and xs_r != list(range(xs_r[0], xs_r[-1] + 1)):
                    rows_ok = False
                    break
            if rows_ok:
                tags.add(DIRECTED_CONVEX)
    return tags


def half_perimeter_of_cells(cells) -> int:
    """m from raw geometry: half the number of boundary edges."""
    cellset = set(cells)
    adj = 0
    for x, y in cells:
        if (x + 1, y) in cellset:
            adj += 1
        if (x, y + 1) in cellset:
            adj += 1
    return 2 * len(cells) - adj


def enumerate_by_lattice_search(max_area: int) -> dict:
    """Classify every fixed polyomino of area <= max_area.

    Returns {model: CountTable}.  Slow (exhaustive polyomino growth with
    canonical dedup); intended for max_area <= 10 in cross-checks.
    """
    tables = {tag: CountTable(tag, 4 * max_area) for tag in ALL_MODELS}

    def normalize(cells):
        mx = min(x for x, _ in cells)
        my = min(y for _, y in cells)
        return frozenset((x - mx, y - my) for x, y in cells)

    seen = {frozenset({(0, 0)})}
    frontier = [frozenset({(0, 0)})]
    all_shapes = [frozenset({(0, 0)})]
    for _size in range(1, max_area):
        nxt = []
        for shape in frontier:
            for x, y in shape:
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    c = (x + dx, y + dy)
                    if c in shape:
                        continue
                    grown = normalize(shape | {c})
                    if grown not in seen:
                        seen.add(grown)
                        nxt.append(grown)
                        all_shapes.append(grown)
        frontier = nxt
    for shape in all_shapes:
        tags = _classify(shape)
        if not tags:
            continue
        m = half_perimeter_of_cells(shape)
        for tag in tags:
            tables[tag].add(m, len(shape))
    return tables
