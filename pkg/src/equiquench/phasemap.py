"""Three-level phase diagram over the rate ratios ``x = G02/G01`` and
``y = G12/G01``.

Every cell compares uphill and downhill relaxation of an equidistant pair of
thermal initial states at a fixed evaluation time.  The pairs depend only on
the level energies, the bath temperature and the target distance, so they
are solved once per sweep; each cell then only needs one 9 x 9 spectral
decomposition.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .distances import ALL_MEASURES, Measure, distance_from_deviation
from .errors import EquiquenchError, ValidationError
from .lindblad import decompose_system, deviation
from .quench import (
    DEFAULT_SYM_TOL,
    DEFAULT_T_EVAL,
    EquidistantPair,
    Verdict,
    VerdictKind,
    bisect,
    find_equidistant_pair,
    judge,
)
from .system import LevelSystem, thermal_state

BOUNDARY_FTOL = 1e-10

MEASURE_COLORS = {
    Measure.KL: "#d62728",
    Measure.TRACE: "#000000",
    Measure.SYMKL: "#2ca02c",
    Measure.REVKL: "#ff7f0e",
}
REGION_COLORS = {"A": "#9ecae1", "B": "#fdae6b", "C": "#a1d99b", "D": "#dadaeb", "?": "#ffffff"}


@dataclass(frozen=True)
class SweepSpec:
    energies: tuple[float, float, float] = (0.0, 1.0, 2.0)
    beta: float = 1.0
    x_range: tuple[float, float] = (0.0, 3.0)
    nx: int = 61
    y_range: tuple[float, float] = (0.0, 3.0)
    ny: int = 61
    target: float = 0.1
    measures: tuple[Measure, ...] = ALL_MEASURES
    fixed_pair: Measure | None = None  # None: each measure uses its own pair
    t_eval: float = DEFAULT_T_EVAL
    sym_tol: float = DEFAULT_SYM_TOL

    def __post_init__(self):
        if len(self.energies) != 3:
            raise ValidationError("the phase diagram needs exactly three levels")
        if self.nx < 1 or self.ny < 1:
            raise ValidationError("grid resolution must be >= 1")
        lo = min(self.x_range[0], self.y_range[0])
        if lo < 0 or self.x_range[1] < self.x_range[0] or self.y_range[1] < self.y_range[0]:
            raise ValidationError("grid ranges must be ordered and non-negative")
        if not self.measures:
            raise ValidationError("at least one measure is required")
        if not self.t_eval > 0:
            raise ValidationError("t_eval must be positive")
        object.__setattr__(self, "measures", tuple(Measure.parse(m) for m in self.measures))
        if self.fixed_pair is not None:
            object.__setattr__(self, "fixed_pair", Measure.parse(self.fixed_pair))

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(*self.x_range, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(*self.y_range, self.ny)

    def system(self, x: float, y: float) -> LevelSystem:
        return LevelSystem.three_level(self.energies, self.beta, 1.0, x, y)

    def pairs(self) -> dict[Measure, EquidistantPair]:
        # any connected rate set will do: the pairs only see energies and beta
        ref = LevelSystem.three_level(self.energies, self.beta, 1.0, 1.0, 1.0)
        if self.fixed_pair is not None:
            pair = find_equidistant_pair(ref, self.fixed_pair, self.target)
            return {m: pair for m in self.measures}
        return {m: find_equidistant_pair(ref, m, self.target) for m in self.measures}


@dataclass
class Cell:
    x: float
    y: float
    verdicts: dict[Measure, Verdict] = field(default_factory=dict)
    error: str | None = None

    def region(self) -> str:
        """A: uphill faster under KL and trace; B: downhill under both;
        C: KL uphill, trace downhill; D: the reverse."""
        kl = self.verdicts.get(Measure.KL)
        tr = self.verdicts.get(Measure.TRACE)
        if kl is None or tr is None:
            return "?"
        up, down = VerdictKind.UPHILL_FASTER, VerdictKind.DOWNHILL_FASTER
        table = {(up, up): "A", (down, down): "B", (up, down): "C", (down, up): "D"}
        return table.get((kl.kind, tr.kind), "?")


def _cell_verdicts(spec: SweepSpec, pairs: dict[Measure, EquidistantPair],
                   x: float, y: float) -> Cell:
    cell = Cell(float(x), float(y))
    try:
        system = spec.system(x, y)
        dec = decompose_system(system)
    except EquiquenchError as exc:
        cell.error = type(exc).__name__
        return cell
    eq = np.asarray(thermal_state(system))
    cache: dict[float, np.ndarray] = {}

    def dev(b0: float) -> np.ndarray:
        if b0 not in cache:
            cache[b0] = deviation(dec, np.asarray(thermal_state(system, b0)), spec.t_eval)
        return cache[b0]

    for m in spec.measures:
        pair = pairs[m]
        d_up = distance_from_deviation(dev(pair.beta0_cold), eq, m)
        d_down = distance_from_deviation(dev(pair.beta0_hot), eq, m)
        cell.verdicts[m] = judge(d_up, d_down, spec.t_eval, spec.sym_tol)
    return cell


def _row(args) -> list[Cell]:
    spec, pairs, y = args
    return [_cell_verdicts(spec, pairs, x, y) for x in spec.xs]


@dataclass
class BoundaryResult:
    measure: Measure
    points: list[tuple[float, float]]
    skipped: list[float]  # y values without a sign change (NoSignChange)


@dataclass
class PhaseDiagram:
    spec: SweepSpec
    pairs: dict[Measure, EquidistantPair]
    cells: list[Cell]  # row-major: y outer, x inner
    boundaries: dict[Measure, BoundaryResult] = field(default_factory=dict)

    def cell(self, ix: int, iy: int) -> Cell:
        return self.cells[iy * self.spec.nx + ix]

    def verdict_grid(self, m: Measure | str) -> np.ndarray:
        """``grid[iy, ix]`` verdict names (``"Error"`` for failed cells)."""
        m = Measure.parse(m)
        out = np.empty((self.spec.ny, self.spec.nx), dtype=object)
        for k, c in enumerate(self.cells):
            out[divmod(k, self.spec.nx)] = c.verdicts[m].kind.value if c.error is None else "Error"
        return out

    def unanimity(self) -> float:
        """Fraction of valid cells on which all measures return the same verdict."""
        valid = [c for c in self.cells if c.error is None]
        if not valid:
            return float("nan")
        same = sum(len({v.kind for v in c.verdicts.values()}) == 1 for c in valid)
        return same / len(valid)

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "measure", "verdict", "gap"])
        for c in self.cells:
            for m in self.spec.measures:
                if c.error is not None:
                    w.writerow([repr(c.x), repr(c.y), m.value, "Error", "nan"])
                else:
                    v = c.verdicts[m]
                    w.writerow([repr(c.x), repr(c.y), m.value, v.kind.value,
                                format(v.gap, ".17g")])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text

    def boundaries_to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["measure", "x", "y"])
        for m in self.spec.measures:
            res = self.boundaries.get(m)
            if res is None:
                continue
            for x, y in res.points:
                w.writerow([m.value, format(x, ".17g"), repr(y)])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text

    def to_svg(self, target=None, size: int = 480) -> str:
        return render_svg(self, target, size)


def sweep(spec: SweepSpec, jobs: int = 1, boundaries: bool = True) -> PhaseDiagram:
    """Classify every grid cell under every requested measure.

    Grid rows and boundary refinements are farmed out to ``jobs`` worker
    processes; results are collected in submission order, so the output
    does not depend on ``jobs``.
    """
    pairs = spec.pairs()
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    run = pool.map if pool is not None else map
    try:
        rows = list(run(_row, [(spec, pairs, float(y)) for y in spec.ys]))
        diagram = PhaseDiagram(spec, pairs, [c for row in rows for c in row])
        if boundaries:
            brackets = {m: _grid_brackets(diagram, m) for m in spec.measures}
            tasks = [(spec, pairs[m], m, y, lo, hi)
                     for m in spec.measures for y, (lo, hi) in brackets[m]
                     if lo != hi]
            refined = dict(zip([(t[2], t[3]) for t in tasks], run(_refine_task, tasks)))
            for m in spec.measures:
                points = [(refined.get((m, y), lo), y) for y, (lo, hi) in brackets[m]]
                bracketed = {y for y, _ in brackets[m]}
                skipped = [float(y) for y in spec.ys if float(y) not in bracketed]
                diagram.boundaries[m] = BoundaryResult(m, points, skipped)
    finally:
        if pool is not None:
            pool.shutdown()
    return diagram


def _relative_gap(spec: SweepSpec, pair: EquidistantPair, m: Measure, x: float, y: float) -> float:
    c = _cell_verdicts(replace(spec, measures=(m,)), {m: pair}, x, y)
    if c.error is not None:
        return math.nan
    v = c.verdicts[m]
    return v.gap / max(v.d_uphill, v.d_downhill, 1e-300)


def _refine(spec: SweepSpec, pair: EquidistantPair, m: Measure, y: float,
            x_lo: float, x_hi: float) -> float:
    return bisect(lambda x: _relative_gap(spec, pair, m, x, y), x_lo, x_hi, BOUNDARY_FTOL)


def _first_sign_change(xs: Sequence[float], gaps: Sequence[float]) -> tuple[float, float] | None:
    for i in range(len(xs) - 1):
        a, b = gaps[i], gaps[i + 1]
        if math.isnan(a) or math.isnan(b):
            continue
        if a == 0:
            return xs[i], xs[i]
        if (a > 0) != (b > 0) and b != 0:
            return xs[i], xs[i + 1]
        if b == 0:
            return xs[i + 1], xs[i + 1]
    return None


def _grid_brackets(diagram: PhaseDiagram, m: Measure) -> list[tuple[float, tuple[float, float]]]:
    """``(y, (x_lo, x_hi))`` for every grid row with a sign change of the gap."""
    spec = diagram.spec
    out = []
    for iy, y in enumerate(spec.ys):
        gaps = []
        for ix in range(spec.nx):
            c = diagram.cell(ix, iy)
            gaps.append(math.nan if c.error is not None else c.verdicts[m].gap)
        bracket = _first_sign_change(spec.xs, gaps)
        if bracket is not None:
            out.append((float(y), (float(bracket[0]), float(bracket[1]))))
    return out


def _refine_task(args) -> float:
    spec, pair, m, y, lo, hi = args
    return _refine(spec, pair, m, y, lo, hi)


def boundary(spec: SweepSpec, m: Measure | str, y_values: Sequence[float]) -> BoundaryResult:
    """Equal-pace curve of measure ``m``: for each ``y`` the ``x`` where the
    uphill/downhill gap changes sign, located by scanning ``spec.xs`` and
    bisecting the first sign change."""
    m = Measure.parse(m)
    pair = replace(spec, measures=(m,)).pairs()[m]
    xs = spec.xs
    points, skipped = [], []
    for y in y_values:
        gaps = [_relative_gap(spec, pair, m, float(x), float(y)) for x in xs]
        bracket = _first_sign_change(xs, gaps)
        if bracket is None:
            skipped.append(float(y))
            continue
        lo, hi = bracket
        x = lo if lo == hi else _refine(spec, pair, m, float(y), float(lo), float(hi))
        points.append((float(x), float(y)))
    return BoundaryResult(m, points, skipped)


def render_svg(diagram: PhaseDiagram, target=None, size: int = 480) -> str:
    """Static SVG: coloured cells plus one polyline per measure boundary."""
    spec = diagram.spec
    pad = 50
    (x0, x1), (y0, y1) = spec.x_range, spec.y_range
    sx = size / (x1 - x0 if x1 > x0 else 1.0)
    sy = size / (y1 - y0 if y1 > y0 else 1.0)
    cw, ch = size / spec.nx, size / spec.ny

    def px(x):
        return pad + (x - x0) * sx

    def py(y):
        return pad + size - (y - y0) * sy

    use_regions = Measure.KL in spec.measures and Measure.TRACE in spec.measures
    first = spec.measures[0]
    verdict_colors = {"UphillFaster": "#9ecae1", "DownhillFaster": "#fdae6b",
                      "Symmetric": "#ffffff", "Error": "#cccccc"}
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * pad}" '
             f'height="{size + 2 * pad}" font-family="sans-serif" font-size="12">']
    for k, c in enumerate(diagram.cells):
        iy, ix = divmod(k, spec.nx)
        if c.error is not None:
            color = verdict_colors["Error"]
        elif use_regions:
            color = REGION_COLORS[c.region()]
        else:
            color = verdict_colors[c.verdicts[first].kind.value]
        parts.append(f'<rect x="{pad + ix * cw:.3f}" y="{pad + size - (iy + 1) * ch:.3f}" '
                     f'width="{cw:.3f}" height="{ch:.3f}" fill="{color}"/>')
    for m, res in diagram.boundaries.items():
        if len(res.points) < 2:
            continue
        pts = " ".join(f"{px(x):.3f},{py(y):.3f}" for x, y in res.points)
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{MEASURE_COLORS[m]}" '
                     f'stroke-width="2"><title>{m.value}</title></polyline>')
    parts.append(f'<rect x="{pad}" y="{pad}" width="{size}" height="{size}" '
                 f'fill="none" stroke="black"/>')
    parts.append(f'<text x="{pad + size / 2}" y="{pad + size + 35}" '
                 f'text-anchor="middle">G02/G01</text>')
    parts.append(f'<text x="15" y="{pad + size / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 15 {pad + size / 2})">G12/G01</text>')
    for v, label in ((x0, x0), (x1, x1)):
        parts.append(f'<text x="{px(v):.1f}" y="{pad + size + 15}" text-anchor="middle">{label:g}</text>')
    for v, label in ((y0, y0), (y1, y1)):
        parts.append(f'<text x="{pad - 5}" y="{py(v):.1f}" text-anchor="end">{label:g}</text>')
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if target is not None:
        Path(target).write_text(text)
    return text
