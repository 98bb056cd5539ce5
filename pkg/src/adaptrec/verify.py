"""Brute-force validation of the partition against grid oracles.

Everything here recomputes membership from the raw definition with
rational arithmetic, independent of the kernel code paths, so the two
routes can be compared.  Grids are regular with spacing h on the unit
scale; sampled distances relate to true ones as

    sampled_min - 2h <= true <= sampled_min

because member regions are closures of h-thick open boxes, so some grid
point lies within one step of a true minimizer.  Estimated separations
only ever exceed the true infimum (grid pairs are genuine pairs), which
makes ``estimate_separation >= c`` the right empirical test of the
separation constant.  Dimensions above 3 are refused for exhaustive
sweeps; use the sampling checks instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import backend, measurement, partition
from .errors import ContractViolation, DomainError
from .num import INT64_SAFE, lcm_denoms, to_fraction, to_fraction_vec
from .partition import CellId, ColorSet, PartitionSpec

MAX_GRID_VOXELS = 80_000_000


@dataclass(frozen=True)
class GridSpec:
    """Regular grid on the unit scale: box[j] = (lo, hi), spacing h."""

    box: tuple[tuple[Fraction, Fraction], ...]
    h: Fraction

    def __post_init__(self):
        if self.h <= 0:
            raise DomainError("grid spacing must be positive")
        for lo, hi in self.box:
            if not lo < hi:
                raise DomainError("grid box must have positive extent")
        if self.n_voxels > MAX_GRID_VOXELS:
            raise DomainError(
                f"grid of {self.n_voxels} voxels exceeds the exhaustive "
                f"limit; coarsen h or shrink the box"
            )

    @property
    def m(self) -> int:
        return len(self.box)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(
            int((hi - lo) / self.h) + 1 for lo, hi in self.box
        )

    @property
    def n_voxels(self) -> int:
        n = 1
        for c in self.counts:
            n *= c
        return n


def _default_h(m: int) -> Fraction:
    if m > 3:
        raise DomainError(
            "exhaustive grids are limited to m <= 3; run the sampling "
            "checks for larger dimensions"
        )
    return Fraction(1, 1000) if m <= 2 else Fraction(1, 100)


def default_grid(m: int) -> GridSpec:
    """Default verification grid: h = 1e-3 up to m = 2, 1e-2 at m = 3.

    The box spans one lattice period plus a margin above 1/2 on each
    side, so distance queries from [0, 1]^m always find their nearest
    class point inside the box.
    """
    box = ((Fraction(-11, 20), Fraction(31, 20)),) * m
    return GridSpec(box=box, h=_default_h(m))


def separation_grid(m: int) -> GridSpec:
    """Box for separation sweeps: one period plus a margin wide enough
    that every color shows at least two cells.  The widest free band
    starts delta_0 past a lattice point, so the margin clears that."""
    margin = partition.default_delta_schedule(m)[0] + Fraction(1, 20)
    box = ((-margin, 1 + margin),) * m
    return GridSpec(box=box, h=_default_h(m))


# ---------------------------------------------------------------------------
# literal membership, rational arithmetic, no kernel reuse
# ---------------------------------------------------------------------------


def _frac_profile(y: tuple[Fraction, ...]) -> list[Fraction]:
    out = []
    for v in y:
        r = v - math.floor(v)
        out.append(r if r <= Fraction(1, 2) else 1 - r)
    return out


def _literal_level(y, delta) -> int:
    m = len(y)
    d = _frac_profile(y)
    for k in range(m + 1):
        if sum(1 for v in d if v <= delta[k]) >= m - k:
            return k
    raise AssertionError("level m accepts every point")


def grid_membership_oracle(x, spec: PartitionSpec, *, level: int | None = None,
                           colors=None, cell: CellId | None = None) -> bool:
    """Literal membership test at one point, from the raw definition.

    Exactly one of ``level``, ``colors``, ``cell`` selects the target.
    The point is given on the eps scale, like every public operation.
    """
    picked = [v is not None for v in (level, colors, cell)]
    if sum(picked) != 1:
        raise ContractViolation("pick exactly one of level, colors, cell")
    y = tuple(v / spec.eps for v in to_fraction_vec(x, spec.m))
    k_here = _literal_level(y, spec.delta)
    if level is not None:
        return k_here == level
    if colors is not None:
        if not isinstance(colors, ColorSet):
            colors = ColorSet(frozenset(colors))
        return (k_here + 1) in colors.colors
    cell.check(spec)
    if k_here != cell.level:
        return False
    for j, a in zip(cell.pinned, cell.anchors):
        if abs(y[j] - a) > spec.delta[cell.level]:
            return False
    free = [j for j in range(spec.m) if j not in set(cell.pinned)]
    for j, o in zip(free, cell.origins):
        if math.floor(y[j]) != o:
            return False
    return True


# ---------------------------------------------------------------------------
# grid sweeps
# ---------------------------------------------------------------------------


class _Grid:
    """Scaled-integer view of a GridSpec for one partition."""

    def __init__(self, grid: GridSpec, spec: PartitionSpec):
        if grid.m != spec.m:
            raise DomainError("grid and partition dimension differ")
        self.grid = grid
        self.spec = spec
        self.S = lcm_denoms((grid.h,),
                            (f for lo_hi in grid.box for f in lo_hi),
                            spec.delta)
        self.h_s = int(grid.h * self.S)
        self.t = [int(d * self.S) for d in spec.delta]
        self.axes = []
        for (lo, hi), n in zip(grid.box, grid.counts):
            start = int(lo * self.S)
            self.axes.append(start + self.h_s * np.arange(n, dtype=np.int64))
        self._levels = None
        self._coords_cache: dict = {}

    def coords_for(self, key, mask_fn) -> np.ndarray | None:
        """Member coordinates for a hashable target, cached."""
        if key not in self._coords_cache:
            mask = mask_fn()
            if len(self._coords_cache) >= 16:
                self._coords_cache.clear()
            self._coords_cache[key] = (
                self.member_coords(mask) if mask.any() else None
            )
        return self._coords_cache[key]

    def axis_profile(self, ax: int) -> np.ndarray:
        r = np.mod(self.axes[ax], self.S)
        return np.minimum(r, self.S - r)

    def levels(self) -> np.ndarray:
        """Per-voxel level, from the raw counting definition."""
        if self._levels is not None:
            return self._levels
        m = self.grid.m
        shape = self.grid.counts
        out = np.full(shape, m, dtype=np.int8)
        settled = np.zeros(shape, dtype=bool)
        profs = [self.axis_profile(ax) for ax in range(m)]
        for k in range(m):
            cnt = np.zeros(shape, dtype=np.int8)
            for ax in range(m):
                sl = [None] * m
                sl[ax] = slice(None)
                cnt = cnt + (profs[ax] <= self.t[k])[tuple(sl)]
            hit = (~settled) & (cnt >= m - k)
            out[hit] = k
            settled |= hit
        self._levels = out
        return out

    def y_of_index(self, idx: tuple[int, ...]) -> tuple[Fraction, ...]:
        return tuple(
            Fraction(int(self.axes[ax][i]), self.S) for ax, i in enumerate(idx)
        )

    def color_mask(self, colors: ColorSet) -> np.ndarray:
        lv = self.levels()
        mask = np.zeros(lv.shape, dtype=bool)
        for r in colors:
            mask |= lv == r - 1
        return mask

    def cell_mask(self, cell: CellId) -> np.ndarray:
        lv = self.levels()
        mask = lv == cell.level
        free = [j for j in range(self.grid.m) if j not in set(cell.pinned)]
        for j, a in zip(cell.pinned, cell.anchors):
            ok = np.abs(self.axes[j] - a * self.S) <= self.t[cell.level]
            sl = [None] * self.grid.m
            sl[j] = slice(None)
            mask &= ok[tuple(sl)]
        for j, o in zip(free, cell.origins):
            ok = self.axes[j] // self.S == o
            sl = [None] * self.grid.m
            sl[j] = slice(None)
            mask &= ok[tuple(sl)]
        return mask

    def member_coords(self, mask: np.ndarray) -> np.ndarray:
        """Scaled positions of member voxels, one row per voxel.

        int32 positions: grid magnitudes stay tiny after scaling.
        """
        idx = np.nonzero(mask)
        cols = [self.axes[ax][idx[ax]].astype(np.int32) for ax in range(self.grid.m)]
        return np.stack(cols, axis=1)


_VIEW_CACHE: dict = {}


def _grid_view(grid: GridSpec, spec: PartitionSpec) -> _Grid:
    """Memoized _Grid: level sweeps over big grids dominate the cost of
    every oracle call, so repeated queries share one view."""
    key = (grid, spec)
    cached = _VIEW_CACHE.get(key)
    if cached is None:
        if len(_VIEW_CACHE) >= 4:
            _VIEW_CACHE.clear()
        cached = _VIEW_CACHE[key] = _Grid(grid, spec)
    return cached


@dataclass(frozen=True)
class DistInterval:
    """Sampled distance bracket: true value in [lo - h, hi]; hi is the
    sampled minimum.  ``empty`` flags a target with no voxel on the grid,
    where the sampled distance is unbounded."""

    lo: Fraction | None
    hi: Fraction | None
    empty: bool = False


def grid_distance_oracle(x, spec: PartitionSpec, grid: GridSpec, *,
                         colors=None, cell: CellId | None = None) -> DistInterval:
    """Brute-force max-norm distance from x to a color class or cell.

    Sweeps every grid voxel; the result brackets the true distance as
    documented on DistInterval.  Distances are on the eps scale, like
    ``dist_to_colors`` and ``dist_to_cell``.
    """
    if (colors is None) == (cell is None):
        raise ContractViolation("pick exactly one of colors, cell")
    g = _grid_view(grid, spec)
    if colors is not None:
        if not isinstance(colors, ColorSet):
            colors = ColorSet(frozenset(colors))
        colors.check(spec)
        coords = g.coords_for(colors, lambda: g.color_mask(colors))
    else:
        cell.check(spec)
        coords = g.coords_for(cell, lambda: g.cell_mask(cell))
    if coords is None:
        return DistInterval(lo=None, hi=None, empty=True)
    y = tuple(v / spec.eps for v in to_fraction_vec(x, spec.m))
    scaled = [v * g.S for v in y]
    d = lcm_denoms(scaled)
    ybound = max(abs(v) for v in scaled)
    cbound = int(np.abs(coords).max()) if coords.size else 0
    if d * (ybound + cbound) < INT64_SAFE:
        # rescale once more so off-lattice queries stay in integers
        yq = np.array([int(v * d) for v in scaled], dtype=np.int64)
        cheb = np.abs(coords.astype(np.int64) * d - yq[None, :]).max(axis=1).min()
        hi = Fraction(int(cheb), g.S * d)
    else:
        # query point too wide for 64-bit: exact per-voxel Fractions
        best = None
        for row in coords:
            dist = max(abs(yv - Fraction(int(pv), g.S)) for yv, pv in zip(y, row))
            if best is None or dist < best:
                best = dist
        hi = best
    lo = max(Fraction(0), hi - grid.h)
    return DistInterval(lo=spec.eps * lo, hi=spec.eps * hi)


def enumerate_grid_cells(spec: PartitionSpec, grid: GridSpec) -> list[CellId]:
    """All cells with at least one voxel inside the box."""
    g = _grid_view(grid, spec)
    lv = g.levels()
    cells: list[CellId] = []
    seen: set = set()
    for k in range(spec.m + 1):
        mask = lv == k
        if not mask.any():
            continue
        idx = np.nonzero(mask)
        pinned_thr = g.t[k - 1] if k >= 1 else g.t[0]
        profs = [g.axis_profile(ax) for ax in range(spec.m)]
        pin_cols = np.stack(
            [profs[ax][idx[ax]] <= pinned_thr for ax in range(spec.m)], axis=1
        )
        pos_cols = np.stack(
            [g.axes[ax][idx[ax]] for ax in range(spec.m)], axis=1
        )
        anchor = (pos_cols + (g.S // 2)) // g.S
        origin = pos_cols // g.S
        vals = np.where(pin_cols, anchor, origin)
        combined = np.concatenate([pin_cols.astype(np.int64), vals], axis=1)
        uniq = np.unique(combined, axis=0)
        for row in uniq:
            pins = row[: spec.m].astype(bool)
            vv = row[spec.m:]
            key = (k, tuple(pins), tuple(int(v) for v in vv))
            if key in seen:
                continue
            seen.add(key)
            pinned = tuple(int(j) for j in range(spec.m) if pins[j])
            anchors = tuple(int(vv[j]) for j in range(spec.m) if pins[j])
            origins = tuple(int(vv[j]) for j in range(spec.m) if not pins[j])
            cells.append(CellId(level=k, pinned=pinned, anchors=anchors,
                                origins=origins))
    return cells


def estimate_diameter(cell: CellId, spec: PartitionSpec, grid: GridSpec):
    """Sampled max-norm diameter of one cell (unit scale): the largest
    per-coordinate spread among its voxels, None if no voxel lies inside."""
    g = _grid_view(grid, spec)
    coords = g.coords_for(cell, lambda: g.cell_mask(cell))
    if coords is None:
        return None
    spread = int((coords.max(axis=0) - coords.min(axis=0)).max())
    return Fraction(spread, g.S)


@dataclass(frozen=True)
class SeparationEstimate:
    value: Fraction
    color: int
    n_cells: int


def estimate_separation(color: int, spec: PartitionSpec, grid: GridSpec):
    """Smallest sampled max-norm gap between distinct cells of one color.

    Returns None when fewer than two cells of the color meet the grid.
    Sampled gaps can only exceed the true infimum, so a return below the
    certified c falsifies it.  Gaps are resolved exactly up to 2c; wider
    ones come back as lower bounds (windowing, see below), which never
    affects the c comparison.
    """
    from scipy import ndimage

    g = _grid_view(grid, spec)
    k = color - 1
    lv = g.levels()
    mask = lv == k
    if not mask.any():
        return None
    # label voxels by cell: per-axis pin flag plus anchor/origin value
    profs = [g.axis_profile(ax) for ax in range(spec.m)]
    pinned_thr = g.t[k - 1] if k >= 1 else g.t[0]
    shape = lv.shape
    label = np.zeros(shape, dtype=np.int64)
    base = 1
    for ax in range(spec.m):
        pin = profs[ax] <= pinned_thr
        anchor = (g.axes[ax] + (g.S // 2)) // g.S
        origin = g.axes[ax] // g.S
        val = np.where(pin, anchor, origin)
        vmin = int(val.min())
        code = 2 * (val - vmin) + pin
        ncodes = int(code.max()) + 1
        sl = [None] * spec.m
        sl[ax] = slice(None)
        label = label + base * code[tuple(sl)]
        base *= ncodes
    labels_here = np.unique(label[mask])
    if len(labels_here) < 2:
        return None
    # Transform only a padded window around each cell: gaps beyond the
    # pad are irrelevant (the test is "min gap >= c") and cropping keeps
    # the per-label cost flat as the box grows.
    pad = int(math.ceil(2 * spec.c / grid.h)) + 2
    best_steps = None
    for L in labels_here:
        own = mask & (label == L)
        idx = np.nonzero(own)
        window = tuple(
            slice(max(int(ix.min()) - pad, 0), int(ix.max()) + pad + 1)
            for ix in idx
        )
        other_w = (mask & (label != L))[window]
        if not other_w.any():
            continue
        dt = ndimage.distance_transform_cdt(~other_w, metric="chessboard")
        steps = int(dt[own[window]].min())
        if best_steps is None or steps < best_steps:
            best_steps = steps
    if best_steps is None:
        # no window ever saw a rival cell: every gap exceeds the pad
        best_steps = pad
    return SeparationEstimate(
        value=Fraction(best_steps) * grid.h,
        color=color,
        n_cells=len(labels_here),
    )


def validate_separation(spec: PartitionSpec, grid: GridSpec | None = None,
                        max_halvings: int = 8) -> PartitionSpec:
    """Empirically confirm the separation constant on a grid.

    If some color's sampled separation falls below c, halve c and retry;
    the analytic bound makes this a formality, but the check is cheap
    insurance against a miscomputed schedule.
    """
    if grid is None:
        grid = separation_grid(spec.m)
    current = spec
    for _ in range(max_halvings):
        ok = True
        for color in range(1, current.n_colors + 1):
            est = estimate_separation(color, current, grid)
            if est is not None and est.value < current.c:
                ok = False
                break
        if ok:
            return current
        import dataclasses

        current = dataclasses.replace(current, c=current.c / 2)
    raise ContractViolation("separation validation failed even after halving c")


# ---------------------------------------------------------------------------
# Lipschitz fuzzing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LipschitzReport:
    """Fuzzing outcome for one functional.

    ``max_excess`` is the largest |f(x) - f(y)| - ||x - y|| observed, in
    eps units; the Lipschitz property makes it nonpositive, and float
    evaluation can push it up only by rounding noise, which is additive
    in the values and so is bounded by an additive slack, never by a
    slack on the ratio (a tiny gap divides rounding into an arbitrarily
    large ratio).  ``max_ratio`` is informational, taken over pairs at
    least 1e-3 eps apart where rounding cannot distort it.
    """

    descriptor: measurement.MeasurementDescriptor
    pairs: int
    max_ratio: float
    max_excess: float
    violations: int
    slack: float


def _sample_pairs(m: int, n_pairs: int, rng: np.random.Generator,
                  eps_f: float, span: float = 12.0) -> tuple[np.ndarray, np.ndarray]:
    """Global pairs, local perturbations, and boundary-hugging pairs.

    Sampled on the unit scale across ``span`` lattice cells, then scaled
    by eps; the boundary group starts on lattice points and band centers
    so pairs straddle the membership boundaries.
    """
    n_glob = n_pairs // 3
    n_loc = n_pairs // 3
    n_edge = n_pairs - n_glob - n_loc
    X1 = rng.uniform(-span, span, size=(n_glob, m))
    Y1 = rng.uniform(-span, span, size=(n_glob, m))
    X2 = rng.uniform(-span, span, size=(n_loc, m))
    scales = 10.0 ** rng.uniform(-7, 0, size=(n_loc, 1))
    Y2 = X2 + scales * rng.uniform(-1, 1, size=(n_loc, m))
    base = rng.integers(-int(span), int(span) + 1, size=(n_edge, m)).astype(float)
    offs = rng.choice([0.0, 0.5], size=(n_edge, m))
    jitter = 10.0 ** rng.uniform(-9, -2, size=(n_edge, 1))
    X3 = base + offs + jitter * rng.uniform(-1, 1, size=(n_edge, m))
    Y3 = X3 + jitter * rng.uniform(-1, 1, size=(n_edge, m))
    X = np.concatenate([X1, X2, X3], axis=0)
    Y = np.concatenate([Y1, Y2, Y3], axis=0)
    return eps_f * X, eps_f * Y


def _eval_bulk_f(descriptor, pts: np.ndarray, spec: PartitionSpec) -> np.ndarray:
    Y = pts / spec.eps_f
    if descriptor.kind == "colors":
        ld = backend.bulk_level_dists_f(Y, spec.delta_f)
        levels = [r - 1 for r in descriptor.colors]
        return spec.eps_f * ld[:, levels].min(axis=1)
    k = descriptor.target_color - 1
    comb_mk = float(math.comb(spec.m, spec.m - k))
    return spec.eps_f * backend.bulk_lambda_star_f(
        Y, spec.delta_f, k, spec.c_f, comb_mk)


def check_lipschitz(descriptor, spec: PartitionSpec, n_pairs: int = 10_000,
                    seed: int = 0, span: float = 12.0,
                    slack: float = 1e-9) -> LipschitzReport:
    """Fuzz |f(x) - f(y)| <= ||x - y||_inf + slack*eps over sampled pairs.

    float64 specs run the vectorized kernels with the additive slack;
    exact specs evaluate each pair rationally with zero slack, so there
    the genuine Lipschitz property is what is tested.
    """
    rng = np.random.default_rng(seed)
    X, Y = _sample_pairs(spec.m, n_pairs, rng, spec.eps_f, span)
    if spec.mode == "float64":
        fx = _eval_bulk_f(descriptor, X, spec)
        fy = _eval_bulk_f(descriptor, Y, spec)
        gap = np.abs(X - Y).max(axis=1)
        diff = np.abs(fx - fy)
        excess = (diff - gap) / spec.eps_f
        wide = gap >= 1e-3 * spec.eps_f
        max_ratio = float((diff[wide] / gap[wide]).max()) if wide.any() else 0.0
        violations = int((excess > slack).sum())
        return LipschitzReport(descriptor, len(gap), max_ratio,
                               float(excess.max()), violations, slack)
    max_ratio = Fraction(0)
    max_excess = None
    violations = 0
    count = 0
    for i in range(len(X)):
        xv = [Fraction(v) for v in X[i]]
        yv = [Fraction(v) for v in Y[i]]
        gap = max(abs(a - b) for a, b in zip(xv, yv))
        count += 1
        diff = abs(measurement.evaluate(descriptor, xv, spec)
                   - measurement.evaluate(descriptor, yv, spec))
        excess = (diff - gap) / spec.eps
        if max_excess is None or excess > max_excess:
            max_excess = excess
        if gap >= Fraction(1, 1000) * spec.eps:
            max_ratio = max(max_ratio, diff / gap)
        if diff > gap:
            violations += 1
    if max_excess is None:
        max_excess = Fraction(0)
    return LipschitzReport(descriptor, count, float(max_ratio),
                           float(max_excess), violations, 0.0)
