"""Convergence modes for sequences in the integrable distributions.

Verdicts are evidence on a finite n-ladder and a finite battery: a finite
battery can falsify weak convergence but never prove it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bv_stieltjes import (
    BVFunction,
    constant,
    from_test_function,
    heaviside,
    indicator,
    monotone,
    staircase,
    step_function,
    variation,
)
from .config import settings
from .constants import (
    BUMP_CENTERS,
    BUMP_WIDTHS,
    EPSILON_LADDER,
    N_LADDER,
    TREND_TAIL,
    WIDE_BUMP,
    WINDOW_CENTER_FRACTIONS,
    WINDOW_WIDTH_FRACTIONS,
)
from .errors import DomainError, UnknownFixture
from .function_core import NEG_INF, POS_INF, ContinuousFunctionBar, TestFunction, bump, extremum
from .integral_core import Distribution, NormKind, linear_combine, norm, zero
from .product_calculus import integral_product
from .schemas import ConvergenceReport, EvidenceRow, ModeVerdict

# magnitudes below this count as exact zeros
ZERO_EVIDENCE = 1e-9
PROBE_POINTS = (NEG_INF, -10.0, -1.0, 0.0, 0.5, 1.0, 2.0, 10.0, POS_INF)
NEIGHBOURHOOD = np.linspace(-1.0, 1.0, 67)[1:-1]
FAR_EXPONENTS = np.arange(0, 21, dtype=float)

Battery = List[TestFunction]
BVBattery = List[Tuple[str, BVFunction]]


@dataclass(frozen=True)
class DistributionSequence:
    """n -> f_n for n >= 1, with an optional open window its weak statements live on."""

    generator: Callable[[int], Distribution]
    name: str
    params: Dict[str, float] = field(default_factory=dict)
    window: Optional[Tuple[float, float]] = None
    limit_pairing: Optional[Callable[[TestFunction], float]] = None

    def __call__(self, n: int) -> Distribution:
        if n < 1:
            raise DomainError(f"sequence index must be >= 1, got {n}")
        return self.generator(n)


def n_ladder(n_max: Optional[int] = None) -> List[int]:
    """{round(2^(j/2))} up to n_max, plus n_max itself."""
    n_max = settings.n_max if n_max is None else n_max
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    ladder = set()
    j = 0
    while round(2 ** (j / 2)) <= n_max:
        ladder.add(int(round(2 ** (j / 2))))
        j += 1
    ladder.add(n_max)
    return sorted(ladder)


def default_battery(window: Optional[Tuple[float, float]] = None) -> Battery:
    if window is None:
        battery = [bump(c, w) for c in BUMP_CENTERS for w in BUMP_WIDTHS]
        battery.append(bump(*WIDE_BUMP))
        return battery
    lo, hi = window
    length = hi - lo
    return [bump(lo + c * length, w * length) for c in WINDOW_CENTER_FRACTIONS for w in WINDOW_WIDTH_FRACTIONS]


def normalized_arctan(x: np.ndarray) -> np.ndarray:
    return (np.arctan(x) + 0.5 * math.pi) / math.pi


def default_bv_battery() -> BVBattery:
    return [
        ("one", constant(1.0)),
        ("heaviside", heaviside()),
        ("indicator[0,1]", indicator(0.0, 1.0)),
        ("atan", monotone(normalized_arctan)),
        ("staircase", staircase([(-1.0, 0.5), (0.0, 0.5), (1.0, -1.0)])),
    ]


def _label(phi: TestFunction) -> str:
    return f"bump({phi.center:g},{phi.width:g})"


def classify(magnitudes: Sequence[float]) -> Tuple[str, Optional[float]]:
    """holds / fails / inconclusive for one evidence trend, with the proven lower bound on failure."""
    mags = np.abs(np.asarray(magnitudes, dtype=float))
    first = float(mags[0])
    tail = mags[-TREND_TAIL:]
    ceiling = settings.verdict_tol * (1.0 + first)
    if np.all(tail < ZERO_EVIDENCE):
        return "holds", None
    if np.all(np.diff(tail) <= 1e-12) and tail[-1] <= ceiling:
        return "holds", None
    if tail.min() >= ceiling:
        return "fails", float(tail.min())
    return "inconclusive", None


def _mode_verdict(mode: str, rows: List[EvidenceRow], ladder: Sequence[int]) -> ModeVerdict:
    by_element: Dict[str, List[float]] = {}
    for row in rows:
        by_element.setdefault(row.element, []).append(row.value)
    verdicts, notes, bounds = [], [], []
    for element, values in by_element.items():
        verdict, bound = classify(values)
        verdicts.append(verdict)
        if verdict != "holds":
            notes.append(f"{element}: {verdict}")
        if bound is not None:
            bounds.append(bound)
    if "fails" in verdicts:
        overall = "fails"
    elif all(v == "holds" for v in verdicts):
        overall = "holds"
    else:
        overall = "inconclusive"
    return ModeVerdict(
        mode=mode,
        verdict=overall,
        n_range=(ladder[0], ladder[-1]),
        lower_bound=max(bounds) if bounds else None,
        notes=notes,
        evidence=rows,
    )


def _difference(seq: DistributionSequence, candidate: Distribution, n: int) -> Distribution:
    return linear_combine(-1.0, candidate, seq(n))


def _report(seq: DistributionSequence, candidate: Distribution, n_max: int,
            verdicts: List[ModeVerdict]) -> ConvergenceReport:
    return ConvergenceReport(sequence=seq.name, candidate=candidate.label or "f", n_max=n_max, verdicts=verdicts)


def strong_distance(seq: DistributionSequence, candidate: Distribution, n: int,
                    tol: Optional[float] = None) -> float:
    """Alexiewicz distance between f_n and the candidate."""
    return norm(_difference(seq, candidate, n), NormKind.alexiewicz, tol)


def _strong_mode(seq, candidate, n_max) -> ModeVerdict:
    ladder = n_ladder(n_max)
    rows = [EvidenceRow(mode="strong", element="norm", n=n, value=strong_distance(seq, candidate, n))
            for n in ladder]
    return _mode_verdict("strong", rows, ladder)


def _weak_d_mode(seq, candidate, battery, n_max, limit_pairing) -> ModeVerdict:
    ladder = n_ladder(n_max)
    if battery is None:
        battery = default_battery(seq.window)
    if not battery:
        raise DomainError("weak convergence in D needs a nonempty battery")
    limit_pairing = limit_pairing or seq.limit_pairing
    rows = []
    for phi in battery:
        g = from_test_function(phi)
        for n in ladder:
            if limit_pairing is None:
                value = integral_product(_difference(seq, candidate, n), g)
            else:
                value = integral_product(seq(n), g) - limit_pairing(phi)
            rows.append(EvidenceRow(mode="weakD", element=_label(phi), n=n, value=value))
    return _mode_verdict("weakD", rows, ladder)


def weak_d_report(seq: DistributionSequence, candidate: Optional[Distribution] = None,
                  battery: Optional[Battery] = None, n_max: Optional[int] = None,
                  limit_pairing: Optional[Callable[[TestFunction], float]] = None) -> ConvergenceReport:
    """Pairings <f_n - f, phi> over a test-function battery.

    `limit_pairing` stands in for a limit outside the space: its values
    <T, phi> replace the candidate's pairings.
    """
    candidate = zero() if candidate is None else candidate
    n_max = settings.n_max if n_max is None else n_max
    return _report(seq, candidate, n_max, [_weak_d_mode(seq, candidate, battery, n_max, limit_pairing)])


def _weak_bv_mode(seq, candidate, battery, n_max) -> ModeVerdict:
    ladder = n_ladder(n_max)
    battery = default_bv_battery() if battery is None else list(battery)
    if not any(label == "one" for label, _ in battery):
        battery.insert(0, ("one", constant(1.0)))
    rows = []
    for label, g in battery:
        for n in ladder:
            value = integral_product(_difference(seq, candidate, n), g)
            rows.append(EvidenceRow(mode="weakBV", element=label, n=n, value=value))
    return _mode_verdict("weakBV", rows, ladder)


def weak_bv_report(seq: DistributionSequence, candidate: Optional[Distribution] = None,
                   battery: Optional[BVBattery] = None, n_max: Optional[int] = None) -> ConvergenceReport:
    """Pairings of f_n - f with a BV battery; g = 1 is always included."""
    candidate = zero() if candidate is None else candidate
    n_max = settings.n_max if n_max is None else n_max
    return _report(seq, candidate, n_max, [_weak_bv_mode(seq, candidate, battery, n_max)])


def _integral_mode(seq, candidate, n_max, points) -> ModeVerdict:
    ladder = n_ladder(n_max)
    rows = []
    for x in points:
        target = float(candidate(x))
        for n in ladder:
            rows.append(EvidenceRow(mode="integral", element=f"x={x:g}", n=n, x=x,
                                    value=float(seq(n)(x)) - target))
    return _mode_verdict("integral", rows, ladder)


def integral_report(seq: DistributionSequence, candidate: Optional[Distribution] = None,
                    n_max: Optional[int] = None, points: Sequence[float] = (POS_INF,)) -> ConvergenceReport:
    """Evidence |F_n(x) - F(x)|, i.e. the integrals over [-inf, x]."""
    candidate = zero() if candidate is None else candidate
    n_max = settings.n_max if n_max is None else n_max
    return _report(seq, candidate, n_max, [_integral_mode(seq, candidate, n_max, points)])


def _neighbourhood(x: float, delta: float) -> np.ndarray:
    if math.isfinite(x):
        return x + delta * NEIGHBOURHOOD
    side = math.copysign(1.0, x)
    return np.append(side * 2.0**FAR_EXPONENTS / delta, x)


def _deltas(depth_cap: int) -> List[float]:
    return [2.0**-k for k in range(1, depth_cap + 1)]


def quasi_uniform_check(seq: DistributionSequence, F_limit: Callable, points: Sequence[float] = PROBE_POINTS,
                        n_max: Optional[int] = None, tol: Optional[float] = None,
                        depth_cap: Optional[int] = None) -> ModeVerdict:
    """For every epsilon and N, look for n in [N, n_max] and a dyadic delta that work at each point.

    `tol` is unused by the search itself and only floors the epsilon ladder.
    """
    n_max = settings.n_max if n_max is None else n_max
    depth_cap = settings.budget if depth_cap is None else depth_cap
    floor = 0.0 if tol is None else tol
    ladder = n_ladder(n_max)
    limit_at = {x: float(F_limit(x)) for x in points}
    rows: List[EvidenceRow] = []
    notes: List[str] = []

    for x in points:
        pointwise = [abs(float(seq(n)(x)) - limit_at[x]) for n in ladder]
        verdict, _ = classify(pointwise)
        if verdict != "holds":
            rows.append(EvidenceRow(mode="quasi", element=f"x={x:g}", n=ladder[-1], x=x,
                                    value=pointwise[-1], note="no pointwise convergence"))
            return ModeVerdict(mode="quasi", verdict="inconclusive", n_range=(ladder[0], ladder[-1]),
                               notes=[f"pointwise convergence not observed at x={x:g}"], evidence=rows)

    failed = False
    worst = 0.0
    starts = [N for N in N_LADDER if N <= max(1, n_max // 2)]
    for x in points:
        for eps in (e for e in EPSILON_LADDER if e > floor):
            for N in starts:
                best: Optional[Tuple[int, float, float]] = None
                smallest = math.inf
                for delta in _deltas(depth_cap):
                    y = _neighbourhood(x, delta)
                    target = np.asarray(F_limit(y), dtype=float)
                    for n in range(N, n_max + 1):
                        gap = float(np.max(np.abs(np.asarray(seq(n)(y), dtype=float) - target)))
                        smallest = min(smallest, gap)
                        if gap < eps:
                            best = (n, delta, gap)
                            break
                    if best is not None:
                        break
                element = f"x={x:g},eps={eps:g},N={N}"
                if best is None:
                    failed = True
                    worst = max(worst, smallest)
                    notes.append(f"no (n, delta) at x={x:g} for eps={eps:g}, N={N}")
                    rows.append(EvidenceRow(mode="quasi", element=element, n=n_max, x=x, value=smallest,
                                            note="no witness"))
                else:
                    n, delta, gap = best
                    rows.append(EvidenceRow(mode="quasi", element=element, n=n, x=x, value=gap,
                                            note=f"delta={delta:g}"))
    return ModeVerdict(
        mode="quasi",
        verdict="fails" if failed else "holds",
        n_range=(ladder[0], ladder[-1]),
        lower_bound=worst if failed else None,
        notes=notes,
        evidence=rows,
    )


def _sup_on(F: ContinuousFunctionBar, a: float, b: float) -> float:
    _, value = extremum(lambda t: np.abs(np.asarray(F(t), dtype=float)), a, b, +1)
    return value


def _bounded_mode(seq, compacts, ladder) -> ModeVerdict:
    rows, notes, verdicts = [], [], []
    half = max(1, len(ladder) // 2)
    for a, b in compacts:
        sups = [_sup_on(seq(n).primitive, a, b) for n in ladder]
        element = f"[{a:g},{b:g}]"
        rows.extend(EvidenceRow(mode="bounded", element=element, n=n, value=s) for n, s in zip(ladder, sups))
        first_max = max(sups[:half])
        second = sups[half:]
        tail = sups[-TREND_TAIL:]
        if all(s <= (1.0 + settings.verdict_tol) * first_max for s in second):
            verdicts.append("holds")
        elif all(q > p for p, q in zip(tail, tail[1:])) and tail[-1] > 2.0 * first_max:
            verdicts.append("fails")
            notes.append(f"{element}: sup|F_n| grows to {tail[-1]:.6g}")
        else:
            verdicts.append("inconclusive")
            notes.append(f"{element}: inconclusive")
    overall = "fails" if "fails" in verdicts else ("holds" if all(v == "holds" for v in verdicts) else "inconclusive")
    return ModeVerdict(mode="bounded", verdict=overall, n_range=(ladder[0], ladder[-1]), notes=notes, evidence=rows)


def _pointwise_mode(seq, candidate, ladder, points) -> ModeVerdict:
    rows = [EvidenceRow(mode="pointwise", element=f"x={x:g}", n=n, x=x,
                        value=float(seq(n)(x)) - float(candidate(x)))
            for x in points for n in ladder]
    return _mode_verdict("pointwise", rows, ladder)


def _equicontinuity_mode(seq, ladder, points, n_max, depth_cap) -> ModeVerdict:
    """A shared delta for every listed member; at +-inf only 1/delta <= n_max/2 is admitted."""
    rows, notes = [], []
    failed = False
    members = {n: seq(n).primitive for n in ladder}
    for x in points:
        admitted = _deltas(depth_cap)
        if not math.isfinite(x):
            admitted = [d for d in admitted if 1.0 / d <= n_max / 2]
        for eps in EPSILON_LADDER:
            found = None
            smallest, worst_n = math.inf, ladder[-1]
            for delta in admitted:
                y = _neighbourhood(x, delta)
                spread, spread_n = 0.0, ladder[0]
                for n, F in members.items():
                    gap = float(np.max(np.abs(np.asarray(F(y), dtype=float) - float(F(x)))))
                    if gap > spread:
                        spread, spread_n = gap, n
                if spread < smallest:
                    smallest, worst_n = spread, spread_n
                if spread < eps:
                    found = delta
                    break
            element = f"x={x:g},eps={eps:g}"
            if found is None:
                failed = True
                notes.append(f"no shared delta at x={x:g} for eps={eps:g}")
                rows.append(EvidenceRow(mode="equicontinuity", element=element, n=worst_n, x=x,
                                        value=smallest if math.isfinite(smallest) else 0.0,
                                        note="no shared delta"))
            else:
                rows.append(EvidenceRow(mode="equicontinuity", element=element, n=ladder[-1], x=x,
                                        value=smallest, note=f"delta={found:g}"))
    return ModeVerdict(mode="equicontinuity", verdict="fails" if failed else "holds",
                       n_range=(ladder[0], ladder[-1]), notes=notes, evidence=rows)


def _bv_modes(f: Distribution, bv_sequence: Callable[[int], BVFunction], bv_limit: BVFunction,
              ladder: Sequence[int], points: Sequence[float]) -> List[ModeVerdict]:
    members = {n: bv_sequence(n) for n in ladder}
    half = max(1, len(ladder) // 2)
    variations = [variation(members[n]) for n in ladder]
    rows = [EvidenceRow(mode="bv_variation", element="V", n=n, value=v) for n, v in zip(ladder, variations)]
    bounded = all(v <= (1.0 + settings.verdict_tol) * max(variations[:half]) for v in variations[half:])
    verdicts = [ModeVerdict(mode="bv_variation", verdict="holds" if bounded else "inconclusive",
                            n_range=(ladder[0], ladder[-1]), lower_bound=None,
                            notes=[] if bounded else ["variation still growing"], evidence=rows)]
    pointwise_rows = [EvidenceRow(mode="bv_pointwise", element=f"x={x:g}", n=n, x=x,
                                  value=float(members[n](x)) - float(bv_limit(x)))
                      for x in points for n in ladder]
    verdicts.append(_mode_verdict("bv_pointwise", pointwise_rows, ladder))
    if bounded and verdicts[-1].verdict == "holds":
        target = integral_product(f, bv_limit)
        conclusion = [EvidenceRow(mode="bv_conclusion", element="integral", n=n,
                                  value=integral_product(f, members[n]) - target) for n in ladder]
        verdicts.append(_mode_verdict("bv_conclusion", conclusion, ladder))
    return verdicts


def theorem_checkers(seq: Optional[DistributionSequence], candidate: Optional[Distribution] = None,
                     compacts: Sequence[Tuple[float, float]] = ((-10.0, 10.0),), n_max: Optional[int] = None,
                     *, points: Sequence[float] = PROBE_POINTS,
                     bv_sequence: Optional[Callable[[int], BVFunction]] = None,
                     bv_limit: Optional[BVFunction] = None,
                     depth_cap: Optional[int] = None) -> ConvergenceReport:
    """Audits the hypotheses of the sufficient-condition theorems and checks their conclusions.

    Uniform boundedness on compacts plus pointwise convergence of the
    primitives implies F_n(x) -> F(x) at every x including +-inf;
    equicontinuity on the extended line implies strong convergence. With
    `bv_sequence`, a fixed candidate is paired against g_n of bounded
    variation converging to `bv_limit`.
    """
    candidate = zero() if candidate is None else candidate
    n_max = settings.n_max if n_max is None else n_max
    depth_cap = settings.budget if depth_cap is None else depth_cap
    ladder = n_ladder(n_max)
    verdicts: List[ModeVerdict] = []
    name = "bv" if seq is None else seq.name
    if seq is not None:
        bounded = _bounded_mode(seq, compacts, ladder)
        pointwise = _pointwise_mode(seq, candidate, ladder, points)
        equi = _equicontinuity_mode(seq, ladder, points, n_max, depth_cap)
        verdicts.extend([bounded, pointwise, equi])
        if bounded.verdict == "holds" and pointwise.verdict == "holds":
            conclusion = _integral_mode(seq, candidate, n_max, points)
            verdicts.append(conclusion.model_copy(update={"mode": "conclusion_integral"}))
        if equi.verdict == "holds" and pointwise.verdict == "holds":
            strong = _strong_mode(seq, candidate, n_max)
            verdicts.append(strong.model_copy(update={"mode": "conclusion_strong"}))
    if bv_sequence is not None:
        if bv_limit is None:
            raise DomainError("bv_sequence needs bv_limit")
        verdicts.extend(_bv_modes(candidate, bv_sequence, bv_limit, ladder, points))
    if not verdicts:
        raise DomainError("theorem_checkers needs a sequence or a bv_sequence")
    return ConvergenceReport(sequence=name, candidate=candidate.label or "f", n_max=n_max, verdicts=verdicts)


MODES = ("strong", "weakD", "weakBV", "integral", "quasi")


def convergence_matrix(seq: DistributionSequence, candidate: Optional[Distribution] = None,
                       modes: Sequence[str] = ("strong", "weakD", "weakBV", "integral"),
                       n_max: Optional[int] = None, battery: Optional[Battery] = None,
                       bv_battery: Optional[BVBattery] = None) -> ConvergenceReport:
    candidate = zero() if candidate is None else candidate
    n_max = settings.n_max if n_max is None else n_max
    verdicts = []
    for mode in modes:
        if mode == "strong":
            verdicts.append(_strong_mode(seq, candidate, n_max))
        elif mode == "weakD":
            verdicts.append(_weak_d_mode(seq, candidate, battery, n_max, None))
        elif mode == "weakBV":
            verdicts.append(_weak_bv_mode(seq, candidate, bv_battery, n_max))
        elif mode == "integral":
            verdicts.append(_integral_mode(seq, candidate, n_max, (POS_INF,)))
        elif mode == "quasi":
            verdicts.append(quasi_uniform_check(seq, candidate.primitive, n_max=n_max))
        else:
            raise DomainError(f"unknown convergence mode {mode!r}; expected one of {', '.join(MODES)}")
    return _report(seq, candidate, n_max, verdicts)


# Families


def _linear(xs: Sequence[float], ys: Sequence[float], label: str) -> Distribution:
    knots_x = np.asarray(xs, dtype=float)
    knots_y = np.asarray(ys, dtype=float)

    def evaluator(x: np.ndarray) -> np.ndarray:
        return np.interp(x, knots_x, knots_y)

    return Distribution(ContinuousFunctionBar(evaluator, 0.0, float(knots_y[-1])), label)


def _coefficient(params: Dict[str, float], power: float) -> Callable[[int], float]:
    scale = float(params.get("scale", 1.0))
    power = float(params.get("power", power))
    return lambda n: scale * float(n) ** power


def _traveling_block(params):
    return lambda n: _linear([n, n + 1], [0.0, 1.0], f"traveling_block[{n}]")


def _signed_blocks(params):
    return lambda n: _linear([n - 1, n, n + 1], [0.0, 1.0, 0.0], f"signed_blocks[{n}]")


def _power_ramp(params):
    def element(n: int) -> Distribution:
        def F(x: np.ndarray) -> np.ndarray:
            return np.clip(x, 0.0, 1.0) ** n

        return Distribution(ContinuousFunctionBar(F, 0.0, 1.0), f"power_ramp[{n}]")

    return element


def _sine_burst(params):
    def element(n: int) -> Distribution:
        def F(x: np.ndarray) -> np.ndarray:
            t = np.clip(x, -math.pi, math.pi)
            return n * (math.cos(n * math.pi) - np.cos(n * t))

        return Distribution(ContinuousFunctionBar(F, 0.0, 0.0), f"sine_burst[{n}]")

    return element


def _triangle_out(params):
    a = _coefficient(params, 3.0)
    return lambda n: _linear([n - 1, n, n + 1], [0.0, a(n), 0.0], f"triangle_out[{n}]")


def _triangle_in(params):
    a = _coefficient(params, 2.0)
    return lambda n: _linear([0.0, 1.0 / n, 2.0 / n], [0.0, a(n) / n, 0.0], f"triangle_in[{n}]")


def _char_interval(params):
    return lambda n: _linear([-n, n], [0.0, 2.0 * n], f"char_interval[{n}]")


def _char_symmetric(params):
    a = _coefficient(params, 0.0)
    return lambda n: _linear([-2.0, -1.0, 1.0, 2.0], [0.0, -a(n), -a(n), 0.0], f"char_symmetric[{n}]")


FAMILIES = {
    "traveling_block": (_traveling_block, None),
    "signed_blocks": (_signed_blocks, None),
    "power_ramp": (_power_ramp, (0.0, 1.0)),
    "sine_burst": (_sine_burst, None),
    "triangle_out": (_triangle_out, None),
    "triangle_in": (_triangle_in, None),
    "char_interval": (_char_interval, None),
    "char_symmetric": (_char_symmetric, None),
}


def fixtures(name: str, params: Optional[Dict[str, float]] = None) -> DistributionSequence:
    """The counterexample families, parameterized by a_n = scale * n^power where they take one."""
    if name not in FAMILIES:
        raise UnknownFixture(f"unknown sequence fixture {name!r}; expected one of {', '.join(sorted(FAMILIES))}")
    params = dict(params or {})
    build, window = FAMILIES[name]
    # chi_[-n,n] tends weakly in D to 1, which lies outside the space
    limit_pairing = (lambda phi: phi.mass()) if name == "char_interval" else None
    return DistributionSequence(build(params), name, params, window, limit_pairing)


def bv_family(name: str, params: Optional[Dict[str, float]] = None) -> Tuple[Callable[[int], BVFunction], BVFunction]:
    """(n -> g_n, pointwise limit g)."""
    params = dict(params or {})
    if name == "arctan_ramp":
        def arctan_ramp(n: int) -> BVFunction:
            scale = math.atan(n)
            return monotone(lambda x: np.arctan(n * np.asarray(x, dtype=float)) / scale)

        return arctan_ramp, step_function([0.0], [-1.0, 1.0], [0.0])
    if name == "shrinking_staircase":
        height = float(params.get("height", 1.0))

        def shrinking(n: int) -> BVFunction:
            h = height / n
            return staircase([(0.0, h), (1.0, h), (2.0, -2.0 * h)])

        return shrinking, constant(0.0)
    raise UnknownFixture(f"unknown BV family {name!r}; expected arctan_ramp or shrinking_staircase")
