"""Command-line front end.

Every command writes a CSV table to standard output (header row, 17
significant digits, deterministic row order) and diagnostics to standard
error. Exit codes: 0 success, 1 domain error, 2 usage error.
"""
import argparse
import csv
import io
import math
import sys
import time
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from .bv_stieltjes import BVFunction
from .config import overridden, settings
from .constants import APP_VERSION, SIGNIFICANT_DIGITS
from .convergence_lab import FAMILIES, MODES, DistributionSequence, convergence_matrix, fixtures, theorem_checkers
from .errors import CpintError, DomainError
from .expressions import compile_expression
from .fixture_utils import (
    parse_bv_spec,
    random_bv,
    random_linear_primitive,
    random_monotone_bv,
    resolve_fixture,
    seeded_rng,
    source_distribution,
)
from .function_core import parse_extended
from .integral_core import Distribution, NormKind, integral, linear_combine, norm, translate
from .lattice_order import abs_norm, compare, lattice_op, parts
from .logging_utils import log_error, log_run_event
from .product_calculus import (
    change_of_variables,
    holder_report,
    integral_product,
    second_mvt_xi,
    taylor_expand,
    taylor_input,
)
from .transforms import (
    ComplexPoint,
    HalfPlanePoint,
    growth_probe,
    laplace,
    laplace_derivative,
    laplacian_probe,
    poisson,
    weighted_integral,
    weighted_laplace,
)


class UsageError(Exception):
    pass


class Table(NamedTuple):
    header: List[str]
    rows: List[list]
    exit_code: int = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


# argparse types: failures surface as usage errors naming the flag


def _extended(text: str) -> float:
    try:
        return parse_extended(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, inf or -inf, got {text!r}")


def _bv(text: str) -> Tuple[str, BVFunction]:
    try:
        return text, parse_bv_spec(text)
    except CpintError as exc:
        raise argparse.ArgumentTypeError(exc.message)


def _params(text: str) -> Dict[str, float]:
    params = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        try:
            if not sep:
                raise ValueError
            params[key.strip()] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected key=value pairs, got {item!r}")
    return params


def _floats(text: str) -> List[float]:
    try:
        return [parse_extended(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _kinds(text: str) -> List[str]:
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    known = [k.value for k in NormKind] + ["abs"]
    unknown = [k for k in kinds if k not in known]
    if unknown or not kinds:
        raise argparse.ArgumentTypeError(f"unknown norm kinds {unknown}; expected some of {', '.join(known)}")
    return kinds


def _pair(text: str) -> Tuple[float, float]:
    values = _floats(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    return values[0], values[1]


def _modes(text: str) -> List[str]:
    modes = [m.strip() for m in text.split(",") if m.strip()]
    known = (*MODES, "theorems")
    unknown = [m for m in modes if m not in known]
    if unknown or not modes:
        raise argparse.ArgumentTypeError(f"unknown modes {unknown}; expected some of {', '.join(known)}")
    return modes


# Primitive sources


def _add_source(parser: argparse.ArgumentParser, sequences: bool = False) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--primitive", metavar="EXPR", help="expression for the primitive F")
    source.add_argument("--primitive-of", metavar="EXPR", help="expression for the integrand f")
    source.add_argument("--fixture", metavar="NAME", help="catalog or fixture-file primitive")
    if sequences:
        source.add_argument("--sequence", metavar="NAME", help="members of a sequence family or fixture")
        parser.add_argument("--n", type=_ints, default=[1], help="sequence indices")
        parser.add_argument("--params", type=_params, default={})
    parser.add_argument("--support", nargs=2, type=_extended, metavar=("A", "B"),
                        help="restrict the primitive to [A, B]")
    parser.add_argument("--hake", action="store_true", help="take the limits at infinity from a tail audit")


def _distribution(name: str) -> Distribution:
    return source_distribution(fixture=name)


def _source(args: argparse.Namespace, a: float = -math.inf, b: float = math.inf) -> Distribution:
    if not (args.primitive or args.primitive_of or args.fixture):
        raise UsageError("one of --primitive, --primitive-of or --fixture is required")
    return source_distribution(args.primitive, args.primitive_of, args.fixture, args.support, a, b, args.hake)


def _second(args: argparse.Namespace) -> Optional[Distribution]:
    if not (args.with_expr or args.with_fixture):
        return None
    return source_distribution(args.with_expr, None, args.with_fixture, args.support, hake=True)


# Commands


def _integrate(args: argparse.Namespace) -> Table:
    a, b = args.lo, args.hi
    f = _source(args, a, b)
    return Table(["a", "b", "value"], [[a, b, integral(f, a, b)]])


def _norm_rows(f: Distribution, kinds: Sequence[str]) -> List[list]:
    rows = []
    for kind in kinds:
        if kind == "abs":
            result = abs_norm(f)
            rows.append(["abs", result.value, result.divergent, result.lower_bound])
        else:
            value = norm(f, NormKind(kind))
            rows.append([kind, value, False, value])
    return rows


def _norm(args: argparse.Namespace) -> Table:
    header = ["kind", "value", "divergent", "lower_bound"]
    if args.sequence:
        seq = _sequence(args.sequence, args.params)
        return Table(["n", *header], [[n, *row] for n in args.n for row in _norm_rows(seq(n), args.kind)])
    return Table(header, _norm_rows(_source(args), args.kind))


def _translate(args: argparse.Namespace) -> Table:
    f = _source(args)
    base = norm(f)
    rows = []
    for t in args.by:
        shifted = translate(f, t)
        rows.append([t, base, norm(shifted), norm(linear_combine(-1.0, shifted, f)), integral(shifted)])
    return Table(["t", "norm", "shifted_norm", "distance", "integral"], rows)


def _pairs(args: argparse.Namespace,
           draw_bv: Callable[..., BVFunction]) -> List[Tuple[str, Distribution, BVFunction]]:
    """(label, f, g) from --random N seeded draws, else from the source and --bv."""
    if args.random:
        rng = seeded_rng()
        return [(f"random:{k}", random_linear_primitive(rng), draw_bv(rng)) for k in range(args.random)]
    if args.bv is None:
        raise UsageError("--bv or --random is required")
    label, g = args.bv
    return [(label, _source(args), g)]


def _product(args: argparse.Namespace) -> Table:
    rows = []
    for label, f, g in _pairs(args, random_bv):
        report = holder_report(f, g)
        rows.append([label, integral_product(f, g), report.first, report.second])
    return Table(["bv", "integral", "holder_nbv", "holder_bv"], rows)


def _mvt(args: argparse.Namespace) -> Table:
    rows = []
    for label, f, g in _pairs(args, random_monotone_bv):
        xi = second_mvt_xi(f, g)
        F_xi = float(f(xi))
        residual = abs(integral_product(f, g) - g.value_neg_inf * F_xi - g.value_pos_inf * (f.total - F_xi))
        rows.append([label, xi, residual])
    return Table(["bv", "xi", "residual"], rows)


def _cov(args: argparse.Namespace) -> Table:
    f = _source(args)
    if args.g_fixture:
        G = _distribution(args.g_fixture).primitive
    elif args.g:
        G = compile_expression(args.g)
    else:
        raise UsageError("cov needs --g or --g-fixture")
    return Table(["a", "b", "value"], [[args.lo, args.hi, change_of_variables(f, G, args.lo, args.hi)]])


def _taylor(args: argparse.Namespace) -> Table:
    a, x = args.a, args.x
    b = args.b if args.b is not None else (x if x > a else a + 1.0)
    data = taylor_input(args.n, a, b, compile_expression(args.fn_top), args.coeffs)
    result = taylor_expand(data, x)
    return Table(
        ["x", "polynomial", "remainder", "value", "bound_pointwise", "bound_uniform", "remainder_norm_bound"],
        [[x, result.polynomial, result.remainder, result.value, result.bound_pointwise,
          result.bound_uniform, result.remainder_norm_bound]],
    )


def _lattice(args: argparse.Namespace) -> Table:
    f = _source(args)
    if args.op == "parts":
        plus, minus, absolute = parts(f)
        return Table(["x", "plus", "minus", "abs"],
                     [[x, float(plus(x)), float(minus(x)), float(absolute(x))] for x in args.at])
    g = _second(args)
    if g is None:
        raise UsageError(f"--op {args.op} needs --with or --with-fixture")
    if args.op == "compare":
        result = compare(f, g)
        witnesses = result.witnesses or (None,)
        return Table(["relation", "witness"], [[result.relation.value, w] for w in witnesses])
    h = lattice_op(f, g, args.op)
    return Table(["x", "value"], [[x, float(h(x))] for x in args.at])


def _sequence(name: str, params: Dict[str, float]) -> DistributionSequence:
    if name in FAMILIES:
        return fixtures(name, params)
    fixture = resolve_fixture(name)
    if not isinstance(fixture, DistributionSequence):
        raise DomainError(f"fixture {name!r} is not a sequence")
    return fixtures(fixture.name, {**fixture.params, **params}) if params else fixture


def _converge(args: argparse.Namespace) -> Table:
    seq = _sequence(args.fixture, args.params)
    candidate = _distribution(args.candidate) if args.candidate else None
    n_max = args.n_max or settings.n_max
    verdicts = []
    matrix_modes = [m for m in args.modes if m != "theorems"]
    if matrix_modes:
        bv_battery = list(args.bv) if args.bv else None
        verdicts.extend(convergence_matrix(seq, candidate, matrix_modes, n_max, bv_battery=bv_battery).verdicts)
    if "theorems" in args.modes:
        verdicts.extend(theorem_checkers(seq, candidate, n_max=n_max).verdicts)
    rows = [[v.mode, v.verdict, row.element, row.n, row.x, row.value] for v in verdicts for row in v.evidence]
    return Table(["mode", "verdict", "element", "n", "x", "value"], rows)


def _poisson(args: argparse.Namespace) -> Table:
    f = _source(args)
    header = ["x", "y", "u"] + (["laplacian"] if args.laplacian else [])
    rows = []
    for x, y in args.at:
        p = HalfPlanePoint(x, y)
        row = [x, y, poisson(f, p)]
        if args.laplacian:
            row.append(laplacian_probe(f, p, args.laplacian))
        rows.append(row)
    return Table(header, rows)


def _laplace(args: argparse.Namespace) -> Table:
    f = _source(args)
    rows = []
    for re_z, im_z in args.at:
        z = ComplexPoint(re_z, im_z)
        value = laplace(f, z) if args.derivative == 0 else laplace_derivative(f, z, args.derivative)
        rows.append([re_z, im_z, value.real, value.imag])
    return Table(["re", "im", "value_re", "value_im"], rows)


def _growth(args: argparse.Namespace) -> Table:
    result = growth_probe(_source(args), args.alpha, args.radii)
    return Table(["radius", "maximum", "trend"], [[r, m, result.trend] for r, m in zip(result.radii, result.maxima)])


def _weighted(args: argparse.Namespace) -> Table:
    F_loc = compile_expression(args.primitive)
    if not args.at:
        return Table(["r", "value"], [[args.r, weighted_integral(F_loc, args.r)]])
    rows = []
    for re_z, im_z in args.at:
        value = weighted_laplace(F_loc, ComplexPoint(re_z, im_z), args.r)
        rows.append([args.r, re_z, im_z, value.real, value.imag])
    return Table(["r", "re", "im", "value_re", "value_im"], rows)


# Selftest: documented examples replayed through the dispatcher


class Check(NamedTuple):
    name: str
    argv: List[str]
    observe: Callable[[Table], object]
    expected: object
    tolerance: float = 0.0


def _cell(column: str, row: int = 0) -> Callable[[Table], object]:
    def observe(table: Table) -> object:
        return table.rows[row][table.header.index(column)]

    return observe


def _evidence(mode: str, element: str, n: int, column: str = "value") -> Callable[[Table], object]:
    def observe(table: Table) -> object:
        for row in table.rows:
            record = dict(zip(table.header, row))
            if record["mode"] == mode and record["element"] == element and record["n"] == n:
                return record[column]
        return None

    return observe


def _verdict(mode: str) -> Callable[[Table], object]:
    def observe(table: Table) -> object:
        for row in table.rows:
            record = dict(zip(table.header, row))
            if record["mode"] == mode:
                return record["verdict"]
        return None

    return observe


def _exit_code(table: Table) -> object:
    return table.exit_code


def _records(table: Table) -> List[Dict[str, object]]:
    if not table.rows:
        raise ValueError("empty table")
    return [dict(zip(table.header, row)) for row in table.rows]


def _largest(column: str) -> Callable[[Table], object]:
    def observe(table: Table) -> object:
        return max(float(record[column]) for record in _records(table))

    return observe


def _relative_error(expected: Callable[[int], float]) -> Callable[[Table], object]:
    """max over the rows of |value / expected(n) - 1|."""

    def observe(table: Table) -> object:
        return max(abs(float(r["value"]) / expected(int(r["n"])) - 1.0) for r in _records(table))

    return observe


def _decreasing(column: str) -> Callable[[Table], object]:
    def observe(table: Table) -> object:
        values = [float(record[column]) for record in _records(table)]
        return all(b < a for a, b in zip(values, values[1:]))

    return observe


def _spread(column: str, against: str) -> Callable[[Table], object]:
    def observe(table: Table) -> object:
        return max(abs(float(r[column]) - float(r[against])) for r in _records(table))

    return observe


def _sandwich(table: Table) -> object:
    """dual_bv_lower <= alexiewicz <= interval_sup <= 2 alexiewicz."""
    value = {r["kind"]: float(r["value"]) for r in _records(table)}
    slack = 1e-12 * max(1.0, value["interval_sup"])
    return (value["dual_bv_lower"] <= value["alexiewicz"] + slack
            and value["alexiewicz"] <= value["interval_sup"] + slack
            and value["interval_sup"] <= 2.0 * value["alexiewicz"] + slack)


def _holder_violations(table: Table) -> object:
    violations = 0
    for r in _records(table):
        bound = min(float(r["holder_nbv"]), float(r["holder_bv"]))
        violations += abs(float(r["integral"])) > bound * (1.0 + 1e-9) + 1e-12
    return violations


def _indicator_poisson(x: float, y: float) -> float:
    return (math.atan((1.0 - x) / y) + math.atan((1.0 + x) / y)) / math.pi


def _poisson_error(table: Table) -> object:
    return max(abs(float(r["u"]) - _indicator_poisson(float(r["x"]), float(r["y"]))) for r in _records(table))


HALF_PI = "1.5707963267948966"
SI_AT_PI = 1.8519370519824662
NORM_TABLE_N = "1,2,3,4,5,6,7,8"
POISSON_GRID_ARGS = [f"--at={-2.25 + 0.5 * i!r},{y!r}"
                     for i in range(10) for y in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)]

CHECKS: List[Check] = [
    Check("integrate nonabsolute primitive", ["integrate", "--primitive", "x^2*cos(x^-2)", "--from", "0", "--to", "1"],
          _cell("value"), math.cos(1.0), 1e-12),
    Check("integrate Fresnel by Hake", ["integrate", "--hake", "--primitive-of", "sin(x^2)", "--from", "0", "--to", "inf"],
          _cell("value"), math.sqrt(math.pi) / 2**1.5, 1e-6),
    Check("integrate Cantor primitive", ["integrate", "--fixture", "cantor", "--from", "0", "--to", "1"],
          _cell("value"), 1.0, 1e-12),
    Check("integrate power ramp", ["integrate", "--primitive", "x^3", "--from", "0", "--to", "1"],
          _cell("value"), 1.0, 1e-12),
    Check("integrate x/(1+x^2) over the line", ["integrate", "--hake", "--primitive", "x/(1+x^2)"],
          _cell("value"), 0.0, 1e-9),
    Check("integrate rejects malformed expression", ["integrate", "--primitive", "x +", "--from", "0", "--to", "1"],
          _exit_code, 1),
    Check("norm of n^2 sin(nt), n=3", ["norm", "--primitive=-3*cos(3*x)", "--support", "-3.141592653589793",
                                        "3.141592653589793"], _cell("value"), 6.0, 1e-9),
    Check("norm of arctan", ["norm", "--fixture", "arctan"], _cell("value"), math.pi, 1e-9),
    Check("abs norm of arctan", ["norm", "--fixture", "arctan", "--kind", "abs"], _cell("value"), math.pi, 1e-9),
    Check("product with Heaviside", ["product", "--fixture", "arctan", "--bv", "heaviside"],
          _cell("integral"), 0.5 * math.pi, 1e-9),
    Check("product with an indicator", ["product", "--fixture", "gaussian", "--bv", "indicator:[-1,1]"],
          _cell("integral"), math.erf(1.0), 1e-9),
    Check("change of variables G=x^2", ["cov", "--primitive", "sin(x)", "--support", "-10", "10", "--g", "x^2",
                                        "--from", "0", "--to", "1"], _cell("value"), math.sin(1.0), 1e-9),
    Check("change of variables G=Cantor", ["cov", "--fixture", "arctan", "--g-fixture", "cantor",
                                           "--from", "0", "--to", "1"], _cell("value"), 0.25 * math.pi, 1e-12),
    Check("change of variables G=tan", ["cov", "--fixture", "arctan", "--g", "tan(x)",
                                        "--from", "-" + HALF_PI, "--to", HALF_PI], _cell("value"), math.pi, 1e-9),
    Check("Taylor exact on x^3", ["taylor", "--fn-top", "6*x", "--coeffs", "0,0,0", "--a", "0", "--x", "1", "--n", "2"],
          _cell("remainder"), 1.0, 1e-10),
    Check("Taylor on x|x|", ["taylor", "--fn-top", "2*abs(x)", "--coeffs", "0,0", "--a", "0", "--x", "0.5", "--n", "1"],
          _cell("remainder"), 0.25, 1e-10),
    Check("Si is nonnegative", ["lattice", "--op", "compare", "--fixture", "si", "--with", "0"],
          _cell("relation"), "GreaterOrEqual"),
    Check("shifted Gaussians are incomparable", ["lattice", "--op", "compare", "--primitive", "exp(-x^2)",
                                                 "--with", "exp(-(x-1)^2)"], _cell("relation"), "Incomparable"),
    Check("power ramp tends to 0 in D", ["converge", "--fixture", "power_ramp", "--modes", "weakD,integral"],
          _verdict("weakD"), "holds"),
    Check("power ramp keeps integral 1", ["converge", "--fixture", "power_ramp", "--modes", "integral"],
          _evidence("integral", "x=inf", 64), 1.0, 1e-12),
    Check("traveling block fails against g=1", ["converge", "--fixture", "traveling_block", "--modes", "weakBV"],
          _verdict("weakBV"), "fails"),
    Check("triangle pairing 8n at index 2n", ["converge", "--fixture", "triangle_out", "--params", "power=3",
                                              "--modes", "weakBV", "--bv", "blocks:8"],
          _evidence("weakBV", "blocks:8", 16), 64.0, 1e-9),
    Check("Poisson integral of an indicator", ["poisson", "--fixture", "indicator_ramp", "--at", "0,1"],
          _cell("u"), 0.5, 1e-8),
    Check("Laplace transform of exp(-t)", ["laplace", "--fixture", "exp_decay", "--at", "1,0"],
          _cell("value_re"), 0.5, 1e-8),
    Check("Laplace derivative of exp(-t)", ["laplace", "--fixture", "exp_decay", "--at", "1,0", "--derivative", "1"],
          _cell("value_re"), -0.25, 1e-8),
    Check("Laplace transform of sin(t)/t", ["laplace", "--fixture", "si", "--at", "1,0"],
          _cell("value_re"), 0.25 * math.pi, 1e-8),
    Check("nonabsolute primitive has divergent variation", ["norm", "--fixture", "nonabsolute", "--kind", "abs"],
          _cell("divergent"), True),
    Check("Si has divergent variation", ["norm", "--fixture", "si", "--kind", "abs"], _cell("divergent"), True),
    Check("sup norm of Si", ["norm", "--fixture", "si"], _cell("value"), SI_AT_PI, 1e-7),
    Check("norm table of n^2 sin(nt)", ["norm", "--sequence", "sine_burst", "--n", NORM_TABLE_N],
          _relative_error(lambda n: 2.0 * n), 0.0, 1e-9),
    *(Check(f"sup norm of outward triangles, a_n = n^{p}",
            ["norm", "--sequence", "triangle_out", "--params", f"power={p}", "--n", NORM_TABLE_N],
            _relative_error(lambda n, p=p: float(n) ** p), 0.0, 1e-9) for p in (1, 2, 3)),
    *(Check(f"sup norm of inward triangles, a_n = n^{p}",
            ["norm", "--sequence", "triangle_in", "--params", f"power={p}", "--n", NORM_TABLE_N],
            _relative_error(lambda n, p=p: float(n) ** (p - 1)), 0.0, 1e-9) for p in (1, 2, 3)),
    Check("interval norm of the sine bump", ["norm", "--fixture", "sin_bump", "--kind", "interval_sup,dual_bv_lower"],
          _cell("value", 0), 2.0, 1e-9),
    Check("dual lower bound of the sine bump", ["norm", "--fixture", "sin_bump", "--kind", "interval_sup,dual_bv_lower"],
          _cell("value", 1), 1.0, 1e-9),
    Check("equivalent norms sandwich", ["norm", "--fixture", "lorentz_ratio",
                                        "--kind", "alexiewicz,interval_sup,dual_bv_lower"], _sandwich, True),
    Check("translation by 0 is the identity", ["translate", "--fixture", "arctan", "--by", "0"],
          _cell("distance"), 0.0),
    Check("translation keeps the norm of arctan", ["translate", "--fixture", "arctan", "--by", "5"],
          _cell("shifted_norm"), math.pi, 1e-9),
    Check("translation invariance of the norm", ["translate", "--fixture", "sin_bump", "--by=-10,-1,-0.1,0.1,1,10"],
          _spread("shifted_norm", "norm"), 0.0, 1e-9),
    Check("translation is continuous on the Cantor primitive",
          ["--tol", "1e-6", "translate", "--fixture", "cantor", "--by", "0.1,0.01,0.001"], _decreasing("distance"), True),
    Check("Hölder bound for g=1 is |integral f|", ["product", "--fixture", "arctan", "--bv", "const:1"],
          _cell("holder_nbv"), math.pi, 1e-9),
    Check("Hölder bound for Heaviside is 2 ||f||", ["product", "--fixture", "arctan", "--bv", "heaviside"],
          _cell("holder_nbv"), 2.0 * math.pi, 1e-9),
    Check("Hölder inequality on random pairs", ["product", "--random", "100"], _holder_violations, 0),
    Check("second mean value point for Heaviside", ["mvt", "--fixture", "gaussian", "--bv", "heaviside"],
          _cell("xi"), 0.0, 1e-9),
    Check("second mean value point for constant g", ["mvt", "--fixture", "arctan", "--bv", "const:2"],
          _cell("xi"), -math.inf),
    Check("second mean value residuals on random monotone g", ["mvt", "--random", "100"],
          _largest("residual"), 0.0, 1e-8),
    Check("Poisson integral of an indicator on a grid", ["poisson", "--fixture", "indicator_ramp", *POISSON_GRID_ARGS],
          _poisson_error, 0.0, 1e-8),
    Check("growth of the exp(-t) transform in a cone", ["growth", "--fixture", "exp_decay", "--alpha", "0.5",
                                                         "--radii", "1,2,4"], _cell("trend"), "decreasing"),
    Check("growth of the sin(t)/t transform on the axis", ["growth", "--fixture", "si", "--alpha", "0",
                                                            "--radii", "1,2,4"], _cell("trend"), "decreasing"),
    Check("growth with one radius is inconclusive", ["growth", "--fixture", "exp_decay", "--radii", "1"],
          _cell("trend"), "inconclusive"),
    Check("weighted integral of 1", ["weighted", "--primitive", "x", "--r", "1"], _cell("value"), 1.0, 1e-9),
    Check("weighted integral of 2t", ["weighted", "--primitive", "x^2", "--r", "1"], _cell("value"), 2.0, 1e-9),
    Check("unweighted integral of 1 has no limit", ["weighted", "--primitive", "x", "--r", "0"], _exit_code, 1),
    Check("weighted integral under a growing weight", ["weighted", "--primitive=1-exp(-2*x)", "--r=-1"],
          _cell("value"), 2.0, 1e-6),
    Check("weighted transform of exp(t)", ["weighted", "--primitive", "exp(x)", "--r", "1.5", "--at", "2,0"],
          _cell("value_re"), 1.0, 1e-8),
]


def _passes(observed: object, expected: object, tolerance: float) -> bool:
    if isinstance(expected, float):
        return isinstance(observed, float) and (observed == expected or abs(observed - expected) <= tolerance)
    return observed == expected


def _selftest(args: argparse.Namespace) -> Table:
    rows, failures = [], 0
    for check in CHECKS:
        table = _execute(check.argv)
        try:
            observed = check.observe(table)
        except (IndexError, ValueError):
            observed = None
        ok = _passes(observed, check.expected, check.tolerance)
        failures += not ok
        rows.append([check.name, check.expected, observed, "pass" if ok else "fail"])
    return Table(["check", "expected", "observed", "status"], rows, 1 if failures else 0)


COMMANDS: Dict[str, Callable[[argparse.Namespace], Table]] = {
    "integrate": _integrate,
    "norm": _norm,
    "translate": _translate,
    "product": _product,
    "mvt": _mvt,
    "cov": _cov,
    "taylor": _taylor,
    "lattice": _lattice,
    "converge": _converge,
    "poisson": _poisson,
    "laplace": _laplace,
    "growth": _growth,
    "weighted": _weighted,
    "selftest": _selftest,
}


def build_parser() -> argparse.ArgumentParser:
    globals_ = _Parser(add_help=False)
    globals_.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="function-value tolerance")
    globals_.add_argument("--budget", type=int, default=argparse.SUPPRESS, help="refinement depth cap")

    parser = _Parser(prog="cpint", description="Continuous primitive integral toolkit", parents=[globals_])
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("integrate", parents=[globals_], help="F(b) - F(a)")
    _add_source(p)
    p.add_argument("--from", dest="lo", type=_extended, default=-math.inf)
    p.add_argument("--to", dest="hi", type=_extended, default=math.inf)

    p = commands.add_parser("norm", parents=[globals_], help="Alexiewicz and equivalent norms")
    _add_source(p, sequences=True)
    p.add_argument("--kind", type=_kinds, default=["alexiewicz"], help="comma list of norm kinds or abs")

    p = commands.add_parser("translate", parents=[globals_], help="norms of the translates F(x - t)")
    _add_source(p)
    p.add_argument("--by", type=_floats, required=True, metavar="T,...")

    p = commands.add_parser("product", parents=[globals_], help="integral of f g for g of bounded variation")
    _add_source(p)
    p.add_argument("--bv", type=_bv, metavar="SPEC")
    p.add_argument("--random", type=int, metavar="N", help="N seeded random pairs instead of the source")

    p = commands.add_parser("mvt", parents=[globals_], help="second mean value point for monotone g")
    _add_source(p)
    p.add_argument("--bv", type=_bv, metavar="SPEC")
    p.add_argument("--random", type=int, metavar="N", help="N seeded random pairs with monotone g")

    p = commands.add_parser("cov", parents=[globals_], help="change of variables F(G(b)) - F(G(a))")
    _add_source(p)
    p.add_argument("--g", metavar="EXPR")
    p.add_argument("--g-fixture", metavar="NAME")
    p.add_argument("--from", dest="lo", type=_extended, required=True)
    p.add_argument("--to", dest="hi", type=_extended, required=True)

    p = commands.add_parser("taylor", parents=[globals_], help="Taylor polynomial and integral remainder")
    p.add_argument("--fn-top", required=True, metavar="EXPR", help="the top derivative f^(n)")
    p.add_argument("--coeffs", type=_floats, required=True, help="f(a), f'(a), ..., f^(n)(a)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--n", type=int, required=True)

    p = commands.add_parser("lattice", parents=[globals_], help="order and lattice operations")
    _add_source(p)
    p.add_argument("--op", choices=["join", "meet", "parts", "compare"], required=True)
    p.add_argument("--with", dest="with_expr", metavar="EXPR", help="primitive of the second operand")
    p.add_argument("--with-fixture", metavar="NAME")
    p.add_argument("--at", type=_floats, default=[-math.inf, -1.0, 0.0, 1.0, math.inf])

    p = commands.add_parser("converge", parents=[globals_], help="convergence matrix of a sequence")
    p.add_argument("--fixture", required=True, metavar="NAME")
    p.add_argument("--params", type=_params, default={})
    p.add_argument("--modes", type=_modes, default=["strong", "weakD", "weakBV", "integral"])
    p.add_argument("--n-max", type=int)
    p.add_argument("--bv", type=_bv, action="append", metavar="SPEC", help="BV battery member, repeatable")
    p.add_argument("--candidate", metavar="NAME")

    p = commands.add_parser("poisson", parents=[globals_], help="Poisson integral in the upper half plane")
    _add_source(p)
    p.add_argument("--at", type=_pair, action="append", required=True, metavar="X,Y")
    p.add_argument("--laplacian", type=float, metavar="H", help="also estimate the Laplacian with step H")

    p = commands.add_parser("laplace", parents=[globals_], help="Laplace transform and its derivatives")
    _add_source(p)
    p.add_argument("--at", type=_pair, action="append", required=True, metavar="RE,IM")
    p.add_argument("--derivative", type=int, default=0)

    p = commands.add_parser("growth", parents=[globals_], help="maxima of the Laplace transform on cone arcs")
    _add_source(p)
    p.add_argument("--alpha", type=float, default=0.5, help="cone half-angle")
    p.add_argument("--radii", type=_floats, default=[1.0, 2.0, 4.0])

    p = commands.add_parser("weighted", parents=[globals_], help="integral and transform under the weight exp(-r t)")
    p.add_argument("--primitive", required=True, metavar="EXPR", help="primitive on [0, inf) with F(0) = 0")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--at", type=_pair, action="append", metavar="RE,IM")

    commands.add_parser("selftest", parents=[globals_], help="replay the documented examples")
    return parser


def _execute(argv: Sequence[str], stderr=None) -> Table:
    """Parses and dispatches; failures come back as empty tables with exit codes."""
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(list(argv))
        updates = {key: getattr(args, key) for key in ("tol", "budget") if getattr(args, key, None) is not None}
        with overridden(**updates):
            return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return Table([], [], 2)
    except CpintError as exc:
        print(f"error: {exc.message}", file=stderr)
        log_error("cli command failed", {"argv": list(argv), "error": exc.message,
                                         "type": type(exc).__name__, "witness": exc.witness})
        return Table([], [], 1)


def _format(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"%.{SIGNIFICANT_DIGITS}g" % value
    return str(value)


def write_csv(table: Table, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(table.header)
    for row in table.rows:
        writer.writerow([_format(v) for v in row])


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = sys.stdout if stdout is None else stdout
    started = time.perf_counter()
    try:
        table = _execute(argv, stderr)
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)
    if table.header:
        buffer = io.StringIO()
        write_csv(table, buffer)
        stdout.write(buffer.getvalue())
    log_run_event({
        "command": argv[0] if argv else None,
        "argv": argv,
        "exit_code": table.exit_code,
        "elapsed_ms": round(1000.0 * (time.perf_counter() - started), 3),
        "rows": len(table.rows),
    })
    return table.exit_code


def main() -> None:
    sys.exit(run())
