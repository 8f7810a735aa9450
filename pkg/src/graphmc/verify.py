"""The ten-step verification pipeline behind ``graphmc verify-paper``.

Each check returns a ``CheckResult`` with status ``pass``, ``fail`` or
``inconclusive``.  A check whose inputs need a higher second grading than the
cap, or slices beyond the IHX bounds, reports ``inconclusive`` instead of
passing silently.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from . import cobar, ihx, kontsevich, mc
from .dsl import format_graph, serialize
from .graphs import GraphSum, check_admissible, decode_key, lie_degree, second_grading
from .ihx import SliceError
from .operad import bracket

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

EXPECTED_LIE_DEGREE = {
    "Q": 1, "a1": 1, "a2": 1, "a3": 1, "a4": 1, "a5": 1, "a6": 1,
    "alpha0": 1, "alpha_duf": 1, "b": 1, "b1": 1, "b2": 1, "b3": 1, "bprime": 1,
    "c": 0, "gamma1": 1, "gamma2": 1, "xi": 0, "xi1": 0, "xi2": 0, "xi3": 0,
}

# Gauge parameter in terms of its three components.
XI_COMPONENTS = (("xi1", Fraction(-1, 4)), ("xi2", Fraction(-1, 16)), ("xi3", Fraction(1, 48)))

Expr = Union[str, Tuple["Expr", "Expr"]]

# (label, left-hand side as nested brackets of fixture names, right-hand side as a combination)
BRACKET_IDENTITIES: Tuple[Tuple[str, Expr, Dict[str, int]], ...] = (
    ("[xi1,a1] = 2 a3", ("xi1", "a1"), {"a3": 2}),
    ("[xi1,a2] = 0", ("xi1", "a2"), {}),
    ("[xi1,a3] = Q", ("xi1", "a3"), {"Q": 1}),
    ("[xi1,[xi1,a1]] = 2 Q", ("xi1", ("xi1", "a1")), {"Q": 2}),
    ("[xi2,a1] = -a4 + 2 a5", ("xi2", "a1"), {"a4": -1, "a5": 2}),
    ("[xi2,a2] = -Q - b1 - b3", ("xi2", "a2"), {"Q": -1, "b1": -1, "b3": -1}),
    ("[xi3,a1] = -2 a6 + a4", ("xi3", "a1"), {"a6": -2, "a4": 1}),
    ("[xi3,a2] = -b1 + 2 b2 - b3", ("xi3", "a2"), {"b1": -1, "b2": 2, "b3": -1}),
)


@dataclass
class CheckResult:
    id: int
    name: str
    status: str
    detail: str
    offending: Optional[str] = None  # first offending graph term, DSL form
    data: Dict = field(default_factory=dict)

    def to_json(self) -> Dict:
        out = {"id": self.id, "name": self.name, "status": self.status, "detail": self.detail}
        if self.offending is not None:
            out["offending"] = self.offending
        if self.data:
            out["data"] = self.data
        return out


class Inconclusive(Exception):
    pass


def first_term(x: GraphSum) -> Optional[str]:
    items = x.items_sorted()
    if not items:
        return None
    key, c = items[0]
    return serialize(GraphSum._from_clean({key: c}))


def corrupt(x: GraphSum) -> GraphSum:
    """Negate the coefficient of the first term (in canonical order)."""
    items = x.items_sorted()
    if not items:
        return x
    key, c = items[0]
    return x - GraphSum._from_clean({key: 2 * c})


@dataclass
class Context:
    fixtures: Dict[str, GraphSum]
    cap: int = 4
    bounds: Optional[Tuple[int, int]] = None  # (m_max, e_max) for IHX slices
    lie: kontsevich.LieData = field(default_factory=kontsevich.so3)

    def get(self, name: str) -> GraphSum:
        return self.fixtures[name]

    def need_grading(self, g: int) -> None:
        if self.cap < g:
            raise Inconclusive(f"needs second grading {g}, cap is {self.cap}: widen --cap")

    def reduce(self, x: GraphSum) -> GraphSum:
        if self.bounds is not None:
            try:
                ihx.check_bounds(x, *self.bounds)
            except SliceError as exc:
                raise Inconclusive(f"{exc}: widen --bounds") from None
        return ihx.reduce(x)

    def combo(self, coeffs: Dict[str, int]) -> GraphSum:
        out = GraphSum()
        for name, c in coeffs.items():
            out = out + self.get(name) * c
        return out

    def evaluate(self, expr: Expr) -> GraphSum:
        if isinstance(expr, str):
            return self.get(expr)
        left, right = expr
        return bracket(self.evaluate(left), self.evaluate(right))

    def xi(self) -> GraphSum:
        out = GraphSum()
        for name, c in XI_COMPONENTS:
            out = out + self.get(name) * c
        return out


def expr_grading(ctx: Context, expr: Expr) -> int:
    if isinstance(expr, str):
        return max(ctx.get(expr).gradings() or [0])
    return expr_grading(ctx, expr[0]) + expr_grading(ctx, expr[1])


# ---------------------------------------------------------------- checks

def check_fixtures(ctx: Context) -> CheckResult:
    problems = []
    for name in sorted(ctx.fixtures):
        x = ctx.fixtures[name]
        for g, _ in x.terms():
            ok, why = check_admissible(g)
            if not ok:
                problems.append((name, format_graph(g), why))
                break
            expected = EXPECTED_LIE_DEGREE.get(name)
            if expected is not None and lie_degree(g) != expected:
                problems.append((name, format_graph(g), f"Lie degree {lie_degree(g)}, expected {expected}"))
                break
    if problems:
        name, term, why = problems[0]
        return CheckResult(1, "fixtures", FAIL, f"{name}: {why}", term)
    return CheckResult(1, "fixtures", PASS,
                       f"{len(ctx.fixtures)} fixtures admissible with expected Lie degrees")


def check_bracket_identities(ctx: Context) -> CheckResult:
    for _, lhs, rhs in BRACKET_IDENTITIES:
        ctx.need_grading(expr_grading(ctx, lhs))
    lines = []
    offending = None
    failed = []
    for label, lhs, rhs in BRACKET_IDENTITIES:
        diff = ctx.evaluate(lhs) - ctx.combo(rhs)
        red = ctx.reduce(diff)
        raw = "raw" if not diff else "mod IHX"
        if red:
            failed.append(label)
            offending = offending or first_term(red)
            lines.append(f"{label}: fails")
        else:
            lines.append(f"{label}: holds {raw}")
    status = FAIL if failed else PASS
    detail = "; ".join(lines)
    return CheckResult(2, "bracket identities", status, detail, offending,
                       {"failed": failed})


def check_gauge(ctx: Context) -> CheckResult:
    ctx.need_grading(3)
    alpha = ctx.get("alpha_duf")
    # the fixtures pin alpha_duf through grading 3 and xi through grading 2,
    # so nothing above grading 3 is determined
    cap = min(ctx.cap, 3)
    res = mc.gauge_act(ctx.xi(), alpha, mc.TruncationPolicy(cap),
                       alpha_known_through=mc.KNOWN_THROUGH["alpha_duf"],
                       xi_known_through=mc.KNOWN_THROUGH["xi"])
    target = ctx.combo({"a1": 1, "a2": 1}) + ctx.get("b") * Fraction(1, 24)
    diff = ctx.reduce(res.determined() - target.truncate(res.determined_cap))
    if diff:
        return CheckResult(3, "gauge action", FAIL,
                           f"exp(ad_xi) alpha_duf differs from a1 + a2 + 1/24 b through grading {res.determined_cap}",
                           first_term(diff))
    return CheckResult(3, "gauge action", PASS,
                       f"exp(ad_xi) alpha_duf = a1 + a2 + 1/24 b mod IHX through grading {res.determined_cap} "
                       f"(higher gradings are not determined by the truncated inputs)",
                       data={"determined_cap": res.determined_cap})


def check_mc_alpha0(ctx: Context) -> CheckResult:
    ctx.need_grading(2)
    alpha0 = ctx.get("alpha0")
    res = mc.mc_check(alpha0, mc.TruncationPolicy(ctx.cap))
    a1 = ctx.get("a1")
    a1a1 = bracket(a1, a1)
    jacobi_raw_nonzero = bool(a1a1)
    jacobi_mod_ihx = not ctx.reduce(a1a1)
    if not res.passed:
        g = min(res.residuals)
        return CheckResult(4, "MC equation of alpha0", FAIL,
                           f"residual at grading {g} is nonzero mod IHX", first_term(res.residuals[g]))
    if not (jacobi_raw_nonzero and jacobi_mod_ihx):
        return CheckResult(4, "MC equation of alpha0", FAIL,
                           f"[a1,a1] raw nonzero: {jacobi_raw_nonzero}, zero mod IHX: {jacobi_mod_ihx}",
                           first_term(ctx.reduce(a1a1)))
    return CheckResult(4, "MC equation of alpha0", PASS,
                       f"(1/2)[alpha0,alpha0] = 0 mod IHX at gradings <= {ctx.cap}; "
                       f"[a1,a1] is nonzero raw and zero mod IHX")


def check_closed(ctx: Context) -> CheckResult:
    ctx.need_grading(4)
    d = bracket(ctx.combo({"a1": 1, "a2": 1}), ctx.get("b"))
    red = ctx.reduce(d)
    if red:
        return CheckResult(5, "b is closed", FAIL, "[a1+a2, b] is nonzero mod IHX", first_term(red))
    return CheckResult(5, "b is closed", PASS, "[a1+a2, b] = 0 mod IHX")


def check_boundary_relation(ctx: Context) -> CheckResult:
    ctx.need_grading(3)
    x = ctx.get("b") + ctx.get("bprime") - bracket(ctx.combo({"a1": 1, "a2": 1}), ctx.get("c"))
    red = ctx.reduce(x)
    if red:
        return CheckResult(6, "b = -b' + [a1+a2, c]", FAIL, "b + b' - [a1+a2, c] is nonzero mod IHX",
                           first_term(red))
    return CheckResult(6, "b = -b' + [a1+a2, c]", PASS, "b + b' - [a1+a2, c] = 0 mod IHX")


def check_obstruction(ctx: Context) -> CheckResult:
    ctx.need_grading(3)
    if ctx.bounds is not None:
        m_max, e_max = ctx.bounds
        for sl in mc.degree_slices(1, 3) + mc.degree_slices(0, 2):
            if sl[1] > m_max or sl[2] > e_max:
                raise Inconclusive(f"slice {sl} exceeds bounds m<={m_max}, e<={e_max}: widen --bounds")
    alpha = ctx.combo({"a1": 1, "a2": 1}) + ctx.get("b") * Fraction(1, 24)
    try:
        res = mc.obstruction_test(alpha, 3)
    except mc.MCError as exc:
        return CheckResult(7, "obstruction", FAIL, str(exc))
    cert = res.certificate
    data = {"source_size": cert.source_size, "image_rank": cert.image_rank,
            "relation_count": cert.relation_count, "combined_rank": cert.combined_rank}
    if not res.obstructed:
        return CheckResult(7, "obstruction", FAIL,
                           "the grading-3 part is exact: a witness eta exists", first_term(res.witness),
                           data)
    value = cert.functional_value(res.alpha_k)
    return CheckResult(7, "obstruction", PASS,
                       f"b/24 is not in image(ad_(a1+a2)) + IHX: source {cert.source_size} graphs, "
                       f"image rank {cert.image_rank}, combined rank {cert.combined_rank}, "
                       f"certificate functional takes value {value}", data=data)


def check_representation(ctx: Context) -> CheckResult:
    lie = ctx.lie
    stripped = kontsevich.ihx_vanishing(lie, n_max=3)
    full = kontsevich.ihx_vanishing(lie, n_max=3, include_external_edges=True, e_max=5)
    jac = kontsevich.jacobi_poly_identity(lie)
    failures = stripped.failures + full.failures
    data = {"lie": lie.name, "relations_checked": stripped.checked + full.checked}
    if failures:
        return CheckResult(8, f"IHX vanishing under B ({lie.name})", FAIL,
                           f"B(r) != 0 for {len(failures)} relations", failures[0][0], data)
    if not jac:
        return CheckResult(8, f"IHX vanishing under B ({lie.name})", FAIL,
                           "(d pi/d x_m)(d pi/d p^m) != 0", None, data)
    return CheckResult(8, f"IHX vanishing under B ({lie.name})", PASS,
                       f"B(r) = 0 for {stripped.checked} relations of arity <= 3 without edges between "
                       f"arguments and for all {full.checked} relations of arity <= 3 with <= 5 edges",
                       data=data)


def check_cobar(ctx: Context, n_max: int = 4) -> CheckResult:
    for n in range(1, n_max + 1):
        h = cobar.cobar_cohomology(n)
        expected = tuple(1 if k == n else 0 for k in range(1, n + 1))
        if h.dims_tuple() != expected or not h.omega_closed or not h.top_class_nonzero:
            return CheckResult(9, "cobar cohomology", FAIL,
                               f"n={n}: dims {h.dims_tuple()}, omega closed {h.omega_closed}, "
                               f"omega nonzero {h.top_class_nonzero}")
        for k in range(1, n):
            for key in cobar.cobar_basis(n, k):
                x = cobar.CobarElement._from_clean({key: Fraction(1)})
                if cobar.cobar_d(cobar.cobar_d(x)):
                    return CheckResult(9, "cobar cohomology", FAIL, f"d^2 != 0 on {key}")
    return CheckResult(9, "cobar cohomology", PASS,
                       f"H is one-dimensional in top degree, spanned by [omega_n], for n <= {n_max}")


def check_gluing(ctx: Context, n_max: int = 4, m_max: int = 2, bij_n_max: int = 3) -> CheckResult:
    pairs = 0
    for n in range(1, n_max + 1):
        for m in range(m_max + 1):
            for key in cobar.univalent_cores(n, m):
                core = decode_key(key)
                for comp in cobar.all_compositions(n):
                    pairs += 1
                    defect = cobar.chain_map_defect(core, comp)
                    if defect:
                        return CheckResult(10, "gluing chain map", FAIL,
                                           f"glue(d x) != [a2, glue(x)] for core {format_graph(core)}, "
                                           f"composition {comp}", first_term(defect))
    for n in range(1, bij_n_max + 1):
        for m in range(m_max + 1):
            bij = cobar.glue_bijectivity(n, m)
            if not bij.bijective:
                return CheckResult(10, "gluing chain map", FAIL,
                                   f"gluing is not bijective at n={n}, m={m}")
    return CheckResult(10, "gluing chain map", PASS,
                       f"chain-map identity on {pairs} (core, composition) pairs with n <= {n_max}, "
                       f"m <= {m_max}; bijective for n <= {bij_n_max}")


CHECKS: Tuple[Tuple[int, str, Callable[[Context], CheckResult]], ...] = (
    (1, "fixtures", check_fixtures),
    (2, "bracket identities", check_bracket_identities),
    (3, "gauge action", check_gauge),
    (4, "MC equation of alpha0", check_mc_alpha0),
    (5, "b is closed", check_closed),
    (6, "b = -b' + [a1+a2, c]", check_boundary_relation),
    (7, "obstruction", check_obstruction),
    (8, "IHX vanishing under B", check_representation),
    (9, "cobar cohomology", check_cobar),
    (10, "gluing chain map", check_gluing),
)


def run_checks(ctx: Context, only: Optional[Sequence[int]] = None) -> List[CheckResult]:
    results = []
    for cid, name, fn in CHECKS:
        if only is not None and cid not in only:
            continue
        try:
            results.append(fn(ctx))
        except Inconclusive as exc:
            results.append(CheckResult(cid, name, INCONCLUSIVE, f"inconclusive: {exc}"))
    return results


def overall_status(results: Sequence[CheckResult]) -> str:
    statuses = {r.status for r in results}
    if FAIL in statuses:
        return FAIL
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return PASS


# ---------------------------------------------------------------- naming results

ATOMIC_BASES = (
    ("a1", "a2", "a3", "a4", "a5", "a6", "Q", "b1", "b2", "b3", "bprime", "c",
     "gamma1", "gamma2", "xi1", "xi2", "xi3"),
    ("a1", "a2", "a3", "a4", "a5", "a6", "Q", "b", "b1", "b2", "bprime", "c",
     "gamma1", "gamma2", "xi1", "xi2", "xi3"),
)


def _format_combo(combo: Sequence[Tuple[str, Fraction]]) -> str:
    parts = []
    for name, c in combo:
        mag = abs(c)
        body = name if mag == 1 else f"{mag} * {name}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts)


def name_element(x: GraphSum, fixtures: Dict[str, GraphSum]) -> Optional[str]:
    """Express ``x`` mod IHX as a multiple of one fixture or a short combination; None if neither."""
    from .linalg import RowBasis
    red = ihx.reduce(x)
    if not red:
        return "0"
    probe = min(red)
    reduced = {name: ihx.reduce(v) for name, v in sorted(fixtures.items())}
    singles = []
    for name, v in reduced.items():
        if probe in v:
            c = red[probe] / v[probe]
            if red == v * c:
                singles.append((len(name), name, c))
    if singles:
        _, name, c = min(singles)
        return _format_combo([(name, c)])
    best = None
    for names in ATOMIC_BASES:
        names = [n for n in names if n in reduced and reduced[n]]
        basis = RowBasis(track=True)
        for idx, name in enumerate(names):
            basis._insert(reduced[name], idx)
        ok, coeffs = basis.in_span(red)
        if not ok:
            continue
        combo = basis.input_combination(coeffs)
        terms = [(names[i], c) for i, c in sorted(combo.items()) if c]
        if best is None or len(terms) < len(best):
            best = terms
    return _format_combo(best) if best else None
