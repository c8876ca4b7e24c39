"""Periodic points, multiplier spectra, and eigenvalue audits.

Period-l points are isolated by exact elimination per affine chart: the
fixed-point conditions of the l-th iterate, with the chart's coordinate
factors stripped, feed the two-form solver on P^2 or the binary root finder
on P^1.  Candidates from every chart are merged, Newton-verified against
the map itself, and annotated with minimal periods.

Multiplier spectra chain single-step chart-transition Jacobians along the
orbit, each factor evaluated at a max-modulus-normalized representative in
its own best chart, so no step divides by a small denominator.  The
classification of eigenvalues and the audit verdicts follow the configured
tolerance set; an audit separates hard violations from findings that only
flag undecidable neutral values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath

from . import numeric, poly, projmap
from .projmap import ProjectiveMap

ELIMINATION_BUDGET = 256

EPS_ZERO = 1e-10
EPS_NEUTRAL = 1e-8
EPS_ROOT = 1e-8
Q_MAX = 64


class BudgetError(RuntimeError):
    """The requested elimination exceeds the configured budget."""


class PeriodicError(RuntimeError):
    """Period-point isolation failed structurally."""


@dataclass(frozen=True)
class PeriodicPoint:
    point: tuple  # max-modulus-normalized mpc coordinates
    period: int  # minimal period
    requested_period: int
    residual: object  # mpf: proj_distance(f^l(p), p)
    multiplicity: int  # eliminant multiplicity hint (1 = simple)

    @property
    def multiplicity_suspect(self) -> bool:
        return self.multiplicity > 1


@dataclass(frozen=True)
class EigenClass:
    value: object  # mpc
    kind: str  # zero | attracting-nonzero | parabolic | neutral-irrational-candidate | repelling
    root_order: Optional[int] = None  # q with value^q ~ 1, parabolic only


def _point_sort_key(coords):
    return tuple((float(mpmath.re(c)), float(mpmath.im(c))) for c in coords)


def _orbit_step(m: ProjectiveMap, coords):
    vals = [c.evaluate(tuple(coords)) for c in m.comps]
    return numeric.normalize_point(vals)


def _apply_n(m: ProjectiveMap, coords, n: int):
    cur = coords
    for _ in range(n):
        cur, _chart = _orbit_step(m, cur)
    return cur


def _fixed_point_candidates_p1(big: ProjectiveMap, precision: int):
    s = poly.variable(2, 0)
    t = poly.variable(2, 1)
    form = big.comps[0] * t - big.comps[1] * s
    if form.is_zero():
        raise PeriodicError("every point is periodic: the iterate is the identity")
    return [(root, mult) for root, mult in numeric.binary_form_roots(form, precision)]


def _fixed_point_candidates_p2(big: ProjectiveMap, precision: int):
    found = []
    for chart in range(3):
        others = [i for i in range(3) if i != chart]
        xc = poly.variable(3, chart)
        eqs = []
        for i in others:
            e = xc * big.comps[i] - poly.variable(3, i) * big.comps[chart]
            if e.is_zero():
                eqs = None
                break
            shift = e.min_var_degree(chart)
            eqs.append(poly._shift_var(e, chart, -shift))
        if eqs is None:
            raise PeriodicError("every point is periodic: the iterate is the identity")
        try:
            pts, mults = numeric.solve_pair_p2(eqs[0], eqs[1], precision)
        except numeric.NumericalError:
            continue  # chart equations kept a common factor; other charts cover
        found.extend(zip(pts, mults))
    if not found:
        raise PeriodicError("no chart system could be solved")
    return found


def find_periodic(m: ProjectiveMap, l: int, precision: Optional[int] = None,
                  degree_cap: int = projmap.DEFAULT_DEGREE_CAP):
    """All points of period dividing l, with minimal periods, by elimination.

    Every affine chart contributes the solutions of its stripped fixed-point
    system for the l-th iterate; merged candidates are kept only when the
    map itself moves them by less than a coarse verification tolerance, so
    spurious chart solutions drop out.  Raises BudgetError when the
    eliminated degrees exceed the configured budget.
    """
    if l < 1:
        raise PeriodicError("period must be >= 1")
    precision = numeric.resolve_precision(precision)
    if (m.d**l + 1) ** m.k > ELIMINATION_BUDGET:
        raise BudgetError(
            f"period {l} needs eliminant degree ({m.d}^{l}+1)^{m.k} "
            f"> {ELIMINATION_BUDGET}"
        )
    big = projmap.iterate(m, l, degree_cap)
    with mpmath.workprec(precision):
        if m.k == 1:
            candidates = _fixed_point_candidates_p1(big, precision)
        elif m.k == 2:
            candidates = _fixed_point_candidates_p2(big, precision)
        else:
            raise PeriodicError(f"periodic points implemented for P^1 and P^2, not P^{m.k}")
        dedup = mpmath.mpf(10) ** (-(precision // 8))
        verify = mpmath.mpf(10) ** (-(precision // 16))
        merged = []  # (point, mult)
        for pt, mult in candidates:
            pt = numeric.normalize_point(pt)[0]
            hit = None
            for idx, (known, _km) in enumerate(merged):
                if numeric.proj_distance(pt, known) < dedup:
                    hit = idx
                    break
            if hit is None:
                merged.append((pt, mult))
            elif mult > merged[hit][1]:
                merged[hit] = (merged[hit][0], mult)
        out = []
        for pt, mult in merged:
            moved = _apply_n(m, pt, l)
            residual = numeric.proj_distance(moved, pt)
            if residual >= verify:
                continue  # spurious chart solution
            period = l
            for q in range(1, l):
                if l % q == 0:
                    if numeric.proj_distance(_apply_n(m, pt, q), pt) < dedup:
                        period = q
                        break
            out.append(PeriodicPoint(pt, period, l, residual, mult))
        out.sort(key=lambda p: (p.period, _point_sort_key(p.point)))
    return out


# -- multipliers --------------------------------------------------------------


def _chart_jacobian(m: ProjectiveMap, partials, coords, chart_in: int,
                    chart_out: int):
    """Derivative of the chart transition of m at a normalized point.

    Rows range over the output chart's affine coordinates, columns over the
    input chart's; the input point must satisfy coords[chart_in] = 1.
    """
    vals = [c.evaluate(tuple(coords)) for c in m.comps]
    dvals = [[partials[i][j].evaluate(tuple(coords)) for j in range(m.k + 1)]
             for i in range(m.k + 1)]
    b = chart_out
    fb = vals[b]
    if mpmath.fabs(fb) == 0:
        raise numeric.NumericalError("orbit point maps onto a chart boundary")
    rows = []
    for i in range(m.k + 1):
        if i == b:
            continue
        row = []
        for j in range(m.k + 1):
            if j == chart_in:
                continue
            row.append((dvals[i][j] * fb - vals[i] * dvals[b][j]) / (fb * fb))
        rows.append(row)
    return rows


def _mat_mul(a, b):
    n, mid, p = len(a), len(b), len(b[0])
    return [[sum(a[i][t] * b[t][j] for t in range(mid)) for j in range(p)]
            for i in range(n)]


def _eigenvalues(matrix, precision: int):
    k = len(matrix)
    if k == 1:
        return (matrix[0][0],)
    if k == 2:
        tr = matrix[0][0] + matrix[1][1]
        det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
        disc = mpmath.sqrt(tr * tr - 4 * det)
        return ((tr + disc) / 2, (tr - disc) / 2)
    # characteristic polynomial by exact-arithmetic-free expansion
    coeffs = _char_poly(matrix)
    roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=precision)
    return tuple(roots)


def _char_poly(matrix):
    # Faddeev-LeVerrier: works over mpc entries for small k
    k = len(matrix)
    coeffs = [mpmath.mpc(1)]
    mcur = [row[:] for row in matrix]
    ident = [[mpmath.mpc(1 if i == j else 0) for j in range(k)] for i in range(k)]
    mwork = [row[:] for row in ident]
    for step in range(1, k + 1):
        mwork = _mat_mul(matrix, mwork)
        tr = sum(mwork[i][i] for i in range(k))
        c = -tr / step
        coeffs.append(c)
        for i in range(k):
            mwork[i][i] += c
    return coeffs


def multipliers(m: ProjectiveMap, point, period: int,
                precision: Optional[int] = None):
    """Eigenvalues of the derivative of f^period at a periodic point.

    The derivative is the ordered product of one-step chart-transition
    Jacobians along the orbit; the eigenvalues come from the closed-form
    solution for k <= 2 and from the characteristic polynomial above that.
    Sorted by descending modulus for stable reporting.
    """
    precision = numeric.resolve_precision(precision)
    partials = [[poly.partial(c, j) for j in range(m.k + 1)] for c in m.comps]
    with mpmath.workprec(precision):
        pts = []
        charts = []
        cur, chart = numeric.normalize_point([numeric.mpc_from(c) for c in point])
        for _ in range(period):
            pts.append(cur)
            charts.append(chart)
            cur, chart = _orbit_step(m, cur)
        total = None
        for j in range(period):
            step = _chart_jacobian(m, partials, pts[j], charts[j],
                                   charts[(j + 1) % period])
            total = step if total is None else _mat_mul(step, total)
        eig = _eigenvalues(total, precision)
        return tuple(sorted(eig, key=lambda v: (-mpmath.fabs(v),
                                                float(mpmath.re(v)),
                                                float(mpmath.im(v)))))


# -- classification and audits ------------------------------------------------


def classify(spectrum, eps_zero: float = EPS_ZERO, eps_neutral: float = EPS_NEUTRAL,
             eps_root: float = EPS_ROOT, q_max: int = Q_MAX):
    """Tolerance-banded classification of each eigenvalue."""
    out = []
    for lam in spectrum:
        lam = numeric.mpc_from(lam)
        mod = mpmath.fabs(lam)
        if mod < eps_zero:
            out.append(EigenClass(lam, "zero"))
        elif mpmath.fabs(mod - 1) < eps_neutral:
            order = None
            power = mpmath.mpc(1)
            for q in range(1, q_max + 1):
                power *= lam
                if mpmath.fabs(power - 1) < eps_root:
                    order = q
                    break
            if order is not None:
                out.append(EigenClass(lam, "parabolic", order))
            else:
                out.append(EigenClass(lam, "neutral-irrational-candidate"))
        elif mod < 1:
            out.append(EigenClass(lam, "attracting-nonzero"))
        else:
            out.append(EigenClass(lam, "repelling"))
    return tuple(out)


def _format_point(coords) -> str:
    return "(" + ", ".join(mpmath.nstr(c, 12) for c in coords) + ")"


@dataclass(frozen=True)
class SpectrumVerdict:
    point: PeriodicPoint
    spectrum: tuple
    classes: tuple
    violations: tuple
    findings: tuple


@dataclass(frozen=True)
class AuditReport:
    verdicts: tuple
    violations: tuple
    findings: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def _audit_classes(label: str, classes):
    violations = []
    findings = []
    kinds = [c.kind for c in classes]
    for c in classes:
        if c.kind == "attracting-nonzero":
            violations.append(
                f"{label}: attracting non-zero eigenvalue {mpmath.nstr(c.value, 12)}")
        elif c.kind == "parabolic":
            violations.append(
                f"{label}: root-of-unity eigenvalue {mpmath.nstr(c.value, 12)}"
                f" (order {c.root_order})")
        elif c.kind == "neutral-irrational-candidate":
            findings.append(
                f"{label}: neutral eigenvalue {mpmath.nstr(c.value, 12)} is not a"
                " root of unity within tolerance; undecidable numerically")
    if "repelling" not in kinds and any(k != "zero" for k in kinds):
        if "neutral-irrational-candidate" in kinds:
            findings.append(
                f"{label}: no repelling eigenvalue alongside undecided neutral values")
        else:
            violations.append(
                f"{label}: non-nilpotent spectrum without a repelling eigenvalue")
    return tuple(violations), tuple(findings)


def eigenvalue_audit(m: ProjectiveMap, max_period: int,
                     precision: Optional[int] = None) -> AuditReport:
    """Audit every periodic point of period <= max_period.

    Hard violations are attracting non-zero or root-of-unity eigenvalues,
    and non-nilpotent spectra with no repelling direction; numerically
    undecidable neutral values are reported as findings, never violations.
    """
    precision = numeric.resolve_precision(precision)
    seen = []
    verdicts = []
    all_violations = []
    all_findings = []
    with mpmath.workprec(precision):
        dedup = mpmath.mpf(10) ** (-(precision // 8))
        for l in range(1, max_period + 1):
            for pp in find_periodic(m, l, precision):
                if pp.period != l:
                    continue  # already audited at its minimal period
                if any(numeric.proj_distance(pp.point, q) < dedup for q in seen):
                    continue
                seen.append(pp.point)
                spectrum = multipliers(m, pp.point, pp.period, precision)
                classes = classify(spectrum)
                label = f"period {pp.period} point {_format_point(pp.point)}"
                violations, findings = _audit_classes(label, classes)
                if pp.multiplicity_suspect:
                    findings = findings + (
                        f"{label}: eliminant multiplicity {pp.multiplicity};"
                        " spectrum may be shared by merged points",)
                verdicts.append(SpectrumVerdict(pp, spectrum, classes,
                                                violations, findings))
                all_violations.extend(violations)
                all_findings.extend(findings)
    return AuditReport(tuple(verdicts), tuple(all_violations), tuple(all_findings))


@dataclass(frozen=True)
class BezoutCount:
    period: int
    expected: int
    distinct: int
    weighted: int

    @property
    def ok(self) -> bool:
        return self.weighted == self.expected


def bezout_audit(m: ProjectiveMap, l: int,
                 points: Optional[Sequence[PeriodicPoint]] = None,
                 precision: Optional[int] = None) -> BezoutCount:
    """Compare the period-l point count with ((d^l)^(k+1)-1)/(d^l-1).

    The weighted count sums eliminant multiplicities, so a clean audit
    needs the period-l locus to be zero-dimensional with mostly simple
    points; higher multiplicities still reconcile when the hints are exact.
    """
    if points is None:
        points = find_periodic(m, l, precision)
    dl = m.d**l
    expected = sum(dl**j for j in range(m.k + 1))
    distinct = len(points)
    weighted = sum(max(1, p.multiplicity) for p in points)
    return BezoutCount(l, expected, distinct, weighted)
