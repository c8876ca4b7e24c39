"""High-precision numerics on top of the exact polynomial layer.

Everything here that is not exact is explicit about its working precision,
given in bits.  Exact rational data stays exact until the moment a value is
converted with :func:`mpc_from`, so callers control all rounding.
"""

from __future__ import annotations

import os
from fractions import Fraction

import mpmath

from . import poly
from .poly import HomPoly

DEFAULT_PRECISION = 256  # bits

ENV_PRECISION = "PCFLAB_PRECISION"


class NumericalError(RuntimeError):
    """A numeric routine could not reach its accuracy contract."""


class IndeterminatePointError(NumericalError):
    """Every coordinate of an evaluated point fell below the precision floor."""


def resolve_precision(precision=None) -> int:
    """Working precision in bits: explicit argument, else environment, else default."""
    if precision is not None:
        p = int(precision)
    else:
        env = os.environ.get(ENV_PRECISION)
        p = int(env) if env else DEFAULT_PRECISION
    if p < 24:
        raise NumericalError(f"precision {p} bits is too low to be meaningful")
    return p


def mpc_from(value) -> mpmath.mpc:
    """Convert int/Fraction/float/complex/mp values to mpc at current precision."""
    if isinstance(value, Fraction):
        return mpmath.mpc(mpmath.mpf(value.numerator) / value.denominator)
    return mpmath.mpc(value)


def eval_form(p: HomPoly, coords) -> mpmath.mpc:
    """Evaluate a form at mpc coordinates (exact coefficients, one rounding each)."""
    return mpc_from(0) + p.evaluate(tuple(mpc_from(c) for c in coords))


def normalize_point(coords, floor_exp_shift: int = 8):
    """Scale a projective representative so its max-modulus coordinate is 1.

    Ties pick the lowest index.  Raises IndeterminatePointError when every
    coordinate sits below the working-precision floor (2^-(prec - shift)).
    """
    vals = [mpc_from(c) for c in coords]
    mags = [mpmath.fabs(v) for v in vals]
    best = 0
    for i in range(1, len(vals)):
        if mags[i] > mags[best]:
            best = i
    floor = mpmath.mpf(2) ** (-(mpmath.mp.prec - floor_exp_shift))
    if mags[best] < floor:
        raise IndeterminatePointError(
            f"all coordinates below 2^-{mpmath.mp.prec - floor_exp_shift}"
        )
    pivot = vals[best]
    return tuple(v / pivot for v in vals), best


def proj_distance(p, q) -> mpmath.mpf:
    """Projective distance: max cross-difference of normalized representatives.

    Zero exactly when the two points agree in projective space; symmetric;
    insensitive to scaling of either argument.
    """
    pv = [mpc_from(c) for c in p]
    qv = [mpc_from(c) for c in q]
    mp_ = max(mpmath.fabs(c) for c in pv)
    mq = max(mpmath.fabs(c) for c in qv)
    if mp_ == 0 or mq == 0:
        raise NumericalError("projective distance of a zero vector")
    best = mpmath.mpf(0)
    n = len(pv)
    for i in range(n):
        for j in range(i + 1, n):
            cross = mpmath.fabs(pv[i] * qv[j] - pv[j] * qv[i])
            if cross > best:
                best = cross
    return best / (mp_ * mq)


# -- root finding ----------------------------------------------------------


def binary_form_roots(q: HomPoly, precision: int):
    """Projective roots of a binary form with exact multiplicities.

    Returns a list of ``((x0, x1), multiplicity)`` with mpc coordinates.
    The form is first split into square-free pieces exactly, so the numeric
    root finder only ever sees simple roots.
    """
    if q.nvars != 2:
        raise NumericalError("binary root finding needs a binary form")
    if q.is_zero():
        raise NumericalError("the zero form vanishes everywhere")
    out = []
    with mpmath.workprec(precision):
        for mult, piece in poly.binary_squarefree_decomposition(q):
            if piece.degree == 1:
                a = piece.terms.get((1, 0), Fraction(0))
                b = piece.terms.get((0, 1), Fraction(0))
                out.append(((mpc_from(-b), mpc_from(a)), mult))
                continue
            n = piece.var_degree(0)
            if n < piece.degree:
                # A square-free piece with a dropped x0-degree carries an
                # x1 factor, which the decomposition already split off.
                raise NumericalError("unexpected degree drop in square-free piece")
            coeffs = [Fraction(0)] * (n + 1)
            for e, c in piece.terms.items():
                coeffs[n - e[0]] = c
            mp_coeffs = [mpc_from(c) for c in coeffs]
            for root in _polyroots(mp_coeffs, precision):
                out.append(((root, mpc_from(1)), mult))
    return out


def _polyroots(coeffs, precision: int):
    """mpmath.polyroots with escalating effort; raises NumericalError on failure."""
    for maxsteps, extra in ((60, 32), (200, precision // 2), (800, precision)):
        try:
            return mpmath.polyroots(coeffs, maxsteps=maxsteps, extraprec=extra)
        except Exception:
            continue
    raise NumericalError("polynomial root finding did not converge")


def univariate_roots(coeffs, precision: int):
    """Roots of a univariate polynomial given by mpc coefficients, highest first.

    Leading (numerically negligible) coefficients are trimmed against the
    largest coefficient before solving.
    """
    with mpmath.workprec(precision):
        mags = [mpmath.fabs(c) for c in coeffs]
        biggest = max(mags) if mags else mpmath.mpf(0)
        if biggest == 0:
            raise NumericalError("zero polynomial in univariate solve")
        tol = biggest * mpmath.mpf(2) ** (-(precision - 8))
        start = 0
        while start < len(coeffs) - 1 and mags[start] <= tol:
            start += 1
        trimmed = coeffs[start:]
        if len(trimmed) <= 1:
            return []
        return _polyroots(list(trimmed), precision)


# -- Newton refinement ------------------------------------------------------


def refine_target(precision: int) -> mpmath.mpf:
    """Residual target used by Newton refinement at a given precision."""
    return mpmath.mpf(10) ** (-(precision * 0.18))


def rationalize(value, precision: int, max_denominator: int = 10**12):
    """Nearest rational to a high-precision value, or None.

    Accepts mpf or mpc input; an mpc must have negligible imaginary part.
    The candidate comes from a continued-fraction bound and is accepted only
    when it reproduces the value to 10^-(precision//16).
    """
    with mpmath.workprec(precision):
        tol = mpmath.mpf(10) ** (-(precision // 16))
        x = mpmath.mpc(value)
        if mpmath.fabs(x.imag) > tol:
            return None
        r = x.real
        shift = mpmath.mpf(2) ** precision
        approx = Fraction(int(mpmath.nint(r * shift)), 2**precision)
        cand = approx.limit_denominator(max_denominator)
        if mpmath.fabs(r - mpmath.mpf(cand.numerator) / cand.denominator) > tol:
            return None
        return cand


def newton_refine_pair(a: HomPoly, b: HomPoly, point, precision: int, maxsteps: int = 200):
    """Newton-refine an approximate common zero of two ternary forms.

    The point is refined in the affine chart of its max-modulus coordinate.
    Returns ``(refined_point, residual)`` with the point normalized, or
    raises NumericalError after ``maxsteps`` without convergence.
    """
    with mpmath.workprec(precision):
        pt, chart = normalize_point(point)
        idx = [i for i in range(3) if i != chart]
        d_a = [poly.partial(a, j) for j in idx]
        d_b = [poly.partial(b, j) for j in idx]
        target = refine_target(precision)
        u, v = pt[idx[0]], pt[idx[1]]

        def coords(uu, vv):
            c = [None] * 3
            c[chart] = mpc_from(1)
            c[idx[0]] = uu
            c[idx[1]] = vv
            return tuple(c)

        res = None
        for _ in range(maxsteps):
            c = coords(u, v)
            fa, fb = eval_form(a, c), eval_form(b, c)
            res = max(mpmath.fabs(fa), mpmath.fabs(fb))
            if res < target:
                return normalize_point(c)[0], res
            j00, j01 = eval_form(d_a[0], c), eval_form(d_a[1], c)
            j10, j11 = eval_form(d_b[0], c), eval_form(d_b[1], c)
            det = j00 * j11 - j01 * j10
            if mpmath.fabs(det) == 0:
                raise NumericalError("singular Jacobian in Newton refinement")
            du = (fa * j11 - fb * j01) / det
            dv = (fb * j00 - fa * j10) / det
            u, v = u - du, v - dv
        raise NumericalError(f"Newton did not reach {mpmath.nstr(target)} (residual {mpmath.nstr(res)})")


# -- common zeros of two plane curves ---------------------------------------


def solve_pair_p2(a: HomPoly, b: HomPoly, precision: int):
    """Common projective zeros of two coprime ternary forms.

    Returns ``(points, mults)`` where points is a list of normalized mpc
    triples and mults is a parallel list of eliminant root multiplicities
    (1 for simple roots; > 1 marks a point that deserves suspicion).  Raises
    NumericalError when the forms share a factor (positive-dimensional
    intersection).
    """
    if a.nvars != 3 or b.nvars != 3:
        raise NumericalError("pair solver expects ternary forms")
    g = poly.gcd(a, b)
    if not g.is_constant():
        raise NumericalError("forms share a common factor; intersection is a curve")
    points, mults = [], []
    with mpmath.workprec(precision):
        dedup_tol = mpmath.mpf(10) ** (-(precision // 8))

        def push(pt, mult):
            for i, known in enumerate(points):
                if proj_distance(known, pt) < dedup_tol:
                    mults[i] = max(mults[i], mult)
                    return
            points.append(pt)
            mults.append(mult)

        # Affine chart z != 0.
        a2 = _strip_var(a, 2)
        b2 = _strip_var(b, 2)
        if not a2.is_constant() and not b2.is_constant():
            for pt, mult in _affine_pair_solutions(a2, b2, precision):
                push(pt, mult)
        # The line z = 0 separately.
        abar = poly._slice_poly(a, 2)
        bbar = poly._slice_poly(b, 2)
        if abar.is_zero() and bbar.is_zero():
            raise NumericalError("both forms vanish on a coordinate line")
        if abar.is_zero() or bbar.is_zero():
            gline = bbar if abar.is_zero() else abar
        else:
            gline = poly.gcd(abar, bbar)
        if not gline.is_constant() and not gline.is_zero():
            for (r0, r1), mult in binary_form_roots(gline, precision):
                pt = normalize_point((r0, r1, mpc_from(0)))[0]
                push(pt, mult)

        # Eliminant multiplicities overcount when distinct points share the
        # eliminated coordinate; a transverse point (independent gradients)
        # is certainly simple, so downgrade its hint.
        ga = [[poly.partial(a, j), poly.partial(b, j)] for j in range(3)]
        for i, pt in enumerate(points):
            if mults[i] == 1:
                continue
            va = [eval_form(ga[j][0], pt) for j in range(3)]
            vb = [eval_form(ga[j][1], pt) for j in range(3)]
            cross = max(
                mpmath.fabs(va[1] * vb[2] - va[2] * vb[1]),
                mpmath.fabs(va[2] * vb[0] - va[0] * vb[2]),
                mpmath.fabs(va[0] * vb[1] - va[1] * vb[0]),
            )
            na = max(mpmath.fabs(v) for v in va)
            nb = max(mpmath.fabs(v) for v in vb)
            if na > 0 and nb > 0 and cross > dedup_tol * na * nb:
                mults[i] = 1
    return points, mults


def _strip_var(p: HomPoly, i: int) -> HomPoly:
    m = p.min_var_degree(i)
    return poly._shift_var(p, i, -m) if m and not p.is_zero() else p


def _affine_pair_solutions(a: HomPoly, b: HomPoly, precision: int):
    """Solutions with z != 0 of two ternary forms without z factors."""
    out = []
    # Eliminate y when possible, else x.
    for elim, keep in ((1, 0), (0, 1)):
        da, db = a.var_degree(elim), b.var_degree(elim)
        if da == 0 and db == 0:
            continue
        if da == 0:
            eliminant, backsub = a, b
        elif db == 0:
            eliminant, backsub = b, a
        else:
            eliminant, backsub = poly.resultant_wrt(a, b, elim), a
        if eliminant.is_zero():
            continue
        eliminant_binary = _drop_var(eliminant, elim)
        if eliminant_binary.is_constant():
            continue
        target = refine_target(precision)
        loose = mpmath.mpf(10) ** (-(precision // 16))
        for (r0, r1), mult in binary_form_roots(eliminant_binary, precision):
            if mpmath.fabs(r1) < mpmath.mpf(2) ** (-(precision - 8)):
                continue  # point at the chart's infinity; other chart logic covers it
            base = r0 / r1
            for w in _backsub_roots(backsub, keep, elim, base, precision):
                cand = [None] * 3
                cand[keep] = base
                cand[elim] = w
                cand[2] = mpc_from(1)
                va = eval_form(a, cand)
                vb = eval_form(b, cand)
                if max(mpmath.fabs(va), mpmath.fabs(vb)) > loose:
                    continue
                try:
                    refined, _res = newton_refine_pair(a, b, cand, precision)
                except NumericalError:
                    continue
                out.append((refined, mult))
        if out:
            return out
    return out


def _drop_var(p: HomPoly, i: int) -> HomPoly:
    """Reinterpret a ternary form with no x_i dependence as a binary form."""
    keep = [j for j in range(p.nvars) if j != i]
    acc = {}
    for e, c in p.terms.items():
        if e[i] != 0:
            raise NumericalError("form still depends on the dropped variable")
        acc[tuple(e[j] for j in keep)] = c
    return HomPoly(2, p.degree, acc) if acc else poly.zero(2, p.degree)


def _backsub_roots(p: HomPoly, keep: int, elim: int, base, precision: int):
    """Roots in x_elim of a ternary form at x_keep = base, z = 1."""
    top = p.var_degree(elim)
    if top == 0:
        return []
    ladder = poly._ladder(p, elim)
    coeffs = []
    point = [None] * 3
    point[keep] = base
    point[elim] = mpc_from(0)
    point[2] = mpc_from(1)
    for t in range(top, -1, -1):
        row = ladder[t] if t < len(ladder) else None
        coeffs.append(eval_form(row, point) if row is not None else mpc_from(0))
    try:
        return univariate_roots(coeffs, precision)
    except NumericalError:
        return []
