"""Connectives: the nonnegative real functions terms may apply.

Every connective knows, for each subset I of its argument positions, whether
the function obtained by pinning the other arguments to 0 is identically
zero or positive-valued ("specializations").  Builtins also carry class
certificates (relative-Lipschitz, asymptotically polynomial) and a rule for
combining leading orders; user-supplied callables start uncertified and can
be promoted after the numeric checks in `aggraph.analysis`.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Mapping, Sequence

from .asymval import Asym, Pow, ZERO, asym_max, asym_min, asym_sum, is_zero
from .errors import CapabilityError, ConnectiveClassError, InputError

SPEC_ZERO = "zero"
SPEC_POS = "pos"


class Connective:
    """A named function R^m_{>=0} -> R_{>=0} with class metadata.

    Instances are immutable values; build them through the factory
    functions below (poly, mono, domdiff, ...) or `make_user_connective`.
    """

    __slots__ = (
        "name", "arity", "kind", "params", "is_rellip", "is_asympoly",
        "certificate", "_fn", "_spec_kind", "_asym_rule", "_zero_forcing",
    )

    def __init__(self, name, arity, kind, params, fn, spec_kind, asym_rule,
                 is_rellip, is_asympoly, certificate):
        if arity < 1:
            raise InputError("connective arity must be >= 1")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arity", arity)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "_fn", fn)
        object.__setattr__(self, "_spec_kind", spec_kind)
        object.__setattr__(self, "_asym_rule", asym_rule)
        object.__setattr__(self, "is_rellip", is_rellip)
        object.__setattr__(self, "is_asympoly", is_asympoly)
        object.__setattr__(self, "certificate", certificate)
        object.__setattr__(self, "_zero_forcing", None)

    def __setattr__(self, *a):
        raise AttributeError("Connective instances are immutable")

    def eval(self, args: Sequence[float]) -> float:
        if len(args) != self.arity:
            raise InputError(
                f"{self.name} expects {self.arity} arguments, got {len(args)}"
            )
        return self._fn(args)

    def __call__(self, *args: float) -> float:
        return self.eval(args)

    def spec_kind(self, I: frozenset[int]) -> str:
        """SPEC_ZERO if the I-specialization is identically zero, else SPEC_POS.

        I is the set of argument positions left free; the rest are pinned
        to 0.  The empty I is the value at the origin, reported as
        SPEC_ZERO or SPEC_POS accordingly.
        """
        if not all(0 <= i < self.arity for i in I):
            raise InputError("specialization index out of range")
        if not I:
            return SPEC_POS if self._fn((0.0,) * self.arity) > 0 else SPEC_ZERO
        return self._spec_kind(frozenset(I))

    def specialize(self, I: frozenset[int]) -> Callable[[Sequence[float]], float]:
        """The I-specialization as a callable on |I| arguments (sorted order)."""
        idx = sorted(I)
        arity = self.arity
        fn = self._fn

        def spec(values: Sequence[float]) -> float:
            full = [0.0] * arity
            for pos, val in zip(idx, values):
                full[pos] = val
            return fn(tuple(full))

        return spec

    def asym_rule(self, I: frozenset[int], pows: Mapping[int, Pow]) -> Asym:
        """Leading order of the I-specialization on inputs c_i * n**gamma_i."""
        if not self.is_asympoly or self._asym_rule is None:
            raise CapabilityError(f"{self.name} has no asymptotic rule")
        return self._asym_rule(frozenset(I), pows)

    @property
    def zero_forcing(self) -> bool:
        """True when any single zero argument forces the output to 0."""
        cached = self._zero_forcing
        if cached is None:
            full = frozenset(range(self.arity))
            cached = self._fn((0.0,) * self.arity) == 0 and all(
                self.spec_kind(I) == SPEC_ZERO
                for I in _proper_subsets(full)
            )
            object.__setattr__(self, "_zero_forcing", cached)
        return cached

    def descriptor(self) -> dict:
        return {
            "name": self.name,
            "arity": self.arity,
            "kind": self.kind,
            "params": self.params,
            "is_rellip": self.is_rellip,
            "is_asympoly": self.is_asympoly,
            "certificate": self.certificate,
        }

    def __repr__(self) -> str:
        return f"Connective({self.name!r}/{self.arity})"


def _proper_subsets(full: frozenset[int]):
    items = sorted(full)
    m = len(items)
    for mask in range((1 << m) - 1):
        if mask == 0:
            continue
        yield frozenset(items[i] for i in range(m) if mask >> i & 1)


def asym_apply(conn: Connective, args: Sequence[Asym]) -> Asym:
    """Push leading orders through a connective.

    The positions carrying a genuine power law select the specialization;
    if that specialization is identically zero the result is Zero, and the
    all-zero case reduces to the connective's value at the origin.
    """
    if len(args) != conn.arity:
        raise InputError(f"{conn.name} expects {conn.arity} arguments")
    if not conn.is_asympoly:
        raise CapabilityError(f"{conn.name} is not certified asymptotically polynomial")
    I = frozenset(i for i, a in enumerate(args) if not is_zero(a))
    if not I:
        v = conn.eval((0.0,) * conn.arity)
        return Pow(v, 0.0) if v > 0 else ZERO
    if conn.spec_kind(I) == SPEC_ZERO:
        return ZERO
    pows = {i: args[i] for i in I}
    return conn.asym_rule(I, pows)


# ---------------------------------------------------------------------------
# Builtins.


def _poly_eval(coeffs):
    items = tuple(coeffs.items())

    def fn(args):
        total = 0.0
        for exps, coef in items:
            term = coef
            for x, a in zip(args, exps):
                if a:
                    if x == 0.0:
                        term = 0.0
                        break
                    term *= x ** a
            total += term
        return total

    return fn


def _poly_survivors(coeffs, I):
    return [
        (exps, coef)
        for exps, coef in coeffs.items()
        if all(a == 0 for j, a in enumerate(exps) if j not in I)
    ]


def _poly_asym(coeffs):
    def rule(I, pows):
        parts = []
        for exps, coef in _poly_survivors(coeffs, I):
            c = coef
            g = 0.0
            for i in I:
                if exps[i]:
                    c *= pows[i].c ** exps[i]
                    g += exps[i] * pows[i].gamma
            parts.append(Pow(c, g))
        return asym_sum(parts)

    return rule


def _normalize_coeffs(arity, coeffs) -> dict[tuple[int, ...], float]:
    out = {}
    for exps, coef in dict(coeffs).items():
        exps = tuple(int(a) for a in exps)
        if len(exps) != arity:
            raise InputError("every exponent tuple must match the arity")
        if any(a < 0 for a in exps):
            raise InputError("polynomial exponents must be nonnegative")
        coef = float(coef)
        if coef <= 0:
            raise InputError("polynomial coefficients must be positive")
        out[exps] = coef
    if not out:
        raise InputError("a polynomial connective needs at least one monomial")
    return out


def poly(name: str, arity: int, coeffs: Mapping[tuple[int, ...], float]) -> Connective:
    """Multivariate polynomial with positive coefficients."""
    coeffs = _normalize_coeffs(arity, coeffs)

    def spec_kind(I):
        return SPEC_POS if _poly_survivors(coeffs, I) else SPEC_ZERO

    return Connective(
        name, arity, "poly", {"coeffs": {str(list(k)): v for k, v in coeffs.items()}},
        _poly_eval(coeffs), spec_kind, _poly_asym(coeffs),
        is_rellip=True, is_asympoly=True, certificate="builtin",
    )


def mono(name: str, exps: Sequence[float]) -> Connective:
    """Monomial x1**a1 * ... * xm**am.

    On the boundary: a zero coordinate with nonzero exponent forces the
    value 0 (so e.g. the inverse maps 0 to 0), and 0**0 counts as 1.
    """
    exps = tuple(float(a) for a in exps)
    arity = len(exps)

    def fn(args):
        out = 1.0
        for x, a in zip(args, exps):
            if a == 0.0:
                continue
            if x == 0.0:
                return 0.0
            out *= x ** a
        return out

    def spec_kind(I):
        return (
            SPEC_POS
            if all(a == 0.0 for j, a in enumerate(exps) if j not in I)
            else SPEC_ZERO
        )

    def rule(I, pows):
        c = 1.0
        g = 0.0
        for i in I:
            if exps[i]:
                c *= pows[i].c ** exps[i]
                g += exps[i] * pows[i].gamma
        return Pow(c, g)

    return Connective(
        name, arity, "mono", {"exps": list(exps)},
        fn, spec_kind, rule,
        is_rellip=True, is_asympoly=True, certificate="builtin",
    )


_DOMDIFF_CHECK_POINTS = 2000


def domdiff(name: str, arity: int,
            plus: Mapping[tuple[int, ...], float],
            minus: Mapping[tuple[int, ...], float],
            eps: float,
            box: tuple[float, float] = (1e-3, 1e3),
            seed: int = 20260816) -> Connective:
    """Difference f - g of two positive-coefficient polynomials.

    Construction checks f >= (1+eps)*g on a sampled box (log-uniform points
    plus all zero patterns) and refuses the connective otherwise.
    """
    if eps <= 0:
        raise InputError("domdiff needs eps > 0")
    plus = _normalize_coeffs(arity, plus)
    minus = _normalize_coeffs(arity, minus)
    f_eval = _poly_eval(plus)
    g_eval = _poly_eval(minus)

    import numpy as np

    rng = np.random.default_rng(seed)
    lo, hi = box
    logs = rng.uniform(math.log(lo), math.log(hi), size=(_DOMDIFF_CHECK_POINTS, arity))
    pts = np.exp(logs)
    for zero_mask in range(1 << arity):
        extra = pts[: 64].copy()
        for j in range(arity):
            if zero_mask >> j & 1:
                extra[:, j] = 0.0
        pts = np.vstack([pts, extra])
    for row in pts:
        fv = f_eval(tuple(row))
        gv = g_eval(tuple(row))
        if fv < (1.0 + eps) * gv:
            raise ConnectiveClassError(
                f"domdiff {name}: dominance f >= (1+eps) g fails at {tuple(row)}"
            )

    f_asym = _poly_asym(plus)
    g_asym = _poly_asym(minus)

    def fn(args):
        return f_eval(args) - g_eval(args)

    def spec_kind(I):
        return SPEC_POS if _poly_survivors(plus, I) else SPEC_ZERO

    def rule(I, pows):
        fa = f_asym(I, pows)
        ga = g_asym(I, pows)
        if is_zero(ga):
            return fa
        if is_zero(fa) or fa.gamma < ga.gamma - 1e-12:
            raise ConnectiveClassError(
                f"domdiff {name}: minuend does not dominate on this ray"
            )
        if fa.gamma > ga.gamma + 1e-12:
            return fa
        c = fa.c - ga.c
        if c <= 0:
            raise ConnectiveClassError(
                f"domdiff {name}: coefficients violate dominance on this ray"
            )
        return Pow(c, fa.gamma)

    return Connective(
        name, arity, "domdiff",
        {"plus": {str(list(k)): v for k, v in plus.items()},
         "minus": {str(list(k)): v for k, v in minus.items()},
         "eps": eps},
        fn, spec_kind, rule,
        is_rellip=True, is_asympoly=True, certificate="builtin",
    )


def vmax(name: str, arity: int) -> Connective:
    def fn(args):
        return max(args)

    def rule(I, pows):
        return asym_max(pows.values())

    return Connective(
        name, arity, "vmax", {},
        fn, lambda I: SPEC_POS, rule,
        is_rellip=True, is_asympoly=True, certificate="builtin",
    )


def vmin(name: str, arity: int) -> Connective:
    def fn(args):
        return min(args)

    def spec_kind(I):
        return SPEC_POS if len(I) == arity else SPEC_ZERO

    def rule(I, pows):
        return asym_min(pows.values())

    return Connective(
        name, arity, "vmin", {},
        fn, spec_kind, rule,
        is_rellip=True, is_asympoly=True, certificate="builtin",
    )


def indz(name: str = "indz") -> Connective:
    """1 at 0 and 0 on the positives; the zero-test gate."""

    def fn(args):
        return 1.0 if args[0] == 0.0 else 0.0

    def rule(I, pows):  # pragma: no cover - spec_kind short-circuits first
        return ZERO

    return Connective(
        name, 1, "indz", {},
        fn, lambda I: SPEC_ZERO, rule,
        is_rellip=True, is_asympoly=True, certificate="builtin",
    )


def sigmoid(name: str = "sigmoid") -> Connective:
    def fn(args):
        x = args[0]
        if x >= 0:
            return 1.0 / (1.0 + math.exp(-x))
        z = math.exp(x)
        return z / (1.0 + z)

    def rule(I, pows):
        p = pows[0]
        if p.gamma > 1e-12:
            return Pow(1.0, 0.0)
        if p.gamma < -1e-12:
            return Pow(0.5, 0.0)
        return Pow(fn((p.c,)), 0.0)

    return Connective(
        name, 1, "sigmoid", {},
        fn, lambda I: SPEC_POS, rule,
        is_rellip=True, is_asympoly=True, certificate="builtin",
    )


def scale(name: str, factor: float) -> Connective:
    if factor <= 0:
        raise InputError("scale factor must be positive")

    def fn(args):
        return factor * args[0]

    def rule(I, pows):
        return Pow(factor * pows[0].c, pows[0].gamma)

    return Connective(
        name, 1, "scale", {"factor": factor},
        fn, lambda I: SPEC_POS, rule,
        is_rellip=True, is_asympoly=True, certificate="builtin",
    )


def make_user_connective(name: str, arity: int,
                         fn: Callable[[Sequence[float]], float],
                         asym_rule=None) -> Connective:
    """Wrap a plain callable.  Starts with no class certificates.

    Specialization kinds are probed numerically (a handful of positive
    sample points per index set); a specialization that is neither clearly
    zero nor clearly positive is rejected.
    """
    cache: dict[frozenset, str] = {}
    # distinct per-position probe values, so functions that vanish only on
    # the diagonal are not mistaken for identically zero
    spread = (1.0, 1.37, 1.91, 2.53, 3.17, 3.79, 4.43)

    def spec_kind(I):
        got = cache.get(I)
        if got is None:
            idx = sorted(I)
            vals = []
            for t in (1e-3, 0.1, 1.0, 7.0, 1e3):
                full = [0.0] * arity
                for rank, pos in enumerate(idx):
                    full[pos] = t * spread[rank % len(spread)]
                vals.append(fn(tuple(full)))
            if all(v == 0.0 for v in vals):
                got = SPEC_ZERO
            elif all(v > 0.0 for v in vals):
                got = SPEC_POS
            else:
                raise ConnectiveClassError(
                    f"{name}: specialization {sorted(I)} is neither identically "
                    f"zero nor positive on the probe points"
                )
            cache[I] = got
        return got

    return Connective(
        name, arity, "user", {},
        lambda args: float(fn(tuple(args))), spec_kind, asym_rule,
        is_rellip=False, is_asympoly=asym_rule is not None,
        certificate="",
    )


def certified_copy(conn: Connective, *, is_rellip=None, is_asympoly=None,
                   certificate: str = "empirical") -> Connective:
    """A copy of `conn` with upgraded class certificates."""
    return Connective(
        conn.name, conn.arity, conn.kind, conn.params,
        conn._fn, conn._spec_kind, conn._asym_rule,
        conn.is_rellip if is_rellip is None else is_rellip,
        conn.is_asympoly if is_asympoly is None else is_asympoly,
        certificate,
    )


# ---------------------------------------------------------------------------
# Registry.


class Registry:
    """Name -> Connective table used by the parser and the engines.

    A name may be registered at several arities (the product, say, at both
    two and three arguments); lookups disambiguate by argument count.
    """

    def __init__(self, conns: Iterable[Connective] = ()):
        self._by_name: dict[str, dict[int, Connective]] = {}
        for c in conns:
            self.register(c)

    def register(self, conn: Connective) -> Connective:
        if conn.name in ("E", "eq", "sum", "max", "min", "mean", "lmean"):
            raise InputError(f"{conn.name!r} is a reserved name")
        slot = self._by_name.setdefault(conn.name, {})
        if conn.arity in slot:
            raise InputError(
                f"connective {conn.name!r}/{conn.arity} is already registered"
            )
        slot[conn.arity] = conn
        return conn

    def get(self, name: str, arity: int | None = None) -> Connective:
        slot = self._by_name.get(name)
        if not slot:
            raise InputError(f"unknown connective {name!r}")
        if arity is None:
            if len(slot) == 1:
                return next(iter(slot.values()))
            raise InputError(
                f"connective {name!r} exists at arities {sorted(slot)}"
            )
        conn = slot.get(arity)
        if conn is None:
            have = " or ".join(str(a) for a in sorted(slot))
            raise InputError(
                f"{name} expects {have} arguments, got {arity}"
            )
        return conn

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> list[str]:
        return sorted(self._by_name)

    def __iter__(self):
        for name in sorted(self._by_name):
            for ar in sorted(self._by_name[name]):
                yield self._by_name[name][ar]

    def descriptors(self) -> list[dict]:
        return [c.descriptor() for c in self]

    def all_rlpoly(self) -> bool:
        return all(c.is_rellip and c.is_asympoly for c in self)


def register_builtin_connectives(reg: Registry) -> Registry:
    reg.register(mono("ident", (1.0,)))
    reg.register(mono("mul", (1.0, 1.0)))
    reg.register(mono("mul", (1.0, 1.0, 1.0)))
    reg.register(mono("inv", (-1.0,)))
    reg.register(mono("sq", (2.0,)))
    reg.register(mono("sqrt", (0.5,)))
    reg.register(poly("add", 2, {(1, 0): 1.0, (0, 1): 1.0}))
    reg.register(vmax("vmax", 2))
    reg.register(vmin("vmin", 2))
    reg.register(indz())
    reg.register(sigmoid())
    reg.register(scale("half", 0.5))
    reg.register(scale("double", 2.0))
    return reg


def default_registry() -> Registry:
    return register_builtin_connectives(Registry())
