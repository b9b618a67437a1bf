"""Retrieval, processual-variable models and predictive retrieval functions.

A predictive retrieval (PR) function maps the observed points of one
variable to a value for every timestamp of a sequence.  All built-in PR
functions share three rules:

* no observation -> ``None``;
* an observed timestamp returns its observation unchanged;
* too few observations for the function's model -> static retrieval.
"""

from __future__ import annotations

import functools
import math
import random
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from pjp import kernels
from pjp.core import (MISSING, EPS, Atom, ObservationModel, State, VarTerm, VisibilityRule,
                      as_sequence, is_number, values_equal)

Points = tuple  # tuple[tuple[int, value], ...] sorted by timestamp


# ---------------------------------------------------------------------------
# retrieval


def observed_points(seq: Sequence, v: str) -> Points:
    """``(t, value)`` for every state of ``seq`` that assigns ``v`` a value."""
    out = []
    for t, s in enumerate(seq):
        x = s.get(v)
        if x is not None and x is not MISSING:
            out.append((t, x))
    return tuple(out)


def retrieve(seq: Sequence, m: int, v: str):
    """Latest value at or before ``m``, else the earliest one after it."""
    if not seq:
        raise ValueError("retrieve needs a non-empty sequence")
    best = None
    for j, s in enumerate(seq):
        x = s.get(v)
        if x is None or x is MISSING:
            continue
        if j <= m:
            best = x
        elif best is None:
            return x
        else:
            break
    return best


# ---------------------------------------------------------------------------
# PR functions


@dataclass
class FitDiagnostics:
    used_fallback: bool
    points_used: list
    fitted_coefficients: tuple | None = None


class PRFunction:
    """Base class for predictive retrieval functions.

    Subclasses implement :meth:`_series` on numeric observations and may
    override :meth:`fit`.
    """

    name = "pr"
    min_points = 1
    tolerance = 1e-9
    #: outcome of the optional reconstructive-consistency check, if known
    reconstructive: bool | None = None

    def __call__(self, seq: Sequence, t: int, v: str):
        if not seq:
            raise ValueError(f"{self.name}: empty sequence")
        return self.predict(observed_points(seq, v), t)

    def predict(self, points: Points, t: int):
        if not points:
            return None
        for tj, y in points:
            if tj == t:
                return y
        return self.series(points, max(t, points[-1][0]))[t]

    def series(self, points: Points, n: int) -> list:
        """Predictions for timestamps ``0..n``."""
        if not points:
            return [None] * (n + 1)
        ts = [t for t, _ in points]
        ys = [y for _, y in points]
        if not all(is_number(y) for y in ys):
            out = kernels.static_series(ts, ys, n)
        else:
            out = self._series(ts, [float(y) for y in ys], n)
        for t, y in points:
            if t <= n:
                out[t] = y
        return out

    def _series(self, ts: list, ys: list, n: int) -> list:
        return kernels.static_series(ts, ys, n)

    def is_genuine(self, points: Points) -> bool:
        """True when a fit (not the static fallback) produced the values."""
        return not self.fit(points).used_fallback

    def fit(self, points: Points) -> FitDiagnostics:
        numeric = all(is_number(y) for _, y in points)
        fallback = len(points) < self.min_points or not numeric
        return FitDiagnostics(fallback, list(points))

    def __repr__(self) -> str:
        return f"<PR {self.name}>"


class StaticPR(PRFunction):
    name = "static"
    min_points = 1
    reconstructive = True

    def series(self, points, n):
        if not points:
            return [None] * (n + 1)
        return kernels.static_series([t for t, _ in points], [y for _, y in points], n)

    def fit(self, points):
        # retrieval is never a "fit"
        return FitDiagnostics(True, list(points))


class FirstPolyPR(PRFunction):
    """Piecewise-linear: interpolate between the neighbouring observations,
    extrapolate with the two nearest ones."""

    name = "1st_poly"
    min_points = 2

    def _series(self, ts, ys, n):
        return kernels.poly1_series(ts, ys, n)


class LinearRegressionPR(PRFunction):
    name = "linear_reg"
    min_points = 2

    def _series(self, ts, ys, n):
        if len(ts) < 2:
            return kernels.static_series(ts, ys, n)
        return kernels.linreg_series(ts, ys, n)

    def fit(self, points):
        d = super().fit(points)
        if not d.used_fallback:
            d.fitted_coefficients = kernels.linreg_coefficients(
                [float(t) for t, _ in points], [float(y) for _, y in points])
        return d


class DominantFirstPolyPR(PRFunction):
    """Line whose coefficients are shared by the most point pairs."""

    name = "dom_1st_poly"
    min_points = 2

    def _series(self, ts, ys, n):
        if len(ts) < 2:
            return kernels.static_series(ts, ys, n)
        return kernels.dom_poly1_series(ts, ys, n)

    def fit(self, points):
        d = super().fit(points)
        if not d.used_fallback:
            (a, b), _ = kernels.dominant_line([t for t, _ in points], [float(y) for _, y in points])
            d.fitted_coefficients = (a, b)
        return d


class SecondPolyPR(PRFunction):
    """Quadratic through the three latest observations.

    Needs three observations carrying three distinct values; otherwise the
    static fallback applies.
    """

    name = "2nd_poly"
    min_points = 3

    def _series(self, ts, ys, n):
        return kernels.poly2_series(ts, ys, n)

    def fit(self, points):
        d = super().fit(points)
        if not d.used_fallback:
            ys = [float(y) for _, y in points]
            if kernels.distinct_count(ys, 3) < 3:
                d.used_fallback = True
            else:
                d.points_used = list(points[-3:])
                d.fitted_coefficients = kernels.poly2_coefficients(
                    [t for t, _ in points], ys)
        return d


class PowerPR(PRFunction):
    """``a**t`` for the unique real base consistent with the observations."""

    name = "power"
    min_points = 1

    def _series(self, ts, ys, n):
        return kernels.power_series(ts, ys, n)

    def fit(self, points):
        d = super().fit(points)
        if not d.used_fallback:
            a = kernels.power_base([t for t, _ in points], [float(y) for _, y in points])
            if a is None:
                d.used_fallback = True
            else:
                d.fitted_coefficients = (a,)
        return d


# --- sinusoid -------------------------------------------------------------

_SIN_B_GRID = np.linspace(0.02, 2.0, 1981)  # b, with angular frequency b*pi/2
_SIN_ACCEPT = 1e-10  # relative residual; only exact fits are kept
# smallest admissible singular value of the [sin, cos] design matrix; near
# aliasing frequencies the matrix is singular and "exact" fits explode
_SIN_MIN_SV = 0.1


def _sin_profile(ts: np.ndarray, ys: np.ndarray, omega: float):
    """Best amplitude pair and residual for a fixed frequency."""
    X = np.column_stack((np.sin(omega * ts), np.cos(omega * ts)))
    if np.linalg.svd(X, compute_uv=False)[-1] < _SIN_MIN_SV:
        return math.inf, None
    coef, *_ = np.linalg.lstsq(X, ys, rcond=None)
    r = ys - X @ coef
    return float(r @ r), coef


@functools.lru_cache(maxsize=20000)
def sin_fit(points: tuple) -> tuple | None:
    """Fit ``a*sin(b*pi/2*t + c)``; returns ``(a, b, c, residual)`` or ``None``.

    The residual is profiled over the frequency on a grid and every local
    minimum is refined.  Only fits through all points (relative residual
    below ``_SIN_ACCEPT``) count, and the lowest frequency among them wins;
    since every exact fit of a superset of points is an exact fit of the
    subset, adding predicted points cannot change the choice.  Frequencies
    above pi are not searched: on integer timestamps they alias onto lower
    ones.
    """
    ts = np.array([t for t, _ in points], dtype=float)
    ys = np.array([y for _, y in points], dtype=float)
    omegas = _SIN_B_GRID * (np.pi / 2)
    S = np.sin(np.outer(omegas, ts))
    C = np.cos(np.outer(omegas, ts))
    # 2x2 normal equations, vectorised over the grid
    ss = (S * S).sum(1)
    cc = (C * C).sum(1)
    sc = (S * C).sum(1)
    sy = S @ ys
    cy = C @ ys
    det = ss * cc - sc * sc
    half = (ss + cc) / 2
    lam_min = half - np.sqrt(((ss - cc) / 2) ** 2 + sc * sc)
    with np.errstate(divide="ignore", invalid="ignore"):
        A = (cc * sy - sc * cy) / det
        B = (ss * cy - sc * sy) / det
        res = (ys * ys).sum() - (A * sy + B * cy)
    ok = np.isfinite(res) & (lam_min >= _SIN_MIN_SV ** 2)
    res = np.where(ok, np.maximum(res, 0.0), np.inf)

    minima = [i for i in range(len(omegas)) if np.isfinite(res[i])
              and res[i] <= res[max(i - 1, 0)] and res[i] <= res[min(i + 1, len(omegas) - 1)]]
    cands = []
    penalty = 10.0 * float(ys @ ys) + 1.0  # finite stand-in for rejected frequencies
    for i in minima:
        lo = omegas[max(i - 1, 0)]
        hi = omegas[min(i + 1, len(omegas) - 1)]
        r = minimize_scalar(lambda w: min(_sin_profile(ts, ys, w)[0], penalty), bounds=(lo, hi),
                            method="bounded", options={"xatol": 1e-13})
        w = float(r.x)
        rv, coef = _sin_profile(ts, ys, w)
        if coef is not None:
            cands.append((rv, w, coef))
    if not cands:
        return None
    limit = _SIN_ACCEPT * (float(ys @ ys) + 1.0)
    exact = [c for c in cands if c[0] <= limit]
    if not exact:
        return None
    rv, w, coef = min(exact, key=lambda c: c[1])
    amp = math.hypot(coef[0], coef[1])
    phase = math.atan2(coef[1], coef[0])
    return amp, 2 * w / math.pi, phase, rv


class SinPR(PRFunction):
    """Sinusoid fitted by nonlinear least squares over all observations.

    Needs three observations carrying three distinct values and a sinusoid
    through all of them; otherwise static retrieval applies.
    """

    name = "sin"
    min_points = 3
    tolerance = 1e-6

    def _series(self, ts, ys, n):
        f = self._fit(ts, ys)
        if f is None:
            return kernels.static_series(ts, ys, n)
        a, b, c, _ = f
        w = b * math.pi / 2
        return [a * math.sin(w * t + c) for t in range(n + 1)]

    def _fit(self, ts, ys):
        if len(ts) < 3 or kernels.distinct_count(ys, 3) < 3:
            return None
        return sin_fit(tuple(zip(ts, ys)))

    def fit(self, points):
        d = super().fit(points)
        if not d.used_fallback:
            f = self._fit([t for t, _ in points], [float(y) for _, y in points])
            if f is None:
                d.used_fallback = True
            else:
                d.fitted_coefficients = f[:3]
        return d


class CallablePR(PRFunction):
    """Wrap a plain ``f(points, t) -> value`` as a PR function (plugins)."""

    def __init__(self, name: str, fn: Callable, min_points: int = 1):
        self.name = name
        self._fn = fn
        self.min_points = min_points

    def predict(self, points, t):
        return self._fn(points, t) if points else None

    def series(self, points, n):
        if not points:
            return [None] * (n + 1)
        return [self._fn(points, t) for t in range(n + 1)]


BUILTIN_PR = {
    cls.name: cls for cls in (StaticPR, FirstPolyPR, SecondPolyPR, PowerPR, SinPR,
                              LinearRegressionPR, DominantFirstPolyPR)
}


def pr_static(seq, t, v):
    return StaticPR()(seq, t, v)


def pr_1st_poly(seq, t, v):
    return FirstPolyPR()(seq, t, v)


def pr_2nd_poly(seq, t, v):
    return SecondPolyPR()(seq, t, v)


def pr_power(seq, t, v):
    return PowerPR()(seq, t, v)


def pr_sin(seq, t, v):
    return SinPR()(seq, t, v)


def pr_linear_reg(seq, t, v):
    return LinearRegressionPR()(seq, t, v)


def pr_dom_1st_poly(seq, t, v):
    return DominantFirstPolyPR()(seq, t, v)


class UnknownTypeError(KeyError):
    pass


class PRRegistry:
    """Maps processual type names to PR functions.  Immutable: use
    :meth:`register` / :meth:`with_overrides` to derive new registries."""

    def __init__(self, functions: Mapping[str, PRFunction] | None = None):
        self._fns = dict(functions) if functions is not None else {
            name: cls() for name, cls in BUILTIN_PR.items()}

    def __getitem__(self, type_name: str) -> PRFunction:
        try:
            return self._fns[type_name]
        except KeyError:
            raise UnknownTypeError(f"no PR function registered for type {type_name!r}") from None

    def __contains__(self, type_name: str) -> bool:
        return type_name in self._fns

    def names(self) -> list[str]:
        return sorted(self._fns)

    def register(self, type_name: str, fn: PRFunction) -> "PRRegistry":
        fns = dict(self._fns)
        fns[type_name] = fn
        return PRRegistry(fns)

    def with_overrides(self, overrides: Mapping[str, str]) -> "PRRegistry":
        """Rebind types to other registered functions, e.g.
        ``{"1st_poly": "dom_1st_poly"}``."""
        fns = dict(self._fns)
        for type_name, fn_name in overrides.items():
            fns[type_name] = self[fn_name]
        return PRRegistry(fns)


# ---------------------------------------------------------------------------
# processual variable model


COEFFICIENT_COUNT = {"static": 0, "1st_poly": 2, "linear_reg": 2, "dom_1st_poly": 2,
                     "2nd_poly": 3, "power": 1, "sin": 3}


def world_value(type_name: str, eta: Sequence[float], t: int):
    """Value of a processual variable at ``t`` under its true rule."""
    if type_name in ("1st_poly", "linear_reg", "dom_1st_poly"):
        return eta[0] * t + eta[1]
    if type_name == "2nd_poly":
        return eta[0] * t * t + eta[1] * t + eta[2]
    if type_name == "power":
        return eta[0] ** t
    if type_name == "sin":
        return eta[0] * math.sin(eta[1] * t + eta[2])
    raise UnknownTypeError(f"type {type_name!r} has no world rule")


@dataclass(frozen=True)
class OmegaEntry:
    type: str = "static"
    eta: tuple = ()
    believed_eta: tuple = ()

    def __post_init__(self):
        want = COEFFICIENT_COUNT.get(self.type)
        if self.type == "static" and self.eta:
            raise ValueError("static variables take no coefficients")
        # an empty vector means "predicted with this type, no exogenous rule"
        if want is not None and self.eta and len(self.eta) != want:
            raise ValueError(f"type {self.type} takes {want} coefficients, got {len(self.eta)}")

    @property
    def evolves(self) -> bool:
        return bool(self.eta) and self.type != "static"


class Omega:
    """Per-variable processual type and coefficients; untyped variables are
    static."""

    def __init__(self, entries: Mapping[str, OmegaEntry] | None = None):
        self.entries = dict(entries or {})

    def __getitem__(self, v: str) -> OmegaEntry:
        return self.entries.get(v, _STATIC)

    def type_of(self, v: str) -> str:
        e = self.entries.get(v)
        return e.type if e is not None else "static"

    def evolving(self) -> list[tuple[str, OmegaEntry]]:
        return sorted((v, e) for v, e in self.entries.items() if e.evolves)

    def types(self) -> set[str]:
        return {e.type for e in self.entries.values()} | {"static"}

    @classmethod
    def all_static(cls) -> "Omega":
        return cls({})


_STATIC = OmegaEntry()


def predict_sequence(registry: PRRegistry, omega: Omega, seq: Sequence,
                     variables: Iterable[str] | None = None) -> tuple[State, ...]:
    """Complete prediction ``p`` with ``p[t](v) = pr_type(v)(seq, t, v)``."""
    seq = as_sequence(seq)
    if not seq:
        raise ValueError("predict_sequence needs a non-empty sequence")
    if variables is None:
        variables = sorted({v for s in seq for v in s})
    n = len(seq) - 1
    cols = {v: registry[omega.type_of(v)].series(observed_points(seq, v), n) for v in variables}
    return tuple(State((v, cols[v][t]) for v in cols) for t in range(n + 1))


# ---------------------------------------------------------------------------
# consistency harness


@dataclass
class PropertyResult:
    passed: bool | None  # None: not applicable to any sample
    checked: int = 0
    witness: object = None


@dataclass
class ConsistencyReport:
    pr_name: str
    preserving: PropertyResult = field(default_factory=lambda: PropertyResult(True))
    recursive: PropertyResult = field(default_factory=lambda: PropertyResult(True))
    reconstructive: PropertyResult = field(default_factory=lambda: PropertyResult(None))

    @property
    def compulsory_ok(self) -> bool:
        return bool(self.preserving.passed and self.recursive.passed)


def _close(a, b, tol):
    if a is None or b is None:
        return a is None and b is None
    if is_number(a) and is_number(b):
        return math.isclose(a, b, rel_tol=tol, abs_tol=tol)
    return a == b


def check_pr_consistency(pr: PRFunction, samples: Sequence[Sequence], *, model=None,
                         supersets: int = 4, seed: int = 0) -> ConsistencyReport:
    """Check preserving and recursive consistency (and, given an observation
    model, reconstructive consistency) of ``pr`` on sample sequences.

    Recursive consistency is probed with ``supersets`` random sequences
    ``w`` lying between each sample and its own prediction.
    """
    if not samples:
        raise ValueError("check_pr_consistency needs at least one sample")
    rng = random.Random(seed)
    rep = ConsistencyReport(pr.name)
    tol = max(pr.tolerance, EPS)
    for raw in samples:
        seq = as_sequence(raw)
        n = len(seq) - 1
        for v in sorted({v for s in seq for v in s}):
            pts = observed_points(seq, v)
            pred = pr.series(pts, n)
            rep.preserving.checked += 1
            for t, y in pts:
                if not _close(pred[t], y, EPS):
                    if rep.preserving.passed:
                        rep.preserving = PropertyResult(False, rep.preserving.checked,
                                                        (seq, v, t, y, pred[t]))
                    break
            obs_t = {t for t, _ in pts}
            for _ in range(supersets):
                extra = [t for t in range(n + 1)
                         if t not in obs_t and pred[t] is not None and rng.random() < 0.5]
                if not extra:
                    continue
                w = tuple(sorted(pts + tuple((t, pred[t]) for t in extra)))
                again = pr.series(w, n)
                rep.recursive.checked += 1
                bad = [t for t in range(n + 1) if not _close(again[t], pred[t], tol)]
                if bad and rep.recursive.passed:
                    rep.recursive = PropertyResult(False, rep.recursive.checked,
                                                   (seq, v, w, bad[0], pred[bad[0]], again[bad[0]]))
        if model is not None:
            _check_reconstructive(pr, model, seq, rep)
    return rep


def _check_reconstructive(pr, model, seq, rep):
    # O_i(seq) is always in the image of O_i (idempotence), so it is the
    # sequence checked; when seq itself is in the image the two coincide
    n = len(seq) - 1
    for agent in model.agents:
        obs = model.observe_seq(agent, seq)
        variables = sorted({v for s in obs for v in s})
        cols = {v: pr.series(observed_points(obs, v), n) for v in variables}
        p = [State((v, cols[v][t]) for v in variables) for t in range(n + 1)]
        ok = model.observe_seq(agent, p) == obs
        r = rep.reconstructive
        checked = r.checked + 1
        if not ok:
            rep.reconstructive = PropertyResult(False, checked, r.witness or (agent, obs))
        else:
            rep.reconstructive = PropertyResult(True if r.passed is None else r.passed,
                                                checked, r.witness)

def view_flag_model(agents: Sequence[str], variables: Sequence[str]) -> ObservationModel:
    """Observation model where agent ``i`` sees ``x`` iff ``view(i,x) = 1``.

    The flags themselves are always visible, so whether a variable was seen
    never depends on the value predicted for it.
    """
    rules = [VisibilityRule(f"view({a},{x})") for a in agents for x in variables]
    rules += [VisibilityRule(x, (Atom(VarTerm(f"view(?self,{x})"), 1),)) for x in variables]
    self_vars = {a: f"view({a},{variables[0]})" for a in agents}
    return ObservationModel(agents, self_vars, rules)


def view_flag_samples(rng: random.Random, count: int, agents: Sequence[str] = ("i", "j"),
                      variables: Sequence[str] = ("x", "y"), max_len: int = 9):
    """Random world sequences for :func:`view_flag_model` (numeric values)."""
    out = []
    for _ in range(count):
        n = rng.randint(1, max_len)
        seq = []
        for _t in range(n):
            d = {x: round(rng.uniform(-5, 5), 2) for x in variables}
            for a in agents:
                for x in variables:
                    d[f"view({a},{x})"] = 1 if rng.random() < 0.5 else 0
            # the self variable must always be visible
            for a in agents:
                d[f"view({a},{variables[0]})"] = 1
            seq.append(State(d))
        out.append(tuple(seq))
    return out
