"""Complex error function via the Faddeeva function, and the overflow-free
erf combination that enters the transverse-relaxation parameter W.

The Faddeeva kernel is ``scipy.special.wofz`` (a region-split algorithm:
series near the origin, continued fraction / asymptotic expansions far out).
Everything else here is built on top of it so that no exp(+b^2) factor is
ever formed explicitly.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np
from scipy.special import wofz

from .errors import ConsistencyError, DomainError

DOMAIN = 1e3
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_SERIES_RADIUS = 0.5


def faddeeva(z):
    """w(z) = exp(-z^2) erfc(-iz) for |Re z|, |Im z| <= 1e3."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z.real) > DOMAIN) or np.any(np.abs(z.imag) > DOMAIN):
        raise DomainError(f"faddeeva argument outside |Re|,|Im| <= {DOMAIN:g}")
    w = wofz(z)
    if not np.all(np.isfinite(w)):
        raise DomainError("faddeeva overflow (argument deep in the lower half-plane)")
    return w[()] if w.ndim == 0 else w


def _erf_series(z):
    # Maclaurin series, used for |z| < 0.5 where 1 - exp(-z^2) w(iz) cancels
    term = z.copy()
    total = z.copy()
    z2 = z * z
    for n in range(1, 40):
        term = -term * z2 / n
        total = total + term / (2 * n + 1)
    return _TWO_OVER_SQRT_PI * total


def erf(z):
    """Error function of a complex argument."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    small = np.abs(z) < _SERIES_RADIUS
    out[small] = _erf_series(z[small])
    # erf is odd; evaluate in the right half-plane where w(iz) stays bounded
    big = ~small
    flip = z.real[big] < 0
    zr = np.where(flip, -z[big], z[big])
    vals = 1.0 - np.exp(-zr * zr) * faddeeva(1j * zr)
    out[big] = np.where(flip, -vals, vals)
    return out[0] if scalar else out


def dawson(x):
    """Dawson function D(x) = (sqrt(pi)/2) Im w(x) for real x."""
    return 0.5 * math.sqrt(math.pi) * np.imag(faddeeva(np.asarray(x, dtype=float)))


def bracket_scaled(a, b, *, return_residue=False):
    """exp(-b^2) * (-i) * [erf(a - ib) - erf(a + ib) + 2 erf(ib)] for a, b >= 0.

    Each term is rewritten as exp(-b^2) erf(a + isb) = exp(-b^2) -
    exp(-a^2 - 2isab) w(-sb + ia), whose Faddeeva arguments all sit in the
    closed upper half-plane, so nothing overflows. The result is real
    analytically; the imaginary residue is checked before it is dropped.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise DomainError("bracket_scaled requires a >= 0 and b >= 0")
    a, b = np.broadcast_arrays(a, b)
    eb = np.exp(-b * b)
    ea = np.exp(-a * a)
    # beyond a = 40 the prefactor e^{-a^2} is exactly zero in double precision
    a = np.minimum(a, 40.0)
    phase = np.exp(2j * a * b)
    w_minus = faddeeva(b + 1j * a)  # from erf(a - ib)
    w_plus = faddeeva(-b + 1j * a)  # from erf(a + ib)
    w_axis = faddeeva(-b + 0j)  # from erf(ib)
    total = (eb - ea * phase * w_minus) - (eb - ea * w_plus / phase) + 2.0 * (eb - w_axis)
    value = -1j * total
    residue = np.abs(value.imag)
    if np.any(residue > 1e-9):
        raise ConsistencyError(f"bracket imaginary residue {residue.max():.3e} exceeds 1e-9")
    out = value.real[()] if value.ndim == 0 else value.real
    if return_residue:
        return out, (residue.max() if residue.size else 0.0)
    return out


def load_oracle():
    """Embedded high-precision reference values for erf and w."""
    text = resources.files("qdteleport.data").joinpath("erf_oracle.json").read_text()
    return json.loads(text)


def selftest():
    """Maximum relative deviation of erf and w against the embedded oracle."""
    data = load_oracle()
    report = {}
    for name, fn in (("erf", erf), ("faddeeva", faddeeva)):
        pts = np.array([complex(*p) for p in data[name]["z"]])
        ref = np.array([complex(*v) for v in data[name]["value"]])
        got = np.asarray(fn(pts))
        rel = np.abs(got - ref) / np.abs(ref)
        report[name] = {"points": len(pts), "max_rel_error": float(rel.max())}
    report["passed"] = all(r["max_rel_error"] <= 1e-10 for r in report.values())
    return report
