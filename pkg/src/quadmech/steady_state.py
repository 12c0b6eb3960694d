"""Nonlinear steady states of the driven cavity / two-mode mechanical system.

Two independent routes to the steady-state photon numbers n_p = |alpha|^2:

* a closed-form degree-7 polynomial in n_p (``build_polynomial`` /
  ``find_real_roots``), and
* a fixed-point scan oracle (``oracle_roots``) that brackets and bisects
  f(n_p) = eta^2/(kappa^2 + Delta(n_p)^2) - n_p, with Delta(n_p) obtained from
  the 4x4 linear solve for the mechanical displacements.

The closed-form coefficient set C5/C6 is known to disagree with the
fixed-point map whenever both couplings are active (its mixed g1-g2 terms are
not reliable), so the oracle is authoritative: ``solve_branches`` compares the
two root sets, emits a coefficient-mismatch diagnostic on disagreement and
continues with the oracle roots; every candidate must then pass the
self-consistency residual check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .params import SystemParams

# Frozen numerical policy (see the project decision ledger):
ROOT_ACCEPT_TOL = 1e-6    # relative self-consistency residual for a kept root
NEG_TOL = 1e-9            # roots >= -NEG_TOL are clamped to zero
DEFLATE_TOL = 1e-12       # leading-coefficient deflation, after variable scaling
IMAG_TOL = 1e-7           # |Im r| < IMAG_TOL*(1+|Re r|) counts as real
DEDUPE_TOL = 1e-8         # roots closer than DEDUPE_TOL*(1+n) merge
MATCH_TOL = 1e-6          # polynomial/oracle roots match within MATCH_TOL*max(1,n)
ORACLE_MARGIN = 0.05      # scan upper bound: (1+margin)*eta^2/kappa^2
SINGULAR_COND = 1e14      # condition-number cutoff of the 4x4 mechanical solve


class ZeroPolynomial(ValueError):
    """All polynomial coefficients are (numerically) zero."""


class SingularMechanicalSystem(ArithmeticError):
    """The 4x4 mechanical steady-state system is singular at this n_p
    (e.g. omega2 + 4 g2 n_p -> 0 with omega_ex = 0)."""


class ResidualTooLarge(ValueError):
    """The supplied n_p is not a self-consistent steady state."""


@dataclass(frozen=True)
class PolynomialCoefficients:
    """Coefficients C0..C7 of sum_m C_m n_p^m = 0, plus derived intermediates.

    aux records x = omega1*omega2 - omega_ex^2, y = 2 cos(2 theta),
    z = delta_c^2 + kappa^2 and the natural photon-number scale used to
    condition the root solve.
    """

    c: np.ndarray                    # shape (8,), ascending order
    aux: dict = field(default_factory=dict)

    def degree(self) -> int:
        nz = np.nonzero(self.c)[0]
        return int(nz[-1]) if len(nz) else -1


@dataclass(frozen=True)
class SteadyStateBranch:
    """One self-consistent steady state at photon number n_p."""

    n_p: float
    alpha: complex
    beta1: complex
    beta2: complex
    delta_eff: float
    residual: float
    stability: Optional[object] = None   # StabilityVerdict, attached later

    def with_stability(self, verdict) -> "SteadyStateBranch":
        return replace(self, stability=verdict)


@dataclass
class Diagnostic:
    """A non-fatal event recorded during a solve or sweep."""

    kind: str                 # "coefficient-mismatch" | "residual-drop" | ...
    message: str
    cell: Optional[tuple] = None


def build_polynomial(p: SystemParams) -> PolynomialCoefficients:
    """Closed-form coefficients of the photon-number polynomial.

    Degenerations: g2 = 0 gives an exact cubic, g1 = 0 a quintic, and with
    both couplings zero only C0, C1 survive (single Lorentzian root).
    """
    w1, w2, Om = p.omega1, p.omega2, p.omega_ex
    g1, g2, Dc, kap, eta = p.g1, p.g2, p.delta_c, p.kappa, p.eta
    x = w1 * w2 - Om**2
    y = 2.0 * math.cos(2.0 * p.theta)
    z = Dc**2 + kap**2

    c7 = 64 * g1**4 * g2**4 * w1**2 * (
        4 * (x + w1 * w2) * ((x + w1 * w2) - Om**2 * y) + Om**4 * y**2)
    c6 = (32 * g1**4 * g2**3 * w1 * x * (
            (2 * (x + 2 * w1 * w2))**2 - 16 * w1**2 * w2**2
            - Om**2 * (2 * (1 + w1 * w2) + y * (4 + 9 * w1 * w2))
            + 1.5 * Om**4 * y**2)
          - 256 * g2**4 * g1**2 * w1**3 * x * Dc * (2 * (x + w1 * w2) + Om**2 * y))
    c5 = (16 * g1**4 * g2**2 * x**2 * (
            (x + math.sqrt(5.0) * w1 * w2)**2 + 8 * w1**2 * w2**2
            + (0.75 * Om**4 - 0.5 * Om**2 * (3 * x + 13 * w1 * w2)) * y
            + Om**4 * (11.0 / 8.0 + (9.0 / 16.0) * (y**2 - 2))
            - Om**2 * (x + 3 * w1 * w2))
          + 256 * g2**4 * w1**4 * x**2 * z
          + 64 * g2**3 * g1**2 * w1**2 * x**2 * Dc * (
            Om**2 + 3.5 * Om**2 * y - (6 * x + 10 * w1 * w2)))
    c4 = (16 * g1**4 * g2 * x**3 * w2 * (
            x + 3 * w1 * w2 - 0.5 * Om**2 - 0.75 * Om**2 * y)
          + 32 * g1**2 * g2**2 * x**3 * w1 * Dc * (
            -9 * w1 * w2 - 3 * x + Om**2 + 2 * Om**2 * y)
          - 256 * (g2**4 * w1**4 * x**2 * eta**2 - g2**3 * x**3 * w1**3 * z))
    c3 = (-4 * x**4 * g1**2 * g2 * Dc * (2 * x + 14 * w1 * w2 - Om**2 - 1.5 * Om**2 * y)
          + 4 * g1**4 * x**4 * w2**2
          - 256 * g2**3 * x**3 * w1**3 * eta**2
          + 96 * g2**2 * x**4 * w1**2 * z)
    c2 = -4 * g1**2 * x**5 * w2 * Dc - 96 * g2**2 * x**4 * w1**2 * eta**2 \
        + 16 * g2 * x**5 * w1 * z
    c1 = -16 * g2 * x**5 * eta**2 * w1 + x**6 * z
    c0 = -(eta**2) * x**6

    coeffs = np.array([c0, c1, c2, c3, c4, c5, c6, c7], dtype=float)
    n_scale = max(eta**2 / kap**2, 1.0)
    return PolynomialCoefficients(
        c=coeffs, aux={"x": x, "y": y, "z": z, "n_scale": n_scale})


def find_real_roots(coeffs: PolynomialCoefficients) -> list[float]:
    """Real nonnegative roots of the photon-number polynomial, ascending.

    Companion-matrix eigenvalues (numpy.roots) on variable-rescaled
    coefficients: the substitution n_p = n_scale * m makes the coefficient
    magnitudes comparable (they span ~24 decades otherwise, wrecking both the
    leading-coefficient deflation and the eigenvalue accuracy).  Deflation at
    DEFLATE_TOL is applied to the rescaled coefficients.
    """
    c = np.asarray(coeffs.c, dtype=float)
    s = float(coeffs.aux.get("n_scale", 1.0)) or 1.0
    scaled = c * s ** np.arange(len(c))
    top = np.max(np.abs(scaled))
    if top == 0.0 or not np.isfinite(top):
        raise ZeroPolynomial("all coefficients vanish (or are non-finite)")
    hi = scaled[::-1]                       # highest degree first
    lead = 0
    while lead < len(hi) and abs(hi[lead]) < DEFLATE_TOL * top:
        lead += 1
    hi = hi[lead:]
    if len(hi) <= 1:
        raise ZeroPolynomial("polynomial deflates to a constant")
    # factor out exact roots at zero (trailing zero coefficients)
    zeros_at_origin = 0
    while len(hi) > 1 and hi[-1] == 0.0:
        hi = hi[:-1]
        zeros_at_origin += 1
    roots: list[float] = []
    if len(hi) > 1:
        rts = np.roots(hi / np.max(np.abs(hi)))
        for r in rts:
            rr = float(r.real) * s
            if abs(r.imag) * s < IMAG_TOL * (1.0 + abs(rr)):
                roots.append(rr)
    if zeros_at_origin:
        roots.append(0.0)
    roots = sorted(r for r in roots if r >= -NEG_TOL)
    out: list[float] = []
    for r in roots:
        r = max(r, 0.0)
        if out and abs(r - out[-1]) < DEDUPE_TOL * (1.0 + r):
            out[-1] = 0.5 * (out[-1] + r)   # merge near-duplicates
        else:
            out.append(r)
    return out


# ---------------------------------------------------------------------------
# mechanical fixed point at given photon number
# ---------------------------------------------------------------------------

def _mech_matrices(p: SystemParams, n_p: np.ndarray, with_damping: bool):
    """Stacked 4x4 systems for (Re b1, Im b1, Re b2, Im b2) at each n_p.

    Row order: Re/Im of the b1 equation, then Re/Im of the b2 equation, for
    (gamma + i*omega)*b + i*drive = 0 with the quadratic frequency pull
    omega2 -> omega2 + 4 g2 n_p acting on Re b2 only.
    """
    n_p = np.atleast_1d(np.asarray(n_p, dtype=float))
    S = n_p.shape[0]
    c, s = math.cos(p.theta), math.sin(p.theta)
    Om = p.omega_ex
    g1m = p.gamma1 if with_damping else 0.0
    g2m = p.gamma2 if with_damping else 0.0
    M = np.zeros((S, 4, 4))
    M[:, 0, 0] = g1m
    M[:, 0, 1] = -p.omega1
    M[:, 0, 2] = -Om * s
    M[:, 0, 3] = -Om * c
    M[:, 1, 0] = p.omega1
    M[:, 1, 1] = g1m
    M[:, 1, 2] = Om * c
    M[:, 1, 3] = -Om * s
    M[:, 2, 0] = Om * s
    M[:, 2, 1] = -Om * c
    M[:, 2, 2] = g2m
    M[:, 2, 3] = -p.omega2
    M[:, 3, 0] = Om * c
    M[:, 3, 1] = Om * s
    M[:, 3, 2] = p.omega2 + 4.0 * p.g2 * n_p
    M[:, 3, 3] = g2m
    rhs = np.zeros((S, 4))
    rhs[:, 1] = -p.g1 * n_p
    return M, rhs


def mechanical_response(p: SystemParams, n_p: float,
                        with_damping: bool = False) -> tuple[complex, complex]:
    """Mechanical amplitudes (beta1, beta2) at fixed photon number.

    Damping is excluded by default, matching the steady-state algebra that the
    polynomial encodes; ``with_damping=True`` retains gamma for sensitivity
    studies.  Raises SingularMechanicalSystem when the 4x4 system is
    (numerically) singular.
    """
    M, rhs = _mech_matrices(p, n_p, with_damping)
    M0, r0 = M[0], rhs[0]
    if np.linalg.cond(M0) > SINGULAR_COND:
        raise SingularMechanicalSystem(
            f"mechanical system singular at n_p = {n_p:.6g}")
    try:
        sol = np.linalg.solve(M0, r0)
    except np.linalg.LinAlgError as exc:
        raise SingularMechanicalSystem(
            f"mechanical system singular at n_p = {n_p:.6g}") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularMechanicalSystem(
            f"mechanical solve overflowed at n_p = {n_p:.6g}")
    return complex(sol[0], sol[1]), complex(sol[2], sol[3])


def effective_detuning(p: SystemParams, beta1: complex, beta2: complex) -> float:
    """Cavity detuning shifted by the steady mechanical displacements."""
    quad = (np.conj(beta2)**2 + beta2**2 + 2.0 * abs(beta2)**2).real
    return p.delta_c + 2.0 * p.g1 * beta1.real + p.g2 * quad


def _detuning_batch(p: SystemParams, n_p: np.ndarray,
                    with_damping: bool = False) -> np.ndarray:
    """Vectorized effective detuning over an array of photon numbers.

    Singular grid points come back as NaN (callers skip them)."""
    M, rhs = _mech_matrices(p, n_p, with_damping)
    try:
        with np.errstate(all="ignore"):
            sol = np.linalg.solve(M, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        sol = np.full(rhs.shape, np.nan)
        for i in range(M.shape[0]):
            try:
                sol[i] = np.linalg.solve(M[i], rhs[i])
            except np.linalg.LinAlgError:
                pass
    u1, u2 = sol[:, 0], sol[:, 2]
    quad = 4.0 * u2**2   # conj(b2)^2 + b2^2 + 2|b2|^2 collapses to 4 Re[b2]^2
    return p.delta_c + 2.0 * p.g1 * u1 + p.g2 * quad


def fixed_point_defect(p: SystemParams, n_p: np.ndarray,
                       with_damping: bool = False) -> np.ndarray:
    """f(n_p) = eta^2/(kappa^2 + Delta(n_p)^2) - n_p, vectorized."""
    n_p = np.atleast_1d(np.asarray(n_p, dtype=float))
    D = _detuning_batch(p, n_p, with_damping)
    with np.errstate(all="ignore"):
        return p.eta**2 / (p.kappa**2 + D**2) - n_p


def reconstruct_branch(p: SystemParams, n_p: float,
                       with_damping: bool = False) -> SteadyStateBranch:
    """Full branch record at a given photon number.

    alpha keeps the phase of -i*eta/(kappa + i*Delta) but is rescaled so that
    |alpha|^2 = n_p exactly; the relative defect between n_p and the
    Lorentzian prediction is stored as ``residual`` and must not exceed
    ROOT_ACCEPT_TOL.
    """
    if n_p < 0.0:
        raise ResidualTooLarge(f"negative photon number {n_p}")
    beta1, beta2 = mechanical_response(p, n_p, with_damping)
    delta = effective_detuning(p, beta1, beta2)
    n_pred = p.eta**2 / (p.kappa**2 + delta**2)
    residual = abs(n_pred - n_p) / max(1.0, n_p)
    if residual > ROOT_ACCEPT_TOL:
        raise ResidualTooLarge(
            f"n_p = {n_p:.9g} has self-consistency defect {residual:.3e}")
    raw = -1j * p.eta / (p.kappa + 1j * delta)
    mag = abs(raw)
    alpha = raw * math.sqrt(n_p) / mag if mag > 0.0 else complex(math.sqrt(n_p))
    return SteadyStateBranch(n_p=float(n_p), alpha=alpha, beta1=beta1,
                             beta2=beta2, delta_eff=float(delta),
                             residual=float(residual))


def _resonance_pole(p: SystemParams) -> Optional[float]:
    """Photon number at which the mechanical solve turns singular, if any."""
    if p.g2 == 0.0:
        return None
    pole = (p.omega_ex**2 - p.omega1 * p.omega2) / (4.0 * p.g2 * p.omega1)
    return pole if pole > 0.0 else None


def oracle_roots(p: SystemParams, scan_points: int = 4096,
                 diagnostics: Optional[list[Diagnostic]] = None,
                 with_damping: bool = False) -> list[float]:
    """Fixed-point roots by scan/bracket/bisection; never touches the
    closed-form polynomial coefficients.

    The base grid is uniform on [0, (1+margin)*eta^2/kappa^2].  When the
    quadratic coupling puts the mechanical resonance pole inside the window,
    extra geometrically clustered points straddle it: the fixed-point map
    varies over many decades there and a uniform grid misses brackets.
    """
    if scan_points < 1000:
        raise ValueError("scan_points must be >= 1000")
    if p.eta == 0.0:
        return [0.0]
    n_max = (1.0 + ORACLE_MARGIN) * p.eta**2 / p.kappa**2
    grid = np.linspace(0.0, n_max, scan_points)
    pole = _resonance_pole(p)
    if pole is not None and pole < n_max:
        d = np.geomspace(1e-9 * (1.0 + pole), n_max, 512)
        extra = np.concatenate([pole - d, pole + d])
        extra = extra[(extra > 0.0) & (extra < n_max)]
        grid = np.unique(np.concatenate([grid, extra]))
    f = fixed_point_defect(p, grid, with_damping)
    bad = ~np.isfinite(f)
    if bad.any():
        if diagnostics is not None:
            diagnostics.append(Diagnostic(
                "singular-scan-point",
                f"skipped {int(bad.sum())} singular scan points"))
        grid, f = grid[~bad], f[~bad]
    if len(grid) < 2:
        return []
    roots = [float(g) for g in grid[f == 0.0]]
    sgn = np.sign(f)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0.0)[0]
    lo, hi = grid[idx].copy(), grid[idx + 1].copy()
    flo = f[idx].copy()
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        fm = fixed_point_defect(p, mid, with_damping)
        left = flo * fm < 0.0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
        if np.all(hi - lo <= 1e-12 * np.maximum(1.0, np.abs(lo))):
            break
    roots.extend(float(r) for r in 0.5 * (lo + hi))
    roots.sort()
    out: list[float] = []
    for r in roots:
        if out and abs(r - out[-1]) < DEDUPE_TOL * (1.0 + r):
            continue
        out.append(r)
    return out


def roots_match(poly_roots: list[float], oracle: list[float],
                tol: float = MATCH_TOL) -> bool:
    """Elementwise agreement of the two sorted root sets."""
    if len(poly_roots) != len(oracle):
        return False
    return all(abs(a - b) <= tol * max(1.0, abs(b))
               for a, b in zip(poly_roots, oracle))


def solve_branches(p: SystemParams, oracle_mode: bool = True,
                   scan_points: int = 4096,
                   with_damping: bool = False,
                   diagnostics: Optional[list[Diagnostic]] = None
                   ) -> list[SteadyStateBranch]:
    """All self-consistent steady-state branches, ascending in n_p.

    Polynomial and oracle root sets are compared; on disagreement a
    coefficient-mismatch diagnostic is recorded and the oracle root set is
    used (a union would double-count roots near folds, where the two
    estimates of the same root differ by more than the match tolerance yet
    both pass the residual check).  Candidates that fail the self-consistency
    residual are dropped with a diagnostic either way.
    """
    try:
        poly = find_real_roots(build_polynomial(p))
    except ZeroPolynomial:
        poly = []
    if oracle_mode:
        orc = oracle_roots(p, scan_points, diagnostics, with_damping)
        if roots_match(poly, orc):
            candidates = poly
        else:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(
                    "coefficient-mismatch",
                    f"polynomial roots {poly} vs oracle roots {orc}; "
                    f"oracle is authoritative"))
            candidates = orc
    else:
        candidates = sorted(poly)
    branches: list[SteadyStateBranch] = []
    for r in candidates:
        try:
            branches.append(reconstruct_branch(p, r, with_damping))
        except ResidualTooLarge as exc:
            if diagnostics is not None:
                diagnostics.append(Diagnostic("residual-drop", str(exc)))
        except SingularMechanicalSystem as exc:
            if diagnostics is not None:
                diagnostics.append(Diagnostic("singular-root", str(exc)))
    branches.sort(key=lambda b: b.n_p)
    return branches
