"""Linearized drift matrix and dynamical stability classification.

The fluctuation vector is ordered (da, db1, db2, da+, db1+, db2+); the drift
matrix then has exact conjugation block symmetry, A = [[B, C], [C*, B*]],
which the constructor enforces by building the lower blocks as conjugates.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .params import LinearizedParams, SystemParams
from .steady_state import SteadyStateBranch

STAB_TOL_FACTOR = 1e-9      # margin below stab_tol*kappa counts as marginal
GAMMA_FALLBACK_FACTOR = 1e-6  # gamma used when both dampings are exactly zero


class EigenSolveFailure(ArithmeticError):
    """The QR eigenvalue iteration failed to converge (practically unreachable
    at 6x6)."""


@dataclass(frozen=True)
class DriftMatrix:
    """6x6 complex drift matrix of the linearized fluctuation dynamics."""

    a: np.ndarray

    @property
    def kappa(self) -> float:
        """Cavity decay recovered from the diagonal (reference rate)."""
        return -float(self.a[0, 0].real)


@dataclass(frozen=True)
class StabilityVerdict:
    """Eigenvalue-based verdict: stable iff every real part < -stab_tol."""

    eigenvalues: np.ndarray
    max_real_part: float
    stable: bool
    margin: float
    gamma_fallback_applied: bool = False
    verdict_flipped: bool = False    # raw gamma=0 verdict disagreed with fallback


def derive_linearized(branch: SteadyStateBranch,
                      p: SystemParams) -> LinearizedParams:
    """Effective linearized parameters of a steady-state branch.

    g1_eff = g1*alpha, g2_eff = 4*g2*alpha*Re[beta2], g22 = g2*|alpha|^2 and
    omega2_tilde = omega2 + 2*g2*|alpha|^2; the effective detuning is copied
    from the branch.
    """
    alpha = branch.alpha
    n_p = branch.n_p
    return LinearizedParams(
        delta_eff=branch.delta_eff,
        omega1=p.omega1,
        omega2_tilde=p.omega2 + 2.0 * p.g2 * n_p,
        g1_eff=p.g1 * alpha,
        g2_eff=4.0 * p.g2 * alpha * branch.beta2.real,
        g22=complex(p.g2 * n_p),
        omega_ex=p.omega_ex,
        theta=p.theta,
        kappa=p.kappa,
        gamma1=p.gamma1,
        gamma2=p.gamma2,
        nbar1=p.nbar1,
        nbar2=p.nbar2,
        origin="branch-derived",
    )


def build_drift_matrix(lp: LinearizedParams) -> DriftMatrix:
    """Assemble the drift matrix from linearized parameters."""
    G1, G2, G22 = complex(lp.g1_eff), complex(lp.g2_eff), complex(lp.g22)
    eip = np.exp(1j * lp.theta)
    eim = np.exp(-1j * lp.theta)
    B = np.array([
        [-(lp.kappa + 1j * lp.delta_eff), -1j * G1, -1j * G2],
        [-1j * np.conj(G1), -(lp.gamma1 + 1j * lp.omega1), -1j * lp.omega_ex * eip],
        [-1j * np.conj(G2), -1j * lp.omega_ex * eim,
         -(lp.gamma2 + 1j * lp.omega2_tilde)],
    ], dtype=complex)
    C = np.array([
        [0.0, -1j * G1, -1j * G2],
        [-1j * G1, 0.0, 0.0],
        [-1j * G2, 0.0, -2j * G22],
    ], dtype=complex)
    a = np.block([[B, C], [np.conj(C), np.conj(B)]])
    return DriftMatrix(a=a)


def classify_stability(A: DriftMatrix) -> StabilityVerdict:
    """Stability from the full eigenvalue set of the drift matrix.

    Marginal spectra (|max Re| below stab_tol) are reported unstable: the
    steady-state Lyapunov solve is invalid on the margin.
    """
    try:
        ev = np.linalg.eigvals(A.a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveFailure(str(exc)) from exc
    max_re = float(ev.real.max())
    stab_tol = STAB_TOL_FACTOR * A.kappa
    return StabilityVerdict(
        eigenvalues=ev,
        max_real_part=max_re,
        stable=bool(max_re < -stab_tol),
        margin=-max_re,
    )


def classify_branch_stability(lp: LinearizedParams,
                              gamma_fallback: bool = True) -> StabilityVerdict:
    """Branch verdict, with an infinitesimal-damping fallback.

    With gamma1 = gamma2 = 0 the uncoupled mechanical eigenvalues sit exactly
    on the margin; the fallback classifies with gamma = 1e-6*kappa instead and
    flags verdicts that differ between the two dampings.
    """
    raw = classify_stability(build_drift_matrix(lp))
    if not gamma_fallback or lp.gamma1 > 0.0 or lp.gamma2 > 0.0:
        return raw
    eps = GAMMA_FALLBACK_FACTOR * lp.kappa
    fb = classify_stability(build_drift_matrix(
        replace(lp, gamma1=eps, gamma2=eps)))
    return replace(fb, gamma_fallback_applied=True,
                   verdict_flipped=bool(fb.stable != raw.stable))
