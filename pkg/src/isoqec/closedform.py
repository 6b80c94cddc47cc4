"""Closed-form fidelities and bounds for isotropically perturbed states.

For an isotropic error with polar profile f on S^(2d-1), the squared
fidelity of the perturbed state against the unperturbed one is

    F^2 = 1 - 4 (2 pi)^(d-1) / (2d-1)!! * w * int f sin^(2d)

where the weight w counts the amplitude pairs lost to the error: w = d - 1
for a bare state, and w = d - d'' for a block code that recovers all but
one pair per syndrome block.  The prefactor is assembled in log space; only
the finished deficit is exponentiated.

The PRINTED variant of the corrected-fidelity upper bound reproduces a
published denominator 2d' - 1 that its own derivation does not support;
the derivation yields 2d - 1 (PROOF).  Both are kept so the discrepancy
stays visible in verification output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .distributions import (
    CodeParams,
    DensityKind,
    IsotropicDensity,
    condition_18,
    log_moment_sin_2d_bar,
    variance_of,
)
from .mathcore import LOG_2PI, double_factorial_log


class BoundVariant(Enum):
    PROOF = "proof"
    PRINTED = "printed"


@dataclass(frozen=True)
class FidelityReport:
    """Closed-form fidelities, bounds and the bound's applicability flag."""

    params: CodeParams
    f2_psi: float          # error acting on the encoded state
    f2_phi_tilde: float    # after syndrome measurement and correction
    f2_psi0: float         # error acting on the unencoded state
    lb_psi0: float         # variance-only lower bound on f2_psi0
    ub_phi_tilde: float    # variance-only upper bound on f2_phi_tilde (PROOF)
    cond18: bool           # moment condition under which the bound applies


def _deficit(log_bar: float, d: int, weight: int) -> float:
    # 4 (2 pi)^(d-1) / (2d-1)!! * weight * exp(log_bar)
    if weight == 0:
        return 0.0
    return math.exp(math.log(4.0) + (d - 1) * LOG_2PI
                    - double_factorial_log(2 * d - 1).log_magnitude
                    + math.log(weight) + log_bar)


def fidelity_psi(density: IsotropicDensity, d: int) -> float:
    """Squared fidelity of the raw perturbed state on S^(2d-1)."""
    if density.d != d:
        raise ValueError(
            f"density lives at half-dimension {density.d}, expected {d}")
    return 1.0 - _deficit(log_moment_sin_2d_bar(density), d, d - 1)


def fidelity_psi_normal(sigma: float, d: int) -> float:
    """fidelity_psi specialized to the normal density: (1 + (d-1) s^2) / d.

    Accepts sigma = 1 as the continuous limit (fidelity 1) even though the
    density itself is only defined for sigma < 1.
    """
    if not 0.0 <= sigma <= 1.0:
        raise ValueError(f"need 0 <= sigma <= 1, got {sigma}")
    if d < 1:
        raise ValueError(f"half-dimension d must be >= 1, got {d}")
    return (1.0 + (d - 1) * sigma * sigma) / d


def fidelity_psi0(density: IsotropicDensity, d_prime: int) -> float:
    """Squared fidelity of the unencoded state under its own error.

    Same closed form as fidelity_psi, on the logical sphere S^(2d'-1).
    """
    return fidelity_psi(density, d_prime)


def fidelity_corrected(density: IsotropicDensity, params: CodeParams) -> float:
    """Squared fidelity after syndrome measurement and correction.

    Correction recovers every amplitude pair except one per block, so the
    deficit weight drops from d - 1 to d - d''.
    """
    if density.d != params.d:
        raise ValueError(
            f"density lives at half-dimension {density.d}, "
            f"expected coded dimension {params.d}")
    return 1.0 - _deficit(log_moment_sin_2d_bar(density), params.d,
                          params.d - params.d_dprime)


def bound_psi0_lower(v_u: float, d_prime: int) -> float:
    """Lower bound on fidelity_psi0 from the per-step variance alone.

    1 - (2d'-2)/(2d'-1) (v_u - (v_u/2)^2); tight for concentrated errors.
    """
    if not 0.0 <= v_u <= 4.0:
        raise ValueError(f"variance must lie in [0, 4], got {v_u}")
    if d_prime < 1:
        raise ValueError(f"half-dimension must be >= 1, got {d_prime}")
    spread = v_u - (v_u / 2.0) ** 2
    return 1.0 - (2 * d_prime - 2) / (2 * d_prime - 1) * spread


def bound_corrected_upper(v_c: float, params: CodeParams,
                          variant: BoundVariant = BoundVariant.PROOF) -> float:
    """Upper bound on fidelity_corrected from the composed variance alone.

    PROOF: 1 - (d - d'') v_c / (2d - 1), which the supporting moment
    argument actually establishes.  PRINTED: same with denominator 2d' - 1,
    kept only to document the published discrepancy; it is violated by
    explicit code/density pairs.
    """
    if not 0.0 <= v_c <= 4.0:
        raise ValueError(f"variance must lie in [0, 4], got {v_c}")
    weight = params.d - params.d_dprime
    if variant is BoundVariant.PROOF:
        return 1.0 - weight * v_c / (2 * params.d - 1)
    if variant is BoundVariant.PRINTED:
        return 1.0 - weight * v_c / (2 * params.d_prime - 1)
    raise ValueError(f"unknown bound variant {variant!r}")


def lemma_g(n: int, x: float) -> float:
    """g(n, x) = 2 - 2 (1 - x/2)^n - (x - (x/2)^2), nonnegative on [0, 4].

    The gap between the n-fold composed variance and the single-step
    spread term; its nonnegativity is what orders the unencoded fidelity
    above the corrected one.
    """
    if not (isinstance(n, int) and n >= 2):
        raise ValueError(f"step count must be an integer >= 2, got {n}")
    if not 0.0 <= x <= 4.0:
        raise ValueError(f"variance argument must lie in [0, 4], got {x}")
    return 2.0 - 2.0 * (1.0 - x / 2.0) ** n - (x - (x / 2.0) ** 2)


def full_report(density: IsotropicDensity, params: CodeParams,
                n_steps: int | None = None,
                uncoded: IsotropicDensity | None = None) -> FidelityReport:
    """All closed-form quantities for one code/density cell.

    density is the composed error on the coded sphere S^(2d-1).  For a
    normal density the matching unencoded error is derived by splitting
    sigma across n_steps (default: the code's qubit count n); any other
    kind needs the unencoded density supplied explicitly.
    """
    if density.d != params.d:
        raise ValueError(
            f"density lives at half-dimension {density.d}, "
            f"expected coded dimension {params.d}")
    steps = params.n if n_steps is None else n_steps
    if not (isinstance(steps, int) and steps >= 1):
        raise ValueError(f"step count must be a positive integer, got {steps}")
    if uncoded is None:
        if density.kind is not DensityKind.NORMAL:
            raise ValueError(
                "only normal densities split into per-step errors in closed "
                "form; pass the unencoded density explicitly")
        sigma_u = density.sigma ** (1.0 / steps)
        uncoded = IsotropicDensity.normal(sigma_u, params.d_prime)
    if uncoded.d != params.d_prime:
        raise ValueError(
            f"unencoded density lives at half-dimension {uncoded.d}, "
            f"expected logical dimension {params.d_prime}")
    v_c = variance_of(density).v
    v_u = variance_of(uncoded).v
    return FidelityReport(
        params=params,
        f2_psi=fidelity_psi(density, params.d),
        f2_phi_tilde=fidelity_corrected(density, params),
        f2_psi0=fidelity_psi0(uncoded, params.d_prime),
        lb_psi0=bound_psi0_lower(v_u, params.d_prime),
        ub_phi_tilde=bound_corrected_upper(v_c, params, BoundVariant.PROOF),
        cond18=condition_18(density).holds,
    )
