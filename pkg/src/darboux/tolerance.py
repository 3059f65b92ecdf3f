"""Shared numerical thresholds.

Every classification in the package (inertia, rank, membership in the
sphere, reality of circles) is decided against one of these values, so a
single :class:`Tolerance` instance makes a run reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerance:
    """Relative zero thresholds.

    Attributes
    ----------
    zero : float
        Relative threshold below which an eigenvalue, residual or inner
        product counts as zero.
    root_cluster : float
        Roots of a characteristic polynomial closer than
        ``root_cluster * (1 + max|coeff|)`` are merged.
    coincide : float
        Threshold for ``k2 == 0`` / ``k4 == 0`` after congruence
        normalization (single family detection).
    design : float
        Relative tolerance for validating user-made design inputs.
    """

    zero: float = 1e-9
    root_cluster: float = 1e-8
    coincide: float = 1e-8
    design: float = 1e-7

    def with_zero(self, zero: float) -> "Tolerance":
        return replace(self, zero=zero)


DEFAULT = Tolerance()
