"""Critical, scaling and lifespan exponents of the memory problem on H^n."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

__all__ = ["ExponentReport", "exponents", "NOT_APPLICABLE"]

NOT_APPLICABLE = None


@dataclass(frozen=True)
class ExponentReport:
    """All exponents for one ``(n, gamma, p, kappa)``.

    Lifespan exponents are ``None`` where their denominator is not positive,
    i.e. where the corresponding lifespan bound does not apply.
    """

    n: int
    Q: int
    gamma: float
    p: float | None
    kappa: float | None
    p_c: float
    p_gamma: float
    p_gamma_alt: float
    p_sc: float
    q_sc: float | None
    lifespan_exponent_L1: float | None
    lifespan_exponent_kappa: float | None

    def as_dict(self) -> dict:
        return asdict(self)

    def lines(self) -> list[str]:
        out = []
        for k, v in self.as_dict().items():
            if v is None:
                s = "n/a"
            elif isinstance(v, float) and math.isinf(v):
                s = "inf"
            else:
                s = repr(v)
            out.append(f"{k} = {s}")
        return out


def _lifespan(gamma: float, p: float, dim: float) -> float | None:
    d = (2 - gamma) / (p - 1) - dim / 2
    return -1.0 / d if d > 0 else NOT_APPLICABLE


def exponents(n: int, gamma: float, p: float | None = None, kappa: float | None = None) -> ExponentReport:
    """Compute the exponent table.

    ``p_c = max(1/gamma, p_gamma)`` is ``inf`` for ``gamma = 0``. ``q_sc`` and
    the lifespan exponents need ``p``; the kappa exponent also needs ``kappa``.
    """
    if n < 1 or int(n) != n:
        raise ValueError("n must be a positive integer")
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    if p is not None and not p > 1:
        raise ValueError("p must exceed 1")
    if kappa is not None and not kappa > 0:
        raise ValueError("kappa must be positive")
    n = int(n)
    Q = 2 * n + 2
    p_gamma = 1 + 2 * (2 - gamma) / (Q - 2 + 2 * gamma)
    p_gamma_alt = (n + 2) / (n + gamma)
    if abs(p_gamma - p_gamma_alt) > 1e-12 * p_gamma:
        raise ArithmeticError("the two forms of p_gamma disagree")
    p_c = math.inf if gamma == 0 else max(1 / gamma, p_gamma)
    p_sc = 1 + 2 * (2 - gamma) / Q
    q_sc = L1 = Lk = NOT_APPLICABLE
    if p is not None:
        q_sc = Q * (p - 1) / (2 * (2 - gamma))
        L1 = _lifespan(gamma, p, Q)
        if kappa is not None:
            Lk = _lifespan(gamma, p, kappa)
    return ExponentReport(n, Q, gamma, p, kappa, p_c, p_gamma, p_gamma_alt, p_sc, q_sc, L1, Lk)
