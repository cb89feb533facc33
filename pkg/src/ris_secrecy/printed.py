"""Moment expressions exactly as originally typeset, kept for the errata comparison.

Nothing in the rate pipeline uses these. The one unavoidable edit is the
undefined Rician symbol ``rho_r``, read as ``rho_k``. ``docs/errata.md`` lists
how each expression departs from the Monte-Carlo ground truth.
"""

from __future__ import annotations


def printed_xi(N, M, rho_b, rho_k, r, f2):
    """Signal moment from the a1..a4 polynomial; ``r`` is rho(kappa), ``f2`` = |f_k|^2."""
    r2 = r * r
    rr = rho_k  # printed as rho_r
    a1 = ((r2 * (rho_k + rho_b + 1) ** 2 + (1 - r2) * rho_k * rho_b**2 + rho_b**2) * M**2
          + (((2 * rho_k + 3 * rho_b + 2 - rho_k * rho_b) * r2 + (1 + rho_k) * rho_b) * rho_b * rho_k * f2
             + (rho_k + rho_b + 2) ** 2 - r2 * (rho_k + rho_b + 1) ** 2 - 2 * r2 * rho_k * rho_b - 2) * M
          + r2 * rho_b**2 * rho_k**2 * f2**2
          + 2 * ((1 - r2) * (rho_k + rho_b) + 2) * rho_b * rho_k * f2)
    a2 = (-r2 * rho_k * rho_b * (1 + rho_k) * M**2 + (rho_k + rho_b + 1) * rho_b * rr
          + (rho_k + rho_b + 1) ** 2 - (rho_k + 1) * rho_b**2)
    a3 = ((rho_k + 1) * r2 + (rho_k + 1)) * rho_b * rho_k * f2 - 2 * rho_b * rho_k * r2 + 2 * rho_b * rho_k \
        + 2 * rho_k + 2 * rho_b - 1
    a4 = 2 * rho_b * rr * f2 * (1 + r2)
    return (a1 * N**2 + a2 * N * M**2 + a3 * N * M + a4 * N) / ((rho_b + 1) ** 2 * (rho_k + 1) ** 2)


def printed_varsigma(N, M, rho_b, rho_k, rho_i, r, fk2, fi2, overlap2, cross_re):
    """Interference moment from b1..b3.

    ``overlap2`` = |h_k^H h_i|^2 of the LoS vectors, ``cross_re`` = Re(f_k^* f_i h_i^H h_k).
    """
    r2 = r * r
    g = rho_i + 1 - r2 * rho_i
    b1 = (g * M**2 * rho_b**2
          + M * (g * rho_b**2 * rho_k * fk2 + r2 * rho_b**2 * rho_i * fi2 + (rho_k + 2 * rho_b + 1) * g
                 + r2 * rho_i)
          + (2 * rho_b * fi2 + rho_k * overlap2 + 2 * rho_b * rho_k * cross_re) * r2 * rho_i
          + (r2 * rho_b * rho_i * fi2 + 2 * rho_i * (1 - r2) + 2) * rho_b * rho_k * fk2)
    b2 = ((rho_b + 1) * rho_k + (rho_b + 1) ** 2 - rho_b**2) * (rho_i + 1) - (rho_b + 1) * rho_b * rho_i * r2 - 1
    b3 = (rho_i + 1) * rho_b * rho_k * fk2 + (rho_k + 1) * r2 * rho_b * rho_i * fi2
    return (b1 * N**2 + b2 * N * M**2 + b3 * N * M) / ((rho_b + 1) ** 2 * (rho_k + 1) * (rho_i + 1))


def printed_upsilon(L, M, rho_b, rho_k, f2):
    """BS-noise moment as printed: carries the path gain and no factor N."""
    return L / ((rho_b + 1) * (rho_k + 1)) * (rho_b * rho_k * f2 + (rho_b + rho_k + 1) * M)


def printed_eave_x(L_refl, d_er, M, rho_e, rho_k, r, xi_coh, amp2=1.0):
    """Eavesdropper signal moment with the direct term written as the RIS-eavesdropper gain."""
    pe, qe = rho_e / (rho_e + 1), 1 / (rho_e + 1)
    pk, qk = rho_k / (rho_k + 1), 1 / (rho_k + 1)
    inner = pe * pk * (M + r * r * xi_coh) + pe * qk * M + pk * qe * M + qe * qk * M
    return L_refl * amp2 * inner + d_er
