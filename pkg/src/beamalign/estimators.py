"""Sounding model and the AoD estimators: two-stage widebeam + beam pair,
grid-of-beams, and grid-of-beams with pairwise ratio refinement.

One sounding transmits a unit symbol through a precoder and combines with a
unit-norm receive vector: y = sqrt(rho) * w^H H f + w^H n with n ~ CN(0, I).
The receiver always steers at the true arrival angle of the dominant path.
The pair stage forms the ratio (chi_minus - chi_plus) / (chi_minus + chi_plus)
of the two beam powers and inverts its closed form to the off-center angle.
"""

import numpy as np
from dataclasses import dataclass

from .arrays import angle_to_spatial, spatial_to_angle, steering
from .beams import SteeringCodebook, WidebeamCodebook, build_abp, is_adequate
from .channel import ChannelRealization

__all__ = [
    "DegenerateSoundingError",
    "SoundingResult",
    "EstimationReport",
    "sound",
    "ratio_metric",
    "invert_ratio",
    "closed_form_powers",
    "estimate_two_stage",
    "estimate_gob",
    "estimate_gob_abp",
]

POWER_FLOOR = 1e-300
_NORM_TOL = 1e-8


class DegenerateSoundingError(RuntimeError):
    """Both pair powers are at the floor; the ratio metric is undefined."""


@dataclass(frozen=True)
class SoundingResult:
    """One received sample y and its power |y|^2."""

    sample: complex
    power: float
    beam_index: int = 0


@dataclass(frozen=True)
class EstimationReport:
    """Estimate in degrees and spatial frequency plus bookkeeping."""

    estimate_deg: float
    estimate_sf: float
    soundings_used: int
    stage1_selection: int
    ratio_metric: float


def _check_unit(vec, name):
    nrm = np.linalg.norm(vec)
    if abs(nrm - 1.0) > _NORM_TOL:
        raise ValueError(f"{name} must be unit norm, got ||.|| = {nrm!r}")


def _combined_noise(rx_combiner: np.ndarray, count: int, rng) -> np.ndarray:
    """rx^H n for `count` soundings, each with a fresh CN(0, I) noise vector.

    rng=None models noiseless sounding.
    """
    if rng is None:
        return np.zeros(count, dtype=complex)
    m = len(rx_combiner)
    re = rng.standard_normal((m, count))
    im = rng.standard_normal((m, count))
    return rx_combiner.conj() @ ((re + 1j * im) / np.sqrt(2.0))


def _sweep(h_row: np.ndarray, beam_matrix: np.ndarray, rx_combiner: np.ndarray,
           snr: float, rng) -> np.ndarray:
    """Sound every column of beam_matrix once; returns the received samples."""
    return np.sqrt(snr) * (h_row @ beam_matrix) + _combined_noise(rx_combiner, beam_matrix.shape[1], rng)


def sound(channel: ChannelRealization, tx_precoder: np.ndarray, rx_combiner: np.ndarray,
          snr: float, rng, beam_index: int = 0) -> SoundingResult:
    """One pilot transmission through (tx_precoder, rx_combiner) at linear SNR `snr`."""
    if snr < 0:
        raise ValueError(f"snr must be >= 0, got {snr}")
    _check_unit(tx_precoder, "tx_precoder")
    _check_unit(rx_combiner, "rx_combiner")
    h_row = rx_combiner.conj() @ channel.matrix()
    y = _sweep(h_row, np.asarray(tx_precoder).reshape(-1, 1), rx_combiner, snr, rng)[0]
    return SoundingResult(sample=complex(y), power=abs(y) ** 2, beam_index=beam_index)


def ratio_metric(chi_minus: float, chi_plus: float) -> float:
    """Difference-over-sum of the pair powers, clamped to [-1, 1].

    Raises DegenerateSoundingError when both powers sit at the floor; callers
    fall back to a ratio of 0 (estimate at the pair center).
    """
    if chi_minus < 0 or chi_plus < 0:
        raise ValueError("powers must be nonnegative")
    total = chi_minus + chi_plus
    if total < POWER_FLOOR:
        raise DegenerateSoundingError("pair powers are both at the floor")
    return float(np.clip((chi_minus - chi_plus) / total, -1.0, 1.0))


def invert_ratio(zeta: float, delta: float, center: float) -> float:
    """Closed-form inverse of the pair ratio: off-center angle from zeta.

    mu = center - arcsin((z*sin d - z*sqrt(1-z^2)*sin d*cos d) / (sin^2 d + z^2 cos^2 d))

    The saturated ratios z = -+1 reduce analytically to the pair edges
    center +- delta and are returned directly, exact to the last bit.
    """
    if not 0 < delta < np.pi / 2:
        raise ValueError(f"delta must be in (0, pi/2), got {delta}")
    z = float(np.clip(zeta, -1.0, 1.0))
    if z == -1.0:
        return center + delta
    if z == 1.0:
        return center - delta
    sd, cd = np.sin(delta), np.cos(delta)
    num = z * sd - z * np.sqrt(1.0 - z * z) * sd * cd
    den = sd * sd + z * z * cd * cd
    return center - float(np.arcsin(num / den))


def closed_form_powers(mu: float, center: float, delta: float, num_elements: int,
                       snr: float, path_gain: complex):
    """Noiseless pair powers in closed trigonometric form (odd adequacy k only).

    Returns snr*|gain|^2 * cos^2(N*d/2) / sin^2((d +- delta)/2) with d = mu-center,
    continuously extended where the denominator vanishes. For even k the shared
    numerator takes the sin^2 form instead, so this expression does not apply.
    """
    adequate, k = is_adequate(delta, num_elements)
    if not adequate:
        raise ValueError(f"delta {delta!r} is not k*pi/N for N={num_elements}")
    if k % 2 == 0:
        raise ValueError(f"closed-form pair powers require odd k, got k={k}")
    n = num_elements
    scale = snr * abs(path_gain) ** 2
    d = mu - center
    numerator = np.cos(0.5 * n * d) ** 2

    def one_side(offset):
        s = np.sin(0.5 * (d + offset))
        if abs(s) < 1e-12:
            return scale * n * n  # limit of the 0/0 point: unit-gain beam alignment
        return scale * numerator / (s * s)

    return one_side(delta), one_side(-delta)


def _clamped_estimate(mu_hat: float, geometry) -> tuple:
    lim = geometry.spatial_limit
    sf = float(np.clip(mu_hat, -lim, lim))
    return spatial_to_angle(sf, geometry), sf


def _rx_steering(channel: ChannelRealization) -> np.ndarray:
    psi = angle_to_spatial(channel.aoa_deg, channel.geometry_rx)
    return steering(psi, channel.geometry_rx)


def estimate_two_stage(channel: ChannelRealization, codebook: WidebeamCodebook,
                       snr: float, rng) -> EstimationReport:
    """Widebeam sweep to pick a sector, then pair ratio inversion inside it.

    Stage 1 sounds every widebeam once and keeps the strongest. Stage 2 sounds
    the two steering beams on the selected beam's edges and inverts the power
    ratio. Uses J + 2 soundings for a J-beam codebook.
    """
    rx = _rx_steering(channel)
    h_row = rx.conj() @ channel.matrix()
    beams = codebook.combined_matrix()
    chi1 = np.abs(_sweep(h_row, beams, rx, snr, rng)) ** 2
    j_max = int(np.argmax(chi1))
    gamma = float(codebook.boresights[j_max])
    delta = codebook.half_width

    pair = build_abp(gamma, delta, codebook.geometry)
    pair_matrix = np.stack([pair.beam_minus, pair.beam_plus], axis=1)
    chi2 = np.abs(_sweep(h_row, pair_matrix, rx, snr, rng)) ** 2
    try:
        zeta = ratio_metric(chi2[0], chi2[1])
    except DegenerateSoundingError:
        zeta = 0.0
    mu_hat = invert_ratio(zeta, delta, gamma)
    est_deg, est_sf = _clamped_estimate(mu_hat, codebook.geometry)
    return EstimationReport(estimate_deg=est_deg, estimate_sf=est_sf,
                            soundings_used=beams.shape[1] + 2,
                            stage1_selection=j_max, ratio_metric=zeta)


def estimate_gob(channel: ChannelRealization, codebook: SteeringCodebook,
                 snr: float, rng) -> EstimationReport:
    """Sound every narrow beam once; the strongest beam's boresight is the estimate."""
    rx = _rx_steering(channel)
    h_row = rx.conj() @ channel.matrix()
    chi = np.abs(_sweep(h_row, codebook.matrix, rx, snr, rng)) ** 2
    best = int(np.argmax(chi))
    est_deg, est_sf = _clamped_estimate(float(codebook.boresights[best]), codebook.geometry)
    return EstimationReport(estimate_deg=est_deg, estimate_sf=est_sf,
                            soundings_used=codebook.num_beams,
                            stage1_selection=best, ratio_metric=0.0)


def estimate_gob_abp(channel: ChannelRealization, codebook: SteeringCodebook,
                     snr: float, rng) -> EstimationReport:
    """Narrow-beam sweep refined by the power ratio of the two strongest neighbors.

    Pairs the strongest beam with its larger-power neighbor (the single
    available one at the codebook edges); the pair center is the boresight
    midpoint and the pair half width is half their spacing. Reuses the sweep
    powers, so the budget equals the codebook size.
    """
    rx = _rx_steering(channel)
    h_row = rx.conj() @ channel.matrix()
    chi = np.abs(_sweep(h_row, codebook.matrix, rx, snr, rng)) ** 2
    best = int(np.argmax(chi))
    neighbors = [i for i in (best - 1, best + 1) if 0 <= i < codebook.num_beams]
    if not neighbors:
        mu_hat = float(codebook.boresights[best])
        zeta = 0.0
    else:
        other = max(neighbors, key=lambda i: chi[i])
        lo, hi = min(best, other), max(best, other)
        center = 0.5 * float(codebook.boresights[lo] + codebook.boresights[hi])
        half = 0.5 * float(codebook.boresights[hi] - codebook.boresights[lo])
        try:
            zeta = ratio_metric(float(chi[lo]), float(chi[hi]))
        except DegenerateSoundingError:
            zeta = 0.0
        mu_hat = invert_ratio(zeta, half, center)
    est_deg, est_sf = _clamped_estimate(mu_hat, codebook.geometry)
    return EstimationReport(estimate_deg=est_deg, estimate_sf=est_sf,
                            soundings_used=codebook.num_beams,
                            stage1_selection=best, ratio_metric=zeta)
