"""Steering-beam codebooks, flat-top widebeam synthesis, and auxiliary beam pairs.

A widebeam is a linear combination of steering vectors: an analog matrix with
columns a(gamma), a(gamma+xi_1), a(gamma-xi_1), ... and a baseband vector
[c0, c1, c1*, c2, c2*, ...] whose magnitudes are non-increasing. The half
width delta of an "adequate" widebeam is k*pi/N for a positive integer k, so
that the two pair beams at gamma +- delta sit exactly on the beam edges.
"""

import csv
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arrays import ArrayGeometry, angle_to_spatial, spatial_to_angle, steering, steering_matrix

__all__ = [
    "SynthesisError",
    "WidebeamPrecoder",
    "WidebeamCodebook",
    "SteeringCodebook",
    "AbpPair",
    "is_adequate",
    "beam_power_pattern",
    "synthesize_widebeam",
    "build_widebeam_codebook",
    "build_steering_codebook",
    "build_abp",
    "write_pattern_csv",
    "write_codebook_csv",
]

DEFAULT_N_RF = 5
DEFAULT_ADEQUACY_K = 2
# search/evaluation resolution for the widebeam optimizer
XI_GRID_STEPS = 24
EVAL_POINTS = 2048


class SynthesisError(RuntimeError):
    """Widebeam optimizer found no candidate meeting the -3 dB flat-top floor.

    Carries the best candidate found (a WidebeamPrecoder) in `best`.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True, eq=False)
class WidebeamPrecoder:
    """Unit-norm widebeam: analog steering columns times a baseband vector."""

    boresight: float
    half_width: float
    offsets: tuple  # xi_i offsets of the analog columns, symmetric about 0
    analog_matrix: np.ndarray  # N x n_rf, columns a(boresight + offset)
    baseband_vector: np.ndarray  # n_rf complex weights [c0, c1, c1*, ...]
    combined: np.ndarray  # unit-norm N-vector analog_matrix @ baseband_vector
    geometry: ArrayGeometry


@dataclass(frozen=True, eq=False)
class WidebeamCodebook:
    """Uniformly spaced widebeams sharing one half width over a spatial-frequency span."""

    beams: tuple
    span: tuple  # (lo, hi) spatial frequency interval covered
    k: int | None  # adequacy integer, None when the half width is not k*pi/N
    geometry: ArrayGeometry

    @property
    def half_width(self) -> float:
        return self.beams[0].half_width

    @property
    def boresights(self) -> np.ndarray:
        return np.array([b.boresight for b in self.beams])

    def combined_matrix(self) -> np.ndarray:
        """All combined precoders as columns, shape (N, J)."""
        return np.stack([b.combined for b in self.beams], axis=1)


@dataclass(frozen=True, eq=False)
class SteeringCodebook:
    """Grid of narrow steering beams uniformly spaced in spatial frequency."""

    boresights: np.ndarray
    matrix: np.ndarray  # N x num_beams steering vectors
    geometry: ArrayGeometry

    @property
    def num_beams(self) -> int:
        return len(self.boresights)


@dataclass(frozen=True, eq=False)
class AbpPair:
    """Two steering beams at center -+ delta used for the ratio-metric stage."""

    center: float
    delta: float
    beam_minus: np.ndarray
    beam_plus: np.ndarray


def is_adequate(delta: float, num_elements: int):
    """Check delta = k*pi/N for a positive integer k; returns (bool, k or None)."""
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    ratio = delta * num_elements / np.pi
    k = int(round(ratio))
    if k >= 1 and abs(ratio - k) <= 1e-9:
        return True, k
    return False, None


def beam_power_pattern(precoder: np.ndarray, grid) -> np.ndarray:
    """Power pattern |a(mu)^H precoder|^2 over a spatial-frequency grid."""
    precoder = np.asarray(precoder)
    nrm = np.linalg.norm(precoder)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"precoder must be unit norm, got ||.|| = {nrm!r}")
    geom = ArrayGeometry(len(precoder))
    resp = steering_matrix(grid, geom).conj().T @ precoder
    return np.abs(resp) ** 2


def _pattern_grid(num_points: int) -> np.ndarray:
    """Uniform grid over (-pi, pi) that contains 0 exactly."""
    return (np.arange(num_points) - num_points // 2) * (2.0 * np.pi / num_points)


def _project_nonincreasing(mags):
    """Least-squares projection onto m_0 >= m_1 >= ... >= 0 (pool adjacent violators)."""
    blocks = []
    for m in mags:
        blocks.append([float(m), 1])
        while len(blocks) > 1 and blocks[-2][0] < blocks[-1][0]:
            total = blocks[-2][0] * blocks[-2][1] + blocks[-1][0] * blocks[-1][1]
            count = blocks[-2][1] + blocks[-1][1]
            blocks[-2:] = [[total / count, count]]
    out = []
    for mean, count in blocks:
        out.extend([max(mean, 0.0)] * count)
    return out


@lru_cache(maxsize=64)
def _synthesize_centered(num_elements: int, n_rf: int, delta: float):
    """Optimize a flat-top widebeam at boresight 0; returns (offsets, baseband, combined).

    Grid search over the symmetric column offsets xi_i in (0, 2*delta]; for each
    candidate, least-squares fit of the baseband weights to an ideal flat-top
    field (unit gain inside [-delta, delta], zero outside), projection onto the
    non-increasing magnitude ordering, then renormalization. Candidates whose
    pattern does not peak at the boresight are discarded; the winner maximizes
    the in-band minimum gain, ties broken by lowest peak sidelobe.
    """
    n = num_elements
    geom = ArrayGeometry(n)
    if n_rf == 1:
        return (0.0,), np.array([1.0 + 0.0j]), steering(0.0, geom)
    if n_rf < 3 or n_rf % 2 == 0:
        raise ValueError(f"n_rf must be odd and >= 3 (or exactly 1), got {n_rf}")
    n_pairs = (n_rf - 1) // 2

    fit_points = max(64 * n // 16, 16 * n)
    fit_grid = np.linspace(-np.pi, np.pi, fit_points, endpoint=False)
    fit_resp = steering_matrix(fit_grid, geom)
    # flat-top target field: unit in-band amplitude with the aperture-centered phase ramp
    target = np.where(np.abs(fit_grid) <= delta, np.exp(-1j * (n - 1) / 2 * fit_grid), 0.0)
    target_ri = np.concatenate([target.real, target.imag])

    eval_grid = _pattern_grid(EVAL_POINTS)
    eval_resp = steering_matrix(eval_grid, geom)
    center_idx = EVAL_POINTS // 2
    in_band = np.abs(eval_grid) <= delta
    far_out = np.abs(eval_grid) > delta + 2.0 * np.pi / n

    xi_values = np.linspace(2.0 * delta / XI_GRID_STEPS, 2.0 * delta, XI_GRID_STEPS)
    candidates = []
    for combo in itertools.combinations(xi_values, n_pairs):
        offsets = (0.0,) + tuple(s for xi in combo for s in (xi, -xi))
        analog = steering_matrix(offsets, geom)
        # real parametrization: c0 real (global phase), then Re/Im of each c_i
        basis = [analog[:, 0]]
        for i in range(n_pairs):
            plus, minus = analog[:, 1 + 2 * i], analog[:, 2 + 2 * i]
            basis.append(plus + minus)
            basis.append(1j * (plus - minus))
        resp = fit_resp.conj().T @ np.stack(basis, axis=1)
        design = np.vstack([resp.real, resp.imag])
        theta, *_ = np.linalg.lstsq(design, target_ri, rcond=None)
        sign = 1.0 if theta[0] >= 0 else -1.0
        c = [sign * (theta[1 + 2 * i] + 1j * theta[2 + 2 * i]) for i in range(n_pairs)]
        mags = _project_nonincreasing([abs(theta[0])] + [abs(x) for x in c])
        c = [ci * (m / abs(ci)) if abs(ci) > 0 else 0.0j for ci, m in zip(c, mags[1:])]
        baseband = np.array([complex(mags[0])] + [v for ci in c for v in (ci, np.conj(ci))])
        combined = analog @ baseband
        nrm = np.linalg.norm(combined)
        if nrm < 1e-12:
            continue
        candidates.append((offsets, baseband / nrm, combined / nrm))

    if not candidates:
        raise SynthesisError(f"no usable widebeam candidate for N={n}, n_rf={n_rf}, delta={delta!r}")

    patterns = np.abs(eval_resp.conj().T @ np.stack([c[2] for c in candidates], axis=1)) ** 2
    boresight_gain = patterns[center_idx]
    peak_gain = patterns.max(axis=0)
    center_peaked = boresight_gain >= peak_gain - 1e-12
    in_band_min = patterns[in_band].min(axis=0)
    sidelobe = patterns[far_out].max(axis=0)

    order = np.lexsort((sidelobe, -in_band_min))
    best_overall = order[0]
    eligible = [i for i in order if center_peaked[i]]
    winner = eligible[0] if eligible else None
    if winner is None or in_band_min[winner] <= 0.5 * boresight_gain[winner]:
        idx = winner if winner is not None else best_overall
        best = _make_precoder(0.0, delta, candidates[idx], geom)
        raise SynthesisError(
            f"flat-top synthesis failed for N={n}, n_rf={n_rf}, delta={delta!r}: "
            f"in-band minimum {in_band_min[idx]:.4g} vs boresight {boresight_gain[idx]:.4g}",
            best=best,
        )
    return candidates[winner]


def _make_precoder(boresight, delta, candidate, geom) -> WidebeamPrecoder:
    offsets, baseband, combined0 = candidate
    ramp = np.exp(1j * np.arange(geom.num_elements) * boresight)
    return WidebeamPrecoder(
        boresight=float(boresight),
        half_width=float(delta),
        offsets=offsets,
        analog_matrix=steering_matrix([boresight + o for o in offsets], geom),
        baseband_vector=baseband,
        combined=ramp * combined0,
        geometry=geom,
    )


def synthesize_widebeam(boresight: float, half_width: float, n_rf: int,
                        geometry: ArrayGeometry, allow_nonadequate: bool = False) -> WidebeamPrecoder:
    """Synthesize one flat-top widebeam at `boresight` with the given half width.

    The beam is optimized once at boresight 0 and translated by a per-element
    phase ramp, so patterns at different boresights are exact translates.
    """
    adequate, _ = is_adequate(half_width, geometry.num_elements)
    if not adequate and not allow_nonadequate:
        raise ValueError(
            f"half_width {half_width!r} is not k*pi/N for N={geometry.num_elements}; "
            "pass allow_nonadequate=True for a non-adequate beam"
        )
    candidate = _synthesize_centered(geometry.num_elements, n_rf, float(half_width))
    return _make_precoder(float(boresight), float(half_width), candidate, geometry)


def build_widebeam_codebook(span_deg, geometry: ArrayGeometry, n_rf: int = DEFAULT_N_RF,
                            num_beams: int | None = None, k: int | None = None,
                            delta_scale: float = 1.0) -> WidebeamCodebook:
    """Tile an angular span with uniformly spaced widebeams of one half width.

    Boresights are uniform in spatial frequency and centered on the span
    (outermost beams half a spacing from the edges). With `num_beams` given,
    the half width is the smallest adequate k*pi/N whose beamwidth 2*delta
    covers the spacing; otherwise k defaults to 2 and the beam count is the
    smallest that covers the span. `delta_scale` != 1 scales the half width
    away from the adequate grid (the non-adequate baseline).
    """
    lo = angle_to_spatial(span_deg[0], geometry)
    hi = angle_to_spatial(span_deg[1], geometry)
    if not hi > lo:
        raise ValueError(f"empty span {span_deg}")
    n = geometry.num_elements
    width = hi - lo

    if num_beams is not None:
        if num_beams < 1:
            raise ValueError(f"num_beams must be >= 1, got {num_beams}")
        count = num_beams
        spacing = width / count
        k_eff = k if k is not None else max(1, int(np.ceil(spacing * n / (2.0 * np.pi) - 1e-9)))
    else:
        k_eff = k if k is not None else DEFAULT_ADEQUACY_K
        delta0 = delta_scale * k_eff * np.pi / n
        count = max(1, int(np.ceil(width / (2.0 * delta0) - 1e-9)))
        spacing = width / count
    delta = delta_scale * k_eff * np.pi / n

    adequate, k_found = is_adequate(delta, n)
    boresights = lo + (np.arange(count) + 0.5) * spacing
    candidate = _synthesize_centered(n, n_rf, float(delta))
    beams = tuple(_make_precoder(g, delta, candidate, geometry) for g in boresights)
    return WidebeamCodebook(beams=beams, span=(lo, hi),
                            k=k_found if adequate else None, geometry=geometry)


def build_steering_codebook(span_deg, num_beams: int, geometry: ArrayGeometry) -> SteeringCodebook:
    """Uniform grid of narrow steering beams over a span (the grid-of-beams codebook)."""
    if num_beams < 1:
        raise ValueError(f"num_beams must be >= 1, got {num_beams}")
    lo = angle_to_spatial(span_deg[0], geometry)
    hi = angle_to_spatial(span_deg[1], geometry)
    if not hi > lo:
        raise ValueError(f"empty span {span_deg}")
    spacing = (hi - lo) / num_beams
    boresights = lo + (np.arange(num_beams) + 0.5) * spacing
    return SteeringCodebook(boresights=boresights,
                            matrix=steering_matrix(boresights, geometry),
                            geometry=geometry)


def build_abp(center: float, delta: float, geometry: ArrayGeometry) -> AbpPair:
    """Auxiliary beam pair: steering beams at center - delta and center + delta."""
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    return AbpPair(center=float(center), delta=float(delta),
                   beam_minus=steering(center - delta, geometry),
                   beam_plus=steering(center + delta, geometry))


def _fmt(x) -> str:
    return repr(float(x))


def write_pattern_csv(path, precoder: np.ndarray, geometry: ArrayGeometry,
                      grid_points: int = 1024) -> None:
    """Write the power pattern of a precoder over the visible range as CSV."""
    grid = _pattern_grid(grid_points)
    power = beam_power_pattern(precoder, grid)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["spatial_freq_rad", "angle_deg", "power_linear", "power_db"])
        for sf, p in zip(grid, power):
            p_db = 10.0 * np.log10(max(p, 1e-300))
            writer.writerow([_fmt(sf), _fmt(spatial_to_angle(sf, geometry)), _fmt(p), _fmt(p_db)])


def write_codebook_csv(path, codebook: WidebeamCodebook) -> None:
    """Write one row per widebeam: boresight, half width, adequacy k, combined weights."""
    n = codebook.geometry.num_elements
    header = ["beam_index", "boresight_rad", "half_width_rad", "k"]
    header += [f"weights_re[{i}]" for i in range(n)] + [f"weights_im[{i}]" for i in range(n)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for idx, beam in enumerate(codebook.beams):
            row = [str(idx), _fmt(beam.boresight), _fmt(beam.half_width),
                   "" if codebook.k is None else str(codebook.k)]
            row += [_fmt(v) for v in beam.combined.real] + [_fmt(v) for v in beam.combined.imag]
            writer.writerow(row)
