"""
Removal of the parts of a single clockwise loop that lie inside Omega.

The loop is split at the unique crossing of phi = phi(t0) - pi. On the first half (cos phi >= 0,
where only Omega_plus can be met) every azimuth a keeps the lowest sampled point outside Omega;
on the second half (cos phi <= 0, Omega_minus) it keeps the highest. The kept points form a
continuous curve outside Omega with the endpoints of the loop.
"""
import logging
from typing import Tuple

import numpy as np

from app.core.domain.models import require
from app.core.domain.sphere import EPS_BOUNDARY, _arc, region_codes
from app.core.domain.sphere_models import SphericalTrack

logger = logging.getLogger(__name__)

PHASE_TOL = 1e-9


def _crossings(phi: np.ndarray, theta: np.ndarray, azimuths: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Every point where the polyline (phi, theta) meets one of the sorted `azimuths`.

    Returns azimuth indices, interpolated theta values and the index of the segment they lie on.
    """
    idx, values, segs = [], [], []
    for k in range(len(phi) - 1):
        lo, hi = sorted((phi[k], phi[k + 1]))
        first = np.searchsorted(azimuths, lo, side="left")
        last = np.searchsorted(azimuths, hi, side="right")
        if first >= last:
            continue
        hit = np.arange(first, last)
        span = phi[k + 1] - phi[k]
        w = np.zeros(len(hit)) if span == 0.0 else (azimuths[hit] - phi[k]) / span
        idx.append(hit)
        values.append(theta[k] + w * (theta[k + 1] - theta[k]))
        segs.append(np.full(len(hit), k))
    if not idx:
        return np.empty(0, int), np.empty(0), np.empty(0, int)
    return np.concatenate(idx), np.concatenate(values), np.concatenate(segs)


def _envelope(phi: np.ndarray, theta: np.ndarray, azimuths: np.ndarray, lower: bool, eps_boundary: float) -> np.ndarray:
    """Lower (or upper) envelope over the track points outside Omega, one value per azimuth."""
    idx, values, segs = _crossings(phi, theta, azimuths)
    ct = np.cos(values)
    points = np.column_stack([ct * np.cos(azimuths[idx]), ct * np.sin(azimuths[idx]), np.sin(values)])
    outside = region_codes(points, eps_boundary) >= 2

    fill = np.inf if lower else -np.inf
    envelope = np.full(len(azimuths), fill)
    pick = np.minimum if lower else np.maximum
    pick.at(envelope, idx[outside], values[outside])

    # Discretization can leave an azimuth without an outside crossing; fall back to the last
    # crossing, where phi is non-increasing and the direction cannot be inside Omega.
    empty = ~np.isfinite(envelope)
    if empty.any():
        last = np.full(len(azimuths), -1)
        np.maximum.at(last, idx, segs)
        for j in np.nonzero(empty)[0]:
            k = int(last[j])
            span = phi[k + 1] - phi[k]
            w = 0.0 if span == 0.0 else (azimuths[j] - phi[k]) / span
            envelope[j] = theta[k] + w * (theta[k + 1] - theta[k])
    return envelope


def _split_at(track: SphericalTrack, phi_half: float) -> int:
    """Index of the first sample at or below phi_half."""
    below = np.nonzero(track.phi <= phi_half + PHASE_TOL)[0]
    require(len(below) > 0, "track never reaches phi(t0) - pi")
    return int(below[0])


def _surgered(track: SphericalTrack, stride: int, eps_boundary: float) -> Tuple[np.ndarray, np.ndarray]:
    phi0, phi_end = float(track.phi[0]), float(track.phi[-1])
    k = _split_at(track, phi0 - np.pi)
    phi_half = max(phi0 - np.pi, float(track.phi[k]))

    # Both halves share the crossing of phi_half.
    if track.phi[k] < phi_half:
        w = (phi_half - track.phi[k - 1]) / (track.phi[k] - track.phi[k - 1])
        theta_half = track.theta[k - 1] + w * (track.theta[k] - track.theta[k - 1])
        phi_a = np.append(track.phi[:k], phi_half)
        theta_a = np.append(track.theta[:k], theta_half)
        phi_b = np.insert(track.phi[k:], 0, phi_half)
        theta_b = np.insert(track.theta[k:], 0, theta_half)
    else:
        phi_a, theta_a = track.phi[: k + 1], track.theta[: k + 1]
        phi_b, theta_b = track.phi[k:], track.theta[k:]

    pieces = []
    for phi, theta, lower, top, bottom in (
        (phi_a, theta_a, True, phi0, phi_half),
        (phi_b, theta_b, False, phi_half, phi_end),
    ):
        inner = np.unique(phi[(phi > bottom) & (phi < top)])[::stride]
        azimuths = np.concatenate([[bottom], inner, [top]])
        pieces.append((azimuths[::-1], _envelope(phi, theta, azimuths, lower, eps_boundary)[::-1]))

    (grid_a, env_a), (grid_b, env_b) = pieces
    phi_out = np.concatenate([grid_a, grid_b[1:]])
    theta_out = np.concatenate([env_a, env_b[1:]])
    theta_out[0], theta_out[-1] = track.theta[0], track.theta[-1]
    return phi_out, theta_out


def _length(phi: np.ndarray, theta: np.ndarray) -> float:
    ct = np.cos(theta)
    return float(np.sum(_arc(np.column_stack([ct * np.cos(phi), ct * np.sin(phi), np.sin(theta)]))))


def surger(track: SphericalTrack, eps_boundary: float = EPS_BOUNDARY) -> SphericalTrack:
    """
    Continuous curve outside Omega made of pieces of a single clockwise loop.

    The loop must start at phi = pi/2 (mod 2 pi), end one full turn lower and avoid the poles.
    The result is sampled on the loop's own azimuths; `slack` is the change in length when
    every other azimuth is dropped, a measure of the discretization error.
    """
    require(len(track) >= 3, "track needs at least three samples")
    require(not track.pole_events, "track passes through a pole")
    phi0, phi1 = float(track.phi[0]), float(track.phi[-1])
    require(
        abs(np.mod(phi0 - np.pi / 2 + np.pi, 2 * np.pi) - np.pi) <= PHASE_TOL,
        f"track must start at phi = pi/2 (mod 2 pi), got {phi0!r}",
    )
    require(abs(phi1 - (phi0 - 2 * np.pi)) <= PHASE_TOL, f"track must make one clockwise turn, got {phi0 - phi1!r}")

    phi_out, theta_out = _surgered(track, 1, eps_boundary)
    phi_half, theta_half = _surgered(track, 2, eps_boundary)
    slack = abs(_length(phi_out, theta_out) - _length(phi_half, theta_half))
    logger.debug(f"surgery kept {len(phi_out)} of {len(track)} samples, slack {slack:.2e}")
    return SphericalTrack(
        t=np.linspace(float(track.t[0]), float(track.t[-1]), len(phi_out)),
        phi=phi_out,
        theta=theta_out,
        slack=slack,
    )
