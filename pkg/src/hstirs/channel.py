"""Deterministic geometry, channel, SNR and rate model.

Link chain: base station -> IRS panel carried by the UAV -> train receivers.
Coordinates are right-handed with ``z`` as altitude. The path-loss law is
treated as a power gain; channel amplitudes are its square root.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateGeometryError, DomainError

_EPS_DIST = 1e-9


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build a finite float64 position vector from a triple or three scalars."""
    if y is None and z is None:
        arr = np.asarray(x, dtype=float).reshape(-1)
    else:
        arr = np.array([x, y, z], dtype=float)
    if arr.shape != (3,):
        raise DomainError(f"expected 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"non-finite position {arr}")
    return arr


@dataclass(frozen=True)
class IrsPanel:
    """Rectangular reflector grid mounted on the UAV.

    ``normal`` is the boresight direction; the default points straight down
    because the base station and trains are on the ground.
    """

    grid_nx: int = 10
    grid_ny: int = 10
    spacing_x: float = 0.01
    spacing_y: float = 0.01
    amplitude: float = 1.0
    normal: tuple = (0.0, 0.0, -1.0)

    def __post_init__(self):
        if int(self.grid_nx) < 1 or int(self.grid_ny) < 1:
            raise DomainError("panel grid must have at least one reflector")
        if self.spacing_x <= 0 or self.spacing_y <= 0:
            raise DomainError("reflector spacing must be positive")
        if not 0 < self.amplitude <= 1:
            raise DomainError("amplitude reflection coefficient must lie in (0, 1]")
        n = np.asarray(self.normal, dtype=float)
        norm = np.linalg.norm(n)
        if n.shape != (3,) or not np.isfinite(norm) or norm == 0:
            raise DomainError(f"invalid panel normal {self.normal}")
        object.__setattr__(self, "normal", tuple(float(v) for v in n / norm))

    @property
    def n_reflectors(self) -> int:
        return int(self.grid_nx) * int(self.grid_ny)

    def basis(self):
        """Orthonormal in-plane axes ``(u1, u2)`` with ``u1 x u2 = normal``."""
        n = np.asarray(self.normal)
        helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        u1 = helper - np.dot(helper, n) * n
        u1 /= np.linalg.norm(u1)
        u2 = np.cross(n, u1)
        return u1, u2

    def offsets(self) -> np.ndarray:
        """Reflector offsets from the panel centre, shape ``(N, 3)``.

        Reflector ``n`` sits at column ``n % grid_nx`` and row ``n // grid_nx``.
        """
        u1, u2 = self.basis()
        ix = (np.arange(self.grid_nx) - (self.grid_nx - 1) / 2.0) * self.spacing_x
        iy = (np.arange(self.grid_ny) - (self.grid_ny - 1) / 2.0) * self.spacing_y
        gx, gy = np.meshgrid(ix, iy)
        return gx.reshape(-1, 1) * u1 + gy.reshape(-1, 1) * u2


@dataclass
class ChannelGeometry:
    d_bu: float
    d_um: np.ndarray
    theta_t: float
    phi_t: float
    theta_r: np.ndarray
    phi_r: np.ndarray
    d_bu_n: np.ndarray
    d_nm: np.ndarray
    reflectors: np.ndarray = field(repr=False, default=None)


@dataclass
class CascadedLink:
    """Per reflector/train cascaded amplitude ``g[n, m]`` and path phase ``psi[n, m]``."""

    amplitude: np.ndarray
    path_phase: np.ndarray

    @property
    def shape(self):
        return self.amplitude.shape


def radiation_pattern(theta, phi=0.0):
    """Normalised power pattern of one reflector: ``cos(theta)**3`` on the
    front hemisphere and zero behind it. Independent of ``phi``.
    """
    th = np.asarray(theta, dtype=float)
    ph = np.asarray(phi, dtype=float)
    if np.any(~np.isfinite(th)) or np.any(th < 0) or np.any(th > np.pi):
        raise DomainError(f"elevation must lie in [0, pi], got {theta}")
    if np.any(~np.isfinite(ph)) or np.any(ph < 0) or np.any(ph >= 2 * np.pi):
        raise DomainError(f"azimuth must lie in [0, 2pi), got {phi}")
    out = np.where(th <= np.pi / 2, np.cos(th) ** 3, 0.0)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def path_power_gain(d, rho0, d0, delta):
    """Distance-dependent power gain ``rho0 * (d / d0) ** -delta``."""
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise DomainError("distance must be positive")
    if not (d0 > 0 and rho0 > 0):
        raise DomainError("reference distance and reference gain must be positive")
    out = rho0 * (d / d0) ** (-delta)
    return float(out) if out.ndim == 0 else out


def _angles(direction, normal, u1, u2):
    unit = direction / np.linalg.norm(direction, axis=-1, keepdims=True)
    cos_el = np.clip(unit @ normal, -1.0, 1.0)
    theta = np.arccos(cos_el)
    phi = np.mod(np.arctan2(unit @ u2, unit @ u1), 2 * np.pi)
    # mod can round up to exactly 2pi for tiny negative angles
    phi = np.where(phi >= 2 * np.pi, 0.0, phi)
    return theta, phi


def compute_geometry(bs, uav, hsts, panel: IrsPanel) -> ChannelGeometry:
    """Distances and pattern angles measured at the IRS centre (the UAV position)."""
    bs = vec3(bs)
    uav = vec3(uav)
    hsts = np.atleast_2d(np.asarray(hsts, dtype=float))
    if hsts.shape[1] != 3 or hsts.shape[0] < 1:
        raise DomainError(f"train positions must have shape (M, 3), got {hsts.shape}")
    if uav[2] <= 0:
        raise DegenerateGeometryError(f"UAV must be strictly above ground, z={uav[2]}")

    normal = np.asarray(panel.normal)
    u1, u2 = panel.basis()
    reflectors = uav + panel.offsets()

    to_bs = bs - uav
    to_hst = hsts - uav
    d_bu = float(np.linalg.norm(to_bs))
    d_um = np.linalg.norm(to_hst, axis=1)
    d_bu_n = np.linalg.norm(bs - reflectors, axis=1)
    d_nm = np.linalg.norm(hsts[None, :, :] - reflectors[:, None, :], axis=2)
    if d_bu < _EPS_DIST or np.any(d_um < _EPS_DIST) or np.any(d_bu_n < _EPS_DIST) or np.any(d_nm < _EPS_DIST):
        raise DegenerateGeometryError("base station or train coincides with the IRS")

    theta_t, phi_t = _angles(to_bs, normal, u1, u2)
    theta_r, phi_r = _angles(to_hst, normal, u1, u2)
    return ChannelGeometry(
        d_bu=d_bu, d_um=d_um, theta_t=float(theta_t), phi_t=float(phi_t),
        theta_r=theta_r, phi_r=phi_r, d_bu_n=d_bu_n, d_nm=d_nm, reflectors=reflectors,
    )


def cascaded_link(geom: ChannelGeometry, panel: IrsPanel, cfg) -> CascadedLink:
    """Amplitude and phase of every BS -> reflector -> train path.

    ``cfg`` needs ``rho0, d0, delta_bu, delta_ut, wavelength``. The pattern
    factors enter the amplitude product as they appear inside the squared
    magnitude of the SNR expression.
    """
    f_t = radiation_pattern(geom.theta_t, geom.phi_t)
    f_r = radiation_pattern(geom.theta_r, geom.phi_r)
    g_bu = np.sqrt(path_power_gain(geom.d_bu_n, cfg.rho0, cfg.d0, cfg.delta_bu))
    g_um = np.sqrt(path_power_gain(geom.d_nm, cfg.rho0, cfg.d0, cfg.delta_ut))
    amplitude = f_t * np.asarray(f_r)[None, :] * panel.amplitude * g_bu[:, None] * g_um
    total = geom.d_bu_n[:, None] + geom.d_nm
    phase = np.mod(2 * np.pi * total / cfg.wavelength, 2 * np.pi)
    phase = np.where(phase >= 2 * np.pi, 0.0, phase)
    return CascadedLink(amplitude=amplitude, path_phase=phase)


def snr_for_train(link: CascadedLink, m: int, indicator_column, phases, p, sigma2) -> float:
    """Coherent SNR of train ``m`` from the reflectors assigned to it.

    Unassigned reflectors contribute nothing to this train's channel.
    """
    if not sigma2 > 0:
        raise DomainError("noise power must be positive")
    mask = np.asarray(indicator_column, dtype=bool)
    theta = np.asarray(phases, dtype=float)
    terms = link.amplitude[mask, m] * np.exp(1j * (theta[mask] - link.path_phase[mask, m]))
    return float(p * abs(terms.sum()) ** 2 / sigma2)


def snr_all(link: CascadedLink, indicator, phases, p, sigma2) -> np.ndarray:
    """Vectorised :func:`snr_for_train` for every train, shape ``(M,)``."""
    if not sigma2 > 0:
        raise DomainError("noise power must be positive")
    ind = np.asarray(indicator, dtype=float)
    theta = np.asarray(phases, dtype=float)[:, None]
    field_ = (ind * link.amplitude * np.exp(1j * (theta - link.path_phase))).sum(axis=0)
    return p * np.abs(field_) ** 2 / sigma2


def rate(gamma, bandwidth):
    """Shannon rate ``B log2(1 + gamma)`` in bits/s."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise DomainError("SNR must be non-negative")
    if not bandwidth > 0:
        raise DomainError("bandwidth must be positive")
    out = bandwidth * np.log1p(g) / np.log(2.0)
    return float(out) if out.ndim == 0 else out


def per_reflector_rate_matrix(link: CascadedLink, p, sigma2, bandwidth) -> np.ndarray:
    """``R[n, m]``: rate train ``m`` would get from reflector ``n`` alone."""
    if not sigma2 > 0:
        raise DomainError("noise power must be positive")
    return rate(p * link.amplitude ** 2 / sigma2, bandwidth)
