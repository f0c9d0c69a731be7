"""Input-output transmission: |S21| maps, line cuts, and peak extraction.

The scattering model is S21 = d2^T M(omega)^-1 d1 with
M(omega) = i (H(omega_m) - omega I) + Gamma / 2, where Gamma is the diagonal
matrix of total linewidths (intrinsic plus external over both ports, in GHz)
and d_p carries sqrt(kappa_ext) on the photon rows port p couples to.  All
quantities are linear frequencies: GHz inside the matrices, MHz in the user
facing rate fields.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .model import SystemModel, build_hamiltonian

DEFAULT_PHOTON_LOSS_MHZ = 5.0
DEFAULT_MAGNON_LOSS_MHZ = 2.0


@dataclass(frozen=True)
class PortSpec:
    """External coupling of one measurement port.

    Args:
        port: port id, 1 (drive) or 2 (readout).
        couplings: map photon label -> external rate in MHz.  When given, the
            port couples only to the listed photons.  When None, every photon
            uses its mode-level external rate, falling back to the intrinsic
            rate when that is unset too.
    """

    port: int
    couplings: dict | None = None

    def __post_init__(self):
        if self.port not in (1, 2):
            raise ValueError("port id must be 1 or 2")
        if self.couplings is not None:
            couplings = dict(self.couplings)
            for label, rate in couplings.items():
                if not rate >= 0:
                    raise ValueError(
                        "port %d: external rate for %r must be >= 0 MHz"
                        % (self.port, label)
                    )
            object.__setattr__(self, "couplings", couplings)


@dataclass(frozen=True, eq=False)
class TransmissionMap:
    """20*log10|S21| on an (omega, omega_m) grid, rows indexed by omega."""

    omega_grid: np.ndarray
    omega_m_grid: np.ndarray
    magnitude_db: np.ndarray
    defaults_applied: tuple = ()

    def __post_init__(self):
        omega = _validated_axis(self.omega_grid, "omega_grid")
        omega_m = _validated_axis(self.omega_m_grid, "omega_m_grid")
        mags = np.asarray(self.magnitude_db, dtype=np.float64)
        object.__setattr__(self, "omega_grid", omega)
        object.__setattr__(self, "omega_m_grid", omega_m)
        object.__setattr__(self, "magnitude_db", mags)
        object.__setattr__(self, "defaults_applied", tuple(self.defaults_applied))
        if mags.shape != (len(omega), len(omega_m)):
            raise ValueError("magnitude_db must have shape (len(omega), len(omega_m))")
        if not np.all(np.isfinite(mags)):
            raise ValueError("magnitude_db entries must be finite")


def _validated_axis(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("%s must be a non-empty 1-d array" % name)
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError("%s must be strictly increasing" % name)
    return arr


def _ordered_ports(ports):
    specs = tuple(ports)
    if len(specs) != 2:
        raise ValueError("expected exactly two port specifications")
    by_id = {spec.port: spec for spec in specs}
    if set(by_id) != {1, 2}:
        raise ValueError("ports must carry the distinct ids 1 and 2")
    return by_id[1], by_id[2]


def _loss_model(system: SystemModel, port1: PortSpec, port2: PortSpec):
    """Total linewidths (GHz) and port drive vectors, with defaults recorded."""
    photons = set(system.photon_labels())
    for spec in (port1, port2):
        if spec.couplings is None:
            continue
        for label in spec.couplings:
            if label not in photons:
                raise ValueError(
                    "port %d: %r is not a photon mode of the system"
                    % (spec.port, label)
                )
    n = len(system.modes)
    gamma = np.zeros(n)
    drives = {1: np.zeros(n), 2: np.zeros(n)}
    defaults = []
    for i, mode in enumerate(system.modes):
        if mode.intrinsic_loss is not None:
            kappa_int = mode.intrinsic_loss
        else:
            kappa_int = (
                DEFAULT_PHOTON_LOSS_MHZ
                if mode.kind == "photon"
                else DEFAULT_MAGNON_LOSS_MHZ
            )
            defaults.append(
                "%s: intrinsic loss defaulted to %g MHz" % (mode.label, kappa_int)
            )
        total = kappa_int
        if mode.kind == "photon":
            for spec in (port1, port2):
                if spec.couplings is not None:
                    kappa_ext = spec.couplings.get(mode.label, 0.0)
                elif mode.external_loss is not None:
                    kappa_ext = mode.external_loss
                else:
                    kappa_ext = kappa_int
                    defaults.append(
                        "%s: port %d external rate defaulted to intrinsic %g MHz"
                        % (mode.label, spec.port, kappa_int)
                    )
                drives[spec.port][i] = math.sqrt(kappa_ext * 1e-3)
                total += kappa_ext
        if total <= 0:
            raise ValueError("mode %r has zero total loss" % mode.label)
        gamma[i] = total * 1e-3
    for spec in (port1, port2):
        if not np.any(drives[spec.port] > 0):
            raise ValueError("port %d couples to no photon mode" % spec.port)
    return gamma, drives[1], drives[2], tuple(defaults)


def s21_at(system: SystemModel, ports, omega: float, omega_m: float) -> complex:
    """Complex S21 at a single probe frequency and magnon frequency (GHz)."""
    port1, port2 = _ordered_ports(ports)
    gamma, d1, d2, _ = _loss_model(system, port1, port2)
    h = build_hamiltonian(system, omega_m).entries
    n = h.shape[0]
    m = 1j * (h - omega * np.eye(n)) + np.diag(gamma) / 2.0
    return complex(d2 @ np.linalg.solve(m, d1))


def s21_map(system: SystemModel, ports, omega_grid, omega_m_grid) -> TransmissionMap:
    """Transmission magnitude map over probe and magnon frequency grids."""
    omega = _validated_axis(omega_grid, "omega_grid")
    omega_m = _validated_axis(omega_m_grid, "omega_m_grid")
    port1, port2 = _ordered_ports(ports)
    gamma, d1, d2, defaults = _loss_model(system, port1, port2)
    n = len(system.modes)
    eye = np.eye(n)
    mags = np.empty((omega.size, omega_m.size))
    for j, om_m in enumerate(omega_m):
        a = 1j * build_hamiltonian(system, float(om_m)).entries + np.diag(gamma) / 2.0
        m = a[None, :, :] - 1j * omega[:, None, None] * eye
        x = np.linalg.solve(m, d1[:, None])[..., 0]
        mags[:, j] = 20.0 * np.log10(np.abs(x @ d2))
    return TransmissionMap(omega, omega_m, mags, defaults)


# ====== peak extraction ======


def _parabola_vertex(xl, yl, x0, y0, xr, yr):
    # Lagrange form; caller guarantees y0 is a strict local maximum
    d1 = (y0 - yl) / (x0 - xl)
    d2 = (yr - y0) / (xr - x0)
    curvature = (d2 - d1) / (xr - xl)
    if curvature >= 0:
        return x0, y0
    vertex = 0.5 * (x0 + xl - d1 / curvature)
    vertex = min(max(vertex, xl), xr)
    value = y0 + curvature * (vertex - x0) * (vertex - xl) + d1 * (vertex - x0)
    return vertex, value


def extract_peaks(tmap: TransmissionMap, omega_m_index: int, prominence_floor_db: float = 3.0):
    """Refined local maxima of one map column, as (omega GHz, prominence dB).

    A sample counts as a peak when it exceeds the column mean by the
    prominence floor; its position and height are refined by a three point
    parabola and the prominence is quoted relative to the column mean.
    Boundary samples are never reported.
    """
    if not 0 <= omega_m_index < tmap.omega_m_grid.size:
        raise ValueError("omega_m_index %d out of range" % omega_m_index)
    column = tmap.magnitude_db[:, omega_m_index]
    mean = float(column.mean())
    indices, _ = find_peaks(column, height=mean + prominence_floor_db)
    omega = tmap.omega_grid
    peaks = []
    for i in indices:
        vertex, value = _parabola_vertex(
            omega[i - 1], column[i - 1], omega[i], column[i], omega[i + 1], column[i + 1]
        )
        peaks.append((float(vertex), float(value - mean)))
    return peaks


# ====== serialization ======


def map_to_csv(tmap: TransmissionMap) -> str:
    """Long-form CSV (omega_ghz, omega_m_ghz, s21_db), grouped by omega_m."""
    lines = ["omega_ghz,omega_m_ghz,s21_db"]
    for j, om_m in enumerate(tmap.omega_m_grid):
        for i, om in enumerate(tmap.omega_grid):
            lines.append(f"{om:.9g},{om_m:.9g},{tmap.magnitude_db[i, j]:.9g}")
    return "\n".join(lines) + "\n"


def line_cut_csv(tmap: TransmissionMap, omega_m_index: int, offset_db: float = 0.0) -> str:
    """Two-column CSV of one map column, with an optional presentation offset."""
    if not 0 <= omega_m_index < tmap.omega_m_grid.size:
        raise ValueError("omega_m_index %d out of range" % omega_m_index)
    lines = ["omega_ghz,s21_db"]
    for i, om in enumerate(tmap.omega_grid):
        lines.append(f"{om:.9g},{tmap.magnitude_db[i, omega_m_index] + offset_db:.9g}")
    return "\n".join(lines) + "\n"
