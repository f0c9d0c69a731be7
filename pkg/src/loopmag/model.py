"""Device description and Hamiltonian assembly for loop-coupled photon-magnon systems.

All frequencies are stored as linear frequencies (omega / 2pi): GHz for mode
frequencies, MHz for coupling strengths and loss rates.  The Hamiltonian matrix
is H / hbar expressed in GHz linear frequency.  The matrix entry
<photon|H|magnon> carries g * exp(-i*phase).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi

PHASE_STRINGS = {
    "pi/2": math.pi / 2.0,
    "-pi/2": -math.pi / 2.0,
    "pi": math.pi,
    "0": 0.0,
}


class SchemaError(ValueError):
    """A JSON document does not match the system schema; message is path-anchored."""


def fold_phase(x: float) -> float:
    """Fold an angle in radians into the interval (-pi, pi]."""
    return math.pi - (math.pi - x) % TWO_PI


def parse_phase(value) -> float:
    """Accept a phase as a number or one of the strings 'pi/2', '-pi/2', 'pi', '0'."""
    if isinstance(value, str):
        try:
            return PHASE_STRINGS[value]
        except KeyError:
            raise SchemaError(
                "phase_rad: unknown phase string %r (allowed: %s)"
                % (value, ", ".join(sorted(PHASE_STRINGS)))
            ) from None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise SchemaError("phase_rad: expected number or phase string, got %r" % (value,))


@dataclass(frozen=True)
class ModeSpec:
    """One bosonic mode.

    Args:
        label: unique mode name.
        kind: 'photon' or 'magnon'.
        frequency: mode frequency in GHz (linear).
        intrinsic_loss: full intrinsic linewidth in MHz, or None if unspecified.
        external_loss: per-port external linewidth in MHz (photons only), or None.
    """

    label: str
    kind: str
    frequency: float
    intrinsic_loss: float | None = None
    external_loss: float | None = None

    def __post_init__(self):
        if self.kind not in ("photon", "magnon"):
            raise ValueError("mode %r: kind must be 'photon' or 'magnon'" % self.label)
        if not self.frequency > 0:
            raise ValueError("mode %r: frequency must be > 0 GHz" % self.label)
        for name in ("intrinsic_loss", "external_loss"):
            rate = getattr(self, name)
            if rate is not None and rate < 0:
                raise ValueError("mode %r: %s must be >= 0 MHz" % (self.label, name))
        if self.kind == "magnon" and self.external_loss is not None:
            raise ValueError(
                "mode %r: magnons do not couple to ports, external_loss must be unset"
                % self.label
            )


@dataclass(frozen=True)
class CouplingEdge:
    """Directed photon->magnon coupling with strength g (MHz) and phase (rad).

    A negative strength is normalized on construction: the sign is absorbed
    into the phase as a pi shift.  The stored phase is folded into (-pi, pi].
    """

    photon: str
    magnon: str
    strength: float
    phase: float

    def __post_init__(self):
        strength = float(self.strength)
        phase = float(self.phase)
        if strength < 0:
            strength = -strength
            phase += math.pi
        object.__setattr__(self, "strength", strength)
        object.__setattr__(self, "phase", fold_phase(phase))


@dataclass(frozen=True)
class SystemModel:
    """Full device description: modes, coupling edges, and the swept magnon set."""

    modes: tuple
    edges: tuple
    magnon_sweep_target: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(
            self, "magnon_sweep_target", frozenset(self.magnon_sweep_target)
        )
        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError("mode labels must be unique")
        kinds = {m.label: m.kind for m in self.modes}
        seen_pairs = set()
        for e in self.edges:
            if kinds.get(e.photon) != "photon":
                raise ValueError("edge (%s, %s): %r is not a photon mode" % (e.photon, e.magnon, e.photon))
            if kinds.get(e.magnon) != "magnon":
                raise ValueError("edge (%s, %s): %r is not a magnon mode" % (e.photon, e.magnon, e.magnon))
            pair = (e.photon, e.magnon)
            if pair in seen_pairs:
                raise ValueError("duplicate edge for pair (%s, %s)" % pair)
            seen_pairs.add(pair)
        for label in self.magnon_sweep_target:
            if kinds.get(label) != "magnon":
                raise ValueError("sweep target %r is not a magnon mode" % label)

    def mode(self, label: str) -> ModeSpec:
        for m in self.modes:
            if m.label == label:
                return m
        raise ValueError("unknown mode label %r" % label)

    def mode_index(self, label: str) -> int:
        for i, m in enumerate(self.modes):
            if m.label == label:
                return i
        raise ValueError("unknown mode label %r" % label)

    def photon_labels(self) -> tuple:
        return tuple(m.label for m in self.modes if m.kind == "photon")

    def magnon_labels(self) -> tuple:
        return tuple(m.label for m in self.modes if m.kind == "magnon")


@dataclass(frozen=True)
class HermitianMatrixGHz:
    """Hermitian matrix in GHz linear-frequency units, with mode labels per row."""

    labels: tuple
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "entries", entries)
        n = len(self.labels)
        if entries.shape != (n, n):
            raise ValueError("entries must be square with one row per label")
        scale = max(float(np.linalg.norm(entries)), 1e-300)
        if np.linalg.norm(entries - entries.conj().T) > 1e-12 * scale:
            raise ValueError("matrix is not Hermitian to 1e-12 relative")

    @property
    def dimension(self) -> int:
        return len(self.labels)


def build_hamiltonian(system: SystemModel, omega_m: float) -> HermitianMatrixGHz:
    """Assemble the Hamiltonian matrix at a given swept magnon frequency.

    The diagonal holds mode frequencies in GHz, with every magnon in
    magnon_sweep_target replaced by omega_m.  The (photon, magnon) entry holds
    strength * 1e-3 * exp(-i * phase).

    Args:
        system: validated device description.
        omega_m: swept magnon frequency in GHz, > 0.
    """
    if not omega_m > 0:
        raise ValueError("omega_m must be > 0 GHz")
    n = len(system.modes)
    index = {m.label: i for i, m in enumerate(system.modes)}
    h = np.zeros((n, n), dtype=np.complex128)
    for i, mode in enumerate(system.modes):
        if mode.kind == "magnon" and mode.label in system.magnon_sweep_target:
            h[i, i] = omega_m
        else:
            h[i, i] = mode.frequency
    for e in system.edges:
        p = index[e.photon]
        m = index[e.magnon]
        value = (e.strength * 1e-3) * np.exp(-1j * e.phase)
        h[p, m] = value
        h[m, p] = np.conj(value)
    return HermitianMatrixGHz(tuple(index), h)


class RwaCheck(NamedTuple):
    edge: CouplingEdge
    ratio: float
    ok: bool


def check_rwa(system: SystemModel) -> list:
    """Coupling-to-frequency ratio per edge; ok when strength/omega_photon < 10%."""
    out = []
    for e in system.edges:
        omega = system.mode(e.photon).frequency
        ratio = (e.strength * 1e-3) / omega
        out.append(RwaCheck(e, ratio, ratio < 0.10))
    return out


def apply_vertex_phases(system: SystemModel, phases) -> SystemModel:
    """Rotate mode phases: each edge phase maps to phase + alpha_photon - alpha_magnon.

    Modes absent from the mapping keep alpha = 0.  Strengths are unchanged and
    resulting phases are folded into (-pi, pi].
    """
    known = {m.label for m in system.modes}
    for label in phases:
        if label not in known:
            raise ValueError("unknown mode label %r" % label)
    new_edges = tuple(
        CouplingEdge(
            e.photon,
            e.magnon,
            e.strength,
            fold_phase(e.phase + phases.get(e.photon, 0.0) - phases.get(e.magnon, 0.0)),
        )
        for e in system.edges
    )
    return SystemModel(system.modes, new_edges, system.magnon_sweep_target)


# ====== JSON document interface ======


def system_to_document(system: SystemModel) -> dict:
    """Serialize a SystemModel to its plain-JSON document form."""
    return {
        "modes": [
            {
                "label": m.label,
                "kind": m.kind,
                "frequency_ghz": m.frequency,
                "intrinsic_loss_mhz": m.intrinsic_loss,
                "external_loss_mhz": m.external_loss,
            }
            for m in system.modes
        ],
        "edges": [
            {
                "photon": e.photon,
                "magnon": e.magnon,
                "g_mhz": e.strength,
                "phase_rad": e.phase,
            }
            for e in system.edges
        ],
        "sweep": sorted(system.magnon_sweep_target),
    }


def _require(doc: dict, key: str, where: str):
    if not isinstance(doc, dict):
        raise SchemaError("%s: expected an object" % where)
    if key not in doc:
        raise SchemaError("%s.%s: missing required key" % (where, key))
    return doc[key]


def _number(value, where: str, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise SchemaError("%s: expected a number" % where)


def system_from_document(doc: dict) -> SystemModel:
    """Parse and validate a SystemModel JSON document.

    Raises:
        SchemaError: with a path-anchored message on any schema violation.
    """
    modes_doc = _require(doc, "modes", "document")
    edges_doc = _require(doc, "edges", "document")
    sweep_doc = _require(doc, "sweep", "document")
    if not isinstance(modes_doc, list):
        raise SchemaError("modes: expected a list")
    if not isinstance(edges_doc, list):
        raise SchemaError("edges: expected a list")
    if not isinstance(sweep_doc, list):
        raise SchemaError("sweep: expected a list")
    modes = []
    for i, m in enumerate(modes_doc):
        where = "modes[%d]" % i
        label = _require(m, "label", where)
        kind = _require(m, "kind", where)
        freq = _number(_require(m, "frequency_ghz", where), where + ".frequency_ghz")
        intrinsic = _number(
            m.get("intrinsic_loss_mhz"), where + ".intrinsic_loss_mhz", allow_none=True
        )
        external = _number(
            m.get("external_loss_mhz"), where + ".external_loss_mhz", allow_none=True
        )
        try:
            modes.append(ModeSpec(label, kind, freq, intrinsic, external))
        except ValueError as err:
            raise SchemaError("%s: %s" % (where, err)) from None
    edges = []
    for i, e in enumerate(edges_doc):
        where = "edges[%d]" % i
        photon = _require(e, "photon", where)
        magnon = _require(e, "magnon", where)
        g = _number(_require(e, "g_mhz", where), where + ".g_mhz")
        try:
            phase = parse_phase(_require(e, "phase_rad", where))
        except SchemaError as err:
            raise SchemaError("%s.%s" % (where, err)) from None
        edges.append(CouplingEdge(photon, magnon, g, phase))
    try:
        return SystemModel(tuple(modes), tuple(edges), frozenset(sweep_doc))
    except ValueError as err:
        raise SchemaError(str(err)) from None
