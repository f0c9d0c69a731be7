"""Fitting device parameters to measured peak positions.

A fit spec pins a device template: mode layout, coupling topology, and the
swept magnon set.  Free parameters are photon frequencies and per-photon
coupling strengths (all edges of one photon share a single strength, the
usual situation when both spheres sit at equivalent field positions).  Loop
phases are not fitted continuously by default; they enter as a list of
discrete hypotheses, each optimized separately and compared by residual.

Every parameter in the fit vector is in GHz, coupling strengths included;
edge strengths are converted to MHz only when a trial system is built.  The
residual matches each record to its nearest model branch, which keeps the
objective well defined when a dataset misses dark or weakly visible peaks.
"""

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .gauge import reduce_system
from .model import CouplingEdge, SchemaError, SystemModel, apply_vertex_phases
from .spectrum import branch_frequencies

DEFAULT_SIGMA_GHZ = 0.0025
DEFAULT_FREQUENCY_BOUNDS_GHZ = (0.1, 50.0)
DEFAULT_COUPLING_BOUNDS_GHZ = (0.0, 2.0)
DEFAULT_THETA_BOUNDS = (-2.0 * math.pi, 2.0 * math.pi)
MAX_SIMPLEX_ITERATIONS = 5000
AMBIGUITY_RATIO = 1.05

_CSV_HEADER = "omega_m_ghz,omega_peak_ghz,sigma_ghz"
_CSV_HEADER_NO_SIGMA = "omega_m_ghz,omega_peak_ghz"


class PeakRecord(NamedTuple):
    """One measured peak: sweep setting, peak frequency, and its uncertainty."""

    omega_m: float
    omega_peak: float
    sigma: float = DEFAULT_SIGMA_GHZ


@dataclass(frozen=True)
class PeakDataset:
    """Measured peak positions, all in GHz."""

    records: tuple

    def __post_init__(self):
        records = tuple(PeakRecord(*map(float, r)) for r in self.records)
        object.__setattr__(self, "records", records)
        if not records:
            raise ValueError("dataset must contain at least one record")
        for k, r in enumerate(records):
            if not all(map(math.isfinite, r)):
                raise ValueError("record %d: all values must be finite" % k)
            if not r.omega_m > 0:
                raise ValueError("record %d: omega_m must be > 0 GHz" % k)
            if not r.sigma > 0:
                raise ValueError("record %d: sigma must be > 0 GHz" % k)


def dataset_from_csv(text: str) -> PeakDataset:
    """Parse peak records from CSV.

    The sigma_ghz column is optional; missing uncertainties get the default.
    """
    lines = text.splitlines()
    header = lines[0].strip() if lines else ""
    if header == _CSV_HEADER:
        n_cols = 3
    elif header == _CSV_HEADER_NO_SIGMA:
        n_cols = 2
    else:
        raise SchemaError(
            "unrecognized peak CSV header; expected %r with optional sigma_ghz"
            % _CSV_HEADER_NO_SIGMA
        )
    records = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise SchemaError("line %d: expected %d columns, got %d" % (k, n_cols, len(parts)))
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise SchemaError("line %d: could not parse a numeric value" % k) from None
        records.append(PeakRecord(*values))
    if not records:
        raise SchemaError("peak CSV contains no data rows")
    try:
        return PeakDataset(records=tuple(records))
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


# ====== fit specification ======


@dataclass(frozen=True)
class FitSpec:
    """What to fit, over which template, under which loop-phase hypotheses.

    The base system fixes labels, topology, strengths, and frequencies of
    everything that is not set free.  Its own edge phases are irrelevant to
    the fit: each hypothesis assigns the loop phases outright, in the order
    the gauge reduction reports them, and tree edges are held at zero phase.

    bounds maps parameter names ('omega_c:<label>', 'g:<label>', and
    'theta:<k>' in continuous mode) to finite (lower, upper) pairs; free
    parameters without an entry get wide defaults.  With continuous_theta the
    single entry of theta_hypotheses seeds the optimizer and the loop phases
    join the parameter vector.
    """

    base_system: SystemModel
    free_photon_frequencies: tuple = ()
    free_couplings: tuple = ()
    theta_hypotheses: tuple = ((),)
    bounds: dict = field(default_factory=dict)
    continuous_theta: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "free_photon_frequencies", tuple(self.free_photon_frequencies)
        )
        object.__setattr__(self, "free_couplings", tuple(self.free_couplings))
        object.__setattr__(
            self,
            "theta_hypotheses",
            tuple(tuple(float(t) for t in h) for h in self.theta_hypotheses),
        )
        object.__setattr__(self, "bounds", dict(self.bounds))
        photons = set(self.base_system.photon_labels())
        for group in (self.free_photon_frequencies, self.free_couplings):
            seen = set()
            for label in group:
                if label not in photons:
                    raise ValueError("free parameter %r is not a photon mode" % label)
                if label in seen:
                    raise ValueError("duplicate free parameter %r" % label)
                seen.add(label)
        n_loops = len(reduce_system(self.base_system).physical_phases)
        if not self.theta_hypotheses:
            raise ValueError("theta_hypotheses must contain at least one assignment")
        for k, hypothesis in enumerate(self.theta_hypotheses):
            if len(hypothesis) != n_loops:
                raise ValueError(
                    "hypothesis %d: expected %d loop phase(s), got %d"
                    % (k, n_loops, len(hypothesis))
                )
            if not all(map(math.isfinite, hypothesis)):
                raise ValueError("hypothesis %d: loop phases must be finite" % k)
        if self.continuous_theta and len(self.theta_hypotheses) != 1:
            raise ValueError(
                "continuous loop-phase mode takes exactly one seed assignment"
            )
        valid = set(self.parameter_names())
        valid.update("theta:%d" % k for k in range(n_loops))
        for name, pair in self.bounds.items():
            if name not in valid:
                raise ValueError("bound %r is not a parameter of this fit" % name)
            lo, hi = (float(v) for v in pair)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError("bounds for %r must be finite" % name)
            if hi <= lo:
                raise ValueError(
                    "bounds for %r: upper end %g is below the lower end %g"
                    % (name, hi, lo)
                )
            self.bounds[name] = (lo, hi)

    def parameter_names(self) -> tuple:
        return tuple("omega_c:%s" % l for l in self.free_photon_frequencies) + tuple(
            "g:%s" % l for l in self.free_couplings
        )


@dataclass(frozen=True)
class HypothesisFit:
    """Optimum found under one loop-phase assignment."""

    theta_assignment: tuple
    params: dict
    residual: float
    converged: bool


@dataclass(frozen=True)
class FitResult:
    """Best hypothesis with its parameters, plus the full per-hypothesis table.

    ambiguous is set when the two best hypotheses reach near-equal residuals,
    meaning the dataset does not discriminate the loop phase.
    """

    params: dict
    theta_assignment: tuple
    residual: float
    converged: bool
    ambiguous: bool
    per_hypothesis: tuple


# ====== trial-system construction and residual ======


def _reduced_template(spec: FitSpec):
    """Gauge-reduce the base system: tree edges at zero, chords to be assigned."""
    reduction = reduce_system(spec.base_system)
    applied = apply_vertex_phases(spec.base_system, reduction.vertex_phases)
    chord_loop = {p.cycle.chord: k for k, p in enumerate(reduction.physical_phases)}
    return applied, chord_loop


def _instantiate(spec, template, chord_loop, params, thetas) -> SystemModel:
    n_free = len(spec.free_photon_frequencies)
    frequency = dict(zip(spec.free_photon_frequencies, params[:n_free]))
    strength_ghz = dict(zip(spec.free_couplings, params[n_free:]))
    modes = tuple(
        replace(m, frequency=float(frequency[m.label]))
        if m.label in frequency
        else m
        for m in template.modes
    )
    edges = []
    for idx, edge in enumerate(template.edges):
        loop = chord_loop.get(idx)
        phase = float(thetas[loop]) if loop is not None else 0.0
        if edge.photon in strength_ghz:
            strength = float(strength_ghz[edge.photon]) * 1e3
        else:
            strength = edge.strength
        edges.append(CouplingEdge(edge.photon, edge.magnon, strength, phase))
    return SystemModel(
        modes=modes,
        edges=tuple(edges),
        magnon_sweep_target=template.magnon_sweep_target,
    )


def _checked_params(spec: FitSpec, params) -> tuple:
    values = tuple(float(v) for v in params)
    names = spec.parameter_names()
    if len(values) != len(names):
        raise ValueError(
            "expected %d parameters, got %d" % (len(names), len(values))
        )
    if not all(map(math.isfinite, values)):
        raise ValueError("parameters must be finite")
    return values


def _checked_thetas(spec: FitSpec, theta_assignment) -> tuple:
    thetas = tuple(float(t) for t in theta_assignment)
    n_loops = len(spec.theta_hypotheses[0])
    if len(thetas) != n_loops:
        raise ValueError(
            "expected %d loop phase(s), got %d" % (n_loops, len(thetas))
        )
    return thetas


def _residual_of_system(system: SystemModel, data: PeakDataset) -> float:
    omegas = np.unique([r.omega_m for r in data.records])
    table = branch_frequencies(system, omegas)
    row_of = {value: k for k, value in enumerate(omegas.tolist())}
    total = 0.0
    for r in data.records:
        nearest = np.min(np.abs(table[row_of[r.omega_m]] - r.omega_peak))
        total += (nearest / r.sigma) ** 2
    return float(total)


def residual(spec: FitSpec, params, theta_assignment, data: PeakDataset) -> float:
    """Sum of squared sigma-scaled distances to the nearest model branch."""
    values = _checked_params(spec, params)
    thetas = _checked_thetas(spec, theta_assignment)
    template, chord_loop = _reduced_template(spec)
    system = _instantiate(spec, template, chord_loop, values, thetas)
    return _residual_of_system(system, data)


# ====== simplex descent ======


def _bounds_for(spec: FitSpec, names) -> list:
    pairs = []
    for name in names:
        if name in spec.bounds:
            pairs.append(spec.bounds[name])
        elif name.startswith("omega_c:"):
            pairs.append(DEFAULT_FREQUENCY_BOUNDS_GHZ)
        elif name.startswith("g:"):
            pairs.append(DEFAULT_COUPLING_BOUNDS_GHZ)
        else:
            pairs.append(DEFAULT_THETA_BOUNDS)
    return pairs


def _simplex(objective, x0, bounds, max_iterations):
    # Convergence is judged on simplex diameter alone (fatol is inert), with
    # one restart from the best point when the iteration cap is hit first.
    scale = max(1.0, float(np.max(np.abs(x0))))
    options = {
        "maxiter": max_iterations,
        "maxfev": 10**7,
        "xatol": 1e-6 * scale,
        "fatol": math.inf,
    }
    result = minimize(objective, x0, method="Nelder-Mead", bounds=bounds, options=options)
    if not result.success:
        result = minimize(
            objective, result.x, method="Nelder-Mead", bounds=bounds, options=options
        )
    return result


def fit(
    spec: FitSpec,
    data: PeakDataset,
    initial,
    max_iterations: int = MAX_SIMPLEX_ITERATIONS,
) -> FitResult:
    """Optimize every loop-phase hypothesis and keep the lowest residual.

    initial holds the free parameters in parameter_names() order, GHz.  The
    descent is deterministic; hitting the iteration cap (after one restart)
    is reported through converged=False with the best point found so far.
    """
    names = spec.parameter_names()
    values = _checked_params(spec, initial)
    template, chord_loop = _reduced_template(spec)
    base_bounds = _bounds_for(spec, names)
    for name, value, (lo, hi) in zip(names, values, base_bounds):
        if not lo <= value <= hi:
            raise ValueError(
                "initial value %g for %r is outside its bounds [%g, %g]"
                % (value, name, lo, hi)
            )

    n_params = len(names)
    outcomes = []
    if spec.continuous_theta:
        seed = spec.theta_hypotheses[0]
        theta_names = tuple("theta:%d" % k for k in range(len(seed)))
        bounds = base_bounds + _bounds_for(spec, theta_names)

        def objective(x):
            system = _instantiate(spec, template, chord_loop, x[:n_params], x[n_params:])
            return _residual_of_system(system, data)

        best = _simplex(objective, np.array(values + seed), bounds, max_iterations)
        outcomes.append(
            HypothesisFit(
                theta_assignment=tuple(float(v) for v in best.x[n_params:]),
                params=dict(zip(names, (float(v) for v in best.x[:n_params]))),
                residual=float(best.fun),
                converged=bool(best.success),
            )
        )
    else:
        for hypothesis in spec.theta_hypotheses:

            def objective(x, thetas=hypothesis):
                system = _instantiate(spec, template, chord_loop, x, thetas)
                return _residual_of_system(system, data)

            best = _simplex(objective, np.array(values), base_bounds, max_iterations)
            outcomes.append(
                HypothesisFit(
                    theta_assignment=hypothesis,
                    params=dict(zip(names, (float(v) for v in best.x))),
                    residual=float(best.fun),
                    converged=bool(best.success),
                )
            )

    winner = min(outcomes, key=lambda h: h.residual)
    ambiguous = False
    if len(outcomes) > 1:
        ordered = sorted(h.residual for h in outcomes)
        eps = 1e-12 * len(data.records)
        ambiguous = (ordered[1] + eps) / (ordered[0] + eps) < AMBIGUITY_RATIO
    return FitResult(
        params=winner.params,
        theta_assignment=winner.theta_assignment,
        residual=winner.residual,
        converged=winner.converged,
        ambiguous=ambiguous,
        per_hypothesis=tuple(outcomes),
    )
