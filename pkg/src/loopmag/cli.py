"""Command-line entry point.

Five commands cover the analysis pipeline: gauge reduction report, spectrum
sweep, transmission map, field-export ingestion, and peak fitting.  Devices
come either from a JSON config file or from one of the built-in presets; any
grid settings in the file are overridden by the long-form flags.

Exit codes: 0 on success, 2 when inputs fail to load or validate, 1 when the
computation itself fails on otherwise well-formed inputs.  Input validation
is everything that happens before numerical work starts; for example a field
export whose transverse moments vanish parses fine but has no defined
coupling phase, which is reported as a computation failure.

All outputs are deterministic byte-for-byte.  The transmission sidecar can
carry a wall-clock timestamp, but only behind --timestamp.
"""

import datetime
import json
import pathlib

import click
import numpy as np

from .calibrate import (
    MAX_SIMPLEX_ITERATIONS,
    FitSpec,
    dataset_from_csv,
    fit,
)
from .fieldmap import SphereRegion, coupling_table, field_table_from_csv
from .gauge import reduce_system, reduction_to_document
from .model import SchemaError, SystemModel, parse_phase, system_from_document
from .spectrum import sweep, sweep_to_csv
from .transmission import PortSpec, map_to_csv, s21_map

PRESETS = {
    "cavity-pi-table1": {
        "system": {
            "modes": [
                {"label": "c1", "kind": "photon", "frequency_ghz": 4.524},
                {"label": "c2", "kind": "photon", "frequency_ghz": 6.378},
                {"label": "m1", "kind": "magnon", "frequency_ghz": 5.45},
                {"label": "m2", "kind": "magnon", "frequency_ghz": 5.45},
            ],
            "edges": [
                {"photon": "c1", "magnon": "m1", "g_mhz": 139.0, "phase_rad": "-pi/2"},
                {"photon": "c1", "magnon": "m2", "g_mhz": 139.0, "phase_rad": "-pi/2"},
                {"photon": "c2", "magnon": "m1", "g_mhz": 207.0, "phase_rad": "pi/2"},
                {"photon": "c2", "magnon": "m2", "g_mhz": 207.0, "phase_rad": "-pi/2"},
            ],
            "sweep": ["m1", "m2"],
        },
        "magnon_grid": {"start_ghz": 4.0, "stop_ghz": 7.0, "points": 121},
        "probe_grid": {"start_ghz": 4.0, "stop_ghz": 7.0, "points": 241},
    },
    "cavity-pi-fit": {
        "system": {
            "modes": [
                {"label": "c1", "kind": "photon", "frequency_ghz": 4.527},
                {"label": "c2", "kind": "photon", "frequency_ghz": 6.19},
                {"label": "m1", "kind": "magnon", "frequency_ghz": 5.36},
                {"label": "m2", "kind": "magnon", "frequency_ghz": 5.36},
            ],
            "edges": [
                {"photon": "c1", "magnon": "m1", "g_mhz": 81.0, "phase_rad": "0"},
                {"photon": "c1", "magnon": "m2", "g_mhz": 81.0, "phase_rad": "pi"},
                {"photon": "c2", "magnon": "m1", "g_mhz": 120.0, "phase_rad": "0"},
                {"photon": "c2", "magnon": "m2", "g_mhz": 120.0, "phase_rad": "0"},
            ],
            "sweep": ["m1", "m2"],
        },
        "magnon_grid": {"start_ghz": 4.2, "stop_ghz": 6.6, "points": 121},
        "probe_grid": {"start_ghz": 4.2, "stop_ghz": 6.6, "points": 241},
    },
    "cavity-pi0-table2": {
        "system": {
            "modes": [
                {"label": "c1", "kind": "photon", "frequency_ghz": 6.594},
                {"label": "c2", "kind": "photon", "frequency_ghz": 7.562},
                {"label": "c3", "kind": "photon", "frequency_ghz": 8.619},
                {"label": "m1", "kind": "magnon", "frequency_ghz": 7.5},
                {"label": "m2", "kind": "magnon", "frequency_ghz": 7.5},
            ],
            "edges": [
                {"photon": "c1", "magnon": "m1", "g_mhz": 130.0, "phase_rad": "-pi/2"},
                {"photon": "c1", "magnon": "m2", "g_mhz": 130.0, "phase_rad": "-pi/2"},
                {"photon": "c2", "magnon": "m1", "g_mhz": 150.0, "phase_rad": "pi/2"},
                {"photon": "c2", "magnon": "m2", "g_mhz": 150.0, "phase_rad": "-pi/2"},
                {"photon": "c3", "magnon": "m1", "g_mhz": 104.0, "phase_rad": "pi/2"},
                {"photon": "c3", "magnon": "m2", "g_mhz": 104.0, "phase_rad": "-pi/2"},
            ],
            "sweep": ["m1", "m2"],
        },
        "magnon_grid": {"start_ghz": 6.4, "stop_ghz": 9.0, "points": 131},
        "probe_grid": {"start_ghz": 6.4, "stop_ghz": 9.0, "points": 261},
    },
}


# ====== plumbing ======


def _fail(code: int, error) -> None:
    click.echo("error: %s" % error, err=True)
    raise SystemExit(code)


def _json_text(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        pathlib.Path(out).write_text(text)


def _load_json(path) -> dict:
    document = json.loads(pathlib.Path(path).read_text())
    if not isinstance(document, dict):
        raise SchemaError("%s: expected a JSON object at top level" % path)
    return document


def _device_config(preset_name, config_path) -> dict:
    if (preset_name is None) == (config_path is None):
        raise SchemaError("give exactly one of --preset or --config")
    if preset_name is not None:
        return json.loads(json.dumps(PRESETS[preset_name]))
    config = _load_json(config_path)
    if "system" not in config:
        raise SchemaError("config: missing required key 'system'")
    return config


def _grid(config: dict, key: str, start, stop, points) -> np.ndarray:
    settings = dict(config.get(key) or {})
    if start is not None:
        settings["start_ghz"] = start
    if stop is not None:
        settings["stop_ghz"] = stop
    if points is not None:
        settings["points"] = points
    for field in ("start_ghz", "stop_ghz", "points"):
        if field not in settings:
            raise SchemaError("%s.%s: missing (set it in the config or by flag)" % (key, field))
    lo, hi, n = settings["start_ghz"], settings["stop_ghz"], int(settings["points"])
    if n < 1:
        raise SchemaError("%s.points must be >= 1" % key)
    if not lo > 0:
        raise SchemaError("%s.start_ghz must be > 0" % key)
    if n > 1 and not hi > lo:
        raise SchemaError("%s: stop_ghz must exceed start_ghz" % key)
    config[key] = {"start_ghz": lo, "stop_ghz": hi, "points": n}
    return np.linspace(lo, hi, n)


def _ports(config: dict):
    ports_doc = config.get("ports")
    if ports_doc is None:
        return (PortSpec(1), PortSpec(2))
    if not isinstance(ports_doc, dict) or set(ports_doc) != {"1", "2"}:
        raise SchemaError("ports: expected an object with exactly the keys '1' and '2'")
    specs = []
    for key in ("1", "2"):
        value = ports_doc[key]
        if value is None:
            specs.append(PortSpec(int(key)))
            continue
        if not isinstance(value, dict):
            raise SchemaError("ports.%s: expected null or a label->rate object" % key)
        try:
            specs.append(PortSpec(int(key), {l: float(r) for l, r in value.items()}))
        except (TypeError, ValueError) as error:
            raise SchemaError("ports.%s: %s" % (key, error)) from None
    return tuple(specs)


def _single_sphere(system: SystemModel) -> SystemModel:
    magnons = system.magnon_labels()
    if not magnons:
        raise SchemaError("--single-sphere requires at least one magnon mode")
    keep = magnons[0]
    return SystemModel(
        modes=tuple(m for m in system.modes if m.kind == "photon" or m.label == keep),
        edges=tuple(e for e in system.edges if e.magnon == keep),
        magnon_sweep_target=system.magnon_sweep_target & {keep},
    )


_LOAD_ERRORS = (SchemaError, ValueError, OSError, json.JSONDecodeError)


def _source_options(fn):
    fn = click.option(
        "--config",
        "config_path",
        type=click.Path(),
        help="Device config JSON (system document plus optional ports/grids).",
    )(fn)
    fn = click.option(
        "--preset",
        "preset_name",
        type=click.Choice(sorted(PRESETS)),
        help="Built-in device preset.",
    )(fn)
    return fn


@click.group()
def main():
    """Loop-coupled cavity magnonics toolkit."""


# ====== commands ======


@main.command("gauge")
@_source_options
@click.option("--out", type=click.Path(), help="Write the JSON report here instead of stdout.")
def cmd_gauge(preset_name, config_path, out):
    """Reduce a device to its gauge-invariant loop phases."""
    try:
        config = _device_config(preset_name, config_path)
        system = system_from_document(config["system"])
    except _LOAD_ERRORS as error:
        _fail(2, error)
    try:
        text = _json_text(reduction_to_document(reduce_system(system)))
    except Exception as error:
        _fail(1, error)
    _emit(text, out)


@main.command("spectrum")
@_source_options
@click.option("--grid-start-ghz", type=float, help="Magnon sweep start.")
@click.option("--grid-stop-ghz", type=float, help="Magnon sweep stop.")
@click.option("--grid-points", type=int, help="Magnon sweep point count.")
@click.option(
    "--single-sphere",
    is_flag=True,
    help="Keep only the first magnon mode (single-sphere device variant).",
)
@click.option("--out", type=click.Path(), help="Write the CSV here instead of stdout.")
def cmd_spectrum(preset_name, config_path, grid_start_ghz, grid_stop_ghz, grid_points, single_sphere, out):
    """Sweep the magnon frequency and emit branch frequencies as CSV."""
    try:
        config = _device_config(preset_name, config_path)
        system = system_from_document(config["system"])
        if single_sphere:
            system = _single_sphere(system)
        grid = _grid(config, "magnon_grid", grid_start_ghz, grid_stop_ghz, grid_points)
    except _LOAD_ERRORS as error:
        _fail(2, error)
    try:
        text = sweep_to_csv(sweep(system, grid))
    except Exception as error:
        _fail(1, error)
    _emit(text, out)


@main.command("s21")
@_source_options
@click.option("--probe-start-ghz", type=float, help="Probe frequency start.")
@click.option("--probe-stop-ghz", type=float, help="Probe frequency stop.")
@click.option("--probe-points", type=int, help="Probe frequency point count.")
@click.option("--magnon-start-ghz", type=float, help="Magnon sweep start.")
@click.option("--magnon-stop-ghz", type=float, help="Magnon sweep stop.")
@click.option("--magnon-points", type=int, help="Magnon sweep point count.")
@click.option("--timestamp", is_flag=True, help="Record the wall-clock time in the sidecar.")
@click.option("--out", type=click.Path(), help="Write CSV here (sidecar lands at <out>.json).")
def cmd_s21(preset_name, config_path, probe_start_ghz, probe_stop_ghz, probe_points,
            magnon_start_ghz, magnon_stop_ghz, magnon_points, timestamp, out):
    """Compute a two-port transmission map over probe and magnon frequency."""
    try:
        config = _device_config(preset_name, config_path)
        system = system_from_document(config["system"])
        ports = _ports(config)
        probe = _grid(config, "probe_grid", probe_start_ghz, probe_stop_ghz, probe_points)
        magnon = _grid(config, "magnon_grid", magnon_start_ghz, magnon_stop_ghz, magnon_points)
    except _LOAD_ERRORS as error:
        _fail(2, error)
    try:
        tmap = s21_map(system, ports, probe, magnon)
        text = map_to_csv(tmap)
    except Exception as error:
        _fail(1, error)
    _emit(text, out)
    if out is not None:
        sidecar = {
            "preset": preset_name,
            "ports": config.get("ports"),
            "probe_grid": config["probe_grid"],
            "magnon_grid": config["magnon_grid"],
            "defaults_applied": list(tmap.defaults_applied),
        }
        if timestamp:
            sidecar["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        pathlib.Path(str(out) + ".json").write_text(_json_text(sidecar))


@main.command("fieldmap")
@click.option(
    "--mode-file",
    "mode_files",
    multiple=True,
    required=True,
    help="label=path.csv field export for one photon mode (repeatable).",
)
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="JSON with sphere regions and mode frequencies.")
@click.option("--out", type=click.Path(), help="Write the edge document here instead of stdout.")
def cmd_fieldmap(mode_files, config_path, out):
    """Turn field exports into coupling edges (strength and phase per sphere)."""
    try:
        config = _load_json(config_path)
        if "regions" not in config or "mode_frequencies_ghz" not in config:
            raise SchemaError(
                "config: 'regions' and 'mode_frequencies_ghz' are both required"
            )
        regions = []
        for k, region in enumerate(config["regions"]):
            where = "regions[%d]" % k
            try:
                regions.append(
                    SphereRegion(
                        center=tuple(float(v) for v in region["center_m"]),
                        radius=float(region["radius_m"]),
                        label=str(region["label"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as error:
                raise SchemaError("%s: %s" % (where, error)) from None
        frequencies = {
            str(label): float(value)
            for label, value in config["mode_frequencies_ghz"].items()
        }
        mode_fields = {}
        for item in mode_files:
            label, sep, path = item.partition("=")
            if not sep or not label or not path:
                raise SchemaError("--mode-file %r: expected label=path.csv" % item)
            if label in mode_fields:
                raise SchemaError("--mode-file: duplicate label %r" % label)
            if label not in frequencies:
                raise SchemaError("no frequency given for mode %r" % label)
            mode_fields[label] = field_table_from_csv(pathlib.Path(path).read_text())
    except _LOAD_ERRORS as error:
        _fail(2, error)
    try:
        edges = coupling_table(mode_fields, regions, frequencies)
        text = _json_text(
            {
                "edges": [
                    {
                        "photon": e.photon,
                        "magnon": e.magnon,
                        "g_mhz": e.strength,
                        "phase_rad": e.phase,
                    }
                    for e in edges
                ]
            }
        )
    except Exception as error:
        _fail(1, error)
    _emit(text, out)


@main.command("fit")
@click.option("--data", "data_path", required=True, type=click.Path(),
              help="Peak CSV (omega_m_ghz, omega_peak_ghz, optional sigma_ghz).")
@click.option("--spec", "spec_path", required=True, type=click.Path(),
              help="Fit spec JSON (template, free parameters, hypotheses, initial).")
@click.option("--out", type=click.Path(), help="Write the fit report here instead of stdout.")
def cmd_fit(data_path, spec_path, out):
    """Fit free device parameters to measured peaks under loop-phase hypotheses."""
    try:
        dataset = dataset_from_csv(pathlib.Path(data_path).read_text())
        document = _load_json(spec_path)
        if ("preset" in document) == ("system" in document):
            raise SchemaError("fit spec: give exactly one of 'preset' or 'system'")
        if "preset" in document:
            name = document["preset"]
            if name not in PRESETS:
                raise SchemaError("fit spec: unknown preset %r" % name)
            system = system_from_document(PRESETS[name]["system"])
        else:
            system = system_from_document(document["system"])
        if "theta_hypotheses" not in document or "initial" not in document:
            raise SchemaError("fit spec: 'theta_hypotheses' and 'initial' are required")
        hypotheses = tuple(
            tuple(parse_phase(value) for value in hypothesis)
            for hypothesis in document["theta_hypotheses"]
        )
        bounds = {
            str(name): (float(pair[0]), float(pair[1]))
            for name, pair in dict(document.get("bounds", {})).items()
        }
        spec = FitSpec(
            base_system=system,
            free_photon_frequencies=tuple(document.get("free_photon_frequencies", ())),
            free_couplings=tuple(document.get("free_couplings", ())),
            theta_hypotheses=hypotheses,
            bounds=bounds,
            continuous_theta=bool(document.get("continuous_theta", False)),
        )
        initial = tuple(float(v) for v in document["initial"])
        if len(initial) != len(spec.parameter_names()):
            raise SchemaError(
                "fit spec: 'initial' must hold %d value(s), got %d"
                % (len(spec.parameter_names()), len(initial))
            )
        max_iterations = int(document.get("max_iterations", MAX_SIMPLEX_ITERATIONS))
    except _LOAD_ERRORS as error:
        _fail(2, error)
    try:
        result = fit(spec, dataset, initial, max_iterations)
        text = _json_text(
            {
                "params": result.params,
                "theta_assignment_rad": list(result.theta_assignment),
                "residual": result.residual,
                "converged": result.converged,
                "ambiguous": result.ambiguous,
                "per_hypothesis": [
                    {
                        "theta_assignment_rad": list(h.theta_assignment),
                        "params": h.params,
                        "residual": h.residual,
                        "converged": h.converged,
                    }
                    for h in result.per_hypothesis
                ],
            }
        )
    except Exception as error:
        _fail(1, error)
    _emit(text, out)


if __name__ == "__main__":
    main()
