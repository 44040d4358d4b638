"""Command runner: wires channels, inputs, POVMs and grids into reports."""

from __future__ import annotations

from dataclasses import dataclass, field
import math
from pathlib import Path
import sys
from typing import Callable, Dict, List, Optional

import numpy as np

from canonical.frames import CanonicalFrame, canonical_decompose, smooth_frame_curve
from canonical.quasi_classical import quasiclassical_optimal_povm
from channels.builtins import builtin
from channels.family import ParamKrausFamily, extend_identity, tensor_square
from channels.states import QuantumState, parse_state
from estimate.experiment import crlb_experiment
from estimate.mle import search_interval
from fisher import povm as presets
from fisher.bounds import kraus_bound, sld_fisher
from fisher.distance import statistical_distance_eigencoords
from fisher.optimality import optimality_check
from fisher.povm import Povm
from interface.run_config import RunConfig
from knowledge.channel_catalog import CATALOG, closed_form, describe
from knowledge.metrics import EstimationMetrics
from pipeline.writers import render_json, write_column, write_csv, write_json
from utils.errors import ConfigError
from utils.log import get_logger
from utils.settings import DEFAULT_SETTINGS, NumericSettings

logger = get_logger("pipeline", "runner")

BOUND_COLUMNS = ["theta", "kraus_bound", "sld_fisher"]
DISTANCE_COLUMNS = ["theta", "bound", "eigencoord", "closed_form"]
CHANNEL_COLUMNS = ["name", "domain_low", "domain_high", "parameter", "fiducial_input", "optimal_povm", "reference"]

_FIXED_PRESETS: Dict[str, Callable[[], Povm]] = {
    "z-basis": presets.z_basis,
    "x-basis": presets.x_basis,
    "bell-basis": presets.bell_basis,
    "singlet-triplet": presets.singlet_triplet,
}
_SIZED_PRESETS: Dict[str, Callable[[int], Povm]] = {
    "photon-number": presets.photon_number,
    "position": presets.position,
}


@dataclass
class RunReport:
    command: str
    outputs: List[Path] = field(default_factory=list)
    metrics: Dict = field(default_factory=dict)


class EstimationRunner:
    def __init__(self, *, settings: NumericSettings = DEFAULT_SETTINGS, metrics: Optional[EstimationMetrics] = None) -> None:
        self.settings = settings
        self.metrics = metrics or EstimationMetrics()

    # ------------------------------------------------------------------
    def run(self, config: RunConfig) -> RunReport:
        handlers = {
            "bound": self._bound,
            "distance-curve": self._distance_curve,
            "optimality-check": self._optimality_check,
            "simulate": self._simulate,
            "channels": self._channels,
        }
        report = RunReport(command=config.command)
        try:
            with self.metrics.stage(config.command) as stage:
                handlers[config.command](config, report)
        except BaseException:
            for path in report.outputs:
                path.unlink(missing_ok=True)
            raise
        report.metrics = self.metrics.snapshot()
        logger.info(
            "%s finished in %.3fs: frames %s, grid %s, simulation %s",
            config.command,
            stage.seconds,
            report.metrics["frames"],
            report.metrics["grid"],
            report.metrics["simulation"],
        )
        return report

    # ------------------------------------------------------------------
    def family(self, config: RunConfig) -> ParamKrausFamily:
        base = builtin(config.channel, settings=self.settings, **config.channel_params())
        if config.extension == "identity":
            return extend_identity(base)
        if config.extension == "square":
            return tensor_square(base)
        return base

    def input_state(self, config: RunConfig, family: ParamKrausFamily) -> QuantumState:
        return parse_state(config.input or self._default_input(config), family.dim)

    def povm_name(self, config: RunConfig) -> str:
        if config.povm is not None:
            return config.povm
        if config.extension == "none":
            return describe(config.channel).optimal_povm
        return "eigenframe"

    def povm(self, name: str, family: ParamKrausFamily, frame: Optional[CanonicalFrame] = None) -> Povm:
        if name == "eigenframe":
            if frame is None:
                raise ConfigError("the eigenframe POVM needs a canonical frame")
            return quasiclassical_optimal_povm(frame, settings=self.settings)
        if name in _FIXED_PRESETS:
            return _FIXED_PRESETS[name]()
        if name in _SIZED_PRESETS:
            return _SIZED_PRESETS[name](family.dim)
        if name.endswith(".npy"):
            return presets.load_effects(Path(name), settings=self.settings)
        choices = ", ".join([*_FIXED_PRESETS, *_SIZED_PRESETS, "eigenframe", "<file>.npy"])
        raise ConfigError(f"unknown POVM {name!r}; choose from {choices}")

    def grid(self, config: RunConfig, family: ParamKrausFamily) -> np.ndarray:
        lo, hi = family.theta_domain
        inset = self.settings.domain_inset
        start, stop = config.theta_start, config.theta_stop
        if math.isfinite(lo) and math.isfinite(hi):
            width = hi - lo
            start = lo + 0.05 * width if start is None else start
            stop = hi - 0.05 * width if stop is None else stop
        else:
            if start is None or stop is None:
                raise ConfigError(f"{family.label} has an unbounded domain; set theta_start and theta_stop")
        clamped_start, clamped_stop = max(start, lo + inset), min(stop, hi - inset)
        clamped = int(clamped_start != start) + int(clamped_stop != stop)
        if clamped:
            logger.info(
                "%s: grid [%r, %r] clamped to [%r, %r]", family.label, start, stop, clamped_start, clamped_stop
            )
        start, stop = clamped_start, clamped_stop
        if start > stop or (config.points > 1 and start == stop):
            raise ConfigError(f"grid [{start!r}, {stop!r}] is empty inside the domain {family.theta_domain} of {family.label}")
        self.metrics.record_grid(config.points, clamped)
        return np.linspace(start, stop, config.points)

    def frames(self, family: ParamKrausFamily, thetas: np.ndarray, state: QuantumState) -> List[CanonicalFrame]:
        if thetas.size == 1:
            built = [canonical_decompose(family, float(thetas[0]), state, settings=self.settings)]
        else:
            built = smooth_frame_curve(family, thetas, state, settings=self.settings)
        self.metrics.record_frames(built, tracked=thetas.size > 1)
        return built

    # ------------------------------------------------------------------
    def _emit_rows(self, config: RunConfig, report: RunReport, rows: List[Dict], columns: List[str]) -> None:
        if config.out is None:
            raise ConfigError(f"{config.command} needs an output path")
        if config.output_format == "csv":
            path = write_csv(config.out, rows, columns)
        else:
            path = write_json(config.out, {"command": config.command, "columns": columns, "rows": rows})
        report.outputs.append(path)
        self.metrics.record_output(path)

    def _bound(self, config: RunConfig, report: RunReport) -> None:
        family = self.family(config)
        state = self.input_state(config, family)
        thetas = self.grid(config, family)
        rows = [
            {
                "theta": frame.theta,
                "kraus_bound": kraus_bound(frame, frame.theta, state),
                "sld_fisher": sld_fisher(family, frame.theta, state, settings=self.settings),
            }
            for frame in self.frames(family, thetas, state)
        ]
        self._emit_rows(config, report, rows, BOUND_COLUMNS)

    def _distance_curve(self, config: RunConfig, report: RunReport) -> None:
        family = self.family(config)
        state = self.input_state(config, family)
        thetas = self.grid(config, family)
        curve = statistical_distance_eigencoords(self.frames(family, thetas, state), settings=self.settings)
        reference = closed_form(config.channel, config.extension, config.input or self._default_input(config))
        rows = [
            {
                "theta": theta,
                "bound": bound,
                "eigencoord": eigencoord,
                "closed_form": reference(theta) if reference is not None else math.nan,
            }
            for theta, bound, eigencoord in zip(curve.thetas, curve.bound_values, curve.eigencoord_values)
        ]
        logger.info("%s: bound and eigen-coordinate values differ by at most %.3e", curve.label, curve.max_disagreement())
        self._emit_rows(config, report, rows, DISTANCE_COLUMNS)

    def _default_input(self, config: RunConfig) -> str:
        return "bell:0" if config.extension != "none" else describe(config.channel).fiducial_input

    def _optimality_check(self, config: RunConfig, report: RunReport) -> None:
        family = self.family(config)
        state = self.input_state(config, family)
        thetas = self.grid(config, family)
        name = self.povm_name(config)
        fixed = None if name == "eigenframe" else self.povm(name, family)
        reports = []
        for frame in self.frames(family, thetas, state):
            measurement = fixed if fixed is not None else self.povm(name, family, frame)
            entry = optimality_check(measurement, frame, state, settings=self.settings).to_dict()
            if measurement.warnings:
                entry["warnings"] = list(measurement.warnings)
            reports.append(entry)
        if config.out is None:
            raise ConfigError("optimality-check needs an output path")
        payload = {"channel": family.label, "input": config.input or self._default_input(config), "povm": name, "reports": reports}
        report.outputs.append(write_json(config.out, payload))
        self.metrics.record_output(report.outputs[-1])

    def _simulate(self, config: RunConfig, report: RunReport) -> None:
        family = self.family(config)
        state = self.input_state(config, family)
        if config.theta is None:
            raise ConfigError("simulate needs theta")
        theta = float(config.theta)
        lo, hi = family.theta_domain
        if not (lo + self.settings.domain_inset <= theta <= hi - self.settings.domain_inset):
            raise ConfigError(f"theta={theta!r} leaves the domain {family.theta_domain} of {family.label}")
        name = self.povm_name(config)
        frame = None
        if name == "eigenframe":
            frame = canonical_decompose(family, theta, state, settings=self.settings)
            self.metrics.record_frames([frame])
        measurement = self.povm(name, family, frame)
        result = crlb_experiment(
            measurement,
            family,
            theta,
            state,
            config.shots,
            config.trials,
            config.seed,
            max_workers=config.workers,
            settings=self.settings,
        )
        self.metrics.record_simulation(
            result.n_trials,
            result.n_shots,
            result.estimates,
            search_interval(family, self.settings),
            1e3 * self.settings.mle_xtol,
        )
        if config.out is None:
            raise ConfigError("simulate needs an output path")
        report.outputs.append(write_json(config.out, result.to_dict()))
        if config.estimates_out is not None:
            report.outputs.append(write_column(config.estimates_out, "estimate", result.estimates))
        for path in report.outputs:
            self.metrics.record_output(path)

    def _channels(self, config: RunConfig, report: RunReport) -> None:
        rows = [
            {
                "name": entry.name,
                "domain_low": entry.domain[0],
                "domain_high": entry.domain[1],
                "parameter": entry.parameter,
                "fiducial_input": entry.fiducial_input,
                "optimal_povm": entry.optimal_povm,
                "reference": entry.reference,
            }
            for entry in CATALOG.values()
        ]
        if config.out is None:
            if config.output_format == "json":
                sys.stdout.write(render_json({"channels": [entry.to_dict() for entry in CATALOG.values()]}))
            else:
                for entry in CATALOG.values():
                    lo, hi = entry.domain
                    sys.stdout.write(f"{entry.name}\t({lo:g}, {hi:g})\t{entry.reference}\n")
            return
        if config.output_format == "json":
            report.outputs.append(write_json(config.out, {"channels": [entry.to_dict() for entry in CATALOG.values()]}))
        else:
            report.outputs.append(write_csv(config.out, rows, CHANNEL_COLUMNS))
        self.metrics.record_output(report.outputs[-1])
