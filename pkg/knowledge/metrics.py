"""Per-run accounting of frames, grids, simulated trials and written reports."""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, asdict
import time
from typing import Dict, Iterator, List, Sequence, Tuple

from canonical.frames import CanonicalFrame


@dataclass
class FrameCounters:
    built: int = 0
    degenerate: int = 0
    unsupported_columns: int = 0
    tracked_curves: int = 0


@dataclass
class GridCounters:
    points: int = 0
    clamped_endpoints: int = 0


@dataclass
class SimulationCounters:
    trials: int = 0
    shots: int = 0
    edge_estimates: int = 0


@dataclass
class StageRecord:
    command: str
    seconds: float
    failed: bool = False


class EstimationMetrics:
    """Counters filled by the runner while a command executes."""

    def __init__(self) -> None:
        self.frames = FrameCounters()
        self.grid = GridCounters()
        self.simulation = SimulationCounters()
        self.outputs: List[str] = []
        self.stages: List[StageRecord] = []

    def record_frames(self, frames: Sequence[CanonicalFrame], *, tracked: bool = False) -> None:
        self.frames.built += len(frames)
        self.frames.degenerate += sum(1 for frame in frames if frame.is_degenerate)
        self.frames.unsupported_columns += sum(int((~frame.support).sum()) for frame in frames)
        if tracked:
            self.frames.tracked_curves += 1

    def record_grid(self, points: int, clamped_endpoints: int = 0) -> None:
        self.grid.points += points
        self.grid.clamped_endpoints += clamped_endpoints

    def record_simulation(
        self,
        n_trials: int,
        n_shots: int,
        estimates: Sequence[float],
        interval: Tuple[float, float],
        tol: float,
    ) -> None:
        """``interval`` is the likelihood search interval; estimates within ``tol`` of an end count as edge hits."""
        lo, hi = interval
        self.simulation.trials += n_trials
        self.simulation.shots += n_trials * n_shots
        self.simulation.edge_estimates += sum(1 for value in estimates if value - lo <= tol or hi - value <= tol)

    def record_output(self, path) -> None:
        self.outputs.append(str(path))

    @contextmanager
    def stage(self, command: str) -> Iterator[StageRecord]:
        record = StageRecord(command=command, seconds=0.0)
        started = time.perf_counter()
        try:
            yield record
        except BaseException:
            record.failed = True
            raise
        finally:
            record.seconds = time.perf_counter() - started
            self.stages.append(record)

    def snapshot(self) -> Dict:
        return {
            "frames": asdict(self.frames),
            "grid": asdict(self.grid),
            "simulation": asdict(self.simulation),
            "outputs": list(self.outputs),
            "stages": [asdict(record) for record in self.stages],
        }
