"""
File handler for specifications, environments, trajectories and run artifacts
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import structlog
from pydantic import ValidationError

from src.exceptions import EnvironmentFileError, StlIncError
from src.models.environment_models import Environment
from src.models.trajectory_models import INPUT_CHANNELS, STATE_CHANNELS, Trajectory
from src.startup import get_settings

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

CSV_HEADER = ("step",) + STATE_CHANNELS + INPUT_CHANNELS


class FileHandler:
    """Reads inputs and writes UTF-8 artifacts"""

    def read_spec(self, path: PathLike) -> str:
        """Specification text (raises FileNotFoundError)"""
        return Path(path).read_text(encoding="utf-8")

    def load_environment(self, path: Optional[PathLike] = None) -> Environment:
        """Load and validate an environment document.

        Raises:
            FileNotFoundError: path does not exist
            EnvironmentFileError: not JSON or not a valid environment
        """
        path = Path(path) if path is not None else get_settings().default_env_path
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            env = Environment.model_validate(data)
        except json.JSONDecodeError as e:
            raise EnvironmentFileError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from e
        except ValidationError as e:
            raise EnvironmentFileError(f"{path}: {e.error_count()} validation error(s): {e}") from e
        logger.debug("environment_loaded", path=str(path), name=env.name, regions=len(env.regions))
        return env

    def read_trajectory_csv(self, path: PathLike) -> Trajectory:
        """Read a trajectory CSV with a header row.

        A file with exactly the plan columns becomes a full trajectory with
        inputs; any other header is read as named channels, with an optional
        leading ``step`` column fixing the start step.
        """
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise StlIncError(f"{path}: empty trajectory file")
        header, body = [h.strip() for h in rows[0]], [r for r in rows[1:] if r]
        if not body:
            raise StlIncError(f"{path}: trajectory has no rows")
        try:
            columns: Dict[str, List[Optional[float]]] = {
                name: [float(r[i]) if i < len(r) and r[i].strip() else None for r in body]
                for i, name in enumerate(header)
            }
        except ValueError as e:
            raise StlIncError(f"{path}: non-numeric value ({e})") from e

        t0 = 0
        if header and header[0] == "step":
            steps = [int(v) for v in columns.pop("step")]
            t0 = steps[0]
            if steps != list(range(t0, t0 + len(steps))):
                raise StlIncError(f"{path}: steps must be consecutive")

        if tuple(header) == CSV_HEADER:
            states = [[columns[c][i] for c in STATE_CHANNELS] for i in range(len(body))]
            inputs = [[columns[c][i] for c in INPUT_CHANNELS] for i in range(len(body) - 1)]
            return Trajectory(t0=t0, states=states, inputs=inputs)
        if any(v is None for values in columns.values() for v in values):
            raise StlIncError(f"{path}: missing values")
        return Trajectory.from_columns(columns, t0=t0)

    def write_trajectory_csv(self, trajectory: Trajectory, path: PathLike) -> Path:
        """Write step, px, py, vx, vy, ux, uy; the last row has no input"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for i, t in enumerate(trajectory.times()):
                state = [repr(float(v)) for v in trajectory.states[i]]
                if i < len(trajectory.inputs):
                    controls = [repr(float(u)) for u in trajectory.inputs[i]]
                else:
                    controls = ["", ""]
                writer.writerow([t] + state + controls)
        return path

    def write_json(self, data: Any, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def write_text(self, text: str, path: PathLike) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path


# Global instance
_file_handler: Optional[FileHandler] = None


def get_file_handler() -> FileHandler:
    """Get or create the global file handler"""
    global _file_handler
    if _file_handler is None:
        _file_handler = FileHandler()
    return _file_handler
