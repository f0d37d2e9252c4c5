"""
Discrete-time trajectories
"""

from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from src.exceptions import UnknownChannelError

STATE_CHANNELS: Tuple[str, ...] = ("px", "py", "vx", "vy")
INPUT_CHANNELS: Tuple[str, ...] = ("ux", "uy")

State = Tuple[float, float, float, float]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Signal of states over absolute steps t0 .. t0 + len - 1.

    ``states`` has one row per step and one column per entry of ``channels``;
    ``inputs`` holds the control applied between consecutive states, so it is
    one row shorter.
    """

    t0: int
    states: np.ndarray
    inputs: np.ndarray
    channels: Tuple[str, ...] = STATE_CHANNELS
    input_channels: Tuple[str, ...] = INPUT_CHANNELS
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        inputs = np.asarray(self.inputs, dtype=float)
        if states.ndim != 2 or states.shape[0] == 0:
            raise ValueError("trajectory needs at least one state")
        if states.shape[1] != len(self.channels):
            raise ValueError("state columns do not match channels")
        if inputs.size == 0:
            inputs = inputs.reshape(max(states.shape[0] - 1, 0), len(self.input_channels))
        if inputs.shape != (states.shape[0] - 1, len(self.input_channels)):
            raise ValueError("inputs must be one row shorter than states")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(self.channels)})

    @classmethod
    def from_values(cls, values: Sequence[float], channel: str = "x", t0: int = 0) -> "Trajectory":
        """Scalar signal, e.g. a logged distance, with no inputs"""
        states = np.asarray(values, dtype=float).reshape(-1, 1)
        return cls(t0=t0, states=states, inputs=np.zeros((len(states) - 1, 0)),
                   channels=(channel,), input_channels=())

    @classmethod
    def from_columns(cls, columns: Dict[str, Sequence[float]], t0: int = 0) -> "Trajectory":
        """Multi-channel signal without inputs"""
        names = tuple(columns)
        states = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
        return cls(t0=t0, states=states, inputs=np.zeros((len(states) - 1, 0)),
                   channels=names, input_channels=())

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def end(self) -> int:
        """Last covered absolute step"""
        return self.t0 + len(self) - 1

    def covers(self, lo: int, hi: int) -> bool:
        return self.t0 <= lo and hi <= self.end

    def has_channel(self, name: str) -> bool:
        return name in self._index

    def channel(self, name: str) -> np.ndarray:
        """Column of values for a channel, indexed from t0"""
        try:
            return self.states[:, self._index[name]]
        except KeyError:
            raise UnknownChannelError(f"trajectory has no channel {name!r}") from None

    def value(self, name: str, t: int) -> float:
        return float(self.channel(name)[t - self.t0])

    def state_at(self, t: int) -> Tuple[float, ...]:
        return tuple(float(v) for v in self.states[t - self.t0])

    def times(self) -> range:
        return range(self.t0, self.end + 1)
