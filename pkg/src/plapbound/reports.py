"""Machine-readable result records shared by the oracle and the command line."""

import enum
import json
from dataclasses import asdict, dataclass, field
from typing import Optional


class Status(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    BOUND_ONLY = "BOUND_ONLY"


class Provenance(str, enum.Enum):
    SHOOTING = "Shooting"
    RAYLEIGH = "Rayleigh"
    CLOSED_FORM = "ClosedForm"
    TORUS_ORACLE = "TorusOracle"
    HEAT_FLOW = "HeatFlow"


@dataclass
class BoundReport:
    """A bound, optionally checked against an independent oracle value.

    ``margin`` is the relative excess ``(oracle - bound) / bound``.
    ``provenance`` maps ``"bound"`` and ``"oracle"`` to the method that
    produced each number. ``timestamp`` is kept apart from the payload so
    repeated runs compare equal once it is dropped.
    """

    request: dict
    bound: float
    provenance: dict
    status: Status = Status.BOUND_ONLY
    oracle: Optional[float] = None
    margin: Optional[float] = None
    proven: Optional[bool] = None
    meta: dict = field(default_factory=dict)
    timestamp: Optional[str] = None

    def __post_init__(self):
        self.status = Status(self.status)
        self.provenance = {k: (None if v is None else Provenance(v).value)
                           for k, v in self.provenance.items()}
        if self.status is Status.BOUND_ONLY and self.oracle is not None:
            raise ValueError("BOUND_ONLY reports carry no oracle value")

    @property
    def passed(self):
        return self.status is not Status.FAIL

    def to_dict(self, timestamp=True):
        out = asdict(self)
        out["status"] = self.status.value
        if not timestamp:
            out.pop("timestamp")
        return out

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def to_json(self, timestamp=True, indent=2):
        return json.dumps(self.to_dict(timestamp=timestamp), indent=indent)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def relative_margin(oracle, bound):
    return (oracle - bound) / bound if bound else None


def check_status(oracle, bound, slack, abs_slack):
    """PASS when ``oracle >= bound (1 - slack) - abs_slack``."""
    ok = oracle >= bound * (1.0 - slack) - abs_slack
    return Status.PASS if ok else Status.FAIL
