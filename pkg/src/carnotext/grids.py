"""Grid containers for homotopies and disk maps, and their file format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError, InputError


@dataclass(frozen=True)
class HomotopyGrid:
    """Values of a homotopy on the uniform grid ``tau_i = i/N_tau, t_k = k/N_t``.

    ``values`` has shape ``(N_tau + 1, N_t + 1, d)``; ``seams`` lists the
    ``t``-rows where pasted stages meet.
    """

    values: np.ndarray
    seams: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3:
            raise InputError("homotopy values must have shape (N_tau+1, N_t+1, d)")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "seams", tuple(int(s) for s in self.seams))

    @property
    def n_tau(self) -> int:
        return self.values.shape[0] - 1

    @property
    def n_t(self) -> int:
        return self.values.shape[1] - 1

    def periodicity_defect(self) -> float:
        return float(np.abs(self.values[0] - self.values[-1]).max())


@dataclass
class DiskMap:
    """Map on the polar grid ``rho_i = i/(n_rho-1)``, ``theta_j = j/(n_theta-1)``.

    ``theta`` is measured in turns, so the column ``n_theta - 1`` repeats
    column 0. ``horizontal`` has shape ``(n_rho, n_theta, m*n)``; ``vertical``
    has shape ``(n_rho, n_theta, s)`` or is ``None``. ``excluded`` marks nodes
    where the map is known to be only Lipschitz (seams, kinks, the inner ring,
    the base ray and the center) and is not part of the file format.
    """

    horizontal: np.ndarray
    m: int
    n: int
    s: int
    q0: np.ndarray
    seams: tuple = ()
    vertical: np.ndarray | None = None
    excluded: np.ndarray | None = field(default=None, repr=False)
    offset: np.ndarray | None = None
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.horizontal = np.asarray(self.horizontal, dtype=float)
        if self.horizontal.ndim != 3 or self.horizontal.shape[2] != self.m * self.n:
            raise InputError("horizontal part must have shape (n_rho, n_theta, m*n)")
        if self.vertical is not None:
            self.vertical = np.asarray(self.vertical, dtype=float)
            if self.vertical.shape != self.horizontal.shape[:2] + (self.s,):
                raise InputError("vertical part must have shape (n_rho, n_theta, s)")
        self.q0 = np.asarray(self.q0, dtype=float)
        self.seams = tuple(int(s) for s in self.seams)
        if self.excluded is None:
            self.excluded = default_exclusion(self.n_rho, self.n_theta, self.seams)

    @property
    def n_rho(self) -> int:
        return self.horizontal.shape[0]

    @property
    def n_theta(self) -> int:
        return self.horizontal.shape[1]

    @property
    def h_rho(self) -> float:
        return 1.0 / (self.n_rho - 1)

    @property
    def h_theta(self) -> float:
        return 1.0 / (self.n_theta - 1)

    @property
    def rho(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_rho)

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_theta)

    def points(self) -> np.ndarray:
        """Cartesian coordinates of the grid nodes, shape ``(n_rho, n_theta, 2)``."""
        r, th = np.meshgrid(self.rho, 2 * np.pi * self.theta, indexing="ij")
        return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)

    def full(self) -> np.ndarray:
        """Group-valued map ``(horizontal, vertical)`` in exponential coordinates."""
        if self.vertical is None:
            raise InputError("disk map has no vertical part")
        return np.concatenate([self.horizontal, self.vertical], axis=-1)

    def boundary(self) -> np.ndarray:
        return self.full()[-1] if self.vertical is not None else self.horizontal[-1]

    def to_dict(self) -> dict:
        return {"n_rho": self.n_rho, "n_theta": self.n_theta,
                "m": self.m, "n": self.n, "s": self.s,
                "horizontal": self.horizontal.ravel().tolist(),
                "vertical": None if self.vertical is None else self.vertical.ravel().tolist(),
                "q0": self.q0.tolist(),
                "seams": list(self.seams)}

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "DiskMap":
        try:
            nr, nt = int(data["n_rho"]), int(data["n_theta"])
            m, n, s = int(data["m"]), int(data["n"]), int(data["s"])
            hor = np.asarray(data["horizontal"], dtype=float).reshape(nr, nt, m * n)
            ver = data.get("vertical")
            if ver is not None:
                ver = np.asarray(ver, dtype=float).reshape(nr, nt, s)
            return cls(hor, m, n, s, np.asarray(data["q0"], dtype=float),
                       tuple(data.get("seams", ())), ver)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"invalid disk map: {exc}") from None

    @classmethod
    def load(cls, path) -> "DiskMap":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(exc.msg, line=exc.lineno) from None
        return cls.from_dict(data)


STENCIL = 3  # half-width of the sixth-order central difference


def default_exclusion(n_rho: int, n_theta: int, seams=()) -> np.ndarray:
    """Nodes whose difference stencil reaches the center, boundary, base ray or a seam."""
    ex = np.zeros((n_rho, n_theta), dtype=bool)
    ex[:STENCIL] = True
    ex[-STENCIL:] = True
    ex[:, :STENCIL] = True
    ex[:, -STENCIL:] = True
    for r in seams:
        ex[max(r - STENCIL + 1, 0):r + STENCIL] = True
    return ex
