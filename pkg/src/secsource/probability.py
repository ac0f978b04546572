"""Finite-alphabet probability tables and the information functionals built on them.

All distributions are dense float64 arrays over small alphabets (intended
scale is at most ~16 symbols per axis, ~32 for the Gaussian quantization
bridge).  Logarithms are base 2 everywhere, so every entropy or mutual
information is in bits.  The conventions 0*log(0) = 0 and "conditioning on
a zero-probability event contributes zero" are applied throughout; they are
what make deterministic channels behave continuously.

Tolerances
----------
PMF_ATOL      normalization required of user-supplied pmfs / matrix rows
JOINT_ATOL    normalization required of (derived) joint tables
IDENT_ATOL    slack allowed on exact information identities (chain rule,
              Markov-chain certificates, ...)

Every object is immutable after construction (arrays are copied and marked
read-only), so all functions here are pure and safe to call from parallel
workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

PMF_ATOL = 1e-12
JOINT_ATOL = 1e-10
IDENT_ATOL = 1e-9

# Canonical axis names used by the region machinery.  "Xt" is the encoder's
# measurement of the remote source X; Y and Z are the decoder's and the
# eavesdropper's measurements.
AX_Q = "Q"
AX_V = "V"
AX_U = "U"
AX_XT = "Xt"
AX_X = "X"
AX_Y = "Y"
AX_Z = "Z"
SOURCE_AXES = (AX_XT, AX_X, AX_Y, AX_Z)


class ModelError(ValueError):
    """A probability object violates its construction contract."""


class DimensionError(ModelError):
    """Shapes or axis names are inconsistent."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.probs)
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionError("a pmf must be a non-empty vector")
        if np.any(arr < 0.0):
            raise ModelError("pmf entries must be non-negative")
        if abs(float(arr.sum()) - 1.0) > PMF_ATOL:
            raise ModelError(f"pmf sums to {arr.sum():.17g}, not 1 within {PMF_ATOL}")
        object.__setattr__(self, "probs", arr)

    @property
    def support_size(self) -> int:
        return self.probs.size

    @staticmethod
    def uniform(n: int) -> "Pmf":
        return Pmf(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class StochasticMatrix:
    """Row-stochastic matrix: one conditional pmf per input symbol."""

    rows: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.rows)
        if arr.ndim != 2 or arr.size == 0:
            raise DimensionError("a stochastic matrix must be 2-D and non-empty")
        if np.any(arr < 0.0):
            raise ModelError("channel entries must be non-negative")
        sums = arr.sum(axis=1)
        bad = np.where(np.abs(sums - 1.0) > PMF_ATOL)[0]
        if bad.size:
            raise ModelError(
                f"row {bad[0]} sums to {sums[bad[0]]:.17g}, not 1 within {PMF_ATOL}"
            )
        object.__setattr__(self, "rows", arr)

    @property
    def input_size(self) -> int:
        return self.rows.shape[0]

    @property
    def output_size(self) -> int:
        return self.rows.shape[1]

    def row(self, i: int) -> Pmf:
        return Pmf(self.rows[i])

    @staticmethod
    def identity(n: int) -> "StochasticMatrix":
        return StochasticMatrix(np.eye(n))

    @staticmethod
    def constant(input_size: int, output_size: int = 1) -> "StochasticMatrix":
        """Channel whose output is independent of the input (uniform rows)."""
        return StochasticMatrix(np.full((input_size, output_size), 1.0 / output_size))


def bsc(crossover: float) -> StochasticMatrix:
    """Binary symmetric channel with the given crossover probability."""
    if not 0.0 <= crossover <= 1.0:
        raise ModelError("crossover must lie in [0, 1]")
    e = float(crossover)
    return StochasticMatrix(np.array([[1.0 - e, e], [e, 1.0 - e]]))


@dataclass(frozen=True)
class SourceModel:
    """Remote source plus its three measurement channels.

    ``px`` is the law of the remote source X, ``meas_enc`` the encoder
    measurement channel X -> Xt, and ``meas_dec_eve`` the joint channel
    X -> (Y, Z) over the product alphabet with Y-major column ordering
    (column index = y * z_size + z).
    """

    px: Pmf
    meas_enc: StochasticMatrix
    meas_dec_eve: StochasticMatrix
    y_size: int
    z_size: int
    x_labels: Optional[tuple[str, ...]] = None
    xt_labels: Optional[tuple[str, ...]] = None
    y_labels: Optional[tuple[str, ...]] = None
    z_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        n = self.px.support_size
        if self.meas_enc.input_size != n or self.meas_dec_eve.input_size != n:
            raise DimensionError("channel input sizes must match |X|")
        if self.y_size < 1 or self.z_size < 1:
            raise DimensionError("y_size and z_size must be positive")
        if self.meas_dec_eve.output_size != self.y_size * self.z_size:
            raise DimensionError(
                "decoder/eavesdropper channel must have |Y|*|Z| output columns"
            )
        for labels, size, what in (
            (self.x_labels, n, "x"),
            (self.xt_labels, self.xtilde_size, "xtilde"),
            (self.y_labels, self.y_size, "y"),
            (self.z_labels, self.z_size, "z"),
        ):
            if labels is not None and len(labels) != size:
                raise DimensionError(f"{what} label count does not match alphabet size")

    @property
    def x_size(self) -> int:
        return self.px.support_size

    @property
    def xtilde_size(self) -> int:
        return self.meas_enc.output_size

    def yz_table(self) -> np.ndarray:
        """meas_dec_eve reshaped to (|X|, |Y|, |Z|)."""
        return self.meas_dec_eve.rows.reshape(self.x_size, self.y_size, self.z_size)

    def p_y_given_x(self) -> StochasticMatrix:
        return StochasticMatrix(self.yz_table().sum(axis=2))

    def p_z_given_x(self) -> StochasticMatrix:
        return StochasticMatrix(self.yz_table().sum(axis=1))

    @staticmethod
    def from_channels(
        px: Pmf,
        p_xtilde_given_x: StochasticMatrix,
        p_y_given_x: StochasticMatrix,
        p_z_given_x: StochasticMatrix,
    ) -> "SourceModel":
        """Build a model where Y and Z are conditionally independent given X."""
        ny, nz = p_y_given_x.output_size, p_z_given_x.output_size
        prod = np.einsum("xy,xz->xyz", p_y_given_x.rows, p_z_given_x.rows)
        return SourceModel(
            px=px,
            meas_enc=p_xtilde_given_x,
            meas_dec_eve=StochasticMatrix(prod.reshape(px.support_size, ny * nz)),
            y_size=ny,
            z_size=nz,
        )


@dataclass(frozen=True)
class JointPmf:
    """Dense joint distribution over named finite random variables."""

    names: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        arr = _frozen_array(self.table)
        if len(set(names)) != len(names):
            raise DimensionError("axis names must be unique")
        if arr.ndim != len(names):
            raise DimensionError("table rank must equal the number of axes")
        if np.any(arr < -PMF_ATOL):
            raise ModelError("joint table has a negative entry")
        if abs(float(arr.sum()) - 1.0) > JOINT_ATOL:
            raise ModelError(
                f"joint table sums to {arr.sum():.17g}, not 1 within {JOINT_ATOL}"
            )
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "table", arr)

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.table.shape

    def size_of(self, name: str) -> int:
        return self.table.shape[self._axis(name)]

    def _axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DimensionError(f"unknown variable name {name!r}") from None

    def _axes(self, names: Iterable[str]) -> tuple[int, ...]:
        return tuple(self._axis(n) for n in names)

    def marginal(self, keep: Iterable[str]) -> "JointPmf":
        """Sum out every axis not in ``keep``; axis order follows this joint."""
        keep_set = set(keep)
        for name in keep_set:
            self._axis(name)  # validates
        kept = tuple(n for n in self.names if n in keep_set)
        drop = tuple(i for i, n in enumerate(self.names) if n not in keep_set)
        return JointPmf(kept, self.table.sum(axis=drop) if drop else self.table)

    def marginal_table(self, keep: Iterable[str]) -> np.ndarray:
        """Marginal as a bare array (kept axes in this joint's order)."""
        keep_set = set(keep)
        drop = tuple(i for i, n in enumerate(self.names) if n not in keep_set)
        for name in keep_set:
            self._axis(name)
        return self.table.sum(axis=drop) if drop else self.table

    def marginal_table_ordered(self, keep: Sequence[str]) -> np.ndarray:
        """Marginal as a bare array with axes in the *requested* order."""
        keep = tuple(keep)
        m = self.marginal_table(keep)
        kept_order = tuple(n for n in self.names if n in set(keep))
        return np.transpose(m, [kept_order.index(n) for n in keep])

    def entropy(self, variables: Optional[Iterable[str]] = None) -> float:
        """Shannon entropy in bits of the marginal on ``variables``."""
        names = tuple(variables) if variables is not None else self.names
        m = self.marginal_table(names)
        return _entropy_bits(m)

    def mutual_information(
        self,
        a: Iterable[str],
        b: Iterable[str],
        given: Iterable[str] = (),
    ) -> float:
        """I(A;B|C) in bits, clamped to 0 when within tolerance below zero."""
        a, b, c = tuple(a), tuple(b), tuple(given)
        groups = a + b + c
        if len(set(groups)) != len(groups):
            raise DimensionError("variable sets passed to I(A;B|C) must be disjoint")
        for name in groups:
            self._axis(name)
        value = (
            self.entropy(a + c)
            + self.entropy(b + c)
            - self.entropy(a + b + c)
            - self.entropy(c)
        )
        return 0.0 if -JOINT_ATOL < value < 0.0 else value

    def to_text(self) -> str:
        """Debug serialization: axis names/sizes plus the flat probability list."""
        header = " ".join(f"{n}:{s}" for n, s in zip(self.names, self.sizes))
        body = " ".join(format(p, ".17g") for p in self.table.ravel())
        return header + "\n" + body


def _entropy_bits(table: np.ndarray) -> float:
    p = np.asarray(table, dtype=float).ravel()
    p = p[p > 0.0]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def build_joint(model: SourceModel) -> JointPmf:
    """Joint law of (Xt, X, Y, Z): P(x)P(xt|x)P(y,z|x).

    The chain Xt - X - (Y, Z) holds by construction.
    """
    table = np.einsum(
        "x,xa,xyz->axyz", model.px.probs, model.meas_enc.rows, model.yz_table()
    )
    return JointPmf(SOURCE_AXES, table)


def marginal(joint: JointPmf, keep: Iterable[str]) -> JointPmf:
    return joint.marginal(keep)


def entropy(joint: JointPmf, variables: Optional[Iterable[str]] = None) -> float:
    return joint.entropy(variables)


def conditional_mutual_information(
    joint: JointPmf,
    a: Iterable[str],
    b: Iterable[str],
    given: Iterable[str] = (),
) -> float:
    return joint.mutual_information(a, b, given)
