"""
Reduced-Form Model
Second-order Taylor emulator of the photochemical model built from
gridded base concentrations and sensitivity coefficients
"""

from dataclasses import dataclass, field as dc_field
from itertools import combinations

import numpy as np

from src.errors import InputError


@dataclass
class SensitivityField:
    """
    Gridded base run plus first/second-order sensitivities (all ppb)

    Arrays are indexed (t, cell); per-input arrays carry a leading input axis.
    Cross terms are stored once per unordered pair, in the order of `pairs`.
    """
    cell_ids: np.ndarray            # (n_cells,)
    xy: np.ndarray                  # (n_cells, 2) km
    base: np.ndarray                # (n_T, n_cells)
    first_order: np.ndarray         # (d, n_T, n_cells)
    second_order_diag: np.ndarray   # (d, n_T, n_cells)
    second_order_cross: np.ndarray  # (n_pairs, n_T, n_cells)
    input_names: list = dc_field(default_factory=list)

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=float)
        self.first_order = np.asarray(self.first_order, dtype=float)
        self.second_order_diag = np.asarray(self.second_order_diag, dtype=float)
        d = self.first_order.shape[0] if self.first_order.ndim == 3 else 0
        cross = np.asarray(self.second_order_cross, dtype=float)
        if cross.size == 0:
            cross = np.zeros((0,) + self.base.shape)
        self.second_order_cross = cross
        self.cell_ids = np.asarray(self.cell_ids)
        self.xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        if not self.input_names:
            self.input_names = [f"input_{j + 1}" for j in range(d)]
        self._validate()

    def _validate(self):
        if self.base.ndim != 2:
            raise InputError("base must be a (n_T, n_cells) array")
        shape = self.base.shape
        if self.first_order.ndim != 3 or self.first_order.shape[1:] != shape:
            raise InputError("first_order must be (d, n_T, n_cells)")
        d = self.first_order.shape[0]
        if d < 1:
            raise InputError("a sensitivity field needs at least one input")
        if self.second_order_diag.shape != self.first_order.shape:
            raise InputError("second_order_diag must match first_order")
        if self.second_order_cross.shape != (len(self.pairs),) + shape:
            raise InputError(
                f"second_order_cross must be ({len(self.pairs)}, n_T, n_cells) for d={d}")
        if len(self.cell_ids) != shape[1] or self.xy.shape[0] != shape[1]:
            raise InputError("cell_ids/xy length must equal n_cells")
        if len(self.input_names) != d:
            raise InputError("input_names must have one label per input")

    @property
    def n_inputs(self):
        return self.first_order.shape[0]

    @property
    def n_days(self):
        return self.base.shape[0]

    @property
    def n_cells(self):
        return self.base.shape[1]

    @property
    def pairs(self):
        """Unordered input pairs (l, j), l < j, zero-based"""
        return list(combinations(range(self.first_order.shape[0]), 2))

    def cell_index(self, cell_ids):
        """
        Translate cell ids to column indices

        Args:
            cell_ids: Iterable of cell ids

        Returns:
            numpy array of indices, -1 where the id is unknown
        """
        lookup = {cid: i for i, cid in enumerate(self.cell_ids.tolist())}
        return np.array([lookup.get(c, -1) for c in np.asarray(cell_ids).tolist()], dtype=int)

    def subset_cells(self, cells):
        """New field restricted to the given cell indices (grid thinning etc.)"""
        cells = np.asarray(cells, dtype=int)
        return SensitivityField(
            cell_ids=self.cell_ids[cells],
            xy=self.xy[cells],
            base=self.base[:, cells],
            first_order=self.first_order[:, :, cells],
            second_order_diag=self.second_order_diag[:, :, cells],
            second_order_cross=self.second_order_cross[:, :, cells],
            input_names=list(self.input_names),
        )


def _check_alpha(field, alpha):
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.shape[0] != field.n_inputs:
        raise InputError(
            f"perturbation has {alpha.shape[0]} components, field has {field.n_inputs} inputs")
    return alpha


def _rfm_kernel(base, first, diag, cross, pairs, alpha):
    # Accumulate term by term with elementwise ops only, so a scalar slice and
    # the full grid round identically.
    out = np.array(base, dtype=float, copy=True)
    for j in range(len(alpha)):
        out = out + first[j] * alpha[j]
    for j in range(len(alpha)):
        out = out + 0.5 * diag[j] * (alpha[j] * alpha[j])
    for p, (l, j) in enumerate(pairs):
        out = out + cross[p] * (alpha[l] * alpha[j])
    return out


def evaluate_rfm(field, t, cell, alpha):
    """
    Reduced-form concentration at one (day, cell)

    Args:
        field: SensitivityField
        t: Day index
        cell: Cell index
        alpha: Fractional perturbation per input

    Returns:
        float: concentration in ppb (may be negative for extreme cuts; not clipped)
    """
    alpha = _check_alpha(field, alpha)
    if not (0 <= t < field.n_days) or not (0 <= cell < field.n_cells):
        raise InputError(f"(t={t}, cell={cell}) is outside the field")
    value = _rfm_kernel(
        field.base[t, cell],
        field.first_order[:, t, cell],
        field.second_order_diag[:, t, cell],
        field.second_order_cross[:, t, cell],
        field.pairs,
        alpha,
    )
    return float(value)


def evaluate_rfm_field(field, alpha):
    """
    Reduced-form concentrations over the whole grid

    Args:
        field: SensitivityField
        alpha: Fractional perturbation per input

    Returns:
        numpy array (n_T, n_cells) in ppb
    """
    alpha = _check_alpha(field, alpha)
    return _rfm_kernel(
        field.base, field.first_order, field.second_order_diag,
        field.second_order_cross, field.pairs, alpha,
    )


def evaluate_rfm_at(field, days, cells, alpha):
    """
    Reduced-form concentrations at scattered (day, cell) pairs

    Args:
        field: SensitivityField
        days: Integer day indices, shape (n,)
        cells: Integer cell indices, shape (n,)
        alpha: Fractional perturbation per input

    Returns:
        numpy array (n,) in ppb
    """
    alpha = _check_alpha(field, alpha)
    days = np.asarray(days, dtype=int)
    cells = np.asarray(cells, dtype=int)
    return _rfm_kernel(
        field.base[days, cells],
        field.first_order[:, days, cells],
        field.second_order_diag[:, days, cells],
        field.second_order_cross[:, days, cells],
        field.pairs,
        alpha,
    )


def compose_perturbation(alpha, eta):
    """
    Stack a control strategy on top of the calibrated perturbation

    Args:
        alpha: Calibrated fractional perturbation per input
        eta: Additional fractional change per input, each > -1

    Returns:
        numpy array: (1 + alpha) * (1 + eta) - 1, written as alpha + eta * (1 + alpha)
        so that eta = 0 returns alpha bit for bit
    """
    alpha = np.asarray(alpha, dtype=float).ravel()
    eta = np.asarray(eta, dtype=float).ravel()
    if alpha.shape != eta.shape:
        raise InputError(f"eta has {eta.shape[0]} components, alpha has {alpha.shape[0]}")
    if np.any(eta <= -1.0) or np.any(alpha <= -1.0):
        raise InputError("perturbations must stay above -100%")
    return alpha + eta * (1.0 + alpha)


def negative_fraction(concentrations):
    """Share of RFM values below zero (reported, never clipped)"""
    concentrations = np.asarray(concentrations)
    if concentrations.size == 0:
        return 0.0
    return float(np.mean(concentrations < 0.0))
