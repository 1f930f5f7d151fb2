"""
Monitor Dataset
Daily MD8 ozone observations at monitor sites, linked to grid cells
"""

from dataclasses import dataclass

import numpy as np

from src.errors import InputError, LinkError


@dataclass
class MonitorDataset:
    """
    Records (day, site, y) plus one row of geometry per site

    `site` holds zero-based indices into site_ids / site_xy / site_cell.
    """
    day: np.ndarray         # (n,) int
    site: np.ndarray        # (n,) int
    y: np.ndarray           # (n,) ppb
    site_ids: np.ndarray    # (n_sites,)
    site_xy: np.ndarray     # (n_sites, 2) km
    site_cell: np.ndarray   # (n_sites,) grid cell id per site

    def __post_init__(self):
        self.day = np.asarray(self.day, dtype=int).ravel()
        self.site = np.asarray(self.site, dtype=int).ravel()
        self.y = np.asarray(self.y, dtype=float).ravel()
        self.site_ids = np.asarray(self.site_ids)
        self.site_xy = np.asarray(self.site_xy, dtype=float).reshape(-1, 2)
        self.site_cell = np.asarray(self.site_cell)
        if not (self.day.shape == self.site.shape == self.y.shape):
            raise InputError("day, site and y must have one entry per record")
        n_sites = len(self.site_ids)
        if self.site_xy.shape[0] != n_sites or len(self.site_cell) != n_sites:
            raise InputError("site geometry arrays must have one row per site")
        if len(self.y) and (self.site.min() < 0 or self.site.max() >= n_sites):
            raise InputError("record site index out of range")
        if np.any(self.y < 0) or np.any(~np.isfinite(self.y)):
            raise InputError("ozone values must be finite and non-negative")

    def __len__(self):
        return self.y.shape[0]

    @property
    def n_sites(self):
        return len(self.site_ids)

    def subset(self, rows):
        """Dataset restricted to the given record rows (site table unchanged)"""
        rows = np.asarray(rows, dtype=int)
        return MonitorDataset(self.day[rows], self.site[rows], self.y[rows],
                              self.site_ids, self.site_xy, self.site_cell)

    def site_rows(self):
        """List of record-row index arrays, one per site"""
        order = np.argsort(self.site, kind='stable')
        bounds = np.searchsorted(self.site[order], np.arange(self.n_sites + 1))
        return [order[bounds[s]:bounds[s + 1]] for s in range(self.n_sites)]

    def link(self, field):
        """
        Map each site to its column in a sensitivity field

        Args:
            field: SensitivityField

        Returns:
            numpy array (n_sites,) of cell indices
        """
        cells = field.cell_index(self.site_cell)
        missing = [str(c) for c, i in zip(self.site_cell.tolist(), cells) if i < 0]
        if missing:
            raise LinkError(f"{len(missing)} site(s) point at unknown cells, e.g. {missing[:3]}")
        if len(self) and (self.day.min() < 0 or self.day.max() >= field.n_days):
            raise LinkError(
                f"records span days {self.day.min()}..{self.day.max()}, "
                f"field has {field.n_days} days")
        return cells

    def record_cells(self, field):
        """Cell index of every record"""
        return self.link(field)[self.site]
