"""Spatial overlap of resonator near-field profiles.

The overlap integral F_fg = int_S conj(f) g dA is evaluated by the midpoint
rule on a uniform grid (cell area dx*dy, lengths in micrometers). The
normalized overlap parameter

    eta = |F_fg| / sqrt(F_ff * F_gg)

is bounded by 1 through Cauchy-Schwarz and measures how much of one mode's
matter excitation lives inside the other's.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import ProfileFormatError


@dataclass(frozen=True)
class FieldProfile:
    """Complex in-plane mode profile sampled on a uniform nx x ny grid.

    dx, dy are the cell sizes in micrometers; values[i, j] is the sample in
    row i, column j (row-major)."""

    nx: int
    ny: int
    dx: float
    dy: float
    values: np.ndarray

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid must contain at least one cell per axis")
        if self.dx <= 0.0 or self.dy <= 0.0:
            raise ValueError("grid spacing must be positive")
        values = np.array(self.values, dtype=complex)
        if values.shape != (self.nx, self.ny):
            raise ValueError(
                f"values shape {values.shape} does not match ({self.nx}, {self.ny})")
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class DomainMask:
    """Boolean integration domain on the same grid as a profile."""

    nx: int
    ny: int
    inside: np.ndarray

    def __post_init__(self):
        inside = np.array(self.inside, dtype=bool)
        if inside.shape != (self.nx, self.ny):
            raise ValueError(
                f"mask shape {inside.shape} does not match ({self.nx}, {self.ny})")
        if not inside.any():
            raise ValueError("mask selects no cells")
        inside.flags.writeable = False
        object.__setattr__(self, "inside", inside)


def _check_grids(f, g, mask):
    if (f.nx, f.ny) != (g.nx, g.ny) or (f.nx, f.ny) != (mask.nx, mask.ny):
        raise ValueError(
            f"grid dimensions differ: {(f.nx, f.ny)} vs {(g.nx, g.ny)} vs "
            f"{(mask.nx, mask.ny)}")
    if f.dx != g.dx or f.dy != g.dy:
        raise ValueError(
            f"grid spacings differ: ({f.dx}, {f.dy}) vs ({g.dx}, {g.dy})")


def overlap_integral(f, g, mask):
    """Midpoint-rule overlap integral F_fg (complex, units um^2)."""
    _check_grids(f, g, mask)
    return complex(np.sum(np.conj(f.values[mask.inside]) * g.values[mask.inside])
                   * f.dx * f.dy)


def overlap_parameter(f, g, mask):
    """Normalized overlap |F_fg| / sqrt(F_ff F_gg), in [0, 1]."""
    if f is g:
        # the ratio is identically one; skip the rounding of the quadratures
        _check_grids(f, g, mask)
        if not np.any(np.abs(f.values[mask.inside]) > 0.0):
            raise ValueError("profile vanishes on the mask; overlap undefined")
        return 1.0
    f_self = overlap_integral(f, f, mask).real
    g_self = overlap_integral(g, g, mask).real
    if f_self <= 0.0 or g_self <= 0.0:
        raise ValueError("profile vanishes on the mask; overlap undefined")
    eta = abs(overlap_integral(f, g, mask)) / (math.sqrt(f_self) * math.sqrt(g_self))
    return min(eta, 1.0)


def effective_mode_volume(f, mask, physical_volume):
    """Effective volume V / F_ff steering the microscopic coupling strength.

    The self-overlap is taken in the same units the profile is normalized
    in; a profile with unit self-overlap returns physical_volume unchanged.
    """
    if physical_volume <= 0.0:
        raise ValueError("physical volume must be positive")
    f_self = overlap_integral(f, f, mask).real
    if f_self <= 0.0:
        raise ValueError("profile vanishes on the mask; mode volume undefined")
    return physical_volume / f_self


def full_mask(nx, ny):
    """Mask covering the whole grid."""
    return DomainMask(nx=nx, ny=ny, inside=np.ones((nx, ny), dtype=bool))


def central_square_mask(nx, ny, dx, dy, half_width):
    """Square mask |x|, |y| <= half_width (um) about the grid center."""
    if half_width <= 0.0:
        raise ValueError("half_width must be positive")
    x = (np.arange(nx) - (nx - 1) / 2.0) * dx
    y = (np.arange(ny) - (ny - 1) / 2.0) * dy
    inside = (np.abs(x)[:, None] <= half_width) & (np.abs(y)[None, :] <= half_width)
    if not inside.any():
        raise ValueError("half_width smaller than one grid cell")
    return DomainMask(nx=nx, ny=ny, inside=inside)


# Synthetic near-field fixtures. The lc profile is the single positive lobe
# of the lumped-element mode; the dipolar profile shares the central lobe
# but adds four opposite-sign corner lobes, so the two are proportional near
# the center and nearly orthogonal over the full plane.
DEFAULT_GRID = dict(nx=192, ny=192, dx=0.3125, dy=0.3125)   # 60 um square
DEFAULT_CENTER_WIDTH = 5.0      # um, gaussian width of the shared lobe
DEFAULT_CORNER_OFFSET = 18.0    # um, corner lobe centers at (+-o, +-o)
DEFAULT_CORNER_WIDTH = 7.0      # um
DEFAULT_CORNER_AMPLITUDE = 2.0


def synthetic_profile(kind, nx=None, ny=None, dx=None, dy=None,
                      center_width=DEFAULT_CENTER_WIDTH,
                      corner_offset=DEFAULT_CORNER_OFFSET,
                      corner_width=DEFAULT_CORNER_WIDTH,
                      corner_amplitude=DEFAULT_CORNER_AMPLITUDE):
    """Analytic stand-ins for the two resonator near fields.

    kind "lc": exp(-r^2 / (2 w^2)) with w = center_width.
    kind "dipolar": the same central lobe minus corner_amplitude times four
    corner lobes of width corner_width centered at (+-corner_offset,
    +-corner_offset).
    """
    nx = DEFAULT_GRID["nx"] if nx is None else nx
    ny = DEFAULT_GRID["ny"] if ny is None else ny
    dx = DEFAULT_GRID["dx"] if dx is None else dx
    dy = DEFAULT_GRID["dy"] if dy is None else dy
    if center_width <= 0.0 or corner_width <= 0.0:
        raise ValueError("gaussian widths must be positive")
    x = (np.arange(nx) - (nx - 1) / 2.0) * dx
    y = (np.arange(ny) - (ny - 1) / 2.0) * dy
    xx, yy = np.meshgrid(x, y, indexing="ij")
    center = np.exp(-(xx ** 2 + yy ** 2) / (2.0 * center_width ** 2))
    if kind == "lc":
        values = center
    elif kind == "dipolar":
        corners = np.zeros_like(center)
        for sx in (-1.0, 1.0):
            for sy in (-1.0, 1.0):
                corners += np.exp(-((xx - sx * corner_offset) ** 2
                                    + (yy - sy * corner_offset) ** 2)
                                  / (2.0 * corner_width ** 2))
        values = center - corner_amplitude * corners
    else:
        raise ValueError(f"unknown profile kind {kind!r}")
    return FieldProfile(nx=nx, ny=ny, dx=dx, dy=dy, values=values)


# --- plain-text file format -------------------------------------------------
# header line: "nx ny dx dy" (dx, dy in um), then nx*ny whitespace-separated
# entries in row-major order; profiles store complex samples as "re,im",
# masks store 0 or 1.

def _parse_header(path, line):
    parts = line.split()
    if len(parts) != 4:
        raise ProfileFormatError(
            f"{path}:1: header must be 'nx ny dx dy', got {line.strip()!r}")
    try:
        nx, ny = int(parts[0]), int(parts[1])
        dx, dy = float(parts[2]), float(parts[3])
    except ValueError as exc:
        raise ProfileFormatError(f"{path}:1: bad header value: {exc}") from exc
    return nx, ny, dx, dy


def _read_tokens(path, lines):
    for lineno, line in enumerate(lines, start=2):
        for token in line.split():
            yield lineno, token


def load_profile(path):
    """Read a FieldProfile from the plain-text format."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if not header.strip():
            raise ProfileFormatError(f"{path}:1: empty header line")
        nx, ny, dx, dy = _parse_header(path, header)
        flat = np.empty(nx * ny, dtype=complex)
        count = 0
        for lineno, token in _read_tokens(path, fh):
            if count >= nx * ny:
                raise ProfileFormatError(
                    f"{path}:{lineno}: more than nx*ny = {nx * ny} entries")
            re_im = token.split(",")
            if len(re_im) != 2:
                raise ProfileFormatError(
                    f"{path}:{lineno}: entry {token!r} is not 're,im'")
            try:
                flat[count] = complex(float(re_im[0]), float(re_im[1]))
            except ValueError as exc:
                raise ProfileFormatError(
                    f"{path}:{lineno}: bad entry {token!r}: {exc}") from exc
            count += 1
    if count != nx * ny:
        raise ProfileFormatError(
            f"{path}: expected nx*ny = {nx * ny} entries, found {count}")
    try:
        return FieldProfile(nx=nx, ny=ny, dx=dx, dy=dy,
                            values=flat.reshape(nx, ny))
    except ValueError as exc:
        raise ProfileFormatError(f"{path}: {exc}") from exc


def save_profile(path, profile):
    """Write a FieldProfile in the plain-text format, one grid row per line."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{profile.nx} {profile.ny} "
                 f"{float(profile.dx)!r} {float(profile.dy)!r}\n")
        for row in profile.values:
            fh.write(" ".join(f"{float(v.real)!r},{float(v.imag)!r}"
                              for v in row) + "\n")


def load_mask(path):
    """Read a DomainMask from the plain-text format (entries 0 or 1)."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if not header.strip():
            raise ProfileFormatError(f"{path}:1: empty header line")
        nx, ny, _, _ = _parse_header(path, header)
        flat = np.empty(nx * ny, dtype=bool)
        count = 0
        for lineno, token in _read_tokens(path, fh):
            if count >= nx * ny:
                raise ProfileFormatError(
                    f"{path}:{lineno}: more than nx*ny = {nx * ny} entries")
            if token == "0":
                flat[count] = False
            elif token == "1":
                flat[count] = True
            else:
                raise ProfileFormatError(
                    f"{path}:{lineno}: mask entry {token!r} is not 0 or 1")
            count += 1
    if count != nx * ny:
        raise ProfileFormatError(
            f"{path}: expected nx*ny = {nx * ny} entries, found {count}")
    try:
        return DomainMask(nx=nx, ny=ny, inside=flat.reshape(nx, ny))
    except ValueError as exc:
        raise ProfileFormatError(f"{path}: {exc}") from exc


def save_mask(path, mask, dx=1.0, dy=1.0):
    """Write a DomainMask in the plain-text format."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{mask.nx} {mask.ny} {float(dx)!r} {float(dy)!r}\n")
        for row in mask.inside:
            fh.write(" ".join("1" if v else "0" for v in row) + "\n")
