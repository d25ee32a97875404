"""Legacy ASCII VTK unstructured-grid export and a minimal reader.

ASCII is used so runs diff cleanly; floats carry 17 significant digits so
values round-trip exactly.  The reader does structural validation (header
counts against payload lengths) and is what the figure renderer consumes.
"""

import numpy as np

from .errors import ConfigError

_F = "%.17g"


def write_vtk(path, mesh, point_scalars=None, point_vectors=None, cell_scalars=None,
              title="phasetop output"):
    """Write mesh plus named point/cell data arrays.

    point_scalars / cell_scalars: dict name -> (n,) array
    point_vectors: dict name -> (n, 2) array (padded with z = 0)
    """
    point_scalars = point_scalars or {}
    point_vectors = point_vectors or {}
    cell_scalars = cell_scalars or {}
    nv = mesh.n_vertices
    nt = mesh.n_triangles
    lines = []
    lines.append("# vtk DataFile Version 3.0")
    lines.append(title)
    lines.append("ASCII")
    lines.append("DATASET UNSTRUCTURED_GRID")
    lines.append(f"POINTS {nv} double")
    for x, y in mesh.vertices:
        lines.append(f"{_F % x} {_F % y} 0")
    lines.append(f"CELLS {nt} {4 * nt}")
    for a, b, c in mesh.triangles:
        lines.append(f"3 {a} {b} {c}")
    lines.append(f"CELL_TYPES {nt}")
    lines.extend(["5"] * nt)
    if point_scalars or point_vectors:
        lines.append(f"POINT_DATA {nv}")
        for name, vals in point_scalars.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(_F % v for v in np.asarray(vals, float))
        for name, vals in point_vectors.items():
            lines.append(f"VECTORS {name} double")
            for vx, vy in np.asarray(vals, float):
                lines.append(f"{_F % vx} {_F % vy} 0")
    if cell_scalars:
        lines.append(f"CELL_DATA {nt}")
        for name, vals in cell_scalars.items():
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(_F % v for v in np.asarray(vals, float))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vtk(path):
    """Parse a legacy ASCII unstructured-grid file written by write_vtk.

    Returns a dict with points (n,2), cells (m,3), point_data and cell_data
    name->array dicts.  Raises ConfigError on any structural mismatch.
    """
    with open(path) as fh:
        tokens = fh.read().split("\n")
    lines = [ln.strip() for ln in tokens if ln.strip()]
    if len(lines) < 5 or not lines[0].startswith("# vtk DataFile"):
        raise ConfigError(f"{path}: not a legacy VTK file")
    if lines[2] != "ASCII" or lines[3] != "DATASET UNSTRUCTURED_GRID":
        raise ConfigError(f"{path}: unsupported VTK flavor")
    i = 4
    out = {"points": None, "cells": None, "point_data": {}, "cell_data": {}}

    def expect(prefix):
        nonlocal i
        if i >= len(lines) or not lines[i].startswith(prefix):
            raise ConfigError(f"{path}: expected {prefix} section")

    expect("POINTS")
    nv = int(lines[i].split()[1])
    pts = [list(map(float, lines[i + 1 + k].split())) for k in range(nv)]
    if any(len(p) != 3 for p in pts):
        raise ConfigError(f"{path}: POINTS payload malformed")
    out["points"] = np.array(pts)[:, :2]
    i += 1 + nv

    expect("CELLS")
    nt, total = int(lines[i].split()[1]), int(lines[i].split()[2])
    cells = [list(map(int, lines[i + 1 + k].split())) for k in range(nt)]
    if any(len(c) != 4 or c[0] != 3 for c in cells) or total != 4 * nt:
        raise ConfigError(f"{path}: CELLS payload malformed")
    out["cells"] = np.array(cells)[:, 1:]
    if out["cells"].size and out["cells"].max() >= nv:
        raise ConfigError(f"{path}: cell refers to a missing point")
    i += 1 + nt

    expect("CELL_TYPES")
    if int(lines[i].split()[1]) != nt:
        raise ConfigError(f"{path}: CELL_TYPES count mismatch")
    if any(lines[i + 1 + k] != "5" for k in range(nt)):
        raise ConfigError(f"{path}: only triangle cells supported")
    i += 1 + nt

    section, count = None, 0
    while i < len(lines):
        head = lines[i].split()
        if head[0] == "POINT_DATA":
            section, count = "point_data", int(head[1])
            if count != nv:
                raise ConfigError(f"{path}: POINT_DATA count mismatch")
            i += 1
        elif head[0] == "CELL_DATA":
            section, count = "cell_data", int(head[1])
            if count != nt:
                raise ConfigError(f"{path}: CELL_DATA count mismatch")
            i += 1
        elif head[0] == "SCALARS":
            if section is None:
                raise ConfigError(f"{path}: SCALARS outside a data section")
            name = head[1]
            if not lines[i + 1].startswith("LOOKUP_TABLE"):
                raise ConfigError(f"{path}: SCALARS missing lookup table")
            vals = [float(lines[i + 2 + k]) for k in range(count)]
            out[section][name] = np.array(vals)
            i += 2 + count
        elif head[0] == "VECTORS":
            if section is None:
                raise ConfigError(f"{path}: VECTORS outside a data section")
            name = head[1]
            vals = [list(map(float, lines[i + 1 + k].split())) for k in range(count)]
            if any(len(v) != 3 for v in vals):
                raise ConfigError(f"{path}: VECTORS payload malformed")
            out[section][name] = np.array(vals)[:, :2]
            i += 1 + count
        else:
            raise ConfigError(f"{path}: unexpected section {head[0]}")
    return out
