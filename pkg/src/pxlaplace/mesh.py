"""Uniform tensor grids on boxes, nodal quadrature, gradients and zero extension."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

__all__ = [
    "MeshError",
    "Mesh",
    "GridFunction",
    "P1Operator",
    "build_mesh",
    "gradient",
    "gradient_magnitude",
    "integrate",
    "extend_by_zero",
    "write_csv",
    "read_csv",
]


class MeshError(ValueError):
    pass


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform tensor grid on a box in one or two dimensions.

    Nodes are stored flat in C order with axis 0 (``x``) slowest.
    """

    box: tuple
    n: tuple

    def __post_init__(self):
        if len(self.box) != len(self.n) or len(self.box) not in (1, 2):
            raise MeshError("mesh dimension must be 1 or 2 with one (low, high) per axis")
        for (lo, hi), m in zip(self.box, self.n):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise MeshError(f"invalid axis interval ({lo}, {hi})")
            if int(m) != m or m < 3:
                raise MeshError(f"need at least 3 nodes per axis, got {m}")

    @property
    def d(self) -> int:
        return len(self.box)

    @property
    def shape(self) -> tuple:
        return tuple(int(m) for m in self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @cached_property
    def h(self) -> tuple:
        return tuple((hi - lo) / (m - 1) for (lo, hi), m in zip(self.box, self.shape))

    @cached_property
    def axes(self) -> tuple:
        return tuple(np.linspace(lo, hi, m) for (lo, hi), m in zip(self.box, self.shape))

    @cached_property
    def coords(self) -> tuple:
        """Per-axis flat coordinate arrays of all nodes."""
        grids = np.meshgrid(*self.axes, indexing="ij")
        return tuple(g.ravel() for g in grids)

    @cached_property
    def points(self) -> np.ndarray:
        return np.stack(self.coords, axis=1)

    @cached_property
    def boundary(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for ax in range(self.d):
            idx = [slice(None)] * self.d
            idx[ax] = 0
            mask[tuple(idx)] = True
            idx[ax] = -1
            mask[tuple(idx)] = True
        return mask.ravel()

    @cached_property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @cached_property
    def weights(self) -> np.ndarray:
        """Tensor trapezoid weights; they sum to the box volume."""
        w = _trapezoid_weights(self.shape[0], self.h[0])
        for m, h in zip(self.shape[1:], self.h[1:]):
            w = np.multiply.outer(w, _trapezoid_weights(m, h))
        return w.ravel()

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.box]))

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum((hi - lo) ** 2 for lo, hi in self.box)))

    @cached_property
    def p1(self) -> "P1Operator":
        return P1Operator.build(self)

    def evaluate(self, expr) -> np.ndarray:
        """Sample a field expression at all nodes."""
        return expr.on_points(self.coords)

    def describe(self) -> str:
        box = ",".join(f"{lo!r}:{hi!r}" for lo, hi in self.box)
        n = ",".join(str(m) for m in self.shape)
        return f"d={self.d}; box={box}; n={n}"


def build_mesh(box, n, d: int | None = None) -> Mesh:
    """Build a uniform mesh.

    ``box`` is ``(low, high)`` or a sequence of such pairs; ``n`` is a node
    count or a per-axis sequence.
    """
    if np.ndim(box) == 1:
        box = [box]
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if d is not None:
        if len(box) == 1 and d > 1:
            box = box * d
        if len(box) != d:
            raise MeshError(f"box has {len(box)} axes but d={d}")
    if np.ndim(n) == 0:
        n = (n,) * len(box)
    if any(int(m) != m for m in n):
        raise MeshError(f"node counts must be integers, got {n}")
    return Mesh(box, tuple(int(m) for m in n))


@dataclass(eq=False)
class GridFunction:
    """Nodal values on a mesh.

    With ``trace_zero`` set the function is a member of the discrete
    zero-trace space and must vanish exactly on boundary nodes.
    """

    mesh: Mesh
    values: np.ndarray
    trace_zero: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.values.size != self.mesh.size:
            raise MeshError(
                f"expected {self.mesh.size} nodal values, got {self.values.size}"
            )
        if self.trace_zero and np.any(self.values[self.mesh.boundary] != 0.0):
            raise MeshError("trace_zero function has nonzero boundary values")

    @classmethod
    def from_expr(cls, mesh: Mesh, expr, trace_zero: bool = False) -> "GridFunction":
        values = mesh.evaluate(expr)
        if trace_zero:
            values = values.copy()
            values[mesh.boundary] = 0.0
        return cls(mesh, values, trace_zero)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "GridFunction":
        return cls(mesh, np.zeros(mesh.size), True)

    def masked(self) -> "GridFunction":
        """Copy with boundary values set to zero and the trace flag raised."""
        v = self.values.copy()
        v[self.mesh.boundary] = 0.0
        return GridFunction(self.mesh, v, True)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.mesh, values, self.trace_zero)

    def __mul__(self, s: float) -> "GridFunction":
        return GridFunction(self.mesh, self.values * s, self.trace_zero)

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(
            self.mesh, self.values + other.values, self.trace_zero and other.trace_zero
        )

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(
            self.mesh, self.values - other.values, self.trace_zero and other.trace_zero
        )

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.mesh, -self.values, self.trace_zero)


def _values(g) -> np.ndarray:
    return g.values if isinstance(g, GridFunction) else np.asarray(g, dtype=float)


def gradient(f: GridFunction) -> list:
    """Nodal gradient: central differences inside, second-order one-sided at the edges."""
    mesh = f.mesh
    parts = np.gradient(f.values.reshape(mesh.shape), *mesh.h, edge_order=2)
    if mesh.d == 1:
        parts = [parts]
    return [GridFunction(mesh, g.ravel()) for g in parts]


def gradient_magnitude(f: GridFunction) -> np.ndarray:
    """Euclidean length of the nodal gradient vector at every node."""
    parts = gradient(f)
    if len(parts) == 1:
        return np.abs(parts[0].values)
    return np.sqrt(sum(g.values ** 2 for g in parts))


def integrate(g, mesh: Mesh | None = None) -> float:
    """Trapezoid quadrature of nodal samples."""
    if mesh is None:
        if not isinstance(g, GridFunction):
            raise TypeError("a mesh is required to integrate a plain array")
        mesh = g.mesh
    return float(np.dot(mesh.weights, _values(g)))


def extend_by_zero(f: GridFunction, bigger_box) -> GridFunction:
    """Extend a zero-trace function by zero to a larger, grid-aligned box."""
    if not f.trace_zero:
        raise MeshError("zero extension requires a trace_zero function")
    mesh = f.mesh
    if np.ndim(bigger_box) == 1:
        bigger_box = [bigger_box]
    bigger_box = [(float(lo), float(hi)) for lo, hi in bigger_box]
    if len(bigger_box) != mesh.d:
        raise MeshError("bigger box dimension mismatch")
    offsets, counts = [], []
    for (blo, bhi), (lo, hi), h in zip(bigger_box, mesh.box, mesh.h):
        if not (blo <= lo and hi <= bhi):
            raise MeshError("bigger box must contain the mesh box")
        k_lo = (lo - blo) / h
        k_hi = (bhi - hi) / h
        if abs(k_lo - round(k_lo)) > 1e-9 or abs(k_hi - round(k_hi)) > 1e-9:
            raise MeshError("bigger box is not commensurate with the grid spacing")
        offsets.append(int(round(k_lo)))
        counts.append(int(round(k_lo)) + int(round(k_hi)))
    new_n = tuple(m + c for m, c in zip(mesh.shape, counts))
    # Rebuild the bigger box from the spacing so both grids share nodes exactly.
    new_box = tuple(
        (lo - k * h, lo - k * h + (m - 1) * h)
        for (lo, _), k, h, m in zip(mesh.box, offsets, mesh.h, new_n)
    )
    big = Mesh(new_box, new_n)
    out = np.zeros(big.shape)
    sl = tuple(slice(k, k + m) for k, m in zip(offsets, mesh.shape))
    out[sl] = f.values.reshape(mesh.shape)
    return GridFunction(big, out.ravel(), True)


# ---------------------------------------------------------------------------
# Piecewise-linear element gradient used by the energy functional


@dataclass(frozen=True, eq=False)
class P1Operator:
    """Element-wise constant gradient of the piecewise-linear interpolant.

    In 1D the elements are the grid cells; in 2D each cell is split along
    its (i, j)-(i+1, j+1) diagonal into two triangles.  ``grad[k]`` maps
    nodal values to the k-th gradient component per element, ``average``
    maps nodal values to the vertex mean per element.
    """

    grad: tuple
    average: sp.csr_matrix
    area: np.ndarray

    @property
    def n_elements(self) -> int:
        return self.area.size

    @classmethod
    def build(cls, mesh: Mesh) -> "P1Operator":
        if mesh.d == 1:
            (m,), (h,) = mesh.shape, mesh.h
            g = sp.diags([-np.ones(m - 1) / h, np.ones(m - 1) / h], [0, 1], shape=(m - 1, m))
            avg = sp.diags([0.5 * np.ones(m - 1), 0.5 * np.ones(m - 1)], [0, 1], shape=(m - 1, m))
            return cls((g.tocsr(),), avg.tocsr(), np.full(m - 1, h))
        mx, my = mesh.shape
        hx, hy = mesh.h
        idx = np.arange(mesh.size).reshape(mx, my)
        a = idx[:-1, :-1].ravel()
        b = idx[1:, :-1].ravel()
        c = idx[1:, 1:].ravel()
        e = idx[:-1, 1:].ravel()
        nc = a.size
        # lower triangle (a, b, c) then upper triangle (a, c, e)
        tri = np.concatenate([np.stack([a, b, c], 1), np.stack([a, c, e], 1)])
        ne = 2 * nc
        r = np.arange(ne)
        gx = sp.csr_matrix(
            (
                np.concatenate([np.full(nc, -1 / hx), np.full(nc, 1 / hx),
                                np.full(nc, -1 / hx), np.full(nc, 1 / hx)]),
                (np.concatenate([r[:nc], r[:nc], r[nc:], r[nc:]]),
                 np.concatenate([a, b, e, c])),
            ),
            shape=(ne, mesh.size),
        )
        gy = sp.csr_matrix(
            (
                np.concatenate([np.full(nc, -1 / hy), np.full(nc, 1 / hy),
                                np.full(nc, -1 / hy), np.full(nc, 1 / hy)]),
                (np.concatenate([r[:nc], r[:nc], r[nc:], r[nc:]]),
                 np.concatenate([b, c, a, e])),
            ),
            shape=(ne, mesh.size),
        )
        avg = sp.csr_matrix(
            (np.full(3 * ne, 1.0 / 3.0), (np.repeat(r, 3), tri.ravel())),
            shape=(ne, mesh.size),
        )
        return cls((gx, gy), avg, np.full(ne, 0.5 * hx * hy))

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Gradient components per element, shape (d, n_elements)."""
        return np.stack([g @ values for g in self.grad])


# ---------------------------------------------------------------------------
# CSV import/export


def write_csv(f: GridFunction, path=None) -> str:
    """Serialize as CSV: a ``#`` metadata line then ``x[,y],value`` rows."""
    buf = io.StringIO()
    buf.write(f"# {f.mesh.describe()}; trace_zero={int(f.trace_zero)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in zip(*f.mesh.coords, f.values):
        writer.writerow([repr(float(v)) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise MeshError("missing CSV mesh metadata header")
    meta = {}
    for part in line[1:].split(";"):
        if "=" in part:
            k, v = part.split("=", 1)
            meta[k.strip()] = v.strip()
    try:
        box = [tuple(float(s) for s in ax.split(":")) for ax in meta["box"].split(",")]
        n = [int(s) for s in meta["n"].split(",")]
    except (KeyError, ValueError) as exc:
        raise MeshError(f"malformed CSV metadata: {line.strip()}") from exc
    meta["box"], meta["n"] = box, n
    return meta


def read_csv(path_or_text) -> GridFunction:
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(text).read_text()
    lines = text.splitlines()
    meta = _parse_header(lines[0])
    mesh = build_mesh(meta["box"], meta["n"])
    rows = [r for r in csv.reader(lines[1:]) if r]
    data = np.array([[float(v) for v in r] for r in rows])
    if data.shape != (mesh.size, mesh.d + 1):
        raise MeshError(f"CSV has shape {data.shape}, expected {(mesh.size, mesh.d + 1)}")
    for ax in range(mesh.d):
        if not np.allclose(data[:, ax], mesh.coords[ax], rtol=0, atol=1e-12):
            raise MeshError("CSV node coordinates do not match the declared mesh")
    return GridFunction(mesh, data[:, -1], meta.get("trace_zero", "0") == "1")
