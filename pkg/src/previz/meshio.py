"""Triangle-soup mesh interchange (text and little-endian binary).

Both forms carry positions + triangle indices + optional per-vertex color;
anything richer in the source asset is expected to be flattened before
import. See docs/formats.md for the exact grammar.
"""
from __future__ import annotations

import struct
from pathlib import Path

from .scene import InvalidGeometry, ProxyGeometry

TEXT_MAGIC = "previz-mesh/1"
BINARY_MAGIC = b"PVZMESH1"


def load_mesh(path) -> ProxyGeometry:
    data = Path(path).read_bytes()
    if data.startswith(BINARY_MAGIC):
        return _parse_binary(data)
    return _parse_text(data.decode("utf-8"))


def loads_text(text: str) -> ProxyGeometry:
    return _parse_text(text)


def _parse_text(text: str) -> ProxyGeometry:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != TEXT_MAGIC:
        raise InvalidGeometry(f"mesh text must start with {TEXT_MAGIC!r}")
    try:
        nv = int(lines[1].split()[1])
        nt = int(lines[2].split()[1])
        if lines[1].split()[0] != "vertices" or lines[2].split()[0] != "triangles":
            raise ValueError
    except (IndexError, ValueError):
        raise InvalidGeometry("mesh header must be 'vertices N' then 'triangles M'") from None
    body = lines[3:]
    if len(body) != nv + nt:
        raise InvalidGeometry(f"expected {nv + nt} body lines, found {len(body)}")
    verts, colors, has_color = [], [], None
    for ln in body[:nv]:
        parts = ln.split()
        if len(parts) not in (3, 6):
            raise InvalidGeometry(f"vertex line needs 3 or 6 numbers: {ln!r}")
        if has_color is None:
            has_color = len(parts) == 6
        elif has_color != (len(parts) == 6):
            raise InvalidGeometry("mixed colored/uncolored vertex lines")
        verts.append(tuple(float(v) for v in parts[:3]))
        if has_color:
            colors.append(tuple(float(v) for v in parts[3:]))
    tris = []
    for ln in body[nv:]:
        parts = ln.split()
        if len(parts) != 3:
            raise InvalidGeometry(f"triangle line needs 3 indices: {ln!r}")
        tris.append(tuple(int(v) for v in parts))
    return ProxyGeometry.mesh(verts, tris, colors if has_color else None)


def _parse_binary(data: bytes) -> ProxyGeometry:
    off = len(BINARY_MAGIC)
    try:
        nv, nt, has_color = struct.unpack_from("<IIB", data, off)
        off += 9
        stride = 6 if has_color else 3
        floats = struct.unpack_from(f"<{nv * stride}f", data, off)
        off += nv * stride * 4
        idx = struct.unpack_from(f"<{nt * 3}I", data, off)
        off += nt * 12
    except struct.error:
        raise InvalidGeometry("truncated binary mesh") from None
    if off != len(data):
        raise InvalidGeometry(f"{len(data) - off} trailing bytes after mesh data")
    verts = [tuple(floats[i * stride: i * stride + 3]) for i in range(nv)]
    colors = [tuple(floats[i * stride + 3: i * stride + 6]) for i in range(nv)] if has_color else None
    tris = [tuple(idx[i * 3: i * 3 + 3]) for i in range(nt)]
    return ProxyGeometry.mesh(verts, tris, colors)


def dump_mesh_text(geom: ProxyGeometry) -> str:
    if geom.kind != "mesh":
        raise InvalidGeometry("only imported meshes serialize to the soup format")
    out = [TEXT_MAGIC, f"vertices {len(geom.vertices)}", f"triangles {len(geom.triangles)}"]
    for i, v in enumerate(geom.vertices):
        line = f"{v[0]!r} {v[1]!r} {v[2]!r}"
        if geom.vertex_colors is not None:
            c = geom.vertex_colors[i]
            line += f" {c[0]!r} {c[1]!r} {c[2]!r}"
        out.append(line)
    for t in geom.triangles:
        out.append(f"{t[0]} {t[1]} {t[2]}")
    return "\n".join(out) + "\n"


def dump_mesh_binary(geom: ProxyGeometry) -> bytes:
    if geom.kind != "mesh":
        raise InvalidGeometry("only imported meshes serialize to the soup format")
    has_color = geom.vertex_colors is not None
    parts = [BINARY_MAGIC, struct.pack("<IIB", len(geom.vertices), len(geom.triangles), int(has_color))]
    for i, v in enumerate(geom.vertices):
        vals = list(v) + (list(geom.vertex_colors[i]) if has_color else [])
        parts.append(struct.pack(f"<{len(vals)}f", *vals))
    for t in geom.triangles:
        parts.append(struct.pack("<III", *t))
    return b"".join(parts)
