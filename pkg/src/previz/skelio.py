"""previz-skel/1 document parsing and serialization.

Line-oriented text, exact grammar in docs/formats.md. A person record may
carry id -1, meaning the source had no tracking; those slots get stable
ids assigned by greedy nearest-hip matching across frames.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .skeleton import (
    JOINT_COUNT,
    PersonPose,
    SkeletonError,
    SkeletonFrame,
    SkeletonSequence,
)

SCHEMA = "previz-skel/1"
MATCH_GATE = 0.1  # unit-square distance beyond which hips are never matched


class SchemaError(SkeletonError):
    pass


class EmptySequence(SkeletonError):
    pass


@dataclass(frozen=True)
class ImportReport:
    sequence: SkeletonSequence
    clamp_warnings: int
    assigned_ids: int


def parse_document(text: str) -> ImportReport:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != SCHEMA:
        raise SchemaError(f"document must start with {SCHEMA!r}")

    def header(idx: int, key: str) -> list[str]:
        if idx >= len(lines):
            raise SchemaError(f"missing header line {key!r}")
        parts = lines[idx].split()
        if parts[0] != key:
            raise SchemaError(f"expected {key!r} header, found {lines[idx]!r}")
        return parts[1:]

    try:
        fps = float(header(1, "fps")[0])
        frame_count = int(header(2, "frames")[0])
        sw, sh = (int(v) for v in header(3, "source_size")[:2])
    except (IndexError, ValueError):
        raise SchemaError("malformed header values") from None
    if frame_count <= 0:
        raise EmptySequence("document declares zero frames")

    frames: list[list[PersonPose]] = []
    clamped = 0
    i = 4
    while i < len(lines):
        parts = lines[i].split()
        if parts[0] != "frame":
            raise SchemaError(f"expected 'frame', found {lines[i]!r}")
        if int(parts[1]) != len(frames):
            raise SchemaError(f"frame index {parts[1]} out of order (expected {len(frames)})")
        i += 1
        persons = []
        while i < len(lines) and lines[i].split()[0] == "person":
            vals = lines[i].split()[1:]
            if len(vals) != 1 + JOINT_COUNT * 3:
                raise SchemaError(f"person record needs id + {JOINT_COUNT * 3} numbers")
            pid = int(vals[0])
            joints = []
            for j in range(JOINT_COUNT):
                x, y, c = (float(v) for v in vals[1 + j * 3: 4 + j * 3])
                if not (0.0 <= c <= 1.0):
                    raise SchemaError(f"confidence {c} outside [0,1]")
                cx, cy = min(1.0, max(0.0, x)), min(1.0, max(0.0, y))
                if (cx, cy) != (x, y) and c > 0:
                    clamped += 1
                joints.append((cx, cy, c))
            persons.append(PersonPose(person_id=pid, joints=tuple(joints)))
            i += 1
        frames.append(persons)
    if len(frames) != frame_count:
        raise SchemaError(f"declared {frame_count} frames, found {len(frames)}")

    assigned = _assign_missing_ids(frames)
    seq = SkeletonSequence(
        fps=fps,
        frames=tuple(SkeletonFrame(persons=tuple(sorted(ps, key=lambda p: p.person_id))) for ps in frames),
        source_size=(sw, sh),
    )
    if not any(f.persons for f in seq.frames):
        raise EmptySequence("no person appears in any frame")
    return ImportReport(sequence=seq, clamp_warnings=clamped, assigned_ids=assigned)


def _assign_missing_ids(frames: list[list[PersonPose]]) -> int:
    """Greedy nearest-hip matching for person records imported with id -1."""
    next_id = max((p.person_id for ps in frames for p in ps), default=-1) + 1
    next_id = max(next_id, 0)
    prev: list[PersonPose] = []
    assigned = 0
    for fi, persons in enumerate(frames):
        unresolved = [k for k, p in enumerate(persons) if p.person_id < 0]
        if unresolved:
            candidates = [p for p in prev if all(p.person_id != q.person_id for q in persons)]
            pairs = []
            for k in unresolved:
                for cand in candidates:
                    d = _hip_distance(persons[k], cand)
                    if d <= MATCH_GATE:
                        pairs.append((d, k, cand.person_id))
            pairs.sort()
            taken_slots, taken_ids = set(), set()
            for d, k, pid in pairs:
                if k in taken_slots or pid in taken_ids:
                    continue
                persons[k] = PersonPose(person_id=pid, joints=persons[k].joints)
                taken_slots.add(k)
                taken_ids.add(pid)
                assigned += 1
            for k in unresolved:
                if k not in taken_slots:
                    persons[k] = PersonPose(person_id=next_id, joints=persons[k].joints)
                    next_id += 1
                    assigned += 1
        prev = persons
    return assigned


def _hip_distance(a: PersonPose, b: PersonPose) -> float:
    ax, ay = a.root()
    bx, by = b.root()
    return ((ax - bx) ** 2 + (ay - by) ** 2) ** 0.5


class PoseEstimatorClient:
    """Declared client for live keypoint extraction from raw video.

    Pose-estimation models are an external deployment like the generative
    backend: this engine only consumes their previz-skel/1 output. The
    endpoint takes the raw video bytes in a POST and returns the document.
    """

    def __init__(self, endpoint: str, timeout: float = 120.0):
        self.endpoint = endpoint
        self.timeout = timeout

    def extract(self, video_bytes: bytes, fps_hint: Optional[float] = None) -> ImportReport:
        import httpx

        params = {} if fps_hint is None else {"fps": fps_hint}
        resp = httpx.post(
            self.endpoint,
            params=params,
            content=video_bytes,
            headers={"content-type": "application/octet-stream"},
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return parse_document(resp.text)


def dump_document(seq: SkeletonSequence) -> str:
    out = [
        SCHEMA,
        f"fps {seq.fps!r}",
        f"frames {len(seq.frames)}",
        f"source_size {seq.source_size[0]} {seq.source_size[1]}",
    ]
    for i, frame in enumerate(seq.frames):
        out.append(f"frame {i}")
        for p in frame.persons:
            nums = " ".join(f"{x!r} {y!r} {c!r}" for x, y, c in p.joints)
            out.append(f"person {p.person_id} {nums}")
    return "\n".join(out) + "\n"
