"""Run artifacts: trace CSV, session export/import, replay, rendering.

A session file pins the image by content hash and records the full
ordered event list with the strategies each iteration used, which is
sufficient to re-run the engine and verify the recorded trace value for
value.  The trace CSV is the compact human-facing view of the same
events: one row per committed split, floats at 9 significant digits.
"""

import dataclasses
import hashlib
import json

import numpy as np

from .engine import SplitEvent, Segmentation, cutting_from_label
from .image_io import encode_png_bytes
from .partition import label_visualization

TRACE_HEADER = "iteration,mode,strategy,channel,region_split,n_sr,n_vr,J,tau,delta_J"

SESSION_FORMAT = "adaptseg-session/1"


def _fmt(x):
    return f"{x:.9g}"


def trace_row(event):
    return ",".join([
        str(event.iteration),
        event.mode,
        event.strategy,
        event.channel,
        str(event.region_split),
        str(event.n_sr),
        str(event.n_vr),
        _fmt(event.j),
        _fmt(event.tau),
        _fmt(event.delta_j),
    ])


def trace_text(events):
    return "\n".join([TRACE_HEADER] + [trace_row(e) for e in events]) + "\n"


def write_trace(path, events):
    with open(path, "w") as fh:
        fh.write(trace_text(events))


def image_hash(img):
    """Content hash of an image: dimensions plus raw channel planes."""
    digest = hashlib.sha256()
    digest.update(f"{img.width}x{img.height}x{img.channel_count}".encode())
    for plane in img.planes:
        digest.update(plane.tobytes())
    return digest.hexdigest()


def engine_config(engine):
    return {
        "mode": engine.mode,
        "cutting": engine.cutting.label,
        "multiscalar": engine.multiscalar,
        "channels": engine.img.channel_count,
    }


def engine_from_config(img, config, rescan=False):
    if config.get("channels") not in (None, img.channel_count):
        raise ValueError("image channel count does not match the session")
    return Segmentation(
        img,
        mode=config["mode"],
        cutting=cutting_from_label(config["cutting"]),
        multiscalar=config.get("multiscalar"),
        rescan=rescan,
    )


def session_payload(engine, img_hash):
    j = engine.j_current()
    return {
        "format": SESSION_FORMAT,
        "image_hash": img_hash,
        "config": engine_config(engine),
        "events": [dataclasses.asdict(e) for e in engine.history],
        "final": {
            "iteration": engine.iteration,
            "status": engine.status,
            "n_sr": engine.n_sr(),
            "n_vr": engine.n_vr(),
            "j": j,
            "tau": engine.tau_from_j(j),
        },
    }


def write_session(path, engine, img_hash):
    with open(path, "w") as fh:
        json.dump(session_payload(engine, img_hash), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_session(path):
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != SESSION_FORMAT:
        raise ValueError("not a session file")
    return payload


def events_from_payload(payload):
    return [SplitEvent(**record) for record in payload["events"]]


class ReplayDivergence(Exception):
    """Replay produced a different event than the session recorded."""


def replay_session(payload, img):
    """Re-run a session against an image; returns the rebuilt engine.

    Raises ValueError on an image hash mismatch and ReplayDivergence if
    any replayed event differs from the recorded one in any field.
    """
    if image_hash(img) != payload["image_hash"]:
        raise ValueError("image does not match the session's image hash")
    try:
        recorded = events_from_payload(payload)
    except TypeError as exc:
        raise ValueError(f"corrupt session events: {exc}") from exc
    engine = engine_from_config(img, payload["config"])
    if recorded:
        from .engine import EngineStateError

        try:
            engine.replay_recorded(recorded, recorded[-1].iteration)
        except EngineStateError as exc:
            raise ReplayDivergence(str(exc)) from exc
    if len(engine.history) != len(recorded):
        raise ReplayDivergence(
            f"replay produced {len(engine.history)} events, "
            f"session has {len(recorded)}")
    for i, (fresh, old) in enumerate(zip(engine.history, recorded)):
        if fresh != old:
            raise ReplayDivergence(f"event {i} differs: {fresh} != {old}")
    return engine


# -- rendering -------------------------------------------------------------


def combined_labels(engine):
    """One label per pixel, distinguishing pixels that differ in any
    channel partition (equals the single partition's labels in vector
    mode)."""
    parts = engine.partitions
    key = parts[0].labels
    for part in parts[1:]:
        key = key * np.int64(part.next_id) + part.labels
    return key


def boundary_mask(engine):
    """Pixels whose right or lower neighbor belongs to another region."""
    labels = combined_labels(engine).reshape(engine.img.height, engine.img.width)
    edges = np.zeros_like(labels, dtype=bool)
    edges[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    edges[:-1, :] |= labels[:-1, :] != labels[1:, :]
    return edges.reshape(-1)


def render_segmented(engine):
    return encode_png_bytes(engine.img, engine.segmented_planes())


def render_original(engine):
    return encode_png_bytes(engine.img, engine.img.planes)


EDGE_COLOR = (255.0, 64.0, 255.0)


def render_edges(engine):
    """Original image with region boundaries painted over it."""
    edges = boundary_mask(engine)
    planes = [p.copy() for p in engine.img.planes]
    if len(planes) == 3:
        for k in range(3):
            planes[k][edges] = EDGE_COLOR[k]
    else:
        planes[0][edges] = 255.0
    return encode_png_bytes(engine.img, planes)


def render_labels(engine):
    """Label visualization of the (first) partition: a distinct color per
    region id."""
    colors = label_visualization(engine.partitions[0])
    planes = [colors[:, k].astype(np.float64) for k in range(3)]
    img = engine.img
    if img.channel_count == 1:
        from .image_io import ImageBuffer

        rgb = ImageBuffer(img.width, img.height, 3, planes)
        return encode_png_bytes(rgb, planes)
    return encode_png_bytes(img, planes)


def labels_dump(engine):
    """Row-major region ids per active partition, JSON-ready."""
    return {
        "width": engine.img.width,
        "height": engine.img.height,
        "mode": engine.mode,
        "labels": [part.labels.tolist() for part in engine.partitions],
    }


def render_layer(engine, layer):
    if layer == "segmented":
        return render_segmented(engine)
    if layer == "original":
        return render_original(engine)
    if layer == "edges":
        return render_edges(engine)
    if layer == "labels":
        return render_labels(engine)
    raise ValueError(f"unknown layer {layer!r}")
