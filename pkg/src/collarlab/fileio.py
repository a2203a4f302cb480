"""Config files and report serialization.

Configs are JSON or TOML. Reports are serialized canonically (sorted keys,
no timestamps) so that identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import CollarLabError
from .families import EllipseBandF, PiecewiseLinearBandF
from .geometry import ConvexBody, ConvexPolygon, Disc
from .measures import BoundaryDensity, CollarDensity, TwoLevelDensity
from .regions import BandRegion, BoxRegion, CylinderRegion, GridRegion


class ConfigError(CollarLabError):
    """Bad or missing configuration input (CLI exit code 2)."""


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as fh:
                return tomllib.load(fh)
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"could not parse {path}: {exc}") from exc


def body_from_dict(spec: dict) -> ConvexBody:
    try:
        shape = spec["shape"]
        if shape == "disc":
            return Disc(spec.get("center", (0.0, 0.0)), spec.get("radius", 1.0))
        if shape == "polygon":
            return ConvexPolygon(spec["vertices"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad body spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown body shape {shape!r}")


def body_to_dict(body: ConvexBody) -> dict:
    if isinstance(body, Disc):
        return {
            "shape": "disc",
            "center": body.center.tolist(),
            "radius": body.radius,
        }
    return {"shape": "polygon", "vertices": body.vertices.tolist()}


def _theta_fn_from_dict(spec, perimeter):
    kind = spec.get("type", "const")
    if kind == "const":
        value = float(spec["value"])
        return lambda t: np.full(np.shape(t), value)
    if kind == "trig":
        a0 = float(spec.get("const", 0.0))
        ac = float(spec.get("cos", 0.0))
        as_ = float(spec.get("sin", 0.0))
        w = 2.0 * np.pi / perimeter

        def fn(t):
            return a0 + ac * np.cos(w * np.asarray(t)) + as_ * np.sin(w * np.asarray(t))

        return fn
    raise ConfigError(f"unknown boundary function type {kind!r}")


def density_from_dict(spec: dict, body: ConvexBody) -> BoundaryDensity:
    try:
        model = spec["model"]
        if model == "two_level":
            return TwoLevelDensity(spec["c_in"], spec["c_out"], spec["R"])
        if model == "uniform":
            r = float(spec.get("R", 2.0))
            c = 1.0 / (4.0 * r * r)
            return TwoLevelDensity(c, c, r)
        if model == "collar":
            return CollarDensity(
                _theta_fn_from_dict(spec["p_plus"], body.perimeter),
                _theta_fn_from_dict(spec["p_minus"], body.perimeter),
                spec["eps0"],
                spec["R"],
                body,
            )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad density spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown density model {model!r}")


def region_from_dict(spec: dict, body: ConvexBody) -> CylinderRegion:
    try:
        kind = spec["kind"]
        if kind == "sband":
            return BoxRegion([tuple(iv) for iv in spec["intervals"]])
        if kind == "box":
            theta = spec.get("theta_intervals")
            return BoxRegion(
                [tuple(iv) for iv in spec["s_intervals"]],
                None if theta is None else [tuple(iv) for iv in theta],
            )
        if kind == "band":
            f = spec["f"]
            ftype = f.get("type", "ellipse_f")
            if ftype == "ellipse_f":
                return BandRegion(
                    EllipseBandF(
                        f.get("a", 0.0),
                        f.get("b", 0.0),
                        f.get("c", 0.0),
                        f.get("d", 0.0),
                        f.get("alpha", 0.0),
                        body.perimeter,
                    )
                )
            if ftype == "piecewise_linear":
                return BandRegion(
                    PiecewiseLinearBandF(f["slopes"], f["offsets"])
                )
            raise ConfigError(f"unknown band function type {ftype!r}")
        if kind == "grid":
            if "path" in spec:
                mask = np.load(spec["path"])["mask"]
            else:
                mask = np.asarray(spec["mask"], dtype=bool)
            return GridRegion(mask, body.perimeter)
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad region spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown region kind {kind!r}")


def schedule_from_dict(spec: dict):
    from .empirical import make_schedule

    if "pairs" in spec:
        return [(int(n), float(e)) for n, e in spec["pairs"]]
    return make_schedule(
        spec["n"], spec.get("eps0", 0.5), spec.get("beta", 1.0 / 3.0),
        spec.get("eps"),
    )


def _axis(spec_axis):
    lo, hi, count = spec_axis
    return np.linspace(float(lo), float(hi), int(count))


def family_from_dict(spec: dict):
    """Family descriptor: kind plus parameter ranges.

    Returns (kind, grids) where grids holds the per-parameter axes; the
    verification suites turn these into concrete elements per collar width.
    """
    try:
        kind = spec["kind"]
        if kind in ("ellipse_symmdiff", "circle_grid"):
            return kind, {
                "radial": _axis(spec.get("radial", (-0.25, 0.25, 7))),
                "shift_x": _axis(spec.get("shift_x", (-0.25, 0.25, 7))),
                "shift_y": _axis(spec.get("shift_y", (-0.25, 0.25, 7))),
            }
        if kind == "interval_bands":
            params = [tuple(float(v) for v in p) for p in spec["params"]]
            for p in params:
                if not (-1 <= p[0] <= p[1] <= p[2] <= p[3] <= 1):
                    raise ValueError(f"bad interval-band params {p}")
            return kind, {"params": params}
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad family spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown family kind {kind!r}")


def _to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    return obj


def dumps_report(report: dict) -> str:
    """Canonical JSON text: sorted keys, stable float repr, no timestamps."""
    return json.dumps(_to_jsonable(report), sort_keys=True, indent=2)


def write_report(path, report: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report) + "\n", encoding="utf-8")
    return path


def write_csv(path, columns, rows):
    """One row per replication, stable column order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [f"{v:.10g}" if isinstance(v, float) else v for v in row]
            )
    return path
