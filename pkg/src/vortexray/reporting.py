"""Run configuration, sweeps, result records and figure data.

All CSV files are UTF-8 with LF line endings, a header row and floats at
17 significant digits. Figure data is written as CSV plus a small plotting
script; no image is ever rendered here.
"""

import csv
import datetime as _dt
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .asymptotics import mode_spec, omega_asymptotic
from .criteria import semicircle
from .errors import MissingPrerequisite, ValidationError, VortexRayError
from .profiles import BatchelorProfile, PotentialParams, eval_potential_k
from .ring import locate_batchelor

__all__ = [
    "SCHEMA_VERSION",
    "SWEEP_COLUMNS",
    "canonical_config",
    "config_hash",
    "RunConfig",
    "ResultRecord",
    "write_csv",
    "load_schema",
    "validate_output",
    "run_sweep",
    "emit_figure_data",
]

SCHEMA_VERSION = 1

SWEEP_COLUMNS = ["q", "n", "m", "re_omega", "im_omega", "abs_err_asym", "residual",
                 "width", "semicircle_margin", "error"]


def _canon(x):
    if isinstance(x, dict):
        return {str(k): _canon(v) for k, v in sorted(x.items()) if v is not None}
    if isinstance(x, (list, tuple)):
        return [_canon(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return int(x) if x.is_integer() else x
    return x


def canonical_config(cfg):
    """Canonical JSON text of a config: sorted keys, None dropped, 1.0 == 1."""
    return json.dumps(_canon(cfg), sort_keys=True, separators=(",", ":"))


def config_hash(cfg):
    """SHA-256 of :func:`canonical_config`."""
    return hashlib.sha256(canonical_config(cfg).encode("utf-8")).hexdigest()


def _as_list(v, name):
    if v is None:
        raise ValidationError(f"{name} is required")
    if np.isscalar(v):
        v = [v]
    v = list(v)
    if not v:
        raise ValidationError(f"{name} must not be empty")
    return v


@dataclass
class RunConfig:
    """Validated parameters of one command.

    Attributes:
        command: subcommand name.
        params: parameters after validation.
        schema_version: version of the output schema.
    """

    command: str
    params: dict
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def sweep(cls, q, n, m=(1,), **extra):
        qs = [float(x) for x in _as_list(q, "q")]
        ns = _as_list(n, "n")
        ms = _as_list(m, "m")
        if any(not x > 0 for x in qs):
            raise ValidationError("q values must be positive")
        if any(int(x) != x or x < 2 for x in ns):
            raise ValidationError("n values must be integers >= 2")
        if any(int(x) != x or x < 1 for x in ms):
            raise ValidationError("m values must be positive integers")
        p = {"q": qs, "n": [int(x) for x in ns], "m": [int(x) for x in ms]}
        p.update(extra)
        return cls("sweep", p)

    def to_dict(self):
        return {"command": self.command, "schema_version": self.schema_version,
                "params": _canon(self.params)}

    @property
    def hash(self):
        return config_hash(self.to_dict())


@dataclass
class ResultRecord:
    """Outcome of one command, serializable to the shipped JSON schema."""

    command: str
    config_hash: str
    result: dict = None
    status: str = "ok"
    config: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    error: dict = None
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat())
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        d = {
            "command": self.command, "schema_version": self.schema_version,
            "config_hash": self.config_hash, "status": self.status,
            "timestamp": self.timestamp, "config": _jsonable(self.config),
            "result": _jsonable(self.result), "artifacts": [str(a) for a in self.artifacts],
        }
        if self.error is not None:
            d["error"] = self.error
        return d

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, allow_nan=True)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Path):
        return str(x)
    return x


def load_schema():
    """The JSON schema shipped with the package."""
    text = resources.files("vortexray").joinpath("schemas/result.schema.json").read_text("utf-8")
    return json.loads(text)


def validate_output(obj):
    """Validate a result dict (or JSON text) against the shipped schema."""
    import jsonschema
    if isinstance(obj, str):
        obj = json.loads(obj)
    jsonschema.validate(obj, load_schema())
    return True


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows):
    """Write rows with a header; floats at 17 significant digits, LF endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


# sweeps -----------------------------------------------------------------------

def _sweep_cell(args):
    q, n, m = args
    from .shooting import eigen_solve
    row = {"q": q, "n": n, "m": m}
    try:
        P = BatchelorProfile(q)
        R = locate_batchelor(q)
        rep = eigen_solve(P, R, n, m)
        sc = semicircle(P, R, n)
        om = rep.omega
        row.update(re_omega=om.real, im_omega=om.imag,
                   abs_err_asym=abs(om - omega_asymptotic(R, n, m)),
                   residual=rep.residual, width=rep.concentration["width"],
                   semicircle_margin=sc.omega_max - abs(om - sc.omega0), error="")
    except VortexRayError as exc:
        row.update({k: math.nan for k in SWEEP_COLUMNS[3:-1]})
        row["error"] = type(exc).__name__
    return row


def _slope(x, y):
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(x, y, 1)[0])


def run_sweep(config, out_dir=None, jobs=1):
    """Shooting solves over the grid ``q x n x m``.

    Cell failures become rows whose ``error`` column holds the exception
    name; the sweep itself never aborts.

    Args:
        config: RunConfig built by :meth:`RunConfig.sweep` (or a dict with
            q, n, m lists).
        out_dir: where ``sweep.csv`` goes; nothing is written if None.
        jobs: worker processes. Rows come out in (q, n, m) order regardless.

    Returns:
        ResultRecord with the rows and per-(q, m) fitted slopes of
        ``log|omega - omega_asym|`` against ``log n``.
    """
    if isinstance(config, dict):
        config = RunConfig.sweep(config.get("q"), config.get("n"), config.get("m", [1]))
    p = config.params
    cells = [(q, n, m) for q in p["q"] for n in p["n"] for m in p["m"]]
    if jobs and jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=int(jobs)) as ex:
            rows = list(ex.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    rows.sort(key=lambda r: (r["q"], r["n"], r["m"]))
    slopes = {}
    for q in p["q"]:
        for m in p["m"]:
            sel = [r for r in rows if r["q"] == q and r["m"] == m and not r["error"]]
            if len(sel) >= 2:
                slopes[f"q={q:g},m={m}"] = _slope([r["n"] for r in sel],
                                                  [r["abs_err_asym"] for r in sel])
    artifacts = []
    if out_dir is not None:
        path = write_csv(Path(out_dir) / "sweep.csv", SWEEP_COLUMNS,
                         [[r[c] for c in SWEEP_COLUMNS] for r in rows])
        artifacts.append(path)
    return ResultRecord("sweep", config.hash, config=config.to_dict(),
                        result={"rows": rows, "slopes": slopes,
                                "failures": sum(1 for r in rows if r["error"])},
                        artifacts=artifacts)


# figures ------------------------------------------------------------------------

_PLOT_HEADER = """# plotting commands for {csv}
import csv
import matplotlib.pyplot as plt

with open("{csv}", newline="") as fh:
    rows = list(csv.DictReader(fh))
"""

_PLOTS = {
    "semicircle": """
b = [r for r in rows if r["kind"] == "boundary"]
mk = [r for r in rows if r["kind"] == "mode"]
plt.plot([float(r["re"]) for r in b], [float(r["im"]) for r in b], "k-", label="semicircle")
plt.plot([float(r["re"]) for r in mk], [float(r["im"]) for r in mk], "ro", label="modes")
plt.xlabel("Re omega"); plt.ylabel("Im omega"); plt.legend()
plt.show()
""",
    "potential_regimes": """
for side in ("left", "right"):
    s = [r for r in rows if r["side"] == side]
    x = [abs(float(r["r"]) - float(r["r0"])) for r in s]
    plt.loglog(x, [abs(float(r["re_k"])) for r in s], label="|Re k| " + side)
    plt.loglog(x, [abs(float(r["im_k"])) for r in s], "--", label="|Im k| " + side)
plt.xlabel("|r - r0|"); plt.legend()
plt.show()
""",
    "mode_profile": """
x = [float(r["r"]) for r in rows]
plt.plot(x, [float(r["abs_phi"]) for r in rows], label="|phi|")
plt.plot(x, [float(r["abs_w"]) for r in rows], "--", label="|w_m|")
plt.xlabel("r"); plt.legend()
plt.show()
""",
}


def _figure_semicircle(P, R, n, n_modes=5, n_boundary=400):
    sc = semicircle(P, R, n)
    rows = [("boundary", z.real, z.imag, "") for z in sc.boundary(n_boundary)]
    for m in range(1, n_modes + 1):
        z = omega_asymptotic(R, n, m)
        rows.append(("mode", z.real, z.imag, m))
    return ["kind", "re", "im", "m"], rows, sc


def _figure_potential(P, R, n, m, n_points=400):
    spec = mode_spec(R, n, m)
    params = PotentialParams(R.beta, n, spec.omega)
    dist = np.geomspace(1.0 / n, 1.0, n_points)
    rows = []
    for side, sgn in (("left", -1.0), ("right", 1.0)):
        r = R.r0 + sgn * dist
        ok = r > 0
        k = eval_potential_k(P, params, r[ok])
        rows += [(side, x, R.r0, kk.real, kk.imag) for x, kk in zip(r[ok], k)]
    return ["side", "r", "r0", "re_k", "im_k"], rows


def _figure_mode(report, R):
    from .asymptotics import weber_mode
    phi = report.phi
    wm = weber_mode(R, report.n, report.m).on_r(phi.r, R.r0, report.n)
    # align phase and scale of w_m with phi by least squares
    c = np.vdot(wm, phi.values) / np.vdot(wm, wm)
    rows = [(x, abs(v), abs(c * w)) for x, v, w in zip(phi.r, phi.values, wm)]
    return ["r", "abs_phi", "abs_w"], rows


def emit_figure_data(kind, inputs, out_dir):
    """Write figure data as CSV plus a plotting script.

    Args:
        kind: ``"semicircle"``, ``"potential_regimes"`` or ``"mode_profile"``.
        inputs: dict with ``q`` (or ``profile`` and ``ring``), ``n`` and
            ``m``; ``mode_profile`` additionally needs a shooting ``report``.
        out_dir: destination directory.

    Returns:
        dict with ``csv`` and ``script`` paths and a small ``summary``.

    Raises:
        MissingPrerequisite: if a required input is absent.
        ValidationError: for an unknown kind.
    """
    if kind not in _PLOTS:
        raise ValidationError(f"unknown figure kind {kind!r}")
    inputs = dict(inputs)
    if "n" not in inputs:
        raise MissingPrerequisite("figure data needs n")
    n = int(inputs["n"])
    m = int(inputs.get("m", 1))
    if "profile" in inputs:
        P = inputs["profile"]
        R = inputs.get("ring")
        if R is None:
            raise MissingPrerequisite("a custom profile needs its ring geometry")
    elif "q" in inputs:
        P = BatchelorProfile(inputs["q"])
        R = inputs.get("ring") or locate_batchelor(inputs["q"])
    else:
        raise MissingPrerequisite("figure data needs q or profile and ring")
    summary = {}
    if kind == "semicircle":
        header, rows, sc = _figure_semicircle(P, R, n, int(inputs.get("n_modes", 5)))
        summary = sc.summary()
        summary["markers_inside"] = all(abs(complex(r[1], r[2]) - sc.omega0) < sc.omega_max
                                        for r in rows if r[0] == "mode")
    elif kind == "potential_regimes":
        header, rows = _figure_potential(P, R, n, m)
    else:
        report = inputs.get("report")
        if report is None:
            raise MissingPrerequisite("mode_profile needs a converged shooting report")
        header, rows = _figure_mode(report, R)
    out = Path(out_dir)
    csv_path = write_csv(out / f"{kind}.csv", header, rows)
    script = out / f"plot_{kind}.py"
    script.write_text(_PLOT_HEADER.format(csv=csv_path.name) + _PLOTS[kind], encoding="utf-8")
    return {"csv": csv_path, "script": script, "summary": summary}
