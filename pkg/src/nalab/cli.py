"""Command-line front end.

``nalab <command> [--config FILE] [--out DIR] [--seed N] [--trials N]``
with commands ``lemma-a``, ``build``, ``segment``, ``convexity``,
``proximinality`` and ``sweep``.  Exit status is 0 when every check
passed, 1 when at least one invariant check failed, and 2 for
configuration or solver errors.  ``NALAB_LOG_LEVEL`` sets log verbosity.
"""

from dataclasses import dataclass, replace
import logging
import os
import sys

import click
import numpy as np
import yaml

from .construction import ConstructionConfig, build_space
from .errors import ConfigError, NalabError
from .experiments import (
    SubspaceSpec,
    lemma_a_suite,
    proximinality_probe,
    report_emit,
    segment_probe,
    strict_convexity_probe,
)
from .norms import PhiSequence, SmoothBaseNormSpec
from .seeding import stream_rng

__all__ = ["COMMANDS", "RunConfig", "parse_config", "serialize_config", "execute", "main"]

log = logging.getLogger("nalab")

COMMANDS = ("lemma-a", "build", "segment", "convexity", "proximinality", "sweep")

_TOP_KEYS = {
    "command", "seed", "trials", "tolerance", "construction", "phi", "t_grid", "mid_t",
    "pairs", "samples", "annihilators", "points", "sweep_n_max", "output",
}
_CONSTRUCTION_KEYS = {"ambient_dim", "n_max", "m_max", "delta", "net_eps", "net", "decay", "base"}
_BASE_KEYS = {"mode", "smoothing_weights"}
_OUTPUT_KEYS = {"dir", "formats"}


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated run configuration; see the README for the file schema."""

    command: str
    construction: ConstructionConfig
    seed: int = 0
    trials: int = 100
    tolerance: float = 1e-9
    phi: tuple = tuple(PhiSequence.dyadic(4).weights)
    t_grid: tuple = (0.25, 0.5, 0.75)
    mid_t: float = 0.5
    pairs: tuple = None
    samples: int = 50
    annihilators: tuple = None
    points: tuple = None
    sweep_n_max: tuple = None
    out_dir: str = "nalab-out"
    formats: tuple = ("structured", "rows")

    def to_dict(self):
        c = self.construction
        base = {"mode": c.base.mode}
        if c.base.smooth:
            base["smoothing_weights"] = [float(w) for w in c.base.smoothing_weights]
        net = c.net if isinstance(c.net, str) else [list(row) for row in c.net]
        out = {
            "command": self.command,
            "seed": self.seed,
            "trials": self.trials,
            "tolerance": self.tolerance,
            "construction": {
                "ambient_dim": c.ambient_dim, "n_max": c.n_max, "m_max": c.m_max,
                "delta": c.delta, "net_eps": c.net_eps, "net": net, "decay": c.decay,
                "base": base,
            },
            "phi": [float(w) for w in self.phi],
            "t_grid": list(self.t_grid),
            "mid_t": self.mid_t,
            "samples": self.samples,
            "output": {"dir": self.out_dir, "formats": list(self.formats)},
        }
        for key in ("pairs", "annihilators", "points", "sweep_n_max"):
            val = getattr(self, key)
            if val is not None:
                out[key] = _listify(val)
        return out

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.to_dict() == other.to_dict()

    __hash__ = None


def _listify(v):
    if isinstance(v, (list, tuple)):
        return [_listify(x) for x in v]
    return v


def _reject_unknown(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where or 'document'} must be a mapping", where or None)
    for key in d:
        if key not in allowed:
            name = f"{where}.{key}" if where else str(key)
            raise ConfigError(f"unknown key {key!r} in {where or 'document'}", name)


def _num(d, key, kind, default, where, positive=False, nonneg=False):
    name = f"{where}.{key}" if where else key
    if key not in d or d[key] is None:
        return default
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{name} must be a number, got {val!r}", name)
    if kind is int:
        if int(val) != val:
            raise ConfigError(f"{name} must be an integer, got {val!r}", name)
        val = int(val)
    else:
        val = float(val)
    if positive and not val > 0:
        raise ConfigError(f"{name} must be positive, got {val!r}", name)
    if nonneg and val < 0:
        raise ConfigError(f"{name} must be non-negative, got {val!r}", name)
    return val


def _vectors(val, name, dim=None):
    try:
        arr = np.asarray(val, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of numeric vectors", name) from None
    if arr.ndim != 2 or (dim is not None and arr.shape[1] != dim):
        raise ConfigError(f"{name} must be a list of vectors of length {dim}", name)
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} has non-finite entries", name)
    return tuple(tuple(float(x) for x in row) for row in arr)


def _construction(d):
    _reject_unknown(d, _CONSTRUCTION_KEYS, "construction")
    w = "construction"
    dim = _num(d, "ambient_dim", int, 8, w, positive=True)
    n_max = _num(d, "n_max", int, 2 * dim, w, positive=True)
    m_max = _num(d, "m_max", int, 6, w, positive=True)
    delta = _num(d, "delta", float, 0.05, w, positive=True)
    net_eps = _num(d, "net_eps", float, 0.25, w, positive=True)
    decay = d.get("decay", "sigma")
    net = d.get("net", "eps")
    if not isinstance(net, str):
        net = _vectors(net, "construction.net", dim)
    b = d.get("base") or {}
    _reject_unknown(b, _BASE_KEYS, "construction.base")
    mode = b.get("mode", "smooth")
    try:
        base = SmoothBaseNormSpec(mode, dim, b.get("smoothing_weights"))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"construction.base: {exc}", "construction.base") from exc
    try:
        return ConstructionConfig(dim, n_max, m_max, delta, base, net_eps, 0, net, decay)
    except ConfigError as exc:
        raise ConfigError(str(exc), f"construction.{exc.field}") from exc


def _from_dict(doc):
    if doc is None:
        doc = {}
    _reject_unknown(doc, _TOP_KEYS, "")
    command = doc.get("command")
    if command is not None and command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}", "command")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed must be an integer, got {seed!r}", "seed")
    trials = _num(doc, "trials", int, 100, "", nonneg=True)
    tolerance = _num(doc, "tolerance", float, 1e-9, "", positive=True)
    construction = _construction(doc.get("construction") or {})
    dim = construction.ambient_dim
    kw = dict(seed=seed, trials=trials, tolerance=tolerance)
    if "phi" in doc and doc["phi"] is not None:
        try:
            kw["phi"] = tuple(float(x) for x in PhiSequence(doc["phi"]).weights)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"phi: {exc}", "phi") from exc
    if "t_grid" in doc and doc["t_grid"] is not None:
        tg = doc["t_grid"]
        if not isinstance(tg, list) or not tg or any(
            isinstance(t, bool) or not isinstance(t, (int, float)) or not 0 <= t <= 1 for t in tg
        ):
            raise ConfigError("t_grid must be a non-empty list of numbers in [0, 1]", "t_grid")
        kw["t_grid"] = tuple(float(t) for t in tg)
    mid_t = _num(doc, "mid_t", float, 0.5, "")
    if not 0 < mid_t < 1:
        raise ConfigError(f"mid_t must lie in (0, 1), got {mid_t!r}", "mid_t")
    kw["mid_t"] = mid_t
    kw["samples"] = _num(doc, "samples", int, 50, "", positive=True)
    if doc.get("pairs") is not None:
        pairs = doc["pairs"]
        if not isinstance(pairs, list) or not pairs:
            raise ConfigError("pairs must be a non-empty list of [f, g] pairs", "pairs")
        kw["pairs"] = tuple(_vectors(p, "pairs", dim) for p in pairs)
        if any(len(p) != 2 for p in kw["pairs"]):
            raise ConfigError("each entry of pairs must hold exactly two vectors", "pairs")
    if doc.get("annihilators") is not None:
        kw["annihilators"] = _vectors(doc["annihilators"], "annihilators", dim)
    if doc.get("points") is not None:
        kw["points"] = _vectors(doc["points"], "points", dim)
    if doc.get("sweep_n_max") is not None:
        sw = doc["sweep_n_max"]
        if not isinstance(sw, list) or not sw or any(
            isinstance(n, bool) or not isinstance(n, int) or n < dim for n in sw
        ):
            raise ConfigError("sweep_n_max must be a list of integers >= ambient_dim", "sweep_n_max")
        kw["sweep_n_max"] = tuple(sw)
    out = doc.get("output") or {}
    _reject_unknown(out, _OUTPUT_KEYS, "output")
    if "dir" in out:
        if not isinstance(out["dir"], str) or not out["dir"]:
            raise ConfigError("output.dir must be a non-empty string", "output.dir")
        kw["out_dir"] = out["dir"]
    if "formats" in out:
        fm = out["formats"]
        if not isinstance(fm, list) or not fm or any(f not in ("structured", "rows") for f in fm):
            raise ConfigError("output.formats must list 'structured' and/or 'rows'", "output.formats")
        kw["formats"] = tuple(fm)
    return RunConfig(command=command or "lemma-a", construction=construction, **kw)


def parse_config(text):
    """Parse and validate a YAML run configuration.

    Raises
    ------
    ConfigError
        On YAML syntax errors (message carries line and column) and on
        validation errors (``field`` names the offending key).
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}{problem}") from exc
    return _from_dict(doc)


def serialize_config(cfg):
    """YAML text that :func:`parse_config` maps back to an equal config."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# execution


def _audit_space(space):
    """Invariant audit of a built space as ``(check_id, ok)`` pairs."""
    cfg = space.config
    n = np.arange(1, cfg.n_max + 1)
    out = []
    for m in range(1, cfg.m_max + 1):
        expected = 2.0 ** -m * 2.0 ** -n * space.v_dual_norms[m - 1]
        got = space.phi_m[m - 1].weights
        out.append((f"phi_m(m={m})", bool(np.all(np.abs(got - expected) <= 1e-12 * expected))))
        out.append((f"mass(m={m})", space.phi_m[m - 1].l1_mass < 1))
        rows = space.v_table[m - 1] / space.v_dual_norms[m - 1][:, None]
        out.append((f"separation(m={m})", int(np.linalg.matrix_rank(rows)) == cfg.ambient_dim))
    out.append(("nonzero", bool(np.all(space.v_dual_norms > 0))))
    return out


def _run_build(cfg):
    space = build_space(cfg.construction)
    checks = _audit_space(space)
    record = {
        "kind": "build",
        "checks": {k: ok for k, ok in checks},
        "net_size": len(space.net),
        "phi_m": [list(p.weights) for p in space.phi_m],
        "phi_mass": [p.l1_mass for p in space.phi_m],
        "v_dual_norms": space.v_dual_norms,
    }
    failed = [k for k, ok in checks if not ok]
    return [record], [record], failed


def _run_lemma_a(cfg):
    rep = lemma_a_suite(PhiSequence(cfg.phi), cfg.trials, cfg.seed)
    return [rep], [rep], [c for c, _ in rep.failures]


def _run_segment(cfg):
    space = build_space(cfg.construction)
    if cfg.pairs is not None:
        pairs = [(np.array(f), np.array(g)) for f, g in cfg.pairs]
    else:
        rng = stream_rng(cfg.seed, "segment")
        d = space.dim
        pairs = [(rng.standard_normal(d), rng.standard_normal(d)) for _ in range(cfg.trials)]
    records = [
        segment_probe(space, f, g, t_grid=cfg.t_grid, mid_t=cfg.mid_t, tol=cfg.tolerance)
        for f, g in pairs
    ]
    failed = [v for r in records for v in r.violations]
    return records, records, failed


def _run_convexity(cfg):
    rep = strict_convexity_probe(build_space(cfg.construction), cfg.trials, cfg.seed)
    return [rep], [rep], [c for c, _ in rep.failures]


def _subspace(cfg):
    d = cfg.construction.ambient_dim
    ann = cfg.annihilators
    if ann is None:
        ann = np.eye(d)[-2:]
    return SubspaceSpec(annihilators=np.array(ann))


def _run_proximinality(cfg):
    space = build_space(cfg.construction)
    pts = None if cfg.points is None else [np.array(p) for p in cfg.points]
    rep = proximinality_probe(space, _subspace(cfg), cfg.samples, cfg.seed, points=pts, tol=cfg.tolerance)
    rows = [dict(s, index=i) for i, s in enumerate(rep.diagnostics["samples"])]
    return [rep], rows, [c for c, _ in rep.failures]


def _run_sweep(cfg):
    values = cfg.sweep_n_max or (cfg.construction.n_max,)
    M = _subspace(cfg)
    reports, rows, failed = [], [], []
    for n_max in values:
        space = build_space(replace(cfg.construction, n_max=int(n_max)))
        rep = proximinality_probe(space, M, cfg.samples, cfg.seed, tol=cfg.tolerance)
        reports.append(rep)
        failed += [c for c, _ in rep.failures]
        dists = [s["distance"] for s in rep.diagnostics["samples"] if not s["in_M"]]
        rows.append({
            "n_max": int(n_max),
            "mean_tail_mass": rep.diagnostics["mean_tail_mass"],
            "min_distance": min(dists) if dists else None,
            "failures": len(rep.failures),
        })
    return reports, rows, failed


_RUNNERS = {
    "lemma-a": _run_lemma_a,
    "build": _run_build,
    "segment": _run_segment,
    "convexity": _run_convexity,
    "proximinality": _run_proximinality,
    "sweep": _run_sweep,
}


def _error_record(exc):
    return {
        "kind": "error",
        "error": type(exc).__name__,
        "message": str(exc),
        "field": getattr(exc, "field", None),
    }


def execute(cfg):
    """Run ``cfg.command`` and write its reports under ``cfg.out_dir``.

    Returns
    -------
    status : int
        0 all checks passed, 1 some invariant check failed, 2 configuration
        or solver error (an ``error.json`` record is written when possible).
    artifacts : list of str
        Paths written.
    """
    out_dir = cfg.out_dir
    artifacts = []
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        log.error("cannot create output directory %s: %s", out_dir, exc)
        return 2, artifacts
    meta = {"command": cfg.command, "config": cfg.to_dict()}
    try:
        records, rows, failed = _RUNNERS[cfg.command](cfg)
    except (NalabError, ValueError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        path = os.path.join(out_dir, "error.json")
        try:
            report_emit([_error_record(exc)], path, "structured", meta=meta)
            artifacts.append(path)
        except NalabError:
            pass
        return 2, artifacts
    status = 1 if failed else 0
    meta["status"] = status
    meta["failed_checks"] = sorted(set(failed))
    stem = cfg.command
    if "structured" in cfg.formats:
        path = os.path.join(out_dir, f"{stem}.json")
        report_emit(records, path, "structured", allow_empty=True, meta=meta)
        artifacts.append(path)
    if "rows" in cfg.formats:
        path = os.path.join(out_dir, f"{stem}.csv")
        report_emit(rows, path, "rows", allow_empty=True)
        artifacts.append(path)
    if failed:
        log.warning("%d check(s) failed: %s", len(failed), ", ".join(sorted(set(failed))[:10]))
    return status, artifacts


def _setup_logging():
    level = os.environ.get("NALAB_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.argument("command", type=click.Choice(COMMANDS))
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="YAML run configuration.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory (overrides output.dir).")
@click.option("--seed", type=int, help="Run seed (overrides seed).")
@click.option("--trials", type=click.IntRange(min=0), help="Trial count (overrides trials).")
@click.version_option(package_name="artifact")
def main(command, config_path, out_dir, seed, trials):
    """Run one experiment COMMAND and write its reports."""
    _setup_logging()
    try:
        text = ""
        if config_path:
            with open(config_path, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text)
        doc = yaml.safe_load(text) or {}
        if doc.get("command") not in (None, command):
            raise ConfigError(
                f"config is for command {doc['command']!r}, not {command!r}", "command"
            )
    except (ConfigError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        if out_dir is not None:
            try:
                os.makedirs(out_dir, exist_ok=True)
                report_emit([_error_record(exc)], os.path.join(out_dir, "error.json"),
                            "structured", meta={"command": command})
            except (OSError, NalabError):
                pass
        sys.exit(2)
    overrides = {"command": command}
    if out_dir is not None:
        overrides["out_dir"] = out_dir
    if seed is not None:
        overrides["seed"] = seed
    if trials is not None:
        overrides["trials"] = trials
    cfg = replace(cfg, **overrides)
    status, artifacts = execute(cfg)
    for path in artifacts:
        click.echo(path)
    sys.exit(status)


if __name__ == "__main__":
    main()
