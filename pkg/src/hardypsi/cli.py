"""Command-line front end: one JSON job in, deterministic files out.

Usage::

    hardypsi invertible --config job.json --out results/
    hardypsi validate --out results/ --seed 3

Exit codes: 0 ok, 2 config, 3 symbol class, 4 resolution, 5 consistency.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (
    DEFAULT_RESOLUTION,
    corollary4_equivalence,
    essential_spectrum,
    fredholm_index,
    homotopy_trace,
    is_invertible,
    random_element,
    random_fredholm_point,
    spectrum,
)
from .composition import (
    disc_matrix_direct,
    series_expansion,
    verify_sigma_equals_sigma_e,
    whisker_oracle,
)
from .config import COMMANDS, load_config
from .errors import ConfigError, ConsistencyError, HardyPsiError, NotFredholmError
from .finite_model import TruncationConfig, psi_element_matrix
from .report import (
    atomic_write,
    components_csv,
    csv_text,
    essential_csv,
    json_text,
    spectrum_document,
    svg_plot,
)

ORACLE_BLOCK = 32
ORACLE_SLACK = 1e-5


class Job:
    """Runs one command; collects files to write as ``{name: text}``."""

    def __init__(self, config, out, fmt="both"):
        self.config = config
        self.out = Path(out)
        self.fmt = fmt
        self.files = {}
        self.p = config.parameters

    @property
    def want_csv(self):
        return self.fmt in ("csv", "both")

    @property
    def want_svg(self):
        return self.fmt in ("svg", "both")

    def emit(self, name, text):
        self.files[name] = text

    def flush(self):
        return [atomic_write(self.out / name, text) for name, text in sorted(self.files.items())]

    # -- commands ---------------------------------------------------------

    def essential_spectrum(self):
        el = self.config.subject()
        es = essential_spectrum(el, float(self.p["sigma_resolution"]))
        if self.want_csv:
            self.emit("essential_spectrum.csv", essential_csv(es))
        if self.want_svg:
            self.emit("essential_spectrum.svg",
                      svg_plot({"whisker": es.whisker, "circle": es.circle},
                               markers=[(v, "") for v in self.config.lambdas],
                               title="essential spectrum"))

    def spectrum(self):
        el = self.config.subject()
        box = self.p["bounding_box"]
        rep = spectrum(el, bounding_box=None if box is None else tuple(box),
                       resolution=self.p["resolution"])
        verdicts = [(lam, is_invertible(el, lam, float(self.p["sigma_resolution"])))
                    for lam in self.config.lambdas]
        self.emit("spectrum.json", json_text(spectrum_document(rep, verdicts)))
        if self.want_csv:
            self.emit("essential_spectrum.csv", essential_csv(rep.essential))
            self.emit("components.csv", components_csv(rep))
        if self.want_svg:
            es = rep.essential
            self.emit("spectrum.svg",
                      svg_plot({"whisker": es.whisker, "circle": es.circle},
                               filled=rep.filled_points,
                               markers=[(c.representative, str(c.index))
                                        for c in rep.components],
                               title="spectrum"))
        return rep

    def _need_lambdas(self):
        lams = self.config.lambdas
        if not lams:
            raise ConfigError(f"command {self.config.command!r} needs parameters.lambdas")
        return lams

    def index(self):
        el = self.config.subject()
        res = float(self.p["sigma_resolution"])
        es = essential_spectrum(el, res)
        rows = []
        for lam in self._need_lambdas():
            try:
                ind, status = fredholm_index(el, lam, res), "fredholm"
            except NotFredholmError:
                ind, status = None, "not_fredholm"
            rows.append((lam.real, lam.imag, status, ind, es.distance(lam), es.threshold,
                         es.tail_bound))
        self.emit("indices.csv", csv_text(
            (("lambda_re", "real part"), ("lambda_im", "imaginary part"),
             ("status", "fredholm | not_fredholm"), ("index", "Fredholm index, empty if none"),
             ("distance", "distance to sampled sigma_e"),
             ("threshold", "Fredholm threshold: tail + resolution bound + margin"),
             ("tail_bound", "series tail bound of the element")), rows))
        return rows

    def invertible(self):
        el = self.config.subject()
        res = float(self.p["sigma_resolution"])
        verdicts = [(lam, is_invertible(el, lam, res)) for lam in self._need_lambdas()]
        doc = {"report_version": 1, "kind": "verdicts", "resolution": res,
               "tail_bound": el.tail_bound,
               "verdicts": [dict(lam=lam, **v.as_dict()) for lam, v in verdicts]}
        self.emit("verdicts.json", json_text(doc))
        if self.want_csv:
            rows = [(lam.real, lam.imag, v.kind, v.index, v.distance, v.threshold,
                     v.within_tolerance_band) for lam, v in verdicts]
            self.emit("verdicts.csv", csv_text(
                (("lambda_re", "real part"), ("lambda_im", "imaginary part"),
                 ("verdict", "invertible | fredholm_nonzero_index | not_fredholm"),
                 ("index", "Fredholm index, empty if not Fredholm"),
                 ("distance", "distance to sampled sigma_e"),
                 ("threshold", "Fredholm threshold: tail + resolution bound + margin"),
                 ("within_tolerance_band", "distance positive but below the threshold")),
                rows))
        return verdicts

    def homotopy_trace(self):
        el = self.config.subject()
        lams = self._need_lambdas()
        res = float(self.p["sigma_resolution"])
        rows = []
        for lam in lams:
            for e in homotopy_trace(el, lam, [float(w) for w in self.p["w_grid"]], res):
                rows.append((lam.real, lam.imag, e.w, e.index, e.distance, e.containment_gap,
                             res + el.tail_bound))
        self.emit("homotopy_trace.csv", csv_text(
            (("lambda_re", "real part"), ("lambda_im", "imaginary part"),
             ("w", "homotopy parameter"), ("index", "index of lambda - H(w)"),
             ("distance", "distance of lambda to sigma_e(H(w))"),
             ("containment_gap", "max distance of sigma_e(H(w)) samples to sigma_e(H(1))"),
             ("containment_tolerance", "resolution plus tail bound")), rows))
        return rows

    def compose(self):
        qmap = self.config.qmap
        if qmap is None:
            raise ConfigError("command 'compose' needs a 'map'")
        exp = series_expansion(qmap)
        summary = exp.summary()
        summary.update(oracle_check(qmap, exp, self.p["N"]))
        summary["psi"] = {"constant": qmap.constant, "poles": list(qmap.poles),
                          "epsilon": qmap.epsilon, "min_imag": qmap.min_imag()}
        summary["report_version"] = 1
        summary["kind"] = "composition"
        self.emit("compose.json", json_text(summary))
        if self.p["emit_matrices"]:
            cfg = TruncationConfig(self.p["N"])
            self.emit("series_matrix.csv", psi_element_matrix(exp.element, cfg).to_csv())
            self.emit("direct_matrix.csv", disc_matrix_direct(qmap, cfg).to_csv())
        return summary

    def validate(self):
        doc = run_validation(self.config, self.p)
        self.emit("validate.json", json_text(doc))
        if doc["failures"]:
            raise ConsistencyError(f"{len(doc['failures'])} validation check(s) failed",
                                   {"failures": doc["failures"]})
        return doc

    def run(self):
        handler = getattr(self, self.config.command.replace("-", "_"))
        return handler()


def oracle_check(qmap, exp, N, block=ORACLE_BLOCK):
    """Series element against the direct disc matrix on the leading block."""
    cfg = TruncationConfig(N)
    series = psi_element_matrix(exp.element, cfg).entries
    direct = disc_matrix_direct(qmap, cfg)
    b = min(block, N)
    disc = float(np.linalg.norm(series[:b, :b] - direct.entries[:b, :b], 2))
    es = essential_spectrum(exp.element)
    w_err = float(np.max(np.abs(es.whisker - whisker_oracle(qmap, es.whisker_params))))
    return {"N": N, "block": b, "discrepancy": disc,
            "discrepancy_bound": exp.tail_bound + ORACLE_SLACK,
            "whisker_oracle_error": w_err,
            "weight_condition": direct.diagnostics["weight_condition"],
            "oracle_ok": bool(disc <= exp.tail_bound + ORACLE_SLACK
                              and w_err <= es.resolution_bound + exp.tail_bound + 1e-9)}


def bundled_examples():
    """``(name, raw config)`` pairs shipped with the package, sorted by name."""
    root = resources.files("hardypsi") / "examples"
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json") and entry.name != "validate.json":
            out.append((entry.name, json.loads(entry.read_text())))
    return out


def _check_example(name, raw):
    """Run one bundled example and compare with its ``expect`` block."""
    failures = []
    job = load_config(raw)
    expect = raw.get("expect", {})
    el = job.subject()
    if "verdicts" in expect or "indices" in expect:
        for i, lam in enumerate(job.lambdas):
            v = is_invertible(el, lam)
            if "verdicts" in expect and v.kind != expect["verdicts"][i]:
                failures.append({"example": name, "lambda": lam, "expected": expect["verdicts"][i],
                                 "got": v.kind})
            if "indices" in expect and v.index != expect["indices"][i]:
                failures.append({"example": name, "lambda": lam, "expected": expect["indices"][i],
                                 "got": v.index})
    if expect.get("oracle"):
        exp = series_expansion(job.qmap)
        res = oracle_check(job.qmap, exp, job.parameters["N"])
        if not res["oracle_ok"]:
            failures.append({"example": name, "check": "oracle", **res})
    if expect.get("sigma_equals_sigma_e"):
        try:
            verify_sigma_equals_sigma_e(job.qmap, resolution=job.parameters["resolution"])
        except ConsistencyError as exc:
            failures.append({"example": name, "check": "sigma_equals_sigma_e",
                             "message": str(exc)})
    return failures


def run_validation(config, p):
    """Limit-Toeplitz agreement, homotopy constancy and oracle equivalence."""
    rng = np.random.default_rng(int(p["seed"]))
    failures = []
    counts = {"limit_toeplitz": 0, "homotopy": 0, "examples": 0}
    for _ in range(int(p["random_elements"])):
        el = random_element(rng)
        lam = random_fredholm_point(el, rng)
        try:
            corollary4_equivalence(el, lam)
        except ConsistencyError as exc:
            failures.append({"check": "limit_toeplitz", "lambda": lam,
                             "diagnostics": exc.diagnostics})
        counts["limit_toeplitz"] += 1
    w_grid = [float(w) for w in p["w_grid"]]
    for _ in range(int(p["homotopy_elements"])):
        el = random_element(rng)
        lam = random_fredholm_point(el, rng)
        try:
            homotopy_trace(el, lam, w_grid, DEFAULT_RESOLUTION)
        except ConsistencyError as exc:
            failures.append({"check": "homotopy", "lambda": lam,
                             "diagnostics": exc.diagnostics})
        counts["homotopy"] += 1
    examples = bundled_examples()
    if config.element is not None or config.qmap is not None:
        examples.append(("config", config.raw | {"expect": config.raw.get(
            "expect", {"oracle": config.qmap is not None})}))
    for name, raw in examples:
        failures.extend(_check_example(name, raw))
        counts["examples"] += 1
    return {"report_version": 1, "kind": "validation", "seed": int(p["seed"]),
            "counts": counts, "failures": failures}


def _metadata(config, files):
    digest = hashlib.sha256(json.dumps(config.raw, sort_keys=True).encode()).hexdigest()
    return {"package_version": __version__, "numpy_version": np.__version__,
            "command": config.command, "config_sha256": digest,
            "parameters": config.parameters, "files": sorted(files)}


def build_parser():
    ap = argparse.ArgumentParser(prog="hardypsi", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS,
                    help="command to run (defaults to the config's 'command')")
    ap.add_argument("--config", help="JSON job file (optional for validate)")
    ap.add_argument("--out", default=".", help="output directory (default: .)")
    ap.add_argument("--format", choices=("csv", "svg", "both"), default="both")
    ap.add_argument("--seed", type=int, help="seed of the random-element validation suite")
    ap.add_argument("--n", type=int, help="truncation size N")
    ap.add_argument("--resolution", type=int, help="spectrum grid resolution")
    return ap


def run(command, config, out=".", fmt="both", overrides=None):
    """Run one job; returns ``(exit_status, written_paths)``.

    Errors are reported on stderr and mapped to their exit codes;
    consistency failures also write ``diagnostics.json``.
    """
    out = Path(out)
    try:
        job_cfg = load_config(config, command=command, overrides=overrides)
        job = Job(job_cfg, out, fmt)
        job.run()
        written = job.flush()
        written.append(atomic_write(out / "run_metadata.json",
                                    json_text(_metadata(job_cfg, job.files))))
        return 0, written
    except HardyPsiError as exc:
        print(f"hardypsi: error: {exc}", file=sys.stderr)
        written = []
        if isinstance(exc, ConsistencyError):
            written.append(atomic_write(out / "diagnostics.json", json_text(
                {"error": str(exc), "diagnostics": exc.diagnostics})))
        return exc.exit_code, written


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    config = args.config
    if config is None:
        if args.command != "validate":
            print("hardypsi: error: --config is required", file=sys.stderr)
            return 2
        config = {"schema_version": 1, "command": "validate"}
    overrides = {"N": args.n, "resolution": args.resolution, "seed": args.seed}
    try:
        status, _ = run(args.command, config, args.out, args.format, overrides)
    except OSError as exc:
        print(f"hardypsi: error: {exc}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
