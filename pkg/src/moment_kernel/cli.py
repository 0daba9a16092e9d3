"""Command-line front end.

Each subcommand reads the run configuration and reuses upstream artifacts
in the output directory when they were produced from the same
configuration; otherwise the upstream stages are recomputed.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 verification failure.  Failures print one JSON line on stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import load_config
from .errors import ConfigError, MomentKernelError
from .kernel import PadeKernel, decay_time, pade_fit, solve_gqme
from .moments import MomentTable, compute_moments
from .oracle import FockBath, oracle_correlation, oracle_moments
from .pipeline import required_order, run_mkct, spectra
from .spectral import FrequencyScale

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
TIME_COLUMNS = ("t", "K1_re", "K1_im", "C_re", "C_im")
FREQ_COLUMNS = ("omega", "K1w_re", "K1w_im", "I", "I_norm")


class VerificationFailed(Exception):
    pass


def _fmt(x):
    return "%.17g" % x


def _pairs(a):
    return [[float(z.real), float(z.imag)] for z in np.asarray(a, dtype=complex).ravel()]


def _unpairs(rows):
    return np.array([complex(a, b) for a, b in rows])


class Run:
    """Shared state of one CLI invocation: config, output paths, manifest."""

    def __init__(self, args, command):
        self.args = args
        self.command = command
        self.cfg = load_config(args.config)
        self.hash = self.cfg.digest()
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.timings = {}
        self.notes = {}

    def path(self, key):
        return self.out / self.cfg.outputs[key]

    def header(self, scale):
        return [f"# config_sha256={self.hash}", f"# omega_c={_fmt(scale.omega_c)} units=model"]

    def timed(self, name, fn, *a, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*a, **kw)
        finally:
            self.timings[name] = round(time.perf_counter() - t0, 6)

    def _load_json(self, key):
        p = self.path(key)
        if not p.exists():
            return None
        d = json.loads(p.read_text())
        return d if d.get("config_sha256") == self.hash else None

    # stages ---------------------------------------------------------------

    def moments(self, fresh=False):
        d = None if fresh else self._load_json("moments")
        if d is not None:
            return MomentTable.from_json(json.dumps(d))
        cfg = self.cfg
        n, M1, M2 = cfg.pade
        tab = self.timed(
            "moments", compute_moments, cfg.model, cfg.spectral, required_order(n, M1, M2), cfg.scale()
        )
        om, aux, _ = tab.unscaled()
        text = tab.to_json(
            config_sha256=self.hash,
            omega_model_units=_pairs(om),
            omega_tilde_model_units=_pairs(aux),
        )
        self.path("moments").write_text(text + "\n")
        return tab

    def kernel(self, tab, fresh=False):
        d = None if fresh else self._load_json("kernel")
        if d is not None:
            return PadeKernel(_unpairs(d["a"]), _unpairs(d["b"]), FrequencyScale(d["scale"]))
        n, M1, M2 = self.cfg.pade
        s = tab.scale.omega_c
        k = self.timed(
            "kernel",
            pade_fit,
            tab.kernel_taylor(n, M1, M2),
            M1,
            M2,
            tab.scale,
            t_window=self.cfg.grid.t_max * s,
        )
        payload = {
            "config_sha256": self.hash,
            "units": "scaled: t in 1/omega_c, K in omega_c**2",
            "scale": s,
            "n": n,
            "M1_requested": M1,
            "M2_requested": M2,
            "M1": k.M1,
            "M2": k.M2,
            "a": _pairs(k.a),
            "b": _pairs(k.b),
            "poles": _pairs(np.sort_complex(k.poles())),
        }
        self.path("kernel").write_text(json.dumps(payload, indent=1) + "\n")
        return k

    def correlate(self, fresh=False):
        tab = self.moments(fresh)
        k = self.kernel(tab, fresh)
        g = self.cfg.grid
        s = tab.scale.omega_c
        ser = self.timed("gqme", solve_gqme, tab.omega[1], k, g.t_max * s, g.dt * s, tab.scale)
        t, C, K1 = ser.unscaled()
        rows = np.column_stack([t, K1.real, K1.imag, C.real, C.imag])
        self._write_csv("time", tab.scale, TIME_COLUMNS, rows)
        self.notes["tau_K1"] = decay_time(t, K1)
        self.notes["tau_C"] = decay_time(t, C)
        self.notes["M1_M2_used"] = [k.M1, k.M2]
        return t, K1, C, tab.scale

    def lineshape(self, data=None):
        if data is None:
            data = self._read_time()
        if data is None:
            data = self.correlate()
        t, K1, C, scale = data
        g = self.cfg.grid
        w = g.omega()
        Kw, I = self.timed("lineshape", spectra, t, K1, C, w, g.apodization, g.fourier_sign)
        peak = np.abs(I).max()
        norm = I / peak if peak > 0 else I
        rows = np.column_stack([w, Kw.real, Kw.imag, I, norm])
        self._write_csv("frequency", scale, FREQ_COLUMNS, rows)
        if peak > 0:
            self.notes["I_peak_omega"] = float(w[int(np.argmax(I))])

    def _write_csv(self, key, scale, cols, rows):
        lines = self.header(scale) + [",".join(cols)]
        lines += [",".join(_fmt(x) for x in r) for r in rows]
        self.path(key).write_text("\n".join(lines) + "\n")

    def _read_time(self):
        p = self.path("time")
        if not p.exists():
            return None
        with p.open() as fh:
            head = [next(fh), next(fh)]
            if head[0].strip() != f"# config_sha256={self.hash}":
                return None
            scale = FrequencyScale(float(head[1].split()[1].split("=")[1]))
            rows = list(csv.reader(fh))
        data = np.array(rows[1:], dtype=float)
        t, K1 = data[:, 0], data[:, 1] + 1j * data[:, 2]
        C = data[:, 3] + 1j * data[:, 4]
        return t, K1, C, scale

    # oracle ---------------------------------------------------------------

    def _oracle_spec(self):
        if self.cfg.oracle is None:
            raise ConfigError(f"'{self.command}' needs an [oracle] table with discrete modes")
        return self.cfg.oracle

    def oracle_moments(self):
        o = self._oracle_spec()
        model = self.cfg.model
        if o.n_max is not None:
            bath = FockBath(o.modes, self.cfg.beta, o.n_max)
        else:
            bath = FockBath.for_moments(o.modes, self.cfg.beta, o.moment_order, model.degree)
        raw = self.timed(
            "oracle_moments", oracle_moments, model, bath, o.moment_order, max_dim=o.max_dim
        )
        return raw / raw[0], bath

    def oracle_trace(self):
        o = self._oracle_spec()
        if o.n_max is not None:
            bath = FockBath(o.modes, self.cfg.beta, o.n_max)
        else:
            bath = FockBath.converged(o.modes, self.cfg.beta, reach=6, tol=1e-10)
        t = np.linspace(0.0, o.t_max, o.samples)
        C = self.timed("oracle_correlation", oracle_correlation, self.cfg.model, bath, t, o.max_dim)
        return t, C, bath

    def symbolic_moments(self):
        o = self._oracle_spec()
        sd = o.spectral(self.cfg.beta)
        tab = self.timed(
            "symbolic_moments", compute_moments, self.cfg.model, sd, o.moment_order, self.cfg.scale()
        )
        om, _, _ = tab.unscaled()
        return om

    def mkct_on_oracle_bath(self, t):
        o = self._oracle_spec()
        cfg = self.cfg
        sd = o.spectral(cfg.beta)
        n, M1, M2 = cfg.pade
        res = self.timed(
            "mkct", run_mkct, cfg.model, sd, M1, M2, o.t_max, o.dt, n, cfg.scale()
        )
        tt, _, C = res.time_domain()
        return np.interp(t, tt, C.real) + 1j * np.interp(t, tt, C.imag)

    # manifest -------------------------------------------------------------

    def manifest(self, caught, status):
        m = {
            "command": self.command,
            "status": status,
            "config": str(self.args.config),
            "config_sha256": self.hash,
            "package_version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "threads": self.args.threads,
            "seed": self.args.seed,
            "timings_s": self.timings,
            "warnings": [
                {"category": w.category.__name__, "message": str(w.message)} for w in caught
            ],
        }
        m.update({k: _jsonable(v) for k, v in self.notes.items()})
        text = json.dumps(m, indent=1)
        self.path("manifest").write_text(text + "\n")
        return text


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, np.generic):
        return v.item()
    return v


# commands -----------------------------------------------------------------


def cmd_moments(run):
    tab = run.moments(fresh=True)
    run.notes["omega_c"] = tab.scale.omega_c
    run.notes["N"] = tab.N


def cmd_kernel(run):
    tab = run.moments()
    k = run.kernel(tab, fresh=True)
    run.notes["M1_M2_used"] = [k.M1, k.M2]


def cmd_correlate(run):
    run.correlate()


def cmd_lineshape(run):
    run.lineshape()


def cmd_run(run):
    data = run.correlate(fresh=True)
    run.lineshape(data)


def cmd_oracle(run):
    o = run._oracle_spec()
    om, bath = run.oracle_moments()
    t, C, bath_c = run.oracle_trace()
    payload = {
        "config_sha256": run.hash,
        "units": "model",
        "bath": {"modes": [list(m) for m in o.modes], "beta": run.cfg.beta},
        "moments": {"n_max": list(bath.n_max), "omega": _pairs(om)},
        "correlation": {"n_max": list(bath_c.n_max), "t": t.tolist(), "C": _pairs(C)},
    }
    run.path("oracle").write_text(json.dumps(payload, indent=1) + "\n")


def cmd_verify(run):
    o = run._oracle_spec()
    jobs = {"oracle": run.oracle_moments, "symbolic": run.symbolic_moments}
    want_corr = o.correlation_tol is not None
    if want_corr:
        jobs["trace"] = run.oracle_trace
    with ThreadPoolExecutor(max_workers=max(1, run.args.threads)) as pool:
        futs = {k: pool.submit(f) for k, f in jobs.items()}
        res = {k: f.result() for k, f in futs.items()}
    ref, _ = res["oracle"]
    sym = res["symbolic"]
    rel = np.abs(sym - ref) / np.maximum(np.abs(ref), np.finfo(float).tiny)
    report = {
        "config_sha256": run.hash,
        "moment_order": o.moment_order,
        "moment_rel_err": rel.tolist(),
        "moment_max_rel_err": float(rel.max()),
        "moment_rtol": o.moment_rtol,
    }
    ok = bool(rel.max() <= o.moment_rtol)
    print(f"moments  n<={o.moment_order}  max rel err {rel.max():.3e}  tol {o.moment_rtol:.1e}  "
          f"{'PASS' if ok else 'FAIL'}")
    if want_corr:
        t, C_ref, _ = res["trace"]
        C = run.mkct_on_oracle_bath(t)
        err = float(np.abs(C - C_ref).max())
        c_ok = err <= o.correlation_tol
        report.update(correlation_max_abs_err=err, correlation_tol=o.correlation_tol)
        print(f"C(t)     t<={o.t_max:g}  max abs err {err:.3e}  tol {o.correlation_tol:.1e}  "
              f"{'PASS' if c_ok else 'FAIL'}")
        ok = ok and c_ok
    report["status"] = "PASS" if ok else "FAIL"
    run.path("verify").write_text(json.dumps(report, indent=1) + "\n")
    run.notes["verify"] = report["status"]
    if not ok:
        raise VerificationFailed("symbolic pipeline disagrees with the oracle beyond tolerance")


COMMANDS = {
    "run": (cmd_run, "full pipeline: moments, kernel, C(t), spectra"),
    "moments": (cmd_moments, "compute the moment table"),
    "kernel": (cmd_kernel, "fit the Pade memory kernel"),
    "correlate": (cmd_correlate, "solve the GQME for C(t)"),
    "lineshape": (cmd_lineshape, "transform K_1(t) and C(t) to frequency"),
    "oracle": (cmd_oracle, "exact-diagonalization reference on the discrete bath"),
    "verify": (cmd_verify, "compare the symbolic pipeline with the oracle"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML run configuration")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for verify")
    common.add_argument("--seed", type=int, default=None, help="reserved; the pipeline is deterministic")
    parser = argparse.ArgumentParser(
        prog="moment-kernel", description="Memory kernels and correlation functions from moments."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def _fail(exc, code):
    line = {"error": type(exc).__name__, "message": str(exc), "exit": code}
    print(json.dumps(line), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        run = Run(args, args.command)
    except ConfigError as exc:
        return _fail(exc, EXIT_CONFIG)
    except MomentKernelError as exc:
        # e.g. a spectral density whose moments diverge
        return _fail(exc, EXIT_NUMERIC)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            fn(run)
        except ConfigError as exc:
            code, err = EXIT_CONFIG, exc
        except VerificationFailed as exc:
            code, err = EXIT_VERIFY, exc
        except (MomentKernelError, ArithmeticError, np.linalg.LinAlgError) as exc:
            code, err = EXIT_NUMERIC, exc
        else:
            code, err = EXIT_OK, None
    status = "ok" if err is None else type(err).__name__
    print(run.manifest(caught, status))
    if err is not None:
        return _fail(err, code)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
