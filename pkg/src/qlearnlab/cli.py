"""Command line entry point: ``python -m qlearnlab <command> ...``.

Every command renders its results to text first and only then touches the
disk, so a failing run never leaves partial outputs behind. With ``--out``
the CSVs land in that directory next to a ``manifest.json`` holding the
config echo, seed and SHA-256 of every file.

Exit codes: 0 success, 2 config error, 3 precondition violation,
4 internal invariant failure.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .batch import PacParams, agnostic_trials, pac_trials
from .bounds import CALIBRATION, freedman_threshold
from .core import Distribution, HypothesisClass
from .dims import DIMENSIONS, natarajan_dim
from .errors import ConfigError, InvariantError, LabError, PreconditionError
from .io import (
    csv_text,
    format_certificate,
    parse_certificate,
    parse_class,
    parse_distribution,
    read_csv,
    read_text,
)
from .online import (
    PointMassAdversary,
    ProtocolConfig,
    StochasticAdversary,
    TreeAdversary,
    make_learner,
    regret_eval,
    regret_sweep,
    run_protocol,
    run_streams,
)
from .quantum import (
    RegisterLayout,
    ancilla_residual,
    binary_to_multiclass_transform,
    drop_ancillas,
    prepare_realizable_example,
    sample_outcomes,
)
from .trees import (
    dim_chain_report,
    verify_BL_shattered,
    verify_L_shattered,
    verify_mcL_shattered,
    verify_n_shattered,
    verify_shattered_set,
)

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_INVARIANT = 0, 2, 3, 4


class Result:
    """Text for stdout plus named output files."""

    def __init__(self, stdout: str = "", files: dict[str, str] | None = None, meta: dict | None = None):
        self.stdout = stdout
        self.files = files or {}
        self.meta = meta or {}


# dims -----------------------------------------------------------------------


def cmd_dims_compute(H: HypothesisClass, dim: str) -> Result:
    if dim not in DIMENSIONS:
        raise ConfigError(f"unknown dimension {dim!r}; choose from {sorted(DIMENSIONS)}")
    res = DIMENSIONS[dim](H)
    files = {} if res.certificate is None else {f"{dim}.cert": format_certificate(res.certificate)}
    return Result(f"{res.value}\n", files)


VERIFIERS = {
    "vc": verify_shattered_set,
    "natarajan": verify_n_shattered,
    "ldim": verify_L_shattered,
    "mcldim": verify_mcL_shattered,
    "bldim": verify_BL_shattered,
}


def cmd_dims_verify(H: HypothesisClass, cert_text: str, dim: str) -> Result:
    if dim not in VERIFIERS:
        raise ConfigError(f"unknown dimension {dim!r}")
    ok = VERIFIERS[dim](H, parse_certificate(cert_text))
    return Result(f"{str(ok).lower()}\n")


def cmd_chain(H: HypothesisClass) -> Result:
    r = dim_chain_report(H)
    text = csv_text(
        "chain",
        ["ldim_loss", "bldim", "mcldim", "bound_4klogk", "ldim_loss_le_bldim", "bldim_le_bound"],
        [[r.ldim_loss, r.bldim, r.mcldim, r.bound_4klogk, True, r.within_bound]],
    )
    return Result(text, {"chain.csv": text})


# quantum ----------------------------------------------------------------------


def circuit_cases(n: int, k: int, exhaustive: bool, rng: np.random.Generator):
    """Witness pairs with pointwise disagreement, binary labelings and distributions."""
    pairs = [(a, b) for a in range(k) for b in range(k) if a != b]
    if exhaustive:
        for wit in itertools.product(pairs, repeat=n):
            f0 = tuple(a for a, _ in wit)
            f1 = tuple(b for _, b in wit)
            for c in itertools.product((0, 1), repeat=n):
                for D in (Distribution.uniform(n), Distribution.random(n, rng)):
                    yield f0, f1, c, D
    else:
        wit = [pairs[i] for i in rng.integers(len(pairs), size=n)]
        c = tuple(int(v) for v in rng.integers(2, size=n))
        yield tuple(a for a, _ in wit), tuple(b for _, b in wit), c, Distribution.random(n, rng)


def expected_multiclass_state(D: Distribution, f0, f1, c, k: int) -> np.ndarray:
    layout = RegisterLayout.example(D.support_size, k)
    amps = np.zeros(layout.dim, dtype=complex)
    for x in range(D.support_size):
        amps[layout.index(x=x, y=(f1 if c[x] else f0)[x])] = math.sqrt(D.probs[x])
    return amps


def circuit_check(n: int, k: int, exhaustive: bool, seed: int) -> tuple[int, float, float]:
    """Number of cases, max amplitude deviation, max ancilla residual."""
    rng = np.random.default_rng(seed)
    layout = RegisterLayout.reduction(n, k)
    cases, dev, resid = 0, 0.0, 0.0
    for f0, f1, c, D in circuit_cases(n, k, exhaustive, rng):
        out = binary_to_multiclass_transform(prepare_realizable_example(D, c, layout), f0, f1)
        resid = max(resid, ancilla_residual(out))
        got = drop_ancillas(out).amplitudes
        dev = max(dev, float(np.abs(got - expected_multiclass_state(D, f0, f1, c, k)).max()))
        cases += 1
    return cases, dev, resid


def cmd_circuit_test(n: int, k: int, exhaustive: bool, seed: int) -> Result:
    cases, dev, resid = circuit_check(n, k, exhaustive, seed)
    verdict = "max deviation <= 1e-12" if dev <= 1e-12 and resid <= 1e-12 else "DEVIATION ABOVE 1e-12"
    text = csv_text("circuit", ["n", "k", "cases", "max_amplitude_deviation", "ancilla_residual"],
                    [[n, k, cases, dev, resid]])
    return Result(text + f"# {verdict}\n", {"circuit.csv": text})


def _single_target(text: str) -> HypothesisClass:
    T = parse_class(text)
    if len(T) != 1:
        raise ConfigError("target file must hold exactly one hypothesis")
    return T


def cmd_sample(D: Distribution, target: HypothesisClass, shots: int, seed: int) -> Result:
    if shots < 1:
        raise PreconditionError("need at least one shot")
    h = target[0]
    layout = RegisterLayout.example(target.n, target.k)
    state = prepare_realizable_example(D, h, layout)
    outcomes = sample_outcomes(state, np.random.default_rng(seed), shots)
    counts = np.bincount(outcomes, minlength=layout.dim)
    rows = []
    for m in np.flatnonzero(counts):
        v = layout.decode(int(m))
        rows.append([int(v["x"]), int(v["y"]), int(counts[m]), float(counts[m] / shots)])
    text = csv_text("samples", ["x", "y", "count", "frequency"], rows)
    return Result(text, {"samples.csv": text})


# batch --------------------------------------------------------------------------


def cmd_batch(mode: str, H: HypothesisClass, D: Distribution, target_row: int | None, eps: float, delta: float,
              m: int | None, trials: int, seed: int) -> Result:
    if len(H) == 0:
        raise PreconditionError("class is empty")
    if m is None:
        nd = max(natarajan_dim(H).value, 0)
        m = CALIBRATION.m_pac(nd, max(H.k, 2), eps, delta) if mode == "pac" else CALIBRATION.m_agn(nd, max(H.k, 2), eps, delta)
    params = PacParams(eps, delta, m, trials, seed)
    if mode == "pac":
        row = target_row or 0
        if not 0 <= row < len(H):
            raise PreconditionError(f"target row {row} outside the class")
        vals = pac_trials(H, D, H[row], params)
        col = "error"
    else:
        vals = agnostic_trials(H, D, params)
        col = "regret"
    rate = float(np.mean(vals <= eps))
    trial_csv = csv_text(f"batch-{mode}", ["trial", col, "success"],
                         [[i, float(v), int(v <= eps)] for i, v in enumerate(vals)])
    summary = csv_text(f"batch-{mode}-summary", ["mode", "m", "trials", "epsilon", "delta", "success_rate", "target_rate"],
                       [[mode, m, trials, eps, delta, rate, 1 - delta]])
    return Result(summary, {f"{mode}_trials.csv": trial_csv, f"{mode}_summary.csv": summary})


# online -------------------------------------------------------------------------


def _parse_sequence(text: str) -> list[tuple[int, int]]:
    seq = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"sequence lines must be 'x y', got {line!r}")
            seq.append((int(parts[0]), int(parts[1])))
    return seq


def build_adversary(kind: str, H: HypothesisClass, streams: dict, T: int, D: Distribution | None,
                    target: Sequence[int] | None, sequence=None, realizable: bool = True):
    if kind == "tree":
        from .dims import mc_littlestone_dim
        return TreeAdversary(H, mc_littlestone_dim(H).certificate)
    if kind == "point":
        if sequence is None:
            h = target if target is not None else H[0]
            xs = streams["adversary"].integers(H.n, size=T)
            sequence = [(int(x), int(h[x])) for x in xs]
        return PointMassAdversary(H, sequence)
    if kind == "stochastic":
        if realizable:
            D = D if D is not None else Distribution.uniform(H.n)
            return StochasticAdversary(H, D, target if target is not None else H[0], rng=streams["adversary"])
        if D is None:
            raise ConfigError("agnostic stochastic adversary needs a joint distribution (--dist)")
        return StochasticAdversary(H, D, rng=streams["adversary"])
    raise ConfigError(f"unknown adversary {kind!r}")


ROUND_HEADER = ["trial", "t", "x", "y", "P_t", "I_t", "M_t", "W_t"]
SUMMARY_HEADER = ["trial", "T", "indicator_loss", "prob_loss", "agnostic_regret", "realizable_regret",
                  "freedman_threshold", "exceeds"]


def cmd_online_run(model: str, H: HypothesisClass, learner: str, adversary: str, T: int, seed: int, trials: int,
                   D: Distribution | None = None, target_row: int | None = None, sequence=None,
                   realizable: bool = True) -> Result:
    if trials < 1:
        raise PreconditionError("need at least one trial")
    target = H[target_row] if target_row is not None else None
    from .dims import mc_littlestone_dim
    ld = mc_littlestone_dim(H).value
    rounds, summary = [], []
    for i in range(trials):
        streams = run_streams(seed, i)
        cfg = ProtocolConfig(model, T, realizable)
        adv = build_adversary(adversary, H, streams, T, D, target, sequence, realizable)
        tr = run_protocol(cfg, make_learner(learner, H, T, model, streams), adv, H, streams["harness"])
        for r in tr.rounds:
            rounds.append([i, r.t, r.x, r.y, r.P, r.I, r.M, r.W_partial])
        reg = regret_eval(tr)
        thr = freedman_threshold(ld, T, 1.0) if T >= 4 else float("nan")
        summary.append([i, T, tr.indicator_loss, tr.probabilistic_loss, reg.agnostic_regret,
                        "" if reg.realizable_regret is None else reg.realizable_regret, thr,
                        int(T >= 4 and tr.probabilistic_loss > thr)])
    rounds_csv = csv_text("online-rounds", ROUND_HEADER, rounds)
    summary_csv = csv_text("online-summary", SUMMARY_HEADER, summary)
    return Result(summary_csv, {"rounds.csv": rounds_csv, "summary.csv": summary_csv})


def cmd_online_sweep(model: str, H: HypothesisClass, learner: str, adversary: str, T_grid: Sequence[int], seed: int,
                     trials: int, D: Distribution | None = None, target_row: int | None = None,
                     realizable: bool = True) -> Result:
    target = H[target_row] if target_row is not None else None
    rows = regret_sweep(
        H, learner,
        lambda H_, streams: build_adversary(adversary, H_, streams, max(T_grid), D, target, None, realizable),
        model, T_grid, trials, seed, realizable,
    )
    header = ["T", "trials", "mean_regret", "stderr_regret", "mean_prob_loss", "mean_indicator_loss", "ratio_to_previous"]
    text = csv_text("online-sweep", header, [[r.get(h, "") for h in header] for r in rows])
    return Result(text, {"sweep.csv": text})


# report ---------------------------------------------------------------------------


def cmd_report(paths: Sequence[str]) -> Result:
    """Aggregate online summary CSVs: one row per horizon T plus scaling ratios."""
    rows = []
    for p in paths:
        kind, data = read_csv(p)
        if kind != "online-summary":
            raise ConfigError(f"{p}: expected an online-summary CSV, got {kind!r}")
        missing = set(SUMMARY_HEADER) - set(data[0].keys() if data else SUMMARY_HEADER)
        if missing:
            raise ConfigError(f"{p}: schema mismatch, missing columns {sorted(missing)}")
        rows.extend(data)
    header = ["T", "runs", "mean_prob_loss", "max_prob_loss", "mean_indicator_loss", "mean_agnostic_regret",
              "stderr_agnostic_regret", "exceedance_rate", "regret_ratio_to_previous"]
    if not rows:
        text = csv_text("report", header, []) + "# empty-report\n"
        return Result(text, {"report.csv": text})
    by_T: dict[int, list[dict]] = {}
    for r in rows:
        by_T.setdefault(int(r["T"]), []).append(r)
    out, prev = [], None
    for T in sorted(by_T):
        grp = by_T[T]
        pl = np.array([float(r["prob_loss"]) for r in grp])
        il = np.array([float(r["indicator_loss"]) for r in grp])
        rg = np.array([float(r["agnostic_regret"]) for r in grp])
        ex = np.array([float(r["exceeds"]) for r in grp])
        se = float(rg.std(ddof=1) / math.sqrt(len(rg))) if len(rg) > 1 else 0.0
        mean_rg = float(rg.mean())
        ratio = "" if prev is None or prev == 0 else mean_rg / prev
        out.append([T, len(grp), float(pl.mean()), float(pl.max()), float(il.mean()), mean_rg, se,
                     float(ex.mean()), ratio])
        prev = mean_rg
    text = csv_text("report", header, out)
    return Result(text, {"report.csv": text})


# plumbing -------------------------------------------------------------------------


def emit(result: Result, out_dir: str | None, config_echo: dict, seed: int | None) -> None:
    """Print stdout text and, with ``out_dir``, write files plus a manifest in one step."""
    if out_dir is not None:
        target = Path(out_dir)
        target.mkdir(parents=True, exist_ok=True)
        manifest = {
            "config": config_echo,
            "version": __version__,
            "seed": seed,
            "outputs": {name: hashlib.sha256(text.encode()).hexdigest() for name, text in sorted(result.files.items())},
        }
        staging = Path(tempfile.mkdtemp(dir=target, prefix=".staging-"))
        try:
            for name, text in result.files.items():
                (staging / name).write_text(text)
            (staging / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
            for f in staging.iterdir():
                f.replace(target / f.name)
        finally:
            shutil.rmtree(staging, ignore_errors=True)
    sys.stdout.write(result.stdout)


def _load_class(path) -> HypothesisClass:
    return parse_class(read_text(path))


def _load_dist(path) -> Distribution | None:
    return None if path is None else parse_distribution(read_text(path))


def dispatch(kind: str, cfg: dict) -> tuple[Result, int | None]:
    """Run one scenario described by a flat dict (CLI arguments or a config file)."""

    def need(key):
        if key not in cfg or cfg[key] is None:
            raise ConfigError(f"missing required field {key!r}")
        return cfg[key]

    def num(key, typ, default=None, required=False):
        if key not in cfg or cfg[key] is None:
            if required:
                raise ConfigError(f"missing required field {key!r}")
            return default
        try:
            return typ(cfg[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field {key!r} must be {typ.__name__}, got {cfg[key]!r}") from exc

    if kind == "dims":
        return cmd_dims_compute(_load_class(need("class")), need("dim")), None
    if kind == "verify":
        return cmd_dims_verify(_load_class(need("class")), read_text(need("cert")), need("dim")), None
    if kind == "chain":
        return cmd_chain(_load_class(need("class"))), None
    if kind == "circuit":
        seed = num("seed", int, required=True)
        return cmd_circuit_test(num("n", int, required=True), num("k", int, required=True),
                                bool(cfg.get("exhaustive", False)), seed), seed
    if kind == "sample":
        seed = num("seed", int, required=True)
        return cmd_sample(_load_dist(need("dist")), _single_target(read_text(need("target"))),
                          num("shots", int, required=True), seed), seed
    if kind == "batch":
        seed = num("seed", int, required=True)
        mode = need("mode")
        if mode not in ("pac", "agnostic"):
            raise ConfigError(f"batch mode must be 'pac' or 'agnostic', got {mode!r}")
        return cmd_batch(mode, _load_class(need("class")), _load_dist(need("dist")), num("target", int),
                         num("eps", float, required=True), num("delta", float, required=True), num("m", int),
                         num("trials", int, required=True), seed), seed
    if kind in ("online", "sweep"):
        seed = num("seed", int, required=True)
        model = need("model")
        if model not in ("input", "dist", "quantum"):
            raise ConfigError(f"unknown model {model!r}")
        learner, adversary = need("learner"), need("adversary")
        if learner not in ("soa", "mw"):
            raise ConfigError(f"unknown learner {learner!r}")
        H = _load_class(need("class"))
        D = _load_dist(cfg.get("dist"))
        realizable = not bool(cfg.get("agnostic", False))
        if kind == "online":
            seq = _parse_sequence(read_text(cfg["sequence"])) if cfg.get("sequence") else None
            return cmd_online_run(model, H, learner, adversary, num("T", int, required=True), seed,
                                  num("trials", int, 1), D, num("target", int), seq, realizable), seed
        grid = cfg.get("T_grid")
        if isinstance(grid, str):
            grid = [int(v) for v in grid.split(",") if v]
        if not grid:
            raise ConfigError("missing required field 'T_grid'")
        return cmd_online_sweep(model, H, learner, adversary, [int(v) for v in grid], seed,
                                num("trials", int, required=True), D, num("target", int), realizable), seed
    if kind == "report":
        files = cfg.get("inputs") or []
        return cmd_report(files), None
    raise ConfigError(f"unknown scenario kind {kind!r}")


def run_config(path) -> int:
    """Execute a JSON experiment config; returns the process exit status."""
    try:
        try:
            cfg = json.loads(read_text(path))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path}: top level must be an object")
        kind = cfg.get("kind")
        if kind is None:
            raise ConfigError("missing required field 'kind'")
        base = Path(path).parent
        for key in ("class", "dist", "target", "cert", "sequence"):
            if isinstance(cfg.get(key), str):
                cfg[key] = str(base / cfg[key])
        if isinstance(cfg.get("inputs"), list):
            cfg["inputs"] = [str(base / p) for p in cfg["inputs"]]
        result, seed = dispatch(kind, cfg)
        out = cfg.get("output")
        emit(result, None if out is None else str(base / out), cfg, seed)
        return EXIT_OK
    except LabError as exc:
        return _report_error(exc)


def _report_error(exc: Exception) -> int:
    print(f"error: {exc}", file=sys.stderr)
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, InvariantError):
        return EXIT_INVARIANT
    if isinstance(exc, PreconditionError):
        return EXIT_PRECONDITION
    return EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlearnlab", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def out(sp):
        sp.add_argument("--out", help="directory for CSV outputs and manifest.json")

    dims = sub.add_parser("dims", help="combinatorial dimensions").add_subparsers(dest="action", required=True)
    c = dims.add_parser("compute")
    c.add_argument("--class", dest="class_", required=True)
    c.add_argument("--dim", required=True, choices=sorted(DIMENSIONS))
    c.add_argument("--cert", help="certificate path (default: CLASS.DIM.cert)")
    v = dims.add_parser("verify")
    v.add_argument("--class", dest="class_", required=True)
    v.add_argument("--cert", required=True)
    v.add_argument("--dim", required=True, choices=sorted(VERIFIERS))

    lc = sub.add_parser("lossclass", help="loss classes and the dimension chain").add_subparsers(dest="action", required=True)
    ch = lc.add_parser("chain")
    ch.add_argument("--class", dest="class_", required=True)
    out(ch)

    q = sub.add_parser("quantum", help="state-vector circuits and sampling").add_subparsers(dest="action", required=True)
    ct = q.add_parser("circuit-test")
    ct.add_argument("--n", type=int, required=True)
    ct.add_argument("--k", type=int, required=True)
    ct.add_argument("--exhaustive", action="store_true")
    ct.add_argument("--seed", type=int, default=0)
    out(ct)
    sm = q.add_parser("sample")
    sm.add_argument("--dist", required=True)
    sm.add_argument("--target", required=True)
    sm.add_argument("--shots", type=int, required=True)
    sm.add_argument("--seed", type=int, required=True)
    out(sm)

    b = sub.add_parser("batch", help="PAC and agnostic experiments").add_subparsers(dest="action", required=True)
    for mode in ("pac", "agnostic"):
        bp = b.add_parser(mode)
        bp.add_argument("--class", dest="class_", required=True)
        bp.add_argument("--dist", required=True)
        bp.add_argument("--target", type=int, help="row of the target in the class file (pac)")
        bp.add_argument("--eps", type=float, required=True)
        bp.add_argument("--delta", type=float, required=True)
        bp.add_argument("--m", type=int, help="sample size (default: calibrated upper-bound formula)")
        bp.add_argument("--trials", type=int, required=True)
        bp.add_argument("--seed", type=int, required=True)
        out(bp)

    o = sub.add_parser("online", help="online learning protocol runs").add_subparsers(dest="action", required=True)
    for action in ("run", "sweep"):
        op = o.add_parser(action)
        op.add_argument("--model", required=True, choices=["input", "dist", "quantum"])
        op.add_argument("--class", dest="class_", required=True)
        op.add_argument("--learner", required=True, choices=["soa", "mw"])
        op.add_argument("--adversary", required=True, choices=["point", "tree", "stochastic"])
        op.add_argument("--seed", type=int, required=True)
        op.add_argument("--trials", type=int, default=1)
        op.add_argument("--dist", help="marginal (realizable) or joint (with --agnostic) distribution")
        op.add_argument("--target", type=int, help="row of the target hypothesis")
        op.add_argument("--agnostic", action="store_true")
        if action == "run":
            op.add_argument("--T", type=int, required=True)
            op.add_argument("--sequence", help="file of 'x y' lines for the point adversary")
        else:
            op.add_argument("--T-grid", dest="T_grid", required=True, help="comma separated horizons")
        out(op)

    r = sub.add_parser("report", help="aggregate online summary CSVs")
    r.add_argument("inputs", nargs="*")
    out(r)

    rc = sub.add_parser("run", help="execute a JSON experiment config")
    rc.add_argument("config")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = {k.rstrip("_"): v for k, v in vars(args).items()}
    try:
        if args.command == "run":
            return run_config(args.config)
        if args.command == "dims" and args.action == "compute":
            result, seed = dispatch("dims", cfg)
            cert = result.files.pop(f"{args.dim}.cert", None)
            sys.stdout.write(result.stdout)
            if cert is not None:
                from .io import write_atomic
                write_atomic(args.cert or f"{args.class_}.{args.dim}.cert", cert)
            return EXIT_OK
        kind = {
            ("dims", "verify"): "verify",
            ("lossclass", "chain"): "chain",
            ("quantum", "circuit-test"): "circuit",
            ("quantum", "sample"): "sample",
            ("batch", "pac"): "batch",
            ("batch", "agnostic"): "batch",
            ("online", "run"): "online",
            ("online", "sweep"): "sweep",
        }.get((args.command, getattr(args, "action", None)), args.command)
        if args.command == "batch":
            cfg["mode"] = args.action
        result, seed = dispatch(kind, cfg)
        emit(result, cfg.get("out"), {k: v for k, v in cfg.items() if k != "out"}, seed)
        return EXIT_OK
    except LabError as exc:
        return _report_error(exc)


if __name__ == "__main__":
    sys.exit(main())
