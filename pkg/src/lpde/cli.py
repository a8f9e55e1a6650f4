"""Operator commands: generate, augment, verify, pretrain, probe, timestep,
inspect.

Progress goes to stderr; machine-readable results go to files (or stdout for
``inspect``).  Exit codes: 0 success, 2 configuration error, 3 numeric
failure, 4 verification failure.  (flags, seed) fully determine every output
byte; LPDE_THREADS caps worker threads when set before startup.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _prepare_outdir(path, force: bool):
    from .errors import ConfigError

    os.makedirs(path, exist_ok=True)
    if os.listdir(path) and not force:
        raise ConfigError(f"output directory {path} is not empty (use --force)")


def _resolved(args) -> dict:
    from . import __version__

    d = {k: v for k, v in vars(args).items() if k != "func"}
    d["build"] = __version__
    return d


# --------------------------------------------------------------------------
# generate

_GEN_PROFILES = {
    # length, horizon, nx, nt, ic kwargs, nu range (None = no viscosity)
    "burgers": dict(
        length=16.0, horizon=10.0, nx=224, nt=448,
        ic=dict(amplitude_scale=0.03, frequency_scale=10.0, frequency_offset=2.0,
                integer_frequencies=True),
        nu_range=(0.002, 0.007),
    ),
    "kdv": dict(length=64.0, horizon=40.0, nx=128, nt=256, ic={}, nu_range=None),
    "ks": dict(length=64.0, horizon=40.0, nx=128, nt=256, ic={}, nu_range=None),
    "ns2d": dict(length=None, horizon=2.0, nx=64, nt=16, ic={}, nu_range=(0.005, 0.05)),
}
_MAX_ATTEMPTS = 10


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def _generate_one(equation, args, rng):
    import numpy as np

    from .fields import EquationSpec, InitialConditionParams
    from .grid import Grid1D, Grid2D
    from .residuals import ns_residual_report, residual_report
    from .solvers import (
        sample_initial_condition,
        solve_burgers,
        solve_kdv,
        solve_ks,
        taylor_green_field,
    )

    if equation == "ns2d":
        nu = float(rng.uniform(*args.nu_range))
        field = taylor_green_field(nu, Grid2D(args.nx, args.nx), args.nt, args.horizon)
        res = ns_residual_report(field).relative_norm
        return field, res
    ic = InitialConditionParams.sample(
        rng,
        n_modes=args.ic_modes,
        amplitude_scale=args.ic_amplitude,
        frequency_scale=args.ic_freq_scale,
        frequency_offset=args.ic_freq_offset,
        integer_frequencies=args.ic_integer_freqs,
    )
    nx = args.nx
    pow2 = _next_pow2(nx)
    length = args.length
    if pow2 != nx:
        # Power-of-two transform requirement: extend the domain, solve, then
        # truncate the stored columns back (recorded in metadata).
        length = args.length * pow2 / nx
    grid = Grid1D(pow2, length)
    u0 = sample_initial_condition(ic, grid)
    if equation == "burgers":
        nu = float(rng.uniform(*args.nu_range))
        spec = EquationSpec("burgers", length, args.horizon, nu)
        field = solve_burgers(u0, spec, args.nt, params=ic)
    else:
        spec = EquationSpec(equation, length, args.horizon, None)
        solve = solve_kdv if equation == "kdv" else solve_ks
        field = solve(u0, spec, args.nt, params=ic)
    res = residual_report(field).relative_norm
    if pow2 != nx:
        meta = dict(field.meta)
        meta.update(
            {"padded_nx": pow2, "generation_length": length, "length": args.length,
             "x_periodic": False}
        )
        field = field.replace(
            values=field.values[:, :, :nx], x_coords=field.x_coords[:nx], meta=meta
        )
    return field, res


def cmd_generate(args) -> int:
    import numpy as np

    from .dataio import write_dataset

    _prepare_outdir(args.out, args.force)
    profile = _GEN_PROFILES[args.equation]
    for name, key in (("length", "length"), ("horizon", "horizon"), ("nx", "nx"), ("nt", "nt")):
        if getattr(args, name) is None:
            setattr(args, name, profile[key])
    for name, default in (
        ("ic_amplitude", profile["ic"].get("amplitude_scale", 1.0)),
        ("ic_freq_scale", profile["ic"].get("frequency_scale", 1.0)),
        ("ic_freq_offset", profile["ic"].get("frequency_offset", 0.0)),
    ):
        if getattr(args, name) is None:
            setattr(args, name, default)
    if args.ic_integer_freqs is None:
        args.ic_integer_freqs = profile["ic"].get("integer_frequencies", False)
    if args.nu_range is None:
        args.nu_range = profile["nu_range"] or (0.0, 0.0)
    if args.viscosity is not None:
        args.nu_range = (args.viscosity, args.viscosity)

    samples, rows, failures = [], [], []
    for i in range(args.n):
        field = None
        for attempt in range(_MAX_ATTEMPTS):
            rng = np.random.default_rng((args.seed, i, attempt))
            try:
                field, res = _generate_one(args.equation, args, rng)
                break
            except Exception as exc:  # noqa: BLE001 - logged and retried
                from .errors import LpdeError

                if not isinstance(exc, LpdeError):
                    raise
                _log(f"sample {i} attempt {attempt} (seed ({args.seed},{i},{attempt})): "
                     f"{type(exc).__name__}: {exc}")
                failures.append({"sample": i, "attempt": attempt, "error": str(exc)})
        if field is None:
            _log(f"sample {i}: giving up after {_MAX_ATTEMPTS} attempts")
            continue
        field.meta["provenance"] = {"seed": args.seed, "sample": i}
        samples.append(field)
        rows.append({"sample": i, "residual": res,
                     "viscosity": field.meta.get("viscosity")})
    dataset_path = os.path.join(args.out, "dataset.lpde")
    write_dataset(samples, dataset_path)
    residuals = [r["residual"] for r in rows]
    import numpy as _np

    report = {
        "config": _resolved(args),
        "samples": rows,
        "failures": failures,
        "summary": {
            "count": len(samples),
            "residual_median": float(_np.median(residuals)) if residuals else None,
            "residual_max": float(_np.max(residuals)) if residuals else None,
        },
    }
    _write_json(os.path.join(args.out, "report.json"), report)
    _log(f"wrote {len(samples)} samples to {dataset_path}")
    return 0


# --------------------------------------------------------------------------
# augment / verify

def _load_dataset_and_policy(args):
    from .dataio import read_dataset
    from .errors import ConfigError
    from .symmetry import load_policy

    container = read_dataset(args.dataset)
    policy = load_policy(args.policy)
    if container.equation != policy.equation:
        raise ConfigError(
            f"dataset equation {container.equation!r} != policy equation "
            f"{policy.equation!r}"
        )
    return container, policy


def cmd_augment(args) -> int:
    import numpy as np

    from .dataio import write_dataset
    from .symmetry import make_view

    _prepare_outdir(args.out, args.force)
    container, policy = _load_dataset_and_policy(args)
    augmented = []
    for i, field in enumerate(container.fields):
        rng = np.random.default_rng((args.seed, i))
        view = make_view(field, policy, rng)
        augmented.append(view.field)
    out_path = os.path.join(args.out, "augmented.lpde")
    write_dataset(augmented, out_path)
    _write_json(os.path.join(args.out, "report.json"), {"config": _resolved(args),
                                                        "count": len(augmented)})
    _log(f"wrote {len(augmented)} augmented samples to {out_path}")
    return 0


def cmd_verify(args) -> int:
    import numpy as np

    from .residuals import ns_residual_report, residual_report
    from .symmetry import apply_closed_form, generator

    _prepare_outdir(args.out, args.force)
    container, policy = _load_dataset_and_policy(args)
    fields = container.fields
    if not fields:
        from .errors import ConfigError

        raise ConfigError("verification needs a nonempty dataset")

    def rel_residual(f):
        if f.equation == "ns2d":
            return ns_residual_report(f, form="curl").relative_norm
        return residual_report(f).relative_norm

    src = [rel_residual(f) for f in fields]
    gen_reports = []
    worst_rate = 0.0
    for gi, gen_id in enumerate(sorted(policy.strengths)):
        lo, hi = policy.strengths[gen_id]
        gen = generator(policy.equation, gen_id)
        trials = []
        failures = 0
        for t in range(args.trials):
            f = fields[t % len(fields)]
            rng = np.random.default_rng((args.seed, gi, t))
            eps = float(rng.uniform(lo, hi)) if hi > lo else lo
            threshold = max(10.0 * src[t % len(fields)], 1e-3)
            try:
                out = apply_closed_form(gen, eps, f)
                res = rel_residual(out)
                ok = res <= threshold
            except Exception as exc:  # noqa: BLE001 - verification verdict
                from .errors import LpdeError

                if not isinstance(exc, LpdeError):
                    raise
                res, ok = None, False
                _log(f"{gen.qualified_id} trial {t}: {type(exc).__name__}: {exc}")
            failures += 0 if ok else 1
            trials.append({"trial": t, "eps": eps, "pre": src[t % len(fields)],
                           "post": res, "threshold": threshold, "pass": ok})
        rate = failures / max(1, args.trials)
        worst_rate = max(worst_rate, rate)
        gen_reports.append({"generator": gen.qualified_id, "range": [lo, hi],
                            "failure_rate": rate, "trials": trials})
        _log(f"{gen.qualified_id}: failure rate {rate:.1%}")
    report = {"config": _resolved(args), "generators": gen_reports,
              "worst_failure_rate": worst_rate}
    _write_json(os.path.join(args.out, "report.json"), report)
    if worst_rate > 0.05:
        _log(f"verification FAILED: worst failure rate {worst_rate:.1%} > 5%")
        return 4
    _log("verification passed")
    return 0


# --------------------------------------------------------------------------
# pretrain / probe / timestep

def cmd_pretrain(args) -> int:
    from .dataio import export_csv
    from .ssl import pretrain, save_checkpoint

    _prepare_outdir(args.out, args.force)
    container, policy = _load_dataset_and_policy(args)
    result = pretrain(
        container.fields,
        policy,
        epochs=args.epochs,
        seed=args.seed,
        batch_size=args.batch_size,
        lr=args.lr,
        weight_decay=args.weight_decay,
    )
    ckpt = os.path.join(args.out, "checkpoint.lpckpt")
    save_checkpoint(ckpt, result, extra={"cli": _resolved(args)})
    if result.loss_trace:
        export_csv(
            [{"epoch": i, "loss": v} for i, v in enumerate(result.loss_trace)],
            os.path.join(args.out, "loss_trace.csv"),
        )
    _write_json(os.path.join(args.out, "run.json"),
                {"config": _resolved(args), "loss_trace": result.loss_trace})
    _log(f"wrote checkpoint to {ckpt}")
    return 0


def _encoder_for_probe(args, fields):
    from .errors import ConfigError

    if args.checkpoint and args.random_encoder:
        raise ConfigError("pass either --checkpoint or --random-encoder, not both")
    if args.checkpoint:
        from .ssl import load_checkpoint

        result = load_checkpoint(args.checkpoint)
        return result.encoder, result.normalization, "pretrained"
    if args.random_encoder:
        import numpy as np

        from .ssl.nets import Encoder, EncoderConfig
        from .ssl.train import Normalization

        is_2d = fields[0].y_coords is not None
        encoder = Encoder(
            EncoderConfig(in_channels=4 if is_2d else 3),
            np.random.default_rng((args.seed, 0)),
        )
        return encoder, Normalization.fit(fields), "random"
    raise ConfigError("probe needs --checkpoint or the explicit --random-encoder flag")


def cmd_probe(args) -> int:
    from .dataio import export_csv, read_dataset
    from .evaluation import probe_fields, probe_task

    _prepare_outdir(args.out, args.force)
    container = read_dataset(args.dataset)
    fields = container.fields
    encoder, norm, encoder_kind = _encoder_for_probe(args, fields)
    task = probe_task(args.task)
    skip = args.skip_initial_fraction
    if skip is None:
        skip = 0.5 if args.task == "init_coeffs" else 0.0
    result = probe_fields(
        fields, encoder, norm, task,
        mode=args.mode, skip_initial_fraction=skip,
        train_fraction=args.train_fraction, seed=args.seed,
    )
    record = {
        "task": args.task, "mode": args.mode, "encoder": encoder_kind,
        "seed": args.seed, "n_samples": len(fields),
        **result.metrics.to_dict(),
    }
    _write_json(os.path.join(args.out, "metrics.json"),
                {"config": _resolved(args), "record": record})
    export_csv([record], os.path.join(args.out, "metrics.csv"))
    _log(f"probe[{encoder_kind}] {args.task}: RE={result.metrics.relative_error:.4f} "
         f"NMSE={result.metrics.nmse:.4f}")
    return 0


def cmd_timestep(args) -> int:
    from .dataio import export_csv, read_dataset
    from .errors import ConfigError
    from .evaluation import TimestepConfig, timestep_experiment

    _prepare_outdir(args.out, args.force)
    container = read_dataset(args.dataset)
    pre = None
    if args.condition:
        if not args.checkpoint:
            raise ConfigError("--condition requires --checkpoint")
        from .ssl import load_checkpoint

        pre = load_checkpoint(args.checkpoint)
    cfg = TimestepConfig(
        t_history=args.t_history, t_future=args.t_future,
        condition_dim=args.condition_dim, epochs=args.epochs, lr=args.lr,
        batch_size=args.batch_size,
    )
    results = timestep_experiment(container.fields, pre, cfg, seed=args.seed)
    records = [
        {"model": name, "seed": args.seed, **metrics.to_dict()}
        for name, metrics in sorted(results.items())
    ]
    _write_json(os.path.join(args.out, "metrics.json"),
                {"config": _resolved(args), "records": records})
    export_csv(records, os.path.join(args.out, "metrics.csv"))
    for rec in records:
        _log(f"timestep[{rec['model']}]: NMSE={rec['nmse']:.4f}")
    return 0


# --------------------------------------------------------------------------
# inspect

def cmd_inspect(args) -> int:
    with open(args.path, "rb") as fh:
        magic = fh.read(8)
    if magic.startswith(b"LPDEckpt"):
        from .ssl import load_checkpoint

        result = load_checkpoint(args.path)
        n_params = sum(t.value.size for _, t in result.encoder.parameters())
        n_params += sum(t.value.size for _, t in result.projector.parameters())
        print(json.dumps({"kind": "checkpoint", "parameters": int(n_params),
                          "config": result.config}, sort_keys=True, indent=1))
        return 0
    if magic.startswith(b"LPDE"):
        from .dataio import read_dataset

        container = read_dataset(args.path)
        print(json.dumps({
            "kind": "dataset",
            "equation": container.equation,
            "count": len(container),
            "shape": container.header.get("shape"),
        }, sort_keys=True, indent=1))
        return 0
    from .errors import DataFormatError

    raise DataFormatError(f"{args.path}: unrecognized file (magic {magic!r})")


# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lpde",
        description="PDE dataset generation, symmetry augmentation, "
                    "verification, and representation pretraining/evaluation.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a solution dataset")
    g.add_argument("--equation", required=True, choices=["burgers", "kdv", "ks", "ns2d"])
    g.add_argument("--n", type=int, required=True, help="number of samples")
    g.add_argument("--nx", type=int, default=None, help="spatial points (per axis)")
    g.add_argument("--nt", type=int, default=None, help="stored time frames")
    g.add_argument("--length", type=float, default=None, help="domain length")
    g.add_argument("--horizon", type=float, default=None, help="time horizon")
    g.add_argument("--viscosity", type=float, default=None, help="fixed viscosity")
    g.add_argument("--nu-range", type=float, nargs=2, default=None,
                   metavar=("LO", "HI"), help="uniform viscosity range")
    g.add_argument("--ic-modes", type=int, default=10)
    g.add_argument("--ic-amplitude", type=float, default=None)
    g.add_argument("--ic-freq-scale", type=float, default=None)
    g.add_argument("--ic-freq-offset", type=float, default=None)
    g.add_argument("--ic-integer-freqs", action="store_true", default=None)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("augment", help="apply a policy once to every sample")
    a.add_argument("--dataset", required=True)
    a.add_argument("--policy", required=True)
    a.add_argument("--seed", type=int, required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--force", action="store_true")
    a.set_defaults(func=cmd_augment)

    v = sub.add_parser("verify", help="residual-check augmentations")
    v.add_argument("--dataset", required=True)
    v.add_argument("--policy", required=True)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--out", required=True)
    v.add_argument("--force", action="store_true")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("pretrain", help="joint-embedding pretraining")
    t.add_argument("--dataset", required=True)
    t.add_argument("--policy", required=True)
    t.add_argument("--epochs", type=int, default=20)
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--lr", type=float, default=3e-4)
    t.add_argument("--weight-decay", type=float, default=0.01)
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--force", action="store_true")
    t.set_defaults(func=cmd_pretrain)

    r = sub.add_parser("probe", help="linear probe on frozen features")
    r.add_argument("--dataset", required=True)
    r.add_argument("--task", required=True, choices=["viscosity", "init_coeffs"])
    r.add_argument("--checkpoint", default=None)
    r.add_argument("--random-encoder", action="store_true",
                   help="explicit random-frozen-encoder baseline mode")
    r.add_argument("--mode", default="ridge_closed_form",
                   choices=["ridge_closed_form", "sgd_sigmoid"])
    r.add_argument("--train-fraction", type=float, default=0.5)
    r.add_argument("--skip-initial-fraction", type=float, default=None)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--force", action="store_true")
    r.set_defaults(func=cmd_probe)

    s = sub.add_parser("timestep", help="history-to-future stepping experiment")
    s.add_argument("--dataset", required=True)
    s.add_argument("--checkpoint", default=None)
    s.add_argument("--condition", action="store_true",
                   help="also train the representation-conditioned variant")
    s.add_argument("--t-history", type=int, default=20)
    s.add_argument("--t-future", type=int, default=20)
    s.add_argument("--condition-dim", type=int, default=2)
    s.add_argument("--epochs", type=int, default=20)
    s.add_argument("--lr", type=float, default=1e-4)
    s.add_argument("--batch-size", type=int, default=16)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--force", action="store_true")
    s.set_defaults(func=cmd_timestep)

    i = sub.add_parser("inspect", help="summarize a dataset or checkpoint")
    i.add_argument("path")
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    from .errors import (
        ArgumentError,
        AugmentationError,
        BlowUpError,
        CatalogError,
        ConfigError,
        CropError,
        DataFormatError,
        DivergenceError,
        GenerationError,
        GridSizeError,
        MetricError,
        NumericError,
        ShapeError,
    )

    config_errors = (ConfigError, DataFormatError, CatalogError, ArgumentError,
                     GridSizeError, ShapeError, FileNotFoundError)
    numeric_errors = (GenerationError, BlowUpError, DivergenceError, MetricError,
                      NumericError, AugmentationError, CropError)
    try:
        return int(args.func(args) or 0)
    except config_errors as exc:
        _log(f"config error: {exc}")
        return 2
    except numeric_errors as exc:
        _log(f"numeric failure: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
