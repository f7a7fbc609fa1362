"""Command-line pipeline: plan, baseline, eval, sweep, trigger, poison, synth, verify.

Reports go to stdout as stable ``key=value`` lines; the sweep writes a
CSV. All randomness flows from explicit --seed flags. Exit codes:
0 success, 2 validation or format problem, 3 infeasible or guarded
computation, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import enum
import json
import sys

import numpy as np

from . import assignment, dataio, features, grouping, mapping, poison, synth, triggers
from .errors import FormatError, GuardError, InfeasibleError, ValidationError


class ExitStatus(enum.IntEnum):
    OK = 0
    INVALID = 2
    INFEASIBLE = 3
    IO = 4


def _report(args, **values) -> None:
    if getattr(args, "quiet", False):
        return
    for key, value in values.items():
        print(f"{key}={value}")


def _load_trigger(path: str) -> triggers.TriggerSpec:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"trigger file is not valid JSON: {exc}") from exc
    return triggers.trigger_from_json(doc)


def _distances_for(embeddings_path: str, norm_name: str) -> features.DistanceMatrix:
    e = dataio.read_embeddings(embeddings_path)
    p = features.position_vectors(e)
    return features.distance_matrix(p, features.Norm.parse(norm_name))


def cmd_plan(args) -> int:
    e = dataio.read_embeddings(args.embeddings)
    p = features.position_vectors(e)
    d = features.distance_matrix(p, features.Norm.parse(args.norm))
    cfg = grouping.KMeansConfig(
        num_groups=args.x,
        seed=args.seed,
        max_iters=args.max_iters,
        tol=args.tol,
        restarts=args.restarts,
    )
    g = grouping.kmeans(p, cfg)
    gd = assignment.group_distances(g, d)
    a = assignment.hungarian_max(
        gd, assignment.AssignConfig(forbid_self_target=args.forbid_self_target)
    )
    m = mapping.build_mapping(g, a)
    dataio.write_mapping(m, args.out)
    score = mapping.score_mapping(m, d)
    values = {"objective": score.objective}
    if score.silhouette_mean is not None:
        values["silhouette_mean"] = score.silhouette_mean
    values["self_target_count"] = score.self_target_count
    _report(args, **values)
    return ExitStatus.OK


def cmd_baseline(args) -> int:
    if args.mode == "cyclic":
        if args.x is not None and args.x != args.k:
            raise ValidationError("cyclic baseline requires x = k (or omit --x)")
        m = mapping.cyclic_mapping(args.k)
    else:
        if args.x is None:
            raise ValidationError("random baseline requires --x")
        if args.seed is None:
            raise ValidationError("random baseline requires --seed")
        m = mapping.random_mapping(args.k, args.x, args.seed)
    dataio.write_mapping(m, args.out)
    _report(args, num_classes=m.num_classes, x=m.x)
    return ExitStatus.OK


def cmd_eval(args) -> int:
    m = dataio.read_mapping(args.mapping)
    d = _distances_for(args.embeddings, args.norm)
    if m.num_classes != d.num_classes:
        raise ValidationError(
            f"mapping has {m.num_classes} classes, embeddings have {d.num_classes}"
        )
    score = mapping.score_mapping(m, d)
    values = {"objective": score.objective}
    if score.silhouette_mean is not None:
        values["silhouette_mean"] = score.silhouette_mean
    values["self_target_count"] = score.self_target_count
    _report(args, **values)
    return ExitStatus.OK


def cmd_sweep(args) -> int:
    d = _distances_for(args.embeddings, args.norm)
    k = d.num_classes if args.k is None else args.k
    if k != d.num_classes:
        raise ValidationError(f"--k {k} does not match embeddings ({d.num_classes} classes)")
    rows = mapping.sweep_random(k, args.x, args.n, args.seed, d)
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        mapping.write_sweep_csv(rows, f)
    _report(args, rows=len(rows), out=args.out)
    return ExitStatus.OK


def cmd_trigger(args) -> int:
    ds = dataio.read_dataset(args.dataset)
    spec = _load_trigger(args.trigger)
    out = poison.trigger_all(ds, spec)
    dataio.write_dataset(out, args.out)
    _report(args, n=out.n, out=args.out)
    return ExitStatus.OK


def cmd_poison(args) -> int:
    ds = dataio.read_dataset(args.dataset)
    m = dataio.read_mapping(args.mapping)
    spec = _load_trigger(args.trigger)
    plan = poison.PoisonPlan(rate=args.rate, seed=args.seed, mapping=m, trigger=spec)
    out, manifest = poison.poison_dataset(ds, plan)
    dataio.write_dataset(out, args.out)
    with open(args.manifest_out, "w", encoding="utf-8") as f:
        f.write(manifest.to_json())
    _report(args, n=out.n, poisoned=manifest.count, out=args.out, manifest=args.manifest_out)
    return ExitStatus.OK


def cmd_synth(args) -> int:
    e, groups = synth.planted_embeddings(
        num_classes=args.k,
        planted_groups=args.x_planted,
        dim=args.dim,
        per_class=args.per_class,
        spread=args.spread,
        separation=args.separation,
        seed=args.seed,
    )
    dataio.write_embeddings(e, args.out)
    sidecar = {
        "k": args.k,
        "x_planted": args.x_planted,
        "dim": args.dim,
        "per_class": args.per_class,
        "spread": args.spread,
        "separation": args.separation,
        "seed": args.seed,
        "groups": groups,
    }
    with open(args.out + ".meta.json", "w", encoding="utf-8") as f:
        json.dump(sidecar, f, indent=2)
        f.write("\n")
    _report(args, n=e.n, out=args.out, meta=args.out + ".meta.json")
    return ExitStatus.OK


def cmd_verify(args) -> int:
    if args.max_k > 8 and not args.force:
        raise GuardError(
            f"max-k {args.max_k} exceeds the default guard of 8; pass --force to override"
        )
    mismatches = []
    for t in range(args.trials):
        rng = np.random.default_rng(mapping.derive_seed(args.seed, t))
        k = int(rng.integers(2, args.max_k + 1))
        x = int(rng.integers(1, k + 1))
        if t % 2 == 0:
            entries = rng.integers(0, 101, size=(x, k)).astype(np.float64)
        else:
            entries = rng.uniform(0.0, 100.0, size=(x, k))
        d = assignment.GroupDistanceMatrix(x=x, num_classes=k, entries=entries)
        fast = assignment.hungarian_max(d)
        slow = assignment.brute_force_assign(d)
        obj_fast = assignment.assignment_objective(entries, fast.targets)
        obj_slow = assignment.assignment_objective(entries, slow.targets)
        if fast.targets != slow.targets or abs(obj_fast - obj_slow) > 1e-9:
            mismatches.append((t, k, x, fast.targets, slow.targets, obj_fast, obj_slow))
    _report(args, trials=args.trials, mismatches=len(mismatches))
    if mismatches:
        for t, k, x, ft, st, fo, so in mismatches[:10]:
            print(
                f"mismatch trial={t} k={k} x={x} hungarian={ft} ({fo}) brute={st} ({so})",
                file=sys.stderr,
            )
        return ExitStatus.INFEASIBLE
    return ExitStatus.OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="a2x",
        description="Select optimal class mappings for multi-target backdoor "
        "poisoning and build the poisoned datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress key=value reports")

    p = sub.add_parser("plan", parents=[common], help="optimize a mapping from embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--x", type=int, required=True, help="number of target classes")
    p.add_argument("--norm", choices=["l1", "l2", "linf"], default="l2")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--forbid-self-target", action="store_true")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("baseline", parents=[common], help="cyclic or random baseline mapping")
    p.add_argument("mode", choices=["cyclic", "random"])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--x", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", parents=[common], help="score a mapping against embeddings")
    p.add_argument("--mapping", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--norm", choices=["l1", "l2", "linf"], default="l2")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[common], help="score n random mappings into a CSV")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--norm", choices=["l1", "l2", "linf"], default="l2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trigger", parents=[common], help="apply a trigger to every sample")
    p.add_argument("--dataset", required=True)
    p.add_argument("--trigger", required=True, help="trigger spec JSON file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trigger)

    p = sub.add_parser("poison", parents=[common], help="poison a dataset under a mapping")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mapping", required=True)
    p.add_argument("--trigger", required=True, help="trigger spec JSON file")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest-out", required=True)
    p.set_defaults(func=cmd_poison)

    p = sub.add_parser("synth", parents=[common], help="generate planted synthetic embeddings")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--x-planted", type=int, required=True)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--separation", type=float, default=20.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", parents=[common], help="cross-check the assignment solvers")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-k", type=int, default=8)
    p.add_argument("--force", action="store_true", help="allow max-k above the guard")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad usage, 0 on --help
        return int(exc.code or 0)
    try:
        return int(args.func(args))
    except (ValidationError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.INVALID
    except (InfeasibleError, GuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
