"""Command line entry point: ``orlizono <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import body as bd
from . import harness as hz
from . import multisets as ms
from . import report as rp
from . import shadow as sh
from .norm import orlicz_norm
from .phi import PhiError, make_phi
from .zonotope import OrliczZonotope, l1_volume

SINGLE = ("norm", "support", "volume", "body", "product", "ratio", "orthogonalize")


def _floats(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",")])


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orlizono", description="Asymmetric Orlicz zonotopes and volume inequalities")
    p.add_argument("command", choices=SINGLE + hz.COMMANDS + ("report",))
    p.add_argument("--instance", action="append", default=[], help="JSON instance file (repeatable)")
    p.add_argument("--random", help="n,m,count,seed; m may be a range like 3-5")
    p.add_argument("--phi", help="id | power:P | mix:W:P,... | pwl:T:Y,... | JSON")
    p.add_argument("--budget", type=int, default=1024)
    p.add_argument("--grid", type=int, default=9)
    p.add_argument("--out", type=Path)
    p.add_argument("--values", help="comma-separated nonnegative entries (norm)")
    p.add_argument("--direction", help="comma-separated direction (support)")
    p.add_argument("--op", choices=("volume", "polar-volume", "santalo"), default="volume")
    p.add_argument("--pivot", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    return p


def _load(path) -> tuple[ms.VectorMultiset, dict]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return ms.from_instance(data), data


def _phi(args, data: dict | None = None):
    if args.phi is not None:
        return make_phi(args.phi)
    if data is not None and "phi" in data:
        return make_phi(data["phi"])
    return make_phi("power:2")


def _emit(text: str, args, name: str) -> None:
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / name).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _single(args) -> int:
    if args.command == "norm":
        if args.values is None:
            raise SystemExit("norm needs --values")
        print(f"{orlicz_norm(_floats(args.values), _phi(args)):.12g}")
        return 0
    if not args.instance:
        raise SystemExit(f"{args.command} needs --instance")
    m, data = _load(args.instance[0])
    phi = _phi(args, data)
    if args.command == "support":
        if args.direction is None:
            raise SystemExit("support needs --direction")
        z = OrliczZonotope(m, phi)
        u = _floats(args.direction)
        x = z.support_point(u) if z.support(u) > 0 else np.zeros(m.dimension)
        header = ["h"] + [f"x{i}" for i in range(m.dimension)]
        _emit(rp.csv_text(header, [[z.support(u), *x]]), args, "support.csv")
        return 0
    if args.command == "volume":
        if phi.is_identity:
            v = l1_volume(m)
            vb = bd.VolumeBounds.from_pair(v, v)
        else:
            vb = hz.body_volume(m, phi, args.budget)
        _emit(rp.csv_text(bd.VolumeBounds._fields, [vb]), args, "volume.csv")
        return 0
    if args.command == "body":
        z = OrliczZonotope(m, phi)
        n = m.dimension
        if args.op == "volume":
            vb, point = bd.volume_bounds(bd.build_sandwich(z.oracle(), args.budget)), []
        else:
            res = bd.santalo_point(z.oracle(), args.budget)
            vb, point = res.polar_volume, list(res.point)
        header = list(bd.VolumeBounds._fields) + ([f"s{i}" for i in range(n)] if point else [])
        _emit(rp.csv_text(header, [[*vb, *point]]), args, f"body_{args.op}.csv")
        return 0
    if args.command in ("product", "ratio"):
        f = hz.volume_product if args.command == "product" else hz.volume_ratio
        _emit(rp.csv_text(bd.VolumeBounds._fields, [f(m, phi, args.budget)]), args, f"{args.command}.csv")
        return 0
    # orthogonalize
    s = sh.orthogonalize(m, args.pivot)
    n = m.dimension
    rows = []
    for t in s.grid(args.grid):
        W = s.vectors_at(t)
        for i, w in enumerate(W):
            rows.append([t, i, *w, l1_volume(s.at(t))])
    header = ["t", "index"] + [f"w{j}" for j in range(n)] + ["l1_volume"]
    _emit(rp.csv_text(header, rows), args, "orthogonalize.csv")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command in SINGLE:
            return _single(args)
        commands = hz.COMMANDS if args.command == "report" else (args.command,)
        phi = _phi(args)
        rnd = hz.RandomSpec.parse(args.random) if args.random else None
        dim = rnd.n if rnd else (ms.load_instance(args.instance[0]).dimension if args.instance else 2)
        cfg = hz.ExperimentConfig(dimension=dim, phi=phi, budget=args.budget, grid=args.grid, random=rnd,
                                  instance_paths=tuple(args.instance), threads=args.threads, out=args.out,
                                  seed=args.seed)
        bundle = hz.run(cfg, commands)
    except (hz.ConfigError, PhiError, ms.MultisetError, OSError) as exc:
        print(f"orlizono: error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(bundle.csv())
    return bundle.exit_code


if __name__ == "__main__":
    sys.exit(main())
