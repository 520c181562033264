"""Command-line front end: train, test, list-envs, list-algs, report, cluster.

Exit codes: 0 success, 1 domain error (one line on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dist.runtime import COORDINATOR_ENV
from .envs.registry import build_env, list_envs
from .facade import (call_default_params, checkpoint_load, checkpoint_save, make_agent, override_params,
                     report_csv)
from .zoo.registry import get_algorithm, list_algorithms


class UsageError(Exception):
    pass


def parse_set(items) -> dict:
    """``["alg.gamma=0.9", "learn.batch_size=128"]`` -> overrides; values parse as JSON, else stay strings."""
    out = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise UsageError(f"--set expects key=value, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def parse_roles(text: str) -> dict:
    roles = {}
    for part in text.split(","):
        name, sep, n = part.partition("=")
        if not sep or not n.strip().isdigit():
            raise UsageError(f"--roles expects role=count[,role=count...], got {text!r}")
        roles[name.strip()] = int(n)
    return roles


def resolve_env_type(name: str, env_type: str | None) -> str:
    if env_type:
        return env_type
    types = [t for n, t in list_envs() if n == name]
    if len(types) != 1:
        # let build_env produce the message listing what exists
        return types[0] if types else "?"
    return types[0]


def _common(p: argparse.ArgumentParser, env_required: bool) -> None:
    p.add_argument("--env", required=env_required, help="environment name, e.g. Pendulum-v0")
    p.add_argument("--env-type", help="environment type (inferred when the name is unique)")
    p.add_argument("--alg", required=env_required, help="zoo algorithm, e.g. TD3")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter; prefix with alg. or learn. when ambiguous (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, help="number of episodes (learn.max_episodes)")
    p.add_argument("--metrics-dir", default="runs", help="directory for run JSONL files (default: runs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drlzoo", description="Deep reinforcement learning zoo")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (("train", "train an agent"), ("test", "evaluate an agent")):
        p = sub.add_parser(name, help=helptext)
        _common(p, env_required=True)
        p.add_argument("--checkpoint-in", help="load parameters before running")
        p.add_argument("--checkpoint-out", help="save parameters after running")

    sub.add_parser("list-envs", help="list built-in environments")
    sub.add_parser("list-algs", help="list zoo algorithms")

    p = sub.add_parser("report", help="CSV of per-episode metrics for one or more runs")
    p.add_argument("runs", nargs="+", help="run ids or JSONL paths")
    p.add_argument("--out", help="write the CSV here instead of stdout")
    p.add_argument("--metrics-dir", default="runs", help="where run ids are looked up (default: runs)")

    p = sub.add_parser("cluster", help="run DPPO on the role-based runtime")
    _common(p, env_required=False)
    p.add_argument("--roles", default="actor=1,learner=1", help="role counts, e.g. actor=2,learner=2")
    p.add_argument("--transport", choices=("inproc", "tcp"), default="inproc",
                   help="for a local launch (no --role/--serve)")
    p.add_argument("--coordinator", help=f"host:port of the coordinator (or set {COORDINATOR_ENV})")
    p.add_argument("--serve", action="store_true", help="run only the coordinator")
    p.add_argument("--role", help="join an existing cluster as this role")
    p.add_argument("--rank", type=int, default=0)
    return parser


def _setup(args, alg: str):
    env_type = resolve_env_type(args.env, args.env_type)
    env = build_env(args.env, env_type)
    params = call_default_params(env, env_type, alg, seed=args.seed)
    overrides = {"learn.seed": args.seed, "learn.metrics_dir": args.metrics_dir}
    if args.episodes is not None:
        overrides["learn.max_episodes"] = args.episodes
    overrides.update(parse_set(args.set))
    return env, override_params(params, overrides, alg)


def _summary(record) -> str:
    where = f"; metrics {record.path}" if record.path else ""
    return (f"{record.run_id}: {len(record)} episodes, "
            f"trailing-100 mean reward {record.trailing_mean(100):.3f}{where}")


def cmd_run(args) -> int:
    env, (alg_params, learn_params) = _setup(args, args.alg)
    agent = make_agent(args.alg, alg_params)
    if args.checkpoint_in:
        checkpoint_load(agent, args.checkpoint_in)
    record = agent.learn(env, args.command, **learn_params)
    if args.checkpoint_out:
        checkpoint_save(agent, args.checkpoint_out)
    print(_summary(record))
    return 0


def cmd_report(args) -> int:
    text = report_csv(args.runs, args.metrics_dir)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_cluster(args) -> int:
    from .dist.dppo import dppo_learn, dppo_roles
    from .dist.runtime import ClusterSpec, join_cluster
    from .dist.tcp import Coordinator

    roles = parse_roles(args.roles)
    if args.serve:
        if not args.coordinator:
            raise UsageError("--serve needs --coordinator host:port")
        spec = ClusterSpec(roles, transport="tcp", coordinator=args.coordinator, seed=args.seed)
        coord = Coordinator(spec.members, _queues(roles), args.coordinator, spec.timeout)
        print(f"coordinator listening on {coord.address[0]}:{coord.address[1]} for {spec.members}", flush=True)
        failure = coord.serve_until_done()
        if failure:
            raise RuntimeError(failure)
        return 0

    if not args.env:
        raise UsageError("cluster needs --env (and --role with --coordinator to join a running cluster)")
    alg = args.alg or "DPPO"
    if alg != "DPPO":
        raise ValueError(f"the cluster command runs DPPO; got --alg {alg}")
    env, (alg_params, learn_params) = _setup(args, alg)
    if set(roles) != {"actor", "learner"}:
        raise ValueError(f"DPPO needs roles actor and learner, got {sorted(roles)}")

    if args.role is None:
        agent = get_algorithm(alg)(**alg_params)
        lp = {**learn_params, "actors": roles["actor"], "learners": roles["learner"], "transport": args.transport}
        print(_summary(dppo_learn(agent, env, **lp)))
        return 0

    spec = ClusterSpec(roles, transport="tcp", coordinator=args.coordinator, seed=args.seed,
                       queues=_queues(roles))
    mains = dppo_roles(roles["actor"], roles["learner"], lambda rank: env, alg_params, learn_params)
    if args.role not in mains:
        raise ValueError(f"unknown role {args.role!r}; DPPO roles are actor and learner")
    ep = join_cluster(spec, args.role, args.rank)
    try:
        result = mains[args.role](ep)
    except BaseException as err:
        ep.transport.abort(f"{args.role}/{args.rank} failed: {err}")
        raise
    finally:
        ep.close()
    if args.role == "actor" and result is not None:
        print(_summary(result))
    else:
        print(f"{args.role}/{args.rank} done")
    return 0


def _queues(roles: dict) -> dict:
    from .dist.dppo import QUEUE
    return {QUEUE: roles.get("learner", 1) * (roles.get("actor", 1) + 2)}


def cmd_list_envs(args) -> int:
    for name, env_type in list_envs():
        env = build_env(name, env_type)
        print(f"{name}\t{env_type}\tobs={env.observation_space}\tact={env.action_space}")
    return 0


def cmd_list_algs(args) -> int:
    for name in list_algorithms():
        print(name)
    return 0


COMMANDS = {
    "train": cmd_run,
    "test": cmd_run,
    "list-envs": cmd_list_envs,
    "list-algs": cmd_list_algs,
    "report": cmd_report,
    "cluster": cmd_cluster,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"drlzoo: error: {err}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("drlzoo: interrupted", file=sys.stderr)
        return 1
    except Exception as err:  # domain errors become one line, never a traceback
        msg = str(err).strip().splitlines()[0] if str(err).strip() else ""
        print(f"drlzoo: {type(err).__name__}: {msg}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return run_command(argv)


if __name__ == "__main__":
    sys.exit(main())
