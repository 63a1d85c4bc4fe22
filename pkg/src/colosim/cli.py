"""``colosim`` command line.

Exit codes: 0 ok, 2 validation error, 3 insufficient resources or tokens,
4 runtime failure.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .channel import ChannelError
from .compiler import (
    DEFAULT_UPDATE_PERIOD_MS,
    FSPL,
    LOG_DISTANCE,
    ChannelModelParams,
    CompileError,
    compile_scenario,
    gen_alleys,
    gen_cellular,
    gen_sce_qualification,
    parse_geometry,
)
from .orchestrator import (
    ArchiveError,
    ResourceError,
    StateDir,
    UnknownTeamError,
    collect_logs,
    run_experiment,
)
from .radio.nodes import ROLES
from .scenario import (
    ScenarioError,
    UnknownScenarioError,
    parse_batch_job,
    read_rf_scenario,
    read_traffic_script,
    serialize_traffic_script,
    write_rf_scenario,
)

EXIT_OK, EXIT_INVALID, EXIT_RESOURCES, EXIT_RUNTIME = 0, 2, 3, 4
DEFAULT_STATE = "~/.colosim"


class UsageError(ValueError):
    pass


def parse_roles(text):
    """``probe_tx,probe_rx`` or with repeats, ``modem_endpoint*4,silent``."""
    roles = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        role, _, count = item.partition("*")
        if role not in ROLES:
            raise UsageError(f"unknown role {role!r}; known: {', '.join(ROLES)}")
        try:
            n = int(count) if count else 1
        except ValueError:
            raise UsageError(f"bad repeat count in {item!r}") from None
        if n < 1:
            raise UsageError(f"bad repeat count in {item!r}")
        roles.extend([role] * n)
    if not roles:
        raise UsageError("no node roles given")
    return roles


def _print_json(obj):
    print(json.dumps(obj, indent=1, sort_keys=True))


def _state(args):
    return StateDir(Path(os.path.expanduser(args.state)))


# -- scenario --------------------------------------------------------------

def cmd_scenario(args):
    st = _state(args)
    if args.action == "list":
        with st.lock(exclusive=False):
            for row in st.catalogue.list():
                print(f"{row['id']}\t{row['n_nodes']}\t{row['duration_ms']}\t{row['carrier_hz']:g}")
        return EXIT_OK
    if args.action == "info":
        if not args.id:
            raise UsageError("scenario info needs an id")
        with st.lock(exclusive=False):
            _print_json(st.catalogue.info(args.id))
        return EXIT_OK
    # install
    if not args.id:
        raise UsageError("scenario install needs a file")
    path = Path(args.id)
    with st.lock():
        if path.suffix == ".rfscn":
            st.catalogue.install_rf(read_rf_scenario(path))
        elif path.suffix == ".tgen":
            st.catalogue.install_traffic(read_traffic_script(path, path.stem))
        else:
            raise UsageError("expected a .rfscn or .tgen file")
    print(f"installed {path.stem}")
    return EXIT_OK


# -- compile / gen ---------------------------------------------------------

def cmd_compile(args):
    terrain, trajectories = parse_geometry(Path(args.geometry).read_bytes())
    model = {"fspl": FSPL, "logdist": LOG_DISTANCE}[args.model]
    params = ChannelModelParams(model=model, pathloss_exponent=args.exponent,
                                fading=args.fading.upper(), k_factor_db=args.k_factor_db,
                                rng_seed=args.seed)
    duration = args.duration_ms
    if duration is None:
        duration = max(w.t_ms for tr in trajectories for w in tr.waypoints)
        if duration <= 0:
            raise UsageError("static geometry: pass --duration-ms")
    scn = compile_scenario(trajectories, params, terrain, args.fs, args.carrier, duration,
                           args.update_ms, scenario_id=args.id or Path(args.output).stem,
                           noise_power_dbfs=args.noise_dbfs)
    write_rf_scenario(args.output, scn)
    print(f"wrote {args.output}: {len(scn.updates)} updates, {scn.n_nodes} nodes")
    return EXIT_OK


def cmd_gen(args):
    if args.family == "sce":
        g = gen_sce_qualification(args.fs, args.noise_dbfs)
    elif args.family == "alleys":
        g = gen_alleys(args.fs, n_squads=args.squads, walkers_per_squad=args.walkers,
                       noise_dbfs=args.noise_dbfs)
    else:
        g = gen_cellular(args.bs, args.distance, args.speed, args.fs, noise_dbfs=args.noise_dbfs,
                         seed=args.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_rf_scenario(out / f"{g.rf.id}.rfscn", g.rf)
    (out / f"{g.traffic.id}.tgen").write_text(serialize_traffic_script(g.traffic))
    if g.groups:
        (out / f"{g.rf.id}.groups.json").write_text(json.dumps(g.groups, indent=1) + "\n")
    if args.install:
        st = _state(args)
        with st.lock():
            st.catalogue.install_rf(g.rf)
            st.catalogue.install_traffic(g.traffic)
    print(f"wrote {g.rf.id} ({g.rf.n_nodes} nodes, {len(g.rf.updates)} updates) to {out}")
    return EXIT_OK


# -- run -------------------------------------------------------------------

def cmd_run(args):
    st = _state(args)
    roles = parse_roles(args.nodes)
    with st.lock(exclusive=False):
        rf = st.catalogue.load_rf(args.rf)
        traffic = st.catalogue.load_traffic(args.traffic) if args.traffic else None
    exp_id = args.id or time.strftime("run-%Y%m%d-%H%M%S")
    workdir = st.root / "work" / exp_id
    if workdir.exists() or (st.root / "archive" / exp_id).exists():
        raise UsageError(f"experiment id {exp_id!r} already used")
    try:
        result = run_experiment(exp_id, rf, roles, workdir, args.duration, traffic=traffic,
                                seed=args.seed, block_size=args.block_size,
                                tuning_hz=args.tuning_hz)
    except (ChannelError, ValueError):
        raise  # validation problems keep exit code 2
    except Exception as exc:
        print(f"error: run failed, logs kept in {workdir}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    with st.lock():
        collect_logs(workdir, st.root / "archive", exp_id)
    _print_json(result.to_dict())
    return EXIT_OK


# -- batch jobs, tokens, reservations --------------------------------------

def cmd_job(args):
    st = _state(args)
    now = time.time() if args.now is None else args.now
    if args.action == "submit":
        if not args.arg:
            raise UsageError("job submit needs a file")
        spec = parse_batch_job(Path(args.arg).read_bytes())
        with st.lock():
            sched = st.load()
            jid = sched.submit_job(spec, now)
            st.save(sched)
        print(jid)
        return EXIT_OK
    if args.action == "status":
        if not args.arg:
            raise UsageError("job status needs an id")
        with st.lock(exclusive=False):
            sched = st.load()
        if args.arg not in sched.records:
            raise UsageError(f"unknown job {args.arg!r}")
        _print_json(sched.records[args.arg].to_dict())
        return EXIT_OK
    if args.action == "queue":
        with st.lock(exclusive=False):
            sched = st.load()
        for pos, jid in enumerate(sched.queue):
            r = sched.records[jid]
            print(f"{pos}\t{jid}\t{r.spec.team}\t{r.spec.n_nodes}\t{r.spec.rf_scenario_id}")
        return EXIT_OK
    # run: process the queue to completion on a simulated clock starting now
    with st.lock():
        sched = st.load()
        order, _ = sched.drain(now)
        st.save(sched)
    failed = False
    for _, jid in order:
        r = sched.records[jid]
        failed |= r.state.value == "FAILED"
        print(f"{jid}\t{r.state.value}\t{r.log_dir or ''}")
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_tokens(args):
    st = _state(args)
    now = time.time() if args.now is None else args.now
    with st.lock():
        sched = st.load()
        ledger = sched.resources.ledger
        if args.budget is not None:
            if args.team in ledger.teams:
                ledger.set_budget(args.team, args.budget)
            else:
                ledger.add_team(args.team, args.budget, now)
        ledger.weekly_reset(now)
        acct = ledger.account(args.team)
        st.save(sched)
    _print_json({"team": args.team, "balance": acct.balance, "budget": acct.budget,
                 "last_reset": acct.last_reset})
    return EXIT_OK


def cmd_reserve(args):
    st = _state(args)
    now = time.time() if args.now is None else args.now
    with st.lock():
        sched = st.load()
        r = sched.resources.reserve(args.team, args.nodes, args.hours, now)
        st.save(sched)
    _print_json(r.to_dict())
    return EXIT_OK


def cmd_config(args):
    st = _state(args)
    with st.lock():
        cfg = st.config()
        if args.pool_size is not None:
            cfg["pool_size"] = args.pool_size
        if args.rate is not None:
            cfg["rate_tokens_per_node_hour"] = args.rate
        st.save_config(cfg)
    _print_json(cfg)
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="colosim", description="Desk-scale wireless network emulator.")
    p.add_argument("--state", default=os.environ.get("COLOSIM_STATE", DEFAULT_STATE),
                   help="state directory (default: $COLOSIM_STATE or ~/.colosim)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scenario", help="list, inspect or install catalogue scenarios")
    s.add_argument("action", choices=["list", "info", "install"])
    s.add_argument("id", nargs="?")
    s.set_defaults(func=cmd_scenario)

    s = sub.add_parser("compile", help="compile a geometry file into an .rfscn")
    s.add_argument("--geometry", required=True)
    s.add_argument("--model", choices=["fspl", "logdist"], default="fspl")
    s.add_argument("--exponent", type=float, default=2.0)
    s.add_argument("--fading", choices=["none", "rayleigh", "rician"], default="none")
    s.add_argument("--k-factor-db", type=float, default=0.0)
    s.add_argument("--fs", type=float, required=True)
    s.add_argument("--carrier", type=float, required=True)
    s.add_argument("--duration-ms", type=int)
    s.add_argument("--update-ms", type=int, default=DEFAULT_UPDATE_PERIOD_MS)
    s.add_argument("--noise-dbfs", type=float, default=-100.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--id")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("gen", help="generate a scenario family")
    s.add_argument("family", choices=["sce", "alleys", "cellular"])
    s.add_argument("--fs", type=float, default=1e6)
    s.add_argument("--noise-dbfs", type=float)
    s.add_argument("--squads", type=int, default=5)
    s.add_argument("--walkers", type=int, default=9)
    s.add_argument("--bs", type=int, default=10)
    s.add_argument("--distance", choices=["close", "medium", "far"], default="close")
    s.add_argument("--speed", choices=["static", "moderate", "fast"], default="static")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--install", action="store_true", help="also install into the catalogue")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("run", help="run one experiment now and archive it")
    s.add_argument("--rf", required=True)
    s.add_argument("--traffic")
    s.add_argument("--nodes", required=True, help="roles, e.g. probe_tx,probe_rx or modem_endpoint*4")
    s.add_argument("--duration", type=float, required=True, help="seconds of emulated time")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--block-size", type=int, default=4096)
    s.add_argument("--tuning-hz", type=float)
    s.add_argument("--id")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("job", help="batch jobs")
    s.add_argument("action", choices=["submit", "status", "queue", "run"])
    s.add_argument("arg", nargs="?")
    s.add_argument("--now", type=float, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_job)

    s = sub.add_parser("tokens", help="show a team's tokens; --budget creates or updates it")
    s.add_argument("--team", required=True)
    s.add_argument("--budget", type=float)
    s.add_argument("--now", type=float, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_tokens)

    s = sub.add_parser("reserve", help="reserve nodes for interactive use")
    s.add_argument("--team", required=True)
    s.add_argument("--nodes", type=int, required=True)
    s.add_argument("--hours", type=float, required=True)
    s.add_argument("--now", type=float, help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_reserve)

    s = sub.add_parser("config", help="show or set pool size and token rate")
    s.add_argument("--pool-size", type=int)
    s.add_argument("--rate", type=float)
    s.set_defaults(func=cmd_config)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "noise_dbfs", 0) is None:
        args.noise_dbfs = -80.0 if args.family == "sce" else -100.0
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCES
    except (ScenarioError, CompileError, FileNotFoundError, ChannelError, UsageError, UnknownScenarioError,
            UnknownTeamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArchiveError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
