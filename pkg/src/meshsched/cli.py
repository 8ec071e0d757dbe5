"""Command line entry point: `meshsched <command>`."""

import csv
import io
import sys

import click
import numpy as np

from . import dtmc, gtbr
from .experiments import ALGOS, P2MP_ALGOS, PRESETS, parse_range, run_algo, sweep
from .netgraph import build_comm_graph, read_network, write_network
from .randomaccess import RaConfig, simulate_fcfs, simulate_pcfcfs
from .sched_p2mp import BroadcastScheduleT, conflict_violations, spatial_reuse_p2mp, structural_violations
from .sched_p2p import format_schedule, parse_schedule, validate_schedule


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _write_csv(out, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    _emit(out, buf.getvalue())


def _emit(out, text):
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _load_network(path):
    try:
        with open(path) as fh:
            return read_network(fh.read())
    except (OSError, ValueError) as exc:
        raise click.ClickException(f"cannot read network {path}: {exc}") from exc


def _range(text, cast=float):
    try:
        return parse_range(text, cast)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


preset_opt = click.option("--preset", type=click.Choice(sorted(PRESETS)), default="expt1", show_default=True)
seed_opt = click.option("--seed", type=int, default=0, show_default=True)
out_opt = click.option("--out", type=click.Path(dir_okay=False), default=None, help="output file (default stdout)")


@click.group()
def main():
    """STDMA scheduling, PCFCFS random access and GTBR entropy tools."""


@main.command()
@preset_opt
@seed_opt
@click.option("--n", "n", type=int, required=True, help="number of nodes")
@out_opt
def gen(preset, seed, n, out):
    """Generate a random network file."""
    cfg = PRESETS[preset]
    if n < 2:
        raise click.BadParameter("need at least two nodes", param_hint="--n")
    net = cfg.network(n, np.random.default_rng(seed))
    _emit(out, write_network(net, cfg.noise_dbm, cfg.comm_db, cfg.intf_db))


@main.command()
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.option("--algo", type=click.Choice(ALGOS), required=True)
@seed_opt
@out_opt
def schedule(network, algo, seed, out):
    """Schedule a network file with one algorithm."""
    net = _load_network(network)
    cg = build_comm_graph(net)
    s = run_algo(algo, net, cg, np.random.default_rng(seed))
    _emit(out, format_schedule(s, broadcast=algo in P2MP_ALGOS))


@main.command()
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.argument("schedule_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--strict", is_flag=True, help="exit with status 1 if the schedule is not conflict-free")
def validate(network, schedule_file, strict):
    """Check a schedule against a network and report spatial reuse."""
    net = _load_network(network)
    cg = build_comm_graph(net)
    try:
        with open(schedule_file) as fh:
            kind, s = parse_schedule(fh.read())
    except (OSError, ValueError) as exc:
        raise click.ClickException(f"cannot read schedule {schedule_file}: {exc}") from exc
    if any(not 1 <= v <= net.n for slot in (s if kind == "p2mp" else s.slots) for x in slot
           for v in ((x,) if kind == "p2mp" else x)):
        raise click.ClickException("schedule refers to nodes outside the network")
    if kind == "p2mp":
        bs = BroadcastScheduleT(s)
        viol = structural_violations(cg, bs) + conflict_violations(cg, bs)
        ok = not viol
        click.echo(f"kind: broadcast\ncolors: {bs.num_colors}\nconflict_free: {ok}")
        click.echo(f"spatial_reuse: {_fmt(spatial_reuse_p2mp(net, cg, bs)) if bs.slots else 'nan'}")
    else:
        rep = validate_schedule(net, cg, s)
        viol = rep.violations
        ok = rep.conflict_free
        click.echo(f"kind: link\ncolors: {s.num_colors}\nconflict_free: {ok}")
        click.echo(f"spatial_reuse: {_fmt(rep.spatial_reuse)}")
        for k, slot in enumerate(rep.slot_sinr_db, start=1):
            cells = " ".join(f"{a}->{b}:{_fmt(float(x))}" for (a, b), x in slot)
            click.echo(f"slot {k} sinr_db: {cells}")
    for kind_, detail in viol:
        click.echo(f"violation: {kind_} {detail}")
    if strict and not ok:
        sys.exit(1)


@main.command("sweep")
@click.option("--algo", type=click.Choice(ALGOS), required=True)
@preset_opt
@seed_opt
@click.option("--n", "n_range", required=True, help="node counts a:b:step")
@click.option("--trials", type=int, default=None, help="instances per point (default: preset's)")
@click.option("--metric", type=click.Choice(["reuse", "colors"]), default="reuse", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@out_opt
def sweep_cmd(algo, preset, seed, n_range, trials, metric, jobs, out):
    """Average spatial reuse (or schedule length) over random networks per N."""
    cfg = PRESETS[preset]
    ns = _range(n_range, int)
    trials = cfg.trials if trials is None else trials
    if trials < 1 or min(ns) < 2:
        raise click.BadParameter("need trials >= 1 and N >= 2")
    rows = sweep(cfg, algo, ns, trials, seed, metric, jobs)
    _write_csv(out, ["n", "mean_metric", "stderr"], rows)


@main.command("ra-sim")
@click.option("--lambda", "lam_range", default="0.40:0.60:0.01", show_default=True)
@seed_opt
@click.option("--tau", type=int, default=300_000, show_default=True)
@click.option("--warmup", type=int, default=1_000, show_default=True)
@click.option("--trace", type=click.Path(dir_okay=False), default=None, help="PCFCFS slot trace of the first lambda")
@out_opt
def ra_sim(lam_range, seed, tau, warmup, trace, out):
    """Simulate PCFCFS and FCFS over a range of arrival rates."""
    lams = _range(lam_range)
    if min(lams) <= 0:
        raise click.BadParameter("arrival rates must be positive")
    rows = []
    for i, lam in enumerate(lams):
        cfg = RaConfig.table_8_1(lam=lam, tau=tau, warmup=warmup, seed=seed)
        for name, fn in (("pcfcfs", simulate_pcfcfs), ("fcfs", simulate_fcfs)):
            m = fn(cfg, trace=trace is not None and i == 0 and name == "pcfcfs")
            if m.trace:
                with open(trace, "w") as fh:
                    fh.write("\n".join(m.trace) + "\n")
            nan = float("nan")
            rows.append((name, lam, *(nan if x is None else x for x in (m.throughput, m.avg_delay, m.avg_power))))
    _write_csv(out, ["algo", "lambda", "throughput", "avg_delay", "avg_power"], rows)


@main.command("ra-analyze")
@click.option("--g0", "g_range", default="0.05:4.00:0.05", show_default=True, help="grid of g0 values")
@click.option("--i-max", type=int, default=40, show_default=True)
@out_opt
def ra_analyze(g_range, i_max, out):
    """Throughput bound zeta(g0) of PCFCFS from the CRP Markov chain."""
    gs = _range(g_range)
    if min(gs) <= 0:
        raise click.BadParameter("g0 must be positive")
    rows = []
    for g in gs:
        ek, ef = dtmc.crp_moments(g, i_max)
        rows.append((g, g * (1 - ef) / ek, ek, ef))
    _write_csv(out, ["g0", "zeta", "EK", "EF"], rows)
    g, z, phi0 = dtmc.optimum(i_max=i_max)
    click.echo(f"zeta*={z:.4f} at g0={g:.3f}, phi0={phi0:.2f}", err=out is None or out == "-")


@main.command("gtbr-opt")
@click.option("--S", "S", type=int, required=True)
@click.option("--r", "r", type=int, required=True)
@click.option("--B", "B", type=int, required=True)
@click.option("--check-slack", is_flag=True, help="also try depth sums below (S-1)B (S <= 4)")
@out_opt
def gtbr_opt(S, r, B, check_slack, out):
    """Best GTBR comparable to the STBR (S, r, B); one CSV row per optimal tie."""
    try:
        res = gtbr.search_optimal_gtbr(S, r, B, check_slack=check_slack)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    rows = [(" ".join(map(str, rr)), " ".join(map(str, cc)), res.h_g, res.h_s, res.gain_pct) for rr, cc in res.ties]
    _write_csv(out, ["r_seq", "B_seq", "H_g", "H_s", "gain_pct"], rows)
    if check_slack:
        verdict = "beats" if res.slack_wins else "does not beat"
        click.echo(f"best depth sum below {(S - 1) * B}: {res.slack_best:.6g} bits ({verdict} the optimum)", err=True)


if __name__ == "__main__":
    main()
