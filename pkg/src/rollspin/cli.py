"""Command-line surface.

One spec file drives every command; outputs land under --out with fixed
names.  Exit codes: 0 success, 1 domain or validation error, 2 I/O error.
Every command is deterministic given the spec file and --seed.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import chain, config, exporters, lumen, profile, spin


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(1, message)


class _UsageError(Exception):
    def __init__(self, code, message):
        self.code = code
        self.message = message


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", default=argparse.SUPPRESS,
                        help="spec file path, or 'default' for the bundled document")
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="output directory")
    common.add_argument("--format", choices=("csv", "svg"),
                        default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for randomized checks")

    p = _Parser(prog="rollspin", description=__doc__, parents=[common])
    p.set_defaults(spec="default", out="out", format="csv", seed=0)
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(group, name, **extra_args):
        q = group.add_parser(name, parents=[common])
        for flag, kw in extra_args.items():
            q.add_argument(flag, **kw)
        return q

    prof = sub.add_parser("profile", parents=[common]) \
        .add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("synth", "check", "critical-n", "export"):
        leaf(prof, name)

    kin = sub.add_parser("kin", parents=[common]) \
        .add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("fk", "tendon"):
        leaf(kin, name,
             **{"--alpha1-deg": dict(type=float, default=0.0),
                "--alpha2-deg": dict(type=float, default=0.0)})
    leaf(kin, "workspace", **{"--step-deg": dict(type=float, default=5.0)})
    leaf(kin, "audit", **{"--configs": dict(type=int, default=100)})

    env = sub.add_parser("env", parents=[common]) \
        .add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    leaf(env, "clearance",
         **{"--depth": dict(type=float, default=0.0),
            "--alpha1-deg": dict(type=float, default=0.0),
            "--alpha2-deg": dict(type=float, default=0.0)})
    leaf(env, "autosteer",
         **{"--depths": dict(default="0:60:10", help="start:stop:step, mm"),
            "--grid-step-deg": dict(type=float, default=5.0)})

    sp = sub.add_parser("spin", parents=[common]) \
        .add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    leaf(sp, "footprint", **{"--tilt-deg": dict(type=float, default=0.0)})
    leaf(sp, "aim", **{"--target": dict(default="0,0,200", help="x,y,z in mm")})
    leaf(sp, "plan", **{"--waypoints": dict(type=int, default=5)})

    rep = sub.add_parser("report", parents=[common]) \
        .add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    leaf(rep, "paper")
    return p


def _profile_from(doc: config.SpecDocument) -> profile.JointProfile:
    return profile.generate_profile(doc.joint, theta_sweep=math.pi / 2,
                                    n_samples=256)


def _cmd_profile(args, doc, out: Path) -> None:
    prof = _profile_from(doc)
    if args.cmd == "synth":
        exporters.export_profile_csv(prof, out / "profile.csv")
        if args.format == "svg":
            exporters.export_svg(prof, out / "profile.svg")
        print(f"profile sampled at {len(prof.theta_samples)} angles; "
              f"apex {prof.theta_apex}; closed {prof.closed}")
    elif args.cmd == "check":
        lines = [
            f"closed: {prof.closed}",
            f"simple: {prof.simple}",
            f"theta_apex_rad: {prof.theta_apex}",
        ]
        worst = 0.0
        for k in range(-90, 91):
            rep = profile.check_interference(prof, math.radians(k * 0.5))
            if rep.structural_error:
                lines.append(f"structural_error: {rep.structural_error}")
                break
            worst = max(worst, rep.overlap_area)
        lines.append(f"max_overlap_mm2_over_half_deg_grid: {exporters.fmt(worst)}")
        text = "\n".join(lines) + "\n"
        (out / "profile_check.txt").write_text(text)
        print(text, end="")
    elif args.cmd == "critical-n":
        res = profile.find_critical_n(doc.joint.L, doc.joint.theta_max)
        (out / "critical_n.txt").write_text(res.report() + "\n")
        print(res.report())
    elif args.cmd == "export":
        exporters.export_svg(prof, out / "profile.svg")
        exporters.export_profile_csv(prof, out / "profile.csv")
        print(f"wrote {out / 'profile.svg'} and {out / 'profile.csv'}")


def _cmd_kin(args, doc, out: Path) -> None:
    spec = doc.manipulator
    if args.cmd in ("fk", "tendon"):
        cfg = chain.section_config(spec, math.radians(args.alpha1_deg),
                                   math.radians(args.alpha2_deg))
        if args.cmd == "fk":
            fk = chain.forward_kinematics(spec, cfg)
            rows = [(i, *p.t) for i, p in enumerate(fk.poses)]
            rows.append(("tip", *fk.tip.t))
            exporters.write_csv(out / "fk.csv",
                                ["frame", "x_mm", "y_mm", "z_mm"],
                                ((str(a), b, c, d) for a, b, c, d in rows))
            print(f"tip at {fk.tip.t}, centerline {fk.centerline_length} mm")
        else:
            ts = chain.tendon_lengths(spec, cfg)
            exporters.write_csv(
                out / "tendon.csv",
                ["tendon", "length_mm", "displacement_mm"],
                ((n, ts.lengths[n], ts.displacements[n])
                 for n in chain.TENDON_NAMES))
            print(ts.displacements)
    elif args.cmd == "workspace":
        lim_deg = math.degrees(spec.section_limit)
        grid = np.radians(np.arange(-lim_deg, lim_deg + 1e-9, args.step_deg))
        ws = chain.workspace(spec, grid, grid)
        exporters.write_csv(out / "workspace.csv",
                            ["alpha1_rad", "alpha2_rad", "tip_x_mm",
                             "tip_y_mm", "tip_z_mm"], ws.csv_rows())
        summary = "\n".join(
            f"max bend {k}: {exporters.fmt(math.degrees(v))} deg"
            for k, v in sorted(ws.max_bend.items())) + "\n"
        (out / "workspace_summary.txt").write_text(summary)
        print(summary, end="")
    elif args.cmd == "audit":
        rng = np.random.default_rng(args.seed)
        lim = spec.joint.theta_max
        configs = [chain.ConfigState(tuple(rng.uniform(-lim, lim, spec.joint_count)))
                   for _ in range(args.configs)]
        rep = chain.centerline_audit(spec, configs)
        exporters.write_csv(out / "audit.csv",
                            ["config_id", "length_mm", "circular_length_mm",
                             "deviation_mm"], rep.csv_rows())
        print(f"max deviation {exporters.fmt(rep.max_deviation)} mm over "
              f"{len(rep.rows)} configs")


def _env_path(doc) -> lumen.LumenPath:
    if doc.path_file:
        return lumen.LumenPath.from_csv(doc.path_file)
    return lumen.demo_path()


def _cmd_env(args, doc, out: Path) -> None:
    spec = doc.manipulator
    path = _env_path(doc)
    if args.cmd == "clearance":
        cfg = chain.section_config(spec, math.radians(args.alpha1_deg),
                                   math.radians(args.alpha2_deg))
        st = lumen.make_insertion(path, cfg, args.depth)
        rep = lumen.clearance(path, spec, st)
        text = (f"min clearance {exporters.fmt(rep.min_clearance)} mm at "
                f"backbone sample {rep.backbone_index}\n")
        (out / "clearance.txt").write_text(text)
        print(text, end="")
    elif args.cmd == "autosteer":
        start, stop, step = (float(v) for v in args.depths.split(":"))
        depths = list(np.arange(start, stop + 1e-9, step))
        lim_deg = math.degrees(spec.section_limit)
        grid = np.radians(np.arange(-lim_deg, lim_deg + 1e-9,
                                    args.grid_step_deg))
        trace = lumen.auto_steer(path, spec, depths, grid, grid)
        exporters.write_csv(out / "autosteer_trace.csv",
                            ["depth_mm", "alpha1_rad", "alpha2_rad",
                             "clearance_mm", "passable"], trace.csv_rows())
        print(f"wrote {len(trace.rows)} rows to autosteer_trace.csv")


def _cmd_spin(args, doc, out: Path) -> None:
    spec = doc.manipulator
    settings = doc.spin
    if args.cmd == "footprint":
        fk = chain.forward_kinematics(
            spec, chain.ConfigState((0.0,) * spec.joint_count))
        cone = spin.JetCone.from_tip(fk.tip, settings.half_angle,
                                     settings.range_mm)
        tilt = math.radians(args.tilt_deg)
        normal = math.cos(tilt) * cone.axis + math.sin(tilt) * fk.tip.R[:, 0]
        plane = spin.TargetPlane.from_point_normal(
            cone.apex + settings.range_mm * cone.axis, normal)
        fp = spin.footprint(cone, plane)
        exporters.write_csv(out / "footprint.csv",
                            ["cx_mm", "cy_mm", "a_mm", "b_mm", "area_mm2"],
                            [(fp.center[0], fp.center[1], fp.semi_major,
                              fp.semi_minor, fp.area)])
        print(f"footprint a={exporters.fmt(fp.semi_major)} "
              f"b={exporters.fmt(fp.semi_minor)} area={exporters.fmt(fp.area)}")
    elif args.cmd == "aim":
        target = [float(v) for v in args.target.split(",")]
        res = spin.aim_at(spec, target)
        exporters.write_csv(out / "aim.csv",
                            ["alpha1_rad", "alpha2_rad", "residual_rad",
                             "reachable"],
                            [(res.section_angles[0], res.section_angles[1],
                              res.residual, "1" if res.reachable else "0")])
        print(f"angles {res.section_angles}, residual "
              f"{exporters.fmt(res.residual)}, reachable {res.reachable}")
    elif args.cmd == "plan":
        plan = _demo_plan(doc, args.waypoints)
        exporters.write_csv(
            out / "schedule.csv",
            ["waypoint_id", "alpha1_rad", "alpha2_rad", "steps1", "steps2",
             "footprint_cx", "footprint_cy", "a_mm", "b_mm", "reachable"],
            plan.csv_rows())
        text = (f"coverage fraction {exporters.fmt(plan.coverage_fraction)}\n"
                f"overspray {exporters.fmt(plan.overspray_area)} mm2\n"
                f"union area {exporters.fmt(plan.union_area)} mm2\n")
        (out / "coverage.txt").write_text(text)
        print(text, end="")


def _demo_plan(doc, n_waypoints: int) -> spin.CoveragePlan:
    """Line sweep across the target plane at the working distance."""
    spec = doc.manipulator
    settings = doc.spin
    fk = chain.forward_kinematics(spec,
                                  chain.ConfigState((0.0,) * spec.joint_count))
    center = fk.tip.t + settings.range_mm * fk.tip.forward
    plane = spin.TargetPlane.from_point_normal(center, fk.tip.forward)
    xs = np.linspace(-10.0, 10.0, n_waypoints)
    targets = np.array([plane.to_world([x, 0.0]) for x in xs])
    ang = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    region = np.column_stack([20.0 * np.cos(ang), 14.0 * np.sin(ang)])
    return spin.plan_coverage(spec, targets, settings.params, plane, region,
                              settings.half_angle)


def _cmd_report(args, doc, out: Path) -> None:
    class A:
        pass

    a = A()
    a.format = "svg"
    a.cmd = "export"
    _cmd_profile(a, doc, out)
    a.cmd = "critical-n"
    _cmd_profile(a, doc, out)
    a.cmd = "workspace"
    a.step_deg = 5.0
    a.seed = args.seed
    _cmd_kin(a, doc, out)
    a.cmd = "audit"
    a.configs = 100
    _cmd_kin(a, doc, out)
    a.cmd = "plan"
    a.waypoints = 5
    _cmd_spin(a, doc, out)
    a.cmd = "autosteer"
    a.depths = "0:60:10"
    a.grid_step_deg = 5.0
    _cmd_env(a, doc, out)
    index = "\n".join([
        "profile.svg        joint contour (head outline + interleave oval)",
        "profile.csv        contact-point loci samples",
        "critical_n.txt     critical normalization factor report",
        "workspace.csv      tip positions over the section-angle grid",
        "workspace_summary.txt  per-direction bend report",
        "audit.csv          centerline length audit (seeded configs)",
        "schedule.csv       deposition schedule (demo line sweep)",
        "coverage.txt       raster coverage metrics",
        "autosteer_trace.csv  auto-steer trace on the bundled path",
    ]) + "\n"
    (out / "REPORT.txt").write_text(index)
    print("report written to", out)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        doc = config.load_spec(args.spec)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.group == "profile":
            _cmd_profile(args, doc, out)
        elif args.group == "kin":
            _cmd_kin(args, doc, out)
        elif args.group == "env":
            _cmd_env(args, doc, out)
        elif args.group == "spin":
            _cmd_spin(args, doc, out)
        elif args.group == "report":
            _cmd_report(args, doc, out)
        return 0
    except _UsageError as exc:
        print(exc.message, file=sys.stderr)
        return exc.code
    except (config.SpecValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
