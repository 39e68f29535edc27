"""The command-line pipeline end to end.

Every subcommand reads the same plain-text config, prints one PASS/FAIL
line per check, writes CSV/JSON/SVG artifacts into --out, and signals
through its exit code: 0 all checks passed, 2 some check failed,
1 the config was rejected.  Runs are byte-identical across repeats and
worker counts.
"""

import contextlib
import io
import pathlib

from opentorus.cli import main as cli_main

HERE = pathlib.Path(__file__).parent
OUT = HERE / "out" / "cli"

CONFIG = """\
# one config drives every subcommand
matrix = 2 1; 1 1
hole_center = 0.0 0.0
hole_radius = 0.2
# covering uses the radii with 2r < r0, the sweep uses all of them
radius_list = 0.1 0.14 0.16 0.18 0.2
t = 6
k = 2
workers = 2
"""


def run(argv):
    buf, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
        rc = cli_main(argv)
    return rc, buf.getvalue(), err.getvalue()


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    cfg_path = HERE / "out" / "demo.cfg"
    cfg_path.write_text(CONFIG)

    print("== single subcommands ==")
    for cmd in ("calibrate", "cover-verify"):
        rc, out, _ = run([cmd, "--config", str(cfg_path), "--out", str(OUT)])
        print(f"$ opentorus {cmd} --config demo.cfg   (exit {rc})")
        for line in out.strip().splitlines():
            print(f"  {line}")
        print()

    print("== a bad config is refused with the offending field ==")
    bad = HERE / "out" / "bad.cfg"
    bad.write_text("hole_radius = 0.3\n")
    rc, _, err = run(["mixing-fit", "--config", str(bad), "--out", str(OUT)])
    print(f"$ opentorus mixing-fit --config bad.cfg   (exit {rc})")
    print(f"  {err.strip()}")

    print()
    print("== the full report ==")
    rc, out, _ = run(["report", "--config", str(cfg_path), "--out", str(OUT)])
    lines = out.strip().splitlines()
    passed = sum(1 for ln in lines if ln.startswith("PASS"))
    print(f"$ opentorus report --config demo.cfg   (exit {rc})")
    print(f"  {passed}/{len(lines)} checks passed; the sweep section:")
    for line in lines:
        if line.split(" ", 2)[1].startswith("dim_sweep"):
            print(f"  {line}")

    print()
    print("== artifacts ==")
    for p in sorted(OUT.iterdir()):
        print(f"  {p.relative_to(HERE)}  ({p.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
