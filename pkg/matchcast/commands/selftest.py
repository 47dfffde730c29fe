from __future__ import annotations

import argparse

from matchcast.commands.deps import common_parser, get_settings
from matchcast.core.selftest import CHECKS, run_selftest


def register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("selftest", parents=[common_parser()], help="run the seeded acceptance checks")
    p.add_argument("--only", action="append", choices=sorted(CHECKS), help="run just this check (repeatable)")
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    settings = get_settings(args)
    results = run_selftest(settings.seed, args.only)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark} {r.name:<18} {r.seconds:6.2f}s  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed (seed {settings.seed})")
    return 1 if failed else 0
