#!/usr/bin/env python3
"""Catalog validation script.

Checks every built-in representation: relators evaluate to +-Id and the top
root gap tau_1 passes the domination fit on the ball of the given depth.

Usage:
    python3 scripts/validate_catalog.py                       # All catalog entries at depth 8
    python3 scripts/validate_catalog.py --depth 6             # Shallower balls
    python3 scripts/validate_catalog.py --only f2-schottky    # One entry
"""

import argparse
import sys
from pathlib import Path

# Add parent directory to path for src imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config.logging import configure_logging  # noqa: E402
from src.services.anosov import domination_fit  # noqa: E402
from src.services.catalog import ExampleCatalog  # noqa: E402
from src.services.errors import LabError  # noqa: E402
from src.services.group_core import build_solver  # noqa: E402
from src.services.replin import BallEvaluator, check_relations  # noqa: E402


def validate(name: str, depth: int, catalog: ExampleCatalog) -> bool:
    """Relations and tau_1 domination for one catalog entry."""
    rep = catalog.representation(name)
    defect = check_relations(rep)
    relations_ok = defect <= 1e-8
    print(f"  relations: max defect {defect:.3g} {'✅' if relations_ok else '❌'}")
    _, enumerator = build_solver(rep.presentation)
    spectra = BallEvaluator(rep).spectra(enumerator.ball(depth))
    fit = domination_fit(spectra, 1)
    print(
        f"  domination tau_1: mu={fit.mu:.4g} C={fit.intercept:.4g} margin={fit.min_margin:.3g} "
        f"over {spectra.size} elements {'✅' if fit.verdict else '❌'}"
    )
    return relations_ok and fit.verdict


def main() -> int:
    """Main entry point for catalog validation."""
    parser = argparse.ArgumentParser(description="Validate the built-in representation catalog")
    parser.add_argument("--depth", type=int, default=8, help="Ball radius for the domination fit (default: 8)")
    parser.add_argument("--only", action="append", help="Validate only these entries (repeatable)")
    args = parser.parse_args()

    configure_logging(level="WARNING", log_format="text")
    catalog = ExampleCatalog()
    names = args.only or catalog.names()

    print("\n" + "=" * 70)
    print(f"Catalog validation at depth {args.depth}")
    print("=" * 70)

    failures = []
    for name in names:
        print(f"\n{name}")
        try:
            if not validate(name, args.depth, catalog):
                failures.append(name)
        except LabError as exc:
            print(f"  ❌ {type(exc).__name__}: {exc}")
            failures.append(name)

    print("\n" + "-" * 70)
    if failures:
        print(f"❌ {len(failures)} of {len(names)} entries failed: {', '.join(failures)}")
        return 1
    print(f"✅ All {len(names)} entries passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
