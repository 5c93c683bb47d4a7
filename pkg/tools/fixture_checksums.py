"""
Verify or regenerate the SHA256SUMS manifest of a fixture directory.

    python tools/fixture_checksums.py                 # verify the bundled 'paper' fixture
    python tools/fixture_checksums.py --write DIR     # rewrite DIR/SHA256SUMS
"""

import argparse
import hashlib
import sys
from pathlib import Path

from loguru import logger

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT))

from lab.procurement import log  # noqa: E402
from lab.procurement.backtest import CHECKSUM_FILE, FIXTURE_ROOT, read_checksums  # noqa: E402


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(directory):
    tables = sorted(directory.glob("table_*.csv"))
    lines = [f"{digest(path)}  {path.name}" for path in tables]
    (directory / CHECKSUM_FILE).write_text("\n".join(lines) + "\n")
    logger.info(f"wrote {len(lines)} checksums to {directory / CHECKSUM_FILE}")
    return len(lines)


def verify(directory):
    manifest = read_checksums(directory)
    all_ok = True
    for name, expected in manifest.items():
        path = directory / name
        if not path.exists():
            logger.error(f"  [FAIL] {name} is missing")
            all_ok = False
        elif digest(path) != expected:
            logger.error(f"  [FAIL] {name} does not match its checksum")
            all_ok = False
        else:
            logger.info(f"  [OK] {name}")
    unlisted = {p.name for p in directory.glob("table_*.csv")} - set(manifest)
    for name in sorted(unlisted):
        logger.warning(f"  [WARN] {name} is not listed in {CHECKSUM_FILE}")
    return all_ok


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    parser.add_argument("directory", nargs="?", default=str(FIXTURE_ROOT / "paper"))
    parser.add_argument("--write", action="store_true", help="regenerate the manifest instead of verifying it")
    args = parser.parse_args(argv)

    log.configure(verbosity=1)
    directory = Path(args.directory)
    if args.write:
        write_manifest(directory)
        return 0
    ok = verify(directory)
    logger.info("fixtures verified" if ok else "fixture verification failed")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
