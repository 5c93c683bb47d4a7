import shutil

import pytest

from lab.procurement.backtest import CHECKSUM_FILE, FIXTURE_ROOT, read_checksums
from tools.fixture_checksums import main, write_manifest


@pytest.fixture
def fixture_dir(tmp_path):
    target = tmp_path / "paper"
    shutil.copytree(FIXTURE_ROOT / "paper", target)
    return target


def test_bundled_manifest_covers_every_table():
    manifest = read_checksums(FIXTURE_ROOT / "paper")
    tables = {p.name for p in (FIXTURE_ROOT / "paper").glob("table_*.csv")}
    assert set(manifest) == tables
    assert len(tables) == 13


def test_verify_passes_on_pristine_copy(fixture_dir):
    assert main([str(fixture_dir)]) == 0


def test_verify_fails_after_edit(fixture_dir):
    path = fixture_dir / "table_hedge_b.csv"
    path.write_text(path.read_text() + "\n")
    assert main([str(fixture_dir)]) == 1


def test_write_regenerates_manifest(fixture_dir):
    path = fixture_dir / "table_demand.csv"
    path.write_text(path.read_text().replace("20,1,28", "20,1,27"))
    assert main([str(fixture_dir), "--write"]) == 0
    assert main([str(fixture_dir)]) == 0
    assert write_manifest(fixture_dir) == 13
    assert (fixture_dir / CHECKSUM_FILE).read_text().count("\n") == 13
