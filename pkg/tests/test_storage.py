from fractions import Fraction

import pytest
from pydantic import ValidationError

from src.config.settings import Settings
from src.errors import InputError
from src.storage.cache import CohomologyCache
from src.storage.io import DataIO, DataPaths
from src.storage.schemas import ActionSpec, GroupSpec, RationalPayload, SweepCatalog


def test_dumps_is_sorted_with_trailing_newline():
    text = DataIO.dumps({"b": 1, "a": [1, 2]})
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("}\n")


def test_load_model_rejects_wrong_shape(tmp_path):
    path = tmp_path / "group.json"
    path.write_text('{"preset": "S3", "cayley": [[0]]}')
    with pytest.raises(InputError):
        DataIO.load_model(str(path), GroupSpec)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        DataIO.load_json(str(tmp_path / "nope.json"))


def test_rational_payload():
    payload = RationalPayload.from_fraction(Fraction(6, 4))
    assert (payload.num, payload.den) == (3, 2)
    assert payload.to_fraction() == Fraction(3, 2)


def test_action_kind_inferred():
    assert ActionSpec().kind == "trivial"
    assert ActionSpec(gens={"1": [[1]]}).kind == "gens"
    with pytest.raises(ValidationError):
        ActionSpec(kind="sign")


def test_catalog_policy_checked():
    with pytest.raises(ValidationError):
        SweepCatalog(family_policy="random")


def test_csv_columns_sorted():
    text = DataIO.to_csv([{"b": 2, "a": 1}])
    assert text.splitlines()[0] == "a,b"


def test_metadata_sidecar_path():
    assert DataPaths.metadata_sidecar("out/report.json") == "out/report.json.meta.json"
    assert DataPaths.sweep_report("abcdef0123456789", "20260101").endswith("sweep_abcdef012345_20260101.json")


def test_memory_cache_is_idempotent():
    cache = CohomologyCache()
    cache.put("k", {"v": 1})
    cache.put("k", {"v": 2})
    assert cache.get("k") == {"v": 1}
    cache.clear()
    assert cache.get("k") is None


def test_unreadable_disk_entry_is_ignored(tmp_path):
    (tmp_path / "bad.json").write_text("{")
    assert CohomologyCache(str(tmp_path)).get("bad") is None


def test_settings_validate(monkeypatch):
    assert Settings.validate() == []
    monkeypatch.setattr(Settings, "H1_CAP", -1)
    monkeypatch.setattr(Settings, "LOG_LEVEL", "LOUD")
    problems = Settings.validate()
    assert len(problems) == 2
